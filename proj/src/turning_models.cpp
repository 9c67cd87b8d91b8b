#include "chatter/turning_models.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "chatter/errors.hpp"

namespace chatter {

namespace {

struct Derivative {
  double dy;
  double dv;
};

// Right-hand side of the first-order system (y, v = y').
Derivative rhs(double y, double v, double y_delayed, const TurningParams& p) {
  return {v, -2.0 * p.zeta * v - y + cutting_force(y, y_delayed, p)};
}

// Cubic Hermite value at the midpoint of [t_a, t_a + h].
double hermite_midpoint(double ya, double va, double yb, double vb, double h) {
  return 0.5 * (ya + yb) + 0.125 * h * (va - vb);
}

void check_bound(double y, double bound, std::size_t step) {
  if (!std::isfinite(y) || std::abs(y) > bound) {
    std::ostringstream msg;
    msg << "displacement left the bound " << bound << " at step " << step;
    throw SimulationDiverged(msg.str());
  }
}

}  // namespace

double TurningParams::force_scale() const { return std::pow(rho, alpha - 1.0); }

void TurningParams::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(finite(zeta) && zeta > 0.0)) throw DomainError("zeta must be > 0");
  if (!(finite(b) && b >= 0.0)) throw DomainError("b must be >= 0");
  if (!(finite(rho) && rho > 0.0)) throw DomainError("rho must be > 0");
  if (!(finite(alpha) && alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha must lie in (0, 1]");
  }
  if (!(finite(speed_ratio) && speed_ratio > 0.0)) {
    throw DomainError("speed_ratio must be > 0");
  }
}

void SimConfig::validate() const {
  if (steps_per_delay <= 0) throw DomainError("steps_per_delay must be positive");
  if (horizon_delays <= 0) throw DomainError("horizon_delays must be positive");
  if (!(blowup_bound > 0.0)) throw DomainError("blowup_bound must be positive");
  if (!std::isfinite(history_value)) throw DomainError("history_value must be finite");
}

void StochasticParams::validate() const {
  base.validate();
  if (!(std::isfinite(delta) && delta >= 0.0)) throw DomainError("delta must be >= 0");
}

double cutting_force(double y_now, double y_delayed, const TurningParams& params) {
  const double chip = 1.0 + y_delayed - y_now;
  if (chip <= 0.0 || params.b == 0.0) return 0.0;
  return params.b * params.force_scale() * std::pow(chip, params.alpha);
}

TimeSeries simulate_deterministic(const TurningParams& params, const SimConfig& config) {
  params.validate();
  config.validate();

  const std::size_t lag = static_cast<std::size_t>(config.steps_per_delay);
  const std::size_t steps = lag * static_cast<std::size_t>(config.horizon_delays);
  const double dt = params.tau() / static_cast<double>(lag);
  const double h0 = config.history_value;

  std::vector<double> y(steps + 1);
  std::vector<double> v(steps + 1);
  y[0] = h0;
  v[0] = 0.0;

  // Node n - lag is the delayed sample of node n; negative indices are history.
  auto y_at = [&](std::size_t n, std::size_t back) { return n >= back ? y[n - back] : h0; };
  auto v_at = [&](std::size_t n, std::size_t back) { return n >= back ? v[n - back] : 0.0; };

  for (std::size_t n = 0; n < steps; ++n) {
    const double yd0 = y_at(n, lag);
    const double yd1 = y_at(n + 1, lag);
    const double yd_mid = hermite_midpoint(yd0, v_at(n, lag), yd1, v_at(n + 1, lag), dt);

    const double yn = y[n];
    const double vn = v[n];
    const Derivative k1 = rhs(yn, vn, yd0, params);
    const Derivative k2 = rhs(yn + 0.5 * dt * k1.dy, vn + 0.5 * dt * k1.dv, yd_mid, params);
    const Derivative k3 = rhs(yn + 0.5 * dt * k2.dy, vn + 0.5 * dt * k2.dv, yd_mid, params);
    const Derivative k4 = rhs(yn + dt * k3.dy, vn + dt * k3.dv, yd1, params);

    y[n + 1] = yn + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    v[n + 1] = vn + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    check_bound(y[n + 1], config.blowup_bound, n + 1);
  }

  return TimeSeries{0.0, dt, std::move(y)};
}

std::vector<double> brownian_increments(std::size_t n, double dt, std::uint64_t seed) {
  if (n == 0) throw DomainError("brownian_increments needs n > 0");
  if (!(dt > 0.0)) throw DomainError("brownian_increments needs dt > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(dt);
  std::vector<double> out(n);
  for (auto& dw : out) dw = scale * normal(rng);
  return out;
}

TimeSeries simulate_stochastic(const StochasticParams& sparams, const SimConfig& config) {
  sparams.validate();
  config.validate();
  const TurningParams& p = sparams.base;

  const std::size_t lag = static_cast<std::size_t>(config.steps_per_delay);
  const std::size_t steps = lag * static_cast<std::size_t>(config.horizon_delays);
  const double dt = p.tau() / static_cast<double>(lag);
  const double h0 = config.history_value;
  const double noise_scale = sparams.delta * p.force_scale();

  const std::vector<double> dw = brownian_increments(steps, dt, config.seed);

  std::vector<double> y(steps + 1);
  double v = 0.0;
  y[0] = h0;

  for (std::size_t n = 0; n < steps; ++n) {
    const double yn = y[n];
    const double yd = n >= lag ? y[n - lag] : h0;
    const double chip = 1.0 + yd - yn;
    const double drift_v = -2.0 * p.zeta * v - yn + cutting_force(yn, yd, p);
    const double diffusion = chip > 0.0 ? noise_scale * std::pow(chip, p.alpha) : 0.0;

    y[n + 1] = yn + dt * v;
    v = v + dt * drift_v + diffusion * dw[n];
    check_bound(y[n + 1], config.blowup_bound, n + 1);
  }

  return TimeSeries{0.0, dt, std::move(y)};
}

}  // namespace chatter
