#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

namespace chatter {

// Nondimensional single-degree-of-freedom turning model
//   y'' + 2 zeta y' + y = b rho^(alpha-1) (1 + y(t - tau) - y(t))^alpha
// with time scaled by the natural frequency and displacement by the feed.
struct TurningParams {
  double zeta = 0.03;
  double b = 0.0;
  double rho = 0.01;
  double alpha = 0.75;
  double speed_ratio = 1.0;

  // Delay of one spindle revolution in nondimensional time.
  double tau() const noexcept { return 2.0 * std::numbers::pi / speed_ratio; }

  // rho^(alpha-1), the factor in front of the chip-thickness power law.
  double force_scale() const;

  // Throws DomainError if any parameter is out of range.
  void validate() const;
};

struct SimConfig {
  int steps_per_delay = 1024;
  int horizon_delays = 32;
  std::uint64_t seed = 0;
  double blowup_bound = 1e6;
  // Constant displacement on [-tau, 0]; velocity history is always zero.
  double history_value = 0.0;

  void validate() const;
};

struct TimeSeries {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t n) const noexcept { return t0 + static_cast<double>(n) * dt; }
  double end_time() const noexcept { return time(values.size() - 1); }
};

struct StochasticParams {
  TurningParams base;  // base.b is the nominal cutting coefficient
  double delta = 0.0;

  void validate() const;
};

// b rho^(alpha-1) max(0, 1 + y_delayed - y_now)^alpha. Zero once the tool
// leaves the cut.
double cutting_force(double y_now, double y_delayed, const TurningParams& params);

// Method of steps with classical RK4 on the grid dt = tau / steps_per_delay.
// Throws SimulationDiverged when |y| exceeds config.blowup_bound.
TimeSeries simulate_deterministic(const TurningParams& params, const SimConfig& config);

// Euler-Maruyama on the Ito system for (Y, Y'), noise entering the velocity
// equation through the delta-scaled chip-thickness term.
TimeSeries simulate_stochastic(const StochasticParams& sparams, const SimConfig& config);

// n independent Normal(0, dt) draws, deterministic in seed.
std::vector<double> brownian_increments(std::size_t n, double dt, std::uint64_t seed);

}  // namespace chatter
