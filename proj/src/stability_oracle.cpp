#include "chatter/stability_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "chatter/errors.hpp"

namespace chatter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxLobes = 100000;

void check_model(double zeta, double rho, double alpha) {
  if (!(zeta > 0.0)) throw DomainError("zeta must be > 0");
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
}

void check_increasing(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw DomainError(std::string(name) + " is empty");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw DomainError(std::string(name) + " must be strictly increasing");
    }
  }
}

double b_from_kappa(double kappa, double rho, double alpha) {
  return kappa / (alpha * std::pow(rho, alpha - 1.0));
}

}  // namespace

double LobeBoundary::at(double speed_ratio) const {
  if (samples.empty()) throw DomainError("empty lobe boundary");
  if (speed_ratio <= samples.front().speed_ratio) return samples.front().b_lim;
  if (speed_ratio >= samples.back().speed_ratio) return samples.back().b_lim;
  auto hi = std::lower_bound(samples.begin(), samples.end(), speed_ratio,
                             [](const LobePoint& p, double s) { return p.speed_ratio < s; });
  if (hi->speed_ratio == speed_ratio) return hi->b_lim;
  auto lo = std::prev(hi);
  const double w = (speed_ratio - lo->speed_ratio) / (hi->speed_ratio - lo->speed_ratio);
  return lo->b_lim + w * (hi->b_lim - lo->b_lim);
}

double LobeBoundary::min_b() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) m = std::min(m, p.b_lim);
  return m;
}

double LobeBoundary::max_b() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : samples) m = std::max(m, p.b_lim);
  return m;
}

std::size_t LabelGrid::chatter_count() const {
  std::size_t count = 0;
  for (const auto& column : labels) count += std::count(column.begin(), column.end(), true);
  return count;
}

double LabelGrid::chatter_fraction() const {
  const std::size_t total = speed_axis.size() * depth_axis.size();
  return total == 0 ? 0.0 : static_cast<double>(chatter_count()) / static_cast<double>(total);
}

double kappa_of_omega(double omega, double zeta) {
  if (!(omega > 1.0)) throw DomainError("kappa_of_omega needs omega > 1");
  const double s = omega * omega - 1.0;
  return (s * s + 4.0 * zeta * zeta * omega * omega) / (2.0 * s);
}

double notch_omega(double zeta) { return std::sqrt(1.0 + 2.0 * zeta); }

double lobe_phase(double omega, double zeta) {
  const double kappa = kappa_of_omega(omega, zeta);
  const double c = (1.0 + kappa - omega * omega) / kappa;
  const double s = -2.0 * zeta * omega / kappa;
  // s < 0, so atan2 lands in (-pi, 0).
  return std::atan2(s, c) + kTwoPi;
}

double lobe_speed(double omega, double zeta, int k) {
  return kTwoPi * omega / (kTwoPi * k + lobe_phase(omega, zeta));
}

double characteristic_residual(double zeta, double rho, double alpha, double speed_ratio,
                               double b_lim, double omega) {
  const double kappa = alpha * b_lim * std::pow(rho, alpha - 1.0);
  const double tau = kTwoPi / speed_ratio;
  const std::complex<double> lambda(0.0, omega);
  const std::complex<double> value =
      lambda * lambda + 2.0 * zeta * lambda + 1.0 + kappa * (1.0 - std::exp(-lambda * tau));
  return std::abs(value);
}

std::vector<LobePoint> lobe_boundary(double zeta, double rho, double alpha, int k,
                                     int omega_samples, double omega_max) {
  check_model(zeta, rho, alpha);
  if (k < 0) throw DomainError("lobe index must be non-negative");
  if (omega_samples < 2) throw DomainError("lobe_boundary needs omega_samples >= 2");
  const double w_notch = notch_omega(zeta);
  if (!(omega_max > w_notch)) throw DomainError("omega_max must exceed the notch frequency");

  // Log-spaced in omega^2 - 1 so the steep branch near omega = 1 is resolved.
  const double s_lo = std::min(1e-3, 0.5 * (w_notch * w_notch - 1.0));
  const double s_hi = omega_max * omega_max - 1.0;
  std::vector<double> omegas;
  omegas.reserve(static_cast<std::size_t>(omega_samples) + 1);
  for (int i = 0; i < omega_samples; ++i) {
    const double f = static_cast<double>(i) / (omega_samples - 1);
    omegas.push_back(std::sqrt(1.0 + s_lo * std::pow(s_hi / s_lo, f)));
  }
  omegas.push_back(w_notch);
  std::sort(omegas.begin(), omegas.end());
  omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());

  std::vector<LobePoint> lobe;
  lobe.reserve(omegas.size());
  for (double w : omegas) {
    lobe.push_back(
        {lobe_speed(w, zeta, k), b_from_kappa(kappa_of_omega(w, zeta), rho, alpha), w, k});
  }
  return lobe;
}

double lobe_omega_at_speed(double speed_ratio, double zeta, int k) {
  // Lobe speed increases monotonically from 1/(k+1) (omega -> 1) to infinity.
  if (!(speed_ratio > 1.0 / (k + 1.0))) return -1.0;
  double lo = 1.0;
  double hi = 2.0;
  while (lobe_speed(hi, zeta, k) < speed_ratio) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lobe_speed(mid, zeta, k) < speed_ratio) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

LobeBoundary min_boundary(double zeta, double rho, double alpha,
                          std::pair<double, double> speed_range, int resolution) {
  check_model(zeta, rho, alpha);
  const auto [s_lo, s_hi] = speed_range;
  if (!(s_lo > 0.0 && s_hi > s_lo && std::isfinite(s_hi))) {
    throw DomainError("speed_range must satisfy 0 < lo < hi < inf");
  }
  if (resolution < 2) throw DomainError("min_boundary needs resolution >= 2");

  const double w_notch = notch_omega(zeta);

  // Every lobe past the first whose notch sits left of the range is bounded
  // below by that lobe on the whole range.
  int last_lobe = 0;
  while (lobe_speed(w_notch, zeta, last_lobe) > s_lo) {
    if (++last_lobe > kMaxLobes) throw DomainError("speed range needs too many lobes");
  }

  std::vector<double> speeds;
  speeds.reserve(static_cast<std::size_t>(resolution + last_lobe + 1));
  for (int i = 0; i < resolution; ++i) {
    speeds.push_back(s_lo + (s_hi - s_lo) * i / (resolution - 1));
  }
  speeds.back() = s_hi;
  for (int k = 0; k <= last_lobe; ++k) {
    const double s = lobe_speed(w_notch, zeta, k);
    if (s >= s_lo && s <= s_hi) speeds.push_back(s);
  }
  std::sort(speeds.begin(), speeds.end());
  speeds.erase(std::unique(speeds.begin(), speeds.end()), speeds.end());

  LobeBoundary boundary;
  boundary.samples.reserve(speeds.size());
  for (double s : speeds) {
    LobePoint best{s, std::numeric_limits<double>::infinity(), 0.0, 0};
    for (int k = 0; k <= last_lobe; ++k) {
      double w = w_notch;
      if (s != lobe_speed(w_notch, zeta, k)) {
        w = lobe_omega_at_speed(s, zeta, k);
        if (w < 0.0) continue;
      }
      const double b = b_from_kappa(kappa_of_omega(w, zeta), rho, alpha);
      if (b < best.b_lim) best = {s, b, w, k};
    }
    boundary.samples.push_back(best);
  }
  return boundary;
}

LabelGrid label_grid(const LobeBoundary& boundary, const std::vector<double>& speed_axis,
                     const std::vector<double>& depth_axis) {
  check_increasing(speed_axis, "speed_axis");
  check_increasing(depth_axis, "depth_axis");
  LabelGrid grid{speed_axis, depth_axis, {}};
  grid.labels.resize(speed_axis.size());
  for (std::size_t i = 0; i < speed_axis.size(); ++i) {
    const double limit = boundary.at(speed_axis[i]);
    grid.labels[i].resize(depth_axis.size());
    for (std::size_t j = 0; j < depth_axis.size(); ++j) grid.labels[i][j] = depth_axis[j] > limit;
  }
  return grid;
}

}  // namespace chatter
