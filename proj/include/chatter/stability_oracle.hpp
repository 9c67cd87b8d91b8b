#pragma once

#include <utility>
#include <vector>

namespace chatter {

// Linearizing the turning model about its equilibrium y* = b rho^(alpha-1)
// gives the characteristic equation
//   lambda^2 + 2 zeta lambda + 1 + kappa = kappa exp(-lambda tau),
//   kappa = alpha b rho^(alpha-1).
// Substituting lambda = i omega traces the stability lobes parametrically.

struct LobePoint {
  double speed_ratio;
  double b_lim;
  double omega = 0.0;  // crossing frequency of the critical lobe
  int lobe = 0;
};

// Minimal stability boundary b_lim(speed_ratio), sorted by speed_ratio.
struct LobeBoundary {
  std::vector<LobePoint> samples;

  // Piecewise-linear evaluation; clamps outside the sampled range.
  double at(double speed_ratio) const;
  double min_b() const;
  double max_b() const;
};

struct LabelGrid {
  std::vector<double> speed_axis;
  std::vector<double> depth_axis;
  // labels[i][j]: speed index i, depth index j; true = chatter.
  std::vector<std::vector<bool>> labels;

  std::size_t chatter_count() const;
  double chatter_fraction() const;
};

// kappa(omega) = ((omega^2 - 1)^2 + 4 zeta^2 omega^2) / (2 (omega^2 - 1)).
// Throws DomainError for omega <= 1.
double kappa_of_omega(double omega, double zeta);

// Frequency of the lobe notch, where kappa attains its minimum 2 zeta (1 + zeta).
double notch_omega(double zeta);

// Phase angle in (pi, 2pi) of the boundary crossing at frequency omega.
double lobe_phase(double omega, double zeta);

// Speed ratio of lobe k at crossing frequency omega.
double lobe_speed(double omega, double zeta, int k);

// Residual |(i w)^2 + 2 zeta (i w) + 1 + kappa (1 - exp(-i w tau))| of a
// boundary point, kappa recovered from b_lim.
double characteristic_residual(double zeta, double rho, double alpha, double speed_ratio,
                               double b_lim, double omega);

// The k-th lobe sampled at omega_samples frequencies in (1, omega_max]. The
// notch frequency is always one of the samples.
std::vector<LobePoint> lobe_boundary(double zeta, double rho, double alpha, int k,
                                     int omega_samples, double omega_max = 3.0);

// Crossing frequency of lobe k at the given speed ratio, or a negative value
// if lobe k does not reach that speed.
double lobe_omega_at_speed(double speed_ratio, double zeta, int k);

// Pointwise minimum over all relevant lobes, evaluated exactly at
// `resolution` evenly spaced speeds plus every lobe notch inside the range.
LobeBoundary min_boundary(double zeta, double rho, double alpha,
                          std::pair<double, double> speed_range, int resolution);

// chatter iff b > b_lim(speed).
LabelGrid label_grid(const LobeBoundary& boundary, const std::vector<double>& speed_axis,
                     const std::vector<double>& depth_axis);

}  // namespace chatter
