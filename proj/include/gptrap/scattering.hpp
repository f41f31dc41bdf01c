#pragma once

#include <vector>

#include "gptrap/core.hpp"

namespace gptrap {

// Zero-energy two-body solution f0 of
//   -2 f0'' - 2 (D-1)/r f0' + v f0 = 0
// (relative motion, hbar = 2m = 1), normalized so the free-region asymptote
// is 1 - a/r (D=3) or ln(r/a) (D=2).
struct ScatteringSolution {
  int dim = 3;
  PairPotential potential = PairPotential::hard_core(1.0);
  double r_start = 0.0;  // first node (core radius for hard cores)
  double h = 0.0;
  std::vector<double> radii;
  std::vector<double> profile;  // f0 at radii
  double scattering_length = 0.0;
  double amplitude = 1.0;       // fitted A before normalization
  double match_radius = 0.0;    // inner edge of the tail-fit window
  double fit_residual = 0.0;    // RMS deviation over the fit window, relative to A

  /// Free-region asymptote evaluated at r (valid for r >= range).
  double asymptote(double r) const;
};

/// Integrates the zero-energy equation with fixed-step RK4 on
/// (f0, r^{D-1} f0'), aligning a node with the potential range, and fits
/// the asymptote over the outer quarter of the grid.
ScatteringSolution zero_energy_profile(const PairPotential& v, int dim, double r_max, int n_points);

/// v(r) = (a1/a)^2 v1(a1 r / a): same shape, scattering length a.
PairPotential scale_pair_potential(const PairPotential& v1, double a1, double a);

}  // namespace gptrap
