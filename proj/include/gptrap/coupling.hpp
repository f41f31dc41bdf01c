#pragma once

#include "gptrap/core.hpp"
#include "gptrap/gp_solver.hpp"

namespace gptrap {

struct CouplingReport {
  int dim = 3;
  double a = 0.0;
  double g = 0.0;
  double mean_density = 0.0;  // rho-bar at the reported g
  double N = 0.0;
  double Ng = 0.0;
  double diluteness = 0.0;    // a^D rho-bar
  int iterations = 0;         // fixed-point iterations (D=2)
  double fixed_point_residual = 0.0;  // |g_{k+1} - g_k| / g_k at exit (D=2)
  bool damped = false;
  bool tf_density = false;
};

enum class DensitySource { gp, thomas_fermi };

struct CouplingOptions {
  double tol = 1e-10;
  int max_iters = 100;
  DensitySource density = DensitySource::gp;
  GridPolicy grid;
  GpOptions gp;
};

/// (1/N) int |Phi|^4.
double mean_gp_density(const GpState& state);

/// D=3: g = a. D=2: self-consistent g = 1 / |ln(a^2 rho-bar(g))|, started
/// from the g = 1 minimizer.
CouplingReport coupling_constant(int dim, double a, const TrapPotential& trap, double N,
                                 const CouplingOptions& opts = {});

/// Dilute homogeneous ground-state energy density: 4 pi a rho^2 (D=3),
/// 4 pi rho^2 / |ln(a^2 rho)| (D=2).
double homogeneous_energy_density(double rho, double a, int dim);

/// a^D rho-bar.
double diluteness(double a, double rho_bar, int dim);

}  // namespace gptrap
