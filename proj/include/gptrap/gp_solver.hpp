#pragma once

#include <span>
#include <vector>

#include "gptrap/core.hpp"
#include "gptrap/kernels.hpp"

namespace gptrap {

struct GpOptions {
  double energy_tol = 1e-12;    // relative energy change of the last accepted step
  double residual_tol = 1e-9;   // relative Euler-Lagrange residual
  int max_iters = 50000;
  double dt_initial = 0.05;
  double dt_growth = 1.1;
  double dt_max = 1e4;
  double boundary_tol = 1e-12;  // allowed outer integrand relative to its peak
  bool record_history = false;
  kernels::Policy policy = kernels::Policy::automatic;
  std::vector<double> initial;  // warm start; Gaussian e^{-r^2/2} when empty
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double trap = 0.0;
  double interaction = 0.0;
  double total() const { return kinetic + trap + interaction; }
};

struct GpState {
  RadialGrid grid;
  TrapPotential trap = TrapPotential::homogeneous(2.0);
  std::vector<double> phi;
  double N = 1.0;
  double g = 0.0;
  double energy_total = 0.0;
  double energy_kinetic = 0.0;
  double energy_trap = 0.0;
  double energy_interaction = 0.0;
  double chemical_potential = 0.0;
  double residual = 0.0;    // relative Euler-Lagrange residual at exit
  double last_step = 0.0;   // flow time step at exit
  int iterations = 0;
  int rejected_steps = 0;
  double boundary_ratio = 0.0;
  std::vector<double> energy_history;  // accepted energies, when recorded
};

/// Minimizes int |grad phi|^2 + V phi^2 + 4 pi g phi^4 subject to
/// int phi^2 = N by a normalized semi-implicit gradient flow. The grid needs
/// an odd point count. Throws non_convergence or grid_too_small.
GpState minimize_gp(const TrapPotential& trap, double N, double g, const RadialGrid& grid,
                    const GpOptions& opts = {});

/// Term-by-term energy of a profile. The gradient is taken element-wise from
/// the quadratic interpolant on node triples and integrated with Simpson
/// weights, which is exactly the discrete functional the solver minimizes.
EnergyBreakdown gp_energy_breakdown(std::span<const double> phi, const TrapPotential& trap, double g,
                                    const RadialGrid& grid);

/// mu = (E + 4 pi g int phi^4) / N.
double chemical_potential(const GpState& state);

/// Relative residual || -Lap phi + V phi + 8 pi g phi^3 - mu phi || / || mu phi ||
/// over interior nodes, using the solver's discrete Laplacian.
double euler_lagrange_residual(const GpState& state);

/// Wraps an arbitrary nonnegative profile as a state (N from its norm).
GpState make_gp_state(const RadialGrid& grid, const TrapPotential& trap, std::vector<double> phi, double g);

// Grid sizing: r_max = max(1.5 R_TF + 2 healing lengths, WKB tail radius),
// with n_points growing linearly in r_max.
struct GridPolicy {
  double points_per_length = 100.0;
  double support_factor = 1.5;
  double healing_lengths = 2.0;
  double tail_exponent = 18.0;  // WKB decay exponent required beyond the turning point
  int min_points = 401;
};

RadialGrid policy_grid(const TrapPotential& trap, int dim, double N, double g, const GridPolicy& policy = {});

}  // namespace gptrap
