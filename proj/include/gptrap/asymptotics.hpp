#pragma once

#include <span>
#include <vector>

#include "gptrap/core.hpp"
#include "gptrap/gp_solver.hpp"

namespace gptrap {

struct SweepRecord {
  double parameter = 0.0;  // Ng
  double N = 1.0;
  double g = 0.0;
  double E_gp = 0.0;
  double E_tf = 0.0;
  double ratio = 0.0;      // E_gp / E_tf
  double mu_gp = 0.0;
  double mu_tf = 0.0;
  double rho_bar = 0.0;    // mean GP density
  double diluteness = 0.0; // a^D rho-bar with a read off from g (a = g in 3D, a^2 rho-bar = e^{-1/g} in 2D)
  double r_max = 0.0;
  int n_points = 0;
  int iterations = 0;
};

/// |E(N,g) - N E(1,Ng)| / E(N,g) on a shared grid.
double scaling_check(double N, double g, const TrapPotential& trap, const RadialGrid& grid, const GpOptions& opts = {});

/// Max over nodes of |Phi_{N,g} - sqrt(N) Phi_{1,Ng}| relative to the peak of Phi_{N,g}.
double scaling_profile_deviation(double N, double g, const TrapPotential& trap, const RadialGrid& grid,
                                 const GpOptions& opts = {});

/// GP and TF energies at N particles and g = Ng/N for each Ng (strictly
/// increasing). Points run in parallel; records come back in input order.
std::vector<SweepRecord> gp_tf_sweep(const TrapPotential& trap, int dim, std::span<const double> Ng_list,
                                     double N = 1.0, const GridPolicy& policy = {}, const GpOptions& opts = {});

struct SweepSummary {
  bool ratio_strictly_decreasing = true;
  bool ratio_above_one = true;
  bool tf_below_gp = true;
  double final_excess = 0.0;   // last ratio - 1
  double empirical_rate = 0.0; // least-squares slope of ln(ratio - 1) against ln Ng
};

SweepSummary summarize_sweep(std::span<const SweepRecord> records);

enum class CollapseSource { thomas_fermi, gross_pitaevskii };

/// For each gamma: max over interior support points x of
/// |gamma^{D/(s+D)}/N rho(gamma^{1/(s+D)} x) - rho~(x)| / max rho~, where rho
/// is the TF or GP density at (N, g = gamma/N) and rho~ the unit TF profile.
std::vector<double> tf_collapse_check(const TrapPotential& trap, int dim, std::span<const double> gamma_list,
                                      CollapseSource source, double N = 1.0, const GridPolicy& policy = {},
                                      const GpOptions& opts = {});

struct DilutenessRecord {
  double N = 0.0;
  double a = 0.0;
  double rho_bar = 0.0;
  double scaled = 0.0;  // a^3 rho-bar N^2
};

/// 3D GP-case bookkeeping: a = Ng/N at fixed Ng.
std::vector<DilutenessRecord> diluteness_sweep(const TrapPotential& trap, double Ng, std::span<const double> N_list,
                                               const GridPolicy& policy = {}, const GpOptions& opts = {});

/// Relative change of E^GP(1, Ng) when the policy grid's interval count is doubled.
double grid_refinement_change(const TrapPotential& trap, int dim, double Ng, const GridPolicy& policy = {},
                              const GpOptions& opts = {});

}  // namespace gptrap
