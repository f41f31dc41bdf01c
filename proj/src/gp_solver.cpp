#include "gptrap/gp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gptrap/error.hpp"
#include "gptrap/tf_solver.hpp"

namespace gptrap {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double rounding_slack = 1e-14;

struct Discretization {
  kernels::SemStiffness stiffness;
  std::vector<double> potential;
};

Discretization discretize(const TrapPotential& trap, const RadialGrid& grid) {
  Discretization d{kernels::build_sem_stiffness(grid.size(), grid.spacing(), grid.dim()), {}};
  d.potential.resize(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) d.potential[k] = trap(grid.node(k));
  return d;
}

EnergyBreakdown breakdown(const Discretization& d, std::span<const double> w, double g, std::span<const double> phi,
                          kernels::Policy policy) {
  const auto m = kernels::moments(w, d.potential, phi, policy);
  return {kernels::kinetic_energy(d.stiffness, phi, policy), m.trap, 4.0 * pi * g * m.quartic};
}

void normalize(std::span<double> phi, std::span<const double> w, double N) {
  double norm = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) norm += w[k] * phi[k] * phi[k];
  const double scale = std::sqrt(N / norm);
  for (double& p : phi) p *= scale;
}

double boundary_ratio(std::span<const double> phi, const RadialGrid& grid) {
  const int n = grid.size();
  const int dim = grid.dim();
  double peak = 0.0, outer = 0.0;
  const int outer_start = n - 1 - std::max(2, n / 20);
  for (int k = 0; k < n - 1; ++k) {
    const double integrand = phi[k] * phi[k] * std::pow(grid.node(k), dim - 1);
    peak = std::max(peak, integrand);
    if (k >= outer_start) outer = std::max(outer, integrand);
  }
  return peak > 0.0 ? outer / peak : 0.0;
}

void fill_state(GpState& st, const Discretization& d, kernels::Policy policy) {
  const auto e = breakdown(d, st.grid.weights(), st.g, st.phi, policy);
  st.energy_kinetic = e.kinetic;
  st.energy_trap = e.trap;
  st.energy_interaction = e.interaction;
  st.energy_total = e.total();
  st.chemical_potential = chemical_potential(st);
}

}  // namespace

EnergyBreakdown gp_energy_breakdown(std::span<const double> phi, const TrapPotential& trap, double g,
                                    const RadialGrid& grid) {
  if (phi.size() != grid.nodes().size())
    throw_invalid("length-mismatch", "phi", "profile length does not match the grid");
  const auto d = discretize(trap, grid);
  return breakdown(d, grid.weights(), g, phi, kernels::Policy::serial);
}

double chemical_potential(const GpState& state) {
  if (!(state.N > 0.0)) throw_invalid("invalid-state", "N", "state has no particles");
  return (state.energy_total + state.energy_interaction) / state.N;
}

double euler_lagrange_residual(const GpState& state) {
  const auto d = discretize(state.trap, state.grid);
  const auto r = kernels::residual(d.stiffness, state.grid.weights(), d.potential, state.g, state.chemical_potential,
                                   state.phi);
  return std::sqrt(r.residual_sq / r.reference_sq);
}

GpState make_gp_state(const RadialGrid& grid, const TrapPotential& trap, std::vector<double> phi, double g) {
  if (phi.size() != grid.nodes().size())
    throw_invalid("length-mismatch", "phi", "profile length does not match the grid");
  GpState st;
  st.grid = grid;
  st.trap = trap;
  st.g = g;
  double norm = 0.0;
  const auto w = grid.weights();
  for (std::size_t k = 0; k < phi.size(); ++k) norm += w[k] * phi[k] * phi[k];
  st.N = norm;
  st.phi = std::move(phi);
  const auto d = discretize(trap, grid);
  fill_state(st, d, kernels::Policy::serial);
  st.residual = euler_lagrange_residual(st);
  st.boundary_ratio = boundary_ratio(st.phi, grid);
  return st;
}

GpState minimize_gp(const TrapPotential& trap, double N, double g, const RadialGrid& grid, const GpOptions& opts) {
  if (!(N > 0.0) || !std::isfinite(N)) throw_invalid("non-positive", "N", "particle number must be positive");
  if (!(g >= 0.0) || !std::isfinite(g)) throw_invalid("negative", "g", "coupling must be nonnegative");
  if (grid.size() % 2 == 0)
    throw_invalid("even-point-count", "n_points", "GP solver needs an odd number of grid points");

  const auto d = discretize(trap, grid);
  const auto w = grid.weights();
  const int n = grid.size();
  const int m = n - 1;  // unknowns; phi(r_max) = 0
  const double c8 = 8.0 * pi * g;

  std::vector<double> phi(static_cast<std::size_t>(n));
  if (!opts.initial.empty()) {
    if (opts.initial.size() != phi.size())
      throw_invalid("length-mismatch", "initial", "initial profile does not match the grid");
    phi = opts.initial;
  } else {
    for (int k = 0; k < n; ++k) phi[k] = std::exp(-0.5 * grid.node(k) * grid.node(k));
  }
  phi[n - 1] = 0.0;
  normalize(phi, w, N);

  // Stiffness bands for the unknowns.
  std::vector<double> kd(m), k1(m, 0.0), k2(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const auto& el = d.stiffness.elements;
    if (k % 2 == 1) {
      kd[k] = el[k / 2][3];
      k1[k] = el[k / 2][4];
    } else {
      kd[k] = el[k / 2][0] + (k > 0 ? el[k / 2 - 1][5] : 0.0);
      k1[k] = el[k / 2][1];
      k2[k] = el[k / 2][2];
    }
  }

  GpState st;
  st.grid = grid;
  st.trap = trap;
  st.N = N;
  st.g = g;

  auto energy_of = [&](std::span<const double> p) { return breakdown(d, w, g, p, opts.policy).total(); };
  double energy = energy_of(phi);
  if (opts.record_history) st.energy_history.push_back(energy);

  double dt = opts.dt_initial;
  double last_change = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> trial(static_cast<std::size_t>(n), 0.0);
  std::vector<double> diag(m), off1(m), off2(m);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const auto mom = kernels::moments(w, d.potential, phi, opts.policy);
    const double mu = (energy + 4.0 * pi * g * mom.quartic) / N;
    const auto rn = kernels::residual(d.stiffness, w, d.potential, g, mu, phi, opts.policy);
    residual = std::sqrt(rn.residual_sq / rn.reference_sq);
    if (residual < opts.residual_tol && last_change < opts.energy_tol) {
      converged = true;
      break;
    }

    // (K + M (1/dt + V + 8 pi g phi^2)) phi~ = M phi / dt, then renormalize.
    for (int k = 0; k < m; ++k) {
      diag[k] = kd[k] + w[k] * (1.0 / dt + d.potential[k] + c8 * phi[k] * phi[k]);
      off1[k] = k1[k];
      off2[k] = k2[k];
      trial[k] = w[k] * phi[k] / dt;
    }
    trial[n - 1] = 0.0;
    kernels::solve_banded_spd(diag, off1, off2, std::span<double>(trial).first(static_cast<std::size_t>(m)));
    normalize(trial, w, N);
    const double candidate = energy_of(trial);

    // Accept rises of a few ulps: near the minimum the energy is flat to
    // rounding while the residual can still be reduced.
    if (candidate <= energy * (1.0 + rounding_slack)) {
      last_change = std::abs(energy - candidate) / energy;
      energy = candidate;
      phi.swap(trial);
      if (opts.record_history) st.energy_history.push_back(energy);
      dt = std::min(dt * opts.dt_growth, opts.dt_max);
    } else {
      ++st.rejected_steps;
      dt *= 0.5;
      if (dt < 1e-12)
        throw Error(ErrorKind::non_convergence, "step-collapse", "dt",
                    "GP flow step collapsed without reaching the residual tolerance");
    }
  }
  if (!converged)
    throw Error(ErrorKind::non_convergence, "max-iterations", "max_iters",
                "GP minimization did not converge within " + std::to_string(opts.max_iters) +
                    " iterations (residual " + std::to_string(residual) + ")");

  st.phi = std::move(phi);
  st.iterations = it;
  st.last_step = dt;
  st.residual = residual;
  fill_state(st, d, opts.policy);
  st.boundary_ratio = boundary_ratio(st.phi, grid);
  if (st.boundary_ratio > opts.boundary_tol)
    throw Error(ErrorKind::grid_too_small, "grid-too-small", "r_max",
                "GP density at the outer boundary is " + std::to_string(st.boundary_ratio) +
                    " of its peak; enlarge r_max");
  return st;
}

RadialGrid policy_grid(const TrapPotential& trap, int dim, double N, double g, const GridPolicy& policy) {
  double e0 = dim;
  if (trap.is_homogeneous()) e0 = dim * std::pow(trap.coefficient(), 2.0 / (trap.order() + 2.0));
  double mu = e0;
  double core = 0.0;
  if (g > 0.0) {
    const auto tf = solve_tf(trap, N, g, dim);
    const double healing = 1.0 / std::sqrt(8.0 * pi * g * tf.mean_density());
    core = policy.support_factor * tf.support_radius + policy.healing_lengths * healing;
    mu += tf.chemical_potential;
  }
  // Turning point of mu, then march until the WKB exponent reaches the target.
  const double dr = 1e-3;
  long k = 0;
  while (trap(k * dr) < mu) ++k;
  double exponent = 0.0;
  while (exponent < policy.tail_exponent) {
    exponent += std::sqrt(std::max(0.0, trap((k + 0.5) * dr) - mu)) * dr;
    ++k;
  }
  const double r = k * dr;
  const double r_max = std::max(core, r);
  int n = static_cast<int>(std::ceil(r_max * policy.points_per_length)) + 1;
  n = std::max(n, policy.min_points);
  if (n % 2 == 0) ++n;
  return build_radial_grid(dim, r_max, n);
}

}  // namespace gptrap
