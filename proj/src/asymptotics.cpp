#include "gptrap/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "gptrap/coupling.hpp"
#include "gptrap/error.hpp"
#include "gptrap/kernels.hpp"
#include "gptrap/spline.hpp"
#include "gptrap/tf_solver.hpp"

namespace gptrap {

namespace {

void check_increasing(std::span<const double> xs, const char* key) {
  if (xs.empty()) throw_invalid("empty-list", key, "parameter list is empty");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!(xs[k] > 0.0) || !std::isfinite(xs[k])) throw_invalid("non-positive", key, "parameters must be positive");
    if (k > 0 && !(xs[k] > xs[k - 1])) throw_invalid("not-increasing", key, "parameter list must be strictly increasing");
  }
}

// Runs body(k) for every k in parallel and rethrows the first failure in index order.
template <class F>
void parallel_points(std::size_t n, F body) {
  std::vector<std::exception_ptr> errors(n);
  const int workers = std::max(1, std::min(static_cast<int>(n), kernels::worker_count()));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::size_t k = 0; k < n; ++k) {
    try {
      body(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double scaling_check(double N, double g, const TrapPotential& trap, const RadialGrid& grid, const GpOptions& opts) {
  const auto full = minimize_gp(trap, N, g, grid, opts);
  const auto unit = minimize_gp(trap, 1.0, N * g, grid, opts);
  return std::abs(full.energy_total - N * unit.energy_total) / full.energy_total;
}

double scaling_profile_deviation(double N, double g, const TrapPotential& trap, const RadialGrid& grid,
                                 const GpOptions& opts) {
  const auto full = minimize_gp(trap, N, g, grid, opts);
  const auto unit = minimize_gp(trap, 1.0, N * g, grid, opts);
  const double root = std::sqrt(N);
  double peak = 0.0, dev = 0.0;
  for (std::size_t k = 0; k < full.phi.size(); ++k) {
    peak = std::max(peak, full.phi[k]);
    dev = std::max(dev, std::abs(full.phi[k] - root * unit.phi[k]));
  }
  return dev / peak;
}

std::vector<SweepRecord> gp_tf_sweep(const TrapPotential& trap, int dim, std::span<const double> Ng_list, double N,
                                     const GridPolicy& policy, const GpOptions& opts) {
  check_increasing(Ng_list, "Ng");
  if (!(N > 0.0)) throw_invalid("non-positive", "N", "particle number must be positive");
  std::vector<SweepRecord> out(Ng_list.size());
  parallel_points(Ng_list.size(), [&](std::size_t k) {
    SweepRecord& rec = out[k];
    rec.parameter = Ng_list[k];
    rec.N = N;
    rec.g = Ng_list[k] / N;
    const auto grid = policy_grid(trap, dim, N, rec.g, policy);
    const auto gp = minimize_gp(trap, N, rec.g, grid, opts);
    const auto tf = solve_tf(trap, N, rec.g, dim);
    rec.E_gp = gp.energy_total;
    rec.E_tf = tf.energy;
    rec.ratio = rec.E_gp / rec.E_tf;
    rec.mu_gp = gp.chemical_potential;
    rec.mu_tf = tf.chemical_potential;
    rec.rho_bar = mean_gp_density(gp);
    rec.diluteness = dim == 3 ? diluteness(rec.g, rec.rho_bar, 3) : std::exp(-1.0 / rec.g);
    rec.r_max = grid.r_max();
    rec.n_points = grid.size();
    rec.iterations = gp.iterations;
  });
  return out;
}

SweepSummary summarize_sweep(std::span<const SweepRecord> records) {
  SweepSummary s;
  if (records.empty()) return s;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (k > 0 && !(r.ratio < records[k - 1].ratio)) s.ratio_strictly_decreasing = false;
    if (!(r.ratio > 1.0)) s.ratio_above_one = false;
    if (!(r.E_tf <= r.E_gp)) s.tf_below_gp = false;
    if (r.ratio > 1.0) {
      const double x = std::log(r.parameter), y = std::log(r.ratio - 1.0);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  s.final_excess = records.back().ratio - 1.0;
  if (n >= 2) s.empirical_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return s;
}

std::vector<double> tf_collapse_check(const TrapPotential& trap, int dim, std::span<const double> gamma_list,
                                      CollapseSource source, double N, const GridPolicy& policy, const GpOptions& opts) {
  if (!trap.is_homogeneous()) throw_invalid("not-homogeneous", "trap", "density collapse needs a homogeneous trap");
  for (double gm : gamma_list)
    if (!(gm > 0.0)) throw_invalid("non-positive", "gamma", "gamma must be positive");
  if (!(N > 0.0)) throw_invalid("non-positive", "N", "particle number must be positive");
  const double s = trap.order();
  const auto unit = rescaled_tf_profile(trap, dim);
  const double peak = unit.density(0.0);
  // Interior support points of the unit profile.
  constexpr int samples = 2000;
  std::vector<double> xs(samples);
  for (int k = 0; k < samples; ++k) xs[k] = unit.support_radius * k / samples;

  std::vector<double> out(gamma_list.size());
  parallel_points(gamma_list.size(), [&](std::size_t k) {
    const double gamma = gamma_list[k];
    const double g = gamma / N;
    const double len = std::pow(gamma, 1.0 / (s + dim));
    const double amp = std::pow(gamma, dim / (s + dim)) / N;
    double dev = 0.0;
    if (source == CollapseSource::thomas_fermi) {
      const auto tf = solve_tf(trap, N, g, dim);
      for (double x : xs) dev = std::max(dev, std::abs(amp * tf.density(len * x) - unit.density(x)));
    } else {
      const auto grid = policy_grid(trap, dim, N, g, policy);
      const auto gp = minimize_gp(trap, N, g, grid, opts);
      std::vector<double> rho(gp.phi.size());
      for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = gp.phi[j] * gp.phi[j];
      const CubicSpline interp(0.0, grid.spacing(), std::move(rho), 0.0);
      for (double x : xs) dev = std::max(dev, std::abs(amp * interp(len * x) - unit.density(x)));
    }
    out[k] = dev / peak;
  });
  return out;
}

std::vector<DilutenessRecord> diluteness_sweep(const TrapPotential& trap, double Ng, std::span<const double> N_list,
                                               const GridPolicy& policy, const GpOptions& opts) {
  check_increasing(N_list, "N");
  if (!(Ng > 0.0)) throw_invalid("non-positive", "Ng", "Ng must be positive");
  std::vector<DilutenessRecord> out(N_list.size());
  parallel_points(N_list.size(), [&](std::size_t k) {
    auto& rec = out[k];
    rec.N = N_list[k];
    rec.a = Ng / rec.N;
    const auto grid = policy_grid(trap, 3, rec.N, rec.a, policy);
    rec.rho_bar = mean_gp_density(minimize_gp(trap, rec.N, rec.a, grid, opts));
    rec.scaled = diluteness(rec.a, rec.rho_bar, 3) * rec.N * rec.N;
  });
  return out;
}

double grid_refinement_change(const TrapPotential& trap, int dim, double Ng, const GridPolicy& policy,
                              const GpOptions& opts) {
  const auto coarse = policy_grid(trap, dim, 1.0, Ng, policy);
  const auto fine = build_radial_grid(dim, coarse.r_max(), 2 * coarse.size() - 1);
  const double e0 = minimize_gp(trap, 1.0, Ng, coarse, opts).energy_total;
  const double e1 = minimize_gp(trap, 1.0, Ng, fine, opts).energy_total;
  return std::abs(e1 - e0) / std::abs(e1);
}

}  // namespace gptrap
