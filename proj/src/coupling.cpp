#include "gptrap/coupling.hpp"

#include <cmath>
#include <numbers>

#include "gptrap/error.hpp"
#include "gptrap/tf_solver.hpp"

namespace gptrap {

namespace {

constexpr double pi = std::numbers::pi;

double log_coupling(double a, double rho_bar) {
  const double x = a * a * rho_bar;
  if (!(x < 1.0))
    throw_invalid("diluteness-violated", "a", "a^2 rho-bar = " + std::to_string(x) + " >= 1; the 2D coupling is undefined");
  return 1.0 / std::abs(std::log(x));
}

}  // namespace

double mean_gp_density(const GpState& state) {
  std::vector<double> phi4(state.phi.size());
  for (std::size_t k = 0; k < phi4.size(); ++k) phi4[k] = std::pow(state.phi[k], 4);
  return radial_integral(phi4, state.grid) / state.N;
}

double homogeneous_energy_density(double rho, double a, int dim) {
  if (!(rho > 0.0)) throw_invalid("non-positive", "rho", "density must be positive");
  if (!(a > 0.0)) throw_invalid("non-positive", "a", "scattering length must be positive");
  if (dim == 3) return 4.0 * pi * a * rho * rho;
  if (dim == 2) return 4.0 * pi * rho * rho * log_coupling(a, rho);
  throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3");
}

double diluteness(double a, double rho_bar, int dim) {
  if (!(a >= 0.0) || !(rho_bar >= 0.0)) throw_invalid("negative", "a", "a and rho-bar must be nonnegative");
  return std::pow(a, dim) * rho_bar;
}

CouplingReport coupling_constant(int dim, double a, const TrapPotential& trap, double N, const CouplingOptions& opts) {
  if (dim != 2 && dim != 3) throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3");
  if (!(a > 0.0) || !std::isfinite(a)) throw_invalid("non-positive", "a", "scattering length must be positive");
  if (!(N > 0.0) || !std::isfinite(N)) throw_invalid("non-positive", "N", "particle number must be positive");

  CouplingReport rep;
  rep.dim = dim;
  rep.a = a;
  rep.N = N;
  rep.tf_density = opts.density == DensitySource::thomas_fermi;

  GpOptions gp = opts.gp;
  auto density_at = [&](double g) {
    if (opts.density == DensitySource::thomas_fermi) return solve_tf(trap, N, g, dim).mean_density();
    const auto grid = policy_grid(trap, dim, N, g, opts.grid);
    if (gp.initial.size() != grid.nodes().size()) gp.initial.clear();
    const auto st = minimize_gp(trap, N, g, grid, gp);
    gp.initial = st.phi;  // warm start when the next grid matches
    return mean_gp_density(st);
  };

  if (dim == 3) {
    rep.g = a;
    rep.mean_density = density_at(a);
  } else {
    double g = log_coupling(a, density_at(1.0));
    double prev_step = 0.0;
    double damping = 1.0;
    bool converged = false;
    for (int it = 1; it <= opts.max_iters; ++it) {
      const double rho = density_at(g);
      const double next = log_coupling(a, rho);
      const double step = next - g;
      rep.iterations = it;
      rep.fixed_point_residual = std::abs(step) / g;
      rep.mean_density = rho;
      if (rep.fixed_point_residual < opts.tol) {
        converged = true;
        break;
      }
      // Oscillation without contraction: switch to half steps.
      if (it > 1 && step * prev_step < 0.0 && std::abs(step) >= std::abs(prev_step)) {
        damping = 0.5;
        rep.damped = true;
      }
      prev_step = step;
      g += damping * step;
    }
    if (!converged)
      throw Error(ErrorKind::non_convergence, "fixed-point", "max_iters",
                  "2D coupling fixed point did not converge in " + std::to_string(opts.max_iters) + " iterations");
    rep.g = g;
  }
  rep.Ng = N * rep.g;
  rep.diluteness = diluteness(a, rep.mean_density, dim);
  return rep;
}

}  // namespace gptrap
