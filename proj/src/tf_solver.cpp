#include "gptrap/tf_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gptrap/error.hpp"

namespace gptrap {

namespace {

constexpr double pi = std::numbers::pi;

// Radius where V first reaches mu. Homogeneous: closed form; tabulated:
// scan the linear segments and the linear extension beyond the table.
double turning_radius(const TrapPotential& trap, double mu) {
  if (trap.is_homogeneous()) return std::pow(mu / trap.coefficient(), 1.0 / trap.order());
  const auto r = trap.table_radii();
  const auto v = trap.table_values();
  double outer = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (v[i] < mu && v[i + 1] >= mu) outer = r[i] + (mu - v[i]) / (v[i + 1] - v[i]) * (r[i + 1] - r[i]);
  }
  const std::size_t m = r.size();
  if (v[m - 1] < mu) {
    const double slope = (v[m - 1] - v[m - 2]) / (r[m - 1] - r[m - 2]);
    outer = r[m - 1] + (mu - v[m - 1]) / slope;
  }
  return outer;
}

// Simpson over [0, R] of S_D r^{D-1} F(V(r)) with R = outermost turning point.
template <class F>
double support_integral(const TrapPotential& trap, int dim, double mu, F&& integrand) {
  const double R = turning_radius(trap, mu);
  if (!(R > 0.0)) return 0.0;
  const int n = tf_quadrature_intervals + 1;
  const double h = R / tf_quadrature_intervals;
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v = trap(k * h);
    vals[k] = v < mu ? integrand(v) : 0.0;
  }
  return radial_integral(vals, h, dim);
}

// Tabulated traps: piecewise-linear V makes every integrand a polynomial on
// each clipped segment, so three-point Gauss-Legendre is exact.
template <class F>
double segment_integral(const TrapPotential& trap, int dim, double mu, F&& integrand) {
  const auto r = trap.table_radii();
  const auto v = trap.table_values();
  std::vector<double> rr(r.begin(), r.end()), vv(v.begin(), v.end());
  const std::size_t m = rr.size();
  if (vv[m - 1] < mu) {
    const double slope = (vv[m - 1] - vv[m - 2]) / (rr[m - 1] - rr[m - 2]);
    rr.push_back(rr[m - 1] + (mu - vv[m - 1]) / slope);
    vv.push_back(mu);
  }
  static const double xg[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double wg[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    double a = rr[i], b = rr[i + 1];
    const double va = vv[i], vb = vv[i + 1];
    if (va >= mu && vb >= mu) continue;
    const auto cross = [&] { return a + (mu - va) / (vb - va) * (b - a); };
    if (va >= mu) a = cross();
    else if (vb >= mu) b = cross();
    const double slope = (vb - va) / (rr[i + 1] - rr[i]);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int q = 0; q < 3; ++q) {
      const double x = mid + half * xg[q];
      const double vx = va + slope * (x - rr[i]);
      total += half * wg[q] * std::pow(x, dim - 1) * integrand(vx);
    }
  }
  return sphere_area(dim) * total;
}

template <class F>
double tf_integral(const TrapPotential& trap, int dim, double mu, F&& integrand) {
  return trap.is_homogeneous() ? support_integral(trap, dim, mu, integrand) : segment_integral(trap, dim, mu, integrand);
}

double normalization(const TrapPotential& trap, int dim, double mu, double g) {
  return tf_integral(trap, dim, mu, [&](double v) { return (mu - v) / (8.0 * pi * g); });
}

}  // namespace

double TfState::density(double r) const {
  const double v = trap(r);
  return v < chemical_potential ? (chemical_potential - v) / (8.0 * pi * g) : 0.0;
}

double TfState::mean_density() const {
  const double mu = chemical_potential;
  const double q = tf_integral(trap, dim, mu, [&](double v) {
    const double rho = (mu - v) / (8.0 * pi * g);
    return rho * rho;
  });
  return q / N;
}

double tf_chemical_potential_closed_form(double order, double coefficient, int dim, double Ng) {
  // Ng = S_D s / (8 pi D (s+D)) c^{-D/s} mu^{1+D/s}
  const double s = order;
  const double pref = sphere_area(dim) * s / (8.0 * pi * dim * (s + dim)) * std::pow(coefficient, -dim / s);
  return std::pow(Ng / pref, s / (s + dim));
}

double tf_energy_closed_form(double order, double coefficient, int dim, double N, double g) {
  // E = S_D mu^2 R^D 2s / (16 pi g D (2s+D)), R = (mu/c)^{1/s}
  const double s = order;
  const double mu = tf_chemical_potential_closed_form(order, coefficient, dim, N * g);
  const double R = std::pow(mu / coefficient, 1.0 / s);
  return sphere_area(dim) * mu * mu * std::pow(R, dim) * 2.0 * s / (16.0 * pi * g * dim * (2.0 * s + dim));
}

TfState solve_tf(const TrapPotential& trap, double N, double g, int dim) {
  if (dim != 2 && dim != 3) throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3");
  if (!(N > 0.0) || !std::isfinite(N)) throw_invalid("non-positive", "N", "particle number must be positive");
  if (!(g > 0.0) || !std::isfinite(g)) throw_invalid("non-positive", "g", "TF coupling must be positive");

  double lo = 0.0, hi = 1.0;
  while (normalization(trap, dim, hi, g) <= N) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw_invalid("unbounded-normalization", "trap", "TF normalization never reaches N");
  }
  TfState st;
  st.trap = trap;
  st.dim = dim;
  st.N = N;
  st.g = g;
  int it = 0;
  for (; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normalization(trap, dim, mid, g) < N) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  st.bisection_iterations = it + 1;
  st.chemical_potential = 0.5 * (lo + hi);
  st.support_radius = turning_radius(trap, st.chemical_potential);
  const double mu = st.chemical_potential;
  // V rho + 4 pi g rho^2 = (mu^2 - V^2) / (16 pi g)
  st.energy = tf_integral(trap, dim, mu, [&](double v) { return (mu * mu - v * v) / (16.0 * pi * g); });
  if (trap.is_homogeneous())
    st.chemical_potential_closed_form = tf_chemical_potential_closed_form(trap.order(), trap.coefficient(), dim, N * g);
  return st;
}

TfState rescaled_tf_profile(const TrapPotential& w, int dim) { return solve_tf(w, 1.0, 1.0, dim); }

}  // namespace gptrap
