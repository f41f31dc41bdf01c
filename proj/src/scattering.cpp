#include "gptrap/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "gptrap/error.hpp"

namespace gptrap {

namespace {

// Minimum number of RK4 steps across the potential range.
constexpr int min_steps_in_range = 200;

struct State {
  double f;  // f0
  double p;  // r^{D-1} f0'
};

}  // namespace

double ScatteringSolution::asymptote(double r) const {
  return dim == 3 ? 1.0 - scattering_length / r : std::log(r / scattering_length);
}

ScatteringSolution zero_energy_profile(const PairPotential& v, int dim, double r_max, int n_points) {
  if (dim != 2 && dim != 3) throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3");
  const double range = v.range();
  if (!(r_max >= 4.0 * range))
    throw_invalid("range-exceeds-grid", "r_max", "potential range exceeds r_max/4; enlarge r_max");
  if (n_points < 16) throw_invalid("too-few-points", "n_points", "scattering grid needs at least 16 points");

  // Align a node with the range so RK4 never straddles the edge of the potential.
  double h = r_max / (n_points - 1);
  int steps_in_range = static_cast<int>(std::ceil(range / h - 1e-9));
  if (steps_in_range < min_steps_in_range)
    throw_invalid("step-too-coarse", "n_points",
                  "integration step too coarse: need at least " + std::to_string(min_steps_in_range) +
                      " steps across the potential range");
  h = range / steps_in_range;
  const int n = static_cast<int>(std::ceil(r_max / h - 1e-9)) + 1;

  const bool hard = v.kind() == PairKind::hard_core;
  const double r0 = hard ? range : 0.0;
  const auto rhs = [&](double r, const State& s) -> State {
    const double rd = dim == 3 ? r * r : r;
    const double vr = hard ? 0.0 : v(r);
    return {s.p / rd, rd * 0.5 * vr * s.f};
  };

  ScatteringSolution sol;
  sol.dim = dim;
  sol.potential = v;
  sol.h = h;

  State s;
  double r;
  int first;
  if (hard) {
    // f0 vanishes at the core; flux normalization is arbitrary.
    r = r0;
    s = {0.0, 1.0};
    first = 0;
    sol.r_start = r0;
    sol.radii.push_back(r0);
    sol.profile.push_back(0.0);
  } else {
    // Regular series start at r = h: f0 = 1 + q r^2/(2D) + q^2 r^4/(8D(D+2)), q = v(0)/2.
    const double q = 0.5 * v(0.0);
    r = h;
    const double f = 1.0 + q * r * r / (2.0 * dim) + q * q * std::pow(r, 4) / (8.0 * dim * (dim + 2));
    const double fp = q * r / dim + q * q * std::pow(r, 3) / (2.0 * dim * (dim + 2));
    s = {f, std::pow(r, dim - 1) * fp};
    first = 1;
    sol.r_start = 0.0;
    sol.radii.push_back(0.0);
    sol.profile.push_back(1.0);
    sol.radii.push_back(r);
    sol.profile.push_back(f);
  }

  // Node alignment puts a jump of v at a step boundary; the end-point stages
  // are nudged inward so each step sees one side of it.
  for (int k = first; k + 1 < n; ++k) {
    const double rk = hard ? r0 + k * h : k * h;
    const double half = 0.5 * h;
    const auto& eval = rhs;
    const State k1 = eval(rk + 1e-12 * h, s);
    const State k2 = eval(rk + half, {s.f + half * k1.f, s.p + half * k1.p});
    const State k3 = eval(rk + half, {s.f + half * k2.f, s.p + half * k2.p});
    const State k4 = eval(rk + h - 1e-12 * h, {s.f + h * k3.f, s.p + h * k3.p});
    s.f += h / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
    s.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (!std::isfinite(s.f) || !std::isfinite(s.p))
      throw Error(ErrorKind::non_convergence, "non-convergent-integration", "n_points",
                  "zero-energy integration overflowed; refine the step");
    sol.radii.push_back(rk + h);
    sol.profile.push_back(s.f);
  }

  // Least-squares fit of the tail over the outer quarter: f0 = A + B x with
  // x = 1/r (D=3, B = -A a) or x = ln r (D=2, f0 = A ln r - A ln a).
  const std::size_t m = sol.radii.size();
  const std::size_t lo = m - std::max<std::size_t>(m / 4, 8);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto basis = [&](double rr) { return dim == 3 ? 1.0 / rr : std::log(rr); };
  for (std::size_t i = lo; i < m; ++i) {
    const double x = basis(sol.radii[i]);
    const double y = sol.profile[i];
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double cnt = static_cast<double>(m - lo);
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / cnt;
  double amplitude, a;
  if (dim == 3) {
    amplitude = icpt;
    a = -slope / icpt;
  } else {
    amplitude = slope;
    a = std::exp(-icpt / slope);
  }
  if (!(amplitude > 0.0) || !(a > 0.0) || !std::isfinite(a))
    throw Error(ErrorKind::non_convergence, "bad-tail-fit", "potential",
                "zero-energy tail fit failed (non-positive amplitude or scattering length)");
  double ss = 0.0;
  for (std::size_t i = lo; i < m; ++i) {
    const double pred = icpt + slope * basis(sol.radii[i]);
    ss += (sol.profile[i] - pred) * (sol.profile[i] - pred);
  }
  for (double& f : sol.profile) f /= amplitude;
  sol.scattering_length = a;
  sol.amplitude = amplitude;
  sol.match_radius = sol.radii[lo];
  sol.fit_residual = std::sqrt(ss / cnt) / amplitude;
  return sol;
}

PairPotential scale_pair_potential(const PairPotential& v1, double a1, double a) {
  if (!(a1 > 0.0) || !std::isfinite(a1)) throw_invalid("non-positive-length", "a1", "reference scattering length must be positive");
  if (!(a > 0.0) || !std::isfinite(a)) throw_invalid("non-positive-length", "a", "target scattering length must be positive");
  if (a == a1) return v1;
  const double stretch = a / a1;
  const double energy = (a1 / a) * (a1 / a);
  switch (v1.kind()) {
    case PairKind::hard_core: return PairPotential::hard_core(v1.range() * stretch);
    case PairKind::soft_sphere: return PairPotential::soft_sphere(v1.height() * energy, v1.range() * stretch);
    case PairKind::tabulated: {
      std::vector<double> r(v1.table_radii().begin(), v1.table_radii().end());
      std::vector<double> val(v1.table_values().begin(), v1.table_values().end());
      for (double& x : r) x *= stretch;
      for (double& x : val) x *= energy;
      return PairPotential::tabulated(std::move(r), std::move(val));
    }
  }
  return v1;
}

}  // namespace gptrap
