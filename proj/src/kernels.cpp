#include "gptrap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include <omp.h>

#include "gptrap/core.hpp"
#include "gptrap/error.hpp"

namespace gptrap::kernels {

SemStiffness build_sem_stiffness(int n_nodes, double h, int dim) {
  if (n_nodes < 3 || n_nodes % 2 == 0)
    throw_invalid("even-point-count", "n_points", "P2 elements need an odd number of grid points");
  SemStiffness k;
  k.n_nodes = n_nodes;
  k.h = h;
  k.dim = dim;
  const double area = sphere_area(dim);
  // Derivative of the quadratic interpolant at the three element nodes.
  const double d[3][3] = {{-1.5 / h, 2.0 / h, -0.5 / h}, {-0.5 / h, 0.0, 0.5 / h}, {0.5 / h, -2.0 / h, 1.5 / h}};
  const double gl[3] = {h / 3.0, 4.0 * h / 3.0, h / 3.0};
  const int n_el = (n_nodes - 1) / 2;
  k.elements.resize(static_cast<std::size_t>(n_el));
  for (int e = 0; e < n_el; ++e) {
    double w[3];
    for (int q = 0; q < 3; ++q) w[q] = area * gl[q] * std::pow((2 * e + q) * h, dim - 1);
    auto entry = [&](int i, int j) {
      double s = 0.0;
      for (int q = 0; q < 3; ++q) s += w[q] * d[q][i] * d[q][j];
      return s;
    };
    k.elements[e] = {entry(0, 0), entry(0, 1), entry(0, 2), entry(1, 1), entry(1, 2), entry(2, 2)};
  }
  return k;
}

namespace {

constexpr std::size_t chunk = 4096;

inline double stiffness_row(const SemStiffness& k, std::span<const double> phi, std::size_t node) {
  const std::size_t n_el = k.elements.size();
  double s = 0.0;
  if (node % 2 == 1) {
    const auto& e = k.elements[node / 2];
    const std::size_t b = node - 1;
    s = e[1] * phi[b] + e[3] * phi[b + 1] + e[4] * phi[b + 2];
  } else {
    const std::size_t el = node / 2;
    if (el < n_el) {
      const auto& e = k.elements[el];
      s += e[0] * phi[node] + e[1] * phi[node + 1] + e[2] * phi[node + 2];
    }
    if (el > 0) {
      const auto& e = k.elements[el - 1];
      s += e[2] * phi[node - 2] + e[4] * phi[node - 1] + e[5] * phi[node];
    }
  }
  return s;
}

inline double element_kinetic(const SemStiffness& k, std::span<const double> phi, std::size_t el) {
  const double h = k.h;
  const std::size_t b = 2 * el;
  const double p0 = phi[b], p1 = phi[b + 1], p2 = phi[b + 2];
  const double g0 = (-1.5 * p0 + 2.0 * p1 - 0.5 * p2) / h;
  const double g1 = (p2 - p0) / (2.0 * h);
  const double g2 = (0.5 * p0 - 2.0 * p1 + 1.5 * p2) / h;
  const double r0 = static_cast<double>(b) * h, r1 = r0 + h, r2 = r0 + 2.0 * h;
  double w0, w1, w2;
  if (k.dim == 3) {
    w0 = r0 * r0, w1 = r1 * r1, w2 = r2 * r2;
  } else {
    w0 = r0, w1 = r1, w2 = r2;
  }
  return (h / 3.0) * (w0 * g0 * g0 + 4.0 * w1 * g1 * g1 + w2 * g2 * g2);
}

inline double residual_at(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double c8,
                          double mu, std::span<const double> phi, std::size_t node) {
  const double p = phi[node];
  return stiffness_row(k, phi, node) / w[node] + (v[node] + c8 * p * p) * p - mu * p;
}

template <class F>
double chunked_sum(std::size_t n, F&& term) {
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

namespace serial {

void apply_stiffness(const SemStiffness& k, std::span<const double> phi, std::span<double> out) {
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = stiffness_row(k, phi, i);
}

double kinetic_energy(const SemStiffness& k, std::span<const double> phi) {
  double s = 0.0;
  for (std::size_t e = 0; e < k.elements.size(); ++e) s += element_kinetic(k, phi, e);
  return sphere_area(k.dim) * s;
}

Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi) {
  Moments m;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double p2 = phi[i] * phi[i];
    m.norm += w[i] * p2;
    m.trap += w[i] * v[i] * p2;
    m.quartic += w[i] * p2 * p2;
  }
  return m;
}

ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi) {
  const double c8 = 8.0 * std::numbers::pi * coupling;
  ResidualNorms r;
  for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
    const double res = residual_at(k, w, v, c8, mu, phi, i);
    r.residual_sq += res * res;
    r.reference_sq += mu * mu * phi[i] * phi[i];
  }
  return r;
}

}  // namespace serial

namespace parallel {

void apply_stiffness(const SemStiffness& k, std::span<const double> phi, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(phi.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = stiffness_row(k, phi, static_cast<std::size_t>(i));
}

double kinetic_energy(const SemStiffness& k, std::span<const double> phi) {
  return sphere_area(k.dim) * chunked_sum(k.elements.size(), [&](std::size_t e) { return element_kinetic(k, phi, e); });
}

Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi) {
  Moments m;
  m.norm = chunked_sum(phi.size(), [&](std::size_t i) { return w[i] * phi[i] * phi[i]; });
  m.trap = chunked_sum(phi.size(), [&](std::size_t i) { return w[i] * v[i] * phi[i] * phi[i]; });
  m.quartic = chunked_sum(phi.size(), [&](std::size_t i) {
    const double p2 = phi[i] * phi[i];
    return w[i] * p2 * p2;
  });
  return m;
}

ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi) {
  const double c8 = 8.0 * std::numbers::pi * coupling;
  const std::size_t n = phi.size();
  ResidualNorms r;
  r.residual_sq = chunked_sum(n, [&](std::size_t i) {
    if (i == 0 || i + 1 == n) return 0.0;
    const double res = residual_at(k, w, v, c8, mu, phi, i);
    return res * res;
  });
  r.reference_sq = chunked_sum(n, [&](std::size_t i) {
    if (i == 0 || i + 1 == n) return 0.0;
    return mu * mu * phi[i] * phi[i];
  });
  return r;
}

}  // namespace parallel

bool use_parallel(Policy policy, std::size_t n) {
  switch (policy) {
    case Policy::serial: return false;
    case Policy::parallel: return true;
    case Policy::automatic: return n >= parallel_threshold && !omp_in_parallel();
  }
  return false;
}

double kinetic_energy(const SemStiffness& k, std::span<const double> phi, Policy policy) {
  return use_parallel(policy, phi.size()) ? parallel::kinetic_energy(k, phi) : serial::kinetic_energy(k, phi);
}

Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi, Policy policy) {
  return use_parallel(policy, phi.size()) ? parallel::moments(w, v, phi) : serial::moments(w, v, phi);
}

ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi, Policy policy) {
  return use_parallel(policy, phi.size()) ? parallel::residual(k, w, v, coupling, mu, phi)
                                          : serial::residual(k, w, v, coupling, mu, phi);
}

void solve_banded_spd(std::vector<double> diag, std::vector<double> off1, std::vector<double> off2,
                      std::span<double> b) {
  const std::size_t n = diag.size();
  // LDL^T in place: diag -> D, off1 -> L(i+1,i), off2 -> L(i+2,i).
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) diag[i] -= off1[i - 1] * off1[i - 1] * diag[i - 1];
    if (i >= 2) diag[i] -= off2[i - 2] * off2[i - 2] * diag[i - 2];
    if (!(diag[i] > 0.0)) throw_invalid("not-positive-definite", "matrix", "banded system is not positive definite");
    if (i + 1 < n) {
      double a = off1[i];
      if (i >= 1) a -= off2[i - 1] * off1[i - 1] * diag[i - 1];
      off1[i] = a / diag[i];
    }
    if (i + 2 < n) off2[i] /= diag[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) b[i] -= off1[i - 1] * b[i - 1];
    if (i >= 2) b[i] -= off2[i - 2] * b[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= diag[i];
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) b[i] -= off1[i] * b[i + 1];
    if (i + 2 < n) b[i] -= off2[i] * b[i + 2];
  }
}

int worker_count() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("GPTRAP_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
    }
  }
  return std::max(1, n);
}

}  // namespace gptrap::kernels
