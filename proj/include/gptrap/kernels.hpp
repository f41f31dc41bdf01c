#pragma once

// Data-parallel radial-grid kernels. Every kernel has a plain serial
// reference in `serial` and an OpenMP version in `parallel`. The parallel
// reductions sum fixed-size chunks and combine the partials in chunk order,
// so results do not depend on the thread count.

#include <array>
#include <span>
#include <vector>

namespace gptrap::kernels {

// Stiffness of quadratic (P2) elements over node triples (2e, 2e+1, 2e+2),
// integrated with the three-point Gauss-Lobatto (Simpson) rule against the
// radial measure S_D r^{D-1} dr. Entries per element: k00 k01 k02 k11 k12 k22.
struct SemStiffness {
  int n_nodes = 0;
  double h = 0.0;
  int dim = 3;
  std::vector<std::array<double, 6>> elements;
};

/// Requires an odd node count (an even number of intervals).
SemStiffness build_sem_stiffness(int n_nodes, double h, int dim);

struct Moments {
  double norm = 0.0;     // sum w phi^2
  double trap = 0.0;     // sum w V phi^2
  double quartic = 0.0;  // sum w phi^4
};

struct ResidualNorms {
  double residual_sq = 0.0;   // sum over interior nodes of (H phi - mu phi)^2
  double reference_sq = 0.0;  // sum over interior nodes of (mu phi)^2
};

namespace serial {
void apply_stiffness(const SemStiffness& k, std::span<const double> phi, std::span<double> out);
double kinetic_energy(const SemStiffness& k, std::span<const double> phi);
Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi);
ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi);
}  // namespace serial

namespace parallel {
void apply_stiffness(const SemStiffness& k, std::span<const double> phi, std::span<double> out);
double kinetic_energy(const SemStiffness& k, std::span<const double> phi);
Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi);
ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi);
}  // namespace parallel

enum class Policy { serial, parallel, automatic };

// Below this many nodes `automatic` stays serial; thread start-up costs more
// than the loop.
inline constexpr std::size_t parallel_threshold = 1u << 15;

bool use_parallel(Policy policy, std::size_t n);

double kinetic_energy(const SemStiffness& k, std::span<const double> phi, Policy policy = Policy::automatic);
Moments moments(std::span<const double> w, std::span<const double> v, std::span<const double> phi,
                Policy policy = Policy::automatic);
ResidualNorms residual(const SemStiffness& k, std::span<const double> w, std::span<const double> v, double coupling,
                       double mu, std::span<const double> phi, Policy policy = Policy::automatic);

// Solves A x = b for symmetric positive definite A with bandwidth two, given
// as its diagonal, first and second super-diagonals. Overwrites b with x.
// Inherently sequential; used for the semi-implicit flow step.
void solve_banded_spd(std::vector<double> diag, std::vector<double> off1, std::vector<double> off2,
                      std::span<double> b);

/// Number of worker threads, capped by GPTRAP_THREADS when set.
int worker_count();

}  // namespace gptrap::kernels
