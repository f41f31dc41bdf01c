#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gptrap/core.hpp"
#include "gptrap/gp_solver.hpp"
#include "gptrap/scattering.hpp"
#include "gptrap/spline.hpp"

namespace gptrap {

// Psi = prod_i Phi(x_i) * prod_{i>=2} f(t_i), with t_i the distance from x_i
// to its nearest neighbour among x_1..x_{i-1} (input order).
class TrialFunction {
 public:
  /// Product state without pair correlations (f = 1).
  static TrialFunction product(const GpState& gp);

  /// Pair factor f = f0/f0(b) below b, 1 above. Requires b beyond the range.
  static TrialFunction dyson(const GpState& gp, const ScatteringSolution& scattering, double b);

  /// Same with b = multiplier * rho-bar^{-1/D}, rho-bar the mean GP density.
  static TrialFunction dyson_scaled(const GpState& gp, const ScatteringSolution& scattering,
                                    double multiplier = 1.0);

  int dim() const noexcept { return dim_; }
  bool has_pair_factor() const noexcept { return pair_; }
  double cutoff() const noexcept { return b_; }
  double cutoff_multiplier() const noexcept { return multiplier_; }
  /// Largest radius at which Phi is represented.
  double extent() const noexcept { return log_phi_.x_max(); }

  double log_phi(double r) const;
  /// ln f(r); -infinity inside a hard core.
  double log_pair(double r) const;
  double pair(double r) const;

 private:
  int dim_ = 3;
  CubicSpline log_phi_;
  bool pair_ = false;
  double b_ = 0.0;
  double multiplier_ = 0.0;
  double core_ = 0.0;
  double range_ = 0.0;
  double a_ = 0.0;
  double log_f0_b_ = 0.0;
  CubicSpline f0_inner_;  // f0 on [r_start, range]
};

struct Configuration {
  int dim = 3;
  std::vector<double> coords;  // particle-major, N * dim

  int size() const { return static_cast<int>(coords.size()) / dim; }
  std::span<double> particle(int i) { return {coords.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> particle(int i) const {
    return {coords.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

/// Positions drawn from a Gaussian of the GP rms radius, redrawn until
/// the trial function is nonzero.
Configuration initial_configuration(const TrialFunction& trial, int N, std::uint64_t seed);

/// ln |Psi|; -infinity when a pair factor vanishes. Throws if a particle lies
/// beyond the trial function's extent.
double trial_log_psi(const Configuration& cfg, const TrialFunction& trial);

/// Terms of ln |Psi| that depend on particle i.
double partial_log_psi(const Configuration& cfg, const TrialFunction& trial, int i);

/// -sum_i (Lap_i ln Psi + |grad_i ln Psi|^2) + sum V + sum_{i<j} v, derivatives
/// by central differences of step h_d. Non-finite near hard-core contact.
double local_energy(const Configuration& cfg, const TrialFunction& trial, const TrapPotential& trap,
                    const PairPotential& v, double h_d = 1e-4);

/// Same with no pair potential (v = 0).
double local_energy(const Configuration& cfg, const TrialFunction& trial, const TrapPotential& trap,
                    double h_d = 1e-4);

struct BlockStats {
  double mean = 0.0;
  double standard_error = 0.0;
  int blocks = 0;
};

/// Mean and standard error from equal blocks; leading samples that do not
/// fill a block are dropped.
BlockStats block_average(std::span<const double> samples, int blocks = 32);

struct RadialHistogram {
  int dim = 3;
  std::vector<double> edges;    // n_bins + 1
  std::vector<double> density;  // particles per unit D-volume, averaged over the shell
  std::vector<double> standard_error;
  /// sum density * shell volume.
  double total() const;
};

struct VmcOptions {
  long steps = 100000;        // sweeps of N single-particle moves
  double burn_in_fraction = 0.1;
  double step_size = 0.5;     // initial proposal width, tuned during burn-in
  double target_acceptance = 0.5;
  std::uint64_t seed = 1;
  int chains = 1;
  int measure_every = 1;      // sweeps between energy measurements
  int blocks = 32;
  int n_bins = 32;
  double hist_r_max = 0.0;    // 0: the trial function's extent
  double h_d = 1e-4;
};

struct VmcResult {
  double energy_mean = 0.0;
  double energy_stderr = 0.0;
  double acceptance_rate = 0.0;
  long n_samples = 0;   // energy measurements over all chains
  long burn_in = 0;     // sweeps discarded per chain
  double step_size = 0.0;  // proposal width after tuning (first chain)
  long skipped = 0;     // measurements with non-finite energy (hard-core contact)
  std::uint64_t rng_seed = 0;
  int chains = 1;
  std::vector<double> chain_means;
  std::vector<double> chain_stderrs;
  RadialHistogram histogram;
};

/// Metropolis sampling of |Psi|^2. Chains use independent seeds derived from
/// (seed, chain index) and are merged by inverse-variance weighting, so the
/// result does not depend on the thread count.
VmcResult run_vmc(const TrialFunction& trial, const TrapPotential& trap, const PairPotential* v,
                  const Configuration& cfg0, const VmcOptions& opts);

/// Radial density estimate normalized to N.
const RadialHistogram& vmc_density(const VmcResult& result);

}  // namespace gptrap
