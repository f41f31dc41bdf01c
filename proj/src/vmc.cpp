#include "gptrap/vmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

#include "gptrap/coupling.hpp"
#include "gptrap/error.hpp"
#include "gptrap/kernels.hpp"

namespace gptrap {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

double dist_sq(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
  return s;
}

// ln f(t_k) for the particle at index k, given its nearest earlier neighbour.
double pair_term(const Configuration& cfg, const TrialFunction& trial, int k) {
  const auto xk = cfg.particle(k);
  double t2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) t2 = std::min(t2, dist_sq(xk, cfg.particle(j)));
  const double b = trial.cutoff();
  if (t2 >= b * b) return 0.0;
  return trial.log_pair(std::sqrt(t2));
}

// partial_log_psi without the extent check.
double partial_unchecked(const Configuration& cfg, const TrialFunction& trial, int i) {
  double s = trial.log_phi(std::sqrt(norm_sq(cfg.particle(i))));
  if (!trial.has_pair_factor()) return s;
  if (i > 0) s += pair_term(cfg, trial, i);
  for (int k = i + 1; k < cfg.size(); ++k) s += pair_term(cfg, trial, k);
  return s;
}

void check_configuration(const Configuration& cfg, const TrialFunction& trial) {
  if (cfg.dim != trial.dim()) throw_invalid("dimension-mismatch", "dim", "configuration and trial function dimensions differ");
  if (cfg.coords.empty() || cfg.coords.size() % static_cast<std::size_t>(cfg.dim) != 0)
    throw_invalid("bad-configuration", "N", "configuration needs N >= 1 complete positions");
  for (double c : cfg.coords)
    if (!std::isfinite(c)) throw_invalid("bad-configuration", "positions", "non-finite coordinate");
  const double ext = trial.extent();
  for (int i = 0; i < cfg.size(); ++i)
    if (norm_sq(cfg.particle(i)) > ext * ext)
      throw_invalid("outside-grid", "r_max", "particle beyond the GP grid; enlarge the grid");
}

double kinetic_and_trap(Configuration& cfg, const TrialFunction& trial, const TrapPotential& trap, double h) {
  double e = 0.0;
  for (int i = 0; i < cfg.size(); ++i) {
    const double l0 = partial_unchecked(cfg, trial, i);
    auto x = cfg.particle(i);
    double lap = 0.0, grad2 = 0.0;
    for (int d = 0; d < cfg.dim; ++d) {
      const double x0 = x[d];
      x[d] = x0 + h;
      const double lp = partial_unchecked(cfg, trial, i);
      x[d] = x0 - h;
      const double lm = partial_unchecked(cfg, trial, i);
      x[d] = x0;
      lap += (lp - 2.0 * l0 + lm) / (h * h);
      const double gd = (lp - lm) / (2.0 * h);
      grad2 += gd * gd;
    }
    e += -(lap + grad2) + trap(std::sqrt(norm_sq(x)));
  }
  return e;
}

struct ChainOutput {
  std::vector<double> energies;
  std::vector<double> hist_density;  // blocks x bins, flattened
  long accepted = 0;
  long proposed = 0;
  long skipped = 0;
  double step = 0.0;
};

std::mt19937_64 chain_rng(std::uint64_t seed, int chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain)};
  return std::mt19937_64(seq);
}

ChainOutput run_chain(const TrialFunction& trial, const TrapPotential& trap, const PairPotential* v,
                      Configuration cfg, const VmcOptions& opts, int chain, const std::vector<double>& edges) {
  auto rng = chain_rng(opts.seed, chain);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int N = cfg.size();
  const int D = cfg.dim;
  const double ext2 = trial.extent() * trial.extent();
  const long burn = static_cast<long>(std::ceil(opts.burn_in_fraction * static_cast<double>(opts.steps)));
  const long n_meas = (opts.steps - burn) / opts.measure_every;
  const long block_size = n_meas / opts.blocks;
  const long lead = n_meas - block_size * opts.blocks;
  const int n_bins = static_cast<int>(edges.size()) - 1;
  const double r_hist = edges.back();
  const double bin_w = r_hist / n_bins;

  ChainOutput out;
  out.energies.reserve(static_cast<std::size_t>(n_meas));
  std::vector<double> counts(static_cast<std::size_t>(opts.blocks) * n_bins, 0.0);

  std::vector<double> logp(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) logp[i] = partial_unchecked(cfg, trial, i);
  std::vector<double> trial_x(static_cast<std::size_t>(D));

  double step = opts.step_size;
  long window_acc = 0, window_prop = 0;
  long meas = 0;

  for (long sweep = 0; sweep < opts.steps; ++sweep) {
    const bool burning = sweep < burn;
    for (int i = 0; i < N; ++i) {
      auto x = cfg.particle(i);
      std::copy(x.begin(), x.end(), trial_x.begin());
      double r2 = 0.0;
      for (int d = 0; d < D; ++d) {
        x[d] += step * gauss(rng);
        r2 += x[d] * x[d];
      }
      bool accept = false;
      double lnew = 0.0;
      if (r2 <= ext2) {
        lnew = partial_unchecked(cfg, trial, i);
        double lold = logp[i];
        if (trial.has_pair_factor()) {
          // Earlier moves in this sweep may have changed i's pair terms.
          std::swap_ranges(x.begin(), x.end(), trial_x.begin());
          lold = partial_unchecked(cfg, trial, i);
          std::swap_ranges(x.begin(), x.end(), trial_x.begin());
        }
        const double delta = 2.0 * (lnew - lold);
        accept = delta >= 0.0 || unif(rng) < std::exp(delta);
      }
      if (accept) {
        logp[i] = lnew;
        ++window_acc;
      } else {
        std::copy(trial_x.begin(), trial_x.end(), x.begin());
      }
      ++window_prop;
    }

    if (burning) {
      if (window_prop >= 20L * N) {
        const double acc = static_cast<double>(window_acc) / static_cast<double>(window_prop);
        step *= std::exp(acc - opts.target_acceptance);
        window_acc = window_prop = 0;
      }
      if (sweep + 1 == burn) window_acc = window_prop = 0;
      continue;
    }
    out.accepted += window_acc;
    out.proposed += window_prop;
    window_acc = window_prop = 0;

    if ((sweep - burn + 1) % opts.measure_every != 0) continue;
    const long m = meas++;
    if (m >= n_meas) continue;

    const double e = v != nullptr ? local_energy(cfg, trial, trap, *v, opts.h_d)
                                  : local_energy(cfg, trial, trap, opts.h_d);
    if (std::isfinite(e)) {
      out.energies.push_back(e);
    } else if (v != nullptr && v->kind() == PairKind::hard_core) {
      ++out.skipped;
    } else {
      throw Error(ErrorKind::non_convergence, "non-finite-energy", "", "non-finite local energy encountered");
    }

    if (m < lead) continue;
    const long blk = (m - lead) / block_size;
    double* row = counts.data() + blk * n_bins;
    for (int i = 0; i < N; ++i) {
      const double r = std::sqrt(norm_sq(cfg.particle(i)));
      if (r >= r_hist) continue;
      row[std::min(n_bins - 1, static_cast<int>(r / bin_w))] += 1.0;
    }
  }

  // Per-block densities.
  const double area = sphere_area(D);
  out.hist_density.assign(counts.size(), 0.0);
  for (int k = 0; k < n_bins; ++k) {
    const double vol = area / D * (std::pow(edges[k + 1], D) - std::pow(edges[k], D));
    for (int blk = 0; blk < opts.blocks; ++blk)
      out.hist_density[blk * n_bins + k] = counts[blk * n_bins + k] / (static_cast<double>(block_size) * vol);
  }
  out.step = step;
  return out;
}

}  // namespace

TrialFunction TrialFunction::product(const GpState& gp) {
  const int n = gp.grid.size();
  std::vector<double> lp(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) {
    if (!(gp.phi[k] > 0.0))
      throw_invalid("non-positive-profile", "phi", "GP profile must be positive inside the grid");
    lp[k] = std::log(gp.phi[k]);
  }
  TrialFunction t;
  t.dim_ = gp.grid.dim();
  // The last node carries the Dirichlet zero and is left out.
  t.log_phi_ = CubicSpline(0.0, gp.grid.spacing(), std::move(lp), 0.0);
  return t;
}

TrialFunction TrialFunction::dyson(const GpState& gp, const ScatteringSolution& s, double b) {
  if (s.dim != gp.grid.dim()) throw_invalid("dimension-mismatch", "dim", "scattering and GP dimensions differ");
  const double range = s.potential.range();
  if (!(b > range) || !std::isfinite(b))
    throw_invalid("cutoff-inside-range", "b", "cutoff b must exceed the potential range");
  TrialFunction t = product(gp);
  t.pair_ = true;
  t.b_ = b;
  t.core_ = s.potential.core_radius();
  t.range_ = range;
  t.a_ = s.scattering_length;
  const double f0b = s.asymptote(b);
  if (!(f0b > 0.0)) throw_invalid("cutoff-inside-range", "b", "f0(b) must be positive; increase b");
  t.log_f0_b_ = std::log(f0b);

  std::vector<double> inner;
  for (std::size_t k = 0; k < s.radii.size() && s.radii[k] <= range * (1.0 + 1e-12); ++k) inner.push_back(s.profile[k]);
  // A hard core leaves no interaction region between core and range.
  if (s.potential.kind() == PairKind::hard_core) return t;
  t.f0_inner_ = CubicSpline(s.r_start, s.h, std::move(inner), 0.0);
  return t;
}

TrialFunction TrialFunction::dyson_scaled(const GpState& gp, const ScatteringSolution& s, double multiplier) {
  if (!(multiplier > 0.0)) throw_invalid("non-positive", "b_multiplier", "cutoff multiplier must be positive");
  const double rho = mean_gp_density(gp);
  TrialFunction t = dyson(gp, s, multiplier * std::pow(rho, -1.0 / gp.grid.dim()));
  t.multiplier_ = multiplier;
  return t;
}

double TrialFunction::log_phi(double r) const { return log_phi_(r); }

double TrialFunction::log_pair(double r) const {
  if (!pair_ || r >= b_) return 0.0;
  if (r >= range_) {
    const double f0 = dim_ == 3 ? 1.0 - a_ / r : std::log(r / a_);
    return std::log(f0) - log_f0_b_;
  }
  if (r <= core_) return neg_inf;
  const double f0 = f0_inner_(r);
  return f0 > 0.0 ? std::log(f0) - log_f0_b_ : neg_inf;
}

double TrialFunction::pair(double r) const { return std::exp(log_pair(r)); }

Configuration initial_configuration(const TrialFunction& trial, int N, std::uint64_t seed) {
  if (N < 1) throw_invalid("non-positive", "N", "need at least one particle");
  const int D = trial.dim();
  // rms radius of Phi^2 from the spline (trapezoid on a fine radial grid).
  const double ext = trial.extent();
  double m0 = 0.0, m2 = 0.0;
  const int n = 2000;
  for (int k = 1; k < n; ++k) {
    const double r = ext * k / n;
    const double w = std::exp(2.0 * trial.log_phi(r)) * std::pow(r, D - 1);
    m0 += w;
    m2 += w * r * r;
  }
  const double sigma = std::sqrt(m2 / m0 / D);

  auto rng = chain_rng(seed, -1);
  std::normal_distribution<double> gauss(0.0, sigma);
  Configuration cfg;
  cfg.dim = D;
  for (int i = 0; i < N; ++i) {
    int tries = 0;
    for (;;) {
      std::vector<double> x(static_cast<std::size_t>(D));
      for (auto& c : x) c = gauss(rng);
      if (norm_sq(x) < 0.81 * ext * ext) {
        cfg.coords.insert(cfg.coords.end(), x.begin(), x.end());
        if (std::isfinite(partial_unchecked(cfg, trial, i))) break;
        cfg.coords.resize(cfg.coords.size() - static_cast<std::size_t>(D));
      }
      if (++tries > 10000)
        throw Error(ErrorKind::non_convergence, "no-valid-configuration", "N", "could not place particles without overlap");
    }
  }
  return cfg;
}

double trial_log_psi(const Configuration& cfg, const TrialFunction& trial) {
  check_configuration(cfg, trial);
  double s = 0.0;
  for (int i = 0; i < cfg.size(); ++i) s += trial.log_phi(std::sqrt(norm_sq(cfg.particle(i))));
  if (trial.has_pair_factor())
    for (int k = 1; k < cfg.size(); ++k) s += pair_term(cfg, trial, k);
  return s;
}

double partial_log_psi(const Configuration& cfg, const TrialFunction& trial, int i) {
  check_configuration(cfg, trial);
  if (i < 0 || i >= cfg.size()) throw_invalid("bad-index", "i", "particle index out of range");
  return partial_unchecked(cfg, trial, i);
}

double local_energy(const Configuration& cfg, const TrialFunction& trial, const TrapPotential& trap, const PairPotential& v,
                    double h_d) {
  Configuration work = cfg;
  double e = kinetic_and_trap(work, trial, trap, h_d);
  const double range2 = v.range() * v.range();
  for (int i = 0; i < cfg.size(); ++i)
    for (int j = i + 1; j < cfg.size(); ++j) {
      const double r2 = dist_sq(cfg.particle(i), cfg.particle(j));
      if (r2 <= range2) e += v(std::sqrt(r2));
    }
  return e;
}

double local_energy(const Configuration& cfg, const TrialFunction& trial, const TrapPotential& trap, double h_d) {
  Configuration work = cfg;
  return kinetic_and_trap(work, trial, trap, h_d);
}

BlockStats block_average(std::span<const double> samples, int blocks) {
  if (blocks < 2) throw_invalid("too-few-blocks", "blocks", "block averaging needs at least two blocks");
  const std::size_t size = samples.size() / static_cast<std::size_t>(blocks);
  if (size == 0) throw_invalid("too-few-samples", "steps", "fewer samples than blocks");
  const std::size_t lead = samples.size() - size * static_cast<std::size_t>(blocks);
  std::vector<double> means(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(lead + b * size);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
  }
  BlockStats st;
  st.blocks = blocks;
  st.mean = std::accumulate(means.begin(), means.end(), 0.0) / blocks;
  double var = 0.0;
  for (double m : means) var += (m - st.mean) * (m - st.mean);
  st.standard_error = std::sqrt(var / (blocks - 1) / blocks);
  return st;
}

double RadialHistogram::total() const {
  double s = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k)
    s += density[k] * sphere_area(dim) / dim * (std::pow(edges[k + 1], dim) - std::pow(edges[k], dim));
  return s;
}

VmcResult run_vmc(const TrialFunction& trial, const TrapPotential& trap, const PairPotential* v, const Configuration& cfg0,
                  const VmcOptions& opts) {
  if (opts.steps < 10000) throw_invalid("too-few-steps", "steps", "VMC needs at least 1e4 sweeps");
  if (!(opts.step_size > 0.0)) throw_invalid("non-positive", "step_size", "step size must be positive");
  if (opts.chains < 1) throw_invalid("non-positive", "chains", "need at least one chain");
  if (opts.measure_every < 1) throw_invalid("non-positive", "measure_every", "measurement interval must be positive");
  if (opts.n_bins < 1) throw_invalid("non-positive", "n_bins", "need at least one histogram bin");
  if (opts.blocks < 2) throw_invalid("too-few-blocks", "blocks", "block averaging needs at least two blocks");
  if (!(opts.burn_in_fraction >= 0.0 && opts.burn_in_fraction < 1.0))
    throw_invalid("out-of-range", "burn_in_fraction", "burn-in fraction must lie in [0, 1)");
  if (!(opts.h_d > 0.0)) throw_invalid("non-positive", "h_d", "finite-difference step must be positive");
  if (v != nullptr && trial.has_pair_factor() && !(trial.cutoff() > v->range()))
    throw_invalid("cutoff-inside-range", "b", "cutoff b must exceed the potential range");
  check_configuration(cfg0, trial);
  if (!std::isfinite(trial_log_psi(cfg0, trial)))
    throw_invalid("zero-weight-start", "positions", "trial function vanishes at the initial configuration");

  const long burn = static_cast<long>(std::ceil(opts.burn_in_fraction * static_cast<double>(opts.steps)));
  const long n_meas = (opts.steps - burn) / opts.measure_every;
  if (n_meas < opts.blocks) throw_invalid("too-few-samples", "steps", "fewer measurements than blocks");

  const double r_hist = opts.hist_r_max > 0.0 ? opts.hist_r_max : trial.extent();
  std::vector<double> edges(static_cast<std::size_t>(opts.n_bins) + 1);
  for (int k = 0; k <= opts.n_bins; ++k) edges[k] = r_hist * k / opts.n_bins;

  std::vector<ChainOutput> outs(static_cast<std::size_t>(opts.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(opts.chains));
  const int workers = std::max(1, std::min(opts.chains, kernels::worker_count()));
#pragma omp parallel for schedule(static, 1) num_threads(workers)
  for (int c = 0; c < opts.chains; ++c) {
    try {
      outs[c] = run_chain(trial, trap, v, cfg0, opts, c, edges);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  VmcResult res;
  res.rng_seed = opts.seed;
  res.chains = opts.chains;
  res.burn_in = burn;
  res.step_size = outs[0].step;
  long acc = 0, prop = 0;
  for (const auto& o : outs) {
    acc += o.accepted;
    prop += o.proposed;
    res.skipped += o.skipped;
    res.n_samples += static_cast<long>(o.energies.size());
    const auto st = block_average(o.energies, opts.blocks);
    res.chain_means.push_back(st.mean);
    res.chain_stderrs.push_back(st.standard_error);
  }
  if (acc == 0) throw Error(ErrorKind::non_convergence, "zero-acceptance", "step_size", "no Metropolis move was accepted");
  res.acceptance_rate = static_cast<double>(acc) / static_cast<double>(prop);

  const bool all_positive =
      std::all_of(res.chain_stderrs.begin(), res.chain_stderrs.end(), [](double s) { return s > 0.0; });
  if (all_positive) {
    double wsum = 0.0, msum = 0.0;
    for (int c = 0; c < opts.chains; ++c) {
      const double w = 1.0 / (res.chain_stderrs[c] * res.chain_stderrs[c]);
      wsum += w;
      msum += w * res.chain_means[c];
    }
    res.energy_mean = msum / wsum;
    res.energy_stderr = 1.0 / std::sqrt(wsum);
  } else {
    double var = 0.0;
    for (int c = 0; c < opts.chains; ++c) {
      res.energy_mean += res.chain_means[c] / opts.chains;
      var += res.chain_stderrs[c] * res.chain_stderrs[c];
    }
    res.energy_stderr = std::sqrt(var) / opts.chains;
  }

  // Histogram: every chain contributes opts.blocks block estimates.
  const int n_bins = opts.n_bins;
  const int total_blocks = opts.blocks * opts.chains;
  res.histogram.dim = trial.dim();
  res.histogram.edges = edges;
  res.histogram.density.assign(static_cast<std::size_t>(n_bins), 0.0);
  res.histogram.standard_error.assign(static_cast<std::size_t>(n_bins), 0.0);
  for (int k = 0; k < n_bins; ++k) {
    double mean = 0.0;
    for (const auto& o : outs)
      for (int b = 0; b < opts.blocks; ++b) mean += o.hist_density[b * n_bins + k];
    mean /= total_blocks;
    double var = 0.0;
    for (const auto& o : outs)
      for (int b = 0; b < opts.blocks; ++b) {
        const double d = o.hist_density[b * n_bins + k] - mean;
        var += d * d;
      }
    res.histogram.density[k] = mean;
    res.histogram.standard_error[k] = std::sqrt(var / (total_blocks - 1) / total_blocks);
  }
  return res;
}

const RadialHistogram& vmc_density(const VmcResult& result) { return result.histogram; }

}  // namespace gptrap
