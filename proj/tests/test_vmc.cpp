#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "gptrap/core.hpp"
#include "gptrap/coupling.hpp"
#include "gptrap/error.hpp"
#include "gptrap/gp_solver.hpp"
#include "gptrap/scattering.hpp"
#include "gptrap/vmc.hpp"

using namespace gptrap;

namespace {

constexpr double pi = std::numbers::pi;
const TrapPotential harmonic = TrapPotential::homogeneous(2.0);

// Normalized 3D oscillator ground state on a fine grid.
GpState gaussian_state(double N) {
  const auto grid = build_radial_grid(3, 7.0, 2801);
  std::vector<double> phi;
  for (double r : grid.nodes()) phi.push_back(std::sqrt(N) * std::pow(pi, -0.75) * std::exp(-0.5 * r * r));
  phi.back() = 0.0;
  return make_gp_state(grid, harmonic, phi, 0.0);
}

Configuration config(std::vector<double> coords) { return Configuration{3, std::move(coords)}; }

// Fraction of a 3D unit Gaussian density pi^{-3/2} e^{-r^2} inside radius R.
double gaussian_mass(double R) { return std::erf(R) - 2.0 / std::sqrt(pi) * R * std::exp(-R * R); }

struct DilutePair {
  GpState gp;
  PairPotential v = PairPotential::hard_core(1.0);
  ScatteringSolution scat;
};

DilutePair dilute_pair(double N, double a, PairPotential v) {
  DilutePair d;
  d.gp = minimize_gp(harmonic, N, a, policy_grid(harmonic, 3, N, a));
  d.v = std::move(v);
  d.scat = zero_energy_profile(d.v, 3, 20.0 * d.v.range(), 4001);
  return d;
}

}  // namespace

TEST(TrialFunction, SingleParticleHasNoPairFactor) {
  const auto d = dilute_pair(3.0, 0.01, PairPotential::hard_core(0.01));
  const auto t = TrialFunction::dyson(d.gp, d.scat, 0.3);
  const auto cfg = config({0.2, -0.1, 0.4});
  EXPECT_DOUBLE_EQ(trial_log_psi(cfg, t), t.log_phi(std::sqrt(0.21)));
}

TEST(TrialFunction, PlateauBeyondCutoff) {
  const auto d = dilute_pair(3.0, 0.01, PairPotential::hard_core(0.01));
  const auto t = TrialFunction::dyson(d.gp, d.scat, 0.3);
  const auto cfg = config({0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0});
  const double expected = t.log_phi(0.0) + 2.0 * t.log_phi(0.5);
  EXPECT_DOUBLE_EQ(trial_log_psi(cfg, t), expected);
}

TEST(TrialFunction, OrderedNearestNeighbourRule) {
  const auto d = dilute_pair(3.0, 0.01, PairPotential::hard_core(0.01));
  const double b = 0.3;
  const auto t = TrialFunction::dyson(d.gp, d.scat, b);
  // x1 = 0, x2 = b/2, x3 = b on a line: t2 = t3 = b/2.
  const auto cfg = config({0.0, 0.0, 0.0, 0.5 * b, 0.0, 0.0, b, 0.0, 0.0});
  const double f = (1.0 - 0.01 / (0.5 * b)) / (1.0 - 0.01 / b);
  const double expected = t.log_phi(0.0) + t.log_phi(0.5 * b) + t.log_phi(b) + 2.0 * std::log(f);
  EXPECT_NEAR(trial_log_psi(cfg, t), expected, 1e-10);
  // Relabeling changes the value: with order (x3, x1, x2), t2 = b, t3 = b/2.
  const auto relabeled = config({b, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5 * b, 0.0, 0.0});
  EXPECT_NEAR(trial_log_psi(relabeled, t) - expected, -std::log(f), 1e-10);
}

TEST(TrialFunction, PairFactorShape) {
  for (auto v : {PairPotential::hard_core(0.01), PairPotential::soft_sphere(800.0, 0.1)}) {
    const auto d = dilute_pair(8.0, 0.01, v);
    const auto t = TrialFunction::dyson_scaled(d.gp, d.scat);
    const double b = t.cutoff();
    EXPECT_NEAR(b, std::pow(mean_gp_density(d.gp), -1.0 / 3.0), 1e-12 * b);
    EXPECT_EQ(t.cutoff_multiplier(), 1.0);
    double prev = 0.0;
    for (int k = 0; k <= 4000; ++k) {
      const double r = 1.2 * b * k / 4000.0;
      const double f = t.pair(r);
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0 + 1e-14);
      ASSERT_GE(f, prev - 1e-12) << r;
      if (r >= b) { ASSERT_EQ(f, 1.0); }
      if (r <= v.core_radius()) { ASSERT_EQ(f, 0.0); }
      prev = f;
    }
    EXPECT_NEAR(t.pair(b * (1.0 - 1e-9)), 1.0, 1e-8);
  }
}

TEST(TrialFunction, CutoffMustExceedRange) {
  const auto d = dilute_pair(3.0, 0.01, PairPotential::soft_sphere(800.0, 0.1));
  try {
    TrialFunction::dyson(d.gp, d.scat, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "cutoff-inside-range");
  }
}

TEST(LocalEnergy, ExactEigenfunctionIsConstant) {
  const auto t = TrialFunction::product(gaussian_state(1.0));
  for (auto x : {std::vector<double>{0.1, 0.2, -0.3}, {1.0, 0.5, 0.0}, {-1.5, 0.2, 0.7}, {0.01, 0.0, 0.0}})
    EXPECT_NEAR(local_energy(config(x), t, harmonic), 3.0, 1e-6);
}

TEST(LocalEnergy, ProductStateIsSumOfSingleParticleTerms) {
  const auto gp = minimize_gp(harmonic, 3.0, 0.5, policy_grid(harmonic, 3, 3.0, 0.5));
  const auto t = TrialFunction::product(gp);
  const std::vector<double> x = {0.3, 0.1, -0.2, -0.8, 0.4, 0.3, 0.05, -1.1, 0.6};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += local_energy(config({x[3 * i], x[3 * i + 1], x[3 * i + 2]}), t, harmonic);
  EXPECT_NEAR(local_energy(config(x), t, harmonic), sum, 1e-9);
}

TEST(LocalEnergy, NoInteractionBeyondCutoffAndRange) {
  const auto d = dilute_pair(2.0, 0.01, PairPotential::soft_sphere(800.0, 0.1));
  const auto dyson = TrialFunction::dyson(d.gp, d.scat, 0.4);
  const auto plain = TrialFunction::product(d.gp);
  const auto cfg = config({0.2, 0.0, 0.1, -0.3, 0.2, 0.1});
  EXPECT_NEAR(local_energy(cfg, dyson, harmonic, d.v), local_energy(cfg, plain, harmonic), 1e-9);
}

TEST(LocalEnergy, HardCoreContactIsNotFinite) {
  const auto d = dilute_pair(2.0, 0.01, PairPotential::hard_core(0.01));
  const auto t = TrialFunction::dyson(d.gp, d.scat, 0.3);
  const auto cfg = config({0.0, 0.0, 0.0, 0.005, 0.0, 0.0});
  EXPECT_EQ(trial_log_psi(cfg, t), -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(std::isfinite(local_energy(cfg, t, harmonic, d.v)));
}

TEST(LocalEnergy, OutsideGridIsRejected) {
  const auto t = TrialFunction::product(gaussian_state(1.0));
  EXPECT_THROW(trial_log_psi(config({8.0, 0.0, 0.0}), t), Error);
}

TEST(BlockAverage, DropsLeadingRemainder) {
  std::vector<double> s = {100.0, 1.0, 2.0, 3.0, 4.0};
  const auto st = block_average(s, 2);
  EXPECT_DOUBLE_EQ(st.mean, 2.5);
  EXPECT_DOUBLE_EQ(st.standard_error, 1.0);
  EXPECT_EQ(st.blocks, 2);
  EXPECT_THROW(block_average(s, 1), Error);
  EXPECT_THROW(block_average(std::vector<double>{1.0}, 2), Error);
}

TEST(Vmc, ExactEigenstateEnergy) {
  const auto t = TrialFunction::product(gaussian_state(5.0));
  VmcOptions opts;
  opts.steps = 40000;
  const auto res = run_vmc(t, harmonic, nullptr, initial_configuration(t, 5, 1), opts);
  EXPECT_GT(res.energy_stderr, 0.0);
  EXPECT_LT(std::abs(res.energy_mean - 15.0), 3.0 * res.energy_stderr + 1e-5);
  EXPECT_GT(res.acceptance_rate, 0.3);
  EXPECT_LT(res.acceptance_rate, 0.7);
  EXPECT_EQ(res.burn_in, 4000);
  EXPECT_EQ(res.n_samples, 36000);
  EXPECT_EQ(res.skipped, 0);
}

TEST(Vmc, DensityMatchesGaussian) {
  for (int N : {1, 5}) {
    const auto t = TrialFunction::product(gaussian_state(N));
    VmcOptions opts;
    opts.steps = 40000;
    opts.n_bins = 16;
    opts.hist_r_max = 3.0;
    opts.seed = 7;
    const auto res = run_vmc(t, harmonic, nullptr, initial_configuration(t, N, 3), opts);
    const auto& h = vmc_density(res);
    ASSERT_EQ(h.density.size(), 16u);
    for (std::size_t k = 0; k < 16; ++k) {
      const double vol = 4.0 * pi / 3.0 * (std::pow(h.edges[k + 1], 3) - std::pow(h.edges[k], 3));
      const double exact = N * (gaussian_mass(h.edges[k + 1]) - gaussian_mass(h.edges[k])) / vol;
      EXPECT_LT(std::abs(h.density[k] - exact), 3.0 * h.standard_error[k] + 1e-12) << N << " bin " << k;
    }
    // Only the sampled fraction inside the histogram range is counted.
    EXPECT_NEAR(h.total(), N * gaussian_mass(3.0), 2e-3 * N);
  }
}

TEST(Vmc, InteractingRunIsReproducibleAndOrderInsensitive) {
  const double a = 0.02;
  const auto base = PairPotential::soft_sphere(800.0, 0.1);
  const auto probe = zero_energy_profile(base, 3, 2.0, 4001);
  const auto v = scale_pair_potential(base, probe.scattering_length, a);
  const auto gp = minimize_gp(harmonic, 4.0, a, policy_grid(harmonic, 3, 4.0, a));
  const auto scat = zero_energy_profile(v, 3, 20.0 * v.range(), 4001);
  EXPECT_NEAR(scat.scattering_length, a, 1e-6 * a);
  const auto t = TrialFunction::dyson_scaled(gp, scat);

  VmcOptions opts;
  opts.steps = 40000;
  const auto cfg = initial_configuration(t, 4, 11);
  const auto r1 = run_vmc(t, harmonic, &v, cfg, opts);
  const auto r2 = run_vmc(t, harmonic, &v, cfg, opts);
  EXPECT_EQ(r1.energy_mean, r2.energy_mean);
  EXPECT_EQ(r1.energy_stderr, r2.energy_stderr);
  EXPECT_NEAR(r1.histogram.total(), 4.0, 0.05);

  // Another seed and a reversed initial labeling sample the same energy.
  Configuration rev = cfg;
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) rev.coords[3 * i + c] = cfg.coords[3 * (3 - i) + c];
  VmcOptions other = opts;
  other.seed = 99;
  const auto r3 = run_vmc(t, harmonic, &v, rev, other);
  const double sigma = std::hypot(r1.energy_stderr, r3.energy_stderr);
  EXPECT_LT(std::abs(r1.energy_mean - r3.energy_mean), 3.0 * sigma);
  EXPECT_GT(r1.energy_mean / gp.energy_total, 0.9);
  EXPECT_LT(r1.energy_mean / gp.energy_total, 1.3);
}

TEST(Vmc, ChainsMergeByInverseVariance) {
  const auto t = TrialFunction::product(minimize_gp(harmonic, 2.0, 1.0, policy_grid(harmonic, 3, 2.0, 1.0)));
  VmcOptions opts;
  opts.steps = 20000;
  opts.chains = 3;
  const auto res = run_vmc(t, harmonic, nullptr, initial_configuration(t, 2, 5), opts);
  ASSERT_EQ(res.chain_means.size(), 3u);
  double w = 0.0, m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double wc = 1.0 / (res.chain_stderrs[c] * res.chain_stderrs[c]);
    w += wc;
    m += wc * res.chain_means[c];
  }
  EXPECT_NEAR(res.energy_mean, m / w, 1e-12 * std::abs(res.energy_mean));
  EXPECT_NEAR(res.energy_stderr, 1.0 / std::sqrt(w), 1e-12 * res.energy_stderr);
  EXPECT_NE(res.chain_means[0], res.chain_means[1]);
}

TEST(Vmc, Preconditions) {
  const auto t = TrialFunction::product(gaussian_state(2.0));
  const auto cfg = initial_configuration(t, 2, 1);
  VmcOptions opts;
  opts.steps = 9999;
  try {
    run_vmc(t, harmonic, nullptr, cfg, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "too-few-steps");
  }
  opts.steps = 20000;
  opts.step_size = 0.0;
  EXPECT_THROW(run_vmc(t, harmonic, nullptr, cfg, opts), Error);
}
