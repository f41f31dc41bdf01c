#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gptrap/asymptotics.hpp"
#include "gptrap/core.hpp"
#include "gptrap/error.hpp"
#include "gptrap/gp_solver.hpp"
#include "gptrap/tf_solver.hpp"

using namespace gptrap;

namespace {

const TrapPotential harmonic = TrapPotential::homogeneous(2.0);

}  // namespace

TEST(ScalingCheck, IdentityHolds) {
  for (auto [N, g] : {std::pair{10.0, 0.1}, {100.0, 1.0}}) {
    const auto grid = policy_grid(harmonic, 3, N, g);
    EXPECT_LT(scaling_check(N, g, harmonic, grid), 1e-6);
    EXPECT_LT(scaling_profile_deviation(N, g, harmonic, grid), 1e-6);
  }
  const auto grid = policy_grid(harmonic, 3, 1.0, 7.0);
  EXPECT_EQ(scaling_check(1.0, 7.0, harmonic, grid), 0.0);
}

TEST(Sweep, ThreeDimensionalRatioDecreasesTowardOne) {
  const std::vector<double> Ng = {10.0, 100.0, 1000.0, 10000.0};
  const auto rec = gp_tf_sweep(harmonic, 3, Ng);
  ASSERT_EQ(rec.size(), 4u);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_EQ(rec[k].parameter, Ng[k]);
    EXPECT_GT(rec[k].ratio, 1.0);
    EXPECT_LE(rec[k].E_tf, rec[k].E_gp);
    EXPECT_DOUBLE_EQ(rec[k].ratio, rec[k].E_gp / rec[k].E_tf);
    // TF energy against the closed form.
    EXPECT_NEAR(rec[k].E_tf / tf_energy_closed_form(2.0, 1.0, 3, 1.0, Ng[k]), 1.0, 1e-10);
    EXPECT_EQ(rec[k].n_points % 2, 1);
  }
  const auto sum = summarize_sweep(rec);
  EXPECT_TRUE(sum.ratio_strictly_decreasing);
  EXPECT_TRUE(sum.ratio_above_one);
  EXPECT_TRUE(sum.tf_below_gp);
  // Baseline measured on this grid policy: ratio - 1 = 1.24e-3 at Ng = 1e4.
  EXPECT_LT(sum.final_excess, 0.1);
  EXPECT_NEAR(sum.final_excess, 1.24e-3, 0.05e-3);
  EXPECT_LT(sum.empirical_rate, 0.0);
}

TEST(Sweep, TwoDimensionalSameTrend) {
  const std::vector<double> Ng = {10.0, 100.0, 1000.0, 10000.0};
  const auto sum = summarize_sweep(gp_tf_sweep(harmonic, 2, Ng));
  EXPECT_TRUE(sum.ratio_strictly_decreasing);
  EXPECT_TRUE(sum.ratio_above_one);
  EXPECT_TRUE(sum.tf_below_gp);
}

TEST(Sweep, ManyParticlesAndInputOrder) {
  const std::vector<double> Ng = {5.0, 50.0};
  const auto rec = gp_tf_sweep(harmonic, 3, Ng, 10.0);
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0].N, 10.0);
  EXPECT_DOUBLE_EQ(rec[1].g, 5.0);
  const auto single = gp_tf_sweep(harmonic, 3, Ng);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(rec[k].E_gp / (10.0 * single[k].E_gp), 1.0, 1e-6);
}

TEST(Sweep, RejectsNonIncreasingList) {
  const std::vector<double> Ng = {100.0, 10.0};
  EXPECT_THROW(gp_tf_sweep(harmonic, 3, Ng), Error);
}

TEST(Collapse, ThomasFermiRescalingIsExact) {
  const std::vector<double> gammas = {1.0, 1e2, 1e4};
  for (double s : {2.0, 4.0})
    for (int dim : {2, 3})
      for (double dev : tf_collapse_check(TrapPotential::homogeneous(s), dim, gammas, CollapseSource::thomas_fermi))
        EXPECT_LT(dev, 1e-9) << s << " " << dim;
  const std::vector<double> one = {1.0};
  EXPECT_LT(tf_collapse_check(harmonic, 3, one, CollapseSource::thomas_fermi)[0], 1e-12);
}

TEST(Collapse, GrossPitaevskiiApproachesProfile) {
  const std::vector<double> gammas = {1e2, 1e3, 1e4};
  const auto dev = tf_collapse_check(harmonic, 3, gammas, CollapseSource::gross_pitaevskii);
  ASSERT_EQ(dev.size(), 3u);
  EXPECT_GT(dev[0], dev[1]);
  EXPECT_GT(dev[1], dev[2]);
}

TEST(Diluteness, GpCaseScaling) {
  const std::vector<double> Ns = {1e2, 1e3, 1e4};
  const auto rec = diluteness_sweep(harmonic, 10.0, Ns);
  ASSERT_EQ(rec.size(), 3u);
  for (const auto& r : rec) {
    EXPECT_DOUBLE_EQ(r.a, 10.0 / r.N);
    EXPECT_NEAR(r.scaled, r.a * r.a * r.a * r.rho_bar * r.N * r.N, 1e-12 * r.scaled);
  }
  EXPECT_NEAR(rec.back().scaled / rec.front().scaled, 1.0, 0.2);
}

TEST(GridPolicy, RefinementChangeIsSmall) {
  EXPECT_LT(grid_refinement_change(harmonic, 3, 1e4), 1e-5);
  EXPECT_LT(grid_refinement_change(harmonic, 2, 1e4), 1e-5);
}
