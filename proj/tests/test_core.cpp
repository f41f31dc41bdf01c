#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "gptrap/core.hpp"
#include "gptrap/error.hpp"

using namespace gptrap;

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
std::vector<double> sample(const RadialGrid& grid, F f) {
  std::vector<double> out;
  for (double r : grid.nodes()) out.push_back(f(r));
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::io;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(RadialGrid, UniformNodes) {
  const auto grid = build_radial_grid(3, 8.0, 801);
  EXPECT_NEAR(grid.spacing(), 0.01, 1e-15);
  EXPECT_NEAR(grid.node(400), 4.0, 1e-13);
  EXPECT_EQ(grid.node(0), 0.0);
  EXPECT_EQ(grid.node(800), 8.0);
  for (int k = 1; k < grid.size(); ++k) EXPECT_GT(grid.node(k), grid.node(k - 1));
}

TEST(RadialGrid, Preconditions) {
  EXPECT_EQ(code_of([] { build_radial_grid(2, 10.0, 2); }), "too-few-points");
  EXPECT_EQ(code_of([] { build_radial_grid(4, 8.0, 801); }), "invalid-dimension");
  EXPECT_EQ(code_of([] { build_radial_grid(3, -1.0, 801); }), "non-positive-extent");
  EXPECT_EQ(kind_of([] { build_radial_grid(3, 0.0, 801); }), ErrorKind::invalid_argument);
}

TEST(RadialIntegral, BallVolumes) {
  const auto ball = build_radial_grid(3, 1.0, 101);
  EXPECT_NEAR(radial_integral(std::vector<double>(101, 1.0), ball), 4.0 * pi / 3.0, 1e-13);
  const auto disk = build_radial_grid(2, 2.0, 101);
  EXPECT_NEAR(radial_integral(std::vector<double>(101, 1.0), disk), 4.0 * pi, 1e-12);
  // Odd interval count exercises the closing 3/8 panel.
  const auto odd = build_radial_grid(3, 1.0, 100);
  EXPECT_NEAR(radial_integral(std::vector<double>(100, 1.0), odd), 4.0 * pi / 3.0, 1e-13);
}

TEST(RadialIntegral, GaussianOracle) {
  const auto grid = build_radial_grid(3, 8.0, 801);
  const auto f = sample(grid, [](double r) { return std::exp(-r * r); });
  EXPECT_NEAR(radial_integral(f, grid), std::pow(pi, 1.5), 1e-8);
  const auto grid2 = build_radial_grid(2, 8.0, 801);
  EXPECT_NEAR(radial_integral(sample(grid2, [](double r) { return std::exp(-r * r); }), grid2), pi, 1e-8);
}

TEST(RadialIntegral, LengthMismatch) {
  const auto grid = build_radial_grid(3, 1.0, 101);
  EXPECT_EQ(code_of([&] { radial_integral(std::vector<double>(100, 1.0), grid); }), "length-mismatch");
}

TEST(RadialIntegral, Linear) {
  const auto grid = build_radial_grid(3, 5.0, 501);
  const auto f = sample(grid, [](double r) { return std::exp(-r) * std::cos(3 * r); });
  const auto g = sample(grid, [](double r) { return 1.0 / (1.0 + r * r); });
  for (double alpha : {-2.5, 0.3, 7.0}) {
    std::vector<double> h(f.size());
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = alpha * f[k] + g[k];
    const double lhs = radial_integral(h, grid);
    const double rhs = alpha * radial_integral(f, grid) + radial_integral(g, grid);
    EXPECT_NEAR(lhs, rhs, 1e-14 * (std::abs(lhs) + 1.0));
  }
}

TEST(RadialIntegral, ConvergenceOrder) {
  // f = 1 is integrated exactly. e^{-r} has odd derivatives at the origin, so
  // the composite rule shows its algebraic order instead of spectral accuracy.
  for (int dim : {2, 3}) {
    // S_D * int_0^6 r^{D-1} e^{-r} dr = S_D (D-1)! [1 - e^{-6} sum_{k<D} 6^k/k!].
    const double partial = dim == 3 ? 1.0 + 6.0 + 18.0 : 1.0 + 6.0;
    const double exact = sphere_area(dim) * (dim == 3 ? 2.0 : 1.0) * (1.0 - std::exp(-6.0) * partial);
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
      const auto grid = build_radial_grid(dim, 6.0, n);
      const double err = std::abs(radial_integral(sample(grid, [](double r) { return std::exp(-r); }), grid) - exact);
      const double ball = radial_integral(std::vector<double>(static_cast<std::size_t>(n), 1.0), grid);
      EXPECT_NEAR(ball, sphere_area(dim) / dim * std::pow(6.0, dim), 1e-11);
      if (prev > 0.0) { EXPECT_GT(std::log2(prev / err), 2.0) << "dim " << dim << " n " << n; }
      prev = err;
    }
  }
}

TEST(SimpsonWeights, SumToLength) {
  for (int n : {2, 3, 4, 17, 100, 101}) {
    const auto w = simpson_weights(n, 0.25);
    double s = 0.0;
    for (double x : w) s += x;
    EXPECT_NEAR(s, 0.25 * (n - 1), 1e-14) << n;
  }
}

TEST(Trap, Examples) {
  const auto h = TrapPotential::homogeneous(2.0, 1.0);
  EXPECT_EQ(eval_trap(h, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_trap(h, 3.0), 9.0);
  EXPECT_DOUBLE_EQ(eval_trap(TrapPotential::homogeneous(4.0, 0.5), 2.0), 8.0);
  EXPECT_EQ(code_of([&] { eval_trap(h, -1.0); }), "negative-radius");
}

TEST(Trap, Homogeneity) {
  for (double s : {1.0, 2.0, 3.5}) {
    const auto v = TrapPotential::homogeneous(s, 0.7);
    for (double r : {0.3, 1.0, 4.2})
      for (double lambda : {0.5, 2.0, 10.0}) {
        const double lhs = eval_trap(v, lambda * r);
        const double rhs = std::pow(lambda, s) * eval_trap(v, r);
        EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
      }
  }
}

TEST(Trap, InvalidParameters) {
  EXPECT_EQ(kind_of([] { TrapPotential::homogeneous(0.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { TrapPotential::homogeneous(2.0, -1.0); }), ErrorKind::invalid_argument);
}

TEST(Trap, TabulatedInterpolatesAndExtends) {
  const auto t = TrapPotential::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
  EXPECT_FALSE(t.is_homogeneous());
  EXPECT_DOUBLE_EQ(t(0.5), 0.5);
  EXPECT_DOUBLE_EQ(t(1.5), 2.5);
  EXPECT_DOUBLE_EQ(t(3.0), 7.0);  // last slope continued
  EXPECT_EQ(kind_of([] { TrapPotential::tabulated({0.5, 1.0}, {0.0, 1.0}); }), ErrorKind::invalid_argument);
}

TEST(PairPotential, NonnegativeFiniteRange) {
  const auto hc = PairPotential::hard_core(0.1);
  const auto ss = PairPotential::soft_sphere(100.0, 0.2);
  const auto tb = PairPotential::tabulated({0.0, 0.1, 0.3}, {5.0, 2.0, 0.0});
  EXPECT_TRUE(std::isinf(hc(0.05)));
  EXPECT_EQ(hc(0.2), 0.0);
  EXPECT_EQ(hc.core_radius(), 0.1);
  for (double r = 0.0; r < 1.0; r += 0.01) {
    EXPECT_GE(ss(r), 0.0);
    EXPECT_GE(tb(r), 0.0);
    if (r > 0.2) { EXPECT_EQ(ss(r), 0.0); }
    if (r > 0.3) { EXPECT_EQ(tb(r), 0.0); }
  }
  EXPECT_DOUBLE_EQ(tb(0.05), 3.5);
  EXPECT_EQ(ss.range(), 0.2);
  EXPECT_EQ(tb.range(), 0.3);
  EXPECT_EQ(kind_of([] { PairPotential::soft_sphere(-1.0, 0.2); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { PairPotential::tabulated({0.0, 0.1}, {1.0, -1.0}); }), ErrorKind::invalid_argument);
}

TEST(PairPotential, Parse) {
  const auto hc = parse_pair_potential("hard_core:r0=0.1");
  EXPECT_EQ(hc.kind(), PairKind::hard_core);
  EXPECT_EQ(hc.range(), 0.1);
  const auto ss = parse_pair_potential("soft_sphere:v0=100,r0=0.2");
  EXPECT_EQ(ss.kind(), PairKind::soft_sphere);
  EXPECT_EQ(ss.height(), 100.0);
  const auto tb = parse_pair_potential("tabulated:r=0;0.1;0.2,v=5;2;0");
  EXPECT_EQ(tb.kind(), PairKind::tabulated);
  EXPECT_EQ(tb.range(), 0.2);
  // describe() round-trips through the parser.
  for (const auto& v : {hc, ss, tb}) EXPECT_EQ(parse_pair_potential(v.describe()).describe(), v.describe());
  EXPECT_EQ(kind_of([] { parse_pair_potential("square:r0=1"); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { parse_pair_potential("soft_sphere:v0=1"); }), ErrorKind::invalid_argument);
}
