#pragma once

#include <span>
#include <string>
#include <vector>

namespace gptrap {

// Units throughout: hbar = 2m = 1, lengths in trap units.

/// Surface area of the unit sphere in D dimensions (2*pi for D=2, 4*pi for D=3).
double sphere_area(int dim);

// Uniform radial discretization of R^D, nodes r_k = k*h on [0, r_max].
class RadialGrid {
 public:
  int dim() const noexcept { return dim_; }
  double r_max() const noexcept { return r_max_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  double spacing() const noexcept { return h_; }
  double node(int k) const { return nodes_.at(static_cast<std::size_t>(k)); }
  std::span<const double> nodes() const noexcept { return nodes_; }

  /// Quadrature weights w_k such that sum_k w_k f(r_k) approximates
  /// the integral of f(|x|) over the ball of radius r_max.
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  friend RadialGrid build_radial_grid(int dim, double r_max, int n_points);
  int dim_ = 3;
  double r_max_ = 0.0;
  double h_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Throws Error{invalid_argument} with codes invalid-dimension,
/// non-positive-extent or too-few-points.
RadialGrid build_radial_grid(int dim, double r_max, int n_points);

/// 1D composite weights on a uniform grid of n points with spacing h:
/// Simpson for an even interval count, Simpson plus a closing 3/8 panel for an
/// odd count, trapezoid for a single interval.
std::vector<double> simpson_weights(int n, double h);

/// Integral of f(|x|) d^D x = S_D * int f(r) r^{D-1} dr with the grid's
/// composite rule.
double radial_integral(std::span<const double> values, const RadialGrid& grid);

/// Same rule on an arbitrary uniform grid [0, (n-1)h].
double radial_integral(std::span<const double> values, double h, int dim);

// External trap V(x) = c |x|^s, or a tabulated radial profile interpolated
// linearly and extended past the last sample with the last slope.
class TrapPotential {
 public:
  static TrapPotential homogeneous(double order, double coefficient = 1.0);
  static TrapPotential tabulated(std::vector<double> radii, std::vector<double> values);

  double operator()(double r) const;

  bool is_homogeneous() const noexcept { return radii_.empty(); }
  double order() const noexcept { return order_; }
  double coefficient() const noexcept { return coefficient_; }
  std::span<const double> table_radii() const noexcept { return radii_; }
  std::span<const double> table_values() const noexcept { return values_; }

  std::string describe() const;

 private:
  double order_ = 2.0;
  double coefficient_ = 1.0;
  std::vector<double> radii_;
  std::vector<double> values_;
};

/// c * r^s; throws on negative r.
double eval_trap(const TrapPotential& trap, double r);

enum class PairKind { hard_core, soft_sphere, tabulated };

// Nonnegative, finite-range pair interaction v(r).
class PairPotential {
 public:
  static PairPotential hard_core(double r0);
  static PairPotential soft_sphere(double v0, double r0);
  static PairPotential tabulated(std::vector<double> radii, std::vector<double> values);

  PairKind kind() const noexcept { return kind_; }

  /// v(r); +infinity inside a hard core, zero beyond the range.
  double operator()(double r) const;

  /// Radius beyond which v vanishes identically.
  double range() const noexcept { return range_; }

  double core_radius() const noexcept { return kind_ == PairKind::hard_core ? range_ : 0.0; }
  double height() const noexcept { return height_; }
  std::span<const double> table_radii() const noexcept { return radii_; }
  std::span<const double> table_values() const noexcept { return values_; }

  std::string describe() const;

 private:
  PairKind kind_ = PairKind::hard_core;
  double range_ = 0.0;
  double height_ = 0.0;
  std::vector<double> radii_;
  std::vector<double> values_;
};

/// Parses "hard_core:r0=0.1", "soft_sphere:v0=100,r0=0.2" or
/// "tabulated:r=0;0.1;0.2,v=5;2;0".
PairPotential parse_pair_potential(const std::string& text);

}  // namespace gptrap
