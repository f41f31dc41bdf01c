#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gptrap {

// Clamped cubic spline on a uniform grid x_k = x0 + k*h. End slopes are
// taken from the caller or, when absent, from the three-point one-sided
// difference, so quadratic data is reproduced exactly. The interpolant is
// C2, which keeps finite-difference Laplacians of it free of spikes.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(double x0, double h, std::vector<double> values,
              std::optional<double> left_slope = std::nullopt,
              std::optional<double> right_slope = std::nullopt);

  double operator()(double x) const;
  double derivative(double x) const;

  double x_min() const noexcept { return x0_; }
  double x_max() const noexcept { return x0_ + h_ * static_cast<double>(y_.size() - 1); }
  bool empty() const noexcept { return y_.empty(); }

 private:
  std::size_t segment(double x) const;

  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
};

}  // namespace gptrap
