#include "gptrap/spline.hpp"

#include <algorithm>
#include <cmath>

#include "gptrap/error.hpp"

namespace gptrap {

CubicSpline::CubicSpline(double x0, double h, std::vector<double> values, std::optional<double> left_slope,
                         std::optional<double> right_slope)
    : x0_(x0), h_(h), y_(std::move(values)) {
  const std::size_t n = y_.size();
  if (n < 4) throw_invalid("too-few-points", "spline", "spline needs at least four nodes");
  if (!(h > 0.0)) throw_invalid("non-positive-extent", "spline", "spline spacing must be positive");

  const double s0 = left_slope.value_or((-3.0 * y_[0] + 4.0 * y_[1] - y_[2]) / (2.0 * h));
  const double s1 = right_slope.value_or((3.0 * y_[n - 1] - 4.0 * y_[n - 2] + y_[n - 3]) / (2.0 * h));

  // Tridiagonal system for the nodal second derivatives (clamped ends).
  std::vector<double> a(n, h / 6.0), b(n, 2.0 * h / 3.0), c(n, h / 6.0), d(n);
  b[0] = h / 3.0;
  c[0] = h / 6.0;
  d[0] = (y_[1] - y_[0]) / h - s0;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y_[k + 1] - 2.0 * y_[k] + y_[k - 1]) / h;
  a[n - 1] = h / 6.0;
  b[n - 1] = h / 3.0;
  d[n - 1] = s1 - (y_[n - 1] - y_[n - 2]) / h;

  for (std::size_t k = 1; k < n; ++k) {
    const double w = a[k] / b[k - 1];
    b[k] -= w * c[k - 1];
    d[k] -= w * d[k - 1];
  }
  m_.assign(n, 0.0);
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) m_[k] = (d[k] - c[k] * m_[k + 1]) / b[k];
}

std::size_t CubicSpline::segment(double x) const {
  const double t = (x - x0_) / h_;
  const auto last = static_cast<double>(y_.size() - 2);
  return static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, last));
}

double CubicSpline::operator()(double x) const {
  const std::size_t k = segment(x);
  const double xl = x0_ + h_ * static_cast<double>(k);
  const double A = (xl + h_ - x) / h_;
  const double B = 1.0 - A;
  return A * y_[k] + B * y_[k + 1] + ((A * A * A - A) * m_[k] + (B * B * B - B) * m_[k + 1]) * h_ * h_ / 6.0;
}

double CubicSpline::derivative(double x) const {
  const std::size_t k = segment(x);
  const double xl = x0_ + h_ * static_cast<double>(k);
  const double A = (xl + h_ - x) / h_;
  const double B = 1.0 - A;
  return (y_[k + 1] - y_[k]) / h_ + (-(3.0 * A * A - 1.0) * m_[k] + (3.0 * B * B - 1.0) * m_[k + 1]) * h_ / 6.0;
}

}  // namespace gptrap
