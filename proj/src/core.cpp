#include "gptrap/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gptrap/error.hpp"

namespace gptrap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "validation";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::grid_too_small: return "grid-too-small";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

double sphere_area(int dim) {
  switch (dim) {
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3, got " + std::to_string(dim));
  }
}

std::vector<double> simpson_weights(int n, double h) {
  if (n < 2) throw_invalid("too-few-points", "n_points", "quadrature needs at least two nodes");
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  const int intervals = n - 1;
  if (intervals == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const int simpson_intervals = intervals % 2 == 0 ? intervals : intervals - 3;
  for (int i = 0; i < simpson_intervals; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (simpson_intervals != intervals) {
    const int s = simpson_intervals;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

namespace {

std::vector<double> radial_weights(int n, double h, int dim) {
  auto w = simpson_weights(n, h);
  const double area = sphere_area(dim);
  for (int k = 0; k < n; ++k) {
    const double r = k * h;
    w[k] *= area * std::pow(r, dim - 1);
  }
  return w;
}

}  // namespace

RadialGrid build_radial_grid(int dim, double r_max, int n_points) {
  if (dim != 2 && dim != 3)
    throw_invalid("invalid-dimension", "dim", "dimension must be 2 or 3, got " + std::to_string(dim));
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw_invalid("non-positive-extent", "r_max", "grid extent must be positive and finite");
  if (n_points < 16)
    throw_invalid("too-few-points", "n_points", "radial grid needs at least 16 points, got " + std::to_string(n_points));

  RadialGrid grid;
  grid.dim_ = dim;
  grid.r_max_ = r_max;
  grid.h_ = r_max / (n_points - 1);
  grid.nodes_.resize(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) grid.nodes_[k] = k * grid.h_;
  grid.nodes_.back() = r_max;
  grid.weights_ = radial_weights(n_points, grid.h_, dim);
  return grid;
}

double radial_integral(std::span<const double> values, const RadialGrid& grid) {
  if (values.size() != grid.nodes().size())
    throw_invalid("length-mismatch", "values", "profile length does not match the grid");
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += w[k] * values[k];
  return sum;
}

double radial_integral(std::span<const double> values, double h, int dim) {
  const int n = static_cast<int>(values.size());
  const auto w = radial_weights(n, h, dim);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += w[k] * values[k];
  return sum;
}

// --- trap ---------------------------------------------------------------

TrapPotential TrapPotential::homogeneous(double order, double coefficient) {
  if (!(order > 0.0) || !std::isfinite(order)) throw_invalid("non-positive-order", "s", "trap order s must be positive");
  if (!(coefficient > 0.0) || !std::isfinite(coefficient))
    throw_invalid("non-positive-coefficient", "c", "trap coefficient c must be positive");
  TrapPotential trap;
  trap.order_ = order;
  trap.coefficient_ = coefficient;
  return trap;
}

TrapPotential TrapPotential::tabulated(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() < 2 || radii.size() != values.size())
    throw_invalid("bad-table", "trap", "tabulated trap needs at least two (r, V) samples of equal length");
  if (radii.front() != 0.0) throw_invalid("bad-table", "trap", "tabulated trap must start at r = 0");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw_invalid("bad-table", "trap", "tabulated radii must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw_invalid("bad-table", "trap", "tabulated trap values must be finite and >= 0");
  const std::size_t m = radii.size();
  if (!(values[m - 1] > values[m - 2]))
    throw_invalid("bad-table", "trap", "last tabulated segment must be increasing so V grows without bound");
  TrapPotential trap;
  trap.order_ = 0.0;
  trap.coefficient_ = 0.0;
  trap.radii_ = std::move(radii);
  trap.values_ = std::move(values);
  return trap;
}

double TrapPotential::operator()(double r) const {
  if (is_homogeneous()) return coefficient_ * std::pow(r, order_);
  const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
  std::size_t i = it == radii_.begin() ? 0 : static_cast<std::size_t>(it - radii_.begin()) - 1;
  i = std::min(i, radii_.size() - 2);
  const double t = (r - radii_[i]) / (radii_[i + 1] - radii_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

std::string TrapPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_homogeneous())
    os << "homogeneous:s=" << order_ << ",c=" << coefficient_;
  else
    os << "tabulated:" << radii_.size() << " samples";
  return os.str();
}

double eval_trap(const TrapPotential& trap, double r) {
  if (!(r >= 0.0)) throw_invalid("negative-radius", "r", "trap evaluated at negative radius");
  return trap(r);
}

// --- pair potentials ----------------------------------------------------

PairPotential PairPotential::hard_core(double r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw_invalid("non-positive-length", "r0", "hard-core radius must be positive");
  PairPotential v;
  v.kind_ = PairKind::hard_core;
  v.range_ = r0;
  return v;
}

PairPotential PairPotential::soft_sphere(double v0, double r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw_invalid("non-positive-length", "r0", "soft-sphere radius must be positive");
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw_invalid("negative-potential", "v0", "soft-sphere height must be >= 0");
  PairPotential v;
  v.kind_ = PairKind::soft_sphere;
  v.range_ = r0;
  v.height_ = v0;
  return v;
}

PairPotential PairPotential::tabulated(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() < 2 || radii.size() != values.size())
    throw_invalid("bad-table", "potential", "tabulated potential needs at least two (r, v) samples of equal length");
  if (radii.front() != 0.0) throw_invalid("bad-table", "potential", "tabulated potential must start at r = 0");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw_invalid("bad-table", "potential", "tabulated radii must be strictly increasing");
  for (double x : values)
    if (!(x >= 0.0) || !std::isfinite(x)) throw_invalid("negative-potential", "potential", "pair potential must be finite and >= 0");
  PairPotential v;
  v.kind_ = PairKind::tabulated;
  v.range_ = radii.back();
  v.height_ = *std::max_element(values.begin(), values.end());
  v.radii_ = std::move(radii);
  v.values_ = std::move(values);
  return v;
}

double PairPotential::operator()(double r) const {
  switch (kind_) {
    case PairKind::hard_core:
      return r < range_ ? std::numeric_limits<double>::infinity() : 0.0;
    case PairKind::soft_sphere:
      return r < range_ ? height_ : 0.0;
    case PairKind::tabulated: {
      if (r >= range_) return 0.0;
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      const double t = (r - radii_[i]) / (radii_[i + 1] - radii_[i]);
      return values_[i] + t * (values_[i + 1] - values_[i]);
    }
  }
  return 0.0;
}

std::string PairPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case PairKind::hard_core: os << "hard_core:r0=" << range_; break;
    case PairKind::soft_sphere: os << "soft_sphere:v0=" << height_ << ",r0=" << range_; break;
    case PairKind::tabulated: {
      os << "tabulated:r=";
      for (std::size_t i = 0; i < radii_.size(); ++i) os << (i ? ";" : "") << radii_[i];
      os << ",v=";
      for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? ";" : "") << values_[i];
      break;
    }
  }
  return os.str();
}

namespace {

double parse_number(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw_invalid("bad-number", key, "cannot parse '" + s + "' as a number");
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_number(item, key));
  return out;
}

}  // namespace

PairPotential parse_pair_potential(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<std::pair<std::string, std::string>> fields;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw_invalid("bad-potential", "potential", "expected key=value in '" + item + "'");
      fields.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
  }
  auto take = [&](const std::string& name) -> std::string {
    for (auto& [k, v] : fields)
      if (k == name) return v;
    throw_invalid("bad-potential", "potential", "potential '" + kind + "' needs field '" + name + "'");
  };
  auto check_fields = [&](std::initializer_list<const char*> allowed) {
    for (auto& [k, v] : fields) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw_invalid("bad-potential", "potential", "unknown potential field '" + k + "'");
    }
  };
  if (kind == "hard_core") {
    check_fields({"r0"});
    return PairPotential::hard_core(parse_number(take("r0"), "potential"));
  }
  if (kind == "soft_sphere") {
    check_fields({"v0", "r0"});
    return PairPotential::soft_sphere(parse_number(take("v0"), "potential"), parse_number(take("r0"), "potential"));
  }
  if (kind == "tabulated") {
    check_fields({"r", "v"});
    return PairPotential::tabulated(parse_list(take("r"), "potential"), parse_list(take("v"), "potential"));
  }
  throw_invalid("bad-potential", "potential", "unknown potential kind '" + kind + "'");
}

}  // namespace gptrap
