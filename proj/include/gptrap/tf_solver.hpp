#pragma once

#include <optional>
#include <vector>

#include "gptrap/core.hpp"

namespace gptrap {

// Thomas-Fermi minimizer rho(r) = [mu - V(r)]_+ / (8 pi g) normalized to N.
struct TfState {
  TrapPotential trap = TrapPotential::homogeneous(2.0);
  int dim = 3;
  double N = 1.0;
  double g = 1.0;
  double chemical_potential = 0.0;
  double support_radius = 0.0;
  double energy = 0.0;
  // Closed-form mu for homogeneous traps, kept as a cross-check of the root finder.
  std::optional<double> chemical_potential_closed_form;
  int bisection_iterations = 0;

  double density(double r) const;
  /// (1/N) * int rho^2, the TF analogue of the mean GP density.
  double mean_density() const;
};

/// Bisection on mu -> int [mu - V]_+/(8 pi g) - N with support-aligned
/// quadrature; energy int (V rho + 4 pi g rho^2) by the same rule.
TfState solve_tf(const TrapPotential& trap, double N, double g, int dim);

/// Unit-normalized minimizer with g = 1 for the trap W.
TfState rescaled_tf_profile(const TrapPotential& w, int dim);

/// mu^TF for V = c r^s from the analytic normalization integral.
double tf_chemical_potential_closed_form(double order, double coefficient, int dim, double Ng);

/// E^TF for V = c r^s from the analytic energy integral.
double tf_energy_closed_form(double order, double coefficient, int dim, double N, double g);

/// Nodes used for support-aligned Simpson quadrature.
inline constexpr int tf_quadrature_intervals = 4000;

}  // namespace gptrap
