#pragma once

#include <cstddef>
#include <span>

#include "aoiopt/lagrangian.hpp"
#include "aoiopt/mlp.hpp"

namespace aoiopt {

/// Analytic vs central-difference comparison. Entries whose magnitude is below
/// `small` on both sides are compared by absolute error, the rest by relative error.
struct GradComparison {
  double rel_tol = 1e-5;
  double abs_tol = 1e-6;
  double small = 1e-8;
  double worst_rel = 0.0;
  double worst_abs = 0.0;
  std::size_t compared = 0;
  std::size_t failures = 0;

  void add(double analytic, double numeric);
  bool passed() const { return failures == 0; }
};

/// Central differences of the Lagrangian, evaluated in extended precision, over every
/// x, y, and p entry.
GradComparison check_decision_gradient(const Scenario& sc, const FadingDraw& draw,
                                       const Decision& d, const Multipliers& mu, C1Form form,
                                       double step = 1e-5);

/// Central differences of the batch-mean Lagrangian (extended-precision forward pass) over every
/// network parameter.
GradComparison check_weight_gradient(const Mlp& mlp, const Scenario& sc,
                                     std::span<const FadingDraw* const> draws,
                                     const Multipliers& mu, C1Form form, double step = 1e-5);

/// Smallest distance of any ReLU/sqrt argument on the decision path from its kink.
double decision_kink_margin(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                            C1Form form);
/// Same, including hidden-layer pre-activations and the position-head inputs.
double network_kink_margin(const Mlp& mlp, const Scenario& sc,
                           std::span<const FadingDraw* const> draws, C1Form form);

}  // namespace aoiopt
