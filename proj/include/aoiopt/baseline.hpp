#pragma once

#include <cstddef>
#include <vector>

#include "aoiopt/lagrangian.hpp"

namespace aoiopt {

struct DirectSolverConfig {
  std::size_t iters = 2000;
  double lr_primal = 0.05;
  double lr_dual = 0.1;
  C1Form c1_form = C1Form::kRateFloor;
  double feasibility_tol = 1e-3;  // residuals at or below this tie when picking the best iterate
};

struct DirectSolution {
  Decision decision;           // best iterate by (max residual above tolerance, AoI)
  Multipliers multipliers;     // final multipliers
  std::vector<double> trace;   // Lagrangian at each iterate, before its update
  double aoi = 0.0;            // total expected AoI of `decision`
  double max_residual = 0.0;   // worst residual of `decision`
};

/// UAVs at the area center and p = 0.5 everywhere.
Decision default_initial_decision(const Scenario& sc);

/// Network-free primal-dual descent on one instance.
///
/// The unknowns are unconstrained raw values mapped through the policy heads:
/// x = x_max * relu(r) / (1 + relu(r)) and p = sigmoid(z). Each iteration takes a
/// gradient step on (r, z) and then raises mu by lr_dual times the residuals.
DirectSolution solve_direct(const Scenario& sc, const FadingDraw& draw, const Decision& init,
                            const DirectSolverConfig& cfg, const Multipliers* mu_init = nullptr);

}  // namespace aoiopt
