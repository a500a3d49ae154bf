#include "aoiopt/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

// Inverse of x = side * r / (1 + r) on [0, side); r = 0 for x <= 0.
double position_to_raw(double x, double side) {
  const double s = std::clamp(x / side, 0.0, 1.0 - 1e-12);
  return s / (1.0 - s);
}

double prob_to_logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

Mat row_of(std::span<const double> v) {
  Mat m(1, static_cast<Index>(v.size()));
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

}  // namespace

Decision default_initial_decision(const Scenario& sc) {
  return {UavPath::constant(sc.num_uavs, sc.horizon, sc.area_x / 2.0, sc.area_y / 2.0),
          SelectionProbs::constant(sc.num_devices, sc.num_uavs, sc.horizon, 0.5)};
}

DirectSolution solve_direct(const Scenario& sc, const FadingDraw& draw, const Decision& init,
                            const DirectSolverConfig& cfg, const Multipliers* mu_init) {
  if (cfg.iters < 1) throw ArgumentError("iters must be >= 1");
  init.check_shape(sc);
  const LagrangianGraph graph(sc, cfg.c1_form);

  Mat raw_x = row_of(init.path.xs.flat()).unaryExpr([&](double x) { return position_to_raw(x, sc.area_x); });
  Mat raw_y = row_of(init.path.ys.flat()).unaryExpr([&](double y) { return position_to_raw(y, sc.area_y); });
  Mat logits = row_of(init.probs.p.flat()).unaryExpr([](double p) { return prob_to_logit(p); });

  DirectSolution sol;
  sol.multipliers = mu_init ? *mu_init : Multipliers::filled(sc, 0.0);
  sol.multipliers.check_shape(sc);
  sol.trace.reserve(cfg.iters);
  bool have_best = false;
  const FadingDraw* draws[] = {&draw};

  for (std::size_t it = 0; it < cfg.iters; ++it) {
    Tape tape;
    const Var rx = tape.leaf(raw_x);
    const Var ry = tape.leaf(raw_y);
    const Var z = tape.leaf(logits);
    auto head = [&](Var r, double side) {
      const Var a = tape.relu(r);
      return (a / (a + 1.0)) * side;
    };
    const Var xs = head(rx, sc.area_x);
    const Var ys = head(ry, sc.area_y);
    const Var p = tape.sigmoid(z);
    const auto nodes = graph.build(tape, draws, xs, ys, p, sol.multipliers);
    const double value = nodes.loss.scalar();
    if (!std::isfinite(value)) throw SolverError("non-finite Lagrangian", it);
    sol.trace.push_back(value);

    // Keep the best iterate: smallest worst-case residual, then smallest AoI. Residuals
    // up to the feasibility tolerance count as equal.
    double worst = 0.0;
    for (const auto& c : nodes.residuals) worst = std::max(worst, c.value().maxCoeff());
    const double aoi = nodes.aoi.scalar();
    const double key = std::max(worst, cfg.feasibility_tol);
    const double best_key = std::max(sol.max_residual, cfg.feasibility_tol);
    if (!have_best || key < best_key || (key == best_key && aoi < sol.aoi)) {
      have_best = true;
      sol.max_residual = worst;
      sol.aoi = aoi;
      sol.decision = init;
      std::copy_n(xs.value().data(), xs.cols(), sol.decision.path.xs.flat().begin());
      std::copy_n(ys.value().data(), ys.cols(), sol.decision.path.ys.flat().begin());
      std::copy_n(p.value().data(), p.cols(), sol.decision.probs.p.flat().begin());
    }

    tape.backward(nodes.loss);
    raw_x -= cfg.lr_primal * rx.grad();
    raw_y -= cfg.lr_primal * ry.grad();
    logits -= cfg.lr_primal * z.grad();
    for (std::size_t j = 0; j < kNumFamilies; ++j) {
      const Mat& c = nodes.residuals[j].value();
      auto& m = sol.multipliers.mu[j];
      for (std::size_t k = 0; k < m.size(); ++k) {
        m[k] = std::max(0.0, m[k] + cfg.lr_dual * c(0, static_cast<Index>(k)));
      }
    }
  }
  return sol;
}

}  // namespace aoiopt
