#include "aoiopt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

using Real = long double;

// Extended-precision evaluation of the Lagrangian. Central differences at step 1e-5
// lose about eps * |L| / step to cancellation, which in double is close to 1e-9 and
// would swamp gradients of order 1e-4.
Real hinge(Real v) { return v > 0 ? v : 0; }

Real lagrangian_ext(const Scenario& sc, const FadingDraw& draw, std::span<const Real> xs,
                    std::span<const Real> ys, std::span<const Real> p, const Multipliers& mu,
                    C1Form form) {
  const std::size_t ni = sc.num_devices, nu = sc.num_uavs, nt = sc.horizon;
  auto ip = [&](std::size_t i, std::size_t u, std::size_t t) { return (i * nu + u) * nt + t; };
  Real total = 0;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      Real age = 0;
      for (std::size_t t = 1; t < nt; ++t) {
        age = (1 - p[ip(i, u, t)]) * (age + 1);
        total += age;
      }
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t k = ip(i, u, t);
        const Real dx = xs[u * nt + t] - sc.device_pos[i].x;
        const Real dy = ys[u * nt + t] - sc.device_pos[i].y;
        const Real h = sc.uav_alt[u];
        const Real snr = static_cast<Real>(sc.tx_power[i]) * draw.gain_sq(i, u, t) /
                         (static_cast<Real>(sc.noise_var) * (dx * dx + dy * dy + h * h));
        const Real r = sc.bandwidth(i, u) * std::log2(1 + snr);
        const Real c1 = form == C1Form::kRateFloor ? hinge(p[k] * sc.rate_min - r)
                                                   : hinge(sc.rate_min - p[k] * r);
        total += mu.mu[kRate][k] * c1 + mu.mu[kProbBound][k] * hinge(p[k] - 1);
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      Real s = 0;
      for (std::size_t u = 0; u < nu; ++u) s += p[ip(i, u, t)];
      total += mu.mu[kAssociation][i * nt + t] * hinge(s - 1);
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    Real travel = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t k = u * nt + t;
      Real s = 0;
      for (std::size_t i = 0; i < ni; ++i) s += p[ip(i, u, t)];
      total += mu.mu[kCapacity][k] * hinge(s - static_cast<Real>(sc.uav_cap));
      total += mu.mu[kXBound][k] * hinge(xs[k] - sc.area_x);
      total += mu.mu[kYBound][k] * hinge(ys[k] - sc.area_y);
      if (t + 1 < nt) {
        const Real sx = xs[k + 1] - xs[k];
        const Real sy = ys[k + 1] - ys[k];
        travel += std::sqrt(sx * sx + sy * sy);
      }
    }
    total += mu.mu[kFlight][u] * hinge(travel / sc.speed - sc.flight_budget);
  }
  return total;
}

Real decision_lagrangian_ext(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                             const Multipliers& mu, C1Form form) {
  auto widen = [](std::span<const double> v) { return std::vector<Real>(v.begin(), v.end()); };
  const auto xs = widen(d.path.xs.flat());
  const auto ys = widen(d.path.ys.flat());
  const auto p = widen(d.probs.p.flat());
  return lagrangian_ext(sc, draw, xs, ys, p, mu, form);
}

// Network forward pass and policy heads in extended precision, averaged over the batch.
Real batch_lagrangian_ext(const Mlp& mlp, const Scenario& sc,
                          std::span<const FadingDraw* const> draws, const Mat& features,
                          const Multipliers& mu, C1Form form) {
  const std::size_t n_ut = sc.num_uavs * sc.horizon;
  Real total = 0;
  for (std::size_t r = 0; r < draws.size(); ++r) {
    std::vector<Real> h(static_cast<std::size_t>(features.cols()));
    for (std::size_t c = 0; c < h.size(); ++c) h[c] = features(static_cast<Index>(r), static_cast<Index>(c));
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
      const Mat& w = mlp.weights[l];
      std::vector<Real> z(static_cast<std::size_t>(w.cols()));
      for (Index o = 0; o < w.cols(); ++o) {
        Real acc = mlp.biases[l](0, o);
        for (Index in = 0; in < w.rows(); ++in) acc += h[static_cast<std::size_t>(in)] * w(in, o);
        z[static_cast<std::size_t>(o)] = l + 1 < mlp.weights.size() ? hinge(acc) : acc;
      }
      h = std::move(z);
    }
    std::vector<Real> xs(n_ut), ys(n_ut), p(h.size() - 2 * n_ut);
    for (std::size_t k = 0; k < n_ut; ++k) {
      const Real a = hinge(h[k]), b = hinge(h[n_ut + k]);
      xs[k] = a / (a + 1) * sc.area_x;
      ys[k] = b / (b + 1) * sc.area_y;
    }
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = 1 / (1 + std::exp(-h[2 * n_ut + k]));
    total += lagrangian_ext(sc, *draws[r], xs, ys, p, mu, form);
  }
  return total / static_cast<Real>(draws.size());
}

template <class F>
double central(double& entry, double step, F&& f) {
  const double saved = entry;
  entry = saved + step;
  const Real up = f();
  entry = saved - step;
  const Real down = f();
  entry = saved;
  // The perturbed entries are doubles, so divide by the step actually taken.
  return static_cast<double>((up - down) / (static_cast<Real>(saved + step) - static_cast<Real>(saved - step)));
}

}  // namespace

void GradComparison::add(double analytic, double numeric) {
  ++compared;
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  if (scale < small) {
    worst_abs = std::max(worst_abs, diff);
    if (diff > abs_tol) ++failures;
  } else {
    const double rel = diff / scale;
    worst_rel = std::max(worst_rel, rel);
    if (rel > rel_tol) ++failures;
  }
}

GradComparison check_decision_gradient(const Scenario& sc, const FadingDraw& draw,
                                       const Decision& d, const Multipliers& mu, C1Form form,
                                       double step) {
  const DecisionGradient g = grad_wrt_decision(sc, draw, d, mu, form);
  Decision probe = d;
  auto f = [&] { return decision_lagrangian_ext(sc, draw, probe, mu, form); };
  GradComparison cmp;
  for (std::size_t k = 0; k < probe.path.xs.size(); ++k) {
    cmp.add(g.d_xs.flat()[k], central(probe.path.xs.flat()[k], step, f));
    cmp.add(g.d_ys.flat()[k], central(probe.path.ys.flat()[k], step, f));
  }
  for (std::size_t k = 0; k < probe.probs.p.size(); ++k) {
    cmp.add(g.d_p.flat()[k], central(probe.probs.p.flat()[k], step, f));
  }
  return cmp;
}

GradComparison check_weight_gradient(const Mlp& mlp, const Scenario& sc,
                                     std::span<const FadingDraw* const> draws,
                                     const Multipliers& mu, C1Form form, double step) {
  if (draws.empty()) throw ArgumentError("gradient check needs at least one draw");
  const Mat features = feature_matrix(sc, draws);
  const LagrangianGraph graph(sc, form);
  const WeightGradients g = weight_gradients(mlp, graph, draws, features, mu);
  Mlp probe = mlp;
  auto f = [&] { return batch_lagrangian_ext(probe, sc, draws, features, mu, form); };
  GradComparison cmp;
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    Mat& w = probe.weights[l];
    for (Index k = 0; k < w.size(); ++k) cmp.add(g.d_weights[l](k), central(w.data()[k], step, f));
    Mat& b = probe.biases[l];
    for (Index k = 0; k < b.size(); ++k) cmp.add(g.d_biases[l](k), central(b.data()[k], step, f));
  }
  return cmp;
}

double decision_kink_margin(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                            C1Form form) {
  d.check_shape(sc);
  const std::size_t ni = sc.num_devices, nu = sc.num_uavs, nt = sc.horizon;
  const auto& p = d.probs.p;
  double margin = std::numeric_limits<double>::infinity();
  auto see = [&](double arg) { margin = std::min(margin, std::abs(arg)); };
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 0; t < nt; ++t) {
        const double r = rate(sc, draw, d.path, i, u, t);
        see(form == C1Form::kRateFloor ? p(i, u, t) * sc.rate_min - r : sc.rate_min - p(i, u, t) * r);
        see(p(i, u, t) - 1.0);
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t u = 0; u < nu; ++u) s += p(i, u, t);
      see(s - 1.0);
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < ni; ++i) s += p(i, u, t);
      see(s - static_cast<double>(sc.uav_cap));
      see(d.path.xs(u, t) - sc.area_x);
      see(d.path.ys(u, t) - sc.area_y);
      if (t + 1 < nt) {
        see(std::hypot(d.path.xs(u, t + 1) - d.path.xs(u, t), d.path.ys(u, t + 1) - d.path.ys(u, t)));
      }
    }
    see(flight_time(sc, d.path, u) - sc.flight_budget);
  }
  return margin;
}

double network_kink_margin(const Mlp& mlp, const Scenario& sc,
                           std::span<const FadingDraw* const> draws, C1Form form) {
  const Mat features = feature_matrix(sc, draws);
  double margin = std::numeric_limits<double>::infinity();
  Mat h = features;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    Mat z = h * mlp.weights[l];
    z.rowwise() += mlp.biases[l].row(0);
    if (l + 1 < mlp.weights.size()) {
      margin = std::min(margin, z.cwiseAbs().minCoeff());
      z = z.cwiseMax(0.0);
    } else {
      const Index n_pos = static_cast<Index>(2 * sc.num_uavs * sc.horizon);
      margin = std::min(margin, z.leftCols(n_pos).cwiseAbs().minCoeff());
    }
    h = std::move(z);
  }
  const auto decisions = forward_batch(mlp, sc, features);
  for (std::size_t r = 0; r < draws.size(); ++r) {
    margin = std::min(margin, decision_kink_margin(sc, *draws[r], decisions[r], form));
  }
  return margin;
}

}  // namespace aoiopt
