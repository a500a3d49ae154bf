#include "aoiopt/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

double relu(double x) { return x > 0.0 ? x : 0.0; }

Mat row_constant(std::span<const double> values) {
  Mat m(1, static_cast<Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) m(0, static_cast<Index>(k)) = values[k];
  return m;
}

}  // namespace

std::string to_string(C1Form form) {
  return form == C1Form::kRateFloor ? "constraint-6b" : "lagrangian-paper";
}

C1Form parse_c1_form(std::string_view name) {
  if (name == "constraint-6b") return C1Form::kRateFloor;
  if (name == "lagrangian-paper") return C1Form::kScaledRate;
  throw ConfigError("unknown c1 form '" + std::string(name) + "'");
}

std::array<std::size_t, kNumFamilies> family_sizes(const Scenario& sc) {
  const std::size_t i = sc.num_devices, u = sc.num_uavs, t = sc.horizon;
  return {i * u * t, i * t, u * t, u, u * t, u * t, i * u * t};
}

void Decision::check_shape(const Scenario& sc) const {
  const std::array<std::size_t, 2> ut{sc.num_uavs, sc.horizon};
  const std::array<std::size_t, 3> iut{sc.num_devices, sc.num_uavs, sc.horizon};
  if (path.xs.dims() != ut || path.ys.dims() != ut || probs.p.dims() != iut) {
    throw ArgumentError("decision shape does not match scenario");
  }
}

Multipliers Multipliers::filled(const Scenario& sc, double value) {
  Multipliers m;
  const auto sizes = family_sizes(sc);
  for (std::size_t j = 0; j < kNumFamilies; ++j) m.mu[j].assign(sizes[j], value);
  return m;
}

bool Multipliers::nonnegative() const {
  return std::ranges::all_of(mu, [](const auto& v) {
    return std::ranges::all_of(v, [](double x) { return x >= 0.0; });
  });
}

double Multipliers::norm(std::size_t family) const {
  double s = 0.0;
  for (double x : mu.at(family)) s += x * x;
  return std::sqrt(s);
}

void Multipliers::check_shape(const Scenario& sc) const {
  const auto sizes = family_sizes(sc);
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    if (mu[j].size() != sizes[j]) throw ArgumentError("multiplier shape does not match scenario");
  }
}

double ConstraintResiduals::max() const {
  double m = 0.0;
  for (const auto& v : c) {
    for (double x : v) m = std::max(m, x);
  }
  return m;
}

ConstraintResiduals residuals(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                              C1Form form) {
  d.check_shape(sc);
  const std::size_t ni = sc.num_devices, nu = sc.num_uavs, nt = sc.horizon;
  if (draw.gain_sq.dims() != std::array<std::size_t, 3>{ni, nu, nt}) {
    throw ArgumentError("fading draw shape does not match scenario");
  }
  const auto& p = d.probs.p;
  ConstraintResiduals r;
  const auto sizes = family_sizes(sc);
  for (std::size_t j = 0; j < kNumFamilies; ++j) r.c[j].assign(sizes[j], 0.0);

  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t k = p.index(i, u, t);
        const double rt = rate(sc, draw, d.path, i, u, t);
        r.c[kRate][k] = form == C1Form::kRateFloor ? relu(p(i, u, t) * sc.rate_min - rt)
                                                   : relu(sc.rate_min - p(i, u, t) * rt);
        r.c[kProbBound][k] = relu(p(i, u, t) - 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t u = 0; u < nu; ++u) s += p(i, u, t);
      r.c[kAssociation][i * nt + t] = relu(s - 1.0);
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < ni; ++i) s += p(i, u, t);
      r.c[kCapacity][u * nt + t] = relu(s - static_cast<double>(sc.uav_cap));
      r.c[kXBound][u * nt + t] = relu(d.path.xs(u, t) - sc.area_x);
      r.c[kYBound][u * nt + t] = relu(d.path.ys(u, t) - sc.area_y);
    }
    r.c[kFlight][u] = relu(flight_time(sc, d.path, u) - sc.flight_budget);
  }
  return r;
}

double lagrangian_value(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                        const Multipliers& mu, C1Form form) {
  mu.check_shape(sc);
  const ConstraintResiduals r = residuals(sc, draw, d, form);
  double value = total_expected_aoi_unchecked(d.probs.p);
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < r.c[j].size(); ++k) dot += mu.mu[j][k] * r.c[j][k];
    value += dot;
  }
  return value;
}

double ResidualSummary::worst() const { return *std::ranges::max_element(max); }

void ResidualAccumulator::add(const ConstraintResiduals& r) {
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    double s = 0.0;
    for (double x : r.c[j]) {
      s += x;
      max_[j] = std::max(max_[j], x);
    }
    if (!r.c[j].empty()) sum_[j] += s / static_cast<double>(r.c[j].size());
    ++count_[j];
  }
}

ResidualSummary ResidualAccumulator::summary() const {
  ResidualSummary s;
  s.max = max_;
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    s.mean[j] = count_[j] ? sum_[j] / static_cast<double>(count_[j]) : 0.0;
  }
  return s;
}

LagrangianGraph::LagrangianGraph(const Scenario& sc, C1Form form) : sc_(sc), form_(form) {
  const std::size_t ni = sc.num_devices, nu = sc.num_uavs, nt = sc.horizon;
  const std::size_t n_iut = ni * nu * nt;
  ut_of_iut_.resize(n_iut);
  assoc_group_.resize(n_iut);
  capacity_group_.resize(n_iut);
  cols_at_t_.assign(nt, {});
  std::vector<double> dx(n_iut), dy(n_iut), h2(n_iut), bw(n_iut);
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t k = (i * nu + u) * nt + t;
        ut_of_iut_[k] = static_cast<Index>(u * nt + t);
        assoc_group_[k] = static_cast<Index>(i * nt + t);
        capacity_group_[k] = static_cast<Index>(u * nt + t);
        cols_at_t_[t].push_back(static_cast<Index>(k));
        dx[k] = sc.device_pos[i].x;
        dy[k] = sc.device_pos[i].y;
        h2[k] = sc.uav_alt[u] * sc.uav_alt[u];
        bw[k] = sc.bandwidth(i, u);
      }
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t t = 0; t + 1 < nt; ++t) {
      seg_cur_.push_back(static_cast<Index>(u * nt + t));
      seg_next_.push_back(static_cast<Index>(u * nt + t + 1));
      seg_group_.push_back(static_cast<Index>(u));
    }
  }
  dev_x_ = row_constant(dx);
  dev_y_ = row_constant(dy);
  alt_sq_ = row_constant(h2);
  bandwidth_ = row_constant(bw);
}

LagrangianGraph::Nodes LagrangianGraph::build(Tape& tape, std::span<const FadingDraw* const> draws,
                                              Var xs, Var ys, Var p,
                                              const Multipliers& mu) const {
  const std::size_t ni = sc_.num_devices, nu = sc_.num_uavs, nt = sc_.horizon;
  const Index rows = static_cast<Index>(draws.size());
  const Index n_ut = static_cast<Index>(nu * nt);
  const Index n_iut = static_cast<Index>(ni * nu * nt);
  if (rows == 0 || xs.rows() != rows || ys.rows() != rows || p.rows() != rows ||
      xs.cols() != n_ut || ys.cols() != n_ut || p.cols() != n_iut) {
    throw ArgumentError("batch shapes do not match the scenario layout");
  }
  mu.check_shape(sc_);

  // P_i |h|^2 / sigma^2 per batch row; constant with respect to the decision.
  Mat gain_coef(rows, n_iut);
  for (Index r = 0; r < rows; ++r) {
    const auto& g = draws[static_cast<std::size_t>(r)]->gain_sq;
    if (g.size() != static_cast<std::size_t>(n_iut)) throw ArgumentError("fading draw shape mismatch");
    for (std::size_t i = 0; i < ni; ++i) {
      const double coef = sc_.tx_power[i] / sc_.noise_var;
      for (std::size_t k = i * nu * nt; k < (i + 1) * nu * nt; ++k) {
        gain_coef(r, static_cast<Index>(k)) = coef * g.flat()[k];
      }
    }
  }

  Nodes out;
  // Radio: squared distance, SNR, Shannon rate.
  const Var dx = tape.select_cols(xs, ut_of_iut_) - tape.constant(dev_x_);
  const Var dy = tape.select_cols(ys, ut_of_iut_) - tape.constant(dev_y_);
  const Var dist_sq = tape.square(dx) + tape.square(dy) + tape.constant(alt_sq_);
  const Var snr = tape.constant(std::move(gain_coef)) / dist_sq;
  const Var rate = tape.constant(bandwidth_) * (tape.log(snr + 1.0) * (1.0 / std::numbers::ln2));

  auto& c = out.residuals;
  if (form_ == C1Form::kRateFloor) {
    c[kRate] = tape.relu(p * sc_.rate_min - rate);
  } else {
    c[kRate] = tape.relu(sc_.rate_min - p * rate);
  }
  c[kAssociation] = tape.relu(tape.group_sum_cols(p, assoc_group_, static_cast<Index>(ni * nt)) + -1.0);
  c[kCapacity] = tape.relu(tape.group_sum_cols(p, capacity_group_, n_ut) +
                           -static_cast<double>(sc_.uav_cap));
  const Var sx = tape.select_cols(xs, seg_next_) - tape.select_cols(xs, seg_cur_);
  const Var sy = tape.select_cols(ys, seg_next_) - tape.select_cols(ys, seg_cur_);
  const Var seg_len = tape.sqrt(tape.square(sx) + tape.square(sy));
  const Var zeta = tape.group_sum_cols(seg_len, seg_group_, static_cast<Index>(nu)) * (1.0 / sc_.speed);
  c[kFlight] = tape.relu(zeta + -sc_.flight_budget);
  c[kXBound] = tape.relu(xs + -sc_.area_x);
  c[kYBound] = tape.relu(ys + -sc_.area_y);
  c[kProbBound] = tape.relu(p + -1.0);

  // Expected AoI: E[t] = q[t] (E[t-1] + 1), E[0] = 0.
  const Var q = 1.0 - p;
  Var age = tape.select_cols(q, cols_at_t_[1]);
  Var age_total = age;
  for (std::size_t t = 2; t < nt; ++t) {
    age = tape.select_cols(q, cols_at_t_[t]) * (age + 1.0);
    age_total = age_total + age;
  }
  out.aoi = tape.row_sum(age_total);

  Var lag = out.aoi;
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    lag = lag + tape.row_sum(c[j] * tape.constant(row_constant(mu.mu[j])));
  }
  out.lagrangian = lag;
  out.loss = tape.sum(lag) * (1.0 / static_cast<double>(rows));
  return out;
}

}  // namespace aoiopt
