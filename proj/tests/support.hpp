#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "aoiopt/lagrangian.hpp"
#include "aoiopt/rng.hpp"
#include "aoiopt/scenario.hpp"

namespace testsupport {

using namespace aoiopt;

/// Small hand-written instance with round numbers.
inline Scenario hand_scenario(std::size_t ni, std::size_t nu, std::size_t nt) {
  Scenario sc;
  sc.num_devices = ni;
  sc.num_uavs = nu;
  sc.horizon = nt;
  sc.area_x = 100.0;
  sc.area_y = 50.0;
  for (std::size_t i = 0; i < ni; ++i) {
    sc.device_pos.push_back({10.0 + 20.0 * static_cast<double>(i), 5.0 + 7.0 * static_cast<double>(i % 3)});
    sc.tx_power.push_back(1e-3 * (1.0 + 0.5 * static_cast<double>(i)));
  }
  for (std::size_t u = 0; u < nu; ++u) sc.uav_alt.push_back(10.0 + 5.0 * static_cast<double>(u));
  sc.bandwidth = Array2<double>(ni, nu);
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) sc.bandwidth(i, u) = 1e6 * static_cast<double>(1 + i + 2 * u);
  }
  sc.noise_var = 1e-12;
  sc.rician_k = 3.0;
  sc.rate_min = 2e6;
  sc.uav_cap = 2;
  sc.speed = 10.0;
  sc.interval_len = 5.0;
  sc.flight_budget = 12.0;
  return sc;
}

inline FadingDraw unit_draw(const Scenario& sc, double g = 1.0) {
  return {Array3<double>(sc.num_devices, sc.num_uavs, sc.horizon, g)};
}

/// Exhaustive expectation over all 2^(T-1) collection patterns of one (i, u) pair.
inline std::vector<double> enumerate_expected_aoi(const std::vector<double>& p) {
  const std::size_t nt = p.size();
  std::vector<double> e(nt, 0.0);
  const std::size_t n_patterns = std::size_t{1} << (nt - 1);
  for (std::size_t mask = 0; mask < n_patterns; ++mask) {
    double prob = 1.0;
    std::vector<double> age(nt, 0.0);
    for (std::size_t t = 1; t < nt; ++t) {
      const bool hit = (mask >> (t - 1)) & 1U;
      prob *= hit ? p[t] : 1.0 - p[t];
      age[t] = hit ? 0.0 : age[t - 1] + 1.0;
    }
    for (std::size_t t = 0; t < nt; ++t) e[t] += prob * age[t];
  }
  return e;
}

/// Lagrangian written out term by term from the model definitions.
inline double reference_lagrangian(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                                   const Multipliers& mu, C1Form form) {
  const std::size_t ni = sc.num_devices, nu = sc.num_uavs, nt = sc.horizon;
  auto hinge = [](double v) { return v > 0.0 ? v : 0.0; };
  const auto& p = d.probs.p;
  double total = 0.0;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      double age = 0.0;
      for (std::size_t t = 1; t < nt; ++t) {
        age = (1.0 - p(i, u, t)) * (age + 1.0);
        total += age;
      }
    }
  }
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 0; t < nt; ++t) {
        const double dx = d.path.xs(u, t) - sc.device_pos[i].x;
        const double dy = d.path.ys(u, t) - sc.device_pos[i].y;
        const double d2 = dx * dx + dy * dy + sc.uav_alt[u] * sc.uav_alt[u];
        const double snr = sc.tx_power[i] * draw.gain_sq(i, u, t) / (sc.noise_var * d2);
        const double r = sc.bandwidth(i, u) * std::log2(1.0 + snr);
        const double c1 = form == C1Form::kRateFloor ? hinge(p(i, u, t) * sc.rate_min - r)
                                                     : hinge(sc.rate_min - p(i, u, t) * r);
        const std::size_t k = (i * nu + u) * nt + t;
        total += mu.mu[kRate][k] * c1;
        total += mu.mu[kProbBound][k] * hinge(p(i, u, t) - 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t u = 0; u < nu; ++u) s += p(i, u, t);
      total += mu.mu[kAssociation][i * nt + t] * hinge(s - 1.0);
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    double travel = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < ni; ++i) s += p(i, u, t);
      total += mu.mu[kCapacity][u * nt + t] * hinge(s - static_cast<double>(sc.uav_cap));
      total += mu.mu[kXBound][u * nt + t] * hinge(d.path.xs(u, t) - sc.area_x);
      total += mu.mu[kYBound][u * nt + t] * hinge(d.path.ys(u, t) - sc.area_y);
      if (t + 1 < nt) {
        const double sx = d.path.xs(u, t + 1) - d.path.xs(u, t);
        const double sy = d.path.ys(u, t + 1) - d.path.ys(u, t);
        travel += std::sqrt(sx * sx + sy * sy);
      }
    }
    total += mu.mu[kFlight][u] * hinge(travel / sc.speed - sc.flight_budget);
  }
  return total;
}

/// Decision with positions slightly past the area and probabilities slightly past 1,
/// so every residual family has active and inactive entries.
inline Decision random_decision(const Scenario& sc, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Decision d{UavPath::constant(sc.num_uavs, sc.horizon, 0.0, 0.0),
             SelectionProbs::constant(sc.num_devices, sc.num_uavs, sc.horizon, 0.0)};
  for (double& x : d.path.xs.flat()) x = 1.1 * sc.area_x * unit(rng);
  for (double& y : d.path.ys.flat()) y = 1.1 * sc.area_y * unit(rng);
  for (double& p : d.probs.p.flat()) p = 1.2 * unit(rng);
  return d;
}

/// Random nonnegative multipliers; `rate_scale` tames the bit/s units of the rate family.
inline Multipliers random_multipliers(const Scenario& sc, Rng& rng, double rate_scale = 1e-5) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Multipliers mu = Multipliers::filled(sc, 0.0);
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    for (double& v : mu.mu[j]) v = (j == kRate ? rate_scale : 1.0) * unit(rng);
  }
  return mu;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace testsupport
