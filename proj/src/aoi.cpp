#include "aoiopt/aoi.hpp"

#include <cmath>

#include "aoiopt/errors.hpp"

namespace aoiopt {

SelectionProbs SelectionProbs::constant(std::size_t devices, std::size_t uavs,
                                        std::size_t horizon, double value) {
  return {Array3<double>(devices, uavs, horizon, value)};
}

void SelectionProbs::validate() const {
  for (double v : p.flat()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("selection probability outside [0, 1]");
  }
}

AoiTrace simulate_aoi(const SelectionProbs& probs, Rng& rng) {
  probs.validate();
  const auto [ni, nu, nt] = probs.p.dims();
  AoiTrace trace{Array3<std::uint32_t>(ni, nu, nt, 0)};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 1; t < nt; ++t) {
        const bool collected = unit(rng) < probs.p(i, u, t);
        trace.a(i, u, t) = collected ? 0 : trace.a(i, u, t - 1) + 1;
      }
    }
  }
  return trace;
}

Array3<double> expected_aoi(const SelectionProbs& probs) {
  probs.validate();
  const auto [ni, nu, nt] = probs.p.dims();
  Array3<double> e(ni, nu, nt, 0.0);
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t t = 1; t < nt; ++t) {
        e(i, u, t) = (1.0 - probs.p(i, u, t)) * (e(i, u, t - 1) + 1.0);
      }
    }
  }
  return e;
}

double total_expected_aoi(const SelectionProbs& probs) {
  const Array3<double> e = expected_aoi(probs);
  double total = 0.0;
  for (double v : e.flat()) total += v;
  return total;
}

double total_expected_aoi_unchecked(const Array3<double>& p) {
  const auto [ni, nu, nt] = p.dims();
  double total = 0.0;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      double e = 0.0;
      for (std::size_t t = 1; t < nt; ++t) {
        e = (1.0 - p(i, u, t)) * (e + 1.0);
        total += e;
      }
    }
  }
  return total;
}

McEstimate mc_expected_aoi(const SelectionProbs& probs, std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw ArgumentError("n_samples must be >= 1");
  const auto [ni, nu, nt] = probs.p.dims();
  Array3<double> sum(ni, nu, nt, 0.0);
  Array3<double> sum_sq(ni, nu, nt, 0.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const AoiTrace trace = simulate_aoi(probs, rng);
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double a = trace.a.flat()[k];
      sum.flat()[k] += a;
      sum_sq.flat()[k] += a * a;
    }
  }
  const double n = static_cast<double>(n_samples);
  McEstimate est{Array3<double>(ni, nu, nt, 0.0), Array3<double>(ni, nu, nt, 0.0)};
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double mean = sum.flat()[k] / n;
    est.mean.flat()[k] = mean;
    if (n_samples > 1) {
      // Unbiased sample variance; clamp tiny negative round-off.
      const double var = std::max(0.0, (sum_sq.flat()[k] - n * mean * mean) / (n - 1.0));
      est.std_error.flat()[k] = std::sqrt(var / n);
    }
  }
  return est;
}

}  // namespace aoiopt
