#pragma once

#include <cstddef>
#include <cstdint>

#include "aoiopt/array.hpp"
#include "aoiopt/rng.hpp"

namespace aoiopt {

/// Per-interval collection probabilities p[i][u][t], each in [0, 1].
struct SelectionProbs {
  Array3<double> p;

  static SelectionProbs constant(std::size_t devices, std::size_t uavs, std::size_t horizon,
                                 double value);
  std::size_t horizon() const { return p.dim(2); }
  /// Throws ArgumentError if any entry is outside [0, 1] or non-finite.
  void validate() const;
  bool operator==(const SelectionProbs&) const = default;
};

/// One sample path of the age process, A[i][u][t] in intervals.
struct AoiTrace {
  Array3<std::uint32_t> a;
};

/// Draws the collection events independently and runs A[t] = (A[t-1] + 1)(1 - alpha[t]).
AoiTrace simulate_aoi(const SelectionProbs& probs, Rng& rng);

/// Exact E[A[t]] through E[0] = 0, E[t] = (1 - p[t]) (E[t-1] + 1).
/// p[..][0] does not enter: the process starts at zero.
Array3<double> expected_aoi(const SelectionProbs& probs);

/// Sum of expected_aoi over every (i, u, t).
double total_expected_aoi(const SelectionProbs& probs);

/// Same recursion without the [0, 1] range check, for penalized evaluation of raw
/// decisions whose probabilities may leave the box.
double total_expected_aoi_unchecked(const Array3<double>& p);

struct McEstimate {
  Array3<double> mean;
  Array3<double> std_error;
};

/// Empirical mean and standard error of simulate_aoi over n_samples runs.
McEstimate mc_expected_aoi(const SelectionProbs& probs, std::size_t n_samples, Rng& rng);

}  // namespace aoiopt
