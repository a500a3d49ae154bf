#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "aoiopt/trainer.hpp"

namespace aoiopt {

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

struct ResultRow {
  std::string method;  // "ensemble", "member_00", "member_mean", "baseline_direct", ...
  Evaluation eval;
};

inline constexpr const char* kResultsSchema = "# aoiopt results v1";

/// Schema line, header, then one line per row:
/// method,mean_aoi,c1_max..c7_max,c1_mean..c7_mean
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct SweepRow {
  std::size_t ensemble_size = 0;
  double ensemble_aoi = 0.0;
  double member_mean_aoi = 0.0;
  double ensemble_worst_residual = 0.0;
};

inline constexpr const char* kSweepSchema = "# aoiopt sweep v1";

/// Schema line, header, then ensemble_size,weighting,ensemble_aoi,member_mean_aoi,worst_residual.
void write_sweep_csv(std::ostream& out, const std::string& weighting,
                     const std::vector<SweepRow>& rows);

}  // namespace aoiopt
