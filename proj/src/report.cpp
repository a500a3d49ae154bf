#include "aoiopt/report.hpp"

#include <cstdio>
#include <ostream>

namespace aoiopt {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsSchema << '\n' << "method,mean_aoi";
  for (std::size_t j = 1; j <= kNumFamilies; ++j) out << ",c" << j << "_max";
  for (std::size_t j = 1; j <= kNumFamilies; ++j) out << ",c" << j << "_mean";
  out << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.eval.mean_aoi);
    for (double v : r.eval.residuals.max) out << ',' << format_double(v);
    for (double v : r.eval.residuals.mean) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::string& weighting,
                     const std::vector<SweepRow>& rows) {
  out << kSweepSchema << '\n'
      << "ensemble_size,weighting,ensemble_aoi,member_mean_aoi,worst_residual\n";
  for (const auto& r : rows) {
    out << r.ensemble_size << ',' << weighting << ',' << format_double(r.ensemble_aoi) << ','
        << format_double(r.member_mean_aoi) << ',' << format_double(r.ensemble_worst_residual)
        << '\n';
  }
}

}  // namespace aoiopt
