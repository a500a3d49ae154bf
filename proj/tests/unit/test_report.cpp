#include <gtest/gtest.h>

#include <sstream>

#include "aoiopt/report.hpp"

using namespace aoiopt;

TEST(Report, RoundTripFormatting) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Report, ResultsCsvLayout) {
  Evaluation e;
  e.mean_aoi = 1.5;
  e.residuals.max[1] = 0.25;
  std::ostringstream out;
  write_results_csv(out, {{"ensemble", e}, {"member_00", e}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kResultsSchema);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("method,mean_aoi,c1_max,", 0), 0u);
  EXPECT_NE(line.find("c7_max,c1_mean"), std::string::npos);
  std::getline(in, line);
  EXPECT_EQ(line, "ensemble,1.5,0,0.25,0,0,0,0,0,0,0,0,0,0,0,0");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("member_00,", 0), 0u);
}

TEST(Report, SweepCsvLayout) {
  std::ostringstream out;
  write_sweep_csv(out, "inverse-aoi", {{1, 3.0, 3.0, 0.0}, {2, 2.5, 3.5, 0.125}});
  EXPECT_EQ(out.str(), std::string(kSweepSchema) +
                           "\nensemble_size,weighting,ensemble_aoi,member_mean_aoi,worst_residual\n"
                           "1,inverse-aoi,3,3,0\n2,inverse-aoi,2.5,3.5,0.125\n");
}
