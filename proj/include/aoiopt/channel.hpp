#pragma once

#include <cstddef>

#include "aoiopt/array.hpp"
#include "aoiopt/scenario.hpp"

namespace aoiopt {

/// Per-interval hover coordinates of every UAV, shape [U][T] in meters.
struct UavPath {
  Array2<double> xs;
  Array2<double> ys;

  static UavPath constant(std::size_t num_uavs, std::size_t horizon, double x, double y);
  bool operator==(const UavPath&) const = default;
};

// Scalar kernels shared by the indexed operations and the tape-based Lagrangian.
inline double snr_value(double power, double gain_sq, double noise_var, double dist_sq) {
  return power * gain_sq / (noise_var * dist_sq);
}
double rate_value(double bandwidth, double snr);

/// 3-D device-to-UAV distance; always >= the UAV altitude.
double distance(const Scenario& sc, const UavPath& path, std::size_t i, std::size_t u,
                std::size_t t);
double snr(const Scenario& sc, const FadingDraw& draw, const UavPath& path, std::size_t i,
           std::size_t u, std::size_t t);
/// Shannon rate in bits/s.
double rate(const Scenario& sc, const FadingDraw& draw, const UavPath& path, std::size_t i,
            std::size_t u, std::size_t t);
/// Travel time in seconds across the T stops of UAV u at constant speed.
double flight_time(const Scenario& sc, const UavPath& path, std::size_t u);

}  // namespace aoiopt
