#include "aoiopt/channel.hpp"

#include <cmath>
#include <string>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

void check_indices(const Scenario& sc, const UavPath& path, std::size_t i, std::size_t u,
                   std::size_t t) {
  if (i >= sc.num_devices || u >= sc.num_uavs || t >= sc.horizon) {
    throw ArgumentError("index out of range (i=" + std::to_string(i) + ", u=" + std::to_string(u) +
                        ", t=" + std::to_string(t) + ")");
  }
  if (path.xs.dim(0) != sc.num_uavs || path.xs.dim(1) != sc.horizon || path.ys.dims() != path.xs.dims()) {
    throw ArgumentError("path shape does not match scenario");
  }
}

double distance_sq(const Scenario& sc, const UavPath& path, std::size_t i, std::size_t u,
                   std::size_t t) {
  const double dx = path.xs(u, t) - sc.device_pos[i].x;
  const double dy = path.ys(u, t) - sc.device_pos[i].y;
  const double h = sc.uav_alt[u];
  return dx * dx + dy * dy + h * h;
}

}  // namespace

UavPath UavPath::constant(std::size_t num_uavs, std::size_t horizon, double x, double y) {
  return {Array2<double>(num_uavs, horizon, x), Array2<double>(num_uavs, horizon, y)};
}

double rate_value(double bandwidth, double snr) { return bandwidth * std::log2(1.0 + snr); }

double distance(const Scenario& sc, const UavPath& path, std::size_t i, std::size_t u,
                std::size_t t) {
  check_indices(sc, path, i, u, t);
  return std::sqrt(distance_sq(sc, path, i, u, t));
}

double snr(const Scenario& sc, const FadingDraw& draw, const UavPath& path, std::size_t i,
           std::size_t u, std::size_t t) {
  check_indices(sc, path, i, u, t);
  return snr_value(sc.tx_power[i], draw.gain_sq(i, u, t), sc.noise_var, distance_sq(sc, path, i, u, t));
}

double rate(const Scenario& sc, const FadingDraw& draw, const UavPath& path, std::size_t i,
            std::size_t u, std::size_t t) {
  return rate_value(sc.bandwidth(i, u), snr(sc, draw, path, i, u, t));
}

double flight_time(const Scenario& sc, const UavPath& path, std::size_t u) {
  if (u >= sc.num_uavs || path.xs.dim(0) != sc.num_uavs || path.ys.dims() != path.xs.dims()) {
    throw ArgumentError("uav index out of range or path shape mismatch");
  }
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < path.xs.dim(1); ++t) {
    const double dx = path.xs(u, t + 1) - path.xs(u, t);
    const double dy = path.ys(u, t + 1) - path.ys(u, t);
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total / sc.speed;
}

}  // namespace aoiopt
