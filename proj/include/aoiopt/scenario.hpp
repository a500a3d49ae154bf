#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoiopt/array.hpp"
#include "aoiopt/rng.hpp"

namespace aoiopt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Ranges and constants for random instance generation. Defaults reproduce the
/// 30-device / 3-UAV / 40-interval experiment setup.
struct GenConfig {
  std::size_t num_devices = 30;
  std::size_t num_uavs = 3;
  std::size_t horizon = 40;
  double area_x = 1000.0;
  double area_y = 1000.0;
  double alt_min = 80.0;
  double alt_max = 100.0;
  double power_min_w = 0.0;
  double power_max_w = 1e-3;
  double bandwidth_min_hz = 1.5e9;
  double bandwidth_max_hz = 2.0e9;
  double noise_dbm = -120.0;
  double rician_k = 3.0;
  double rate_min_bps = 150e3;
  std::size_t uav_cap = 8;
  double speed = 20.0;
  double interval_len = 30.0;
  /// Seconds; horizon * interval_len when unset.
  std::optional<double> flight_budget;

  /// Full-size instance (I=30, U=3, T=40).
  static GenConfig paper_scale() { return {}; }
  /// Small instance for fast experiments (I=6, U=2, T=10).
  static GenConfig desk();

  /// Throws ConfigError on inverted ranges or out-of-domain values.
  void validate() const;
};

/// Immutable problem instance. Radio quantities are SI (watts, hertz, bits/s).
struct Scenario {
  std::size_t num_devices = 0;
  std::size_t num_uavs = 0;
  std::size_t horizon = 0;
  double area_x = 0.0;
  double area_y = 0.0;
  std::vector<Point2> device_pos;   // [I]
  std::vector<double> uav_alt;      // [U]
  std::vector<double> tx_power;     // [I]
  Array2<double> bandwidth;         // [I][U]
  double noise_var = 0.0;
  double rician_k = 0.0;
  double rate_min = 0.0;
  std::size_t uav_cap = 1;
  double speed = 0.0;
  double interval_len = 0.0;
  double flight_budget = 0.0;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// One realization of |h_{i,u}[t]|^2 over all device/UAV/interval triples.
struct FadingDraw {
  Array3<double> gain_sq;  // [I][U][T]
  bool operator==(const FadingDraw&) const = default;
};

struct Dataset {
  Scenario scenario;
  std::vector<FadingDraw> draws;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const Dataset&) const = default;
};

double dbm_to_watts(double dbm);

Scenario generate_scenario(const GenConfig& config, std::uint64_t seed);

/// Block Rician fading: unit-magnitude LoS with uniform phase plus unit-power
/// circular Gaussian scatter, mixed by the Rician factor.
FadingDraw sample_fading(const Scenario& sc, Rng& rng);

/// `n_draws` fading draws of `sc` from a stream seeded by `seed`.
Dataset make_dataset(const Scenario& sc, std::size_t n_draws, std::uint64_t seed);

/// Contiguous near-equal partition; the first `size % n_parts` shards get one extra draw.
std::vector<Dataset> split_dataset(const Dataset& ds, std::size_t n_parts);

/// Config files override individual fields of the preset they are applied to.
void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

void to_json(nlohmann::json& j, const Scenario& sc);
void from_json(const nlohmann::json& j, Scenario& sc);
void to_json(nlohmann::json& j, const Dataset& ds);
void from_json(const nlohmann::json& j, Dataset& ds);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace aoiopt
