#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoiopt/lagrangian.hpp"
#include "aoiopt/mlp.hpp"
#include "aoiopt/scenario.hpp"

namespace aoiopt {

struct TrainConfig {
  double lr_primal = 1e-3;  // SGD step on the network weights
  double lr_dual = 0.1;     // ascent step on the multipliers
  std::size_t batch_size = 50;
  std::size_t epochs = 150;
  std::uint64_t seed = 0;
  double mu_init = 0.0;
  C1Form c1_form = C1Form::kRateFloor;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);
/// FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string config_hash(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_aoi = 0.0;
  double lagrangian = 0.0;
  std::array<double, kNumFamilies> residual_mean{};
  std::array<double, kNumFamilies> mu_norm{};  // at the end of the epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  static std::string csv_header();
  /// One CSV line per epoch, with an optional leading member column.
  void write_csv(std::ostream& out, long member = -1) const;
};

struct TrainResult {
  Mlp model;
  Multipliers multipliers;
  TrainLog log;
};

/// Primal-dual training on one dataset shard.
///
/// Each epoch shuffles the shard and walks it in mini-batches. Per batch: one SGD step
/// on the batch-mean Lagrangian, then mu_j += lr_dual * (batch-mean residual_j).
/// Epoch records average the pre-update batch statistics.
TrainResult train_one(Mlp mlp, const Dataset& dataset, const TrainConfig& cfg);

struct Evaluation {
  double mean_aoi = 0.0;
  ResidualSummary residuals;
};

/// Exact expected AoI and residuals of the policy's decision on every draw.
Evaluation evaluate(const Mlp& mlp, const Dataset& dataset, C1Form form = C1Form::kRateFloor);
/// Same, for decisions already produced (one per draw).
Evaluation evaluate_decisions(const Scenario& sc, std::span<const FadingDraw> draws,
                              std::span<const Decision> decisions, C1Form form);

}  // namespace aoiopt
