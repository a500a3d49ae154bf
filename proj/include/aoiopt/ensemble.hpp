#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoiopt/lagrangian.hpp"
#include "aoiopt/mlp.hpp"
#include "aoiopt/trainer.hpp"

namespace aoiopt {

/// How member outputs are combined at test time.
enum class Weighting {
  kPaperLiteral,  // w_k = AoI_k / sum AoI
  kInverseAoi,    // w_k = (1/AoI_k) / sum (1/AoI), AoI floored at 1e-9
  kUniform,       // w_k = 1/N
};

std::string to_string(Weighting w);
/// Accepts "paper-literal", "inverse-aoi", "uniform"; throws ConfigError otherwise.
Weighting parse_weighting(std::string_view name);

/// Normalized combination weights for member AoIs. Always a probability vector.
std::vector<double> aggregation_weights(std::span<const double> member_aoi, Weighting scheme);

struct EnsembleMember {
  Mlp model;
  Multipliers multipliers;
  TrainLog log;
  std::size_t shard_begin = 0;  // draw range of the training shard
  std::size_t shard_end = 0;
};

struct Ensemble {
  std::vector<EnsembleMember> members;
  Weighting weighting = Weighting::kInverseAoi;
  std::uint64_t master_seed = 0;
  TrainConfig config;

  /// First `n` members, same weighting.
  Ensemble prefix(std::size_t n) const;
};

/// Trains member k on shard k of a contiguous split, with weights initialized from
/// derive_seed(cfg.seed, k) and mini-batch order from derive_seed(cfg.seed, k + n).
/// `jobs` caps concurrent member trainings; results do not depend on it.
Ensemble train_ensemble(const Dataset& dataset, std::size_t n_members, const TrainConfig& cfg,
                        const std::vector<std::size_t>& hidden, Weighting weighting,
                        std::size_t jobs = 1);

/// Weighted average of the member decisions for one feature vector.
Decision aggregate(const Ensemble& ens, const Scenario& sc, std::span<const double> theta);
/// Same, given the member decisions directly.
Decision aggregate_decisions(std::span<const Decision> member_decisions, Weighting scheme);

struct EnsembleEvaluation {
  Evaluation ensemble;
  std::vector<Evaluation> members;
};

EnsembleEvaluation evaluate_ensemble(const Ensemble& ens, const Dataset& dataset,
                                     C1Form form = C1Form::kRateFloor);

/// Directory of member checkpoints plus manifest.json.
void save_ensemble(const std::string& dir, const Ensemble& ens);
Ensemble load_ensemble(const std::string& dir);

}  // namespace aoiopt
