#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoiopt/lagrangian.hpp"
#include "aoiopt/scenario.hpp"
#include "aoiopt/tape.hpp"

namespace aoiopt {

/// Fully connected policy network theta -> (x, y, p).
///
/// Hidden layers use ReLU. The first 2*U*T outputs are positions: ReLU, then r/(1+r)
/// scaled by the area side, so x in [0, x_max). The remaining I*U*T outputs pass
/// through a sigmoid and become selection probabilities.
struct Mlp {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::vector<Mat> weights;              // [in x out]
  std::vector<Mat> biases;               // [1 x out]
  std::uint64_t seed = 0;

  /// He-style uniform fan-in initialization, zero biases.
  static Mlp init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);
  /// Same shapes, every parameter zero.
  static Mlp zeros(std::vector<std::size_t> layer_sizes);

  std::size_t input_width() const { return layer_sizes.front(); }
  std::size_t output_width() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  /// Throws ArgumentError on inconsistent shapes or non-finite weights.
  void validate() const;

  bool operator==(const Mlp&) const;
};

std::vector<std::size_t> desk_hidden_layers();
std::vector<std::size_t> paper_hidden_layers();

/// 3I + I*U + I*U*T: normalized device positions, powers, bandwidths, then raw gains.
std::size_t feature_width(const Scenario& sc);
/// 2*U*T + I*U*T.
std::size_t decision_width(const Scenario& sc);
/// input, hidden..., output sized for `sc`.
std::vector<std::size_t> layer_sizes_for(const Scenario& sc, const std::vector<std::size_t>& hidden);

std::vector<double> make_features(const Scenario& sc, const FadingDraw& draw);
/// One feature row per draw.
Mat feature_matrix(const Scenario& sc, std::span<const FadingDraw* const> draws);

/// Plain (tape-free) policy evaluation.
Decision forward(const Mlp& mlp, const Scenario& sc, std::span<const double> theta);
std::vector<Decision> forward_batch(const Mlp& mlp, const Scenario& sc, const Mat& theta);

struct PolicyNodes {
  Var xs;  // rows x U*T
  Var ys;  // rows x U*T
  Var p;   // rows x I*U*T
};

/// Records weights as leaves, in the order W0, b0, W1, b1, ...
std::vector<Var> bind_parameters(Tape& tape, const Mlp& mlp);
PolicyNodes forward_on_tape(Tape& tape, std::span<const Var> params, Var input,
                            const Scenario& sc);

/// Batch-mean Lagrangian, its weight gradients, and the batch-mean residuals
/// (the multiplier-side gradient).
struct WeightGradients {
  double loss = 0.0;
  double mean_aoi = 0.0;
  std::vector<Mat> d_weights;
  std::vector<Mat> d_biases;
  std::array<std::vector<double>, kNumFamilies> residual_means;
};

WeightGradients weight_gradients(const Mlp& mlp, const LagrangianGraph& graph,
                                 std::span<const FadingDraw* const> draws, const Multipliers& mu);
/// Same, reusing a precomputed feature matrix (one row per draw).
WeightGradients weight_gradients(const Mlp& mlp, const LagrangianGraph& graph,
                                 std::span<const FadingDraw* const> draws, const Mat& features,
                                 const Multipliers& mu);

/// Gradient of the Lagrangian with the decision entries themselves as leaves.
struct DecisionGradient {
  double value = 0.0;
  Array2<double> d_xs;
  Array2<double> d_ys;
  Array3<double> d_p;
};

DecisionGradient grad_wrt_decision(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                                   const Multipliers& mu, C1Form form = C1Form::kRateFloor);

void to_json(nlohmann::json& j, const Mlp& mlp);
void from_json(const nlohmann::json& j, Mlp& mlp);

/// Writes a versioned JSON checkpoint; `config_hash` identifies the training config.
void save_checkpoint(const std::string& path, const Mlp& mlp, const std::string& config_hash);
Mlp load_checkpoint(const std::string& path, std::string* config_hash = nullptr);

}  // namespace aoiopt
