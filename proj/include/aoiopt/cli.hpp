#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aoiopt::cli {

/// Process exit codes shared by every command.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsageError = 2;

struct GenOptions {
  std::optional<std::string> config_path;  // JSON with an optional "gen" object
  std::string preset = "paper-scale";
  std::uint64_t seed = 0;
  std::size_t train_draws = 400;
  std::size_t test_draws = 100;
  std::string out_dir = ".";
};

/// Writes scenario.json, train.json and test.json sharing one scenario.
int cmd_gen(const GenOptions& opt, std::ostream& log);

struct TrainOptions {
  std::string dataset_path;
  std::optional<std::string> config_path;  // JSON with optional "train" and "hidden_layers"
  std::string preset = "paper-scale";      // picks the default hidden layers
  std::optional<std::vector<std::size_t>> hidden;
  std::size_t members = 8;
  std::optional<std::uint64_t> seed;
  // Unset: paper-literal under the paper-scale preset, inverse-aoi otherwise.
  std::optional<std::string> weighting;
  std::optional<std::string> c1_form;
  std::size_t jobs = 1;
  std::optional<double> lr_primal, lr_dual;
  std::optional<std::size_t> batch, epochs;
  std::string out_dir = "checkpoint";
};

/// Trains an ensemble, writes the checkpoint directory and train_log.csv inside it.
int cmd_train(const TrainOptions& opt, std::ostream& log);

struct EvalOptions {
  std::string checkpoint_dir;
  std::string dataset_path;
  std::optional<std::string> weighting;  // defaults to the manifest's scheme
  std::optional<std::string> sweep;      // "a..b" or a single size
  bool baseline = true;
  std::size_t baseline_iters = 2000;
  // Uniform perturbation of the baseline's initial p = 0.5. The unperturbed start is
  // symmetric across UAVs and gradient steps never leave that symmetric subspace.
  double baseline_jitter = 0.01;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

/// Writes results.csv and, when requested, sweep.csv.
int cmd_eval(const EvalOptions& opt, std::ostream& log);

struct ValidateOptions {
  std::string dataset_path;
  std::uint64_t seed = 0;
  std::size_t samples = 100000;
  std::size_t tensors = 2;
  bool gradcheck = false;
  std::size_t gradcheck_cases = 5;
};

/// Monte-Carlo check of the expected-AoI recursion and optional gradient checks.
int cmd_validate(const ValidateOptions& opt, std::ostream& log);

/// Parses "a..b" or "n" into an inclusive range; throws ConfigError.
std::pair<std::size_t, std::size_t> parse_range(const std::string& text);

}  // namespace aoiopt::cli
