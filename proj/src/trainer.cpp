#include "aoiopt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "aoiopt/errors.hpp"

namespace aoiopt {

void TrainConfig::validate() const {
  if (!(std::isfinite(lr_primal) && lr_primal > 0.0)) throw ConfigError("lr_primal must be > 0");
  if (!(std::isfinite(lr_dual) && lr_dual >= 0.0)) throw ConfigError("lr_dual must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(std::isfinite(mu_init) && mu_init >= 0.0)) throw ConfigError("mu_init must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{{"lr_primal", cfg.lr_primal}, {"lr_dual", cfg.lr_dual},
                     {"batch_size", cfg.batch_size}, {"epochs", cfg.epochs},
                     {"seed", cfg.seed},           {"mu_init", cfg.mu_init},
                     {"c1_form", to_string(cfg.c1_form)}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  try {
    cfg.lr_primal = j.value("lr_primal", cfg.lr_primal);
    cfg.lr_dual = j.value("lr_dual", cfg.lr_dual);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.mu_init = j.value("mu_init", cfg.mu_init);
    if (j.contains("c1_form")) cfg.c1_form = parse_c1_form(j.at("c1_form").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
  cfg.validate();
}

std::string config_hash(const TrainConfig& cfg) {
  const std::string text = nlohmann::json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string TrainLog::csv_header() {
  std::string h = "epoch,mean_aoi,lagrangian";
  for (std::size_t j = 1; j <= kNumFamilies; ++j) h += ",residual_c" + std::to_string(j) + "_mean";
  for (std::size_t j = 1; j <= kNumFamilies; ++j) h += ",mu" + std::to_string(j) + "_norm";
  return h;
}

void TrainLog::write_csv(std::ostream& out, long member) const {
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : epochs) {
    if (member >= 0) out << member << ',';
    out << r.epoch << ',' << num(r.mean_aoi) << ',' << num(r.lagrangian);
    for (double v : r.residual_mean) out << ',' << num(v);
    for (double v : r.mu_norm) out << ',' << num(v);
    out << '\n';
  }
}

TrainResult train_one(Mlp mlp, const Dataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  dataset.validate();
  mlp.validate();
  const Scenario& sc = dataset.scenario;
  if (mlp.input_width() != feature_width(sc) || mlp.output_width() != decision_width(sc)) {
    throw ArgumentError("network widths do not match the dataset scenario");
  }

  const LagrangianGraph graph(sc, cfg.c1_form);
  Multipliers mu = Multipliers::filled(sc, cfg.mu_init);
  std::vector<const FadingDraw*> all;
  for (const auto& d : dataset.draws) all.push_back(&d);
  const Mat features = feature_matrix(sc, all);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<const FadingDraw*> batch;
      Mat batch_features(static_cast<Index>(end - begin), features.cols());
      for (std::size_t k = begin; k < end; ++k) {
        batch.push_back(all[order[k]]);
        batch_features.row(static_cast<Index>(k - begin)) = features.row(static_cast<Index>(order[k]));
      }

      const WeightGradients g = weight_gradients(mlp, graph, batch, batch_features, mu);
      if (!std::isfinite(g.loss)) throw TrainingError("non-finite Lagrangian", step);

      for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        mlp.weights[l] -= cfg.lr_primal * g.d_weights[l];
        mlp.biases[l] -= cfg.lr_primal * g.d_biases[l];
      }
      for (std::size_t j = 0; j < kNumFamilies; ++j) {
        auto& m = mu.mu[j];
        double mean = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) {
          // Residuals are ReLU outputs, so the projection onto mu >= 0 never binds.
          m[k] = std::max(0.0, m[k] + cfg.lr_dual * g.residual_means[j][k]);
          mean += g.residual_means[j][k];
        }
        rec.residual_mean[j] += m.empty() ? 0.0 : mean / static_cast<double>(m.size());
      }
      rec.mean_aoi += g.mean_aoi;
      rec.lagrangian += g.loss;
      ++batches;
      ++step;
    }
    const double nb = static_cast<double>(batches);
    rec.mean_aoi /= nb;
    rec.lagrangian /= nb;
    for (std::size_t j = 0; j < kNumFamilies; ++j) {
      rec.residual_mean[j] /= nb;
      rec.mu_norm[j] = mu.norm(j);
    }
    log.epochs.push_back(rec);
  }
  return {std::move(mlp), std::move(mu), std::move(log)};
}

Evaluation evaluate_decisions(const Scenario& sc, std::span<const FadingDraw> draws,
                              std::span<const Decision> decisions, C1Form form) {
  if (draws.size() != decisions.size() || draws.empty()) {
    throw ArgumentError("need one decision per draw");
  }
  ResidualAccumulator acc;
  double aoi = 0.0;
  for (std::size_t k = 0; k < draws.size(); ++k) {
    aoi += total_expected_aoi_unchecked(decisions[k].probs.p);
    acc.add(residuals(sc, draws[k], decisions[k], form));
  }
  return {aoi / static_cast<double>(draws.size()), acc.summary()};
}

Evaluation evaluate(const Mlp& mlp, const Dataset& dataset, C1Form form) {
  std::vector<const FadingDraw*> all;
  for (const auto& d : dataset.draws) all.push_back(&d);
  const auto decisions = forward_batch(mlp, dataset.scenario, feature_matrix(dataset.scenario, all));
  return evaluate_decisions(dataset.scenario, dataset.draws, decisions, form);
}

}  // namespace aoiopt
