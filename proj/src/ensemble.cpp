#include "aoiopt/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

std::string member_file(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%02zu.json", k);
  return buf;
}

}  // namespace

std::string to_string(Weighting w) {
  switch (w) {
    case Weighting::kPaperLiteral:
      return "paper-literal";
    case Weighting::kInverseAoi:
      return "inverse-aoi";
    case Weighting::kUniform:
      return "uniform";
  }
  return "unknown";
}

Weighting parse_weighting(std::string_view name) {
  if (name == "paper-literal") return Weighting::kPaperLiteral;
  if (name == "inverse-aoi") return Weighting::kInverseAoi;
  if (name == "uniform") return Weighting::kUniform;
  throw ConfigError("unknown weighting '" + std::string(name) + "'");
}

std::vector<double> aggregation_weights(std::span<const double> member_aoi, Weighting scheme) {
  const std::size_t n = member_aoi.size();
  if (n == 0) throw ArgumentError("no members to weight");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (scheme == Weighting::kUniform) return w;

  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::max(member_aoi[k], 1e-9);
    w[k] = scheme == Weighting::kPaperLiteral ? a : 1.0 / a;
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

Ensemble Ensemble::prefix(std::size_t n) const {
  if (n == 0 || n > members.size()) throw ArgumentError("prefix size out of range");
  Ensemble e{{members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n)}, weighting,
             master_seed, config};
  return e;
}

Ensemble train_ensemble(const Dataset& dataset, std::size_t n_members, const TrainConfig& cfg,
                        const std::vector<std::size_t>& hidden, Weighting weighting,
                        std::size_t jobs) {
  if (n_members == 0) throw ArgumentError("ensemble needs at least one member");
  const auto shards = split_dataset(dataset, n_members);
  const auto sizes = layer_sizes_for(dataset.scenario, hidden);

  Ensemble ens;
  ens.weighting = weighting;
  ens.master_seed = cfg.seed;
  ens.config = cfg;
  ens.members.resize(n_members);

  std::size_t begin = 0;
  for (std::size_t k = 0; k < n_members; ++k) {
    ens.members[k].shard_begin = begin;
    begin += shards[k].draws.size();
    ens.members[k].shard_end = begin;
  }

  auto train_member = [&](std::size_t k) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = derive_seed(cfg.seed, k + n_members);
    TrainResult r = train_one(Mlp::init(sizes, derive_seed(cfg.seed, k)), shards[k], member_cfg);
    auto& m = ens.members[k];
    m.model = std::move(r.model);
    m.multipliers = std::move(r.multipliers);
    m.log = std::move(r.log);
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n_members);
  if (workers == 1) {
    for (std::size_t k = 0; k < n_members; ++k) train_member(k);
    return ens;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n_members; k = next++) {
        try {
          train_member(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return ens;
}

Decision aggregate_decisions(std::span<const Decision> member_decisions, Weighting scheme) {
  if (member_decisions.empty()) throw ArgumentError("no member decisions");
  std::vector<double> aoi;
  aoi.reserve(member_decisions.size());
  for (const auto& d : member_decisions) {
    if (d.probs.p.dims() != member_decisions.front().probs.p.dims() ||
        d.path.xs.dims() != member_decisions.front().path.xs.dims() ||
        d.path.ys.dims() != member_decisions.front().path.ys.dims()) {
      throw ArgumentError("member decisions have different shapes");
    }
    aoi.push_back(total_expected_aoi(d.probs));
  }
  const auto w = aggregation_weights(aoi, scheme);

  Decision out = member_decisions.front();
  auto blend = [&](std::span<double> dst, auto&& field) {
    std::fill(dst.begin(), dst.end(), 0.0);
    for (std::size_t k = 0; k < member_decisions.size(); ++k) {
      const std::span<const double> src = field(member_decisions[k]);
      for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += w[k] * src[e];
    }
  };
  blend(out.path.xs.flat(), [](const Decision& d) { return d.path.xs.flat(); });
  blend(out.path.ys.flat(), [](const Decision& d) { return d.path.ys.flat(); });
  blend(out.probs.p.flat(), [](const Decision& d) { return d.probs.p.flat(); });
  return out;
}

Decision aggregate(const Ensemble& ens, const Scenario& sc, std::span<const double> theta) {
  std::vector<Decision> outs;
  outs.reserve(ens.members.size());
  for (const auto& m : ens.members) outs.push_back(forward(m.model, sc, theta));
  return aggregate_decisions(outs, ens.weighting);
}

EnsembleEvaluation evaluate_ensemble(const Ensemble& ens, const Dataset& dataset, C1Form form) {
  if (ens.members.empty()) throw ArgumentError("empty ensemble");
  const Scenario& sc = dataset.scenario;
  std::vector<const FadingDraw*> all;
  for (const auto& d : dataset.draws) all.push_back(&d);
  const Mat theta = feature_matrix(sc, all);

  std::vector<std::vector<Decision>> per_member;
  EnsembleEvaluation out;
  for (const auto& m : ens.members) {
    per_member.push_back(forward_batch(m.model, sc, theta));
    out.members.push_back(evaluate_decisions(sc, dataset.draws, per_member.back(), form));
  }
  std::vector<Decision> combined;
  combined.reserve(dataset.draws.size());
  std::vector<Decision> row(ens.members.size());
  for (std::size_t n = 0; n < dataset.draws.size(); ++n) {
    for (std::size_t k = 0; k < ens.members.size(); ++k) row[k] = per_member[k][n];
    combined.push_back(aggregate_decisions(row, ens.weighting));
  }
  out.ensemble = evaluate_decisions(sc, dataset.draws, combined, form);
  return out;
}

void save_ensemble(const std::string& dir, const Ensemble& ens) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string hash = config_hash(ens.config);
  nlohmann::json manifest{{"format", "aoiopt-ensemble"},
                          {"version", 1},
                          {"weighting", to_string(ens.weighting)},
                          {"master_seed", ens.master_seed},
                          {"train_config", ens.config},
                          {"config_hash", hash}};
  auto& members = manifest["members"] = nlohmann::json::array();
  for (std::size_t k = 0; k < ens.members.size(); ++k) {
    const auto& m = ens.members[k];
    save_checkpoint((fs::path(dir) / member_file(k)).string(), m.model, hash);
    members.push_back({{"file", member_file(k)},
                       {"shard", {m.shard_begin, m.shard_end}},
                       {"multipliers", m.multipliers.mu}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

Ensemble load_ensemble(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir);
  Ensemble ens;
  try {
    nlohmann::json manifest;
    in >> manifest;
    if (manifest.at("format").get<std::string>() != "aoiopt-ensemble" ||
        manifest.at("version").get<int>() != 1) {
      throw ConfigError("unsupported ensemble manifest in " + dir);
    }
    ens.weighting = parse_weighting(manifest.at("weighting").get<std::string>());
    ens.master_seed = manifest.at("master_seed").get<std::uint64_t>();
    ens.config = manifest.at("train_config").get<TrainConfig>();
    for (const auto& m : manifest.at("members")) {
      EnsembleMember member;
      member.model = load_checkpoint((fs::path(dir) / m.at("file").get<std::string>()).string());
      const auto shard = m.at("shard").get<std::vector<std::size_t>>();
      if (shard.size() != 2) throw ConfigError("bad shard range in manifest");
      member.shard_begin = shard[0];
      member.shard_end = shard[1];
      member.multipliers.mu =
          m.at("multipliers").get<std::array<std::vector<double>, kNumFamilies>>();
      ens.members.push_back(std::move(member));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed ensemble manifest: " + std::string(e.what()));
  }
  if (ens.members.empty()) throw ConfigError("ensemble manifest lists no members");
  for (const auto& m : ens.members) {
    if (m.model.layer_sizes != ens.members.front().model.layer_sizes) {
      throw ConfigError("ensemble members have different layer sizes");
    }
  }
  return ens;
}

}  // namespace aoiopt
