#include "aoiopt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "aoiopt/baseline.hpp"
#include "aoiopt/ensemble.hpp"
#include "aoiopt/errors.hpp"
#include "aoiopt/gradcheck.hpp"
#include "aoiopt/report.hpp"
#include "aoiopt/rng.hpp"

namespace aoiopt::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_config(const std::optional<std::string>& path) {
  if (!path) return nlohmann::json::object();
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config file " + *path);
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file " + *path + ": " + e.what());
  }
}

GenConfig gen_preset(const std::string& name) {
  if (name == "paper-scale") return GenConfig::paper_scale();
  if (name == "desk") return GenConfig::desk();
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::size_t> hidden_preset(const std::string& name) {
  if (name == "paper-scale") return paper_hidden_layers();
  if (name == "desk") return desk_hidden_layers();
  throw ConfigError("unknown preset '" + name + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

Evaluation mean_of(const std::vector<Evaluation>& evals) {
  Evaluation m;
  for (const auto& e : evals) {
    m.mean_aoi += e.mean_aoi;
    for (std::size_t j = 0; j < kNumFamilies; ++j) {
      m.residuals.mean[j] += e.residuals.mean[j];
      m.residuals.max[j] = std::max(m.residuals.max[j], e.residuals.max[j]);
    }
  }
  const double n = static_cast<double>(evals.size());
  m.mean_aoi /= n;
  for (double& v : m.residuals.mean) v /= n;
  return m;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
  } catch (const ArgumentError& e) {
    log << "error: " << e.what() << '\n';
  }
  return kUsageError;
}

}  // namespace

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto parse_one = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v == 0) {
      throw ConfigError("bad range '" + text + "': expected positive integers like 1..8");
    }
    return static_cast<std::size_t>(v);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto n = parse_one(text);
    return {n, n};
  }
  const auto lo = parse_one(text.substr(0, dots));
  const auto hi = parse_one(text.substr(dots + 2));
  if (lo > hi) throw ConfigError("bad range '" + text + "': start exceeds end");
  return {lo, hi};
}

int cmd_gen(const GenOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    GenConfig cfg = gen_preset(opt.preset);
    const auto file = read_config(opt.config_path);
    if (file.contains("gen")) from_json(file.at("gen"), cfg);
    cfg.validate();
    if (opt.train_draws == 0 || opt.test_draws == 0) {
      throw ConfigError("train and test draw counts must be positive");
    }
    const Scenario sc = generate_scenario(cfg, derive_seed(opt.seed, 0));
    const Dataset train = make_dataset(sc, opt.train_draws, derive_seed(opt.seed, 1));
    const Dataset test = make_dataset(sc, opt.test_draws, derive_seed(opt.seed, 2));
    make_dir(opt.out_dir);
    const fs::path dir(opt.out_dir);
    {
      auto out = open_out(dir / "scenario.json");
      out << nlohmann::json(sc).dump(2) << '\n';
    }
    save_dataset((dir / "train.json").string(), train);
    save_dataset((dir / "test.json").string(), test);
    log << "scenario I=" << sc.num_devices << " U=" << sc.num_uavs << " T=" << sc.horizon
        << ", " << train.draws.size() << " train and " << test.draws.size()
        << " test draws written to " << dir.string() << '\n';
    return kOk;
  });
}

int cmd_train(const TrainOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    const auto file = read_config(opt.config_path);
    TrainConfig cfg;
    std::vector<std::size_t> hidden = hidden_preset(opt.preset);
    try {
      if (file.contains("train")) from_json(file.at("train"), cfg);
      if (file.contains("hidden_layers")) {
        hidden = file.at("hidden_layers").get<std::vector<std::size_t>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed train config: ") + e.what());
    }
    if (opt.hidden) hidden = *opt.hidden;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.c1_form) cfg.c1_form = parse_c1_form(*opt.c1_form);
    if (opt.lr_primal) cfg.lr_primal = *opt.lr_primal;
    if (opt.lr_dual) cfg.lr_dual = *opt.lr_dual;
    if (opt.batch) cfg.batch_size = *opt.batch;
    if (opt.epochs) cfg.epochs = *opt.epochs;
    cfg.validate();
    const Weighting weighting =
        opt.weighting ? parse_weighting(*opt.weighting)
                      : (opt.preset == "paper-scale" ? Weighting::kPaperLiteral : Weighting::kInverseAoi);
    if (opt.members == 0) throw ConfigError("--members must be >= 1");
    if (opt.jobs == 0) throw ConfigError("--jobs must be >= 1");

    const Dataset ds = load_dataset(opt.dataset_path);
    if (ds.draws.size() < opt.members) {
      throw ConfigError("dataset has fewer draws than ensemble members");
    }
    log << "training " << opt.members << " member(s) on " << ds.draws.size() << " draws\n";
    const Ensemble ens = train_ensemble(ds, opt.members, cfg, hidden, weighting, opt.jobs);
    save_ensemble(opt.out_dir, ens);
    auto csv = open_out(fs::path(opt.out_dir) / "train_log.csv");
    csv << "member," << TrainLog::csv_header() << '\n';
    for (std::size_t k = 0; k < ens.members.size(); ++k) {
      ens.members[k].log.write_csv(csv, static_cast<long>(k));
    }
    for (std::size_t k = 0; k < ens.members.size(); ++k) {
      const auto& last = ens.members[k].log.epochs.back();
      log << "member " << k << ": final epoch mean AoI " << format_double(last.mean_aoi) << '\n';
    }
    return kOk;
  });
}

int cmd_eval(const EvalOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    Ensemble ens = load_ensemble(opt.checkpoint_dir);
    if (opt.weighting) ens.weighting = parse_weighting(*opt.weighting);
    std::optional<std::pair<std::size_t, std::size_t>> sweep;
    if (opt.sweep) {
      sweep = parse_range(*opt.sweep);
      if (sweep->second > ens.members.size()) {
        throw ConfigError("sweep exceeds the " + std::to_string(ens.members.size()) +
                          " members in the checkpoint");
      }
    }
    const Dataset ds = load_dataset(opt.dataset_path);
    const C1Form form = ens.config.c1_form;

    const EnsembleEvaluation ev = evaluate_ensemble(ens, ds, form);
    std::vector<ResultRow> rows;
    rows.push_back({"ensemble", ev.ensemble});
    for (std::size_t k = 0; k < ev.members.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "member_%02zu", k);
      rows.push_back({name, ev.members[k]});
    }
    rows.push_back({"member_mean", mean_of(ev.members)});

    if (opt.baseline) {
      DirectSolverConfig bcfg;
      bcfg.iters = opt.baseline_iters;
      bcfg.c1_form = form;
      std::vector<Decision> decisions;
      decisions.reserve(ds.draws.size());
      if (!(opt.baseline_jitter >= 0.0 && opt.baseline_jitter < 0.5)) {
        throw ConfigError("--baseline-jitter must lie in [0, 0.5)");
      }
      std::uniform_real_distribution<double> jitter(-opt.baseline_jitter, opt.baseline_jitter);
      for (std::size_t n = 0; n < ds.draws.size(); ++n) {
        Decision init = default_initial_decision(ds.scenario);
        Rng rng(derive_seed(opt.seed, n));
        for (double& p : init.probs.p.flat()) p += jitter(rng);
        decisions.push_back(solve_direct(ds.scenario, ds.draws[n], init, bcfg).decision);
      }
      rows.push_back({"baseline_direct", evaluate_decisions(ds.scenario, ds.draws, decisions, form)});
    }

    make_dir(opt.out_dir);
    {
      auto out = open_out(fs::path(opt.out_dir) / "results.csv");
      write_results_csv(out, rows);
    }
    for (const auto& r : rows) {
      log << r.method << ": mean AoI " << format_double(r.eval.mean_aoi) << ", worst residual "
          << format_double(r.eval.residuals.worst()) << '\n';
    }

    if (sweep) {
      std::vector<SweepRow> srows;
      for (std::size_t n = sweep->first; n <= sweep->second; ++n) {
        const EnsembleEvaluation sev = evaluate_ensemble(ens.prefix(n), ds, form);
        srows.push_back({n, sev.ensemble.mean_aoi, mean_of(sev.members).mean_aoi,
                         sev.ensemble.residuals.worst()});
      }
      auto out = open_out(fs::path(opt.out_dir) / "sweep.csv");
      write_sweep_csv(out, to_string(ens.weighting), srows);
    }
    return kOk;
  });
}

int cmd_validate(const ValidateOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    if (opt.samples < 2) throw ConfigError("--samples must be >= 2");
    const Dataset ds = load_dataset(opt.dataset_path);
    const Scenario& sc = ds.scenario;
    Rng rng(opt.seed);
    bool ok = true;

    // Every entry is compared at once, so the per-entry z threshold is Bonferroni
    // corrected for a family-wise false alarm rate of alpha.
    const double alpha = 1e-3;
    const std::size_t m = opt.tensors * sc.num_devices * sc.num_uavs * sc.horizon;
    const double z_max = std::sqrt(2.0 * std::log(2.0 * static_cast<double>(m) / alpha));
    double worst_z = 0.0;
    std::size_t degenerate_mismatch = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n = 0; n < opt.tensors; ++n) {
      auto probs = SelectionProbs::constant(sc.num_devices, sc.num_uavs, sc.horizon, 0.0);
      for (double& p : probs.p.flat()) p = unit(rng);
      const Array3<double> exact = expected_aoi(probs);
      const McEstimate mc = mc_expected_aoi(probs, opt.samples, rng);
      for (std::size_t k = 0; k < exact.size(); ++k) {
        const double diff = std::abs(mc.mean.flat()[k] - exact.flat()[k]);
        const double se = mc.std_error.flat()[k];
        if (se > 0.0) {
          worst_z = std::max(worst_z, diff / se);
        } else if (diff > 1e-12) {
          ++degenerate_mismatch;
        }
      }
    }
    const bool mc_ok = worst_z <= z_max && degenerate_mismatch == 0;
    ok = ok && mc_ok;
    log << "mc-aoi: " << (mc_ok ? "PASS" : "FAIL") << " max deviation " << format_double(worst_z)
        << " stderr (threshold " << format_double(z_max) << ", " << m << " entries, "
        << opt.samples << " samples)\n";

    if (opt.gradcheck) {
      const std::size_t rows = std::min<std::size_t>(2, ds.draws.size());
      std::vector<const FadingDraw*> batch;
      for (std::size_t r = 0; r < rows; ++r) batch.push_back(&ds.draws[r]);
      const std::vector<std::size_t> hidden{8, 8};
      GradComparison dec, wgt;
      std::size_t done = 0;
      for (std::size_t attempt = 0; done < opt.gradcheck_cases && attempt < 50 * opt.gradcheck_cases;
           ++attempt) {
        const std::uint64_t case_seed = derive_seed(opt.seed, 1000 + attempt);
        Rng crng(case_seed);
        Multipliers mu = Multipliers::filled(sc, 0.0);
        for (std::size_t j = 0; j < kNumFamilies; ++j) {
          // Rate residuals are measured in bit/s, so their weights are kept small.
          const double scale = j == kRate ? 1e-5 : 1.0;
          for (double& v : mu.mu[j]) v = scale * unit(crng);
        }
        Decision d{UavPath::constant(sc.num_uavs, sc.horizon, 0.0, 0.0),
                   SelectionProbs::constant(sc.num_devices, sc.num_uavs, sc.horizon, 0.0)};
        for (double& x : d.path.xs.flat()) x = 1.1 * sc.area_x * unit(crng);
        for (double& y : d.path.ys.flat()) y = 1.1 * sc.area_y * unit(crng);
        for (double& p : d.probs.p.flat()) p = 1.2 * unit(crng);
        const Mlp mlp = Mlp::init(layer_sizes_for(sc, hidden), case_seed);
        if (decision_kink_margin(sc, ds.draws[0], d, C1Form::kRateFloor) < 1e-3) continue;
        if (network_kink_margin(mlp, sc, batch, C1Form::kRateFloor) < 1e-3) continue;
        const auto a = check_decision_gradient(sc, ds.draws[0], d, mu, C1Form::kRateFloor);
        const auto b = check_weight_gradient(mlp, sc, batch, mu, C1Form::kRateFloor);
        dec.worst_rel = std::max(dec.worst_rel, a.worst_rel);
        dec.worst_abs = std::max(dec.worst_abs, a.worst_abs);
        dec.compared += a.compared;
        dec.failures += a.failures;
        wgt.worst_rel = std::max(wgt.worst_rel, b.worst_rel);
        wgt.worst_abs = std::max(wgt.worst_abs, b.worst_abs);
        wgt.compared += b.compared;
        wgt.failures += b.failures;
        ++done;
      }
      const bool grad_ok = done == opt.gradcheck_cases && dec.passed() && wgt.passed();
      ok = ok && grad_ok;
      log << "gradcheck: " << (grad_ok ? "PASS" : "FAIL") << " " << done << " case(s)\n"
          << "  decision: worst relative error " << format_double(dec.worst_rel)
          << ", worst absolute error " << format_double(dec.worst_abs) << " over "
          << dec.compared << " entries\n"
          << "  weights:  worst relative error " << format_double(wgt.worst_rel)
          << ", worst absolute error " << format_double(wgt.worst_abs) << " over "
          << wgt.compared << " entries\n";
    }
    return ok ? kOk : kCheckFailed;
  });
}

}  // namespace aoiopt::cli
