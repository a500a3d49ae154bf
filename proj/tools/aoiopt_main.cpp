#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "aoiopt/cli.hpp"

int main(int argc, char** argv) {
  using namespace aoiopt::cli;
  CLI::App app{"Expected-AoI minimization for multi-UAV data collection"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a scenario with train and test datasets");
  g->add_option("--config", gen.config_path, "JSON file whose \"gen\" object overrides the preset");
  g->add_option("--preset", gen.preset, "desk or paper-scale")
      ->check(CLI::IsMember({"desk", "paper-scale"}))
      ->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--train-draws", gen.train_draws)->capture_default_str();
  g->add_option("--test-draws", gen.test_draws)->capture_default_str();
  g->add_option("--out-dir", gen.out_dir)->capture_default_str();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "train an ensemble of policy networks");
  t->add_option("--dataset", train.dataset_path)->required();
  t->add_option("--config", train.config_path, "JSON file with \"train\" and \"hidden_layers\"");
  t->add_option("--preset", train.preset, "hidden-layer preset: desk or paper-scale")
      ->check(CLI::IsMember({"desk", "paper-scale"}))
      ->capture_default_str();
  t->add_option("--hidden", train.hidden, "hidden layer widths")->delimiter(',');
  t->add_option("--members", train.members)->capture_default_str();
  t->add_option("--seed", train.seed);
  t->add_option("--weighting", train.weighting,
                 "default: paper-literal with the paper-scale preset, inverse-aoi otherwise")
      ->check(CLI::IsMember({"paper-literal", "inverse-aoi", "uniform"}));
  t->add_option("--c1-form", train.c1_form)
      ->check(CLI::IsMember({"constraint-6b", "lagrangian-paper"}));
  t->add_option("--jobs", train.jobs)->capture_default_str();
  t->add_option("--lr-primal", train.lr_primal);
  t->add_option("--lr-dual", train.lr_dual);
  t->add_option("--batch", train.batch);
  t->add_option("--epochs", train.epochs);
  t->add_option("--out-dir", train.out_dir)->capture_default_str();

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint on a test dataset");
  e->add_option("--checkpoint", eval.checkpoint_dir)->required();
  e->add_option("--dataset", eval.dataset_path)->required();
  e->add_option("--weighting", eval.weighting)
      ->check(CLI::IsMember({"paper-literal", "inverse-aoi", "uniform"}));
  e->add_option("--sweep-members", eval.sweep, "ensemble sizes, e.g. 1..8");
  e->add_option("--baseline-iters", eval.baseline_iters)->capture_default_str();
  e->add_option("--baseline-jitter", eval.baseline_jitter, "perturbation of the baseline's initial p")
      ->capture_default_str();
  e->add_option("--seed", eval.seed, "seed for the baseline perturbation")->capture_default_str();
  bool no_baseline = false;
  e->add_flag("--no-baseline", no_baseline, "skip the direct primal-dual baseline");
  e->add_option("--out-dir", eval.out_dir)->capture_default_str();

  ValidateOptions val;
  auto* v = app.add_subcommand("validate", "Monte-Carlo and gradient checks");
  v->add_option("--dataset", val.dataset_path)->required();
  v->add_option("--seed", val.seed)->capture_default_str();
  v->add_option("--samples", val.samples)->capture_default_str();
  v->add_option("--tensors", val.tensors)->capture_default_str();
  v->add_flag("--gradcheck", val.gradcheck);
  v->add_option("--gradcheck-cases", val.gradcheck_cases)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsageError;
  }

  if (*g) return cmd_gen(gen, std::cerr);
  if (*t) return cmd_train(train, std::cerr);
  if (*e) {
    eval.baseline = !no_baseline;
    return cmd_eval(eval, std::cerr);
  }
  return cmd_validate(val, std::cerr);
}
