#include <gtest/gtest.h>

#include <sstream>

#include "aoiopt/errors.hpp"
#include "aoiopt/trainer.hpp"
#include "support.hpp"

using namespace aoiopt;

namespace {

Dataset desk_data(std::size_t n = 40) {
  return make_dataset(generate_scenario(GenConfig::desk(), 31), n, 32);
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 4;
  c.batch_size = 10;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(TrainConfig, DefaultsAndValidation) {
  const TrainConfig c;
  EXPECT_DOUBLE_EQ(c.lr_primal, 1e-3);
  EXPECT_DOUBLE_EQ(c.lr_dual, 0.1);
  EXPECT_EQ(c.batch_size, 50u);
  EXPECT_EQ(c.epochs, 150u);
  EXPECT_EQ(c.c1_form, C1Form::kRateFloor);
  TrainConfig bad = c;
  bad.lr_primal = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.lr_dual = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(TrainConfig, JsonAndHash) {
  TrainConfig c = quick_config();
  c.c1_form = C1Form::kScaledRate;
  const TrainConfig back = nlohmann::json(c).get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
  const std::string h = config_hash(c);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, config_hash(back));
  c.seed += 1;
  EXPECT_NE(h, config_hash(c));
  EXPECT_THROW(nlohmann::json({{"c1_form", "bogus"}}).get<TrainConfig>(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"epochs", "many"}}).get<TrainConfig>(), ConfigError);
}

TEST(Trainer, DeterministicLogsAndModels) {
  const Dataset ds = desk_data();
  const auto sizes = layer_sizes_for(ds.scenario, {16});
  const TrainResult a = train_one(Mlp::init(sizes, 1), ds, quick_config());
  const TrainResult b = train_one(Mlp::init(sizes, 1), ds, quick_config());
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.multipliers, b.multipliers);
  std::ostringstream sa, sb;
  a.log.write_csv(sa);
  b.log.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  ASSERT_EQ(a.log.epochs.size(), 4u);
  EXPECT_EQ(a.log.epochs.back().epoch, 4u);
  EXPECT_TRUE(a.multipliers.nonnegative());
}

TEST(Trainer, LagrangianDecreases) {
  const Dataset ds = desk_data(100);
  TrainConfig c = quick_config();
  c.epochs = 15;
  const TrainResult r = train_one(Mlp::init(layer_sizes_for(ds.scenario, {32, 32}), 2), ds, c);
  EXPECT_LT(r.log.epochs.back().lagrangian, r.log.epochs.front().lagrangian);
  EXPECT_LT(r.log.epochs.back().mean_aoi, r.log.epochs.front().mean_aoi);
}

TEST(Trainer, ZeroDualRateFreezesMultipliers) {
  const Dataset ds = desk_data(20);
  TrainConfig c = quick_config();
  c.lr_dual = 0.0;
  c.mu_init = 0.25;
  const TrainResult r = train_one(Mlp::init(layer_sizes_for(ds.scenario, {8}), 3), ds, c);
  EXPECT_EQ(r.multipliers, Multipliers::filled(ds.scenario, 0.25));
}

TEST(Trainer, NonFiniteLossRaisesTrainingError) {
  // A rate floor near the double range overflows the penalty on the first batch.
  GenConfig g = GenConfig::desk();
  g.rate_min_bps = 1e300;
  const Dataset ds = make_dataset(generate_scenario(g, 31), 20, 32);
  TrainConfig c = quick_config();
  c.mu_init = 1e10;
  try {
    train_one(Mlp::init(layer_sizes_for(ds.scenario, {8}), 3), ds, c);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(Trainer, RejectsMismatchedNetwork) {
  const Dataset ds = desk_data(10);
  EXPECT_THROW(train_one(Mlp::init({5, 4, 3}, 1), ds, quick_config()), ArgumentError);
}

TEST(TrainLog, CsvLayout) {
  const std::string header = TrainLog::csv_header();
  EXPECT_EQ(header.rfind("epoch,mean_aoi,lagrangian,residual_c1_mean", 0), 0u);
  EXPECT_NE(header.find("residual_c7_mean,mu1_norm"), std::string::npos);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 16);
  TrainLog log;
  EpochRecord r;
  r.epoch = 3;
  r.mean_aoi = 0.1;
  log.epochs.push_back(r);
  std::ostringstream out;
  log.write_csv(out, 2);
  const std::string line = out.str();
  EXPECT_EQ(line.rfind("2,3,0.10000000000000001,0,", 0), 0u);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 17);
}

TEST(Evaluate, MatchesPerDrawComputation) {
  const Dataset ds = desk_data(5);
  const Mlp m = Mlp::init(layer_sizes_for(ds.scenario, {8}), 4);
  const Evaluation ev = evaluate(m, ds);
  double aoi = 0.0;
  double worst = 0.0;
  for (const auto& d : ds.draws) {
    const Decision dec = forward(m, ds.scenario, make_features(ds.scenario, d));
    aoi += total_expected_aoi(dec.probs);
    worst = std::max(worst, residuals(ds.scenario, d, dec).max());
  }
  EXPECT_LE(testsupport::rel_diff(ev.mean_aoi, aoi / 5.0), 1e-12);
  EXPECT_DOUBLE_EQ(ev.residuals.worst(), worst);
}
