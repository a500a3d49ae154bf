#include <gtest/gtest.h>

#include <filesystem>

#include "aoiopt/errors.hpp"
#include "aoiopt/gradcheck.hpp"
#include "aoiopt/mlp.hpp"
#include "support.hpp"

using namespace aoiopt;
using namespace testsupport;

namespace {

struct Fixture {
  Scenario sc = generate_scenario(GenConfig::desk(), 23);
  Dataset ds = make_dataset(sc, 6, 24);
  std::vector<const FadingDraw*> batch() const {
    std::vector<const FadingDraw*> b;
    for (const auto& d : ds.draws) b.push_back(&d);
    return b;
  }
};

}  // namespace

TEST(Mlp, WidthsFollowScenario) {
  Fixture f;
  EXPECT_EQ(feature_width(f.sc), 3u * 6u + 6u * 2u + 6u * 2u * 10u);
  EXPECT_EQ(decision_width(f.sc), 2u * 2u * 10u + 6u * 2u * 10u);
  const auto sizes = layer_sizes_for(f.sc, desk_hidden_layers());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{150, 64, 128, 256, 512, 160}));
  EXPECT_EQ(paper_hidden_layers(), (std::vector<std::size_t>{600, 1200, 2400, 4800}));
  const Mlp m = Mlp::init({4, 3, 2}, 1);
  EXPECT_EQ(m.parameter_count(), 4u * 3u + 3u + 3u * 2u + 2u);
}

TEST(Mlp, InitIsSeededFanInUniform) {
  const Mlp a = Mlp::init({50, 40, 30}, 7);
  EXPECT_EQ(a, Mlp::init({50, 40, 30}, 7));
  EXPECT_FALSE(a == Mlp::init({50, 40, 30}, 8));
  const double limit0 = std::sqrt(6.0 / 50.0);
  EXPECT_LE(a.weights[0].cwiseAbs().maxCoeff(), limit0);
  EXPECT_GT(a.weights[0].cwiseAbs().maxCoeff(), 0.9 * limit0);
  EXPECT_EQ(a.biases[1].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(Mlp::init({5}, 1), ArgumentError);
  EXPECT_THROW(Mlp::init({5, 0, 3}, 1), ArgumentError);
}

TEST(Mlp, FeaturesAreNormalized) {
  Fixture f;
  const auto theta = make_features(f.sc, f.ds.draws[0]);
  ASSERT_EQ(theta.size(), feature_width(f.sc));
  EXPECT_DOUBLE_EQ(theta[0], f.sc.device_pos[0].x / f.sc.area_x);
  EXPECT_DOUBLE_EQ(theta[1], f.sc.device_pos[0].y / f.sc.area_y);
  double pmax = 0.0, bmax = 0.0;
  for (std::size_t k = 12; k < 18; ++k) pmax = std::max(pmax, theta[k]);
  for (std::size_t k = 18; k < 30; ++k) bmax = std::max(bmax, theta[k]);
  EXPECT_DOUBLE_EQ(pmax, 1.0);
  EXPECT_DOUBLE_EQ(bmax, 1.0);
  EXPECT_DOUBLE_EQ(theta[30], f.ds.draws[0].gain_sq.flat()[0]);
  EXPECT_DOUBLE_EQ(theta.back(), f.ds.draws[0].gain_sq.flat().back());
}

TEST(Mlp, OutputsStayInsideBoxes) {
  Fixture f;
  const Mlp m = Mlp::init(layer_sizes_for(f.sc, {32, 32}), 3);
  const auto b = f.batch();
  for (const Decision& d : forward_batch(m, f.sc, feature_matrix(f.sc, b))) {
    for (double x : d.path.xs.flat()) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, f.sc.area_x);
    }
    for (double y : d.path.ys.flat()) {
      EXPECT_GE(y, 0.0);
      EXPECT_LT(y, f.sc.area_y);
    }
    for (double p : d.probs.p.flat()) {
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
    }
  }
}

TEST(Mlp, ZeroNetworkDecodesToCornerAndHalf) {
  Fixture f;
  const Mlp m = Mlp::zeros(layer_sizes_for(f.sc, {8}));
  const Decision d = forward(m, f.sc, make_features(f.sc, f.ds.draws[0]));
  for (double x : d.path.xs.flat()) EXPECT_EQ(x, 0.0);
  for (double p : d.probs.p.flat()) EXPECT_EQ(p, 0.5);
}

TEST(Mlp, TapeForwardMatchesPlainForward) {
  Fixture f;
  const Mlp m = Mlp::init(layer_sizes_for(f.sc, {24, 16}), 5);
  const auto b = f.batch();
  const Mat features = feature_matrix(f.sc, b);
  const auto plain = forward_batch(m, f.sc, features);
  Tape tape;
  const auto params = bind_parameters(tape, m);
  const auto nodes = forward_on_tape(tape, params, tape.constant(features), f.sc);
  for (std::size_t r = 0; r < b.size(); ++r) {
    for (std::size_t k = 0; k < plain[r].path.xs.size(); ++k) {
      EXPECT_LE(rel_diff(nodes.xs.value()(static_cast<Index>(r), static_cast<Index>(k)),
                         plain[r].path.xs.flat()[k]), 1e-12);
      EXPECT_LE(rel_diff(nodes.ys.value()(static_cast<Index>(r), static_cast<Index>(k)),
                         plain[r].path.ys.flat()[k]), 1e-12);
    }
    for (std::size_t k = 0; k < plain[r].probs.p.size(); ++k) {
      EXPECT_LE(rel_diff(nodes.p.value()(static_cast<Index>(r), static_cast<Index>(k)),
                         plain[r].probs.p.flat()[k]), 1e-12);
    }
  }
}

TEST(Mlp, WeightGradientsReportBatchMeans) {
  Fixture f;
  const Mlp m = Mlp::init(layer_sizes_for(f.sc, {16}), 9);
  const auto b = f.batch();
  const Multipliers mu = Multipliers::filled(f.sc, 0.0);
  const WeightGradients g = weight_gradients(m, LagrangianGraph(f.sc, C1Form::kRateFloor), b, mu);
  double aoi = 0.0;
  for (const auto& d : forward_batch(m, f.sc, feature_matrix(f.sc, b))) aoi += total_expected_aoi(d.probs);
  aoi /= static_cast<double>(b.size());
  EXPECT_LE(rel_diff(g.mean_aoi, aoi), 1e-12);
  EXPECT_LE(rel_diff(g.loss, aoi), 1e-12);
  ASSERT_EQ(g.d_weights.size(), 2u);
  EXPECT_EQ(g.d_weights[0].rows(), static_cast<Index>(feature_width(f.sc)));
  EXPECT_EQ(g.residual_means[kAssociation].size(), family_sizes(f.sc)[kAssociation]);
}

TEST(Mlp, WeightGradientMatchesFiniteDifferences) {
  Fixture f;
  const auto b = f.batch();
  const std::vector<const FadingDraw*> two(b.begin(), b.begin() + 2);
  Rng rng(41);
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; checked < 2 && seed < 40; ++seed) {
    const Mlp m = Mlp::init(layer_sizes_for(f.sc, {6, 5}), seed);
    if (network_kink_margin(m, f.sc, two, C1Form::kRateFloor) < 1e-3) continue;
    const Multipliers mu = random_multipliers(f.sc, rng);
    const auto cmp = check_weight_gradient(m, f.sc, two, mu, C1Form::kRateFloor);
    EXPECT_TRUE(cmp.passed()) << "worst rel " << cmp.worst_rel << " worst abs " << cmp.worst_abs;
    ++checked;
  }
  EXPECT_EQ(checked, 2u);
}

TEST(Mlp, CheckpointRoundTripIsExact) {
  Fixture f;
  const Mlp m = Mlp::init(layer_sizes_for(f.sc, {12, 7}), 77);
  const auto path = std::filesystem::temp_directory_path() / "aoiopt_ckpt.json";
  save_checkpoint(path.string(), m, "0123456789abcdef");
  std::string hash;
  const Mlp back = load_checkpoint(path.string(), &hash);
  EXPECT_EQ(back, m);
  EXPECT_EQ(hash, "0123456789abcdef");
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path.string()), ConfigError);
}

TEST(Mlp, WidthMismatchIsRejected) {
  Fixture f;
  const Mlp m = Mlp::init({10, 4, 160}, 1);
  EXPECT_THROW(forward(m, f.sc, make_features(f.sc, f.ds.draws[0])), ArgumentError);
}
