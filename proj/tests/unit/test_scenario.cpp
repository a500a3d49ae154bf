#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "aoiopt/errors.hpp"
#include "aoiopt/scenario.hpp"

using namespace aoiopt;

TEST(GenConfig, PaperScaleDefaults) {
  const GenConfig c = GenConfig::paper_scale();
  EXPECT_EQ(c.num_devices, 30u);
  EXPECT_EQ(c.num_uavs, 3u);
  EXPECT_EQ(c.horizon, 40u);
  EXPECT_DOUBLE_EQ(c.area_x, 1000.0);
  EXPECT_DOUBLE_EQ(c.area_y, 1000.0);
  EXPECT_DOUBLE_EQ(c.alt_min, 80.0);
  EXPECT_DOUBLE_EQ(c.alt_max, 100.0);
  EXPECT_DOUBLE_EQ(c.power_max_w, 1e-3);
  EXPECT_DOUBLE_EQ(c.bandwidth_min_hz, 1.5e9);
  EXPECT_DOUBLE_EQ(c.bandwidth_max_hz, 2.0e9);
  EXPECT_DOUBLE_EQ(c.noise_dbm, -120.0);
  EXPECT_DOUBLE_EQ(c.rate_min_bps, 150e3);
  EXPECT_EQ(c.uav_cap, 8u);
  EXPECT_DOUBLE_EQ(c.speed, 20.0);
  EXPECT_DOUBLE_EQ(c.interval_len, 30.0);
}

TEST(GenConfig, DeskPresetIsSmall) {
  const GenConfig c = GenConfig::desk();
  EXPECT_EQ(c.num_devices, 6u);
  EXPECT_EQ(c.num_uavs, 2u);
  EXPECT_EQ(c.horizon, 10u);
}

TEST(GenConfig, RejectsInvertedRanges) {
  GenConfig c = GenConfig::desk();
  c.alt_min = 120.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GenConfig::desk();
  c.bandwidth_min_hz = 3e9;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GenConfig::desk();
  c.horizon = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GenConfig::desk();
  c.speed = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(GenConfig, JsonOverridesOnlyGivenFields) {
  GenConfig c = GenConfig::desk();
  from_json(nlohmann::json{{"horizon", 7}, {"flight_budget", 99.0}}, c);
  EXPECT_EQ(c.horizon, 7u);
  EXPECT_EQ(c.num_devices, 6u);
  ASSERT_TRUE(c.flight_budget.has_value());
  EXPECT_DOUBLE_EQ(*c.flight_budget, 99.0);
  EXPECT_THROW(from_json(nlohmann::json{{"horizon", "ten"}}, c), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"speed", -1.0}}, c), ConfigError);
}

TEST(Scenario, NoiseConversion) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(-120.0), 1e-15);
  EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
}

TEST(Scenario, GeneratedValuesRespectRanges) {
  const GenConfig cfg = GenConfig::paper_scale();
  const Scenario sc = generate_scenario(cfg, 11);
  EXPECT_NO_THROW(sc.validate());
  for (const auto& p : sc.device_pos) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, cfg.area_x);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, cfg.area_y);
  }
  for (double h : sc.uav_alt) {
    EXPECT_GE(h, cfg.alt_min);
    EXPECT_LE(h, cfg.alt_max);
  }
  for (double p : sc.tx_power) {
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, cfg.power_max_w);
  }
  for (double b : sc.bandwidth.flat()) {
    EXPECT_GE(b, cfg.bandwidth_min_hz);
    EXPECT_LE(b, cfg.bandwidth_max_hz);
  }
  EXPECT_DOUBLE_EQ(sc.noise_var, 1e-15);
  EXPECT_DOUBLE_EQ(sc.flight_budget, 40.0 * 30.0);
}

TEST(Scenario, SameSeedSameScenario) {
  EXPECT_EQ(generate_scenario(GenConfig::desk(), 5), generate_scenario(GenConfig::desk(), 5));
  EXPECT_FALSE(generate_scenario(GenConfig::desk(), 5) == generate_scenario(GenConfig::desk(), 6));
}

TEST(Scenario, ValidateCatchesBrokenFields) {
  Scenario sc = generate_scenario(GenConfig::desk(), 1);
  Scenario bad = sc;
  bad.tx_power[0] = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = sc;
  bad.device_pos[0].x = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = sc;
  bad.uav_alt.pop_back();
  EXPECT_THROW(bad.validate(), ConfigError);
}

// E|h|^2 = 1 for any Rician factor, and E|h|^4 = (2 + 4K + K^2) / (K + 1)^2.
TEST(Fading, RicianMomentsMatchClosedForm) {
  Scenario sc = generate_scenario(GenConfig::desk(), 3);
  for (double k : {0.0, 3.0, 10.0}) {
    sc.rician_k = k;
    Rng rng(77);
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (int rep = 0; rep < 200; ++rep) {
      const FadingDraw d = sample_fading(sc, rng);
      for (double g : d.gain_sq.flat()) {
        s1 += g;
        s2 += g * g;
        ++n;
      }
    }
    const double mean = s1 / static_cast<double>(n);
    const double m2 = (2.0 + 4.0 * k + k * k) / ((k + 1.0) * (k + 1.0));
    const double se = std::sqrt((m2 - 1.0) / static_cast<double>(n));
    EXPECT_NEAR(mean, 1.0, 4.0 * se) << "K=" << k;
    EXPECT_NEAR(s2 / static_cast<double>(n), m2, 0.05 * m2) << "K=" << k;
  }
}

TEST(Dataset, DeterministicAndShaped) {
  const Scenario sc = generate_scenario(GenConfig::desk(), 2);
  const Dataset a = make_dataset(sc, 5, 9);
  const Dataset b = make_dataset(sc, 5, 9);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.draws.size(), 5u);
  EXPECT_EQ(a.draws[0].gain_sq.dims(), (std::array<std::size_t, 3>{6, 2, 10}));
  EXPECT_FALSE(a.draws[0] == a.draws[1]);
  EXPECT_THROW(make_dataset(sc, 0, 1), ArgumentError);
}

TEST(Dataset, SplitIsContiguousAndNearEqual) {
  const Scenario sc = generate_scenario(GenConfig::desk(), 2);
  const Dataset ds = make_dataset(sc, 10, 4);
  const auto parts = split_dataset(ds, 4);
  ASSERT_EQ(parts.size(), 4u);
  const std::vector<std::size_t> sizes{3, 3, 2, 2};
  std::size_t offset = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    ASSERT_EQ(parts[k].draws.size(), sizes[k]);
    for (std::size_t n = 0; n < sizes[k]; ++n) EXPECT_EQ(parts[k].draws[n], ds.draws[offset + n]);
    offset += sizes[k];
  }
  EXPECT_THROW(split_dataset(ds, 0), ArgumentError);
  EXPECT_THROW(split_dataset(ds, 11), ArgumentError);
}

TEST(Dataset, JsonRoundTripIsExact) {
  const Scenario sc = generate_scenario(GenConfig::desk(), 8);
  const Dataset ds = make_dataset(sc, 3, 21);
  const auto path = std::filesystem::temp_directory_path() / "aoiopt_ds_roundtrip.json";
  save_dataset(path.string(), ds);
  const Dataset back = load_dataset(path.string());
  EXPECT_EQ(back, ds);

  const auto j = nlohmann::json::parse(std::ifstream(path));
  EXPECT_EQ(j.at("format"), "aoiopt-dataset");
  EXPECT_EQ(j.at("draws").at("shape"), (std::vector<std::size_t>{3, 6, 2, 10}));
  EXPECT_EQ(j.at("scenario").at("bandwidth").at("shape"), (std::vector<std::size_t>{6, 2}));
  std::filesystem::remove(path);
}

TEST(Dataset, LoadRejectsMalformedFiles) {
  const auto path = std::filesystem::temp_directory_path() / "aoiopt_ds_bad.json";
  {
    std::ofstream(path) << "{\"format\": \"aoiopt-dataset\", \"version\": 1}";
  }
  EXPECT_THROW(load_dataset(path.string()), ConfigError);
  {
    std::ofstream(path) << "not json";
  }
  EXPECT_THROW(load_dataset(path.string()), ConfigError);
  EXPECT_THROW(load_dataset("/nonexistent/aoiopt.json"), ConfigError);
  std::filesystem::remove(path);
}
