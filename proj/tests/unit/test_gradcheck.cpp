#include <gtest/gtest.h>

#include "aoiopt/gradcheck.hpp"
#include "support.hpp"

using namespace aoiopt;
using namespace testsupport;

TEST(GradComparison, MixedAbsoluteAndRelativeRule) {
  GradComparison c;
  c.add(1.0, 1.0 + 5e-6);
  EXPECT_TRUE(c.passed());
  c.add(1e-9, 3e-9);  // both tiny: compared absolutely
  EXPECT_TRUE(c.passed());
  EXPECT_NEAR(c.worst_abs, 2e-9, 1e-24);
  c.add(1.0, 1.1);
  EXPECT_FALSE(c.passed());
  EXPECT_EQ(c.compared, 3u);
  EXPECT_EQ(c.failures, 1u);
}

TEST(GradCheck, DecisionGradientOnHandInstance) {
  const Scenario sc = hand_scenario(3, 2, 5);
  const FadingDraw g = unit_draw(sc, 0.8);
  Rng rng(8);
  std::size_t checked = 0;
  while (checked < 5) {
    const Decision d = random_decision(sc, rng);
    if (decision_kink_margin(sc, g, d, C1Form::kRateFloor) < 1e-3) continue;
    const Multipliers mu = random_multipliers(sc, rng, 1e-6);
    for (C1Form form : {C1Form::kRateFloor, C1Form::kScaledRate}) {
      const auto cmp = check_decision_gradient(sc, g, d, mu, form);
      EXPECT_TRUE(cmp.passed()) << "worst rel " << cmp.worst_rel;
      EXPECT_EQ(cmp.compared, 2u * 2u * 5u + 3u * 2u * 5u);
    }
    ++checked;
  }
}

TEST(GradCheck, DetectsAWrongGradient) {
  // A gradient check against a different function must fail.
  const Scenario sc = hand_scenario(2, 1, 3);
  const FadingDraw g = unit_draw(sc);
  Rng rng(3);
  const Decision d = random_decision(sc, rng);
  const Multipliers mu = random_multipliers(sc, rng);
  const DecisionGradient dg = grad_wrt_decision(sc, g, d, mu);
  GradComparison c;
  for (double v : dg.d_p.flat()) c.add(v, 2.0 * v + 1.0);
  EXPECT_FALSE(c.passed());
}

TEST(GradCheck, KinkMarginSeesActiveBoundaries) {
  const Scenario sc = hand_scenario(2, 1, 3);
  Decision d{UavPath::constant(1, 3, 10.0, 10.0), SelectionProbs::constant(2, 1, 3, 0.4)};
  // Consecutive identical stops put a segment length at the sqrt kink.
  EXPECT_EQ(decision_kink_margin(sc, unit_draw(sc), d, C1Form::kRateFloor), 0.0);
  d.path.xs(0, 1) = 20.0;
  d.path.xs(0, 2) = 40.0;
  EXPECT_NEAR(decision_kink_margin(sc, unit_draw(sc), d, C1Form::kRateFloor), 0.6, 1e-12);
}
