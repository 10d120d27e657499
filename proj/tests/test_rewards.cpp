#include <doctest.h>

#include <cmath>

#include "tact/rewards.hpp"
#include "tact/rng.hpp"
#include "tact/world.hpp"

#include "test_util.hpp"

using namespace tact;
using namespace tact::testutil;

TEST_CASE("ordinal accuracy reproduces the case table exactly") {
  CHECK(ordinal_accuracy(2, 2, 3) == 1.0);
  CHECK(ordinal_accuracy(1, 2, 3) == 0.4);
  CHECK(ordinal_accuracy(0, 2, 3) == 0.0);
  CHECK(ordinal_accuracy(std::nullopt, 2, 3) == -0.1);
  // full (pred, truth) grid for K=3
  for (int truth = 0; truth < 3; ++truth) {
    for (int pred = 0; pred < 3; ++pred) {
      const int d = std::abs(pred - truth);
      const double expected = d == 0 ? 1.0 : (d == 1 ? 0.4 : 0.0);
      CHECK(ordinal_accuracy(pred, truth, 3) == expected);
    }
    CHECK(ordinal_accuracy(std::nullopt, truth, 3) == -0.1);
  }
  CHECK_THROWS_AS(ordinal_accuracy(0, 5, 3), std::invalid_argument);
}

TEST_CASE("reward ordering is strict across the case rows") {
  CHECK(ordinal_accuracy(1, 1, 3) > ordinal_accuracy(0, 1, 3));
  CHECK(ordinal_accuracy(0, 1, 3) > ordinal_accuracy(0, 2, 3));
  CHECK(ordinal_accuracy(0, 2, 3) > ordinal_accuracy(std::nullopt, 2, 3));
}

TEST_CASE("categorical accuracy is exact match with zero otherwise") {
  CHECK(categorical_accuracy(2, 2) == 1.0);   // fabric vs fabric
  CHECK(categorical_accuracy(1, 2) == 0.0);   // metal vs fabric
  CHECK(categorical_accuracy(std::nullopt, 2) == 0.0);
}

TEST_CASE("cross-sensor consistency matches hand evaluation") {
  CHECK(cross_sensor_consistency(1, 1, 1, 3) == 1.0);
  CHECK(cross_sensor_consistency(0, 2, 1, 3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cross_sensor_consistency(std::nullopt, 1, 1, 3) == 0.0);
  CHECK(cross_sensor_consistency(1, std::nullopt, 1, 3) == 0.0);
  CHECK(cross_sensor_consistency(1, 1, std::nullopt, 3) == 0.0);
  CHECK_THROWS_AS(cross_sensor_consistency(0, 0, 0, 1), std::invalid_argument);
}

namespace {

// Independent direct evaluation of the consistency formula, kept free of the
// production implementation.
double rcs_bruteforce(int a, int b, int c, int k) {
  const auto w = [k](int u, int v) {
    const double gap = std::abs(u - v) / static_cast<double>(k - 1);
    return gap > 1.0 ? 1.0 : gap;
  };
  return 1.0 - (w(a, c) + w(b, c)) / 2.0;
}

}  // namespace

TEST_CASE("consistency matches brute force over all 27 triples and K up to 5") {
  for (int k = 2; k <= 5; ++k) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        for (int c = 0; c < k; ++c) {
          const double got = cross_sensor_consistency(a, b, c, k);
          const double want = rcs_bruteforce(a, b, c, k);
          CHECK(std::abs(got - want) < 1e-12);
          CHECK(got >= 0.0);
          CHECK(got <= 1.0);
          // maximal exactly at full agreement
          CHECK((got == 1.0) == (a == c && b == c));
        }
      }
    }
  }
}

TEST_CASE("consistency penalty is monotone in each gap with the other fixed") {
  for (int k = 2; k <= 5; ++k) {
    for (int b = 0; b < k; ++b) {
      for (int c = 0; c < k; ++c) {
        double prev = 2.0;
        for (int gap = 0; gap < k; ++gap) {
          const int a = c + gap < k ? c + gap : c - gap;
          if (a < 0 || a >= k) continue;
          const double value = cross_sensor_consistency(a, b, c, k);
          CHECK(value <= prev + 1e-15);
          prev = value;
        }
      }
    }
  }
}

TEST_CASE("format reward is binary over fixtures") {
  const WorldConfig w = noiseless_world_config();
  const QAItem item = make_item(w, Tier::CrossSensor, Attribute::Hardness,
                                make_object(1, 0, 2, 2), {SensorId::GsMini, SensorId::Tac3d});
  const std::string oracle = oracle_trace(item);
  CHECK(format_reward(oracle) == 1.0);
  CHECK(format_reward("") == 0.0);
  // valid trace plus a duplicated conclude block
  const std::string dup = oracle + "<conclude>\nanswer=1\n</conclude>\n";
  CHECK(format_reward(dup) == 0.0);
}

TEST_CASE("composite reproduces the hand-computed values") {
  const WorldConfig w = noiseless_world_config();
  const RewardWeights weights;
  const QAItem cross = make_item(w, Tier::CrossSensor, Attribute::Hardness,
                                 make_object(1, 0, 2, 2), {SensorId::GsMini, SensorId::Tac3d});

  SUBCASE("oracle trace on a cross-sensor ordinal item scores 1.0") {
    const RewardBreakdown b = composite_reward(oracle_trace(cross), cross, weights, 3);
    CHECK(b.r_acc == 1.0);
    CHECK(b.r_cs == 1.0);
    CHECK(b.r_fmt == 1.0);
    CHECK(b.composite == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("unparsable text on an ordinal item scores -0.06") {
    const RewardBreakdown b = composite_reward("not a trace", cross, weights, 3);
    CHECK(b.r_acc == -0.1);
    CHECK(b.r_cs == 0.0);
    CHECK(b.r_fmt == 0.0);
    CHECK(b.composite == doctest::Approx(0.6 * -0.1).epsilon(1e-15));
  }

  SUBCASE("accuracy-only weights give 0.4 on an off-by-one answer") {
    RewardWeights acc_only;
    acc_only.lambda_acc = 1.0;
    acc_only.lambda_cs = 0.0;
    acc_only.lambda_fmt = 0.0;
    TraceSlots slots = oracle_slots(cross);
    slots.answer = Answer::make_level(0);  // truth is 1
    const RewardBreakdown b =
        composite_reward(render_trace(cross, slots), cross, acc_only, 3);
    CHECK(b.composite == doctest::Approx(0.4).epsilon(1e-15));
  }
}

TEST_CASE("single-sensor items contribute zero consistency without renormalizing") {
  const WorldConfig w = noiseless_world_config();
  const RewardWeights weights;
  const QAItem item = make_item(w, Tier::Property, Attribute::Hardness,
                                make_object(1, 0, 2, 2), {SensorId::GsMini});
  const RewardBreakdown b = composite_reward(oracle_trace(item), item, weights, 3);
  CHECK(b.r_acc == 1.0);
  CHECK(b.r_cs == 0.0);
  CHECK(b.composite == doctest::Approx(0.6 + 0.1).epsilon(1e-15));
}

TEST_CASE("composite is the exact weighted sum on random traces") {
  const WorldConfig w = test_world_config();
  const RewardWeights weights;
  Rng rng(1234);
  const QAItem cross = make_item(w, Tier::CrossSensor, Attribute::Roughness,
                                 make_object(1, 2, 0, 6), {SensorId::Xense, SensorId::DmTacX});
  for (int i = 0; i < 2000; ++i) {
    TraceSlots slots = oracle_slots(cross);
    slots.template_id = rng.uniform_int(kNumTemplates);
    slots.perceive[0].hardness = rng.uniform_int(3);
    slots.perceive[0].roughness = rng.uniform_int(3);
    slots.perceive[1].roughness = rng.uniform_int(3);
    slots.compare.roughness = rng.uniform_int(3);
    slots.answer = Answer::make_level(rng.uniform_int(3));
    const std::string text = render_trace(cross, slots);
    const RewardBreakdown b = composite_reward(text, cross, weights, 3);
    const double expected =
        weights.lambda_acc * b.r_acc + weights.lambda_cs * b.r_cs + weights.lambda_fmt * b.r_fmt;
    CHECK(b.composite == expected);  // exact identity, not approximate
    CHECK(b.composite >= -0.06 - 1e-15);
    CHECK(b.composite <= 1.0 + 1e-15);
  }
}

TEST_CASE("binary accuracy variant collapses the ordinal table") {
  const WorldConfig w = noiseless_world_config();
  RewardWeights binary;
  binary.binary_accuracy = true;
  const QAItem item = make_item(w, Tier::Property, Attribute::Hardness,
                                make_object(1, 0, 2, 2), {SensorId::GsMini});
  TraceSlots slots = oracle_slots(item);
  slots.answer = Answer::make_level(0);  // off by one
  CHECK(composite_reward(render_trace(item, slots), item, binary, 3).r_acc == 0.0);
  slots.answer = Answer::make_level(1);
  CHECK(composite_reward(render_trace(item, slots), item, binary, 3).r_acc == 1.0);
  CHECK(composite_reward("garbage", item, binary, 3).r_acc == 0.0);
}
