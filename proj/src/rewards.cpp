#include "tact/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace tact {

double ordinal_accuracy(std::optional<int> pred, int truth, int k_levels) {
  if (truth < 0 || truth >= k_levels) throw std::invalid_argument("truth out of range");
  if (!pred) return -0.1;
  const int d = std::abs(*pred - truth);
  if (d == 0) return 1.0;
  if (d == 1) return 0.4;
  return 0.0;
}

double categorical_accuracy(std::optional<int> pred, int truth) {
  if (truth < 0 || truth >= kNumMaterials) throw std::invalid_argument("truth out of range");
  return (pred && *pred == truth) ? 1.0 : 0.0;
}

double cross_sensor_consistency(std::optional<int> p_a, std::optional<int> p_b,
                                std::optional<int> p_c, int k_levels) {
  if (k_levels < 2) throw std::invalid_argument("k_levels must be >= 2");
  if (!p_a || !p_b || !p_c) return 0.0;
  const auto w = [&](int u, int v) {
    return std::min(std::abs(u - v) / static_cast<double>(k_levels - 1), 1.0);
  };
  return 1.0 - 0.5 * (w(*p_a, *p_c) + w(*p_b, *p_c));
}

double format_reward(const std::string& text) { return tags_well_formed(text) ? 1.0 : 0.0; }

namespace {

double binary_match(const std::optional<Answer>& pred, const Answer& truth) {
  return (pred && *pred == truth) ? 1.0 : 0.0;
}

double accuracy_for(const std::optional<Answer>& pred, const QAItem& item,
                    const RewardWeights& weights, int k_levels) {
  const Answer& truth = item.truth;
  switch (truth.kind) {
    case Answer::Kind::Level: {
      if (weights.binary_accuracy) return binary_match(pred, truth);
      std::optional<int> level;
      if (pred && pred->kind == Answer::Kind::Level) level = pred->level;
      return ordinal_accuracy(level, truth.level, k_levels);
    }
    case Answer::Kind::Material: {
      std::optional<int> material;
      if (pred && pred->kind == Answer::Kind::Material) material = pred->material;
      return categorical_accuracy(material, truth.material);
    }
    case Answer::Kind::Tuple: {
      // Per-component ordinal mean; the binary variant collapses to exact match.
      if (weights.binary_accuracy) return binary_match(pred, truth);
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) {
        std::optional<int> component;
        if (pred && pred->kind == Answer::Kind::Tuple)
          component = pred->tuple[static_cast<std::size_t>(c)];
        sum += ordinal_accuracy(component, truth.tuple[static_cast<std::size_t>(c)], k_levels);
      }
      return sum / 3.0;
    }
    case Answer::Kind::Pair:
    case Answer::Kind::Perm:
      // Comparative tiers use the exact-match variant.
      return binary_match(pred, truth);
  }
  return 0.0;
}

}  // namespace

RewardBreakdown composite_reward(const std::string& text, const QAItem& item,
                                 const RewardWeights& weights, int k_levels) {
  weights.validate();
  const ParsedTrace parsed = parse_trace(text, k_levels);
  RewardBreakdown out;
  out.parse_ok = parsed.parse_ok;
  out.r_fmt = parsed.parse_ok ? 1.0 : 0.0;

  const std::optional<Answer> pred = extract_answer(parsed, item, k_levels);
  out.answer_parsable = pred.has_value();
  out.r_acc = accuracy_for(pred, item, weights, k_levels);

  // Consistency applies to cross-sensor items only; elsewhere it contributes
  // 0 and its weight is not renormalized.
  out.r_cs = 0.0;
  if (item.tier == Tier::CrossSensor && item.sensors.size() == 2 &&
      item.attribute != Attribute::Material) {
    const std::optional<int> p_a = parsed.perceive_value(item.sensors[0], item.attribute);
    const std::optional<int> p_b = parsed.perceive_value(item.sensors[1], item.attribute);
    const std::optional<int> p_c = parsed.compare_line.ordinal(item.attribute);
    out.r_cs = cross_sensor_consistency(p_a, p_b, p_c, k_levels);
  }

  out.composite =
      weights.lambda_acc * out.r_acc + weights.lambda_cs * out.r_cs + weights.lambda_fmt * out.r_fmt;
  return out;
}

}  // namespace tact
