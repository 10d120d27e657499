#ifndef TACT_REWARDS_HPP_
#define TACT_REWARDS_HPP_

#include <optional>
#include <string>

#include "tact/config.hpp"
#include "tact/trace.hpp"
#include "tact/types.hpp"

namespace tact {

struct RewardBreakdown {
  double r_acc = 0.0;
  double r_cs = 0.0;
  double r_fmt = 0.0;
  double composite = 0.0;
  bool parse_ok = false;
  bool answer_parsable = false;
};

// Ordinal case table on d = |pred - truth|:
//   d = 0 -> 1.0, d = 1 -> 0.4, d >= 2 -> 0.0, unparsable -> -0.1.
double ordinal_accuracy(std::optional<int> pred, int truth, int k_levels);

// Exact-match variant: 1.0 for correct parsable predictions, 0 otherwise
// (unparsable included).
double categorical_accuracy(std::optional<int> pred, int truth);

// 1 - (w(p_a,p_c) + w(p_b,p_c)) / 2 with w(u,v) = min(|u-v|/(K-1), 1) when all
// three are parsable; 0 otherwise. K < 2 is rejected.
double cross_sensor_consistency(std::optional<int> p_a, std::optional<int> p_b,
                                std::optional<int> p_c, int k_levels);

// Binary indicator of the tag-structure predicate.
double format_reward(const std::string& text);

// Full scoring of one trace against one item: accuracy per tier (ordinal case
// table for single-level ordinal answers, exact match for material and
// comparative answers, per-component ordinal mean for attribute tuples),
// consistency on cross-sensor items (0 elsewhere, weight not renormalized),
// and the weighted composite.
RewardBreakdown composite_reward(const std::string& text, const QAItem& item,
                                 const RewardWeights& weights, int k_levels);

}  // namespace tact

#endif  // TACT_REWARDS_HPP_
