#ifndef TACT_METRICS_HPP_
#define TACT_METRICS_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tact/trace.hpp"
#include "tact/types.hpp"

namespace tact {

struct MetricReport {
  int k_levels = 3;
  double h_acc = 0.0;        // percent
  double r_acc = 0.0;        // percent
  double p_acc = 0.0;        // percent
  double mat_acc = 0.0;      // percent
  double omae = 0.0;         // mean absolute ordinal error, [0, K-1]
  double l2_em = 0.0;        // percent
  double sfd = 0.0;          // percent, pairwise order accuracy
  double soi_rho = 0.0;      // mean listwise Spearman, [-1, 1]
  double csc = 0.0;          // percent, cross-sensor exact agreement
  double conflict_acc = 0.0; // percent, visual-deception subset
  double avg = 0.0;
  std::array<int, kNumTiers> tier_counts{};
  int evaluated_items = 0;
};

// Mean |pred - truth| over ordinal predictions; unparsable counts as the
// worst-case error K-1. Empty input is rejected.
double omae(const std::vector<std::optional<int>>& preds, const std::vector<int>& truths,
            int k_levels);

// Percent of items whose (hardness, roughness, protrusion) tuple is
// simultaneously correct; unparsable counts wrong.
double l2_exact_match(const std::vector<std::optional<std::array<int, 3>>>& preds,
                      const std::vector<std::array<int, 3>>& truths);

// Spearman rank correlation with average-rank tie handling. Zero-variance
// rank vectors yield 0. n < 2 is rejected.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Percent of cross-sensor triples that are all parsable and exactly equal.
double csc_percent(const std::vector<std::array<std::optional<int>, 3>>& triples);

// Percent of pairwise items with the correct order relation; unparsable wrong.
double sfd_percent(const std::vector<std::optional<int>>& preds,
                   const std::vector<int>& truths);

struct ReportParts {
  double h_acc = 0.0, r_acc = 0.0, p_acc = 0.0, mat_acc = 0.0;
  double omae = 0.0;
  double l2_em = 0.0, sfd = 0.0, csc = 0.0;
  double soi_rho = 0.0;
  int k_levels = 3;
};

// Unweighted mean of the nine components, with SOI scaled by 100 and OMAE
// mapped onto a higher-better percent scale as 100*(1 - omae/(K-1)).
double aggregate(const ReportParts& parts);

// Scores one trace per item and reduces to the full report. Traces are
// positionally aligned with items; every tier must be represented.
MetricReport evaluate_traces(const std::vector<QAItem>& items,
                             const std::vector<std::string>& traces, int k_levels);

}  // namespace tact

#endif  // TACT_METRICS_HPP_
