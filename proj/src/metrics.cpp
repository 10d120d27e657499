#include "tact/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tact/rewards.hpp"

namespace tact {

double omae(const std::vector<std::optional<int>>& preds, const std::vector<int>& truths,
            int k_levels) {
  if (preds.empty() || preds.size() != truths.size())
    throw std::invalid_argument("omae needs aligned nonempty lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sum += preds[i] ? std::abs(*preds[i] - truths[i]) : k_levels - 1;
  }
  return sum / static_cast<double>(preds.size());
}

double l2_exact_match(const std::vector<std::optional<std::array<int, 3>>>& preds,
                      const std::vector<std::array<int, 3>>& truths) {
  if (preds.empty() || preds.size() != truths.size())
    throw std::invalid_argument("l2_exact_match needs aligned nonempty lists");
  int hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] && *preds[i] == truths[i]) ++hits;
  }
  return 100.0 * hits / static_cast<double>(preds.size());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman needs aligned lists");
  if (a.size() < 2) throw std::invalid_argument("spearman needs n >= 2");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

double csc_percent(const std::vector<std::array<std::optional<int>, 3>>& triples) {
  if (triples.empty()) throw std::invalid_argument("csc needs a nonempty list");
  int hits = 0;
  for (const auto& t : triples) {
    if (t[0] && t[1] && t[2] && *t[0] == *t[1] && *t[1] == *t[2]) ++hits;
  }
  return 100.0 * hits / static_cast<double>(triples.size());
}

double sfd_percent(const std::vector<std::optional<int>>& preds,
                   const std::vector<int>& truths) {
  if (preds.empty() || preds.size() != truths.size())
    throw std::invalid_argument("sfd needs aligned nonempty lists");
  int hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] && *preds[i] == truths[i]) ++hits;
  }
  return 100.0 * hits / static_cast<double>(preds.size());
}

double aggregate(const ReportParts& parts) {
  const double omae_score =
      100.0 * (1.0 - parts.omae / static_cast<double>(parts.k_levels - 1));
  const double components[] = {parts.h_acc, parts.r_acc,   parts.p_acc,
                               parts.mat_acc, parts.l2_em, parts.sfd,
                               100.0 * parts.soi_rho, parts.csc, omae_score};
  double sum = 0.0;
  for (double c : components) sum += c;
  return sum / 9.0;
}

MetricReport evaluate_traces(const std::vector<QAItem>& items,
                             const std::vector<std::string>& traces, int k_levels) {
  if (items.size() != traces.size())
    throw std::invalid_argument("evaluate_traces needs one trace per item");
  if (items.empty()) throw std::invalid_argument("evaluate_traces needs a nonempty bench");

  struct AccBucket {
    int hits = 0;
    int total = 0;
    double percent() const {
      if (total == 0) throw std::invalid_argument("metric bucket is empty; tier missing from bench");
      return 100.0 * hits / static_cast<double>(total);
    }
  };
  AccBucket acc_by_attr[kNumAttributes];
  AccBucket conflict_bucket;
  std::vector<std::optional<int>> omae_preds;
  std::vector<int> omae_truths;
  std::vector<std::optional<std::array<int, 3>>> tuple_preds;
  std::vector<std::array<int, 3>> tuple_truths;
  std::vector<std::optional<int>> pair_preds;
  std::vector<int> pair_truths;
  std::vector<double> listwise_rhos;
  std::vector<std::array<std::optional<int>, 3>> cs_triples;

  MetricReport report;
  report.k_levels = k_levels;
  report.evaluated_items = static_cast<int>(items.size());

  for (std::size_t i = 0; i < items.size(); ++i) {
    const QAItem& item = items[i];
    ++report.tier_counts[static_cast<std::size_t>(item.tier)];
    const ParsedTrace parsed = parse_trace(traces[i], k_levels);
    const std::optional<Answer> pred = extract_answer(parsed, item, k_levels);

    switch (item.tier) {
      case Tier::Property:
      case Tier::CrossSensor: {
        auto& bucket = acc_by_attr[static_cast<std::size_t>(item.attribute)];
        ++bucket.total;
        if (item.attribute == Attribute::Material) {
          if (pred && *pred == item.truth) ++bucket.hits;
        } else {
          std::optional<int> level;
          if (pred && pred->kind == Answer::Kind::Level) level = pred->level;
          if (level && *level == item.truth.level) ++bucket.hits;
          omae_preds.push_back(level);
          omae_truths.push_back(item.truth.level);
        }
        if (item.tier == Tier::CrossSensor) {
          cs_triples.push_back({parsed.perceive_value(item.sensors[0], item.attribute),
                                parsed.perceive_value(item.sensors[1], item.attribute),
                                parsed.compare_line.ordinal(item.attribute)});
        }
        break;
      }
      case Tier::Conflict: {
        ++conflict_bucket.total;
        auto& bucket = acc_by_attr[static_cast<std::size_t>(Attribute::Material)];
        ++bucket.total;
        if (pred && *pred == item.truth) {
          ++conflict_bucket.hits;
          ++bucket.hits;
        }
        break;
      }
      case Tier::OrdinalCompositional: {
        std::optional<std::array<int, 3>> tuple;
        if (pred && pred->kind == Answer::Kind::Tuple) tuple = pred->tuple;
        tuple_preds.push_back(tuple);
        tuple_truths.push_back(item.truth.tuple);
        break;
      }
      case Tier::ComparativePairwise: {
        std::optional<int> choice;
        if (pred && pred->kind == Answer::Kind::Pair) choice = pred->pair_choice;
        pair_preds.push_back(choice);
        pair_truths.push_back(item.truth.pair_choice);
        break;
      }
      case Tier::ComparativeListwise: {
        if (pred && pred->kind == Answer::Kind::Perm) {
          const std::size_t n = item.truth.perm.size();
          // rank of each object in the predicted vs true ordering
          std::vector<double> pred_rank(n, 0.0), true_rank(n, 0.0);
          for (std::size_t pos = 0; pos < n; ++pos) {
            pred_rank[static_cast<std::size_t>(pred->perm[pos])] = static_cast<double>(pos);
            true_rank[static_cast<std::size_t>(item.truth.perm[pos])] = static_cast<double>(pos);
          }
          listwise_rhos.push_back(spearman(pred_rank, true_rank));
        } else {
          listwise_rhos.push_back(0.0);  // unparsable contributes rho = 0
        }
        break;
      }
    }
  }

  report.h_acc = acc_by_attr[0].percent();
  report.r_acc = acc_by_attr[1].percent();
  report.p_acc = acc_by_attr[2].percent();
  report.mat_acc = acc_by_attr[3].percent();
  report.omae = omae(omae_preds, omae_truths, k_levels);
  report.l2_em = l2_exact_match(tuple_preds, tuple_truths);
  report.sfd = sfd_percent(pair_preds, pair_truths);
  if (listwise_rhos.empty()) throw std::invalid_argument("listwise tier missing from bench");
  report.soi_rho = std::accumulate(listwise_rhos.begin(), listwise_rhos.end(), 0.0) /
                   static_cast<double>(listwise_rhos.size());
  report.csc = csc_percent(cs_triples);
  report.conflict_acc = conflict_bucket.percent();

  ReportParts parts;
  parts.h_acc = report.h_acc;
  parts.r_acc = report.r_acc;
  parts.p_acc = report.p_acc;
  parts.mat_acc = report.mat_acc;
  parts.omae = report.omae;
  parts.l2_em = report.l2_em;
  parts.sfd = report.sfd;
  parts.csc = report.csc;
  parts.soi_rho = report.soi_rho;
  parts.k_levels = k_levels;
  report.avg = aggregate(parts);
  return report;
}

}  // namespace tact
