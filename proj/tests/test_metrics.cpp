#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tact/metrics.hpp"
#include "tact/rng.hpp"
#include "tact/world.hpp"

#include "test_util.hpp"

using namespace tact;
using namespace tact::testutil;

TEST_CASE("omae matches hand arithmetic and the worst-case rule") {
  CHECK(omae({0, 1, 2}, {0, 1, 2}, 3) == 0.0);
  CHECK(omae({0, 1, 2}, {0, 2, 2}, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(omae({std::nullopt, std::nullopt}, {0, 2}, 3) == 2.0);
  CHECK_THROWS_AS(omae({}, {}, 3), std::invalid_argument);
}

TEST_CASE("omae agrees with a naive loop oracle exactly") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.uniform_int(40);
    std::vector<std::optional<int>> preds;
    std::vector<int> truths;
    double expected = 0.0;
    for (int i = 0; i < n; ++i) {
      const int truth = rng.uniform_int(3);
      truths.push_back(truth);
      if (rng.uniform() < 0.15) {
        preds.push_back(std::nullopt);
        expected += 2.0;
      } else {
        const int p = rng.uniform_int(3);
        preds.push_back(p);
        expected += std::abs(p - truth);
      }
    }
    expected /= n;
    CHECK(omae(preds, truths, 3) == expected);
  }
}

TEST_CASE("l2 exact match requires all components simultaneously") {
  using Tup = std::array<int, 3>;
  CHECK(l2_exact_match({Tup{1, 2, 0}, Tup{0, 0, 0}}, {Tup{1, 2, 0}, Tup{0, 0, 0}}) == 100.0);
  CHECK(l2_exact_match({Tup{1, 2, 0}, Tup{0, 1, 0}}, {Tup{1, 2, 0}, Tup{0, 0, 0}}) == 50.0);
  CHECK(l2_exact_match({std::nullopt, std::nullopt}, {Tup{1, 2, 0}, Tup{0, 0, 0}}) == 0.0);
  CHECK_THROWS_AS(l2_exact_match({}, {}), std::invalid_argument);
}

TEST_CASE("spearman handles the documented cases") {
  CHECK(spearman({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  // ranks (1,2,3) vs (2,1,3): rho = 1 - 6*2/(3*8) = 0.5
  CHECK(spearman({1, 2, 3}, {2, 1, 3}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(spearman({1}, {1}), std::invalid_argument);
  CHECK(spearman({1, 1, 1}, {1, 2, 3}) == 0.0);  // zero-variance convention
}

namespace {

// Brute-force reference: counting-based average ranks, then a direct Pearson.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = less + 0.5 * (equal - 1) + 1.0;
  }
  return ranks;
}

double brute_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = brute_ranks(a);
  const auto rb = brute_ranks(b);
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sa += ra[i];
    sb += rb[i];
    sab += ra[i] * rb[i];
    saa += ra[i] * ra[i];
    sbb += rb[i] * rb[i];
  }
  const double num = n * sab - sa * sb;
  const double den = std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
  if (den == 0.0) return 0.0;
  return num / den;
}

}  // namespace

TEST_CASE("spearman agrees with brute force over random lists with ties") {
  Rng rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + rng.uniform_int(5);  // n in [2, 6]
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
      // small integer support so ties are common
      a.push_back(rng.uniform_int(4));
      b.push_back(rng.uniform_int(4));
    }
    CHECK(std::abs(spearman(a, b) - brute_spearman(a, b)) < 1e-12);
  }
}

TEST_CASE("csc counts only fully parsable exact agreement") {
  using Triple = std::array<std::optional<int>, 3>;
  CHECK(csc_percent({Triple{1, 1, 1}, Triple{0, 0, 0}}) == 100.0);
  CHECK(csc_percent({Triple{1, 1, 1}, Triple{0, 2, 0}}) == 50.0);
  CHECK(csc_percent({Triple{std::nullopt, 1, 1}, Triple{1, std::nullopt, 1}}) == 0.0);
  CHECK_THROWS_AS(csc_percent({}), std::invalid_argument);
}

TEST_CASE("sfd scores pairwise order accuracy") {
  CHECK(sfd_percent({0, 1}, {0, 1}) == 100.0);
  CHECK(sfd_percent({0, 0}, {0, 1}) == 50.0);
  CHECK(sfd_percent({std::nullopt, std::nullopt}, {0, 1}) == 0.0);
  CHECK_THROWS_AS(sfd_percent({}, {}), std::invalid_argument);
}

TEST_CASE("aggregate matches hand arithmetic") {
  ReportParts parts;
  parts.k_levels = 3;
  SUBCASE("all perfect gives 100") {
    parts.h_acc = parts.r_acc = parts.p_acc = parts.mat_acc = 100.0;
    parts.l2_em = parts.sfd = parts.csc = 100.0;
    parts.soi_rho = 1.0;
    parts.omae = 0.0;
    CHECK(aggregate(parts) == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("all zero with worst omae gives 0") {
    parts.omae = 2.0;
    CHECK(aggregate(parts) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("four perfect components of nine give 44.44") {
    parts.h_acc = parts.r_acc = parts.p_acc = parts.mat_acc = 100.0;
    parts.omae = 2.0;
    CHECK(aggregate(parts) == doctest::Approx(400.0 / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("oracle traces yield a perfect report on a generated bench") {
  const RunConfig c = desk_run_config();
  const QASet set = generate_bench(c.world, c.bench, 21);
  std::vector<std::string> traces;
  traces.reserve(set.heldout.size());
  for (const auto& item : set.heldout) traces.push_back(oracle_trace(item));
  const MetricReport report = evaluate_traces(set.heldout, traces, c.world.k_levels);
  CHECK(report.h_acc == 100.0);
  CHECK(report.r_acc == 100.0);
  CHECK(report.p_acc == 100.0);
  CHECK(report.mat_acc == 100.0);
  CHECK(report.l2_em == 100.0);
  CHECK(report.sfd == 100.0);
  CHECK(report.csc == 100.0);
  CHECK(report.conflict_acc == 100.0);
  CHECK(report.omae == 0.0);
  CHECK(report.soi_rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.avg == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(report.evaluated_items == static_cast<int>(set.heldout.size()));
  int count_sum = 0;
  for (int t = 0; t < kNumTiers; ++t) count_sum += report.tier_counts[static_cast<std::size_t>(t)];
  CHECK(count_sum == report.evaluated_items);
}

TEST_CASE("metrics are invariant to item order") {
  const RunConfig c = desk_run_config();
  QASet set = generate_bench(c.world, c.bench, 33);
  std::vector<std::string> traces;
  Rng rng(1);
  for (const auto& item : set.heldout) {
    // scramble some answers so the report is not trivially perfect
    if (rng.uniform() < 0.4) {
      traces.push_back("scrambled");
    } else {
      traces.push_back(oracle_trace(item));
    }
  }
  const MetricReport base = evaluate_traces(set.heldout, traces, c.world.k_levels);

  Rng shuffle_rng(2);
  const auto perm = shuffle_rng.permutation(static_cast<int>(set.heldout.size()));
  std::vector<QAItem> items2;
  std::vector<std::string> traces2;
  for (int idx : perm) {
    items2.push_back(set.heldout[static_cast<std::size_t>(idx)]);
    traces2.push_back(traces[static_cast<std::size_t>(idx)]);
  }
  const MetricReport shuffled = evaluate_traces(items2, traces2, c.world.k_levels);
  CHECK(base.h_acc == shuffled.h_acc);
  CHECK(base.omae == shuffled.omae);
  CHECK(base.l2_em == shuffled.l2_em);
  CHECK(base.sfd == shuffled.sfd);
  CHECK(base.soi_rho == doctest::Approx(shuffled.soi_rho).epsilon(1e-12));
  CHECK(base.csc == shuffled.csc);
  CHECK(base.avg == doctest::Approx(shuffled.avg).epsilon(1e-12));
}

TEST_CASE("unparsable answers take worst-case credit in every metric") {
  const RunConfig c = desk_run_config();
  const QASet set = generate_bench(c.world, c.bench, 8);
  std::vector<std::string> traces(set.heldout.size(), "nothing to parse");
  const MetricReport report = evaluate_traces(set.heldout, traces, c.world.k_levels);
  CHECK(report.h_acc == 0.0);
  CHECK(report.mat_acc == 0.0);
  CHECK(report.omae == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(report.l2_em == 0.0);
  CHECK(report.sfd == 0.0);
  CHECK(report.soi_rho == 0.0);
  CHECK(report.csc == 0.0);
  CHECK(report.conflict_acc == 0.0);
}
