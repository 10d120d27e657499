#include <doctest.h>

#include <cmath>
#include <set>

#include "tact/rng.hpp"

using namespace tact;

TEST_CASE("substreams are deterministic and tag-sensitive") {
  CHECK(substream(1, "world") == substream(1, "world"));
  CHECK(substream(1, "world") != substream(1, "rollout"));
  CHECK(substream(1, "world", 0) != substream(1, "world", 1));
  CHECK(substream(1, "world") != substream(2, "world"));
}

TEST_CASE("uniform_int covers its range without bias artifacts") {
  Rng rng(7);
  std::set<int> seen;
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 50000; ++i) {
    const int v = rng.uniform_int(5);
    REQUIRE(v >= 0);
    REQUIRE(v < 5);
    seen.insert(v);
    ++counts[v];
  }
  CHECK(seen.size() == 5);
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("normal transform has the right first two moments") {
  Rng rng(11);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(std::sqrt(var) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("permutation is a permutation and non-degenerate") {
  Rng rng(13);
  std::set<std::vector<int>> distinct;
  for (int i = 0; i < 200; ++i) {
    const auto p = rng.permutation(6);
    std::set<int> members(p.begin(), p.end());
    CHECK(members.size() == 6);
    CHECK(*members.begin() == 0);
    CHECK(*members.rbegin() == 5);
    distinct.insert(p);
  }
  CHECK(distinct.size() > 100);  // 6! = 720 possibilities
}

TEST_CASE("categorical_from_u uses the inverse cdf") {
  const std::vector<double> probs = {0.2, 0.5, 0.3};
  CHECK(categorical_from_u(probs, 0.0) == 0);
  CHECK(categorical_from_u(probs, 0.19) == 0);
  CHECK(categorical_from_u(probs, 0.21) == 1);
  CHECK(categorical_from_u(probs, 0.69) == 1);
  CHECK(categorical_from_u(probs, 0.71) == 2);
  CHECK(categorical_from_u(probs, 0.999999) == 2);
}
