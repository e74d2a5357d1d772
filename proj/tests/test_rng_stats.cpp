#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "rdt/rng.hpp"
#include "rdt/stats.hpp"

using namespace rdt;

TEST_CASE("splitmix64 mixer is deterministic and spreads nearby inputs") {
  CHECK(mix64(42, 0) == mix64(42, 0));
  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 1000; ++i) {
    seeds.insert(mix64(42, static_cast<std::uint64_t>(i)));
  }
  CHECK(seeds.size() == 1000);
  CHECK(mix64(42, 1) != mix64(43, 1));
}

TEST_CASE("streams with the same seed agree; substreams differ") {
  RngStream a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream parent(7);
  RngStream s1 = parent.substream(1);
  RngStream s2 = parent.substream(2);
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and has mean 1/2") {
  RngStream rng(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal moments") {
  RngStream rng(11);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(3.0, 2.0);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.01));
  CHECK(var == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("uniform_int covers the range uniformly") {
  RngStream rng(17);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    ++counts[static_cast<std::size_t>(rng.uniform_int(0, 5))];
  }
  for (const int c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }
}

TEST_CASE("normal_cdf matches tabulated values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(1.645) == doctest::Approx(0.95001509).epsilon(1e-6));
  CHECK(normal_cdf(-1.96) == doctest::Approx(0.02499790).epsilon(1e-6));
}

TEST_CASE("student t two-sided p matches tabulated values") {
  // t = 2.228, df 10 is the 97.5% quantile.
  CHECK(student_t_two_sided_p(2.228, 10.0) == doctest::Approx(0.05).epsilon(1e-3));
  // t = 12.706, df 1 is the classic 97.5% quantile of t_1.
  CHECK(student_t_two_sided_p(12.706, 1.0) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(student_t_two_sided_p(0.0, 5.0) == doctest::Approx(1.0));
  // Large df approaches the normal tail.
  CHECK(student_t_two_sided_p(1.96, 100000.0) == doctest::Approx(0.05).epsilon(2e-3));
}

TEST_CASE("incomplete beta basics") {
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(2,2) = x^2 (3 - 2x).
  CHECK(incomplete_beta(2.0, 2.0, 0.4) == doctest::Approx(0.4 * 0.4 * (3 - 0.8)).epsilon(1e-10));
}
