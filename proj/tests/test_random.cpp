#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "phstat/random.hpp"

using namespace phstat;
using Catch::Approx;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    REQUIRE(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("derived seeds are distinct across streams and parents") {
  std::set<Seed> seen;
  for (Seed parent = 0; parent < 20; ++parent)
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(parent, s));
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform draws lie in [0, 1) with the right mean") {
  Rng rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == Approx(0.5).margin(0.005));
}

TEST_CASE("below is bounded and roughly flat") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(rng.below(0), Error);
}

TEST_CASE("normal draws have unit variance") {
  Rng rng(11);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(s1 / n == Approx(0.0).margin(0.01));
  CHECK(s2 / n == Approx(1.0).margin(0.01));
}

TEST_CASE("gamma draws match shape mean and variance") {
  for (double shape : {0.3, 1.0, 2.5, 80.0}) {
    Rng rng(static_cast<Seed>(shape * 10));
    const int n = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      REQUIRE(g > 0.0);
      s1 += g;
      s2 += g * g;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == Approx(shape).epsilon(0.02));
    CHECK(var == Approx(shape).epsilon(0.05));
  }
}
