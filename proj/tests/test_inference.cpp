#include <catch_amalgamated.hpp>

#include <algorithm>
#include <functional>

#include "oracles.hpp"
#include "phstat/inference.hpp"

using namespace phstat;
using Catch::Approx;

namespace {

FittedDistribution beta_dist(double a, double b) {
  FittedDistribution d;
  d.model = BetaModel{a, b, 1.0};
  return d;
}

}  // namespace

TEST_CASE("order statistics count from the top") {
  const std::vector<double> xs{2.0, 3.0, 1.0};
  CHECK(order_statistic(xs, 1) == 3.0);
  CHECK(order_statistic(xs, 2) == 2.0);
  CHECK(order_statistic(xs, 3) == 1.0);
  CHECK_THROWS_AS(order_statistic(xs, 0), Error);
  CHECK_THROWS_AS(order_statistic(xs, 4), Error);

  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng.below(40));
    for (auto& x : v) x = rng.uniform();
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t j = 1; j <= v.size(); ++j) REQUIRE(order_statistic(v, j) == sorted[j - 1]);
  }
}

TEST_CASE("replicates are deterministic and in support") {
  const auto d = beta_dist(1.0, 80.0);
  const auto a = replicate_diagrams(d, 499, 20, 3);
  const auto b = replicate_diagrams(d, 499, 20, 3);
  CHECK(a == b);
  REQUIRE(a.size() == 20);
  for (const auto& r : a) {
    REQUIRE(r.size() == 499);
    for (double x : r) REQUIRE((x >= 0.0 && x <= 1.0));
  }
  CHECK(a[0] != a[1]);
  CHECK_THROWS_AS(replicate_diagrams(d, 0, 5, 1), Error);
}

TEST_CASE("extreme observations give p = 0, minimal ones p = 1") {
  const std::vector<DeathList> sims{{0.1, 0.2}, {0.15, 0.25}, {0.05, 0.3}};
  const auto high = test_order_statistic(std::vector<double>{0.01, 0.5}, sims, 1);
  CHECK(high.p_value == 0.0);
  CHECK(high.significant);
  CHECK(high.observed == 0.5);
  CHECK(high.ci_upper == 0.3);
  const auto low = test_order_statistic(std::vector<double>{0.0, 0.2}, sims, 1);
  CHECK(low.p_value == 1.0);
  CHECK_FALSE(low.significant);
  CHECK_THROWS_AS(test_order_statistic(std::vector<double>{0.1}, std::vector<DeathList>{}, 1), Error);
}

TEST_CASE("p-value counts ties as at least as extreme") {
  const std::vector<DeathList> sims{{0.3}, {0.2}, {0.1}, {0.2}};
  CHECK(test_order_statistic(std::vector<double>{0.2}, sims, 1).p_value == 0.75);
}

TEST_CASE("p-value is monotone in the observed statistic and permutation invariant") {
  const auto sims = replicate_diagrams(beta_dist(2.0, 5.0), 50, 200, 4);
  double last = 1.0;
  for (double t = 0.3; t < 0.9; t += 0.02) {
    std::vector<double> obs(50, 0.1);
    obs[7] = t;
    const double p = test_order_statistic(obs, sims, 1).p_value;
    REQUIRE(p <= last);
    last = p;
  }
  auto shuffled = sims;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[3], shuffled[100]);
  const auto obs = sample(beta_dist(2.0, 5.0), 50, 5);
  const auto r1 = test_order_statistic(obs, sims, 2);
  const auto r2 = test_order_statistic(obs, shuffled, 2);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.ci_upper == r2.ci_upper);
}

TEST_CASE("p-values are calibrated under the null") {
  const auto d = beta_dist(1.0, 77.0);
  int rejected = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto obs = sample(d, 499, derive_seed(1000, t));
    const auto sims = replicate_diagrams(d, 499, 200, derive_seed(2000, t));
    rejected += test_order_statistic(obs, sims, 1).significant;
  }
  const double rate = static_cast<double>(rejected) / trials;
  CHECK(rate >= 0.01);
  CHECK(rate <= 0.12);
}

TEST_CASE("count_signals counts the infinite class") {
  CHECK(count_signals(std::vector<double>{}, beta_dist(1.0, 77.0), 10, 1).n_components == 1);
  const auto d = beta_dist(1.0, 77.0);
  const auto obs = sample(d, 499, 9);
  const auto plain = count_signals(obs, d, 200, 10);
  CHECK(plain.n_components >= 1);
  CHECK(plain.tests.size() == plain.n_components);
}

TEST_CASE("an extreme death adds exactly one signal") {
  const auto d = beta_dist(1.0, 77.0);
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto obs = sample(d, 200, derive_seed(3, t));
    auto sims = replicate_diagrams(d, 200, 100, derive_seed(4, t));
    const auto before = count_signals(obs, sims);

    // the new value tops every replicate; each replicate gains one value
    // above its own maximum but below the new observation
    auto obs2 = obs;
    obs2.push_back(2.0);
    for (auto& s : sims) s.push_back(1.0 + rng.uniform());
    const auto after = count_signals(obs2, sims);
    REQUIRE(after.n_components == before.n_components + 1);
  }
}

TEST_CASE("max_j limits the scan") {
  const std::vector<double> obs{0.9, 0.8, 0.7, 0.1};
  const std::vector<DeathList> sims{{0.1, 0.1, 0.1, 0.1}, {0.2, 0.1, 0.1, 0.1}};
  CHECK(count_signals(obs, sims).n_components == 4);
  CHECK(count_signals(obs, sims, default_alpha, 2).n_components == 3);
}

TEST_CASE("KS statistic matches the ECDF oracle") {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xs(1 + rng.below(50)), ys(1 + rng.below(50));
    // coarse values so ties are common
    for (auto& x : xs) x = static_cast<double>(rng.below(10));
    for (auto& y : ys) y = static_cast<double>(rng.below(12));
    REQUIRE(ks_two_sample(xs, ys).statistic == oracle::ks_statistic(xs, ys));
  }
}

TEST_CASE("KS edge cases") {
  const std::vector<double> xs{0.1, 0.4, 0.2, 0.3};
  const auto same = ks_two_sample(xs, xs);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  const auto apart = ks_two_sample(xs, std::vector<double>{1.0, 2.0});
  CHECK(apart.statistic == 1.0);
  CHECK_THROWS_AS(ks_two_sample(xs, std::vector<double>{}), Error);
}

TEST_CASE("Kolmogorov tail values") {
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(1.36) == Approx(0.0494).margin(5e-4));
  CHECK(kolmogorov_tail(1.0) == Approx(0.2700).margin(5e-4));
  CHECK(kolmogorov_tail(0.5) == Approx(0.9639).margin(5e-4));
  // the two series agree where they meet
  CHECK(kolmogorov_tail(1.18 - 1e-12) == Approx(kolmogorov_tail(1.18)).margin(1e-10));
}

TEST_CASE("KS on two samples of one distribution is usually not significant") {
  const auto d = beta_dist(1.0, 50.0);
  int accepted = 0;
  for (Seed s = 0; s < 40; ++s) accepted += ks_two_sample(sample(d, 1000, 2 * s), sample(d, 1000, 2 * s + 1)).p_value > 0.05;
  CHECK(accepted >= 32);
}

TEST_CASE("goodness suite smoke run") {
  SuiteConfig cfg;
  cfg.shape.n = 200;
  const auto a = goodness_suite(cfg, 2, 5);
  REQUIRE(a.records.size() == 2);
  std::size_t total = 0;
  for (const auto& [family, count] : a.family_counts) total += count;
  CHECK(total == 2);
  for (const auto& r : a.records) {
    CHECK(r.bottleneck >= 0.0);
    CHECK(r.fit.n_fit == 199);
  }
  const auto b = goodness_suite(cfg, 2, 5);
  CHECK(a.bottlenecks() == b.bottlenecks());
  CHECK_THROWS_AS(goodness_suite(cfg, 1, 5), Error);
}
