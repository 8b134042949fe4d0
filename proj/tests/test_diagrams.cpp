#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "phstat/diagrams.hpp"
#include "phstat/random.hpp"

using namespace phstat;
using Catch::Approx;

namespace {

std::vector<DiagramPoint> random_diagram(Rng& rng, std::size_t n) {
  std::vector<DiagramPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = rng.uniform();
    out.push_back({b, b + rng.uniform()});
  }
  return out;
}

std::vector<oracle::Pt> to_oracle(const std::vector<DiagramPoint>& pts) {
  std::vector<oracle::Pt> out;
  for (const auto& p : pts) out.push_back({p.birth, p.death});
  return out;
}

}  // namespace

TEST_CASE("bars longer than c_max are long") {
  const std::vector<double> deaths{0.1, 0.2, 0.3};
  const auto c = classify_bars(deaths, 0.15);
  CHECK(c.n_bars == 3);
  CHECK(c.prop_long == Approx(2.0 / 3.0));
  CHECK(c.prop_short == Approx(1.0 / 3.0));
  // a bar exactly at c_max is short
  CHECK(classify_bars(deaths, 0.3).prop_long == 0.0);
  CHECK_THROWS_AS(classify_bars(deaths, 0.0), Error);
  CHECK_THROWS_AS(classify_bars(std::vector<double>{}, 0.1), Error);
}

TEST_CASE("nearest-rank percentiles") {
  std::vector<double> xs(100);
  std::iota(xs.begin(), xs.end(), 1.0);
  const auto t = percentiles(xs);
  CHECK(t.values[0] == 95.0);
  CHECK(t.values[1] == 99.0);
  CHECK(t.values[2] == 100.0);
  CHECK(nearest_rank(std::vector<double>{3.0}, 50.0) == 3.0);

  Rng rng(1);
  std::vector<double> us(1000);
  for (auto& u : us) u = rng.uniform();
  const auto tu = percentiles(us);
  CHECK(tu.values[0] == Approx(0.95).margin(0.03));
  CHECK(tu.values[0] <= tu.values[1]);
  CHECK(tu.values[1] <= tu.values[2]);
  CHECK(tu.values[2] == *std::max_element(us.begin(), us.end()));
}

TEST_CASE("skewness and kurtosis") {
  CHECK(skewness(std::vector<double>{-1.0, 0.0, 1.0}) == Approx(0.0).margin(1e-15));
  // {0, 0, 3}: m2 = 2, m3 = 2, m4 = 6
  CHECK(skewness(std::vector<double>{0.0, 0.0, 3.0}) == Approx(2.0 / std::pow(2.0, 1.5)));
  CHECK(kurtosis(std::vector<double>{0.0, 0.0, 3.0}) == Approx(1.5));

  Rng rng(2);
  std::vector<double> normals(100000), exps(100000);
  for (auto& z : normals) z = rng.normal();
  for (auto& e : exps) e = -std::log(rng.uniform_open());
  CHECK(kurtosis(normals) == Approx(3.0).margin(0.2));
  CHECK(skewness(exps) == Approx(2.0).margin(0.2));
  CHECK_THROWS_AS(skewness(std::vector<double>{1.0, 1.0, 1.0}), Error);
}

TEST_CASE("bottleneck of simple diagrams") {
  const std::vector<DiagramPoint> one{{0.0, 2.0}};
  const std::vector<DiagramPoint> none;
  CHECK(bottleneck(one, none) == 1.0);
  CHECK(bottleneck(none, one) == 1.0);
  CHECK(bottleneck(none, none) == 0.0);
  const std::vector<DiagramPoint> a{{0.0, 1.0}}, b{{0.0, 1.2}};
  CHECK(bottleneck(a, b) == Approx(0.2).margin(1e-15));
  CHECK(bottleneck(a, a) == 0.0);
}

TEST_CASE("bottleneck matches exhaustive matching on small diagrams") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_diagram(rng, rng.below(6));
    const auto b = random_diagram(rng, rng.below(6));
    REQUIRE(bottleneck(a, b) == oracle::bottleneck(to_oracle(a), to_oracle(b)));
  }
}

TEST_CASE("bottleneck matches exhaustive matching with many ties") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DiagramPoint> a, b;
    for (std::size_t i = rng.below(6); i > 0; --i) a.push_back({0.0, 0.1 * static_cast<double>(1 + rng.below(5))});
    for (std::size_t i = rng.below(6); i > 0; --i) b.push_back({0.0, 0.1 * static_cast<double>(1 + rng.below(5))});
    REQUIRE(bottleneck(a, b) == oracle::bottleneck(to_oracle(a), to_oracle(b)));
  }
}

TEST_CASE("bottleneck is a symmetric pseudometric") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_diagram(rng, rng.below(11));
    const auto b = random_diagram(rng, rng.below(11));
    const auto c = random_diagram(rng, rng.below(11));
    const double ab = bottleneck(a, b), ba = bottleneck(b, a);
    REQUIRE(ab == ba);
    REQUIRE(ab >= 0.0);
    REQUIRE(bottleneck(a, c) <= ab + bottleneck(b, c) + 1e-12);
  }
}

TEST_CASE("H0 helpers") {
  const auto pts = h0_points(std::vector<double>{0.5, 0.25});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].birth == 0.0);
  CHECK(pts[1].death == 0.25);

  PersistenceDiagram d;
  d.pairs = {{0, 0.0, 0.2, false}, {0, 0.0, 0.3, true}, {0, 0.0, infinity, false}, {1, 0.1, 0.4, false}};
  CHECK(finite_deaths(d) == std::vector<double>{0.2, 0.3});
  CHECK(finite_points(d, 0).size() == 2);
  CHECK(finite_points(d, 1).size() == 1);
  PersistenceDiagram e = d;
  e.pairs[0].death = 0.26;
  CHECK(bottleneck(d, e, 0) == Approx(0.06).margin(1e-15));
  CHECK(bottleneck(d, e, 1) == 0.0);
}

TEST_CASE("classification is permutation invariant and sums to one") {
  Rng rng(6);
  std::vector<double> xs(200);
  for (auto& x : xs) x = rng.uniform();
  const auto a = classify_bars(xs, 0.4);
  std::reverse(xs.begin(), xs.end());
  const auto b = classify_bars(xs, 0.4);
  CHECK(a.prop_long == b.prop_long);
  CHECK(a.prop_short + a.prop_long == Approx(1.0).margin(1e-12));
}

TEST_CASE("long-bar proportion does not depend on maxscale above c_max") {
  const ShapeConfig clean{.shape = Shape::circle, .n = 500};
  ShapeConfig noisy = clean;
  noisy.noise_fraction = 0.3;
  const auto clean_deaths = finite_deaths(h0_persistence(pairwise_distances(sample_shape(clean, 2)), 5.0));
  const double c_max = *std::max_element(clean_deaths.begin(), clean_deaths.end());
  const auto d = pairwise_distances(sample_shape(noisy, 2));
  const double base = classify_bars(finite_deaths(h0_persistence(d, 5.0)), c_max).prop_long;
  CHECK(base > 0.0);
  for (double m : {0.3, 0.5, 1.0}) CHECK(classify_bars(finite_deaths(h0_persistence(d, m)), c_max).prop_long == base);
}
