#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cbdp/densities.hpp"
#include "cbdp/errors.hpp"
#include "cbdp/phylo.hpp"
#include "cbdp/pointproc.hpp"
#include "cbdp/stats.hpp"

using namespace cbdp;

namespace {

double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Counts per code, aligned over the union of keys of both maps.
std::pair<std::vector<double>, std::vector<double>> aligned(const std::map<std::string, double>& a,
                                                            const std::map<std::string, double>& b) {
  std::map<std::string, std::pair<double, double>> both;
  for (const auto& [k, v] : a) both[k].first = v;
  for (const auto& [k, v] : b) both[k].second = v;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [k, v] : both) {
    x.push_back(v.first);
    y.push_back(v.second);
  }
  return {x, y};
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("origin sampling is reproducible and follows the posterior") {
  const BDParams p(1.0, 0.5);
  Rng a(42);
  Rng b(42);
  const double first = sample_origin_age(p, 5, a);
  CHECK(first == sample_origin_age(p, 5, b));
  CHECK(first == doctest::Approx(2.8974856898021213).epsilon(1e-12));

  Rng c(42);
  CHECK(first == origin_inv_cdf(p, c.uniform(), 5));

  Rng rng(7);
  std::vector<double> draws(100000);
  for (double& d : draws) d = sample_origin_age(p, 5, rng);
  const auto ks = ks_one_sample(draws, [&](double t) { return origin_cdf(p, t, 5); });
  CHECK(ks.statistic < ks_critical_1pct(draws.size()));

  CHECK_THROWS_AS(sample_origin_age(BDParams(1.0, 1.0), 5, rng), RegimeError);
}

TEST_CASE("a two-leaf process has one height distributed as a speciation time") {
  const BDParams p(1.0, 0.3);
  const auto cond = AgeCondition::origin(2.0);
  Rng rng(11);
  std::vector<double> heights;
  for (int i = 0; i < 100000; ++i) {
    const auto pp = sample_point_process(p, 2, cond, rng);
    REQUIRE(pp.heights.size() == 1);
    heights.push_back(pp.heights[0]);
  }
  const auto ks = ks_one_sample(heights, [&](double s) { return spec_time_cdf(p, s, cond); });
  CHECK(ks.statistic < ks_critical_1pct(heights.size()));
}

TEST_CASE("heights lie below the origin") {
  const BDParams p(2.0, 1.0);
  Rng rng(3);
  bool inside = true;
  for (int i = 0; i < 100000; ++i) {
    const auto pp = sample_point_process(p, 10, AgeCondition::origin(1.5), rng);
    for (const double h : pp.heights) inside = inside && h > 0.0 && h < 1.5;
  }
  CHECK(inside);

  const auto prior = sample_point_process(p, 6, AgeCondition::uniform_prior(), rng);
  REQUIRE(prior.age.has_value());
  for (const double h : prior.heights) CHECK(h < *prior.age);
}

TEST_CASE("conditioning on the mrca puts one height at the given age") {
  const BDParams p(1.0, 0.5);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto pp = sample_point_process(p, 6, AgeCondition::mrca(3.0), rng);
    CHECK(std::count(pp.heights.begin(), pp.heights.end(), 3.0) == 1);
    CHECK(*std::max_element(pp.heights.begin(), pp.heights.end()) == 3.0);
    CHECK_FALSE(pp.age.has_value());
  }
}

TEST_CASE("hand-built trees") {
  PointProcess cherry{2, {1.0}, std::nullopt};
  const auto t2 = point_process_to_tree(cherry);
  t2.validate();
  CHECK(t2.leaf_count() == 2);
  CHECK(t2.nodes[t2.root].time == 1.0);
  CHECK(t2.nodes[t2.root].rank == 1);

  PointProcess cat{3, {2.0, 1.0}, std::nullopt};
  const auto t3 = point_process_to_tree(cat);
  t3.validate();
  const auto& root = t3.nodes[t3.root];
  CHECK(root.time == 2.0);
  CHECK(root.rank == 1);
  const auto& left = t3.nodes[root.left];
  const auto& right = t3.nodes[root.right];
  CHECK(left.is_leaf());
  CHECK(left.leaf_index == 0);
  CHECK(right.time == 1.0);
  CHECK(right.rank == 2);
  CHECK(t3.nodes[right.left].leaf_index == 1);
  CHECK(t3.nodes[right.right].leaf_index == 2);

  CHECK(tree_to_point_process(t2).heights == cherry.heights);
  CHECK(tree_to_point_process(t3).heights == cat.heights);
}

TEST_CASE("the bijection round trips exactly") {
  const BDParams p(1.0, 0.4);
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const auto pp = sample_point_process(p, n, AgeCondition::uniform_prior(), rng);
    const auto tree = point_process_to_tree(pp);
    tree.validate();
    const auto back = tree_to_point_process(tree);
    REQUIRE(back.n == pp.n);
    REQUIRE(back.heights == pp.heights);
    REQUIRE(back.age == pp.age);
    const auto again = point_process_to_tree(back);
    REQUIRE(ranked_oriented_code(again) == ranked_oriented_code(tree));
  }
}

TEST_CASE("ties are broken by gap index") {
  PointProcess tied{4, {1.0, 1.0, 1.0}, std::nullopt};
  const auto tree = point_process_to_tree(tied);
  tree.validate();
  CHECK(tree_to_point_process(tree).heights == tied.heights);
  PointProcess bad{3, {1.0, -1.0}, std::nullopt};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("labelings are uniform and lengths are ultrametric") {
  PointProcess cherry{2, {1.0}, 1.5};
  const auto tree = point_process_to_tree(cherry);
  Rng rng(1);
  int first_is_1 = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const auto phylo = label_uniformly(tree, rng);
    const auto& root = phylo.nodes[phylo.root];
    if (phylo.nodes[root.children[0]].label == "1") ++first_is_1;
  }
  const double se = std::sqrt(0.25 / trials);
  CHECK(std::fabs(first_is_1 / static_cast<double>(trials) - 0.5) < 3.0 * se);

  Rng big(2);
  const BDParams p(1.0, 0.2);
  for (int i = 0; i < 100; ++i) {
    const auto pp = sample_point_process(p, 8, AgeCondition::origin(4.0), big);
    const auto phylo = label_uniformly(point_process_to_tree(pp), big);
    for (const auto& node : phylo.nodes) {
      CHECK(node.length.has_value());
      CHECK(*node.length >= 0.0);
    }
    CHECK(phylo.is_ultrametric(1e-9));
    CHECK(*phylo.nodes[phylo.root].length == doctest::Approx(4.0 - *std::max_element(pp.heights.begin(), pp.heights.end())));
  }
}

TEST_CASE("ranked oriented trees are uniform") {
  const BDParams p(1.0, 0.5);
  for (const int n : {3, 4, 5}) {
    Rng rng(1000 + n);
    std::map<std::string, double> counts;
    const int samples = n == 4 ? 60000 : 30000;
    for (int i = 0; i < samples; ++i) {
      counts[ranked_oriented_code(point_process_to_tree(sample_point_process(p, n, AgeCondition::origin(2.0), rng)))] +=
          1.0;
    }
    CHECK(counts.size() == static_cast<std::size_t>(factorial(n - 1)));
    std::vector<double> observed;
    for (const auto& [code, c] : counts) observed.push_back(c);
    const std::vector<double> expected(observed.size(), samples / factorial(n - 1));
    CHECK(chi_square_gof(observed, expected).p_value > 0.01);
  }
}

TEST_CASE("permuting the heights leaves ranked shapes unchanged in distribution") {
  const BDParams p(1.0, 0.3);
  Rng rng(77);
  Rng other(78);
  std::map<std::string, double> direct;
  std::map<std::string, double> permuted;
  for (int i = 0; i < 40000; ++i) {
    direct[ranked_shape_code(point_process_to_tree(sample_point_process(p, 6, AgeCondition::origin(3.0), rng)))] +=
        1.0;
    auto pp = sample_point_process(p, 6, AgeCondition::origin(3.0), other);
    std::sort(pp.heights.begin(), pp.heights.end());
    std::shuffle(pp.heights.begin(), pp.heights.end(), other);
    permuted[ranked_shape_code(point_process_to_tree(pp))] += 1.0;
  }
  const auto [a, b] = aligned(direct, permuted);
  CHECK(chi_square_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("identical seeds give identical output") {
  const BDParams p(1.3, 0.7);
  auto render = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::string out;
    for (int i = 0; i < 50; ++i) {
      const auto pp = sample_point_process(p, 7, AgeCondition::uniform_prior(), rng);
      out += write_newick(label_uniformly(point_process_to_tree(pp), rng)) + "\n";
    }
    return out;
  };
  CHECK(render(123) == render(123));
  CHECK(render(123) != render(124));
  Rng rng(1);
  CHECK_THROWS_AS(sample_point_process(p, 1, AgeCondition::uniform_prior(), rng), DomainError);
}
