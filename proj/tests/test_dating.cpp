#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cbdp/dating.hpp"
#include "cbdp/errors.hpp"
#include "cbdp/moments.hpp"
#include "cbdp/pointproc.hpp"
#include "cbdp/stats.hpp"
#include "oracles.hpp"

using namespace cbdp;

namespace {

oracle::Shape to_shape(const Phylogeny& phylo) {
  oracle::Shape shape;
  shape.left.assign(phylo.nodes.size(), -1);
  shape.right.assign(phylo.nodes.size(), -1);
  shape.root = phylo.root;
  for (std::size_t v = 0; v < phylo.nodes.size(); ++v) {
    const auto& kids = phylo.nodes[v].children;
    if (kids.size() == 2) {
      shape.left[v] = kids[0];
      shape.right[v] = kids[1];
    }
  }
  return shape;
}

// Node whose label is `label`; -1 if absent.
int find_label(const Phylogeny& phylo, const std::string& label) {
  for (std::size_t v = 0; v < phylo.nodes.size(); ++v) {
    if (phylo.nodes[v].label == label) return static_cast<int>(v);
  }
  return -1;
}

double age_of(const DatedTree& dated, int node) {
  for (const auto& d : dated.vertices) {
    if (d.node == node) return d.age;
  }
  return NAN;
}

}  // namespace

TEST_CASE("rank counts match exhaustive enumeration for every shape up to seven leaves") {
  int shapes = 0;
  for (int n = 2; n <= 7; ++n) {
    for (const auto& code : oracle::shape_codes(n)) {
      const auto phylo = parse_newick(code + ";");
      const auto brute = oracle::enumerate_rank_counts(to_shape(phylo));
      long long total = 0;
      for (const auto& c : brute.begin()->second) total += c;
      CHECK(count_rankings(phylo) == total);
      for (const auto& [vertex, counts] : brute) {
        const auto exact = rank_counts(phylo, vertex);
        REQUIRE(exact.size() == counts.size());
        for (std::size_t k = 0; k < counts.size(); ++k) CHECK(exact[k] == counts[k]);
        const auto dist = rank_probabilities(phylo, vertex);
        double sum = 0.0;
        for (const double p : dist.probabilities) sum += p;
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
      }
      ++shapes;
    }
  }
  CHECK(shapes == 1 + 1 + 2 + 3 + 6 + 11);
}

TEST_CASE("rank distributions of small shapes") {
  const auto cat = parse_newick("(((A,B),C),D);");
  for (const int v : cat.internal_nodes()) {
    const auto dist = rank_probabilities(cat, v);
    CHECK(std::count(dist.probabilities.begin(), dist.probabilities.end(), 1.0) == 1);
  }
  CHECK(rank_probabilities(cat, cat.root).probabilities[0] == 1.0);

  const auto balanced = parse_newick("((A,B),(C,D));");
  for (const int v : balanced.nodes[balanced.root].children) {
    const auto dist = rank_probabilities(balanced, v);
    CHECK(dist.probabilities == std::vector<double>{0.0, 0.5, 0.5});
  }

  CHECK_THROWS_AS(rank_probabilities(parse_newick("(A,B,C);"), 0), ShapeError);
  CHECK_THROWS_AS(rank_counts(balanced, find_label(balanced, "A")), DomainError);
}

TEST_CASE("rank counts stay exact for large shapes") {
  // A balanced tree on 64 leaves has 62! / prod(subtree sizes) rankings,
  // far beyond 64 bits.
  std::string code = "x";
  for (int level = 0; level < 6; ++level) code = "(" + code + "," + code + ")";
  const auto phylo = parse_newick(code + ";");
  BigInt total = count_rankings(phylo);
  CHECK(total > BigInt(1) << 200);
  BigInt sum = 0;
  for (const auto& c : rank_counts(phylo, phylo.nodes[phylo.root].children[0])) sum += c;
  CHECK(sum == total);
}

TEST_CASE("dating fixtures") {
  const auto prior = AgeCondition::uniform_prior();
  const auto cherry = date_tree(parse_newick("(A,B);"), BDParams(1.0, 0.0), prior);
  CHECK(*cherry.tree.nodes[cherry.tree.root].age == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(cherry.tree.nodes[cherry.tree.root].length.has_value());
  CHECK(*cherry.tree.nodes[find_label(cherry.tree, "A")].length == doctest::Approx(0.5));

  const auto cat_shape = parse_newick("((A,B),C);");
  const auto cat = date_tree(cat_shape, BDParams(1.0, 1.0), prior);
  CHECK(*cat.tree.nodes[cat.tree.root].age == doctest::Approx(2.0).epsilon(1e-12));
  const int inner = cat.tree.nodes[find_label(cat.tree, "A")].parent;
  CHECK(*cat.tree.nodes[inner].age == doctest::Approx(0.5).epsilon(1e-12));

  // E[A_4^1] = 13/12; the cherry parents mix E[A_4^2] = 7/12 and E[A_4^3] = 1/4.
  const auto balanced = date_tree(parse_newick("((A,B),(C,D));"), BDParams(1.0, 0.0), prior);
  CHECK(*balanced.tree.nodes[balanced.tree.root].age == doctest::Approx(13.0 / 12.0).epsilon(1e-12));
  for (const int v : balanced.tree.nodes[balanced.tree.root].children) {
    CHECK(*balanced.tree.nodes[v].age == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
  }
}

TEST_CASE("intervals") {
  const BDParams p(1.0, 0.5);
  const auto shape = parse_newick("(A,B);");
  const auto dated = date_tree(shape, p, AgeCondition::origin(2.0));
  const auto& v = dated.vertices.at(0);
  CHECK(v.lo == doctest::Approx(spec_time_inv_cdf(p, 0.025, AgeCondition::origin(2.0))).epsilon(1e-9));
  CHECK(v.hi == doctest::Approx(spec_time_inv_cdf(p, 0.975, AgeCondition::origin(2.0))).epsilon(1e-9));
  CHECK(*dated.tree.nodes[dated.tree.root].length == doctest::Approx(2.0 - v.age));

  const auto mrca = date_tree(parse_newick("((A,B),(C,D));"), p, AgeCondition::mrca(3.0));
  for (const auto& d : mrca.vertices) {
    CHECK(d.lo <= d.age);
    CHECK(d.age <= d.hi);
    CHECK(d.hi <= 3.0);
    if (d.node == mrca.tree.root) {
      CHECK(d.age == 3.0);
      CHECK(d.lo == doctest::Approx(3.0));
    }
  }

  DatingOptions plain;
  plain.intervals = false;
  for (const auto& d : date_tree(shape, p, AgeCondition::uniform_prior(), plain).vertices) {
    CHECK(d.lo == d.age);
    CHECK(d.hi == d.age);
  }
  DatingOptions bad;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(date_tree(shape, p, AgeCondition::uniform_prior(), bad), DomainError);
  CHECK_THROWS_AS(date_tree(parse_newick("(A,B,C);"), p, AgeCondition::uniform_prior()), ShapeError);
}

TEST_CASE("dated parents are older than their children") {
  Rng rng(21);
  DatingOptions quick;
  quick.intervals = false;
  for (const double lambda : {0.5, 1.0, 2.0}) {
    for (const double rho : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const BDParams p(lambda, rho * lambda);
      for (const int n : {2, 5, 10}) {
        std::vector<AgeCondition> conds = {AgeCondition::origin(0.5), AgeCondition::origin(5.0),
                                           AgeCondition::mrca(2.0), AgeCondition::uniform_prior()};
        for (const auto& cond : conds) {
          const auto pp = sample_point_process(p, n, AgeCondition::origin(1.0), rng);
          const auto tree = label_uniformly(point_process_to_tree(pp), rng);
          const auto dated = date_tree(tree, p, cond, quick);
          for (const auto& node : dated.tree.nodes) {
            if (node.parent >= 0) CHECK(*dated.tree.nodes[node.parent].age > *node.age);
          }
        }
      }
    }
  }
}

TEST_CASE("dated ages are conditional means given the shape") {
  const BDParams p(1.0, 0.4);
  const int n = 6;
  const auto cond = AgeCondition::uniform_prior();
  DatingOptions quick;
  quick.intervals = false;
  Rng rng(31);
  std::vector<double> root_ages;
  std::vector<double> residuals;
  for (int i = 0; i < 10000; ++i) {
    auto tree = label_uniformly(point_process_to_tree(sample_point_process(p, n, cond, rng)), rng);
    tree.derive_ages();
    const int parent = tree.nodes[find_label(tree, "1")].parent;
    const double truth = *tree.nodes[parent].age;
    const auto dated = date_tree(tree, p, cond, quick);
    root_ages.push_back(*dated.tree.nodes[dated.tree.root].age);
    residuals.push_back(truth - age_of(dated, parent));

    // Every rank is taken by exactly one vertex, so the dated ages add up to
    // the sum of all expected speciation times.
    if (i < 100) {
      double total = 0.0;
      double expected = 0.0;
      for (const auto& d : dated.vertices) total += d.age;
      for (int k = 1; k < n; ++k) expected += expected_kth(p, n, k, cond).value;
      CHECK(total == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  const auto root = mean_estimate(root_ages);
  CHECK(std::fabs(root.mean - expected_kth(p, n, 1, cond).value) <= std::max(3.0 * root.standard_error, 1e-12));
  const auto resid = mean_estimate(residuals);
  CHECK(std::fabs(resid.mean) < 3.0 * resid.standard_error);
}

TEST_CASE("dating table") {
  const auto dated = date_tree(parse_newick("((A,B)ab,C);"), BDParams(1.0, 1.0), AgeCondition::uniform_prior());
  std::ostringstream out;
  write_dating_tsv(out, dated, 6);
  const std::string text = out.str();
  CHECK(text.rfind("vertex\tage\tlo\thi\n", 0) == 0);
  CHECK(text.find("\nv0\t2.0\t") != std::string::npos);
  CHECK(text.find("\nab\t0.5\t") != std::string::npos);
}
