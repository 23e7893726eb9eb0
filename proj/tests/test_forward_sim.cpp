#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cbdp/densities.hpp"
#include "cbdp/errors.hpp"
#include "cbdp/forward_sim.hpp"
#include "cbdp/phylo.hpp"
#include "cbdp/pointproc.hpp"
#include "cbdp/stats.hpp"
#include "oracles.hpp"

using namespace cbdp;

namespace {

double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Internal node times, oldest first.
std::vector<double> event_times(const OrientedTree& tree) {
  std::vector<double> times;
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) times.push_back(node.time);
  }
  std::sort(times.rbegin(), times.rend());
  return times;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[k]);
  return out;
}

}  // namespace

TEST_CASE("zero time leaves the founding lineage alone") {
  Rng rng(1);
  const auto tree = simulate_complete(BDParams(1.0, 0.0), 0.0, rng);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.extant_count() == 1);
  CHECK_THROWS_AS(simulate_complete(BDParams(1.0, 0.0), -1.0, rng), DomainError);
}

TEST_CASE("complete trees keep time ordering") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto tree = simulate_complete(BDParams(1.0, 0.6), 3.0, rng);
    for (const auto& node : tree.nodes) {
      CHECK(node.start >= node.end);
      if (node.extinct) CHECK(node.end > 0.0);
      if (!node.extinct && !node.speciates()) CHECK(node.end == 0.0);
      if (node.parent >= 0) CHECK(node.start == tree.nodes[node.parent].end);
    }
  }
}

TEST_CASE("extinction frequency and count distribution follow p_n(t)") {
  const BDParams p(1.0, 0.5);
  const double t = 1.7;
  Rng rng(3);
  const int runs = 100000;
  std::vector<double> observed(8, 0.0);  // counts 0..6 and a tail cell
  for (int i = 0; i < runs; ++i) {
    const int extant = simulate_complete(p, t, rng).extant_count();
    observed[std::min(extant, 7)] += 1.0;
  }
  const double p0 = transition_probability(p, 0, t);
  const double se = std::sqrt(p0 * (1.0 - p0) / runs);
  CHECK(std::fabs(observed[0] / runs - p0) < 3.0 * se);

  std::vector<double> expected(8, 0.0);
  double head = 0.0;
  for (int n = 0; n <= 6; ++n) {
    expected[n] = runs * transition_probability(p, n, t);
    head += expected[n];
  }
  expected[7] = runs - head;
  CHECK(chi_square_gof(observed, expected).p_value > 0.01);
}

TEST_CASE("event cap") {
  Rng rng(4);
  CHECK_THROWS_AS(simulate_complete(BDParams(5.0, 0.0), 10.0, rng, 100), CapacityError);
}

TEST_CASE("pruning") {
  Rng rng(5);
  int empties = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto tree = simulate_complete(BDParams(1.0, 0.9), 2.0, rng);
    const auto pruned = prune_to_reconstructed(tree, rng);
    if (tree.extant_count() == 0) {
      CHECK_FALSE(pruned.has_value());
      ++empties;
      continue;
    }
    REQUIRE(pruned.has_value());
    pruned->validate();
    CHECK(static_cast<int>(event_times(*pruned).size()) == tree.extant_count() - 1);
    CHECK(pruned->leaf_count() == tree.extant_count());
  }
  CHECK(empties > 0);

  // Without extinction every speciation survives with its time.
  for (int i = 0; i < 200; ++i) {
    const auto tree = simulate_complete(BDParams(1.0, 0.0), 1.5, rng);
    const auto pruned = prune_to_reconstructed(tree, rng);
    REQUIRE(pruned.has_value());
    std::vector<double> original;
    for (const auto& node : tree.nodes) {
      if (node.speciates()) original.push_back(node.end);
    }
    std::sort(original.rbegin(), original.rend());
    CHECK(event_times(*pruned) == original);
  }
  CHECK_FALSE(prune_to_reconstructed(CompleteTree{}, rng).has_value());
}

TEST_CASE("pruned orientation is re-randomized") {
  // Root splits at 1 and only its left daughter splits again, at 0.5.
  CompleteTree tree;
  tree.origin = 2.0;
  tree.nodes = {{2.0, 1.0, false, -1, 1, 2}, {1.0, 0.5, false, 0, 3, 4}, {1.0, 0.0, false, 0, -1, -1},
                {0.5, 0.0, false, 1, -1, -1}, {0.5, 0.0, false, 1, -1, -1}};
  Rng rng(6);
  int internal_left = 0;
  const int total = 20000;
  for (int i = 0; i < total; ++i) {
    const auto pruned = prune_to_reconstructed(tree, rng);
    const auto& root = pruned->nodes[pruned->root];
    CHECK(root.time == 1.0);
    internal_left += pruned->nodes[root.left].is_leaf() ? 0 : 1;
  }
  CHECK(std::fabs(internal_left / static_cast<double>(total) - 0.5) < 3.0 * std::sqrt(0.25 / total));
}

TEST_CASE("two-species forward trees match the speciation-time distribution") {
  const BDParams p(1.0, 0.0);
  const auto cond = AgeCondition::origin(1.5);
  Rng rng(7);
  std::vector<double> times;
  for (int i = 0; i < 10000; ++i) times.push_back(event_times(rejection_sample_conditioned(p, 2, cond, rng))[0]);
  const auto ks = ks_one_sample(times, [&](double s) { return spec_time_cdf(p, s, cond); });
  CHECK(ks.statistic < ks_critical_1pct(times.size()));
}

TEST_CASE("order statistics of forward trees with five species") {
  const BDParams p(1.0, 0.5);
  const double t = 2.0;
  Rng rng(8);
  std::vector<std::vector<double>> rows;
  RejectionStats stats;
  const int accepted = 10000;
  for (int i = 0; i < accepted; ++i) {
    rows.push_back(event_times(rejection_sample_conditioned(p, 5, AgeCondition::origin(t), rng,
                                                            kDefaultMaxAttempts, &stats)));
  }
  for (int k = 1; k <= 4; ++k) {
    const auto ks = ks_one_sample(column(rows, k - 1), [&](double s) { return kth_cdf_given_age(p, 5, k, s, t); });
    CHECK(ks.statistic < ks_critical_1pct(rows.size()));
  }

  const double rate = transition_probability(p, 5, t);
  const double observed = accepted / static_cast<double>(stats.attempts);
  CHECK(std::fabs(observed - rate) < 3.0 * std::sqrt(rate * (1.0 - rate) / stats.attempts));
}

TEST_CASE("forward and point-process samplers agree") {
  const BDParams p(1.0, 0.5);
  const auto cond = AgeCondition::origin(2.0);
  Rng forward_rng(9);
  Rng pp_rng(10);
  std::vector<std::vector<double>> forward_rows;
  std::vector<std::vector<double>> pp_rows;
  std::map<std::string, std::pair<double, double>> shapes;
  for (int i = 0; i < 10000; ++i) {
    const auto f = rejection_sample_conditioned(p, 4, cond, forward_rng);
    const auto g = point_process_to_tree(sample_point_process(p, 4, cond, pp_rng));
    forward_rows.push_back(event_times(f));
    pp_rows.push_back(event_times(g));
    shapes[ranked_oriented_code(f)].first += 1.0;
    shapes[ranked_oriented_code(g)].second += 1.0;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(ks_two_sample(column(forward_rows, k), column(pp_rows, k)).p_value > 0.01);
  }
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [code, c] : shapes) {
    a.push_back(c.first);
    b.push_back(c.second);
  }
  CHECK(shapes.size() == 6);
  CHECK(chi_square_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("conditioning on the mrca age") {
  const BDParams p(1.0, 0.4);
  Rng rng(11);
  std::vector<double> second;
  for (int i = 0; i < 4000; ++i) {
    const auto tree = rejection_sample_conditioned(p, 4, AgeCondition::mrca(1.5), rng);
    CHECK(tree.leaf_count() == 4);
    CHECK(tree.nodes[tree.root].time == 1.5);
    CHECK_FALSE(tree.origin.has_value());
    second.push_back(event_times(tree)[1]);
  }
  // The remaining events are the n-1 = 3 leaves' order statistics given age t.
  const auto ks = ks_one_sample(second, [&](double s) { return kth_cdf_given_age(p, 3, 1, s, 1.5); });
  CHECK(ks.statistic < ks_critical_1pct(second.size()));
}

TEST_CASE("flat-prior proposals recover the truncated origin posterior") {
  const BDParams p(1.0, 0.5);
  const int n = 3;
  const double t_max = default_proposal_bound(p, n);
  CHECK(origin_cdf(p, t_max, n) == doctest::Approx(0.999).epsilon(1e-9));
  Rng rng(12);
  std::vector<double> origins;
  for (int i = 0; i < 5000; ++i) {
    const auto tree = rejection_sample_conditioned(p, n, AgeCondition::uniform_prior(), rng, kDefaultMaxAttempts,
                                                   nullptr, t_max);
    REQUIRE(tree.origin.has_value());
    origins.push_back(*tree.origin);
  }
  const double top = origin_cdf(p, t_max, n);
  const auto ks = ks_one_sample(origins, [&](double t) { return origin_cdf(p, t, n) / top; });
  CHECK(ks.statistic < ks_critical_1pct(origins.size()));
}

TEST_CASE("the rejection sampler gives up with statistics") {
  Rng rng(13);
  RejectionStats stats;
  try {
    rejection_sample_conditioned(BDParams(1.0, 0.5), 8, AgeCondition::origin(0.01), rng, 50, &stats);
    FAIL("expected a sampling error");
  } catch (const SamplingError& e) {
    CHECK(e.attempts() == 50);
  }
  CHECK(stats.attempts == 50);

  RejectionStats capped;
  CHECK_THROWS_AS(
      rejection_sample_conditioned(BDParams(3.0, 0.0), 2, AgeCondition::origin(8.0), rng, 3, &capped),
      SamplingError);
  CHECK(capped.attempts == 3);
}
