#include "cbdp/dating.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cbdp/errors.hpp"
#include "cbdp/format.hpp"
#include "cbdp/moments.hpp"
#include "cbdp/numerics.hpp"

namespace cbdp {

namespace {

using Float = boost::multiprecision::cpp_bin_float_50;

void require_binary(const Phylogeny& phylo) {
  if (phylo.root < 0) throw ShapeError("empty tree");
  if (!phylo.is_binary()) throw ShapeError("dating needs a binary tree");
  if (phylo.nodes[phylo.root].is_leaf()) throw ShapeError("tree has no internal nodes");
}

class Pascal {
 public:
  explicit Pascal(int max_n) : rows_(max_n + 1) {
    for (int n = 0; n <= max_n; ++n) {
      rows_[n].resize(n + 1);
      rows_[n][0] = rows_[n][n] = 1;
      for (int k = 1; k < n; ++k) rows_[n][k] = rows_[n - 1][k - 1] + rows_[n - 1][k];
    }
  }
  const BigInt& operator()(int n, int k) const { return rows_[n][k]; }

 private:
  std::vector<std::vector<BigInt>> rows_;
};

// Internal-node counts and ranking counts of every subtree.
struct SubtreeCounts {
  std::vector<int> internal;
  std::vector<BigInt> rankings;
};

SubtreeCounts subtree_counts(const Phylogeny& phylo, const Pascal& choose) {
  SubtreeCounts counts;
  counts.internal.assign(phylo.nodes.size(), 0);
  counts.rankings.assign(phylo.nodes.size(), BigInt(1));
  for (const int v : phylo.postorder()) {
    const auto& children = phylo.nodes[v].children;
    if (children.empty()) continue;
    const int a = children[0];
    const int b = children[1];
    counts.internal[v] = 1 + counts.internal[a] + counts.internal[b];
    counts.rankings[v] = counts.rankings[a] * counts.rankings[b] *
                         choose(counts.internal[a] + counts.internal[b], counts.internal[a]);
  }
  return counts;
}

int internal_count(const Phylogeny& phylo) {
  int count = 0;
  for (const auto& node : phylo.nodes) count += node.is_leaf() ? 0 : 1;
  return count;
}

double ratio(const BigInt& num, const BigInt& den) {
  return static_cast<double>(Float(num) / Float(den));
}

}  // namespace

BigInt count_rankings(const Phylogeny& phylo) {
  require_binary(phylo);
  const Pascal choose(internal_count(phylo));
  return subtree_counts(phylo, choose).rankings[phylo.root];
}

std::vector<BigInt> rank_counts(const Phylogeny& phylo, int vertex) {
  require_binary(phylo);
  if (vertex < 0 || vertex >= static_cast<int>(phylo.nodes.size())) {
    throw DomainError("vertex index out of range");
  }
  if (phylo.nodes[vertex].is_leaf()) throw DomainError("rank is defined for internal vertices only");
  const int m = internal_count(phylo);
  const Pascal choose(m);
  const auto sub = subtree_counts(phylo, choose);

  // ways[j] (1-based position j of `vertex`) over the rankings of the current subtree.
  std::vector<BigInt> ways(m + 2, BigInt(0));
  ways[1] = sub.rankings[vertex];
  int child = vertex;
  while (phylo.nodes[child].parent >= 0) {
    const int u = phylo.nodes[child].parent;
    const auto& kids = phylo.nodes[u].children;
    const int sibling = kids[0] == child ? kids[1] : kids[0];
    const int a = sub.internal[child];
    const int s = sub.internal[sibling];
    std::vector<BigInt> next(m + 2, BigInt(0));
    for (int j = 1; j <= a; ++j) {
      if (ways[j] == 0) continue;
      const BigInt base = ways[j] * sub.rankings[sibling];
      for (int q = 0; q <= s; ++q) {
        next[1 + j + q] += base * choose(j - 1 + q, q) * choose(a - j + s - q, s - q);
      }
    }
    ways.swap(next);
    child = u;
  }
  return {ways.begin() + 1, ways.begin() + 1 + m};
}

RankDistribution rank_probabilities(const Phylogeny& phylo, int vertex) {
  const auto counts = rank_counts(phylo, vertex);
  BigInt total = 0;
  for (const auto& c : counts) total += c;
  RankDistribution dist;
  dist.vertex = vertex;
  dist.probabilities.reserve(counts.size());
  for (const auto& c : counts) dist.probabilities.push_back(ratio(c, total));
  return dist;
}

namespace {

double kth_cdf(const BDParams& params, int n, int k, double s, const AgeCondition& cond) {
  switch (cond.kind()) {
    case AgeCondition::Kind::UniformPrior:
      return kth_cdf_uniform_prior(params, n, k, s);
    case AgeCondition::Kind::OriginAge:
      return kth_cdf_given_age(params, n, k, s, cond.age());
    case AgeCondition::Kind::MrcaAge:
      if (k == 1) return s >= cond.age() ? 1.0 : 0.0;
      return kth_cdf_given_age(params, n - 1, k - 1, std::min(s, cond.age()), cond.age());
  }
  return 0.0;
}

double mixture_quantile(const std::vector<double>& weights, const BDParams& params, int n,
                        const AgeCondition& cond, double target, double start) {
  auto mixed = [&](double s) {
    double value = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) value += weights[i] * kth_cdf(params, n, static_cast<int>(i) + 1, s, cond);
    }
    return value;
  };
  double hi = cond.has_age() ? cond.age() : std::max(start, 1e-300);
  if (!cond.has_age()) {
    for (int i = 0; i < 2000 && mixed(hi) < target; ++i) hi *= 2.0;
  }
  return invert_monotone_cdf(mixed, target, 0.0, hi, 1e-12);
}

}  // namespace

DatedTree date_tree(const Phylogeny& shape, const BDParams& params, const AgeCondition& cond,
                    const DatingOptions& options) {
  require_binary(shape);
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const int n = shape.leaf_count();

  std::vector<double> expected(n - 1);
  for (int k = 1; k <= n - 1; ++k) expected[k - 1] = expected_kth(params, n, k, cond).value;

  DatedTree dated;
  dated.tree = shape;
  for (auto& node : dated.tree.nodes) {
    if (node.is_leaf()) node.age = 0.0;
  }
  for (const int v : shape.internal_nodes()) {
    const auto dist = rank_probabilities(shape, v);
    VertexDate date;
    date.node = v;
    for (int k = 1; k <= n - 1; ++k) date.age += dist.probabilities[k - 1] * expected[k - 1];
    if (options.intervals) {
      const double tail = 0.5 * (1.0 - options.alpha);
      date.lo = mixture_quantile(dist.probabilities, params, n, cond, tail, date.age);
      date.hi = mixture_quantile(dist.probabilities, params, n, cond, 1.0 - tail, date.age);
    } else {
      date.lo = date.hi = date.age;
    }
    dated.tree.nodes[v].age = date.age;
    dated.vertices.push_back(date);
  }
  dated.tree.set_lengths_from_ages();
  auto& root = dated.tree.nodes[dated.tree.root];
  if (cond.kind() == AgeCondition::Kind::OriginAge) {
    root.length = cond.age() - *root.age;
  } else {
    root.length.reset();
  }
  return dated;
}

void write_dating_tsv(std::ostream& out, const DatedTree& dated, int precision) {
  const auto order = dated.tree.preorder();
  std::vector<int> position(dated.tree.nodes.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);
  out << "vertex\tage\tlo\thi\n";
  for (const auto& date : dated.vertices) {
    const auto& label = dated.tree.nodes[date.node].label;
    out << (label.empty() ? "v" + std::to_string(position[date.node]) : label) << '\t'
        << format_number(date.age, precision) << '\t' << format_number(date.lo, precision) << '\t'
        << format_number(date.hi, precision) << '\n';
  }
}

}  // namespace cbdp
