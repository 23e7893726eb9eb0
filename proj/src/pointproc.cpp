#include "cbdp/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cbdp/errors.hpp"

namespace cbdp {

void PointProcess::validate() const {
  if (n < 2) throw DomainError("point process needs n >= 2 leaves");
  if (heights.size() != static_cast<std::size_t>(n - 1)) {
    throw DomainError("point process needs n-1 heights");
  }
  for (const double h : heights) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("heights must be finite and positive");
    if (age && !(h < *age)) throw DomainError("heights must be below the origin age");
  }
}

double sample_origin_age(const BDParams& params, int n, Rng& rng) {
  return origin_inv_cdf(params, rng.uniform(), n);
}

PointProcess sample_point_process(const BDParams& params, int n, const AgeCondition& cond, Rng& rng) {
  if (n < 2) throw DomainError("point process needs n >= 2 leaves");
  PointProcess pp;
  pp.n = n;
  pp.heights.resize(n - 1);

  if (cond.kind() == AgeCondition::Kind::MrcaAge) {
    const double t = cond.age();
    const auto mrca_gap = static_cast<std::size_t>(rng.below(n - 1));
    for (std::size_t i = 0; i < pp.heights.size(); ++i) {
      pp.heights[i] = i == mrca_gap ? t : spec_time_inv_cdf(params, rng.uniform(), cond);
    }
    return pp;
  }

  const double t = cond.kind() == AgeCondition::Kind::UniformPrior ? sample_origin_age(params, n, rng)
                                                                   : cond.age();
  const auto given_age = AgeCondition::origin(t);
  for (double& h : pp.heights) h = spec_time_inv_cdf(params, rng.uniform(), given_age);
  pp.age = t;
  return pp;
}

namespace {

int find_block(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

OrientedTree point_process_to_tree(const PointProcess& pp) {
  pp.validate();
  const int n = pp.n;
  OrientedTree tree;
  tree.origin = pp.age;
  tree.nodes.resize(2 * n - 1);
  for (int i = 0; i < n; ++i) tree.nodes[i].leaf_index = i;

  std::vector<int> gaps(n - 1);
  std::iota(gaps.begin(), gaps.end(), 0);
  std::sort(gaps.begin(), gaps.end(), [&](int a, int b) {
    if (pp.heights[a] != pp.heights[b]) return pp.heights[a] < pp.heights[b];
    return a < b;
  });

  // Union-find over leaf positions; each block remembers its subtree root.
  std::vector<int> block(n);
  std::iota(block.begin(), block.end(), 0);
  std::vector<int> block_node(n);
  std::iota(block_node.begin(), block_node.end(), 0);

  for (int step = 0; step < n - 1; ++step) {
    const int gap = gaps[step];
    const int left_block = find_block(block, gap);
    const int right_block = find_block(block, gap + 1);
    const int v = n + step;
    auto& node = tree.nodes[v];
    node.time = pp.heights[gap];
    node.rank = n - 1 - step;
    node.left = block_node[left_block];
    node.right = block_node[right_block];
    tree.nodes[node.left].parent = v;
    tree.nodes[node.right].parent = v;
    block[right_block] = left_block;
    block_node[left_block] = v;
  }
  tree.root = 2 * n - 2;
  return tree;
}

PointProcess tree_to_point_process(const OrientedTree& tree) {
  tree.validate();
  PointProcess pp;
  pp.n = tree.leaf_count();
  if (pp.n < 2) throw StructureError("point process needs a tree with at least 2 leaves");
  pp.age = tree.origin;
  pp.heights.reserve(pp.n - 1);
  for (const int v : tree.in_order()) {
    if (!tree.nodes[v].is_leaf()) pp.heights.push_back(tree.nodes[v].time);
  }
  return pp;
}

Phylogeny label_uniformly(const OrientedTree& tree, Rng& rng) {
  tree.validate();
  const int n = tree.leaf_count();
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  for (int i = n - 1; i > 0; --i) {
    std::swap(labels[i], labels[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }

  Phylogeny phylo;
  phylo.nodes.resize(tree.nodes.size());
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const auto& src = tree.nodes[v];
    auto& dst = phylo.nodes[v];
    dst.parent = src.parent;
    dst.age = src.time;
    if (src.is_leaf()) {
      dst.label = std::to_string(labels[src.leaf_index]);
    } else {
      dst.children = {src.left, src.right};
    }
    if (src.parent >= 0) dst.length = tree.nodes[src.parent].time - src.time;
  }
  phylo.root = tree.root;
  if (tree.origin) phylo.nodes[tree.root].length = *tree.origin - tree.nodes[tree.root].time;
  return phylo;
}

}  // namespace cbdp
