#include "cbdp/oriented_tree.hpp"

#include <cmath>
#include <string>

#include "cbdp/errors.hpp"

namespace cbdp {

int OrientedTree::leaf_count() const {
  int count = 0;
  for (const auto& node : nodes) count += node.is_leaf() ? 1 : 0;
  return count;
}

std::vector<int> OrientedTree::in_order() const {
  std::vector<int> order;
  order.reserve(nodes.size());
  std::vector<int> stack;
  int current = root;
  while (current >= 0 || !stack.empty()) {
    while (current >= 0) {
      stack.push_back(current);
      current = nodes[current].left;
    }
    current = stack.back();
    stack.pop_back();
    order.push_back(current);
    current = nodes[current].right;
  }
  return order;
}

void OrientedTree::validate() const {
  const int size = static_cast<int>(nodes.size());
  if (size == 0 || size % 2 == 0) throw StructureError("binary tree needs 2n-1 nodes");
  if (root < 0 || root >= size) throw StructureError("root index out of range");
  if (nodes[root].parent != -1) throw StructureError("root has a parent");
  const int n = (size + 1) / 2;

  std::vector<int> seen(size, 0);
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (seen[v]++) throw StructureError("node reachable twice");
    const auto& node = nodes[v];
    if ((node.left < 0) != (node.right < 0)) {
      throw StructureError("internal node " + std::to_string(v) + " needs two children");
    }
    for (const int child : {node.left, node.right}) {
      if (child < 0) continue;
      if (child >= size) throw StructureError("child index out of range");
      if (nodes[child].parent != v) throw StructureError("parent link mismatch");
      if (nodes[child].time > node.time) {
        throw StructureError("child older than its parent");
      }
      stack.push_back(child);
    }
  }
  for (int v = 0; v < size; ++v) {
    if (!seen[v]) throw StructureError("node " + std::to_string(v) + " unreachable from root");
  }

  std::vector<int> rank_owner(n, -1);
  int next_leaf = 0;
  for (const int v : in_order()) {
    const auto& node = nodes[v];
    if (node.is_leaf()) {
      if (node.leaf_index != next_leaf++) throw StructureError("leaf indices not in order");
      if (node.time != 0.0) throw StructureError("leaves must sit at time 0");
      continue;
    }
    if (!(node.time > 0.0) || !std::isfinite(node.time)) {
      throw StructureError("internal node times must be finite and positive");
    }
    if (node.rank < 1 || node.rank > n - 1 || rank_owner[node.rank] >= 0) {
      throw StructureError("ranks must be a bijection onto 1..n-1");
    }
    rank_owner[node.rank] = v;
  }
  for (int rank = 2; rank <= n - 1; ++rank) {
    if (nodes[rank_owner[rank]].time > nodes[rank_owner[rank - 1]].time) {
      throw StructureError("ranks must follow decreasing time");
    }
  }
  if (origin && !(*origin >= nodes[root].time)) {
    throw StructureError("origin younger than the root");
  }
}

}  // namespace cbdp
