#pragma once

#include <optional>
#include <vector>

namespace cbdp {

struct OrientedNode {
  double time = 0.0;  // before present; 0 for leaves
  int rank = 0;       // 1 = oldest internal node; 0 for leaves
  int left = -1;
  int right = -1;
  int parent = -1;
  int leaf_index = -1;  // horizontal position 0..n-1 for leaves

  bool is_leaf() const noexcept { return left < 0 && right < 0; }
};

// Binary tree without leaf labels whose daughter edges are ordered
// (left, right). Internal nodes carry their speciation time and rank.
struct OrientedTree {
  std::vector<OrientedNode> nodes;
  int root = -1;
  std::optional<double> origin;  // time of origin when known

  int leaf_count() const;
  // Node indices in in-order (left subtree, node, right subtree).
  std::vector<int> in_order() const;
  // Throws StructureError unless the tree is a well-formed ranked oriented tree.
  void validate() const;
};

}  // namespace cbdp
