#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbdp/densities.hpp"
#include "cbdp/oriented_tree.hpp"
#include "cbdp/params.hpp"

namespace cbdp {

struct PhyloNode {
  std::string label;
  std::optional<double> length;  // edge to the parent; on the root, the root edge
  std::optional<double> age;     // time before present
  int parent = -1;
  std::vector<int> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

// Rooted tree with text labels, optional branch lengths and node ages.
struct Phylogeny {
  std::vector<PhyloNode> nodes;
  int root = -1;

  int add_node(int parent);
  int leaf_count() const;
  bool is_binary() const;
  std::vector<int> preorder() const;
  std::vector<int> postorder() const;
  std::vector<int> internal_nodes() const;  // preorder

  // Ages from branch lengths (leaves at the youngest level). Returns false and
  // leaves ages untouched when any non-root length is missing or the tree is
  // not ultrametric within rel_tol.
  bool derive_ages(double rel_tol = 1e-9);
  bool is_ultrametric(double rel_tol = 1e-9) const;
  // Branch lengths from ages; nodes without an age on either end are skipped.
  void set_lengths_from_ages();
};

// Single Newick statement terminated by ';'. Supports quoted labels, branch
// lengths and [bracket comments]. Throws NewickError with a byte offset.
Phylogeny parse_newick(std::string_view text);
// All statements in a multi-tree text (one per ';').
std::vector<Phylogeny> parse_newick_stream(std::string_view text);

inline constexpr int kDefaultNewickPrecision = 12;

// Children in stored order; lengths rounded to `precision` decimal places
// with trailing zeros removed.
std::string write_newick(const Phylogeny& phylo, int precision = kDefaultNewickPrecision);

// Canonical text for the ranked tree shape: equal iff the ranked shapes are
// isomorphic (ignores leaf labels and child order). Needs distinct ages.
std::string ranked_shape_code(const Phylogeny& phylo);
std::string ranked_shape_code(const OrientedTree& tree);
// Orientation-preserving code: ranks of the internal nodes in in-order.
std::string ranked_oriented_code(const OrientedTree& tree);

struct LTTPoint {
  double time;    // before present (or normalized time)
  int lineages;   // lineage count just after `time`, going forward
};

struct LTTCurve {
  std::vector<LTTPoint> points;
  bool origin_rooted = false;  // starts at count 1 at the origin instead of 2 at the mrca
  bool normalized = false;     // mrca at 0, present at 1
};

// Needs node ages (derived from branch lengths if absent).
LTTCurve ltt_from_tree(const Phylogeny& phylo);

// Points (E[A_n^k], k+1) for k = 1..n-1 followed by (0, n). With normalize,
// times become 1 - E[A_n^k] / E[A_n^1].
LTTCurve expected_ltt(const BDParams& params, int n, bool normalize,
                      const AgeCondition& cond = AgeCondition::uniform_prior());

// "time<TAB>lineages" with a header line; `comment` lines are prefixed by '#'.
void write_ltt_tsv(std::ostream& out, const LTTCurve& curve, int precision = 12,
                   std::string_view comment = {});

}  // namespace cbdp
