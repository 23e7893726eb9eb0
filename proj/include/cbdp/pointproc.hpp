#pragma once

#include <optional>
#include <vector>

#include "cbdp/densities.hpp"
#include "cbdp/oriented_tree.hpp"
#include "cbdp/params.hpp"
#include "cbdp/phylo.hpp"
#include "cbdp/rng.hpp"

namespace cbdp {

// n leaves at positions 1..n and n-1 speciation heights, heights[i] sitting in
// the gap between leaves i and i+1 (0-based).
struct PointProcess {
  int n = 0;
  std::vector<double> heights;
  std::optional<double> age;  // origin age when known

  void validate() const;
};

// Origin time drawn from its posterior under the flat prior (inverse transform).
double sample_origin_age(const BDParams& params, int n, Rng& rng);

// Reconstructed-tree point process. Under UniformPrior the origin is drawn
// first; under MrcaAge one uniformly chosen gap holds the mrca at the given
// age and the age field stays empty.
PointProcess sample_point_process(const BDParams& params, int n, const AgeCondition& cond, Rng& rng);

// Repeatedly joins the lowest remaining point with its two neighbouring
// blocks. Equal heights are ordered by gap index (lower index merges first).
OrientedTree point_process_to_tree(const PointProcess& pp);

// In-order read-out of the internal node times.
PointProcess tree_to_point_process(const OrientedTree& tree);

// Assigns a uniformly random permutation of "1".."n" to the leaves and turns
// node times into branch lengths (plus a root edge when the origin is known).
Phylogeny label_uniformly(const OrientedTree& tree, Rng& rng);

}  // namespace cbdp
