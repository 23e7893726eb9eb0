#pragma once

#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cbdp/densities.hpp"
#include "cbdp/params.hpp"
#include "cbdp/phylo.hpp"

namespace cbdp {

using BigInt = boost::multiprecision::cpp_int;

// Number of rankings of the internal nodes of `phylo` (linear extensions of
// the ancestor order). ShapeError unless binary.
BigInt count_rankings(const Phylogeny& phylo);

// counts[k-1] = number of rankings that give `vertex` rank k; the counts sum
// to count_rankings(phylo).
std::vector<BigInt> rank_counts(const Phylogeny& phylo, int vertex);

struct RankDistribution {
  int vertex = -1;
  std::vector<double> probabilities;  // probabilities[k-1] = P(rank = k)
};

// Rank law of an internal vertex when all rankings are equally likely.
RankDistribution rank_probabilities(const Phylogeny& phylo, int vertex);

struct VertexDate {
  int node = -1;
  double age = 0.0;
  double lo = 0.0;  // central alpha interval of the rank-mixed law
  double hi = 0.0;
};

struct DatingOptions {
  double alpha = 0.95;
  bool intervals = true;
};

struct DatedTree {
  Phylogeny tree;                  // ages set, branch lengths rewritten
  std::vector<VertexDate> vertices;  // internal nodes in preorder
};

// Each internal vertex gets age sum_k P(rank = k) E[A_n^k]; leaves get 0.
DatedTree date_tree(const Phylogeny& shape, const BDParams& params, const AgeCondition& cond,
                    const DatingOptions& options = {});

// "vertex<TAB>age<TAB>lo<TAB>hi"; vertices are named by label or "v<preorder index>".
void write_dating_tsv(std::ostream& out, const DatedTree& dated, int precision = 12);

}  // namespace cbdp
