#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cbdp/densities.hpp"
#include "cbdp/oriented_tree.hpp"
#include "cbdp/params.hpp"
#include "cbdp/rng.hpp"

namespace cbdp {

// One lineage segment of a complete birth-death tree. A segment starts at
// `start` (its birth) and ends at `end`: a speciation (two children), an
// extinction (end > 0, no children) or survival to the present (end == 0).
struct CompleteNode {
  double start = 0.0;
  double end = 0.0;
  bool extinct = false;
  int parent = -1;
  int left = -1;
  int right = -1;

  bool speciates() const noexcept { return left >= 0; }
};

struct CompleteTree {
  std::vector<CompleteNode> nodes;  // nodes[0] is the founding lineage
  double origin = 0.0;

  int extant_count() const;
  bool empty() const { return nodes.empty(); }
};

inline constexpr std::size_t kDefaultEventCap = 1'000'000;

// Exact simulation from one lineage at time t_or down to 0. Throws
// CapacityError after event_cap births and deaths.
CompleteTree simulate_complete(const BDParams& params, double t_or, Rng& rng,
                               std::size_t event_cap = kDefaultEventCap);

// Drops extinct subtrees and suppresses unary nodes. Daughter orientation is
// re-randomized. Empty when nothing survives.
std::optional<OrientedTree> prune_to_reconstructed(const CompleteTree& tree, Rng& rng);

struct RejectionStats {
  std::size_t attempts = 0;
  std::size_t capacity_failures = 0;
};

inline constexpr std::size_t kDefaultMaxAttempts = 10'000'000;

// Forward simulation keeping only runs with exactly n extant species.
//  OriginAge t: one lineage from t.
//  MrcaAge t:   two lineages from t, both must survive.
//  UniformPrior: origin drawn uniformly from (0, t_max] each attempt; the
//               accepted origin then follows the posterior truncated to t_max.
// Throws SamplingError after max_attempts.
OrientedTree rejection_sample_conditioned(const BDParams& params, int n, const AgeCondition& cond,
                                          Rng& rng, std::size_t max_attempts = kDefaultMaxAttempts,
                                          RejectionStats* stats = nullptr,
                                          double t_max = 0.0);

// Default proposal bound for UniformPrior: the 0.999 posterior quantile.
double default_proposal_bound(const BDParams& params, int n);

}  // namespace cbdp
