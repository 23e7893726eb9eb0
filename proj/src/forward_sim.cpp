#include "cbdp/forward_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cbdp/errors.hpp"

namespace cbdp {

int CompleteTree::extant_count() const {
  int count = 0;
  for (const auto& node : nodes) count += (!node.speciates() && !node.extinct) ? 1 : 0;
  return count;
}

namespace {

struct GrowLimits {
  std::size_t event_cap;
  int max_extant;  // stop early once more survivors than this are seen; <0 disables
};

// Grows every lineage in nodes[first..] (and their descendants) to the present.
// Returns false when stopped early by max_extant.
bool grow(CompleteTree& tree, std::size_t first, const BDParams& params, Rng& rng,
          const GrowLimits& limits, std::size_t& events) {
  const double lambda = params.lambda();
  const double total = lambda + params.mu();
  int extant = 0;
  for (std::size_t i = first; i < tree.nodes.size(); ++i) {
    const double start = tree.nodes[i].start;
    const double event = start - rng.exponential(total);
    if (event <= 0.0) {
      tree.nodes[i].end = 0.0;
      if (limits.max_extant >= 0 && ++extant > limits.max_extant) return false;
      continue;
    }
    if (++events > limits.event_cap) {
      throw CapacityError("forward simulation exceeded " + std::to_string(limits.event_cap) +
                          " events");
    }
    tree.nodes[i].end = event;
    if (rng.uniform() * total < lambda) {
      const int parent = static_cast<int>(i);
      for (int side = 0; side < 2; ++side) {
        CompleteNode child;
        child.start = event;
        child.parent = parent;
        tree.nodes.push_back(child);
      }
      tree.nodes[i].left = static_cast<int>(tree.nodes.size()) - 2;
      tree.nodes[i].right = static_cast<int>(tree.nodes.size()) - 1;
    } else {
      tree.nodes[i].extinct = true;
    }
  }
  return true;
}

}  // namespace

CompleteTree simulate_complete(const BDParams& params, double t_or, Rng& rng, std::size_t event_cap) {
  if (!(t_or >= 0.0) || !std::isfinite(t_or)) throw DomainError("origin time must be finite and >= 0");
  CompleteTree tree;
  tree.origin = t_or;
  tree.nodes.push_back(CompleteNode{t_or, 0.0, false, -1, -1, -1});
  std::size_t events = 0;
  grow(tree, 0, params, rng, GrowLimits{event_cap, -1}, events);
  return tree;
}

std::optional<OrientedTree> prune_to_reconstructed(const CompleteTree& tree, Rng& rng) {
  if (tree.empty()) return std::nullopt;
  const int size = static_cast<int>(tree.nodes.size());

  // Children always have larger indices than parents, so a reverse sweep is a
  // postorder. image[v] is the reconstructed node standing for v's subtree.
  OrientedTree out;
  std::vector<int> image(size, -1);
  for (int v = size - 1; v >= 0; --v) {
    const auto& node = tree.nodes[v];
    if (!node.speciates()) {
      if (!node.extinct) {
        image[v] = static_cast<int>(out.nodes.size());
        out.nodes.emplace_back();
      }
      continue;
    }
    const int a = image[node.left];
    const int b = image[node.right];
    if (a < 0 || b < 0) {
      image[v] = a < 0 ? b : a;
      continue;
    }
    const int id = static_cast<int>(out.nodes.size());
    OrientedNode joined;
    joined.time = node.end;
    joined.left = a;
    joined.right = b;
    if (rng.coin()) std::swap(joined.left, joined.right);
    out.nodes.push_back(joined);
    out.nodes[a].parent = id;
    out.nodes[b].parent = id;
    image[v] = id;
  }
  if (image[0] < 0) return std::nullopt;
  out.root = image[0];
  out.origin = tree.origin;

  int next_leaf = 0;
  std::vector<int> internals;
  for (const int v : out.in_order()) {
    if (out.nodes[v].is_leaf()) {
      out.nodes[v].leaf_index = next_leaf++;
    } else {
      internals.push_back(v);
    }
  }
  std::stable_sort(internals.begin(), internals.end(),
                   [&](int a, int b) { return out.nodes[a].time > out.nodes[b].time; });
  for (std::size_t i = 0; i < internals.size(); ++i) out.nodes[internals[i]].rank = static_cast<int>(i) + 1;
  return out;
}

double default_proposal_bound(const BDParams& params, int n) {
  return origin_inv_cdf(params, 0.999, n);
}

OrientedTree rejection_sample_conditioned(const BDParams& params, int n, const AgeCondition& cond, Rng& rng,
                                          std::size_t max_attempts, RejectionStats* stats, double t_max) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (cond.kind() == AgeCondition::Kind::UniformPrior) {
    if (t_max <= 0.0) t_max = default_proposal_bound(params, n);
    if (!std::isfinite(t_max)) throw DomainError("proposal bound must be finite");
  }
  RejectionStats local;
  RejectionStats& s = stats ? *stats : local;
  const bool mrca = cond.kind() == AgeCondition::Kind::MrcaAge;
  if (mrca && n < 2) throw DomainError("mrca conditioning needs n >= 2");

  while (s.attempts < max_attempts) {
    ++s.attempts;
    const double t = cond.kind() == AgeCondition::Kind::UniformPrior ? t_max * rng.uniform() : cond.age();
    CompleteTree tree;
    tree.origin = t;
    if (mrca) {
      tree.nodes.push_back(CompleteNode{t, t, false, -1, 1, 2});
      tree.nodes.push_back(CompleteNode{t, 0.0, false, 0, -1, -1});
      tree.nodes.push_back(CompleteNode{t, 0.0, false, 0, -1, -1});
    } else {
      tree.nodes.push_back(CompleteNode{t, 0.0, false, -1, -1, -1});
    }
    std::size_t events = 0;
    bool complete = false;
    try {
      complete = grow(tree, mrca ? 1 : 0, params, rng, GrowLimits{kDefaultEventCap, n}, events);
    } catch (const CapacityError&) {
      ++s.capacity_failures;
      continue;
    }
    if (!complete || tree.extant_count() != n) continue;
    auto pruned = prune_to_reconstructed(tree, rng);
    if (!pruned) continue;
    if (mrca) {
      // Both founding lineages must survive for the root to sit at t.
      if (pruned->nodes[pruned->root].time != t) continue;
      pruned->origin.reset();
    }
    return *pruned;
  }
  throw SamplingError("rejection sampler gave up after " + std::to_string(s.attempts) + " attempts (" +
                          std::to_string(s.capacity_failures) + " capacity failures)",
                      s.attempts, s.capacity_failures);
}

}  // namespace cbdp
