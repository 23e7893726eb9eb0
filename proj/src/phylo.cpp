#include "cbdp/phylo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>

#include "cbdp/errors.hpp"
#include "cbdp/format.hpp"
#include "cbdp/moments.hpp"

namespace cbdp {

int Phylogeny::add_node(int parent) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes.back().parent = parent;
  if (parent >= 0) {
    nodes[parent].children.push_back(id);
  } else {
    root = id;
  }
  return id;
}

int Phylogeny::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const PhyloNode& node) { return node.is_leaf(); }));
}

bool Phylogeny::is_binary() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const PhyloNode& node) {
    return node.children.empty() || node.children.size() == 2;
  });
}

std::vector<int> Phylogeny::preorder() const {
  std::vector<int> order;
  if (root < 0) return order;
  order.reserve(nodes.size());
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    const auto& children = nodes[v].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<int> Phylogeny::postorder() const {
  // Reversed root-first walk with children pushed left-to-right.
  std::vector<int> result;
  result.reserve(nodes.size());
  std::vector<int> stack;
  if (root >= 0) stack.push_back(root);
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    result.push_back(v);
    for (const int child : nodes[v].children) stack.push_back(child);
  }
  std::reverse(result.begin(), result.end());
  return result;
}

std::vector<int> Phylogeny::internal_nodes() const {
  std::vector<int> result;
  for (const int v : preorder()) {
    if (!nodes[v].is_leaf()) result.push_back(v);
  }
  return result;
}

namespace {

// Root-to-node path lengths; empty when a non-root length is missing.
std::vector<double> depths(const Phylogeny& phylo) {
  std::vector<double> depth(phylo.nodes.size(), 0.0);
  for (const int v : phylo.preorder()) {
    if (v == phylo.root) continue;
    const auto& length = phylo.nodes[v].length;
    if (!length) return {};
    depth[v] = depth[phylo.nodes[v].parent] + *length;
  }
  return depth;
}

}  // namespace

bool Phylogeny::is_ultrametric(double rel_tol) const {
  if (root < 0) return false;
  const auto depth = depths(*this);
  if (depth.empty()) return false;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (!nodes[v].is_leaf()) continue;
    lo = std::min(lo, depth[v]);
    hi = std::max(hi, depth[v]);
  }
  return hi - lo <= rel_tol * std::max(hi, 1e-300);
}

bool Phylogeny::derive_ages(double rel_tol) {
  if (!is_ultrametric(rel_tol)) return false;
  const auto depth = depths(*this);
  double height = 0.0;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].is_leaf()) height = std::max(height, depth[v]);
  }
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    nodes[v].age = nodes[v].is_leaf() ? 0.0 : height - depth[v];
  }
  return true;
}

void Phylogeny::set_lengths_from_ages() {
  for (auto& node : nodes) {
    if (node.parent < 0) continue;
    const auto& parent_age = nodes[node.parent].age;
    if (parent_age && node.age) node.length = *parent_age - *node.age;
  }
}

namespace {

bool is_special(char c) {
  return c == '(' || c == ')' || c == '[' || c == ']' || c == '\'' || c == ':' || c == ';' ||
         c == ',' || std::isspace(static_cast<unsigned char>(c));
}

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_filler();
    return pos_ >= text_.size();
  }

  Phylogeny statement() {
    Phylogeny phylo;
    skip_filler();
    subtree(phylo, -1);
    skip_filler();
    if (pos_ >= text_.size() || text_[pos_] != ';') fail("missing ';'");
    ++pos_;
    return phylo;
  }

  void expect_end() {
    skip_filler();
    if (pos_ < text_.size()) fail("unexpected text after ';'");
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw NewickError(message, pos_); }

  void skip_filler() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        const auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  void subtree(Phylogeny& phylo, int parent) {
    const int v = phylo.add_node(parent);
    skip_filler();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      while (true) {
        subtree(phylo, v);
        skip_filler();
        if (pos_ >= text_.size()) fail("expected ',' or ')'");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    skip_filler();
    phylo.nodes[v].label = label();
    skip_filler();
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      skip_filler();
      phylo.nodes[v].length = number();
    }
  }

  std::string label() {
    if (pos_ >= text_.size()) return {};
    if (text_[pos_] == '\'') {
      const std::size_t start = pos_;
      ++pos_;
      std::string result;
      while (true) {
        if (pos_ >= text_.size()) {
          pos_ = start;
          fail("unterminated quoted label");
        }
        const char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            result.push_back('\'');
            ++pos_;
            continue;
          }
          return result;
        }
        result.push_back(c);
      }
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_special(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_special(text_[pos_])) ++pos_;
    const std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = token.empty() ? 0.0 : std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(value)) {
      pos_ = start;
      fail("bad number");
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string& label) {
  return std::any_of(label.begin(), label.end(), is_special);
}

void write_label(std::string& out, const std::string& label) {
  if (!needs_quotes(label)) {
    out += label;
    return;
  }
  out.push_back('\'');
  for (const char c : label) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
}

void write_subtree(std::string& out, const Phylogeny& phylo, int v, int precision) {
  const auto& node = phylo.nodes[v];
  if (!node.children.empty()) {
    out.push_back('(');
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out.push_back(',');
      write_subtree(out, phylo, node.children[i], precision);
    }
    out.push_back(')');
  }
  write_label(out, node.label);
  if (node.length) {
    out.push_back(':');
    out += format_fixed_trimmed(*node.length, precision);
  }
}

}  // namespace

Phylogeny parse_newick(std::string_view text) {
  NewickParser parser(text);
  auto phylo = parser.statement();
  parser.expect_end();
  return phylo;
}

std::vector<Phylogeny> parse_newick_stream(std::string_view text) {
  NewickParser parser(text);
  std::vector<Phylogeny> trees;
  while (!parser.at_end()) trees.push_back(parser.statement());
  return trees;
}

std::string write_newick(const Phylogeny& phylo, int precision) {
  std::string out;
  if (phylo.root >= 0) write_subtree(out, phylo, phylo.root, precision);
  out.push_back(';');
  return out;
}

namespace {

template <typename ChildrenOf, typename RankOf>
std::string shape_code(int v, const ChildrenOf& children_of, const RankOf& rank_of) {
  const auto children = children_of(v);
  if (children.empty()) return "x";
  std::vector<std::string> codes;
  codes.reserve(children.size());
  for (const int child : children) codes.push_back(shape_code(child, children_of, rank_of));
  std::sort(codes.begin(), codes.end());
  std::string code = "r" + std::to_string(rank_of(v)) + "(";
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i > 0) code.push_back(',');
    code += codes[i];
  }
  code.push_back(')');
  return code;
}

// Ranks of the internal nodes (1 = oldest); RankError when ages are missing or tied.
std::vector<int> internal_ranks(const Phylogeny& phylo) {
  Phylogeny copy;
  const Phylogeny* source = &phylo;
  const auto internals = phylo.internal_nodes();
  const bool have_ages = std::all_of(internals.begin(), internals.end(),
                                     [&](int v) { return phylo.nodes[v].age.has_value(); });
  if (!have_ages) {
    copy = phylo;
    if (!copy.derive_ages()) throw RankError("internal node ages are missing");
    source = &copy;
  }
  std::vector<int> order = internals;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return *source->nodes[a].age > *source->nodes[b].age;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (*source->nodes[order[i]].age == *source->nodes[order[i - 1]].age) {
      throw RankError("tied internal node ages; ranks are not defined");
    }
  }
  std::vector<int> rank(phylo.nodes.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i) + 1;
  return rank;
}

}  // namespace

std::string ranked_shape_code(const Phylogeny& phylo) {
  if (phylo.root < 0) throw RankError("empty tree");
  const auto rank = internal_ranks(phylo);
  return shape_code(
      phylo.root, [&](int v) { return phylo.nodes[v].children; }, [&](int v) { return rank[v]; });
}

std::string ranked_shape_code(const OrientedTree& tree) {
  tree.validate();
  return shape_code(
      tree.root,
      [&](int v) {
        const auto& node = tree.nodes[v];
        return node.is_leaf() ? std::vector<int>{} : std::vector<int>{node.left, node.right};
      },
      [&](int v) { return tree.nodes[v].rank; });
}

std::string ranked_oriented_code(const OrientedTree& tree) {
  tree.validate();
  std::string code;
  for (const int v : tree.in_order()) {
    if (tree.nodes[v].is_leaf()) continue;
    if (!code.empty()) code.push_back('-');
    code += std::to_string(tree.nodes[v].rank);
  }
  return code;
}

LTTCurve ltt_from_tree(const Phylogeny& phylo) {
  if (phylo.root < 0) throw DomainError("empty tree");
  Phylogeny copy = phylo;
  const auto internals = copy.internal_nodes();
  const bool have_ages = std::all_of(internals.begin(), internals.end(),
                                     [&](int v) { return copy.nodes[v].age.has_value(); });
  if (!have_ages && !copy.derive_ages()) {
    throw DomainError("lineage-through-time curve needs node ages or ultrametric branch lengths");
  }
  std::vector<int> order = internals;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return *copy.nodes[a].age > *copy.nodes[b].age; });

  LTTCurve curve;
  const auto& root = copy.nodes[copy.root];
  if (root.length && !root.is_leaf()) {
    curve.origin_rooted = true;
    curve.points.push_back({*root.age + *root.length, 1});
  }
  int lineages = 1;
  for (const int v : order) {
    lineages += static_cast<int>(copy.nodes[v].children.size()) - 1;
    curve.points.push_back({*copy.nodes[v].age, lineages});
  }
  curve.points.push_back({0.0, copy.leaf_count()});
  return curve;
}

LTTCurve expected_ltt(const BDParams& params, int n, bool normalize, const AgeCondition& cond) {
  if (n < 2) throw DomainError("expected LTT needs n >= 2");
  LTTCurve curve;
  curve.normalized = normalize;
  for (int k = 1; k <= n - 1; ++k) {
    curve.points.push_back({expected_kth(params, n, k, cond).value, k + 1});
  }
  curve.points.push_back({0.0, n});
  if (normalize) {
    const double mrca = curve.points.front().time;
    for (auto& point : curve.points) point.time = 1.0 - point.time / mrca;
  }
  return curve;
}

void write_ltt_tsv(std::ostream& out, const LTTCurve& curve, int precision, std::string_view comment) {
  if (!comment.empty()) {
    std::istringstream lines{std::string(comment)};
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
  out << "time\tlineages\n";
  for (const auto& point : curve.points) {
    out << format_number(point.time, precision) << '\t' << point.lineages << '\n';
  }
}

}  // namespace cbdp
