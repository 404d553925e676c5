#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fif/error.hpp"
#include "fif/random.hpp"

namespace fif {

/// Average path length of an unsuccessful search in a binary search tree of m keys:
/// 0 for m <= 1, 1 for m = 2, else 2 (ln(m - 1) + gamma) - 2 (m - 1) / m.
double avg_bst_path(std::size_t m);

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kUnlimitedHeight = std::numeric_limits<std::size_t>::max();

/// Projections closer than this are treated as equal; such a node becomes a leaf.
inline constexpr double kDegenerateSpread = 1e-12;
/// Split values producing an empty child are redrawn this many times before giving up.
inline constexpr int kSplitAttempts = 8;

struct TreeLimits {
  std::size_t height_limit = kUnlimitedHeight;
  std::size_t min_leaf_size = 1;
};

/// Nodes are stored in preorder; an internal node is followed by its left subtree.
struct IsolationNode {
  std::size_t size = 0;   ///< training observations reaching the node
  std::size_t depth = 0;
  std::size_t atom = kNoNode;
  double split = 0.0;     ///< go left when projection <= split
  std::size_t left = kNoNode;
  std::size_t right = kNoNode;

  bool is_leaf() const { return left == kNoNode; }
};

/// Tree structure shared by the functional and the vector isolation forests. What a
/// split "variable" is (dictionary atom, coordinate, direction) is up to the source.
class IsolationTree {
 public:
  IsolationTree() = default;
  explicit IsolationTree(std::vector<IsolationNode> nodes);

  /// Grows a tree on `rows`. Source must provide
  ///   std::size_t draw_atom(Rng&)
  ///   void project(std::span<const std::size_t> rows, std::size_t atom, std::span<double> out)
  template <class Source>
  static IsolationTree grow(Source& source, std::vector<std::size_t> rows, const TreeLimits& limits, Rng& rng);

  /// Depth of the leaf reached plus c(leaf size). `projection(atom)` gives the query's
  /// projection on a node's split variable.
  template <class Projection>
  double path_length(Projection&& projection) const {
    const IsolationNode& leaf = nodes_[leaf_index(projection)];
    return static_cast<double>(leaf.depth) + avg_bst_path(leaf.size);
  }

  template <class Projection>
  std::size_t leaf_index(Projection&& projection) const {
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
      at = projection(nodes_[at].atom) <= nodes_[at].split ? nodes_[at].left : nodes_[at].right;
    }
    return at;
  }

  std::span<const IsolationNode> nodes() const { return nodes_; }
  std::size_t internal_count() const;
  std::size_t leaf_count() const { return nodes_.size() - internal_count(); }
  std::size_t max_depth() const;

 private:
  template <class Source>
  struct Builder;

  std::vector<IsolationNode> nodes_;
};

template <class Source>
struct IsolationTree::Builder {
  Source& source;
  const TreeLimits& limits;
  Rng& rng;
  std::vector<IsolationNode> nodes;
  std::vector<double> projections;

  std::size_t build(std::span<std::size_t> rows, std::size_t depth) {
    const std::size_t index = nodes.size();
    nodes.push_back(IsolationNode{rows.size(), depth});
    if (rows.size() <= limits.min_leaf_size || depth >= limits.height_limit) return index;

    const std::size_t atom = source.draw_atom(rng);
    const std::span<double> proj(projections.data(), rows.size());
    source.project(rows, atom, proj);
    const auto [lo_it, hi_it] = std::minmax_element(proj.begin(), proj.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi - lo <= kDegenerateSpread) return index;

    double split = 0.0;
    std::size_t left_count = 0;
    bool ok = false;
    for (int attempt = 0; attempt < kSplitAttempts && !ok; ++attempt) {
      split = uniform(rng, lo, hi);
      left_count = static_cast<std::size_t>(std::count_if(proj.begin(), proj.end(), [&](double v) { return v <= split; }));
      ok = left_count > 0 && left_count < rows.size();
    }
    if (!ok) return index;

    // Stable partition: relative order is kept on each side.
    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(left_count);
    right_rows.reserve(rows.size() - left_count);
    for (std::size_t i = 0; i < rows.size(); ++i) (proj[i] <= split ? left_rows : right_rows).push_back(rows[i]);
    std::copy(left_rows.begin(), left_rows.end(), rows.begin());
    std::copy(right_rows.begin(), right_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(left_count));

    nodes[index].atom = atom;
    nodes[index].split = split;
    const std::size_t left = build(rows.first(left_count), depth + 1);
    const std::size_t right = build(rows.subspan(left_count), depth + 1);
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  }
};

template <class Source>
IsolationTree IsolationTree::grow(Source& source, std::vector<std::size_t> rows, const TreeLimits& limits, Rng& rng) {
  if (rows.empty()) throw ConfigError("cannot grow an isolation tree on an empty sample");
  if (limits.height_limit < 1) throw ConfigError("height limit must be at least 1");
  Builder<Source> builder{source, limits, rng, {}, std::vector<double>(rows.size())};
  builder.build(rows, 0);
  return IsolationTree(std::move(builder.nodes));
}

/// Draws `psi` distinct rows out of [0, n) by a partial Fisher-Yates shuffle.
std::vector<std::size_t> draw_subsample(std::size_t n, std::size_t psi, Rng& rng);

}  // namespace fif
