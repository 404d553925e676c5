#include "fif/isolation_tree.hpp"

#include <cmath>
#include <numeric>

namespace fif {

double avg_bst_path(std::size_t m) {
  constexpr double kEulerGamma = 0.5772156649;
  if (m <= 1) return 0.0;
  if (m == 2) return 1.0;
  const double mm = static_cast<double>(m);
  return 2.0 * (std::log(mm - 1.0) + kEulerGamma) - 2.0 * (mm - 1.0) / mm;
}

IsolationTree::IsolationTree(std::vector<IsolationNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("isolation tree has no nodes");
  for (const auto& node : nodes_) {
    if ((node.left == kNoNode) != (node.right == kNoNode)) throw DataError("internal node with a single child");
    if (!node.is_leaf() && (node.left >= nodes_.size() || node.right >= nodes_.size())) {
      throw DataError("tree node references a missing child");
    }
    if (node.is_leaf() && node.size == 0) throw DataError("empty leaf");
  }
}

std::size_t IsolationTree::internal_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const IsolationNode& n) { return !n.is_leaf(); }));
}

std::size_t IsolationTree::max_depth() const {
  std::size_t depth = 0;
  for (const auto& n : nodes_) depth = std::max(depth, n.depth);
  return depth;
}

std::vector<std::size_t> draw_subsample(std::size_t n, std::size_t psi, Rng& rng) {
  if (psi == 0 || psi > n) {
    throw ConfigError("subsample size psi=" + std::to_string(psi) + " must lie in [1, n=" + std::to_string(n) + "]");
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < psi; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
    std::swap(rows[i], rows[j]);
  }
  rows.resize(psi);
  return rows;
}

}  // namespace fif
