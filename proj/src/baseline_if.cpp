#include "fif/baseline_if.hpp"

#include <cmath>

#include "fif/error.hpp"
#include "fif/forest.hpp"
#include "fif/parallel.hpp"

namespace fif {

namespace {

class VectorSource {
 public:
  VectorSource(const VectorDataset& data, SplitMode mode) : data_(data), mode_(mode) {}

  std::size_t draw_atom(Rng& rng) {
    if (mode_ == SplitMode::axis) return std::uniform_int_distribution<std::size_t>(0, data_.dims() - 1)(rng);
    std::vector<double> u(data_.dims());
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : u) {
        v = standard_normal(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    directions_.push_back(std::move(u));
    return directions_.size() - 1;
  }

  void project(std::span<const std::size_t> rows, std::size_t atom, std::span<double> out) const {
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = projection(data_.row(rows[i]), atom);
  }

  double projection(std::span<const double> x, std::size_t atom) const {
    if (mode_ == SplitMode::axis) return x[atom];
    double dot = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * directions_[atom][k];
    return dot;
  }

  std::vector<std::vector<double>> take_directions() { return std::move(directions_); }

 private:
  const VectorDataset& data_;
  SplitMode mode_;
  std::vector<std::vector<double>> directions_;
};

// Extended-mode draws that ended up as leaves are dropped.
void compact(VectorTree& tree) {
  if (tree.directions.empty()) return;
  std::vector<IsolationNode> nodes(tree.structure.nodes().begin(), tree.structure.nodes().end());
  std::vector<std::vector<double>> kept;
  for (auto& node : nodes) {
    if (node.is_leaf()) continue;
    kept.push_back(std::move(tree.directions[node.atom]));
    node.atom = kept.size() - 1;
  }
  tree.structure = IsolationTree(std::move(nodes));
  tree.directions = std::move(kept);
}

}  // namespace

VectorDataset::VectorDataset(std::size_t dims, std::vector<double> values, std::optional<std::vector<int>> labels)
    : dims_(dims), values_(std::move(values)), labels_(std::move(labels)) {
  if (dims_ == 0) throw DataError("vector dataset needs d >= 1");
  if (values_.empty() || values_.size() % dims_ != 0) throw DataError("vector dataset is not an n x d matrix");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("vector dataset contains a non-finite entry");
  }
  if (labels_ && labels_->size() != size()) throw DataError("label count does not match row count");
}

VectorDataset VectorDataset::from_functional(const FunctionalDataset& data) {
  std::vector<double> values;
  values.reserve(data.size() * data.channels() * data.grid().size());
  for (const auto& obs : data.observations()) {
    for (const Curve& c : obs) values.insert(values.end(), c.values().begin(), c.values().end());
  }
  return VectorDataset(data.channels() * data.grid().size(), std::move(values), data.labels());
}

IsolationForest IsolationForest::fit(const VectorDataset& data, const IsolationForestConfig& config) {
  if (config.n_trees == 0) throw ConfigError("number of trees N must be at least 1");
  if (config.min_leaf_size == 0) throw ConfigError("min_leaf_size must be at least 1");
  IsolationForestConfig resolved = config;
  resolved.psi = config.psi.value_or(default_psi(data.size()));
  if (*resolved.psi == 0 || *resolved.psi > data.size()) {
    throw ConfigError("subsample size psi=" + std::to_string(*resolved.psi) + " must lie in [1, n=" +
                      std::to_string(data.size()) + "]");
  }
  resolved.height_limit = config.height_limit.value_or(default_height_limit(*resolved.psi));
  if (*resolved.height_limit == 0) throw ConfigError("height limit must be at least 1");
  const TreeLimits limits{*resolved.height_limit, resolved.min_leaf_size};

  std::vector<VectorTree> trees(config.n_trees);
  parallel_for(config.n_trees, config.threads, [&](std::size_t i) {
    Rng rng = make_stream(config.seed, i);
    auto rows = draw_subsample(data.size(), *resolved.psi, rng);
    VectorSource source(data, config.mode);
    trees[i].structure = IsolationTree::grow(source, std::move(rows), limits, rng);
    trees[i].directions = source.take_directions();
    compact(trees[i]);
  });
  return IsolationForest(std::move(resolved), data.dims(), std::move(trees));
}

IsolationForest::IsolationForest(IsolationForestConfig config, std::size_t dims, std::vector<VectorTree> trees)
    : config_(std::move(config)), dims_(dims), trees_(std::move(trees)) {
  if (!config_.psi || !config_.height_limit) throw ConfigError("forest config must be resolved");
  if (trees_.empty()) throw ConfigError("forest needs at least one tree");
  for (const auto& tree : trees_) {
    for (const auto& node : tree.structure.nodes()) {
      if (node.is_leaf()) continue;
      const bool ok = config_.mode == SplitMode::axis ? node.atom < dims_ : node.atom < tree.directions.size();
      if (!ok) throw DataError("tree node references a missing split variable");
    }
    for (const auto& u : tree.directions) {
      if (u.size() != dims_) throw DataError("split direction has the wrong dimension");
    }
  }
  c_psi_ = avg_bst_path(*config_.psi);
}

double IsolationForest::mean_path_length(std::span<const double> x) const {
  if (x.size() != dims_) {
    throw DataError("dimension mismatch: vector has " + std::to_string(x.size()) + " entries, model expects " +
                    std::to_string(dims_));
  }
  double total = 0.0;
  for (const auto& tree : trees_) {
    total += tree.structure.path_length([&](std::size_t atom) {
      if (config_.mode == SplitMode::axis) return x[atom];
      double dot = 0.0;
      for (std::size_t k = 0; k < dims_; ++k) dot += x[k] * tree.directions[atom][k];
      return dot;
    });
  }
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::score(std::span<const double> x) const {
  return score_from_path(mean_path_length(x), c_psi_);
}

std::vector<double> IsolationForest::score_all(const VectorDataset& data, unsigned threads) const {
  std::vector<double> scores(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) { scores[i] = score(data.row(i)); });
  return scores;
}

}  // namespace fif
