#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fif/curves.hpp"
#include "fif/isolation_tree.hpp"

namespace fif {

/// n x d real matrix, row-major.
class VectorDataset {
 public:
  VectorDataset(std::size_t dims, std::vector<double> values, std::optional<std::vector<int>> labels = std::nullopt);

  /// Discretized curves as vectors, channels concatenated.
  static VectorDataset from_functional(const FunctionalDataset& data);

  std::size_t size() const { return values_.size() / dims_; }
  std::size_t dims() const { return dims_; }
  std::span<const double> row(std::size_t i) const { return std::span(values_).subspan(i * dims_, dims_); }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

 private:
  std::size_t dims_;
  std::vector<double> values_;
  std::optional<std::vector<int>> labels_;
};

enum class SplitMode {
  axis,      ///< coordinate m ~ U{1..d}
  extended,  ///< direction u uniform on the unit sphere
};

struct IsolationForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> psi;
  std::optional<std::size_t> height_limit;
  std::size_t min_leaf_size = 1;
  SplitMode mode = SplitMode::axis;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct VectorTree {
  IsolationTree structure;
  /// Extended mode: unit direction per split, indexed by node atom. Axis mode: empty,
  /// the atom is the coordinate index.
  std::vector<std::vector<double>> directions;
};

/// Classical isolation forest on finite-dimensional vectors (axis-parallel or
/// random-hyperplane splits).
class IsolationForest {
 public:
  static IsolationForest fit(const VectorDataset& data, const IsolationForestConfig& config);

  IsolationForest(IsolationForestConfig config, std::size_t dims, std::vector<VectorTree> trees);

  double mean_path_length(std::span<const double> x) const;
  double score(std::span<const double> x) const;
  std::vector<double> score_all(const VectorDataset& data, unsigned threads = 0) const;

  const IsolationForestConfig& config() const { return config_; }
  std::size_t dims() const { return dims_; }
  std::size_t psi() const { return *config_.psi; }
  double c_psi() const { return c_psi_; }
  std::span<const VectorTree> trees() const { return trees_; }

 private:
  IsolationForestConfig config_;
  std::size_t dims_;
  std::vector<VectorTree> trees_;
  double c_psi_;
};

}  // namespace fif
