#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fif/curves.hpp"
#include "fif/dictionaries.hpp"
#include "fif/inner_products.hpp"
#include "fif/isolation_tree.hpp"

namespace fif {

using AtomTable = std::vector<Atom>;

/// Observations of a dataset with slopes and norms cached once for all trees.
struct PreparedData {
  const FunctionalDataset* data = nullptr;
  std::vector<PreparedObservation> rows;

  explicit PreparedData(const FunctionalDataset& dataset);
};

/// A functional isolation tree: the split structure plus the atoms its nodes
/// reference. The atom table is either owned or shared with the rest of a forest.
class FITree {
 public:
  FITree(IsolationTree structure, std::shared_ptr<const AtomTable> atoms, std::vector<std::size_t> sample_rows);

  double path_length(const PreparedObservation& x, std::span<const double> weights,
                     std::span<const InnerProductSpec> specs) const;
  std::size_t leaf_index(const PreparedObservation& x, std::span<const double> weights,
                         std::span<const InnerProductSpec> specs) const;

  const IsolationTree& structure() const { return structure_; }
  const AtomTable& atoms() const { return *atoms_; }
  const std::shared_ptr<const AtomTable>& atom_table() const { return atoms_; }
  /// Dataset rows the tree was grown on, in subsample order.
  std::span<const std::size_t> sample_rows() const { return sample_rows_; }

 private:
  IsolationTree structure_;
  std::shared_ptr<const AtomTable> atoms_;
  std::vector<std::size_t> sample_rows_;
};

struct TreeOptions {
  TreeLimits limits;
  DictionarySpec dictionary;
  std::vector<InnerProductSpec> inner_products{InnerProductSpec::l2()};
  /// Finite dictionary shared by every tree of a forest; atoms are drawn uniformly from it.
  std::shared_ptr<const AtomTable> shared_atoms;
};

/// Grows one tree on the given rows. Self-data dictionaries draw from these rows only.
FITree build_tree(const PreparedData& data, std::vector<std::size_t> rows, const TreeOptions& options, Rng& rng);

/// Grows one tree on a whole (sub)sample.
FITree build_tree(const FunctionalDataset& subsample, const TreeOptions& options, Rng& rng);

}  // namespace fif
