#include "fif/fif_tree.hpp"

#include <cmath>
#include <numeric>

namespace fif {

namespace {

class AtomSource {
 public:
  AtomSource(const PreparedData& data, std::span<const std::size_t> rows, const TreeOptions& options,
             Rng& setup_rng)
      : data_(data), options_(options), weights_(data.data->grid().weights()) {
    if (options.shared_atoms) {
      table_ = options.shared_atoms.get();
      return;
    }
    if (options.dictionary.kind == DictionaryKind::self_data) {
      owned_ = materialize(options.dictionary, context(rows), 1, setup_rng);
      table_ = &owned_;
      return;
    }
    context_ = context(rows);
    fresh_ = true;
  }

  std::size_t draw_atom(Rng& rng) {
    if (!fresh_) return std::uniform_int_distribution<std::size_t>(0, table_->size() - 1)(rng);
    owned_.push_back(sample_atom(options_.dictionary, context_, rng));
    return owned_.size() - 1;
  }

  void project(std::span<const std::size_t> rows, std::size_t atom, std::span<double> out) const {
    const PreparedObservation& a = atoms()[atom].channels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i] = fif::project(data_.rows[rows[i]], a, weights_, options_.inner_products);
    }
  }

  bool owns_table() const { return options_.shared_atoms == nullptr; }
  AtomTable take_owned() { return std::move(owned_); }

 private:
  const AtomTable& atoms() const { return fresh_ ? owned_ : *table_; }

  SamplingContext context(std::span<const std::size_t> rows) const {
    return SamplingContext{&data_.data->grid(), data_.data->channels(), &data_.data->observations(), rows};
  }

  const PreparedData& data_;
  const TreeOptions& options_;
  std::span<const double> weights_;
  SamplingContext context_;
  const AtomTable* table_ = nullptr;
  AtomTable owned_;
  bool fresh_ = false;
};

// Drops atoms no node references and renumbers the rest in node order.
IsolationTree compact(const IsolationTree& tree, AtomTable& atoms) {
  std::vector<IsolationNode> nodes(tree.nodes().begin(), tree.nodes().end());
  // Self-data tables are drawn with replacement, so several nodes may share an atom.
  std::vector<std::size_t> renumbered(atoms.size(), kNoNode);
  AtomTable kept;
  for (auto& node : nodes) {
    if (node.is_leaf()) continue;
    if (renumbered[node.atom] == kNoNode) {
      renumbered[node.atom] = kept.size();
      kept.push_back(std::move(atoms[node.atom]));
    }
    node.atom = renumbered[node.atom];
  }
  atoms = std::move(kept);
  return IsolationTree(std::move(nodes));
}

}  // namespace

PreparedData::PreparedData(const FunctionalDataset& dataset) : data(&dataset) {
  rows.reserve(dataset.size());
  for (const auto& obs : dataset.observations()) rows.push_back(prepare(obs, dataset.grid()));
}

FITree::FITree(IsolationTree structure, std::shared_ptr<const AtomTable> atoms, std::vector<std::size_t> sample_rows)
    : structure_(std::move(structure)), atoms_(std::move(atoms)), sample_rows_(std::move(sample_rows)) {
  for (const auto& node : structure_.nodes()) {
    if (!node.is_leaf() && node.atom >= atoms_->size()) throw DataError("tree node references a missing atom");
  }
}

double FITree::path_length(const PreparedObservation& x, std::span<const double> weights,
                           std::span<const InnerProductSpec> specs) const {
  return structure_.path_length(
      [&](std::size_t atom) { return project(x, (*atoms_)[atom].channels, weights, specs); });
}

std::size_t FITree::leaf_index(const PreparedObservation& x, std::span<const double> weights,
                               std::span<const InnerProductSpec> specs) const {
  return structure_.leaf_index(
      [&](std::size_t atom) { return project(x, (*atoms_)[atom].channels, weights, specs); });
}

FITree build_tree(const PreparedData& data, std::vector<std::size_t> rows, const TreeOptions& options, Rng& rng) {
  if (rows.empty()) throw ConfigError("cannot build a tree on an empty subsample");
  if (options.inner_products.size() != data.data->channels()) {
    throw ConfigError("inner product list has " + std::to_string(options.inner_products.size()) +
                      " entries for " + std::to_string(data.data->channels()) + "-channel data");
  }
  AtomSource source(data, rows, options, rng);
  IsolationTree structure = IsolationTree::grow(source, rows, options.limits, rng);
  if (!source.owns_table()) return FITree(std::move(structure), options.shared_atoms, std::move(rows));
  AtomTable atoms = source.take_owned();
  structure = compact(structure, atoms);
  return FITree(std::move(structure), std::make_shared<const AtomTable>(std::move(atoms)), std::move(rows));
}

FITree build_tree(const FunctionalDataset& subsample, const TreeOptions& options, Rng& rng) {
  const PreparedData data(subsample);
  std::vector<std::size_t> rows(subsample.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return build_tree(data, std::move(rows), options, rng);
}

}  // namespace fif
