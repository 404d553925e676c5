#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fif/curves.hpp"
#include "fif/dictionaries.hpp"
#include "fif/fif_tree.hpp"
#include "fif/inner_products.hpp"

namespace fif {

/// Forest hyperparameters. Unset psi / height_limit resolve at fit time to
/// min(256, n) and ceil(log2 psi).
struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> psi;
  std::optional<std::size_t> height_limit;
  std::size_t min_leaf_size = 1;
  DictionarySpec dictionary;
  std::vector<InnerProductSpec> inner_products{InnerProductSpec::l2()};
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0 = all cores; never changes results
};

std::size_t default_psi(std::size_t n);
std::size_t default_height_limit(std::size_t psi);

/// Stream index reserved for materializing a forest-wide dictionary; trees use 0..N-1.
inline constexpr std::uint64_t kDictionaryStream = ~std::uint64_t{0};

/// 2^(-mean_path / c_psi); 1 when c_psi is 0 (psi = 1 carries no information).
double score_from_path(double mean_path, double c_psi);

struct ScoreEntry {
  double score = 0.0;
  double depth = 0.0;  ///< 1 - score
  double mean_path = 0.0;
  std::size_t rank = 0;  ///< 1 = most anomalous; ties broken by row order
};

struct ScoreReport {
  std::vector<ScoreEntry> entries;
};

std::vector<std::size_t> rank_descending(std::span<const double> scores);

/// Functional isolation forest: N trees on independent subsamples, scored with
/// s(x) = 2^(-E[h(x)] / c(psi)).
class FIForest {
 public:
  static FIForest fit(const FunctionalDataset& data, const ForestConfig& config);

  /// Assembles a forest from stored parts; `config` must be resolved.
  FIForest(ForestConfig config, TimeGrid grid, std::size_t channels, std::size_t training_size,
           std::vector<FITree> trees, std::shared_ptr<const AtomTable> shared_atoms,
           std::shared_ptr<const std::vector<Observation>> reference_rows);

  double mean_path_length(const Observation& x) const;
  double score(const Observation& x) const;
  double depth(const Observation& x) const;
  ScoreReport score_all(const FunctionalDataset& data, unsigned threads = 0) const;

  const ForestConfig& config() const { return config_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t channels() const { return channels_; }
  std::size_t psi() const { return *config_.psi; }
  std::size_t height_limit() const { return *config_.height_limit; }
  std::size_t training_size() const { return training_size_; }
  double c_psi() const { return c_psi_; }
  std::span<const FITree> trees() const { return trees_; }
  /// Forest-wide finite dictionary, or null when trees draw their own atoms.
  const std::shared_ptr<const AtomTable>& shared_atoms() const { return shared_atoms_; }
  /// Training observations, kept for self-data dictionaries (null otherwise).
  const std::shared_ptr<const std::vector<Observation>>& reference_rows() const { return reference_rows_; }

 private:
  double mean_path_length(const PreparedObservation& x) const;
  PreparedObservation prepare_query(const Observation& x) const;

  ForestConfig config_;
  TimeGrid grid_;
  std::size_t channels_;
  std::size_t training_size_;
  std::vector<FITree> trees_;
  std::shared_ptr<const AtomTable> shared_atoms_;
  std::shared_ptr<const std::vector<Observation>> reference_rows_;
  double c_psi_;
};

/// Per-class depth vector (D(x; S^1), ..., D(x; S^q)).
std::vector<double> depth_map(std::span<const FIForest* const> forests, const Observation& x);

enum class ImportanceMode { naive, adaptive };

struct AtomImportance {
  std::size_t atom_id = 0;  ///< index in the shared dictionary, or training row for self-data
  AtomParams params;
  double importance = 0.0;
};

/// Credits the atom of every split that isolates a single observation out of a node of
/// at least 3: +1 (naive) or node size / psi (adaptive). Needs a finite dictionary.
std::vector<AtomImportance> direction_importance(const FIForest& forest, ImportanceMode mode);

}  // namespace fif
