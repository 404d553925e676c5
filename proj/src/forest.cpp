#include "fif/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fif/error.hpp"
#include "fif/parallel.hpp"

namespace fif {

namespace {

void validate(const ForestConfig& config, const FunctionalDataset& data) {
  if (config.n_trees == 0) throw ConfigError("number of trees N must be at least 1");
  if (config.min_leaf_size == 0) throw ConfigError("min_leaf_size must be at least 1");
  if (config.psi && (*config.psi == 0 || *config.psi > data.size())) {
    throw ConfigError("subsample size psi=" + std::to_string(*config.psi) + " must lie in [1, n=" +
                      std::to_string(data.size()) + "]");
  }
  if (config.height_limit && *config.height_limit == 0) throw ConfigError("height limit must be at least 1");
  if (config.inner_products.size() != data.channels()) {
    throw ConfigError("inner product list has " + std::to_string(config.inner_products.size()) +
                      " entries for " + std::to_string(data.channels()) + "-channel data");
  }
  for (const auto& ip : config.inner_products) ip.validate();
  config.dictionary.validate();
  if (config.dictionary.kind == DictionaryKind::sinus_cosine_2d && data.channels() != 2) {
    throw ConfigError("sinuscosine2d dictionary needs 2-channel data");
  }
}

bool uses_shared_dictionary(const DictionarySpec& spec) {
  if (spec.kind == DictionaryKind::dyadic_indicator || spec.kind == DictionaryKind::dyadic_indicator_deriv) return true;
  return spec.size.has_value() && !spec.is_data_bound();
}

}  // namespace

std::size_t default_psi(std::size_t n) { return std::min<std::size_t>(256, n); }

std::size_t default_height_limit(std::size_t psi) {
  std::size_t h = 0;
  while ((std::size_t{1} << h) < psi) ++h;
  return std::max<std::size_t>(h, 1);
}

double score_from_path(double mean_path, double c_psi) {
  if (c_psi <= 0.0) return 1.0;
  return std::exp2(-mean_path / c_psi);
}

std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

FIForest FIForest::fit(const FunctionalDataset& data, const ForestConfig& config) {
  validate(config, data);
  ForestConfig resolved = config;
  resolved.psi = config.psi.value_or(default_psi(data.size()));
  resolved.height_limit = config.height_limit.value_or(default_height_limit(*resolved.psi));

  const PreparedData prepared(data);
  TreeOptions options;
  options.limits = TreeLimits{*resolved.height_limit, resolved.min_leaf_size};
  options.dictionary = config.dictionary;
  options.inner_products = config.inner_products;

  if (uses_shared_dictionary(config.dictionary)) {
    Rng rng = make_stream(config.seed, kDictionaryStream);
    const SamplingContext context{&data.grid(), data.channels(), nullptr, {}};
    options.shared_atoms =
        std::make_shared<const AtomTable>(materialize(config.dictionary, context, config.dictionary.size.value_or(1), rng));
  }

  std::vector<std::optional<FITree>> built(config.n_trees);
  parallel_for(config.n_trees, config.threads, [&](std::size_t i) {
    Rng rng = make_stream(config.seed, i);
    auto rows = draw_subsample(data.size(), *resolved.psi, rng);
    built[i].emplace(build_tree(prepared, std::move(rows), options, rng));
  });
  std::vector<FITree> trees;
  trees.reserve(built.size());
  for (auto& t : built) trees.push_back(std::move(*t));

  std::shared_ptr<const std::vector<Observation>> reference;
  if (config.dictionary.is_data_bound()) reference = std::make_shared<const std::vector<Observation>>(data.observations());

  return FIForest(std::move(resolved), data.grid(), data.channels(), data.size(), std::move(trees),
                  std::move(options.shared_atoms), std::move(reference));
}

FIForest::FIForest(ForestConfig config, TimeGrid grid, std::size_t channels, std::size_t training_size,
                   std::vector<FITree> trees, std::shared_ptr<const AtomTable> shared_atoms,
                   std::shared_ptr<const std::vector<Observation>> reference_rows)
    : config_(std::move(config)),
      grid_(std::move(grid)),
      channels_(channels),
      training_size_(training_size),
      trees_(std::move(trees)),
      shared_atoms_(std::move(shared_atoms)),
      reference_rows_(std::move(reference_rows)) {
  if (!config_.psi || !config_.height_limit) throw ConfigError("forest config must be resolved");
  if (trees_.empty()) throw ConfigError("forest needs at least one tree");
  c_psi_ = avg_bst_path(*config_.psi);
}

PreparedObservation FIForest::prepare_query(const Observation& x) const {
  if (x.size() != channels_) {
    throw DataError("grid mismatch: observation has " + std::to_string(x.size()) + " channels, model expects " +
                    std::to_string(channels_));
  }
  for (const Curve& c : x) {
    if (c.size() != grid_.size()) {
      throw DataError("grid mismatch: observation has " + std::to_string(c.size()) + " points, model grid has " +
                      std::to_string(grid_.size()));
    }
  }
  return prepare(x, grid_);
}

double FIForest::mean_path_length(const PreparedObservation& x) const {
  double total = 0.0;
  for (const FITree& tree : trees_) total += tree.path_length(x, grid_.weights(), config_.inner_products);
  return total / static_cast<double>(trees_.size());
}

double FIForest::mean_path_length(const Observation& x) const { return mean_path_length(prepare_query(x)); }

double FIForest::score(const Observation& x) const { return score_from_path(mean_path_length(x), c_psi_); }

double FIForest::depth(const Observation& x) const { return 1.0 - score(x); }

ScoreReport FIForest::score_all(const FunctionalDataset& data, unsigned threads) const {
  if (!(data.grid() == grid_)) throw DataError("grid mismatch: dataset grid differs from the model grid");
  ScoreReport report;
  report.entries.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    auto& e = report.entries[i];
    e.mean_path = mean_path_length(prepare_query(data[i]));
    e.score = score_from_path(e.mean_path, c_psi_);
    e.depth = 1.0 - e.score;
  });
  std::vector<double> scores(data.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = report.entries[i].score;
  const auto ranks = rank_descending(scores);
  for (std::size_t i = 0; i < ranks.size(); ++i) report.entries[i].rank = ranks[i];
  return report;
}

std::vector<double> depth_map(std::span<const FIForest* const> forests, const Observation& x) {
  if (forests.empty()) throw ConfigError("depth map needs at least one class model");
  std::vector<double> out;
  out.reserve(forests.size());
  for (const FIForest* f : forests) {
    if (!(f->grid() == forests.front()->grid()) || f->channels() != forests.front()->channels()) {
      throw DataError("grid mismatch: class models were fitted on different grids");
    }
    out.push_back(f->depth(x));
  }
  return out;
}

std::vector<AtomImportance> direction_importance(const FIForest& forest, ImportanceMode mode) {
  const bool self = forest.config().dictionary.kind == DictionaryKind::self_data;
  if (!forest.shared_atoms() && !self) {
    throw ConfigError("direction importance needs a finite dictionary (dyadic, self-data, or a sized dictionary)");
  }
  const double psi = static_cast<double>(forest.psi());

  std::map<std::size_t, AtomImportance> credits;
  if (self) {
    for (std::size_t row = 0; row < forest.training_size(); ++row) {
      credits[row] = AtomImportance{row, SelfAtom{row, std::nullopt}, 0.0};
    }
  } else {
    const auto& table = *forest.shared_atoms();
    for (std::size_t i = 0; i < table.size(); ++i) credits[i] = AtomImportance{i, table[i].params.front(), 0.0};
  }

  for (const FITree& tree : forest.trees()) {
    const auto nodes = tree.structure().nodes();
    for (const auto& node : nodes) {
      if (node.is_leaf() || node.size < 3) continue;
      const double reward = mode == ImportanceMode::naive ? 1.0 : static_cast<double>(node.size) / psi;
      std::size_t key = node.atom;
      if (self) key = std::get<SelfAtom>(tree.atoms()[node.atom].params.front()).row;
      for (std::size_t child : {node.left, node.right}) {
        if (nodes[child].size == 1) credits.at(key).importance += reward;
      }
    }
  }

  std::vector<AtomImportance> out;
  out.reserve(credits.size());
  for (auto& [key, entry] : credits) out.push_back(std::move(entry));
  return out;
}

}  // namespace fif
