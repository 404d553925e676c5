#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fif/dictionaries.hpp"
#include "fif/eval.hpp"
#include "fif/inner_products.hpp"

namespace fif::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Dictionary size used for infinite families when the config does not give one.
inline constexpr std::size_t kDefaultDictionarySize = 1000;
/// Seeds per benchmark task unless configured.
inline constexpr std::size_t kDefaultBenchSeeds = 10;

/// Everything a run can be configured with. Unset optionals mean "use the default".
struct RunConfig {
  MethodKind method = MethodKind::fif;
  std::size_t n_trees = 100;
  std::optional<std::size_t> psi;
  std::optional<std::size_t> height_limit;
  std::size_t min_leaf_size = 1;
  DictionarySpec dictionary;
  bool fresh_atoms = false;  ///< draw atoms at every split rather than from a fixed table
  std::optional<std::vector<InnerProductSpec>> inner_products;  ///< default: L2 on every channel
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  // bench
  std::optional<std::string> dataset;
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  std::vector<int> normal_labels;
  std::vector<int> anomaly_labels;
  std::optional<std::size_t> train_anomalies;
  std::optional<std::size_t> test_anomalies;
  std::size_t seeds = kDefaultBenchSeeds;

  // sweep
  std::optional<std::string> axis;
  std::vector<std::string> values;
  std::size_t repeats = 100;
};

/// Parses a config document; unknown keys raise ConfigError. A dictionary "size" of 0
/// asks for fresh atoms at every split instead of a materialized table.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every field with its effective value; data-dependent defaults appear as null unless
/// `n` / `channels` are known.
nlohmann::json run_config_json(const RunConfig& config, std::optional<std::size_t> n = std::nullopt,
                               std::optional<std::size_t> channels = std::nullopt);

/// Forest config for `channels`-channel data; needs a seed.
ForestConfig forest_config(const RunConfig& config, std::size_t channels);
std::string method_name(const RunConfig& config);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fif::cli
