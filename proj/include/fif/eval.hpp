#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fif/curves.hpp"
#include "fif/forest.hpp"

namespace fif {

/// Mann-Whitney AUC: P(anomaly score > normal score) + P(tie) / 2 over all cross pairs.
double auc(std::span<const double> scores, std::span<const Label> labels);

/// Rows belonging to the normal or anomaly classes, in file order, keeping only the
/// first `max_anomalies` anomalies when set.
struct LabelledData {
  FunctionalDataset data;
  std::vector<Label> labels;
};
LabelledData filter_classes(const FunctionalDataset& data, std::span<const int> normal, std::span<const int> anomaly,
                            std::optional<std::size_t> max_anomalies = std::nullopt);

enum class MethodKind { fif, if_axis, if_extended };

struct MethodSpec {
  std::string name = "fif";
  MethodKind kind = MethodKind::fif;
  /// Hyperparameters; only N, psi, height limit and min leaf size apply to the IF baselines.
  ForestConfig forest;
};

/// Fits on `train` (labels ignored) and scores every row of `test`.
std::vector<double> fit_and_score(const MethodSpec& method, const FunctionalDataset& train,
                                  const FunctionalDataset& test, std::uint64_t seed, unsigned threads = 0);

/// Class layout of a UCR dataset: which labels are normal, which are anomalies, and how
/// many anomalies to keep in the train and test parts.
struct UcrPreset {
  std::string name;
  std::vector<int> normal_labels;
  std::vector<int> anomaly_labels;
  std::size_t train_anomalies = 0;
  std::size_t test_anomalies = 0;
};
std::optional<UcrPreset> ucr_preset(const std::string& name);
std::span<const UcrPreset> ucr_presets();

struct BenchmarkTask {
  std::string dataset;
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  std::vector<int> normal_labels;
  std::vector<int> anomaly_labels;
  std::optional<std::size_t> train_anomalies;
  std::optional<std::size_t> test_anomalies;
  MethodSpec method;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;
};

struct BenchmarkRow {
  std::string dataset;
  std::string method;
  std::uint64_t seed = 0;
  double auc = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation; 0 for a single seed
};

BenchmarkReport run_benchmark(const BenchmarkTask& task);
/// Same protocol on datasets already in memory.
BenchmarkReport run_benchmark(const BenchmarkTask& task, const FunctionalDataset& train, const FunctionalDataset& test);

void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& out);
void write_benchmark_summary_csv(std::span<const BenchmarkReport> reports, std::ostream& out);
void write_benchmark_summary_table(std::span<const BenchmarkReport> reports, std::ostream& out);

enum class SweepAxis { n_trees, psi, height_limit, dict_size, dictionary };
SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  std::string axis_value;
  std::size_t repeat = 0;
  std::size_t probe = 0;
  double score = 0.0;
};

/// For every axis value and repeat, fits on `data` with that value substituted into
/// `base` and scores each probe. Repeat r uses the same derived seed for every value.
/// Rows come sorted by (value order, repeat, probe).
std::vector<SweepRow> run_stability_sweep(const FunctionalDataset& data, std::span<const Observation> probes,
                                          const ForestConfig& base, SweepAxis axis,
                                          std::span<const std::string> values, std::size_t repeats,
                                          std::uint64_t seed, unsigned threads = 0);

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

/// Six significant digits, as used by every CSV the tools emit.
std::string format_number(double value);

}  // namespace fif
