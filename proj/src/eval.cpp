#include "fif/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>

#include "fif/baseline_if.hpp"
#include "fif/error.hpp"
#include "fif/parallel.hpp"

namespace fif {

namespace {

bool contains(std::span<const int> set, int v) { return std::find(set.begin(), set.end(), v) != set.end(); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::size_t parse_count(const std::string& value, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size()) throw ConfigError(std::string("invalid ") + what + " value '" + value + "'");
  return static_cast<std::size_t>(v);
}

ForestConfig apply_axis(const ForestConfig& base, SweepAxis axis, const std::string& value) {
  ForestConfig c = base;
  switch (axis) {
    case SweepAxis::n_trees:
      c.n_trees = parse_count(value, "N");
      break;
    case SweepAxis::psi:
      c.psi = parse_count(value, "psi");
      if (!base.height_limit) c.height_limit.reset();
      break;
    case SweepAxis::height_limit:
      c.height_limit = parse_count(value, "height_limit");
      break;
    case SweepAxis::dict_size:
      c.dictionary.size = parse_count(value, "dict_size");
      break;
    case SweepAxis::dictionary: {
      DictionarySpec d = DictionarySpec::of(dictionary_kind_from_string(value));
      if (!d.is_finite()) d.size = base.dictionary.size;
      c.dictionary = d;
      break;
    }
  }
  return c;
}

constexpr std::array<std::pair<SweepAxis, const char*>, 5> kAxisNames{{
    {SweepAxis::n_trees, "N"},
    {SweepAxis::psi, "psi"},
    {SweepAxis::height_limit, "height_limit"},
    {SweepAxis::dict_size, "dict_size"},
    {SweepAxis::dictionary, "dictionary"},
}};

const std::vector<UcrPreset>& preset_table() {
  static const std::vector<UcrPreset> table{
      {"Chinatown", {2}, {1}, 4, 95},
      {"Coffee", {1}, {0}, 5, 6},
      {"ECGFiveDays", {1}, {2}, 2, 53},
      {"ECG200", {1}, {-1}, 31, 36},
      {"HandOutlines", {1}, {0}, 362, 133},
      {"SonyAIBORobotSurface1", {2}, {1}, 6, 343},
      {"SonyAIBORobotSurface2", {2}, {1}, 4, 365},
      {"StarLightCurves", {3}, {1, 2}, 100, 3482},
      {"TwoLeadECG", {1}, {2}, 2, 570},
      {"Yoga", {2}, {1}, 10, 1393},
      {"EOGHorizontalSignal", {5}, {6}, 10, 30},
      {"CinCECGTorso", {3}, {4}, 4, 345},
      {"ECG5000", {1}, {3, 4, 5}, 31, 283},
  };
  return table;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw DataError("score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the anomalies (ranks start at 1).
  double anomaly_rank_sum = 0.0;
  std::size_t anomalies = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::anomaly) {
        anomaly_rank_sum += midrank;
        ++anomalies;
      }
    }
    i = j;
  }
  const std::size_t normals = n - anomalies;
  if (anomalies == 0 || normals == 0) throw DataError("AUC needs at least one normal and one anomaly");
  const double na = static_cast<double>(anomalies);
  const double u = anomaly_rank_sum - na * (na + 1.0) / 2.0;
  return u / (na * static_cast<double>(normals));
}

LabelledData filter_classes(const FunctionalDataset& data, std::span<const int> normal, std::span<const int> anomaly,
                            std::optional<std::size_t> max_anomalies) {
  if (!data.labels()) throw DataError("dataset has no class labels");
  if (normal.empty() || anomaly.empty()) throw ConfigError("normal and anomaly label sets must be nonempty");
  for (int v : normal) {
    if (contains(anomaly, v)) throw ConfigError("label " + std::to_string(v) + " is both normal and anomaly");
  }
  std::vector<std::size_t> rows;
  std::vector<Label> labels;
  std::size_t kept_anomalies = 0;
  const auto& raw = *data.labels();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (contains(normal, raw[i])) {
      rows.push_back(i);
      labels.push_back(Label::normal);
    } else if (contains(anomaly, raw[i]) && (!max_anomalies || kept_anomalies < *max_anomalies)) {
      rows.push_back(i);
      labels.push_back(Label::anomaly);
      ++kept_anomalies;
    }
  }
  if (rows.empty()) throw DataError("no rows carry the requested class labels");
  return LabelledData{data.select(rows), std::move(labels)};
}

std::vector<double> fit_and_score(const MethodSpec& method, const FunctionalDataset& train,
                                  const FunctionalDataset& test, std::uint64_t seed, unsigned threads) {
  if (!(train.grid() == test.grid())) throw DataError("grid mismatch: train and test grids differ");
  if (method.kind == MethodKind::fif) {
    ForestConfig config = method.forest;
    config.seed = seed;
    config.threads = threads;
    const FIForest forest = FIForest::fit(train, config);
    const ScoreReport report = forest.score_all(test, threads);
    std::vector<double> scores;
    scores.reserve(report.entries.size());
    for (const auto& e : report.entries) scores.push_back(e.score);
    return scores;
  }
  IsolationForestConfig config;
  config.n_trees = method.forest.n_trees;
  config.psi = method.forest.psi;
  config.height_limit = method.forest.height_limit;
  config.min_leaf_size = method.forest.min_leaf_size;
  config.mode = method.kind == MethodKind::if_axis ? SplitMode::axis : SplitMode::extended;
  config.seed = seed;
  config.threads = threads;
  const IsolationForest forest = IsolationForest::fit(VectorDataset::from_functional(train), config);
  return forest.score_all(VectorDataset::from_functional(test), threads);
}

std::span<const UcrPreset> ucr_presets() { return preset_table(); }

std::optional<UcrPreset> ucr_preset(const std::string& name) {
  const std::string key = lower(name);
  for (const auto& p : preset_table()) {
    if (lower(p.name) == key) return p;
  }
  return std::nullopt;
}

BenchmarkReport run_benchmark(const BenchmarkTask& task) {
  return run_benchmark(task, load_dataset(task.train_path), load_dataset(task.test_path));
}

BenchmarkReport run_benchmark(const BenchmarkTask& task, const FunctionalDataset& train,
                              const FunctionalDataset& test) {
  if (task.seeds.empty()) throw ConfigError("benchmark needs at least one seed");
  const auto train_part = filter_classes(train, task.normal_labels, task.anomaly_labels, task.train_anomalies);
  const auto test_part = filter_classes(test, task.normal_labels, task.anomaly_labels, task.test_anomalies);

  BenchmarkReport report;
  for (std::uint64_t seed : task.seeds) {
    const auto scores = fit_and_score(task.method, train_part.data, test_part.data, seed, task.threads);
    report.rows.push_back(BenchmarkRow{task.dataset, task.method.name, seed, auc(scores, test_part.labels)});
  }
  double sum = 0.0;
  for (const auto& r : report.rows) sum += r.auc;
  report.mean = sum / static_cast<double>(report.rows.size());
  if (report.rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : report.rows) ss += (r.auc - report.mean) * (r.auc - report.mean);
    report.sd = std::sqrt(ss / static_cast<double>(report.rows.size() - 1));
  }
  return report;
}

void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& out) {
  out << "dataset,method,seed,auc\n";
  for (const auto& r : rows) out << r.dataset << ',' << r.method << ',' << r.seed << ',' << format_number(r.auc) << '\n';
}

void write_benchmark_summary_csv(std::span<const BenchmarkReport> reports, std::ostream& out) {
  out << "dataset,method,seeds,mean_auc,sd_auc\n";
  for (const auto& rep : reports) {
    if (rep.rows.empty()) continue;
    out << rep.rows.front().dataset << ',' << rep.rows.front().method << ',' << rep.rows.size() << ','
        << format_number(rep.mean) << ',' << format_number(rep.sd) << '\n';
  }
}

void write_benchmark_summary_table(std::span<const BenchmarkReport> reports, std::ostream& out) {
  std::size_t dw = 7, mw = 6;
  for (const auto& rep : reports) {
    if (rep.rows.empty()) continue;
    dw = std::max(dw, rep.rows.front().dataset.size());
    mw = std::max(mw, rep.rows.front().method.size());
  }
  const auto w = [](std::size_t n) { return static_cast<int>(n); };
  out << std::left << std::setw(w(dw)) << "dataset" << "  " << std::setw(w(mw)) << "method" << "  " << std::right
      << std::setw(5) << "seeds" << "  " << std::setw(10) << "mean AUC" << "  " << std::setw(10) << "sd" << '\n';
  for (const auto& rep : reports) {
    if (rep.rows.empty()) continue;
    out << std::left << std::setw(w(dw)) << rep.rows.front().dataset << "  " << std::setw(w(mw))
        << rep.rows.front().method << "  " << std::right << std::setw(5) << rep.rows.size() << "  " << std::setw(10)
        << format_number(rep.mean) << "  " << std::setw(10) << format_number(rep.sd) << '\n';
  }
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  for (const auto& [axis, label] : kAxisNames) {
    if (name == label) return axis;
  }
  if (name == "n_trees") return SweepAxis::n_trees;
  throw ConfigError("unknown sweep axis '" + name + "' (expected N, psi, height_limit, dict_size or dictionary)");
}

std::string to_string(SweepAxis axis) {
  for (const auto& [a, label] : kAxisNames) {
    if (a == axis) return label;
  }
  return "unknown";
}

std::vector<SweepRow> run_stability_sweep(const FunctionalDataset& data, std::span<const Observation> probes,
                                          const ForestConfig& base, SweepAxis axis,
                                          std::span<const std::string> values, std::size_t repeats,
                                          std::uint64_t seed, unsigned threads) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  if (repeats == 0) throw ConfigError("sweep needs at least one repeat");
  if (probes.empty()) throw ConfigError("sweep needs at least one probe");

  std::vector<ForestConfig> configs;
  for (const auto& v : values) {
    ForestConfig c = apply_axis(base, axis, v);
    if (c.psi && *c.psi > data.size()) {
      throw ConfigError("sweep value psi=" + std::to_string(*c.psi) + " exceeds n=" + std::to_string(data.size()));
    }
    c.threads = 1;
    configs.push_back(std::move(c));
  }
  for (const auto& p : probes) {
    if (p.size() != data.channels()) throw DataError("grid mismatch: probe channel count differs from the dataset");
    for (const Curve& c : p) {
      if (c.size() != data.grid().size()) throw DataError("grid mismatch: probe length differs from the dataset grid");
    }
  }

  const std::size_t tasks = configs.size() * repeats;
  std::vector<SweepRow> rows(tasks * probes.size());
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t v = task / repeats;
    const std::size_t r = task % repeats;
    ForestConfig config = configs[v];
    Rng seeder = make_stream(seed, r);
    config.seed = seeder();
    const FIForest forest = FIForest::fit(data, config);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      rows[task * probes.size() + p] = SweepRow{values[v], r, p, forest.score(probes[p])};
    }
  });
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "axis_value,repeat,probe_id,score\n";
  for (const auto& r : rows) {
    out << r.axis_value << ',' << r.repeat << ',' << r.probe << ',' << format_number(r.score) << '\n';
  }
}

}  // namespace fif
