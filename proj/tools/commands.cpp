#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"

#include "fif/baseline_if.hpp"
#include "fif/error.hpp"
#include "fif/forest.hpp"
#include "fif/model_io.hpp"
#include "fif/parallel.hpp"

namespace fif::cli {

using nlohmann::json;

namespace {

const char* method_key(MethodKind kind) {
  switch (kind) {
    case MethodKind::if_axis:
      return "if_axis";
    case MethodKind::if_extended:
      return "if_extended";
    default:
      return "fif";
  }
}

MethodKind method_from(const std::string& name) {
  if (name == "fif") return MethodKind::fif;
  if (name == "if_axis") return MethodKind::if_axis;
  if (name == "if_extended") return MethodKind::if_extended;
  throw ConfigError("unknown method '" + name + "' (expected fif, if_axis or if_extended)");
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

template <class T>
json or_null(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

/// Splits the "size" convention off a dictionary object: 0 means fresh atoms.
std::pair<DictionarySpec, bool> dictionary_with_fresh_flag(json j) {
  bool fresh = false;
  if (j.is_object() && j.contains("size") && j["size"].is_number_integer() && j["size"].get<long long>() == 0) {
    fresh = true;
    j.erase("size");
  }
  return {dictionary_from_json(j), fresh};
}

DictionarySpec effective_dictionary(const RunConfig& c) {
  DictionarySpec d = c.dictionary;
  if (c.fresh_atoms) {
    d.size.reset();
  } else if (!d.size && !d.is_finite() && !d.is_data_bound()) {
    d.size = kDefaultDictionarySize;
  }
  return d;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(cell, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != cell.size()) throw ConfigError(std::string("invalid ") + what + " entry '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

/// Writes through `write` to `path`, or to `fallback` when no path is given.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write '" + path + "'");
  write(file);
  file.flush();
  if (!file) throw DataError("failed writing '" + path + "'");
}

void write_score_csv(std::span<const double> scores, std::ostream& out) {
  const auto ranks = rank_descending(scores);
  out << "id,score,depth,rank\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << i << ',' << format_number(scores[i]) << ',' << format_number(1.0 - scores[i]) << ',' << ranks[i] << '\n';
  }
}

std::vector<double> scores_of(const ScoreReport& report) {
  std::vector<double> s;
  s.reserve(report.entries.size());
  for (const auto& e : report.entries) s.push_back(e.score);
  return s;
}

json grid_json(const TimeGrid& grid) { return std::vector<double>(grid.points().begin(), grid.points().end()); }

/// A fitted model of either family, as read from or written to a model file.
struct LoadedModel {
  std::optional<FIForest> forest;
  std::optional<IsolationForest> baseline;
  std::optional<TimeGrid> grid;
  std::size_t channels = 1;
};

LoadedModel load_model(const std::string& path) {
  const json j = read_json(path);
  LoadedModel m;
  std::string mode;
  try {
    mode = j.at("mode").get<std::string>();
  } catch (const json::exception&) {
    throw DataError("'" + path + "' is not a model file");
  }
  if (mode == "fif") {
    m.forest.emplace(forest_from_json(j));
    m.grid = m.forest->grid();
    m.channels = m.forest->channels();
  } else {
    m.baseline.emplace(baseline_from_json(j));
    try {
      if (j.contains("grid")) m.grid.emplace(j["grid"].get<std::vector<double>>());
      if (j.contains("channels")) m.channels = j["channels"].get<std::size_t>();
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed model file: ") + e.what());
    }
  }
  return m;
}

const FIForest& require_fif(const LoadedModel& m, const std::string& path) {
  if (!m.forest) throw ConfigError("'" + path + "' is an isolation forest baseline; this command needs a FIF model");
  return *m.forest;
}

std::vector<double> score_with(const LoadedModel& m, const FunctionalDataset& data, unsigned threads) {
  if (m.forest) return scores_of(m.forest->score_all(data, threads));
  if (m.grid && !(*m.grid == data.grid())) throw DataError("grid mismatch: dataset grid differs from the model grid");
  if (data.channels() != m.channels) throw DataError("grid mismatch: dataset channel count differs from the model");
  const VectorDataset vectors = VectorDataset::from_functional(data);
  if (vectors.dims() != m.baseline->dims()) {
    throw DataError("grid mismatch: dataset has " + std::to_string(vectors.dims()) + " coordinates, model expects " +
                    std::to_string(m.baseline->dims()));
  }
  return m.baseline->score_all(vectors, threads);
}

std::filesystem::path locate_ucr(const std::filesystem::path& dir, const std::string& name, const std::string& part) {
  const std::string stem = name + "_" + part;
  for (const auto& candidate : {dir / name / (stem + ".tsv"), dir / (stem + ".tsv"), dir / name / (stem + ".txt"),
                                dir / (stem + ".txt")}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw DataError("cannot find " + stem + " under '" + dir.string() + "'");
}

/// Command-line values that override the config file.
struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string method;
  std::size_t trees = 0;
  std::size_t psi = 0;
  std::size_t height_limit = 0;
  std::string dictionary;
  std::size_t dictionary_size = 0;
  std::string inner_product;
  double alpha = 0.5;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* trees_opt = nullptr;
  CLI::Option* psi_opt = nullptr;
  CLI::Option* height_opt = nullptr;
  CLI::Option* dict_size_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
};

void add_shared(CLI::App* cmd, Overrides& o, bool seeded, const std::string& out_help) {
  cmd->add_option("--config", o.config, "JSON run config; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  if (seeded) o.seed_opt = cmd->add_option("--seed", o.seed, "Seed for all randomness (required)");
  o.threads_opt = cmd->add_option("--threads", o.threads, "Worker threads; 0 = all cores (default)");
  cmd->add_option("--out", o.out, out_help);
}

void add_forest_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--method", o.method, "fif (default), if_axis or if_extended");
  o.trees_opt = cmd->add_option("--trees", o.trees, "Number of trees N (default 100)");
  o.psi_opt = cmd->add_option("--psi", o.psi, "Subsample size (default min(256, n))");
  o.height_opt = cmd->add_option("--height-limit", o.height_limit, "Tree height limit (default ceil(log2 psi))");
  cmd->add_option("--dict", o.dictionary, "Dictionary family, e.g. cosine, gaussian_wavelet, dyadic, self");
  o.dict_size_opt =
      cmd->add_option("--dict-size", o.dictionary_size, "Atoms materialized per forest; 0 draws fresh atoms per split");
  cmd->add_option("--ip", o.inner_product, "Inner product: l2, deriv or combined");
  o.alpha_opt = cmd->add_option("--alpha", o.alpha, "Weight of the L2 term for --ip combined (default 0.5)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed_opt && o.seed_opt->count()) c.seed = o.seed;
  if (o.threads_opt && o.threads_opt->count()) c.threads = o.threads;
  if (!o.method.empty()) c.method = method_from(o.method);
  if (o.trees_opt && o.trees_opt->count()) c.n_trees = o.trees;
  if (o.psi_opt && o.psi_opt->count()) c.psi = o.psi;
  if (o.height_opt && o.height_opt->count()) c.height_limit = o.height_limit;
  if (!o.dictionary.empty()) {
    c.dictionary = DictionarySpec::of(dictionary_kind_from_string(o.dictionary));
    c.fresh_atoms = false;
  }
  if (o.dict_size_opt && o.dict_size_opt->count()) {
    c.fresh_atoms = o.dictionary_size == 0;
    if (o.dictionary_size == 0) {
      c.dictionary.size.reset();
    } else {
      c.dictionary.size = o.dictionary_size;
    }
  }
  if (!o.inner_product.empty()) {
    InnerProductSpec ip;
    if (o.inner_product == "l2") {
      ip = InnerProductSpec::l2();
    } else if (o.inner_product == "deriv") {
      ip = InnerProductSpec::deriv();
    } else if (o.inner_product == "combined") {
      ip = InnerProductSpec::combined(o.alpha);
    } else {
      throw ConfigError("unknown inner product '" + o.inner_product + "' (expected l2, deriv or combined)");
    }
    c.inner_products = std::vector<InnerProductSpec>{ip};
  } else if (o.alpha_opt && o.alpha_opt->count()) {
    throw ConfigError("--alpha needs --ip combined");
  }
  return c;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw ConfigError("a seed is required: pass --seed <u64> or set \"seed\" in the config");
  return *c.seed;
}

unsigned threads_of(const RunConfig& c) { return c.threads.value_or(0); }

// Commands ------------------------------------------------------------------

struct FitArgs {
  Overrides o;
  std::string data;
  std::string scores;
  bool print_config = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const RunConfig c = resolve(a.o);
  if (a.print_config) {
    std::optional<std::size_t> n, d;
    if (!a.data.empty()) {
      const auto data = load_dataset(a.data);
      n = data.size();
      d = data.channels();
    }
    out << run_config_json(c, n, d).dump(2) << '\n';
    return kExitOk;
  }
  if (a.data.empty()) throw ConfigError("fit needs --data");
  if (a.o.out.empty()) throw ConfigError("fit needs --out for the model file");
  const std::uint64_t seed = require_seed(c);
  const auto data = load_dataset(a.data);

  json model;
  std::vector<double> training_scores;
  if (c.method == MethodKind::fif) {
    const FIForest forest = FIForest::fit(data, forest_config(c, data.channels()));
    model = forest_to_json(forest);
    if (!a.scores.empty()) training_scores = scores_of(forest.score_all(data, threads_of(c)));
  } else {
    IsolationForestConfig ic;
    ic.n_trees = c.n_trees;
    ic.psi = c.psi;
    ic.height_limit = c.height_limit;
    ic.min_leaf_size = c.min_leaf_size;
    ic.mode = c.method == MethodKind::if_axis ? SplitMode::axis : SplitMode::extended;
    ic.seed = seed;
    ic.threads = threads_of(c);
    const VectorDataset vectors = VectorDataset::from_functional(data);
    const IsolationForest forest = IsolationForest::fit(vectors, ic);
    model = baseline_to_json(forest);
    model["grid"] = grid_json(data.grid());
    model["channels"] = data.channels();
    if (!a.scores.empty()) training_scores = forest.score_all(vectors, threads_of(c));
  }
  write_json(model, a.o.out);
  if (!a.scores.empty()) emit(a.scores, out, [&](std::ostream& s) { write_score_csv(training_scores, s); });
  return kExitOk;
}

struct ScoreArgs {
  Overrides o;
  std::string model;
  std::string data;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const RunConfig c = resolve(a.o);
  const LoadedModel model = load_model(a.model);
  const auto data = load_dataset(a.data);
  const auto scores = score_with(model, data, threads_of(c));
  emit(a.o.out, out, [&](std::ostream& s) { write_score_csv(scores, s); });
  return kExitOk;
}

struct BenchArgs {
  Overrides o;
  std::string dataset;
  std::string ucr_dir;
  std::string train;
  std::string test;
  std::string normal;
  std::string anomaly;
  std::size_t seeds = 0;
  CLI::Option* seeds_opt = nullptr;
  std::string summary;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  RunConfig c = resolve(a.o);
  if (!a.dataset.empty()) c.dataset = a.dataset;
  if (!a.train.empty()) c.train = a.train;
  if (!a.test.empty()) c.test = a.test;
  if (!a.normal.empty()) c.normal_labels = parse_int_list(a.normal, "--normal");
  if (!a.anomaly.empty()) c.anomaly_labels = parse_int_list(a.anomaly, "--anomaly");
  if (a.seeds_opt && a.seeds_opt->count()) c.seeds = a.seeds;
  const std::uint64_t seed = require_seed(c);
  if (c.seeds == 0) throw ConfigError("bench needs at least one seed");

  BenchmarkTask task;
  task.dataset = c.dataset.value_or("dataset");
  if (c.dataset) {
    if (const auto preset = ucr_preset(*c.dataset)) {
      task.dataset = preset->name;
      task.normal_labels = preset->normal_labels;
      task.anomaly_labels = preset->anomaly_labels;
      task.train_anomalies = preset->train_anomalies;
      task.test_anomalies = preset->test_anomalies;
    }
  }
  if (!c.normal_labels.empty()) task.normal_labels = c.normal_labels;
  if (!c.anomaly_labels.empty()) task.anomaly_labels = c.anomaly_labels;
  if (c.train_anomalies) task.train_anomalies = c.train_anomalies;
  if (c.test_anomalies) task.test_anomalies = c.test_anomalies;
  if (task.normal_labels.empty() || task.anomaly_labels.empty()) {
    throw ConfigError("bench needs normal and anomaly labels (--normal/--anomaly or a known --dataset)");
  }

  if (c.train && c.test) {
    task.train_path = *c.train;
    task.test_path = *c.test;
  } else {
    if (!c.dataset) throw ConfigError("bench needs --train and --test, or --dataset with a UCR directory");
    std::string dir = a.ucr_dir;
    if (dir.empty()) {
      if (const char* env = std::getenv("FIF_UCR_DIR")) dir = env;
    }
    if (dir.empty()) throw ConfigError("no UCR directory: pass --ucr-dir or set FIF_UCR_DIR");
    task.train_path = c.train.value_or(locate_ucr(dir, *c.dataset, "TRAIN"));
    task.test_path = c.test.value_or(locate_ucr(dir, *c.dataset, "TEST"));
  }

  const auto train = load_dataset(task.train_path);
  task.method.name = method_name(c);
  task.method.kind = c.method;
  task.method.forest = forest_config(c, train.channels());
  for (std::size_t i = 0; i < c.seeds; ++i) task.seeds.push_back(seed + i);
  task.threads = threads_of(c);

  const std::vector<BenchmarkReport> reports{run_benchmark(task, train, load_dataset(task.test_path))};
  if (!a.o.out.empty()) emit(a.o.out, out, [&](std::ostream& s) { write_benchmark_csv(reports.front().rows, s); });
  if (!a.summary.empty()) emit(a.summary, out, [&](std::ostream& s) { write_benchmark_summary_csv(reports, s); });
  write_benchmark_summary_table(reports, out);
  return kExitOk;
}

struct SweepArgs {
  Overrides o;
  std::string data;
  std::string probes;
  std::string axis;
  std::string values;
  std::size_t repeats = 0;
  CLI::Option* repeats_opt = nullptr;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  RunConfig c = resolve(a.o);
  if (!a.axis.empty()) c.axis = a.axis;
  if (!a.values.empty()) c.values = parse_string_list(a.values);
  if (a.repeats_opt && a.repeats_opt->count()) c.repeats = a.repeats;
  const std::uint64_t seed = require_seed(c);
  if (!c.axis) throw ConfigError("sweep needs --axis (N, psi, height_limit, dict_size or dictionary)");
  const SweepAxis axis = sweep_axis_from_string(*c.axis);

  const FunctionalDataset data = a.data.empty() ? gen_brownian_dataset(500, 100, seed) : load_dataset(a.data);
  std::vector<Observation> probes;
  if (!a.probes.empty()) {
    probes = load_dataset(a.probes).observations();
  } else {
    if (data.channels() != 1) throw ConfigError("default probes are univariate; pass --probes for this dataset");
    probes = brownian_probes(data.grid());
  }
  const auto rows = run_stability_sweep(data, probes, forest_config(c, data.channels()), axis, c.values, c.repeats,
                                        seed, threads_of(c));
  emit(a.o.out, out, [&](std::ostream& s) { write_sweep_csv(rows, s); });
  return kExitOk;
}

struct SynthArgs {
  Overrides o;
  std::string generator;
  std::size_t n = 500;
  std::size_t points = 100;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const RunConfig c = resolve(a.o);
  const std::uint64_t seed = require_seed(c);
  if (a.points < 2) throw ConfigError("--points must be at least 2");
  std::optional<FunctionalDataset> data;
  if (a.generator == "cuevas105") {
    data = gen_cuevas105(seed, Cuevas105Options{.points = a.points});
  } else if (a.generator == "brownian") {
    data = gen_brownian_dataset(a.n, a.points, seed);
  } else if (a.generator == "brownian_probes") {
    const TimeGrid grid = TimeGrid::uniform(a.points);
    auto probes = brownian_probes(grid);
    data = FunctionalDataset(grid, std::move(probes));
  } else if (a.generator == "noisy_contamination") {
    data = gen_noisy_contamination(seed, a.points);
  } else if (a.generator == "isolated_anomaly") {
    data = gen_isolated_anomaly(seed, a.points);
  } else if (a.generator == "smooth") {
    data = gen_smooth_dataset(a.n, a.points, seed);
  } else {
    throw ConfigError("unknown generator '" + a.generator +
                      "' (expected cuevas105, brownian, brownian_probes, noisy_contamination, isolated_anomaly or "
                      "smooth)");
  }
  emit(a.o.out, out, [&](std::ostream& s) { write_dataset(*data, s); });
  return kExitOk;
}

struct ImportanceArgs {
  Overrides o;
  std::string model;
  std::string mode = "adaptive";
};

int cmd_importance(const ImportanceArgs& a, std::ostream& out) {
  resolve(a.o);
  ImportanceMode mode;
  if (a.mode == "adaptive") {
    mode = ImportanceMode::adaptive;
  } else if (a.mode == "naive") {
    mode = ImportanceMode::naive;
  } else {
    throw ConfigError("unknown importance mode '" + a.mode + "' (expected naive or adaptive)");
  }
  const LoadedModel model = load_model(a.model);
  auto entries = direction_importance(require_fif(model, a.model), mode);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const AtomImportance& x, const AtomImportance& y) { return x.importance > y.importance; });
  emit(a.o.out, out, [&](std::ostream& s) {
    s << "atom_id,importance,support_lo,support_hi,atom\n";
    for (const auto& e : entries) {
      s << e.atom_id << ',' << format_number(e.importance) << ',';
      if (const auto sup = support(e.params)) {
        s << format_number(sup->lo) << ',' << format_number(sup->hi);
      } else {
        s << ',';
      }
      s << ',' << describe(e.params) << '\n';
    }
  });
  return kExitOk;
}

struct DepthmapArgs {
  Overrides o;
  std::vector<std::string> models;
  std::string data;
};

int cmd_depthmap(const DepthmapArgs& a, std::ostream& out) {
  const RunConfig c = resolve(a.o);
  std::vector<LoadedModel> models;
  for (const auto& path : a.models) models.push_back(load_model(path));
  std::vector<const FIForest*> forests;
  for (std::size_t i = 0; i < models.size(); ++i) forests.push_back(&require_fif(models[i], a.models[i]));
  const auto data = load_dataset(a.data);
  if (!(data.grid() == forests.front()->grid())) throw DataError("grid mismatch: dataset grid differs from the models");

  std::vector<std::vector<double>> rows(data.size());
  parallel_for(data.size(), threads_of(c), [&](std::size_t i) { rows[i] = depth_map(forests, data[i]); });
  emit(a.o.out, out, [&](std::ostream& s) {
    s << "id";
    for (std::size_t q = 1; q <= forests.size(); ++q) s << ",D_" << q;
    s << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s << i;
      for (double v : rows[i]) s << ',' << format_number(v);
      s << '\n';
    }
  });
  return kExitOk;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j,
                        {"method", "n_trees", "psi", "height_limit", "min_leaf_size", "dictionary", "inner_product",
                         "seed", "threads", "dataset", "train", "test", "normal_labels", "anomaly_labels",
                         "train_anomalies", "test_anomalies", "seeds", "axis", "values", "repeats"},
                        "config");
    RunConfig c;
    if (auto m = optional_field<std::string>(j, "method")) c.method = method_from(*m);
    if (auto v = optional_field<std::size_t>(j, "n_trees")) c.n_trees = *v;
    c.psi = optional_field<std::size_t>(j, "psi");
    c.height_limit = optional_field<std::size_t>(j, "height_limit");
    if (auto v = optional_field<std::size_t>(j, "min_leaf_size")) c.min_leaf_size = *v;
    if (j.contains("dictionary") && !j["dictionary"].is_null()) {
      std::tie(c.dictionary, c.fresh_atoms) = dictionary_with_fresh_flag(j["dictionary"]);
    }
    if (j.contains("inner_product") && !j["inner_product"].is_null()) {
      c.inner_products = inner_products_from_json(j["inner_product"]);
    }
    c.seed = optional_field<std::uint64_t>(j, "seed");
    c.threads = optional_field<unsigned>(j, "threads");
    c.dataset = optional_field<std::string>(j, "dataset");
    if (auto p = optional_field<std::string>(j, "train")) c.train = *p;
    if (auto p = optional_field<std::string>(j, "test")) c.test = *p;
    if (auto v = optional_field<std::vector<int>>(j, "normal_labels")) c.normal_labels = *v;
    if (auto v = optional_field<std::vector<int>>(j, "anomaly_labels")) c.anomaly_labels = *v;
    c.train_anomalies = optional_field<std::size_t>(j, "train_anomalies");
    c.test_anomalies = optional_field<std::size_t>(j, "test_anomalies");
    if (auto v = optional_field<std::size_t>(j, "seeds")) c.seeds = *v;
    c.axis = optional_field<std::string>(j, "axis");
    if (auto v = optional_field<std::vector<std::string>>(j, "values")) c.values = *v;
    if (auto v = optional_field<std::size_t>(j, "repeats")) c.repeats = *v;
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
  }
  return parse_run_config(j);
}

json run_config_json(const RunConfig& c, std::optional<std::size_t> n, std::optional<std::size_t> channels) {
  json j;
  j["method"] = method_key(c.method);
  j["n_trees"] = c.n_trees;
  std::optional<std::size_t> psi = c.psi;
  if (!psi && n) psi = default_psi(*n);
  std::optional<std::size_t> height = c.height_limit;
  if (!height && psi) height = default_height_limit(*psi);
  j["psi"] = or_null(psi);
  j["height_limit"] = or_null(height);
  j["min_leaf_size"] = c.min_leaf_size;
  json dict = to_json(effective_dictionary(c));
  if (c.fresh_atoms) dict["size"] = 0;
  j["dictionary"] = dict;
  if (c.inner_products) {
    json ips = json::array();
    for (const auto& ip : *c.inner_products) ips.push_back(to_json(ip));
    j["inner_product"] = ips.size() == 1 ? ips[0] : ips;
  } else if (channels) {
    json ips = json::array();
    for (std::size_t i = 0; i < *channels; ++i) ips.push_back(to_json(InnerProductSpec::l2()));
    j["inner_product"] = ips.size() == 1 ? ips[0] : ips;
  } else {
    j["inner_product"] = nullptr;
  }
  j["seed"] = or_null(c.seed);
  j["threads"] = or_null(c.threads);
  j["dataset"] = or_null(c.dataset);
  j["train"] = c.train ? json(c.train->string()) : json(nullptr);
  j["test"] = c.test ? json(c.test->string()) : json(nullptr);
  j["normal_labels"] = c.normal_labels;
  j["anomaly_labels"] = c.anomaly_labels;
  j["train_anomalies"] = or_null(c.train_anomalies);
  j["test_anomalies"] = or_null(c.test_anomalies);
  j["seeds"] = c.seeds;
  j["axis"] = or_null(c.axis);
  j["values"] = c.values;
  j["repeats"] = c.repeats;
  return j;
}

ForestConfig forest_config(const RunConfig& c, std::size_t channels) {
  ForestConfig f;
  f.n_trees = c.n_trees;
  f.psi = c.psi;
  f.height_limit = c.height_limit;
  f.min_leaf_size = c.min_leaf_size;
  f.dictionary = effective_dictionary(c);
  f.inner_products = c.inner_products.value_or(std::vector<InnerProductSpec>(channels, InnerProductSpec::l2()));
  f.seed = c.seed.value_or(0);
  f.threads = c.threads.value_or(0);
  return f;
}

std::string method_name(const RunConfig& c) {
  if (c.method != MethodKind::fif) return method_key(c.method);
  std::string name = to_string(c.dictionary.kind);
  const auto ips = c.inner_products.value_or(std::vector<InnerProductSpec>{InnerProductSpec::l2()});
  for (const auto& ip : ips) {
    switch (ip.kind) {
      case InnerProductKind::l2:
        name += "_l2";
        break;
      case InnerProductKind::deriv:
        name += "_deriv";
        break;
      case InnerProductKind::combined:
        name += "_combined" + format_number(ip.alpha);
        break;
    }
  }
  return name;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Functional isolation forest: fit, score and benchmark anomaly detectors on curve data.", "fif"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it as JSON");
  add_shared(fit_cmd, fit.o, true, "Model file to write");
  add_forest_flags(fit_cmd, fit.o);
  fit_cmd->add_option("--data", fit.data, "Training data (native CSV or UCR file)");
  fit_cmd->add_option("--scores", fit.scores, "Also write training-set scores to this CSV");
  fit_cmd->add_flag("--print-config", fit.print_config, "Print the effective config with all defaults and exit");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score a dataset with a fitted model");
  add_shared(score_cmd, score.o, false, "Score CSV (default: stdout)");
  score_cmd->add_option("--model", score.model, "Model file")->required();
  score_cmd->add_option("--data", score.data, "Data to score")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "AUC benchmark over a train/test split, one fit per seed");
  add_shared(bench_cmd, bench.o, true, "Per-seed CSV dataset,method,seed,auc");
  add_forest_flags(bench_cmd, bench.o);
  bench_cmd->add_option("--dataset", bench.dataset, "Dataset name; UCR names select their class layout");
  bench_cmd->add_option("--ucr-dir", bench.ucr_dir, "UCR archive root (default: $FIF_UCR_DIR)");
  bench_cmd->add_option("--train", bench.train, "Train file");
  bench_cmd->add_option("--test", bench.test, "Test file");
  bench_cmd->add_option("--normal", bench.normal, "Comma-separated normal class labels");
  bench_cmd->add_option("--anomaly", bench.anomaly, "Comma-separated anomaly class labels");
  bench.seeds_opt = bench_cmd->add_option("--seeds", bench.seeds, "Number of seeds: seed, seed+1, ... (default 10)");
  bench_cmd->add_option("--summary", bench.summary, "Summary CSV with mean and sd");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Score probes over repeated fits while varying one hyperparameter");
  add_shared(sweep_cmd, sweep.o, true, "Long-format CSV axis_value,repeat,probe_id,score (default: stdout)");
  add_forest_flags(sweep_cmd, sweep.o);
  sweep_cmd->add_option("--data", sweep.data, "Training data (default: 500 Brownian paths on 100 points)");
  sweep_cmd->add_option("--probes", sweep.probes, "Probe curves (default: the four Brownian probes)");
  sweep_cmd->add_option("--axis", sweep.axis, "N, psi, height_limit, dict_size or dictionary");
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated axis values");
  sweep.repeats_opt = sweep_cmd->add_option("--repeats", sweep.repeats, "Fits per axis value (default 100)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_shared(synth_cmd, synth.o, true, "Dataset CSV (default: stdout)");
  synth_cmd
      ->add_option("generator", synth.generator,
                   "cuevas105, brownian, brownian_probes, noisy_contamination, isolated_anomaly or smooth")
      ->required();
  synth_cmd->add_option("--n", synth.n, "Curves for brownian and smooth (default 500)");
  synth_cmd->add_option("--points", synth.points, "Grid points (default 100)");

  ImportanceArgs importance;
  auto* importance_cmd = app.add_subcommand("importance", "Per-atom direction importance of a FIF model");
  add_shared(importance_cmd, importance.o, false, "Importance CSV (default: stdout)");
  importance_cmd->add_option("--model", importance.model, "Model file")->required();
  importance_cmd->add_option("--mode", importance.mode, "naive or adaptive (default)");

  DepthmapArgs depthmap;
  auto* depthmap_cmd = app.add_subcommand("depthmap", "Per-class FIF depths, one model per class");
  add_shared(depthmap_cmd, depthmap.o, false, "CSV id,D_1,...,D_q (default: stdout)");
  depthmap_cmd->add_option("--model", depthmap.models, "Class model file; repeat once per class")->required();
  depthmap_cmd->add_option("--data", depthmap.data, "Data to embed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*score_cmd) return cmd_score(score, out);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*importance_cmd) return cmd_importance(importance, out);
    if (*depthmap_cmd) return cmd_depthmap(depthmap, out);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"fif"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fif::cli
