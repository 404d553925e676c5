#include "fif/model_io.hpp"

#include <fstream>
#include <map>
#include <set>

#include "fif/error.hpp"

namespace fif {

using nlohmann::json;

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};

json interval_json(const Interval& r) { return json::array({r.lo, r.hi}); }

Interval interval_from(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string("'") + name + "' must be a [lo, hi] pair");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

const char* kind_name(InnerProductKind kind) {
  switch (kind) {
    case InnerProductKind::l2:
      return "l2";
    case InnerProductKind::deriv:
      return "deriv";
    case InnerProductKind::combined:
      return "combined";
  }
  return "l2";
}

template <class F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

template <class F>
auto as_data_error(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

json forest_config_json(const ForestConfig& c) {
  json j;
  j["n_trees"] = c.n_trees;
  j["psi"] = *c.psi;
  j["height_limit"] = *c.height_limit;
  j["min_leaf_size"] = c.min_leaf_size;
  j["seed"] = c.seed;
  j["dictionary"] = to_json(c.dictionary);
  json ips = json::array();
  for (const auto& ip : c.inner_products) ips.push_back(to_json(ip));
  j["inner_product"] = c.inner_products.size() == 1 ? ips[0] : ips;
  return j;
}

ForestConfig forest_config_from(const json& j) {
  reject_unknown_keys(j, {"n_trees", "psi", "height_limit", "min_leaf_size", "seed", "dictionary", "inner_product"},
                      "model config");
  ForestConfig c;
  c.n_trees = j.at("n_trees").get<std::size_t>();
  c.psi = j.at("psi").get<std::size_t>();
  c.height_limit = j.at("height_limit").get<std::size_t>();
  c.min_leaf_size = j.at("min_leaf_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.dictionary = dictionary_from_json(j.at("dictionary"));
  c.inner_products = inner_products_from_json(j.at("inner_product"));
  return c;
}

json decisions_json() {
  return json{
      {"c_psi", "2*(ln(m-1)+0.5772156649)-2*(m-1)/m; c(1)=0, c(2)=1"},
      {"split_value", "uniform in [min, max) of node projections"},
      {"degenerate_split", "leaf when max - min <= 1e-12"},
      {"empty_child", "redraw split value up to 8 times, then leaf"},
      {"subsample", "without replacement, partial Fisher-Yates per tree stream"},
      {"leaf_adjustment", "path length = depth + c(leaf size)"},
  };
}

json nodes_json(const IsolationTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back(json::array({n.size}));
    } else {
      nodes.push_back(json::array({n.size, n.atom, n.split}));
    }
  }
  return nodes;
}

// Rebuilds depth and child links from the preorder listing.
IsolationTree nodes_from(const json& j) {
  std::vector<IsolationNode> nodes;
  nodes.reserve(j.size());
  std::size_t cursor = 0;
  auto parse = [&](auto&& self, std::size_t depth) -> std::size_t {
    if (cursor >= j.size()) throw DataError("truncated tree in model file");
    const json& entry = j[cursor++];
    const std::size_t index = nodes.size();
    IsolationNode node;
    node.size = entry.at(0).get<std::size_t>();
    node.depth = depth;
    if (entry.size() == 3) {
      node.atom = entry.at(1).get<std::size_t>();
      node.split = entry.at(2).get<double>();
    } else if (entry.size() != 1) {
      throw DataError("tree node must be [size] or [size, atom, kappa]");
    }
    nodes.push_back(node);
    if (entry.size() == 3) {
      const std::size_t left = self(self, depth + 1);
      const std::size_t right = self(self, depth + 1);
      nodes[index].left = left;
      nodes[index].right = right;
    }
    return index;
  };
  parse(parse, 0);
  if (cursor != j.size()) throw DataError("trailing nodes after tree end in model file");
  return IsolationTree(std::move(nodes));
}

json atom_json(const Atom& atom) {
  json channels = json::array();
  for (const auto& p : atom.params) channels.push_back(to_json(p));
  return channels;
}

std::vector<AtomParams> atom_params_from(const json& j) {
  std::vector<AtomParams> params;
  for (const auto& c : j) params.push_back(atom_from_json(c));
  return params;
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

json to_json(const InnerProductSpec& spec) {
  json j{{"kind", kind_name(spec.kind)}};
  if (spec.kind == InnerProductKind::combined) j["alpha"] = spec.alpha;
  return j;
}

InnerProductSpec inner_product_from_json(const json& j) {
  return as_config_error([&] {
    reject_unknown_keys(j, {"kind", "alpha"}, "inner product");
    const auto kind = j.at("kind").get<std::string>();
    InnerProductSpec spec;
    if (kind == "l2") {
      spec = InnerProductSpec::l2();
    } else if (kind == "deriv") {
      spec = InnerProductSpec::deriv();
    } else if (kind == "combined") {
      spec = InnerProductSpec::combined(j.value("alpha", 0.5));
    } else {
      throw ConfigError("unknown inner product kind '" + kind + "'");
    }
    if (kind != "combined" && j.contains("alpha")) throw ConfigError("'alpha' only applies to the combined product");
    return spec;
  });
}

std::vector<InnerProductSpec> inner_products_from_json(const json& j) {
  std::vector<InnerProductSpec> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(inner_product_from_json(e));
    if (out.empty()) throw ConfigError("inner product list is empty");
  } else {
    out.push_back(inner_product_from_json(j));
  }
  return out;
}

json to_json(const DictionarySpec& spec) {
  json j{{"dict", to_string(spec.kind)}};
  if (spec.size) j["size"] = *spec.size;
  switch (spec.kind) {
    case DictionaryKind::cosine:
    case DictionaryKind::sinus_cosine_2d:
      j["a"] = interval_json(spec.amplitude);
      j["omega"] = interval_json(spec.frequency);
      break;
    case DictionaryKind::mexican_hat:
      j["theta"] = interval_json(spec.center);
      j["sigma"] = interval_json(spec.scale);
      break;
    case DictionaryKind::gaussian_wavelet:
      j["sigma2"] = interval_json(spec.variance);
      j["theta"] = interval_json(spec.shift);
      break;
    case DictionaryKind::dyadic_indicator:
    case DictionaryKind::dyadic_indicator_deriv:
      if (spec.levels) j["J"] = *spec.levels;
      break;
    case DictionaryKind::mixture: {
      json comps = json::array();
      for (const auto& c : spec.components) {
        json cj{{"weight", c.weight}};
        if (c.atom) cj["atom"] = to_json(*c.atom);
        if (c.family) cj["family"] = to_json(*c.family);
        comps.push_back(cj);
      }
      j["components"] = comps;
      break;
    }
    default:
      break;
  }
  return j;
}

DictionarySpec dictionary_from_json(const json& j) {
  return as_config_error([&] {
    if (!j.is_object()) throw ConfigError("dictionary must be a JSON object");
    DictionarySpec spec = DictionarySpec::of(dictionary_kind_from_string(j.at("dict").get<std::string>()));
    switch (spec.kind) {
      case DictionaryKind::cosine:
      case DictionaryKind::sinus_cosine_2d:
        reject_unknown_keys(j, {"dict", "size", "a", "omega"}, "dictionary");
        if (j.contains("a")) spec.amplitude = interval_from(j["a"], "a");
        if (j.contains("omega")) spec.frequency = interval_from(j["omega"], "omega");
        break;
      case DictionaryKind::mexican_hat:
        reject_unknown_keys(j, {"dict", "size", "theta", "sigma"}, "dictionary");
        if (j.contains("theta")) spec.center = interval_from(j["theta"], "theta");
        if (j.contains("sigma")) spec.scale = interval_from(j["sigma"], "sigma");
        break;
      case DictionaryKind::gaussian_wavelet:
        reject_unknown_keys(j, {"dict", "size", "sigma2", "theta"}, "dictionary");
        if (j.contains("sigma2")) spec.variance = interval_from(j["sigma2"], "sigma2");
        if (j.contains("theta")) spec.shift = interval_from(j["theta"], "theta");
        break;
      case DictionaryKind::dyadic_indicator:
      case DictionaryKind::dyadic_indicator_deriv:
        reject_unknown_keys(j, {"dict", "size", "J"}, "dictionary");
        if (j.contains("J")) spec.levels = j["J"].get<int>();
        break;
      case DictionaryKind::mixture:
        reject_unknown_keys(j, {"dict", "size", "components"}, "dictionary");
        for (const auto& cj : j.at("components")) {
          reject_unknown_keys(cj, {"weight", "atom", "family"}, "mixture component");
          MixtureComponent c;
          c.weight = cj.at("weight").get<double>();
          if (cj.contains("atom")) c.atom = atom_from_json(cj["atom"]);
          if (cj.contains("family")) c.family = std::make_shared<const DictionarySpec>(dictionary_from_json(cj["family"]));
          spec.components.push_back(std::move(c));
        }
        break;
      default:
        reject_unknown_keys(j, {"dict", "size"}, "dictionary");
        break;
    }
    if (j.contains("size")) spec.size = j["size"].get<std::size_t>();
    spec.validate();
    return spec;
  });
}

json to_json(const AtomParams& params) {
  return std::visit(
      Overloaded{
          [](const CosineAtom& a) { return json{{"type", "cosine"}, {"a", a.amplitude}, {"omega", a.frequency}, {"sine", a.sine}}; },
          [](const MexicanHatAtom& a) { return json{{"type", "mexican_hat"}, {"theta", a.center}, {"sigma", a.scale}}; },
          [](const GaussianWaveletAtom& a) {
            return json{{"type", "gaussian_wavelet"}, {"sigma2", a.variance}, {"theta", a.shift}};
          },
          [](const IndicatorAtom& a) { return json{{"type", "indicator"}, {"lo", a.lo}, {"hi", a.hi}, {"slope", a.slope}}; },
          [](const BrownianAtom& a) { return json{{"type", "brownian"}, {"seed", a.seed}, {"bridge", a.bridge}}; },
          [](const SelfAtom& a) {
            json j{{"type", "self"}, {"row", a.row}};
            if (a.window) j["window"] = interval_json(*a.window);
            return j;
          },
      },
      params);
}

AtomParams atom_from_json(const json& j) {
  return as_config_error([&]() -> AtomParams {
    const auto type = j.at("type").get<std::string>();
    if (type == "cosine") {
      reject_unknown_keys(j, {"type", "a", "omega", "sine"}, "atom");
      return CosineAtom{j.at("a").get<double>(), j.at("omega").get<double>(), j.value("sine", false)};
    }
    if (type == "mexican_hat") {
      reject_unknown_keys(j, {"type", "theta", "sigma"}, "atom");
      return MexicanHatAtom{j.at("theta").get<double>(), j.at("sigma").get<double>()};
    }
    if (type == "gaussian_wavelet") {
      reject_unknown_keys(j, {"type", "sigma2", "theta"}, "atom");
      return GaussianWaveletAtom{j.at("sigma2").get<double>(), j.at("theta").get<double>()};
    }
    if (type == "indicator") {
      reject_unknown_keys(j, {"type", "lo", "hi", "slope"}, "atom");
      return IndicatorAtom{j.at("lo").get<double>(), j.at("hi").get<double>(), j.value("slope", false)};
    }
    if (type == "brownian") {
      reject_unknown_keys(j, {"type", "seed", "bridge"}, "atom");
      return BrownianAtom{j.at("seed").get<std::uint64_t>(), j.value("bridge", false)};
    }
    if (type == "self") {
      reject_unknown_keys(j, {"type", "row", "window"}, "atom");
      SelfAtom a{j.at("row").get<std::size_t>(), std::nullopt};
      if (j.contains("window")) a.window = interval_from(j["window"], "window");
      return a;
    }
    throw ConfigError("unknown atom type '" + type + "'");
  });
}

json forest_to_json(const FIForest& forest) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["mode"] = "fif";
  j["config"] = forest_config_json(forest.config());
  j["grid"] = std::vector<double>(forest.grid().points().begin(), forest.grid().points().end());
  j["channels"] = forest.channels();
  j["training_size"] = forest.training_size();
  j["c_psi"] = forest.c_psi();
  j["decisions"] = decisions_json();

  if (forest.shared_atoms()) {
    json atoms = json::array();
    for (const auto& a : *forest.shared_atoms()) atoms.push_back(atom_json(a));
    j["dictionary_atoms"] = atoms;
  }

  std::set<std::size_t> referenced;
  json trees = json::array();
  for (const FITree& tree : forest.trees()) {
    json t;
    t["sample_rows"] = std::vector<std::size_t>(tree.sample_rows().begin(), tree.sample_rows().end());
    t["nodes"] = nodes_json(tree.structure());
    if (!forest.shared_atoms()) {
      json atoms = json::array();
      for (const auto& a : tree.atoms()) {
        atoms.push_back(atom_json(a));
        for (const auto& p : a.params) {
          if (const auto* s = std::get_if<SelfAtom>(&p)) referenced.insert(s->row);
        }
      }
      t["atoms"] = atoms;
    }
    trees.push_back(t);
  }
  j["trees"] = trees;

  if (forest.reference_rows()) {
    json rows = json::object();
    for (std::size_t r : referenced) {
      json channels = json::array();
      for (const Curve& c : (*forest.reference_rows())[r]) {
        channels.push_back(std::vector<double>(c.values().begin(), c.values().end()));
      }
      rows[std::to_string(r)] = channels;
    }
    j["reference_rows"] = rows;
  }
  return j;
}

FIForest forest_from_json(const json& j) {
  return as_data_error([&] {
    if (j.at("format_version").get<int>() != kModelFormatVersion) throw DataError("unsupported model format version");
    if (j.at("mode").get<std::string>() != "fif") throw DataError("model is not a functional isolation forest");
    reject_unknown_keys(j, {"format_version", "mode", "config", "grid", "channels", "training_size", "c_psi",
                            "decisions", "dictionary_atoms", "trees", "reference_rows"},
                        "model");
    ForestConfig config = forest_config_from(j.at("config"));
    TimeGrid grid(j.at("grid").get<std::vector<double>>());
    const auto channels = j.at("channels").get<std::size_t>();
    const auto training_size = j.at("training_size").get<std::size_t>();

    std::shared_ptr<const std::vector<Observation>> reference;
    if (j.contains("reference_rows")) {
      std::vector<Observation> rows(training_size);
      for (const auto& [key, value] : j["reference_rows"].items()) {
        const std::size_t r = std::stoul(key);
        if (r >= training_size) throw DataError("reference row out of range");
        Observation obs;
        for (const auto& c : value) obs.emplace_back(c.get<std::vector<double>>());
        rows[r] = std::move(obs);
      }
      reference = std::make_shared<const std::vector<Observation>>(std::move(rows));
    }
    const SamplingContext context{&grid, channels, reference.get(), {}};

    auto load_atoms = [&](const json& list) {
      AtomTable table;
      table.reserve(list.size());
      for (const auto& a : list) table.push_back(make_atom(atom_params_from(a), context));
      return std::make_shared<const AtomTable>(std::move(table));
    };

    std::shared_ptr<const AtomTable> shared;
    if (j.contains("dictionary_atoms")) shared = load_atoms(j["dictionary_atoms"]);

    std::vector<FITree> trees;
    for (const auto& t : j.at("trees")) {
      auto atoms = shared ? shared : load_atoms(t.at("atoms"));
      trees.emplace_back(nodes_from(t.at("nodes")), std::move(atoms), t.at("sample_rows").get<std::vector<std::size_t>>());
    }
    if (trees.size() != config.n_trees) throw DataError("model tree count does not match its config");
    return FIForest(std::move(config), std::move(grid), channels, training_size, std::move(trees), std::move(shared),
                    std::move(reference));
  });
}

json baseline_to_json(const IsolationForest& forest) {
  const auto& c = forest.config();
  json j;
  j["format_version"] = kModelFormatVersion;
  j["mode"] = c.mode == SplitMode::axis ? "if_axis" : "if_extended";
  j["config"] = json{{"n_trees", c.n_trees},
                     {"psi", *c.psi},
                     {"height_limit", *c.height_limit},
                     {"min_leaf_size", c.min_leaf_size},
                     {"seed", c.seed}};
  j["dims"] = forest.dims();
  j["c_psi"] = forest.c_psi();
  j["decisions"] = decisions_json();
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json t{{"nodes", nodes_json(tree.structure)}};
    if (c.mode == SplitMode::extended) t["directions"] = tree.directions;
    trees.push_back(t);
  }
  j["trees"] = trees;
  return j;
}

IsolationForest baseline_from_json(const json& j) {
  return as_data_error([&] {
    if (j.at("format_version").get<int>() != kModelFormatVersion) throw DataError("unsupported model format version");
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "if_axis" && mode != "if_extended") throw DataError("model is not an isolation forest baseline");
    // grid and channels are added by tools that fit baselines on curve data.
    reject_unknown_keys(j, {"format_version", "mode", "config", "dims", "c_psi", "decisions", "trees", "grid", "channels"},
                        "model");
    const json& cj = j.at("config");
    IsolationForestConfig c;
    c.mode = mode == "if_axis" ? SplitMode::axis : SplitMode::extended;
    c.n_trees = cj.at("n_trees").get<std::size_t>();
    c.psi = cj.at("psi").get<std::size_t>();
    c.height_limit = cj.at("height_limit").get<std::size_t>();
    c.min_leaf_size = cj.at("min_leaf_size").get<std::size_t>();
    c.seed = cj.at("seed").get<std::uint64_t>();
    std::vector<VectorTree> trees;
    for (const auto& t : j.at("trees")) {
      VectorTree tree{nodes_from(t.at("nodes")), {}};
      if (t.contains("directions")) tree.directions = t["directions"].get<std::vector<std::vector<double>>>();
      trees.push_back(std::move(tree));
    }
    return IsolationForest(std::move(c), j.at("dims").get<std::size_t>(), std::move(trees));
  });
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace fif
