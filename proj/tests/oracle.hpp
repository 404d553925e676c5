#pragma once

// Straight-line reimplementation of tree growth and scoring, written without the
// library's tree engine, inner products or forest code. It consumes random numbers
// in the same order as the library, so for equal seeds both must agree.
// Atom drawing itself is delegated to the dictionary module.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "fif/curves.hpp"
#include "fif/dictionaries.hpp"
#include "fif/inner_products.hpp"

namespace oracle {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline double bst_path(std::size_t m) {
  if (m <= 1) return 0.0;
  if (m == 2) return 1.0;
  const double k = static_cast<double>(m);
  double harmonic = std::log(k - 1.0) + 0.5772156649;
  return 2.0 * harmonic - 2.0 * (k - 1.0) / k;
}

using Channels = std::vector<std::vector<double>>;

inline double integrate(const std::vector<double>& f, const std::vector<double>& g, const std::vector<double>& t) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += (t[i + 1] - t[i]) * (f[i] * g[i] + f[i + 1] * g[i + 1]) / 2.0;
  return s;
}

inline std::vector<double> slope(const std::vector<double>& f, const std::vector<double>& t) {
  std::vector<double> d(f.size());
  for (std::size_t i = 0; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - f[i]) / (t[i + 1] - t[i]);
  d.back() = d[d.size() - 2];
  return d;
}

inline double cosine(const std::vector<double>& f, const std::vector<double>& g, const std::vector<double>& t) {
  const double norms = std::sqrt(integrate(f, f, t)) * std::sqrt(integrate(g, g, t));
  return norms < 1e-12 ? 0.0 : integrate(f, g, t) / norms;
}

inline double product(const Channels& x, const Channels& a, const std::vector<double>& t,
                      const std::vector<fif::InnerProductSpec>& specs) {
  double total = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const auto& spec = specs[c];
    switch (spec.kind) {
      case fif::InnerProductKind::l2:
        total += integrate(x[c], a[c], t);
        break;
      case fif::InnerProductKind::deriv:
        total += integrate(slope(x[c], t), slope(a[c], t), t);
        break;
      case fif::InnerProductKind::combined:
        total += spec.alpha * cosine(x[c], a[c], t) + (1.0 - spec.alpha) * cosine(slope(x[c], t), slope(a[c], t), t);
        break;
    }
  }
  return total;
}

inline Channels channels_of(const fif::Observation& x) {
  Channels out;
  for (const auto& c : x) out.emplace_back(c.values().begin(), c.values().end());
  return out;
}

struct Settings {
  std::size_t n_trees = 1;
  std::size_t psi = 0;        ///< 0: min(256, n)
  std::size_t height = 0;     ///< 0: ceil(log2 psi), at least 1
  std::size_t min_leaf = 1;
  fif::DictionarySpec dictionary;
  std::vector<fif::InnerProductSpec> specs;
  std::uint64_t seed = 0;
};

class Forest {
 public:
  Forest(const fif::FunctionalDataset& data, Settings s) : data_(data), s_(std::move(s)) {
    const std::size_t n = data.size();
    if (s_.psi == 0) s_.psi = n < 256 ? n : 256;
    if (s_.height == 0) s_.height = s_.psi <= 2 ? 1 : static_cast<std::size_t>(std::ceil(std::log2(s_.psi)));
    t_.assign(data.grid().points().begin(), data.grid().points().end());
    for (std::size_t i = 0; i < n; ++i) rows_.push_back(channels_of(data[i]));

    const auto& d = s_.dictionary;
    const bool dyadic =
        d.kind == fif::DictionaryKind::dyadic_indicator || d.kind == fif::DictionaryKind::dyadic_indicator_deriv;
    if (dyadic || (d.size && !d.is_data_bound())) {
      auto rng = stream(s_.seed, ~std::uint64_t{0});
      const fif::SamplingContext ctx{&data.grid(), data.channels(), nullptr, {}};
      for (const auto& atom : fif::materialize(d, ctx, d.size.value_or(1), rng)) shared_.push_back(values(atom));
      has_shared_ = true;
    }

    for (std::size_t i = 0; i < s_.n_trees; ++i) {
      auto rng = stream(s_.seed, i);
      std::vector<std::size_t> order(n);
      for (std::size_t k = 0; k < n; ++k) order[k] = k;
      for (std::size_t k = 0; k < s_.psi; ++k) {
        std::size_t j = std::uniform_int_distribution<std::size_t>(k, n - 1)(rng);
        std::swap(order[k], order[j]);
      }
      std::vector<std::size_t> sample(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s_.psi));
      trees_.push_back(grow(sample, rng));
    }
  }

  double path(const fif::Observation& x) const {
    const Channels q = channels_of(x);
    double total = 0.0;
    for (const auto& tree : trees_) {
      const Node* at = tree.get();
      while (at->left) at = product(q, at->atom, t_, s_.specs) <= at->split ? at->left.get() : at->right.get();
      total += static_cast<double>(at->depth) + bst_path(at->size);
    }
    return total / static_cast<double>(trees_.size());
  }

  double score(const fif::Observation& x) const {
    const double c = bst_path(s_.psi);
    if (c == 0.0) return 1.0;
    return std::pow(2.0, -path(x) / c);
  }

  std::size_t internal_nodes() const {
    std::size_t count = 0;
    for (const auto& t : trees_) count += internal(t.get());
    return count;
  }

 private:
  struct Node {
    std::size_t size = 0;
    std::size_t depth = 0;
    Channels atom;
    double split = 0.0;
    std::unique_ptr<Node> left, right;
  };

  static Channels values(const fif::Atom& atom) {
    Channels out;
    for (const auto& c : atom.channels) out.push_back(c.values);
    return out;
  }

  static std::size_t internal(const Node* n) { return n->left ? 1 + internal(n->left.get()) + internal(n->right.get()) : 0; }

  std::unique_ptr<Node> grow(const std::vector<std::size_t>& sample, std::mt19937_64& rng) const {
    // Self-data trees choose among their own sample curves.
    std::vector<Channels> own;
    if (s_.dictionary.kind == fif::DictionaryKind::self_data) {
      for (std::size_t r : sample) own.push_back(rows_[r]);
    }
    auto draw = [&]() -> Channels {
      if (has_shared_) return shared_[std::uniform_int_distribution<std::size_t>(0, shared_.size() - 1)(rng)];
      if (!own.empty()) return own[std::uniform_int_distribution<std::size_t>(0, own.size() - 1)(rng)];
      const fif::SamplingContext ctx{&data_.grid(), data_.channels(), &data_.observations(), sample};
      return values(fif::sample_atom(s_.dictionary, ctx, rng));
    };
    return split(sample, 0, draw, rng);
  }

  template <class Draw>
  std::unique_ptr<Node> split(const std::vector<std::size_t>& members, std::size_t depth, Draw& draw,
                              std::mt19937_64& rng) const {
    auto node = std::make_unique<Node>();
    node->size = members.size();
    node->depth = depth;
    if (members.size() <= s_.min_leaf || depth >= s_.height) return node;

    Channels atom = draw();
    std::vector<double> p;
    for (std::size_t r : members) p.push_back(product(rows_[r], atom, t_, s_.specs));
    double lo = p[0], hi = p[0];
    for (double v : p) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-12) return node;

    for (int attempt = 0; attempt < 8; ++attempt) {
      const double kappa = std::uniform_real_distribution<double>(lo, hi)(rng);
      std::vector<std::size_t> below, above;
      for (std::size_t i = 0; i < members.size(); ++i) (p[i] <= kappa ? below : above).push_back(members[i]);
      if (below.empty() || above.empty()) continue;
      node->atom = std::move(atom);
      node->split = kappa;
      node->left = split(below, depth + 1, draw, rng);
      node->right = split(above, depth + 1, draw, rng);
      return node;
    }
    return node;
  }

  const fif::FunctionalDataset& data_;
  Settings s_;
  std::vector<double> t_;
  std::vector<Channels> rows_;
  std::vector<Channels> shared_;
  bool has_shared_ = false;
  std::vector<std::unique_ptr<Node>> trees_;
};

struct Problem {
  fif::FunctionalDataset data;
  Settings settings;
};

/// Random tiny problem: n <= 8 curves on a short irregular grid, any dictionary and
/// inner product, sometimes with duplicated or constant curves.
inline Problem random_problem(std::mt19937_64& rng) {
  using fif::DictionaryKind;
  auto pick = [&](std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng); };
  const std::vector<DictionaryKind> kinds{
      DictionaryKind::self_data,        DictionaryKind::local_self_data,        DictionaryKind::brownian,
      DictionaryKind::brownian_bridge,  DictionaryKind::cosine,                 DictionaryKind::mexican_hat,
      DictionaryKind::gaussian_wavelet, DictionaryKind::dyadic_indicator,       DictionaryKind::uniform_indicator,
      DictionaryKind::dyadic_indicator_deriv, DictionaryKind::uniform_indicator_deriv,
      DictionaryKind::sinus_cosine_2d,  DictionaryKind::mixture,
  };
  const DictionaryKind kind = kinds[pick(kinds.size())];
  const std::size_t channels = kind == DictionaryKind::sinus_cosine_2d ? 2 : 1 + pick(2);
  const std::size_t n = 1 + pick(8);
  // Random windows must catch a grid point within a bounded number of draws.
  const bool windowed = kind == DictionaryKind::local_self_data || kind == DictionaryKind::uniform_indicator ||
                        kind == DictionaryKind::uniform_indicator_deriv;
  const std::size_t p = (windowed ? 6 : 2) + pick(11);

  std::vector<double> t(p, 0.0);
  for (std::size_t i = 1; i < p; ++i) t[i] = t[i - 1] + std::uniform_real_distribution<double>(0.2, 1.0)(rng);
  const double end = t.back();
  for (auto& v : t) v /= end;
  fif::TimeGrid grid(t);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<fif::Observation> obs;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && pick(6) == 0) {
      obs.push_back(obs[pick(r)]);
      continue;
    }
    fif::Observation o;
    for (std::size_t c = 0; c < channels; ++c) {
      std::vector<double> v(p);
      const bool flat = pick(8) == 0;
      const double level = normal(rng);
      for (auto& x : v) x = flat ? level : normal(rng);
      o.emplace_back(std::move(v));
    }
    obs.push_back(std::move(o));
  }

  Settings s;
  s.seed = rng();
  if (kind == DictionaryKind::mixture) {
    s.dictionary = fif::DictionarySpec::of(DictionaryKind::mixture);
    s.dictionary.components.push_back(
        {0.3, std::nullopt, std::make_shared<const fif::DictionarySpec>(fif::DictionarySpec::of(DictionaryKind::cosine))});
    s.dictionary.components.push_back({0.7, fif::IndicatorAtom{0.2, 0.6, false}, nullptr});
  } else {
    s.dictionary = fif::DictionarySpec::of(kind);
  }
  if (kind == DictionaryKind::dyadic_indicator || kind == DictionaryKind::dyadic_indicator_deriv) {
    s.dictionary.levels = 1 + static_cast<int>(pick(3));
  }
  // Finite tables for continuous families now and then.
  if (!s.dictionary.is_finite() && !s.dictionary.is_data_bound() && pick(3) == 0) s.dictionary.size = 1 + pick(20);
  for (std::size_t c = 0; c < channels; ++c) {
    switch (pick(3)) {
      case 0:
        s.specs.push_back(fif::InnerProductSpec::l2());
        break;
      case 1:
        s.specs.push_back(fif::InnerProductSpec::deriv());
        break;
      default:
        s.specs.push_back(fif::InnerProductSpec::combined(std::uniform_real_distribution<double>(0, 1)(rng)));
        break;
    }
  }
  if (pick(4) == 0) s.height = 1 + pick(4);
  if (pick(5) == 0) s.min_leaf = 1 + pick(3);
  return Problem{fif::FunctionalDataset(grid, std::move(obs)), std::move(s)};
}

}  // namespace oracle
