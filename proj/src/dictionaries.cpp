#include "fif/dictionaries.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "fif/error.hpp"

namespace fif {

namespace {

constexpr int kMaxWindowAttempts = 100;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};

struct KindName {
  DictionaryKind kind;
  const char* name;
};

constexpr std::array<KindName, 13> kKindNames{{
    {DictionaryKind::self_data, "self"},
    {DictionaryKind::local_self_data, "local_self"},
    {DictionaryKind::brownian, "brownian"},
    {DictionaryKind::brownian_bridge, "bbridge"},
    {DictionaryKind::cosine, "cosine"},
    {DictionaryKind::mexican_hat, "mexican_hat"},
    {DictionaryKind::gaussian_wavelet, "gaussian_wavelet"},
    {DictionaryKind::dyadic_indicator, "dyadic"},
    {DictionaryKind::uniform_indicator, "uniform_ind"},
    {DictionaryKind::dyadic_indicator_deriv, "dyadic_deriv"},
    {DictionaryKind::uniform_indicator_deriv, "uniform_ind_deriv"},
    {DictionaryKind::sinus_cosine_2d, "sinuscosine2d"},
    {DictionaryKind::mixture, "mixture"},
}};

void check_interval(const Interval& range, const char* name) {
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || range.lo > range.hi) {
    throw ConfigError(std::string("dictionary range '") + name + "' must be a nonempty interval");
  }
}

const Observation& lookup_row(const std::vector<Observation>* data, std::size_t row) {
  if (data == nullptr || row >= data->size() || (*data)[row].empty()) {
    throw DataError("self-data atom references unavailable row " + std::to_string(row));
  }
  return (*data)[row];
}

// Uniform window [a, b] on [0, 1] containing at least one grid point.
Interval draw_window(const TimeGrid& grid, Rng& rng) {
  for (int attempt = 0; attempt < kMaxWindowAttempts; ++attempt) {
    double a = uniform(rng, 0.0, 1.0);
    double b = uniform(rng, 0.0, 1.0);
    if (a > b) std::swap(a, b);
    for (double t : grid.points()) {
      if (t >= a && t <= b) return {a, b};
    }
  }
  throw DataError("could not draw an indicator window containing a grid point");
}

std::size_t draw_index(std::size_t count, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

AtomParams draw_channel(const DictionarySpec& spec, const TimeGrid& grid, Rng& rng) {
  switch (spec.kind) {
    case DictionaryKind::cosine: {
      const double a = uniform(rng, spec.amplitude.lo, spec.amplitude.hi);
      const double w = uniform(rng, spec.frequency.lo, spec.frequency.hi);
      return CosineAtom{a, w, false};
    }
    case DictionaryKind::sinus_cosine_2d: {
      const bool sine = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
      const double a = uniform(rng, spec.amplitude.lo, spec.amplitude.hi);
      const double w = uniform(rng, spec.frequency.lo, spec.frequency.hi);
      return CosineAtom{a, w, sine};
    }
    case DictionaryKind::mexican_hat: {
      const double center = uniform(rng, spec.center.lo, spec.center.hi);
      const double scale = uniform(rng, spec.scale.lo, spec.scale.hi);
      return MexicanHatAtom{center, scale};
    }
    case DictionaryKind::gaussian_wavelet: {
      const double variance = uniform(rng, spec.variance.lo, spec.variance.hi);
      const double shift = uniform(rng, spec.shift.lo, spec.shift.hi);
      return GaussianWaveletAtom{variance, shift};
    }
    case DictionaryKind::brownian:
    case DictionaryKind::brownian_bridge:
      return BrownianAtom{rng(), spec.kind == DictionaryKind::brownian_bridge};
    case DictionaryKind::uniform_indicator:
    case DictionaryKind::uniform_indicator_deriv: {
      const Interval window = draw_window(grid, rng);
      return IndicatorAtom{window.lo, window.hi, spec.kind == DictionaryKind::uniform_indicator_deriv};
    }
    case DictionaryKind::dyadic_indicator:
    case DictionaryKind::dyadic_indicator_deriv: {
      const int levels = spec.resolved_levels(grid.size());
      // Levels 1..J hold 2^(J+1) - 2 atoms; map a uniform index onto (j, k).
      std::size_t index = draw_index((std::size_t{1} << (levels + 1)) - 2, rng);
      int level = 1;
      while (index >= (std::size_t{1} << level)) {
        index -= std::size_t{1} << level;
        ++level;
      }
      const double width = std::ldexp(1.0, -level);
      return IndicatorAtom{static_cast<double>(index) * width, static_cast<double>(index + 1) * width,
                           spec.kind == DictionaryKind::dyadic_indicator_deriv};
    }
    default:
      throw ConfigError("dictionary '" + to_string(spec.kind) + "' cannot be drawn per channel");
  }
}

}  // namespace

DictionarySpec DictionarySpec::of(DictionaryKind kind) {
  DictionarySpec spec;
  spec.kind = kind;
  return spec;
}

DictionarySpec DictionarySpec::dyadic(int levels, bool slope) {
  DictionarySpec spec;
  spec.kind = slope ? DictionaryKind::dyadic_indicator_deriv : DictionaryKind::dyadic_indicator;
  spec.levels = levels;
  return spec;
}

void DictionarySpec::validate() const {
  check_interval(amplitude, "a");
  check_interval(frequency, "omega");
  check_interval(center, "theta");
  check_interval(scale, "sigma");
  check_interval(variance, "sigma2");
  check_interval(shift, "shift");
  if (scale.lo <= 0.0) throw ConfigError("mexican hat scale must be positive");
  if (variance.lo <= 0.0) throw ConfigError("gaussian wavelet variance must be positive");
  if (levels && (*levels < 1 || *levels > 30)) throw ConfigError("dyadic level count J must lie in [1, 30]");
  if (size && *size == 0) throw ConfigError("dictionary size must be at least 1");
  if (kind == DictionaryKind::mixture) {
    if (components.empty()) throw ConfigError("mixture dictionary needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
      if (!(c.weight >= 0.0)) throw ConfigError("mixture weights must be nonnegative");
      if (c.atom.has_value() == (c.family != nullptr)) {
        throw ConfigError("mixture component must hold exactly one of a fixed atom or a family");
      }
      if (c.family) {
        if (c.family->is_data_bound()) throw ConfigError("self-data families cannot be mixed");
        c.family->validate();
      }
      if (c.atom && std::holds_alternative<SelfAtom>(*c.atom)) {
        throw ConfigError("mixture fixed atoms cannot reference training rows");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
  }
}

bool DictionarySpec::is_finite() const {
  return kind == DictionaryKind::dyadic_indicator || kind == DictionaryKind::dyadic_indicator_deriv ||
         kind == DictionaryKind::self_data;
}

bool DictionarySpec::is_data_bound() const {
  return kind == DictionaryKind::self_data || kind == DictionaryKind::local_self_data;
}

int DictionarySpec::resolved_levels(std::size_t p) const {
  if (levels) return *levels;
  int j = 1;
  while ((std::size_t{1} << j) < p) ++j;
  return j;
}

std::string to_string(DictionaryKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

DictionaryKind dictionary_kind_from_string(const std::string& name) {
  for (const auto& entry : kKindNames) {
    if (name == entry.name) return entry.kind;
  }
  throw ConfigError("unknown dictionary '" + name + "'");
}

std::vector<double> evaluate_atom(const AtomParams& params, const TimeGrid& grid, std::size_t channel,
                                  const std::vector<Observation>* data) {
  const auto t = grid.points();
  std::vector<double> v(t.size(), 0.0);
  using std::numbers::pi;
  std::visit(
      Overloaded{
          [&](const CosineAtom& a) {
            for (std::size_t i = 0; i < t.size(); ++i) {
              const double phase = 2.0 * pi * a.frequency * t[i];
              v[i] = a.amplitude * (a.sine ? std::sin(phase) : std::cos(phase));
            }
          },
          [&](const MexicanHatAtom& a) {
            const double norm = 2.0 / (std::sqrt(3.0 * a.scale) * std::pow(pi, 0.25));
            for (std::size_t i = 0; i < t.size(); ++i) {
              const double u = (t[i] - a.center) / a.scale;
              v[i] = norm * (1.0 - u * u) * std::exp(-0.5 * u * u);
            }
          },
          [&](const GaussianWaveletAtom& a) {
            const double sigma = std::sqrt(a.variance);
            const double norm = 2.0 / (std::sqrt(3.0 * sigma) * std::pow(pi, 0.25));
            for (std::size_t i = 0; i < t.size(); ++i) {
              const double u = (10.0 * t[i] - 5.0 - a.shift) / sigma;
              v[i] = norm * (1.0 - u * u) * std::exp(-0.5 * u * u);
            }
          },
          [&](const IndicatorAtom& a) {
            for (std::size_t i = 0; i < t.size(); ++i) {
              if (t[i] >= a.lo && t[i] <= a.hi) v[i] = a.slope ? t[i] : 1.0;
            }
          },
          [&](const BrownianAtom& a) {
            Rng rng(a.seed);
            for (std::size_t i = 1; i < t.size(); ++i) v[i] = v[i - 1] + std::sqrt(t[i] - t[i - 1]) * standard_normal(rng);
            if (a.bridge) {
              const double end = v.back();
              const double span = t.back() - t.front();
              for (std::size_t i = 0; i < t.size(); ++i) v[i] -= (t[i] - t.front()) / span * end;
              v.back() = 0.0;
            }
          },
          [&](const SelfAtom& a) {
            const Observation& obs = lookup_row(data, a.row);
            if (channel >= obs.size()) throw DataError("self-data atom channel out of range");
            const auto values = obs[channel].values();
            for (std::size_t i = 0; i < t.size(); ++i) {
              const bool inside = !a.window || (t[i] >= a.window->lo && t[i] <= a.window->hi);
              v[i] = inside ? values[i] : 0.0;
            }
          },
      },
      params);
  return v;
}

Atom make_atom(std::vector<AtomParams> params, const SamplingContext& context) {
  if (params.size() != context.channels) throw DataError("atom channel count does not match data");
  Atom atom;
  atom.channels.reserve(params.size());
  for (std::size_t c = 0; c < params.size(); ++c) {
    atom.channels.emplace_back(evaluate_atom(params[c], *context.grid, c, context.data), *context.grid);
  }
  atom.params = std::move(params);
  return atom;
}

Atom sample_atom(const DictionarySpec& spec, const SamplingContext& context, Rng& rng) {
  const TimeGrid& grid = *context.grid;
  switch (spec.kind) {
    case DictionaryKind::self_data:
    case DictionaryKind::local_self_data: {
      if (context.pool.empty() || context.data == nullptr) {
        throw ConfigError("self-data dictionary needs a nonempty curve pool");
      }
      SelfAtom atom{context.pool[draw_index(context.pool.size(), rng)], std::nullopt};
      if (spec.kind == DictionaryKind::local_self_data) atom.window = draw_window(grid, rng);
      return make_atom(std::vector<AtomParams>(context.channels, atom), context);
    }
    case DictionaryKind::mixture: {
      const double u = uniform(rng, 0.0, 1.0);
      double cumulative = 0.0;
      const MixtureComponent* chosen = &spec.components.back();
      for (const auto& c : spec.components) {
        cumulative += c.weight;
        if (u < cumulative) {
          chosen = &c;
          break;
        }
      }
      if (chosen->atom) return make_atom(std::vector<AtomParams>(context.channels, *chosen->atom), context);
      return sample_atom(*chosen->family, context, rng);
    }
    case DictionaryKind::sinus_cosine_2d:
      if (context.channels != 2) throw ConfigError("sinuscosine2d dictionary needs 2-channel data");
      [[fallthrough]];
    default: {
      std::vector<AtomParams> params;
      params.reserve(context.channels);
      for (std::size_t c = 0; c < context.channels; ++c) params.push_back(draw_channel(spec, grid, rng));
      return make_atom(std::move(params), context);
    }
  }
}

std::vector<Atom> materialize(const DictionarySpec& spec, const SamplingContext& context, std::size_t count,
                              Rng& rng) {
  if (count == 0) throw ConfigError("dictionary size must be at least 1");
  std::vector<Atom> atoms;
  if (spec.kind == DictionaryKind::dyadic_indicator || spec.kind == DictionaryKind::dyadic_indicator_deriv) {
    const auto all = dyadic_atoms(spec.resolved_levels(context.grid->size()),
                                  spec.kind == DictionaryKind::dyadic_indicator_deriv);
    atoms.reserve(all.size());
    for (const auto& p : all) atoms.push_back(make_atom(std::vector<AtomParams>(context.channels, p), context));
    return atoms;
  }
  if (spec.kind == DictionaryKind::self_data) {
    if (context.pool.empty() || context.data == nullptr) {
      throw ConfigError("self-data dictionary needs a nonempty curve pool");
    }
    atoms.reserve(context.pool.size());
    for (std::size_t row : context.pool) {
      atoms.push_back(make_atom(std::vector<AtomParams>(context.channels, SelfAtom{row, std::nullopt}), context));
    }
    return atoms;
  }
  atoms.reserve(count);
  for (std::size_t i = 0; i < count; ++i) atoms.push_back(sample_atom(spec, context, rng));
  return atoms;
}

Atom sinuscosine_atom_2d(const TimeGrid& grid, Rng& rng) {
  const SamplingContext context{&grid, 2, nullptr, {}};
  return sample_atom(DictionarySpec::of(DictionaryKind::sinus_cosine_2d), context, rng);
}

std::vector<AtomParams> dyadic_atoms(int levels, bool slope) {
  if (levels < 1) throw ConfigError("dyadic level count J must be at least 1");
  std::vector<AtomParams> atoms;
  for (int j = 1; j <= levels; ++j) {
    const double width = std::ldexp(1.0, -j);
    for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
      atoms.push_back(IndicatorAtom{static_cast<double>(k) * width, static_cast<double>(k + 1) * width, slope});
    }
  }
  return atoms;
}

std::optional<Interval> support(const AtomParams& params) {
  if (const auto* ind = std::get_if<IndicatorAtom>(&params)) return Interval{ind->lo, ind->hi};
  if (const auto* self = std::get_if<SelfAtom>(&params)) return self->window;
  return std::nullopt;
}

std::string describe(const AtomParams& params) {
  std::ostringstream out;
  out.precision(6);
  std::visit(Overloaded{
                 [&](const CosineAtom& a) {
                   out << (a.sine ? "sin" : "cos") << "(a=" << a.amplitude << " omega=" << a.frequency << ")";
                 },
                 [&](const MexicanHatAtom& a) { out << "mexican_hat(theta=" << a.center << " sigma=" << a.scale << ")"; },
                 [&](const GaussianWaveletAtom& a) {
                   out << "gaussian_wavelet(sigma2=" << a.variance << " theta=" << a.shift << ")";
                 },
                 [&](const IndicatorAtom& a) {
                   out << (a.slope ? "t*1[" : "1[") << a.lo << " " << a.hi << "]";
                 },
                 [&](const BrownianAtom& a) { out << (a.bridge ? "bbridge(seed=" : "brownian(seed=") << a.seed << ")"; },
                 [&](const SelfAtom& a) {
                   out << "self(row=" << a.row;
                   if (a.window) out << " window=[" << a.window->lo << " " << a.window->hi << "]";
                   out << ")";
                 },
             },
             params);
  return out.str();
}

}  // namespace fif
