#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fif/curves.hpp"
#include "fif/inner_products.hpp"
#include "fif/random.hpp"

namespace fif {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Atom parameterizations. Each one evaluates deterministically on a grid, so a
// stored parameter set reproduces its atom exactly.

/// a cos(2 pi w t), or a sin(2 pi w t) when `sine` is set.
struct CosineAtom {
  double amplitude = 1.0;
  double frequency = 0.0;
  bool sine = false;
  friend bool operator==(const CosineAtom&, const CosineAtom&) = default;
};

/// Mexican hat wavelet centred at `center` with width `scale`, evaluated at t.
struct MexicanHatAtom {
  double center = 0.0;
  double scale = 0.1;
  friend bool operator==(const MexicanHatAtom&, const MexicanHatAtom&) = default;
};

/// Negative second derivative of a Gaussian with the given variance and shift,
/// evaluated on s = 10 t - 5 so shifts in [-4, 4] fall inside the observed domain.
struct GaussianWaveletAtom {
  double variance = 1.0;
  double shift = 0.0;
  friend bool operator==(const GaussianWaveletAtom&, const GaussianWaveletAtom&) = default;
};

/// 1(t in [lo, hi]); multiplied by t when `slope` is set.
struct IndicatorAtom {
  double lo = 0.0;
  double hi = 1.0;
  bool slope = false;
  friend bool operator==(const IndicatorAtom&, const IndicatorAtom&) = default;
};

/// Brownian path (or bridge) regenerated from its own seed.
struct BrownianAtom {
  std::uint64_t seed = 0;
  bool bridge = false;
  friend bool operator==(const BrownianAtom&, const BrownianAtom&) = default;
};

/// A training observation, optionally restricted to a window.
struct SelfAtom {
  std::size_t row = 0;
  std::optional<Interval> window;
  friend bool operator==(const SelfAtom&, const SelfAtom&) = default;
};

using AtomParams = std::variant<CosineAtom, MexicanHatAtom, GaussianWaveletAtom, IndicatorAtom, BrownianAtom, SelfAtom>;

/// A projection direction: one parameter set and one prepared curve per channel.
struct Atom {
  std::vector<AtomParams> params;
  PreparedObservation channels;
};

enum class DictionaryKind {
  self_data,
  local_self_data,
  brownian,
  brownian_bridge,
  cosine,
  mexican_hat,
  gaussian_wavelet,
  dyadic_indicator,
  uniform_indicator,
  dyadic_indicator_deriv,
  uniform_indicator_deriv,
  sinus_cosine_2d,
  mixture,
};

struct DictionarySpec;

/// One component of a finite mixture law: either a fixed atom (a Dirac) or a family.
struct MixtureComponent {
  double weight = 0.0;
  std::optional<AtomParams> atom;
  std::shared_ptr<const DictionarySpec> family;
};

/// A dictionary together with its sampling law. Parameters are drawn uniformly
/// over the listed ranges unless a mixture says otherwise.
struct DictionarySpec {
  DictionaryKind kind = DictionaryKind::cosine;
  Interval amplitude{0.0, 1.0};     ///< cosine, sinus-cosine
  Interval frequency{0.0, 10.0};    ///< cosine, sinus-cosine
  Interval center{-0.8, 0.8};       ///< mexican hat
  Interval scale{0.04, 0.2};        ///< mexican hat
  Interval variance{0.2, 1.0};      ///< gaussian wavelet
  Interval shift{-4.0, 4.0};        ///< gaussian wavelet
  std::optional<int> levels;        ///< dyadic J; defaults to ceil(log2 p)
  std::optional<std::size_t> size;  ///< materialize this many atoms once per forest
  std::vector<MixtureComponent> components;

  static DictionarySpec of(DictionaryKind kind);
  static DictionarySpec dyadic(int levels, bool slope = false);

  void validate() const;
  /// Enumerable families: dyadic variants and self-data.
  bool is_finite() const;
  /// Families drawing from training observations.
  bool is_data_bound() const;
  /// Dyadic levels for a grid of p points.
  int resolved_levels(std::size_t p) const;
};

std::string to_string(DictionaryKind kind);
DictionaryKind dictionary_kind_from_string(const std::string& name);

/// What sampling needs besides the spec: the grid, the channel count and, for
/// self-data families, the observations and the pool of eligible rows.
struct SamplingContext {
  const TimeGrid* grid = nullptr;
  std::size_t channels = 1;
  const std::vector<Observation>* data = nullptr;
  std::span<const std::size_t> pool;
};

/// Values of one atom channel on the grid.
std::vector<double> evaluate_atom(const AtomParams& params, const TimeGrid& grid, std::size_t channel,
                                  const std::vector<Observation>* data = nullptr);

/// Evaluates and prepares every channel.
Atom make_atom(std::vector<AtomParams> params, const SamplingContext& context);

/// Draws one atom according to the dictionary's law.
Atom sample_atom(const DictionarySpec& spec, const SamplingContext& context, Rng& rng);

/// Finite version of a dictionary: the full enumeration for dyadic and self-data
/// families (count is ignored), otherwise `count` i.i.d. draws.
std::vector<Atom> materialize(const DictionarySpec& spec, const SamplingContext& context, std::size_t count,
                              Rng& rng);

/// Two-channel atom, each channel independently a sin or cos with a ~ U[0,1], w ~ U[0,10].
Atom sinuscosine_atom_2d(const TimeGrid& grid, Rng& rng);

/// Indicators of [k / 2^j, (k + 1) / 2^j] for j = 1..levels, k = 0..2^j - 1.
std::vector<AtomParams> dyadic_atoms(int levels, bool slope);

/// Support of indicator-type atoms.
std::optional<Interval> support(const AtomParams& params);

std::string describe(const AtomParams& params);

}  // namespace fif
