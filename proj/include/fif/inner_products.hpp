#pragma once

#include <span>
#include <vector>

#include "fif/curves.hpp"

namespace fif {

enum class InnerProductKind { l2, deriv, combined };

/// Scalar product used to project a curve on an atom.
///   l2:       integral of f g
///   deriv:    integral of f' g'
///   combined: alpha cos_L2(f, g) + (1 - alpha) cos_L2(f', g')
struct InnerProductSpec {
  InnerProductKind kind = InnerProductKind::l2;
  double alpha = 1.0;

  static InnerProductSpec l2() { return {InnerProductKind::l2, 1.0}; }
  static InnerProductSpec deriv() { return {InnerProductKind::deriv, 0.0}; }
  static InnerProductSpec combined(double alpha);

  void validate() const;
  friend bool operator==(const InnerProductSpec&, const InnerProductSpec&) = default;
};

/// Normalizing products below this are treated as zero-norm; the term contributes 0.
inline constexpr double kZeroNormThreshold = 1e-12;

/// Trapezoid rule for the integral of f g over [t_1, t_p].
double l2_inner(std::span<const double> f, std::span<const double> g, const TimeGrid& grid);
double l2_inner(const Curve& f, const Curve& g, const TimeGrid& grid);
double deriv_inner(const Curve& f, const Curve& g, const TimeGrid& grid);
double combined_inner(const Curve& f, const Curve& g, const TimeGrid& grid, double alpha);
double inner(const Curve& f, const Curve& g, const TimeGrid& grid, const InnerProductSpec& spec);

/// Sum over channels of the per-channel products.
double mv_inner(const Observation& f, const Observation& g, const TimeGrid& grid,
                std::span<const InnerProductSpec> specs);

/// A curve with its slope and both norms cached, so repeated projections cost one
/// weighted dot product per term.
struct PreparedCurve {
  std::vector<double> values;
  std::vector<double> slope;
  double norm = 0.0;
  double slope_norm = 0.0;

  PreparedCurve() = default;
  PreparedCurve(std::vector<double> values, const TimeGrid& grid);
};

using PreparedObservation = std::vector<PreparedCurve>;

PreparedObservation prepare(const Observation& x, const TimeGrid& grid);

double project(const PreparedCurve& x, const PreparedCurve& atom, std::span<const double> weights,
               const InnerProductSpec& spec);
double project(const PreparedObservation& x, const PreparedObservation& atom, std::span<const double> weights,
               std::span<const InnerProductSpec> specs);

}  // namespace fif
