#include "fif/inner_products.hpp"

#include <cmath>
#include <string>

#include "fif/error.hpp"

namespace fif {

namespace {

// w_i (f_i g_i) keeps the sum exactly symmetric in f and g.
double weighted_dot(std::span<const double> f, std::span<const double> g, std::span<const double> w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * (f[i] * g[i]);
  return sum;
}

double cosine_term(double dot, double norm_a, double norm_b) {
  const double scale = norm_a * norm_b;
  return scale < kZeroNormThreshold ? 0.0 : dot / scale;
}

void check_lengths(std::size_t a, std::size_t b, const TimeGrid& grid) {
  if (a != grid.size() || b != grid.size()) {
    throw DataError("grid mismatch: curves of length " + std::to_string(a) + " and " + std::to_string(b) +
                    " on a grid of " + std::to_string(grid.size()) + " points");
  }
}

}  // namespace

InnerProductSpec InnerProductSpec::combined(double alpha) {
  InnerProductSpec spec{InnerProductKind::combined, alpha};
  spec.validate();
  return spec;
}

void InnerProductSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("inner product alpha must lie in [0, 1]");
}

double l2_inner(std::span<const double> f, std::span<const double> g, const TimeGrid& grid) {
  check_lengths(f.size(), g.size(), grid);
  return weighted_dot(f, g, grid.weights());
}

double l2_inner(const Curve& f, const Curve& g, const TimeGrid& grid) {
  return l2_inner(f.values(), g.values(), grid);
}

double deriv_inner(const Curve& f, const Curve& g, const TimeGrid& grid) {
  check_lengths(f.size(), g.size(), grid);
  return l2_inner(finite_difference(f.values(), grid), finite_difference(g.values(), grid), grid);
}

double combined_inner(const Curve& f, const Curve& g, const TimeGrid& grid, double alpha) {
  check_lengths(f.size(), g.size(), grid);
  return project(PreparedCurve({f.values().begin(), f.values().end()}, grid),
                 PreparedCurve({g.values().begin(), g.values().end()}, grid), grid.weights(),
                 InnerProductSpec::combined(alpha));
}

double inner(const Curve& f, const Curve& g, const TimeGrid& grid, const InnerProductSpec& spec) {
  switch (spec.kind) {
    case InnerProductKind::l2:
      return l2_inner(f, g, grid);
    case InnerProductKind::deriv:
      return deriv_inner(f, g, grid);
    case InnerProductKind::combined:
      return combined_inner(f, g, grid, spec.alpha);
  }
  return 0.0;
}

double mv_inner(const Observation& f, const Observation& g, const TimeGrid& grid,
                std::span<const InnerProductSpec> specs) {
  if (f.size() != specs.size() || g.size() != specs.size()) {
    throw DataError("channel mismatch: " + std::to_string(f.size()) + " and " + std::to_string(g.size()) +
                    " channels with " + std::to_string(specs.size()) + " inner product specs");
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < specs.size(); ++c) sum += inner(f[c], g[c], grid, specs[c]);
  return sum;
}

PreparedCurve::PreparedCurve(std::vector<double> v, const TimeGrid& grid)
    : values(std::move(v)), slope(finite_difference(values, grid)) {
  norm = std::sqrt(weighted_dot(values, values, grid.weights()));
  slope_norm = std::sqrt(weighted_dot(slope, slope, grid.weights()));
}

PreparedObservation prepare(const Observation& x, const TimeGrid& grid) {
  PreparedObservation out;
  out.reserve(x.size());
  for (const Curve& c : x) {
    check_lengths(c.size(), c.size(), grid);
    out.emplace_back(std::vector<double>(c.values().begin(), c.values().end()), grid);
  }
  return out;
}

double project(const PreparedCurve& x, const PreparedCurve& atom, std::span<const double> weights,
               const InnerProductSpec& spec) {
  switch (spec.kind) {
    case InnerProductKind::l2:
      return weighted_dot(x.values, atom.values, weights);
    case InnerProductKind::deriv:
      return weighted_dot(x.slope, atom.slope, weights);
    case InnerProductKind::combined: {
      double result = 0.0;
      if (spec.alpha > 0.0) {
        result += spec.alpha * cosine_term(weighted_dot(x.values, atom.values, weights), x.norm, atom.norm);
      }
      if (spec.alpha < 1.0) {
        result += (1.0 - spec.alpha) *
                  cosine_term(weighted_dot(x.slope, atom.slope, weights), x.slope_norm, atom.slope_norm);
      }
      return result;
    }
  }
  return 0.0;
}

double project(const PreparedObservation& x, const PreparedObservation& atom, std::span<const double> weights,
               std::span<const InnerProductSpec> specs) {
  double sum = 0.0;
  for (std::size_t c = 0; c < specs.size(); ++c) sum += project(x[c], atom[c], weights, specs[c]);
  return sum;
}

}  // namespace fif
