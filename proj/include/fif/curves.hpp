#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fif {

/// Strictly increasing sample points inside [0, 1], at least two of them.
/// Trapezoid quadrature weights are computed once at construction.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// t_i = lo + (hi - lo) * i / (p - 1).
  static TimeGrid uniform(std::size_t p, double lo = 0.0, double hi = 1.0);

  std::span<const double> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.points_ == b.points_; }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// Finite samples of one real-valued function.
class Curve {
 public:
  Curve() = default;
  explicit Curve(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Curve&, const Curve&) = default;

 private:
  std::vector<double> values_;
};

/// One observation: a curve per channel (d = 1 for ordinary functional data).
using Observation = std::vector<Curve>;

enum class Label { normal, anomaly };

/// n observations on one shared grid with d channels each. Raw integer class
/// labels are kept as read; mapping to normal/anomaly is left to the caller.
class FunctionalDataset {
 public:
  FunctionalDataset(TimeGrid grid, std::vector<Observation> observations,
                    std::optional<std::vector<int>> labels = std::nullopt);

  /// Convenience for univariate data.
  static FunctionalDataset univariate(TimeGrid grid, std::vector<Curve> curves,
                                      std::optional<std::vector<int>> labels = std::nullopt);

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return observations_.size(); }
  std::size_t channels() const { return channels_; }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  const std::vector<Observation>& observations() const { return observations_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  /// Copy of the given rows, in the given order, labels included.
  FunctionalDataset select(std::span<const std::size_t> rows) const;

  friend bool operator==(const FunctionalDataset&, const FunctionalDataset&) = default;

 private:
  TimeGrid grid_;
  std::size_t channels_ = 1;
  std::vector<Observation> observations_;
  std::optional<std::vector<int>> labels_;
};

/// Forward differences (v[i+1] - v[i]) / (t[i+1] - t[i]); the last value is repeated
/// so the result has the grid's length.
std::vector<double> finite_difference(std::span<const double> values, const TimeGrid& grid);
Curve finite_difference(const Curve& curve, const TimeGrid& grid);

/// Reads a UCR archive file: one record per line, integer class label followed by
/// p values, tab or comma separated. The grid is uniform on [0, 1].
FunctionalDataset load_ucr(const std::filesystem::path& path);

/// Reads either the native format written by save_dataset or a plain UCR file.
FunctionalDataset load_dataset(const std::filesystem::path& path);

/// Native CSV: "# grid: t_1,...,t_p" header (plus "# channels: d" when d > 1), then
/// "label,v_1,...,v_p" rows with channels concatenated. Unlabelled rows get label 0.
void save_dataset(const FunctionalDataset& data, const std::filesystem::path& path);
void write_dataset(const FunctionalDataset& data, std::ostream& out);

// Synthetic datasets. Label 0 = normal, 1 = anomaly. Default grid: uniform, p = 100.

struct Cuevas105Options {
  std::size_t points = 100;
  double jump_size = 2.0;     ///< offset added to x_0 for t >= jump_time
  double jump_time = 0.7;
};

/// 100 curves 30 (1-t)^q t^q with q equispaced in [1, 1.4], then the anomalies
/// x_0 (jump), x_1 (q = 1.6), x_2 (+ sin 2 pi t), x_3 (noise on [0.2, 0.8]), x_4 (+ sin(10 pi t) / 2).
FunctionalDataset gen_cuevas105(std::uint64_t seed, const Cuevas105Options& options = {});

/// n standard Brownian paths started at 0.
FunctionalDataset gen_brownian_dataset(std::size_t n, std::size_t p, std::uint64_t seed);

/// Four probes for the Brownian dataset: a typical path x_0, two anomalies x_1, x_2 and
/// an extreme anomaly x_3 (deterministic, expected scores increasing in that order).
std::vector<Observation> brownian_probes(const TimeGrid& grid);

/// 90 curves 30 (1-t)^q t^q, q in [1, 1.4], plus 10 copies of q = 1.2 with N(0, 0.3^2)
/// noise on [0.2, 0.8].
FunctionalDataset gen_noisy_contamination(std::uint64_t seed, std::size_t points = 100);

/// 30 curves following 30 (1-t)^q t^q on [0, 0.2] then a noisy plateau on [0.2, 0.7]
/// (q in [0.5, 0.55]), and one anomaly whose start is delayed on [0, 0.2]. Grid on [0, 0.7].
FunctionalDataset gen_isolated_anomaly(std::uint64_t seed, std::size_t points = 100);

/// Smooth-path family A sin(2 pi t + phi) + B t with random amplitude, phase and slope.
/// Stand-in for a smooth reference dataset; not calibrated for quantitative checks.
FunctionalDataset gen_smooth_dataset(std::size_t n, std::size_t p, std::uint64_t seed);

}  // namespace fif
