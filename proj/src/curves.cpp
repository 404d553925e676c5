#include "fif/curves.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fif/error.hpp"
#include "fif/random.hpp"

namespace fif {

namespace {

std::vector<double> trapezoid_weights(std::span<const double> t) {
  const std::size_t p = t.size();
  std::vector<double> w(p);
  w[0] = 0.5 * (t[1] - t[0]);
  w[p - 1] = 0.5 * (t[p - 1] - t[p - 2]);
  for (std::size_t i = 1; i + 1 < p; ++i) w[i] = 0.5 * (t[i + 1] - t[i - 1]);
  return w;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t' || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  // Trailing separators leave an empty final field.
  while (!fields.empty() && fields.back().empty()) fields.pop_back();
  return fields;
}

double parse_number(std::string_view cell, std::size_t row, std::size_t column) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("non-numeric cell at row " + std::to_string(row) + ", column " +
                    std::to_string(column) + ": '" + std::string(cell) + "'");
  }
  return value;
}

int parse_label(std::string_view cell, std::size_t row) {
  const double value = parse_number(cell, row, 1);
  if (value != std::round(value)) {
    throw DataError("non-integer class label at row " + std::to_string(row) + ": '" +
                    std::string(cell) + "'");
  }
  return static_cast<int>(value);
}

struct ParsedRows {
  std::vector<int> labels;
  std::vector<std::vector<double>> values;
};

// Reads "label,v_1,...,v_m" rows; `line_number` is the 1-based line of the first row.
ParsedRows parse_rows(std::istream& in, std::size_t line_number, std::string& line) {
  ParsedRows rows;
  std::size_t width = 0;
  do {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) {
      throw DataError("row " + std::to_string(line_number) + " has a label but no values");
    }
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw DataError("ragged row " + std::to_string(line_number) + ": expected " +
                      std::to_string(width - 1) + " values, found " + std::to_string(fields.size() - 1));
    }
    rows.labels.push_back(parse_label(fields[0], line_number));
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t c = 1; c < fields.size(); ++c) values.push_back(parse_number(fields[c], line_number, c + 1));
    rows.values.push_back(std::move(values));
  } while (++line_number, std::getline(in, line));
  return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

// Skips blank lines; returns false at end of file.
bool next_nonblank(std::istream& in, std::string& line, std::size_t& line_number) {
  while (std::getline(in, line)) {
    ++line_number;
    if (!trim(line).empty()) return true;
  }
  return false;
}

double bump(double t, double q) { return 30.0 * std::pow(1.0 - t, q) * std::pow(t, q); }

std::vector<double> equispaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DataError("time grid needs at least 2 points");
  if (points_.front() < 0.0 || points_.back() > 1.0) throw DataError("time grid must lie in [0, 1]");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DataError("time grid contains a non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1])) throw DataError("time grid must be strictly increasing");
  }
  weights_ = trapezoid_weights(points_);
}

TimeGrid TimeGrid::uniform(std::size_t p, double lo, double hi) {
  if (p < 2) throw DataError("time grid needs at least 2 points");
  std::vector<double> t(p);
  for (std::size_t i = 0; i < p; ++i) t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(p - 1);
  t.back() = hi;
  return TimeGrid(std::move(t));
}

Curve::Curve(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("curve contains a non-finite value");
  }
}

FunctionalDataset::FunctionalDataset(TimeGrid grid, std::vector<Observation> observations,
                                     std::optional<std::vector<int>> labels)
    : grid_(std::move(grid)), observations_(std::move(observations)), labels_(std::move(labels)) {
  if (observations_.empty()) throw DataError("dataset must contain at least one observation");
  channels_ = observations_.front().size();
  if (channels_ == 0) throw DataError("observations need at least one channel");
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (observations_[i].size() != channels_) {
      throw DataError("observation " + std::to_string(i) + " has " + std::to_string(observations_[i].size()) +
                      " channels, expected " + std::to_string(channels_));
    }
    for (const Curve& c : observations_[i]) {
      if (c.size() != grid_.size()) {
        throw DataError("observation " + std::to_string(i) + " has " + std::to_string(c.size()) +
                        " points, grid has " + std::to_string(grid_.size()));
      }
    }
  }
  if (labels_ && labels_->size() != observations_.size()) {
    throw DataError("label count does not match observation count");
  }
}

FunctionalDataset FunctionalDataset::univariate(TimeGrid grid, std::vector<Curve> curves,
                                                std::optional<std::vector<int>> labels) {
  std::vector<Observation> obs;
  obs.reserve(curves.size());
  for (auto& c : curves) obs.push_back(Observation{std::move(c)});
  return FunctionalDataset(std::move(grid), std::move(obs), std::move(labels));
}

FunctionalDataset FunctionalDataset::select(std::span<const std::size_t> rows) const {
  std::vector<Observation> obs;
  std::optional<std::vector<int>> labels;
  if (labels_) labels.emplace();
  for (std::size_t r : rows) {
    obs.push_back(observations_.at(r));
    if (labels_) labels->push_back((*labels_)[r]);
  }
  return FunctionalDataset(grid_, std::move(obs), std::move(labels));
}

std::vector<double> finite_difference(std::span<const double> values, const TimeGrid& grid) {
  const std::size_t p = grid.size();
  if (values.size() != p) throw DataError("curve length does not match grid");
  std::vector<double> out(p);
  for (std::size_t i = 0; i + 1 < p; ++i) out[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
  out[p - 1] = out[p - 2];
  return out;
}

Curve finite_difference(const Curve& curve, const TimeGrid& grid) {
  return Curve(finite_difference(curve.values(), grid));
}

FunctionalDataset load_ucr(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_number = 0;
  if (!next_nonblank(in, line, line_number)) throw ConfigError("input file '" + path.string() + "' is empty");
  auto rows = parse_rows(in, line_number, line);
  const std::size_t p = rows.values.front().size();
  std::vector<Curve> curves;
  curves.reserve(rows.values.size());
  for (auto& v : rows.values) curves.emplace_back(std::move(v));
  return FunctionalDataset::univariate(TimeGrid::uniform(p), std::move(curves), std::move(rows.labels));
}

FunctionalDataset load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_number = 0;
  if (!next_nonblank(in, line, line_number)) throw ConfigError("input file '" + path.string() + "' is empty");
  if (trim(line).front() != '#') return load_ucr(path);

  std::optional<std::vector<double>> grid_points;
  std::size_t channels = 1;
  while (trim(line).front() == '#') {
    const auto body = trim(std::string_view(line).substr(line.find('#') + 1));
    if (body.starts_with("grid:")) {
      std::vector<double> t;
      std::size_t column = 1;
      for (auto cell : split_fields(body.substr(5))) t.push_back(parse_number(cell, line_number, column++));
      grid_points = std::move(t);
    } else if (body.starts_with("channels:")) {
      channels = static_cast<std::size_t>(parse_number(trim(body.substr(9)), line_number, 1));
      if (channels == 0) throw DataError("channel count must be positive");
    }
    if (!next_nonblank(in, line, line_number)) throw DataError("'" + path.string() + "' has no data rows");
  }
  if (!grid_points) throw DataError("'" + path.string() + "': missing '# grid:' header");

  TimeGrid grid(std::move(*grid_points));
  auto rows = parse_rows(in, line_number, line);
  const std::size_t p = grid.size();
  std::vector<Observation> obs;
  obs.reserve(rows.values.size());
  for (std::size_t r = 0; r < rows.values.size(); ++r) {
    const auto& v = rows.values[r];
    if (v.size() != p * channels) {
      throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(v.size()) + " values, expected " +
                      std::to_string(p * channels));
    }
    Observation o;
    for (std::size_t c = 0; c < channels; ++c) {
      o.emplace_back(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(c * p),
                                         v.begin() + static_cast<std::ptrdiff_t>((c + 1) * p)));
    }
    obs.push_back(std::move(o));
  }
  return FunctionalDataset(std::move(grid), std::move(obs), std::move(rows.labels));
}

void write_dataset(const FunctionalDataset& data, std::ostream& out) {
  const auto precision = out.precision(17);
  out << "# grid: ";
  for (std::size_t i = 0; i < data.grid().size(); ++i) out << (i ? "," : "") << data.grid()[i];
  out << '\n';
  if (data.channels() > 1) out << "# channels: " << data.channels() << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << (data.labels() ? (*data.labels())[r] : 0);
    for (const Curve& c : data[r]) {
      for (double v : c.values()) out << ',' << v;
    }
    out << '\n';
  }
  out.precision(precision);
}

void save_dataset(const FunctionalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(data, out);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

FunctionalDataset gen_cuevas105(std::uint64_t seed, const Cuevas105Options& options) {
  const TimeGrid grid = TimeGrid::uniform(options.points);
  const auto t = grid.points();
  Rng rng = make_stream(seed, 0);

  std::vector<Curve> curves;
  std::vector<int> labels;
  for (double q : equispaced(1.0, 1.4, 100)) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = bump(t[i], q);
    curves.emplace_back(std::move(v));
    labels.push_back(0);
  }

  auto anomaly = [&](auto&& f) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
    curves.emplace_back(std::move(v));
    labels.push_back(1);
  };
  using std::numbers::pi;
  anomaly([&](double s) { return bump(s, 1.2) + (s >= options.jump_time ? options.jump_size : 0.0); });
  anomaly([](double s) { return bump(s, 1.6); });
  anomaly([](double s) { return bump(s, 1.2) + std::sin(2.0 * pi * s); });
  anomaly([&](double s) { return bump(s, 1.2) + (s >= 0.2 && s <= 0.8 ? 0.3 * standard_normal(rng) : 0.0); });
  anomaly([](double s) { return bump(s, 1.2) + 0.5 * std::sin(10.0 * pi * s); });

  return FunctionalDataset::univariate(grid, std::move(curves), std::move(labels));
}

FunctionalDataset gen_brownian_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n == 0) throw ConfigError("Brownian dataset needs n >= 1");
  const TimeGrid grid = TimeGrid::uniform(p);
  Rng rng = make_stream(seed, 0);
  std::vector<Curve> curves;
  curves.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> w(p, 0.0);
    for (std::size_t i = 1; i < p; ++i) w[i] = w[i - 1] + std::sqrt(grid[i] - grid[i - 1]) * standard_normal(rng);
    curves.emplace_back(std::move(w));
  }
  return FunctionalDataset::univariate(grid, std::move(curves), std::vector<int>(n, 0));
}

std::vector<Observation> brownian_probes(const TimeGrid& grid) {
  // Multiples of the pointwise standard deviation sqrt(t), plus an oscillating shape.
  const auto t = grid.points();
  auto make = [&](auto&& f) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
    return Observation{Curve(std::move(v))};
  };
  using std::numbers::pi;
  return {
      make([](double s) { return 0.25 * std::sqrt(s) * std::sin(2.0 * pi * s); }),
      make([](double s) { return 1.8 * std::sqrt(s); }),
      make([](double s) { return -2.0 * std::sqrt(s); }),
      make([](double s) { return 3.5 * std::sqrt(s); }),
  };
}

FunctionalDataset gen_noisy_contamination(std::uint64_t seed, std::size_t points) {
  const TimeGrid grid = TimeGrid::uniform(points);
  const auto t = grid.points();
  Rng rng = make_stream(seed, 0);
  std::vector<Curve> curves;
  std::vector<int> labels;
  for (double q : equispaced(1.0, 1.4, 90)) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = bump(t[i], q);
    curves.emplace_back(std::move(v));
    labels.push_back(0);
  }
  for (int k = 0; k < 10; ++k) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      v[i] = bump(t[i], 1.2) + (t[i] >= 0.2 && t[i] <= 0.8 ? 0.3 * standard_normal(rng) : 0.0);
    }
    curves.emplace_back(std::move(v));
    labels.push_back(1);
  }
  return FunctionalDataset::univariate(grid, std::move(curves), std::move(labels));
}

FunctionalDataset gen_isolated_anomaly(std::uint64_t seed, std::size_t points) {
  const TimeGrid grid = TimeGrid::uniform(points, 0.0, 0.7);
  const auto t = grid.points();
  Rng rng = make_stream(seed, 0);
  auto path = [&](double q, double delay) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] <= 0.2) {
        const double s = std::max(t[i] - delay, 0.0);
        v[i] = bump(s, q);
      } else {
        v[i] = 30.0 * std::pow(0.8, q) * std::pow(0.2, q) + 0.3 * standard_normal(rng);
      }
    }
    return Curve(std::move(v));
  };
  std::vector<Curve> curves;
  std::vector<int> labels;
  for (double q : equispaced(0.5, 0.55, 30)) {
    curves.push_back(path(q, 0.0));
    labels.push_back(0);
  }
  curves.push_back(path(0.525, 0.1));
  labels.push_back(1);
  return FunctionalDataset::univariate(grid, std::move(curves), std::move(labels));
}

FunctionalDataset gen_smooth_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n == 0) throw ConfigError("smooth dataset needs n >= 1");
  const TimeGrid grid = TimeGrid::uniform(p);
  Rng rng = make_stream(seed, 0);
  std::vector<Curve> curves;
  for (std::size_t k = 0; k < n; ++k) {
    const double amplitude = 1.0 + 0.2 * standard_normal(rng);
    const double phase = 0.1 * standard_normal(rng);
    const double slope = 0.3 * standard_normal(rng);
    std::vector<double> v(p);
    for (std::size_t i = 0; i < p; ++i) {
      v[i] = amplitude * std::sin(2.0 * std::numbers::pi * grid[i] + phase) + slope * grid[i];
    }
    curves.emplace_back(std::move(v));
  }
  return FunctionalDataset::univariate(grid, std::move(curves), std::vector<int>(n, 0));
}

}  // namespace fif
