#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "fif/curves.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("fif_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline std::vector<double> sample(const fif::TimeGrid& grid, double (*f)(double)) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return v;
}

inline std::vector<double> random_values(std::size_t p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(p);
  for (auto& x : v) x = normal(rng);
  return v;
}

/// Strictly increasing grid in [0, 1] with random spacing.
inline fif::TimeGrid random_grid(std::size_t p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(0.1, 1.0);
  std::vector<double> t(p, 0.0);
  for (std::size_t i = 1; i < p; ++i) t[i] = t[i - 1] + gap(rng);
  const double end = t.back();
  for (auto& x : t) x /= end;
  return fif::TimeGrid(std::move(t));
}

}  // namespace testing
