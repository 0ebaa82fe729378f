#pragma once

#include "tss/carleman.hpp"
#include "tss/coefficients.hpp"
#include "tss/geometry.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tss {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat INI-style file: [section] headers, key = value lines, '#' comments.
/// Every lookup error carries file and line.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const;  // key = "section.name"
  std::string get_string(const std::string& key, std::optional<std::string> def = {}) const;
  double get_double(const std::string& key, std::optional<double> def = {}) const;
  int get_int(const std::string& key, std::optional<int> def = {}) const;
  std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> def = {}) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::optional<std::vector<double>> def = {}) const;
  std::vector<std::uint64_t> get_u64_list(
      const std::string& key, std::optional<std::vector<std::uint64_t>> def = {}) const;

  int line_of(const std::string& key) const;  // 0 if absent
  const std::string& path() const { return path_; }
  /// Throws if the file holds keys never looked up (catches typos).
  void check_all_consumed() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  std::string path_;
  std::map<std::string, Entry> entries_;
};

/// One experiment, fully determined by the file contents.
struct ExperimentConfig {
  Domain domain;
  std::array<int, 2> nodes{101, 101};
  int steps = 200;

  double bound = 1.0;  // admissibility M
  double p0 = 0.0, qplus0 = 0.0, qminus0 = 0.0;
  std::array<double, 2> a0{0.0, 0.0};

  WeightConfig weights;
  int weight_time_cells = 161;

  double alpha = 1.0;
  int order = 2;

  std::vector<double> amplitudes{0.1, 0.05, 0.025};
  std::vector<std::uint64_t> seeds{1, 2, 3};

  std::vector<double> s_values{2, 4, 8, 16, 32};
  int family_size = 20;
  std::uint64_t family_seed = 7;

  std::string initial = "eigenmode";

  double recon_amplitude = 0.05;
  std::uint64_t recon_seed = 1;
  double crosscheck_tol = 5e-3;

  std::string output_dir = "out";

  static ExperimentConfig parse(const std::string& path);
  void write(const std::string& path) const;

  double dt() const { return domain.time_horizon / steps; }
  SpatialGrid make_grid() const;
  CoefficientSet make_baseline(const SpatialGrid& grid) const;
};

}  // namespace tss
