#include "tss/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tss {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path + ": cannot open config file");
  KeyValueFile kv;
  kv.path_ = path;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.entries_.count(full)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
    }
    kv.entries_[full] = Entry{value, lineno, false};
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

int KeyValueFile::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void KeyValueFile::fail(const std::string& key, const std::string& message) const {
  const int line = line_of(key);
  throw ConfigError(path_ + ":" + (line ? std::to_string(line) : "?") + ": " + key + ": " +
                    message);
}

std::string KeyValueFile::get_string(const std::string& key,
                                     std::optional<std::string> def) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    if (def) return *def;
    throw ConfigError(path_ + ": missing required key '" + key + "'");
  }
  it->second.consumed = true;
  return it->second.value;
}

double KeyValueFile::get_double(const std::string& key, std::optional<double> def) const {
  if (!has(key) && def) return *def;
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(key, "'" + v + "' is not a number");
  }
}

int KeyValueFile::get_int(const std::string& key, std::optional<int> def) const {
  if (!has(key) && def) return *def;
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(x);
  } catch (const std::exception&) {
    fail(key, "'" + v + "' is not an integer");
  }
}

std::uint64_t KeyValueFile::get_u64(const std::string& key,
                                    std::optional<std::uint64_t> def) const {
  if (!has(key) && def) return *def;
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(key, "'" + v + "' is not a nonnegative integer");
  }
}

std::vector<double> KeyValueFile::get_double_list(
    const std::string& key, std::optional<std::vector<double>> def) const {
  if (!has(key) && def) return *def;
  std::vector<double> out;
  for (const auto& item : split_commas(get_string(key))) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(key, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

std::vector<std::uint64_t> KeyValueFile::get_u64_list(
    const std::string& key, std::optional<std::vector<std::uint64_t>> def) const {
  if (!has(key) && def) return *def;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_commas(get_string(key))) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      fail(key, "'" + item + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

void KeyValueFile::check_all_consumed() const {
  for (const auto& [key, entry] : entries_) {
    if (!entry.consumed) {
      throw ConfigError(path_ + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                        "'");
    }
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  ExperimentConfig c;

  c.domain.dim = kv.get_int("domain.dim", 1);
  if (c.domain.dim != 1 && c.domain.dim != 2) kv.fail("domain.dim", "dim must be 1 or 2");
  c.domain.lo[0] = kv.get_double("domain.lo", 0.0);
  c.domain.hi[0] = kv.get_double("domain.hi", 1.0);
  c.domain.lo[1] = kv.get_double("domain.lo_y", 0.0);
  c.domain.hi[1] = kv.get_double("domain.hi_y", 1.0);
  c.domain.time_horizon = kv.get_double("domain.T", 0.5);
  for (int a = 0; a < c.domain.dim; ++a) {
    if (!(c.domain.lo[a] < c.domain.hi[a])) {
      kv.fail(a == 0 ? "domain.lo" : "domain.lo_y", "need lo < hi");
    }
  }
  if (!(c.domain.time_horizon > 0.0)) kv.fail("domain.T", "T must be positive");

  c.nodes[0] = kv.get_int("grid.nodes", 101);
  c.nodes[1] = kv.get_int("grid.nodes_y", c.nodes[0]);
  for (int a = 0; a < c.domain.dim; ++a) {
    if (c.nodes[a] < 3) kv.fail(a == 0 ? "grid.nodes" : "grid.nodes_y", "need >= 3 nodes");
  }
  if (kv.has("grid.dt")) {
    if (kv.has("grid.steps")) kv.fail("grid.dt", "give either dt or steps, not both");
    const double dt = kv.get_double("grid.dt");
    if (!(dt > 0.0)) kv.fail("grid.dt", "dt must be positive");
    const double ratio = c.domain.time_horizon / dt;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - steps) > 1e-6) {
      kv.fail("grid.dt", "dt must divide the time horizon T");
    }
    c.steps = static_cast<int>(steps);
  } else {
    c.steps = kv.get_int("grid.steps", 200);
    if (c.steps < 1) kv.fail("grid.steps", "need at least one step");
  }

  c.bound = kv.get_double("baseline.M", 1.0);
  if (!(c.bound > 0.0)) kv.fail("baseline.M", "M must be positive");
  c.p0 = kv.get_double("baseline.p0", 0.0);
  c.qplus0 = kv.get_double("baseline.qplus0", 0.0);
  c.qminus0 = kv.get_double("baseline.qminus0", 0.0);
  c.a0[0] = kv.get_double("baseline.A0", 0.0);
  c.a0[1] = kv.get_double("baseline.A0_y", 0.0);
  for (double v : {c.p0, c.qplus0, c.qminus0, c.a0[0], c.a0[1]}) {
    if (std::abs(v) > c.bound) kv.fail("baseline.M", "baseline constants exceed the bound M");
  }

  c.weights.x0[0] = kv.get_double("weights.x0", -1.0);
  c.weights.x0[1] = kv.get_double("weights.x0_y", 0.5 * (c.domain.lo[1] + c.domain.hi[1]));
  c.weights.r = kv.get_double("weights.r", 2.0);
  if (!(c.weights.r > 1.0)) kv.fail("weights.r", "need r > 1");
  c.weights.lambda = kv.get_double("weights.lambda", 1.0);
  if (!(c.weights.lambda > 0.0)) kv.fail("weights.lambda", "need lambda > 0");
  c.weights.t_horizon = c.domain.time_horizon;
  c.weight_time_cells = kv.get_int("weights.time_cells", 161);
  if (c.weight_time_cells < 3 || c.weight_time_cells % 2 == 0) {
    kv.fail("weights.time_cells", "need an odd cell count >= 3");
  }
  {
    bool inside = true;
    for (int a = 0; a < c.domain.dim; ++a) {
      inside = inside && c.weights.x0[a] >= c.domain.lo[a] && c.weights.x0[a] <= c.domain.hi[a];
    }
    if (inside) kv.fail("weights.x0", "x0 must lie outside the closed domain");
  }

  c.alpha = kv.get_double("probes.alpha", 1.0);
  if (!(c.alpha > 0.0)) kv.fail("probes.alpha", "alpha must be positive");
  c.order = kv.get_int("probes.order", 2);
  if (c.order < 0) kv.fail("probes.order", "order must be >= 0");

  c.amplitudes = kv.get_double_list("study.amplitudes", {{0.1, 0.05, 0.025}});
  for (double a : c.amplitudes) {
    if (a < 0.0) kv.fail("study.amplitudes", "amplitudes must be >= 0");
  }
  c.seeds = kv.get_u64_list("study.seeds", {{1, 2, 3}});

  c.s_values = kv.get_double_list("scan.s_values", {{2, 4, 8, 16, 32}});
  for (double s : c.s_values) {
    if (!(s > 0.0)) kv.fail("scan.s_values", "s values must be positive");
  }
  c.family_size = kv.get_int("scan.family", 20);
  if (c.family_size < 1) kv.fail("scan.family", "need at least one member");
  c.family_seed = kv.get_u64("scan.family_seed", 7);

  c.initial = kv.get_string("forward.initial", std::string("eigenmode"));

  c.recon_amplitude = kv.get_double("reconstruct.amplitude", 0.05);
  if (c.recon_amplitude < 0.0) kv.fail("reconstruct.amplitude", "amplitude must be >= 0");
  c.recon_seed = kv.get_u64("reconstruct.seed", 1);
  c.crosscheck_tol = kv.get_double("reconstruct.crosscheck_tol", 5e-3);

  c.output_dir = kv.get_string("output.dir", std::string("out"));

  kv.check_all_consumed();
  return c;
}

void ExperimentConfig::write(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "[domain]\n";
  os << "dim = " << domain.dim << "\n";
  os << "lo = " << num(domain.lo[0]) << "\nhi = " << num(domain.hi[0]) << "\n";
  os << "lo_y = " << num(domain.lo[1]) << "\nhi_y = " << num(domain.hi[1]) << "\n";
  os << "T = " << num(domain.time_horizon) << "\n\n";
  os << "[grid]\n";
  os << "nodes = " << nodes[0] << "\nnodes_y = " << nodes[1] << "\nsteps = " << steps << "\n\n";
  os << "[baseline]\n";
  os << "M = " << num(bound) << "\np0 = " << num(p0) << "\nqplus0 = " << num(qplus0)
     << "\nqminus0 = " << num(qminus0) << "\nA0 = " << num(a0[0]) << "\nA0_y = " << num(a0[1])
     << "\n\n";
  os << "[weights]\n";
  os << "x0 = " << num(weights.x0[0]) << "\nx0_y = " << num(weights.x0[1])
     << "\nr = " << num(weights.r) << "\nlambda = " << num(weights.lambda)
     << "\ntime_cells = " << weight_time_cells << "\n\n";
  os << "[probes]\nalpha = " << num(alpha) << "\norder = " << order << "\n\n";
  os << "[study]\namplitudes = ";
  for (size_t i = 0; i < amplitudes.size(); ++i) os << (i ? "," : "") << num(amplitudes[i]);
  os << "\nseeds = ";
  for (size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  os << "\n\n[scan]\ns_values = ";
  for (size_t i = 0; i < s_values.size(); ++i) os << (i ? "," : "") << num(s_values[i]);
  os << "\nfamily = " << family_size << "\nfamily_seed = " << family_seed << "\n\n";
  os << "[forward]\ninitial = " << initial << "\n\n";
  os << "[reconstruct]\namplitude = " << num(recon_amplitude) << "\nseed = " << recon_seed
     << "\ncrosscheck_tol = " << num(crosscheck_tol) << "\n\n";
  os << "[output]\ndir = " << output_dir << "\n";
}

SpatialGrid ExperimentConfig::make_grid() const { return SpatialGrid::build(domain, nodes); }

CoefficientSet ExperimentConfig::make_baseline(const SpatialGrid& grid) const {
  CoefficientSet base = zero_coefficients(grid, bound);
  auto a = make_divergence_free(grid, a0);
  base.A1 = a[0];
  if (grid.dim() == 2) base.A2 = a[1];
  base.p = constant_field(grid, p0);
  base.qplus = constant_field(grid, qplus0);
  base.qminus = constant_field(grid, qminus0);
  return base;
}

}  // namespace tss
