#include "tss/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tss {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 7th-degree smoothstep: S(0)=0, S(1)=1, first three derivatives vanish at both ends.
double smoothstep4(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double t2 = t * t;
  return t2 * t2 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t);
}

// dead band [0, 0.08], gentle ramp [0.08, 0.46], plateau 1 beyond; the wide
// ramp keeps the second derivative small, which limits how hard the
// Hamiltonian amplifies perturbation fields in time-derivative estimates
double cutoff_1d(double xi) {
  constexpr double w0 = 0.08, w1 = 0.46;
  const double up = smoothstep4((xi - w0) / (w1 - w0));
  const double down = smoothstep4((1.0 - xi - w0) / (w1 - w0));
  return up * down;
}

double sup_norm(const RealField& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

// one-sided 3-point derivative of `f` entering the domain from boundary node `node`
double inward_difference(const SpatialGrid& grid, const RealField& f, int node, int axis,
                         double normal_component) {
  const int stride = axis == 0 ? 1 : grid.nodes(0);
  const int step = normal_component > 0 ? -stride : stride;
  return (-3.0 * f[node] + 4.0 * f[node + step] - f[node + 2 * step]) /
         (2.0 * grid.spacing(axis));
}

}  // namespace

RealField constant_field(const SpatialGrid& grid, double value) {
  return RealField::Constant(grid.num_nodes(), value);
}

CoefficientSet zero_coefficients(const SpatialGrid& grid, double bound) {
  CoefficientSet c;
  c.A1 = constant_field(grid, 0.0);
  if (grid.dim() == 2) c.A2 = constant_field(grid, 0.0);
  c.p = constant_field(grid, 0.0);
  c.qplus = constant_field(grid, 0.0);
  c.qminus = constant_field(grid, 0.0);
  c.bound = bound;
  return c;
}

std::array<RealField, 2> make_divergence_free(const SpatialGrid& grid,
                                              std::array<double, 2> constant) {
  std::array<RealField, 2> a;
  a[0] = constant_field(grid, constant[0]);
  if (grid.dim() == 2) a[1] = constant_field(grid, constant[1]);
  return a;
}

std::array<RealField, 2> make_divergence_free(const SpatialGrid& grid, const ScalarFunc& psi) {
  if (grid.dim() != 2) {
    throw std::invalid_argument(
        "make_divergence_free: only constant fields are divergence-free in 1D; "
        "stream functions need dim = 2");
  }
  const double h1 = grid.spacing(0), h2 = grid.spacing(1);
  std::array<RealField, 2> a{RealField(grid.num_nodes()), RealField(grid.num_nodes())};
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto x = grid.coords(node);
    a[0][node] = (psi(x[0], x[1] + h2) - psi(x[0], x[1] - h2)) / (2.0 * h2);
    a[1][node] = -(psi(x[0] + h1, x[1]) - psi(x[0] - h1, x[1])) / (2.0 * h1);
  }
  return a;
}

RealField discrete_divergence(const SpatialGrid& grid, const RealField& a1,
                              const RealField& a2) {
  RealField div = RealField::Zero(grid.num_nodes());
  const int sx = 1;
  for (int node : grid.interior()) {
    double d = (a1[node + sx] - a1[node - sx]) / (2.0 * grid.spacing(0));
    if (grid.dim() == 2) {
      const int sy = grid.nodes(0);
      d += (a2[node + sy] - a2[node - sy]) / (2.0 * grid.spacing(1));
    }
    div[node] = d;
  }
  return div;
}

RealField boundary_cutoff(const SpatialGrid& grid) {
  RealField chi(grid.num_nodes());
  const auto& dom = grid.domain();
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto x = grid.coords(node);
    double v = 1.0;
    for (int a = 0; a < grid.dim(); ++a) {
      v *= cutoff_1d((x[a] - dom.lo[a]) / (dom.hi[a] - dom.lo[a]));
    }
    chi[node] = v;
  }
  return chi;
}

AdmissibilityReport check_admissible(const SpatialGrid& grid, const CoefficientSet& set,
                                     const CoefficientSet& baseline, double tol_div,
                                     double tol_trace) {
  AdmissibilityReport r;
  r.sup_A = std::max(sup_norm(set.A1), sup_norm(set.A2));
  r.sup_p = sup_norm(set.p);
  r.sup_qplus = sup_norm(set.qplus);
  r.sup_qminus = sup_norm(set.qminus);
  const double slack = 1.0 + 1e-12;
  r.sup_ok = r.sup_A <= set.bound * slack && r.sup_p <= set.bound * slack &&
             r.sup_qplus <= set.bound * slack && r.sup_qminus <= set.bound * slack;

  const RealField div =
      discrete_divergence(grid, set.A1, grid.dim() == 2 ? set.A2 : RealField::Zero(grid.num_nodes()));
  const double a_scale = std::max(r.sup_A, 1e-300);
  r.div_residual_rel = r.sup_A == 0.0 ? 0.0 : sup_norm(div) / a_scale;
  r.div_ok = r.div_residual_rel <= tol_div;

  std::vector<const RealField*> fields = {&set.p, &set.qplus, &set.qminus, &set.A1};
  std::vector<const RealField*> base = {&baseline.p, &baseline.qplus, &baseline.qminus,
                                        &baseline.A1};
  if (grid.dim() == 2) {
    fields.push_back(&set.A2);
    base.push_back(&baseline.A2);
  }
  for (size_t f = 0; f < fields.size(); ++f) {
    const RealField delta = *fields[f] - *base[f];
    const double scale = std::max(1.0, sup_norm(*fields[f]));
    for (const auto& bn : grid.boundary()) {
      r.trace_value_residual =
          std::max(r.trace_value_residual, std::abs(delta[bn.node]) / scale);
      for (int a = 0; a < grid.dim(); ++a) {
        if (bn.normal[a] == 0.0) continue;
        const double d = inward_difference(grid, delta, bn.node, a, bn.normal[a]);
        r.trace_diff_residual = std::max(r.trace_diff_residual, std::abs(d) / scale);
      }
    }
  }
  r.trace_ok = r.trace_value_residual <= tol_trace && r.trace_diff_residual <= tol_trace;
  return r;
}

namespace {

struct FourierShape {
  // low-order trigonometric sum on the unit square, evaluable anywhere
  std::vector<double> coef;
  int dim = 1;
  static constexpr int kModes = 2;

  static FourierShape draw(std::mt19937_64& rng, int dim) {
    FourierShape s;
    s.dim = dim;
    const int n = dim == 1 ? 2 * kModes : 4 * kModes * kModes;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    s.coef.resize(n);
    for (auto& c : s.coef) c = u(rng);
    return s;
  }

  double operator()(double xi, double up) const {
    double v = 0.0;
    if (dim == 1) {
      for (int m = 1; m <= kModes; ++m) {
        v += coef[2 * (m - 1)] * std::cos(m * kPi * xi) +
             coef[2 * (m - 1) + 1] * std::sin(m * kPi * xi);
      }
    } else {
      int k = 0;
      for (int m = 1; m <= kModes; ++m) {
        for (int l = 1; l <= kModes; ++l) {
          v += coef[k++] * std::cos(m * kPi * xi) * std::cos(l * kPi * up);
          v += coef[k++] * std::sin(m * kPi * xi) * std::sin(l * kPi * up);
          v += coef[k++] * std::sin(m * kPi * xi) * std::cos(l * kPi * up);
          v += coef[k++] * std::cos(m * kPi * xi) * std::sin(l * kPi * up);
        }
      }
    }
    return v;
  }
};

}  // namespace

CoefficientSet sample_admissible_perturbation(const SpatialGrid& grid,
                                              const CoefficientSet& baseline,
                                              double amplitude, std::uint64_t seed) {
  if (amplitude < 0.0) {
    throw std::invalid_argument("sample_admissible_perturbation: amplitude must be >= 0");
  }
  std::mt19937_64 rng(seed);
  const auto& dom = grid.domain();
  const auto unit = [&](double x, int a) { return (x - dom.lo[a]) / (dom.hi[a] - dom.lo[a]); };

  const RealField chi = boundary_cutoff(grid);
  const FourierShape shape_p = FourierShape::draw(rng, grid.dim());
  const FourierShape shape_qp = FourierShape::draw(rng, grid.dim());
  const FourierShape shape_qm = FourierShape::draw(rng, grid.dim());
  const FourierShape shape_psi = FourierShape::draw(rng, grid.dim());  // unused in 1D

  auto masked_field = [&](const FourierShape& s) {
    RealField f(grid.num_nodes());
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const auto x = grid.coords(node);
      f[node] = s(unit(x[0], 0), grid.dim() == 2 ? unit(x[1], 1) : 0.0);
    }
    const double sup = std::max(sup_norm(f), 1e-300);
    return RealField((f / sup).cwiseProduct(chi));
  };

  CoefficientSet out = baseline;
  out.p = baseline.p + amplitude * masked_field(shape_p);
  out.qplus = baseline.qplus + amplitude * masked_field(shape_qp);
  out.qminus = baseline.qminus + amplitude * masked_field(shape_qm);

  if (grid.dim() == 2) {
    // divergence-free A perturbation: discrete curl of the masked stream shape
    const ScalarFunc masked_psi = [&](double x, double y) {
      const double xi = unit(x, 0), up = unit(y, 1);
      return cutoff_1d(xi) * cutoff_1d(up) * shape_psi(xi, up);
    };
    auto da = make_divergence_free(grid, masked_psi);
    const double sup = std::max(std::max(sup_norm(da[0]), sup_norm(da[1])), 1e-300);
    out.A1 = baseline.A1 + (amplitude / sup) * da[0];
    out.A2 = baseline.A2 + (amplitude / sup) * da[1];
  }

  for (const RealField* f : {&out.A1, &out.A2, &out.p, &out.qplus, &out.qminus}) {
    if (sup_norm(*f) > out.bound * (1.0 + 1e-12)) {
      throw std::invalid_argument(
          "sample_admissible_perturbation: amplitude pushes a sup-norm past the bound M");
    }
  }
  return out;
}

void write_coefficients(const std::string& path, const SpatialGrid& grid,
                        const CoefficientSet& set) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const bool two_d = grid.dim() == 2;
  os << (two_d ? "node,x,y,A1,A2,p,qplus,qminus\n" : "node,x,A1,p,qplus,qminus\n");
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  };
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto x = grid.coords(node);
    os << node;
    put(x[0]);
    if (two_d) put(x[1]);
    put(set.A1[node]);
    if (two_d) put(set.A2[node]);
    put(set.p[node]);
    put(set.qplus[node]);
    put(set.qminus[node]);
    os << '\n';
  }
}

CoefficientSet read_coefficients(const std::string& path, const SpatialGrid& grid) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  CoefficientSet set = zero_coefficients(grid, 1.0);
  const bool two_d = grid.dim() == 2;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int node;
    double x, y;
    ss >> node >> x;
    if (two_d) ss >> y;
    if (!ss || node < 0 || node >= grid.num_nodes()) {
      throw std::runtime_error(path + ": bad node row");
    }
    ss >> set.A1[node];
    if (two_d) ss >> set.A2[node];
    ss >> set.p[node] >> set.qplus[node] >> set.qminus[node];
    ++rows;
  }
  if (rows != grid.num_nodes()) {
    throw std::runtime_error(path + ": row count does not match the grid");
  }
  return set;
}

}  // namespace tss
