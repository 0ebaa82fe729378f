#include "tss/forward.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace tss {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

using Triplet = Eigen::Triplet<Complex>;

double sup_norm(const RealField& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

}  // namespace

TwoStateField TwoStateField::zero(const SpatialGrid& grid) {
  return {ComplexField::Zero(grid.num_nodes()), ComplexField::Zero(grid.num_nodes())};
}

ComplexField TwoStateField::stacked() const {
  ComplexField v(up.size() + um.size());
  v << up, um;
  return v;
}

TwoStateField TwoStateField::from_stacked(const ComplexField& v) {
  const int n = static_cast<int>(v.size()) / 2;
  return {v.head(n), v.tail(n)};
}

double l2_norm(const SpatialGrid& grid, const TwoStateField& f) {
  const double a = grid.l2_norm(f.up), b = grid.l2_norm(f.um);
  return std::sqrt(a * a + b * b);
}

DiscreteHamiltonian assemble_hamiltonian(const SpatialGrid& grid, const CoefficientSet& coeffs) {
  const int n = grid.num_nodes();
  const RealField a2 = grid.dim() == 2 ? coeffs.A2 : RealField::Zero(n);
  const RealField div = discrete_divergence(grid, coeffs.A1, a2);

  DiscreteHamiltonian ham;
  ham.num_nodes = n;
  const double a_sup = std::max(sup_norm(coeffs.A1), sup_norm(a2));
  ham.divergence_clean = a_sup == 0.0 || sup_norm(div) <= kDivTolRel * a_sup;

  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(grid.interior().size()) * 16);

  const auto acomp = [&](int axis) -> const RealField& { return axis == 0 ? coeffs.A1 : a2; };

  for (int node : grid.interior()) {
    double diag_lap = 0.0;
    // row `node` (plus component) and `n + node` (minus component)
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const int stride = axis == 0 ? 1 : grid.nodes(0);
      const double h = grid.spacing(axis);
      const double inv_h2 = 1.0 / (h * h);
      diag_lap += 2.0 * inv_h2;
      const RealField& a = acomp(axis);
      for (int dir : {-1, +1}) {
        const int nb = node + dir * stride;
        // -Delta, both diagonal blocks
        trip.emplace_back(node, nb, Complex(-inv_h2, 0));
        trip.emplace_back(n + node, n + nb, Complex(-inv_h2, 0));
        // skew-form gradient coupling: (A(node) + A(nb)) / (4h) off-diagonal
        const double w = dir * (a[node] + a[nb]) / (4.0 * h);
        trip.emplace_back(node, n + nb, Complex(w, 0));
        trip.emplace_back(n + node, nb, Complex(-w, 0));
      }
    }
    trip.emplace_back(node, node, Complex(diag_lap + coeffs.qplus[node], 0));
    trip.emplace_back(n + node, n + node, Complex(diag_lap + coeffs.qminus[node], 0));
    // scalar coupling and the divergence correction on the cross blocks
    const double cross = coeffs.p[node] - 0.5 * div[node];
    const double cross_m = coeffs.p[node] + 0.5 * div[node];
    trip.emplace_back(node, n + node, Complex(cross, 0));
    trip.emplace_back(n + node, node, Complex(cross_m, 0));
  }

  ham.full.resize(2 * n, 2 * n);
  ham.full.setFromTriplets(trip.begin(), trip.end());

  // homogeneous-Dirichlet restriction
  ham.interior_pos.assign(n, -1);
  const int ni = static_cast<int>(grid.interior().size());
  for (int k = 0; k < ni; ++k) ham.interior_pos[grid.interior()[k]] = k;
  std::vector<Triplet> itrip;
  itrip.reserve(trip.size());
  auto ipos = [&](int stacked) {
    const int comp = stacked / n, node = stacked % n;
    const int k = ham.interior_pos[node];
    return k < 0 ? -1 : comp * ni + k;
  };
  for (const auto& t : trip) {
    const int r = ipos(t.row()), c = ipos(t.col());
    if (r >= 0 && c >= 0) itrip.emplace_back(r, c, t.value());
  }
  ham.interior.resize(2 * ni, 2 * ni);
  ham.interior.setFromTriplets(itrip.begin(), itrip.end());
  return ham;
}

double hermiticity_defect(const DiscreteHamiltonian& ham) {
  Eigen::SparseMatrix<Complex> adj = ham.interior.adjoint();
  Eigen::SparseMatrix<Complex> diff = ham.interior - adj;
  double max_entry = 0.0, max_diff = 0.0;
  for (int k = 0; k < ham.interior.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(ham.interior, k); it; ++it) {
      max_entry = std::max(max_entry, std::abs(it.value()));
    }
  }
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(diff, k); it; ++it) {
      max_diff = std::max(max_diff, std::abs(it.value()));
    }
  }
  return max_entry == 0.0 ? 0.0 : max_diff / max_entry;
}

TwoStateField apply_operator_everywhere(const SpatialGrid& grid, const CoefficientSet& coeffs,
                                        const TwoStateField& u) {
  const int n = grid.num_nodes();
  const DiscreteHamiltonian ham = assemble_hamiltonian(grid, coeffs);
  const ComplexField hu = ham.full * u.stacked();
  TwoStateField out{hu.head(n), hu.tail(n)};

  const RealField a2 = grid.dim() == 2 ? coeffs.A2 : RealField::Zero(n);
  for (const auto& bn : grid.boundary()) {
    const int node = bn.node;
    Complex lap_p = 0, lap_m = 0, adv_p = 0, adv_m = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const double a = axis == 0 ? coeffs.A1[node] : a2[node];
      lap_p += deriv2_at(grid, u.up, node, axis);
      lap_m += deriv2_at(grid, u.um, node, axis);
      adv_p += a * deriv1_at(grid, u.up, node, axis);
      adv_m += a * deriv1_at(grid, u.um, node, axis);
    }
    out.up[node] = -lap_p + coeffs.qplus[node] * u.up[node] + adv_m + coeffs.p[node] * u.um[node];
    out.um[node] = -lap_m + coeffs.qminus[node] * u.um[node] - adv_p + coeffs.p[node] * u.up[node];
  }
  return out;
}

RelativeBoundReport check_relative_bound(const SpatialGrid& grid, const CoefficientSet& coeffs,
                                         double epsilon, int num_fields, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("check_relative_bound: epsilon must lie in (0,1)");
  }
  const DiscreteHamiltonian ham = assemble_hamiltonian(grid, coeffs);
  const DiscreteHamiltonian lap = assemble_hamiltonian(grid, zero_coefficients(grid, coeffs.bound));
  const Eigen::SparseMatrix<Complex> coupling = ham.interior - lap.interior;

  RelativeBoundReport rep;
  rep.epsilon = epsilon;
  const double sup_a =
      std::max(sup_norm(coeffs.A1), grid.dim() == 2 ? sup_norm(coeffs.A2) : 0.0);
  rep.c_eps = sup_a * sup_a / epsilon + std::sqrt(2.0) * sup_norm(coeffs.p) +
              std::sqrt(std::pow(sup_norm(coeffs.qplus), 2) + std::pow(sup_norm(coeffs.qminus), 2));

  const int ni = static_cast<int>(grid.interior().size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  rep.max_violation = -std::numeric_limits<double>::infinity();

  for (int f = 0; f < num_fields; ++f) {
    ComplexField u(2 * ni);
    if (f % 3 == 0) {
      // smooth member: a few low sine modes
      u.setZero();
      for (int m = 1; m <= 3; ++m) {
        const Complex cp(uni(rng), uni(rng)), cm(uni(rng), uni(rng));
        for (int k = 0; k < ni; ++k) {
          const auto x = grid.coords(grid.interior()[k]);
          const auto& dom = grid.domain();
          double s = std::sin(m * kPi * (x[0] - dom.lo[0]) / (dom.hi[0] - dom.lo[0]));
          if (grid.dim() == 2) {
            s *= std::sin(m * kPi * (x[1] - dom.lo[1]) / (dom.hi[1] - dom.lo[1]));
          }
          u[k] += cp * s;
          u[ni + k] += cm * s;
        }
      }
    } else {
      for (int k = 0; k < 2 * ni; ++k) u[k] = Complex(uni(rng), uni(rng));
    }
    const double lhs = (coupling * u).norm();
    const double rhs = epsilon * (lap.interior * u).norm() + rep.c_eps * u.norm();
    const double viol = lhs - rhs;
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > 1e-12 * rhs) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

BoundaryData BoundaryData::zero(const SpatialGrid& grid, const TimeGrid& times) {
  BoundaryData g;
  g.times = times;
  const int nb = static_cast<int>(grid.boundary().size());
  g.gplus = Eigen::MatrixXcd::Zero(nb, times.count);
  g.gminus = Eigen::MatrixXcd::Zero(nb, times.count);
  g.coeff_plus = {Eigen::VectorXcd::Zero(nb)};
  g.coeff_minus = {Eigen::VectorXcd::Zero(nb)};
  return g;
}

BoundaryData compatibility_boundary_data(const SpatialGrid& grid, const TwoStateField& u0,
                                         const CoefficientSet& baseline, int order,
                                         const TimeGrid& times) {
  if (order < 0) throw std::invalid_argument("compatibility data: order must be >= 0");
  BoundaryData g;
  g.times = times;
  const auto& bnodes = grid.boundary();
  const int nb = static_cast<int>(bnodes.size());

  TwoStateField w = u0;  // H^l u0
  Complex factor(1.0, 0.0);
  for (int l = 0; l <= order; ++l) {
    Eigen::VectorXcd cp(nb), cm(nb);
    for (int b = 0; b < nb; ++b) {
      cp[b] = factor * w.up[bnodes[b].node];
      cm[b] = factor * w.um[bnodes[b].node];
    }
    g.coeff_plus.push_back(cp);
    g.coeff_minus.push_back(cm);
    if (l < order) {
      w = apply_operator_everywhere(grid, baseline, w);
      factor *= -kI / static_cast<double>(l + 1);
    }
  }

  g.gplus.resize(nb, times.count);
  g.gminus.resize(nb, times.count);
  for (int j = 0; j < times.count; ++j) {
    const double t = times.time(j);
    Eigen::VectorXcd vp = Eigen::VectorXcd::Zero(nb), vm = Eigen::VectorXcd::Zero(nb);
    double tl = 1.0;
    for (int l = 0; l <= order; ++l) {
      vp += tl * g.coeff_plus[static_cast<size_t>(l)];
      vm += tl * g.coeff_minus[static_cast<size_t>(l)];
      tl *= t;
    }
    g.gplus.col(j) = vp;
    g.gminus.col(j) = vm;
  }
  return g;
}

TwoStateTrajectory solve_ibvp(const SpatialGrid& grid, const CoefficientSet& coeffs,
                              const TwoStateField& u0, const BoundaryData& g,
                              const SourceFn* source, double dt, int steps) {
  const int n = grid.num_nodes();
  if (u0.up.size() != n || u0.um.size() != n) {
    throw std::invalid_argument("solve_ibvp: initial state size mismatch");
  }
  if (g.times.count < steps + 1 || std::abs(g.times.dt - dt) > 1e-12 * dt ||
      g.times.time(0) != 0.0) {
    throw std::invalid_argument("solve_ibvp: boundary data grid does not cover the solve");
  }
  const auto& bnodes = grid.boundary();
  // compatibility at order zero: g(.,0) must equal the trace of u0
  double mismatch = 0.0, scale = std::max(1.0, u0.stacked().cwiseAbs().maxCoeff());
  for (size_t b = 0; b < bnodes.size(); ++b) {
    mismatch = std::max(mismatch, std::abs(g.gplus(b, 0) - u0.up[bnodes[b].node]));
    mismatch = std::max(mismatch, std::abs(g.gminus(b, 0) - u0.um[bnodes[b].node]));
  }
  if (mismatch > 1e-9 * scale) {
    throw std::invalid_argument("solve_ibvp: g(.,0) does not match the initial trace");
  }

  const DiscreteHamiltonian ham = assemble_hamiltonian(grid, coeffs);
  const Complex c = kI * (0.5 * dt);

  Eigen::SparseMatrix<Complex> plus(2 * n, 2 * n), minus(2 * n, 2 * n);
  {
    std::vector<Triplet> tp, tm;
    tp.reserve(static_cast<size_t>(ham.full.nonZeros()) + 2 * n);
    tm.reserve(tp.capacity());
    for (int k = 0; k < ham.full.outerSize(); ++k) {
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(ham.full, k); it; ++it) {
        tp.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), c * it.value());
        tm.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), -c * it.value());
      }
    }
    for (int r = 0; r < 2 * n; ++r) {
      tp.emplace_back(r, r, Complex(1, 0));  // identity everywhere (pins boundary rows)
      const int node = r % n;
      if (!grid.is_boundary(node)) tm.emplace_back(r, r, Complex(1, 0));
    }
    plus.setFromTriplets(tp.begin(), tp.end());
    minus.setFromTriplets(tm.begin(), tm.end());
  }

  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(plus);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("solve_ibvp: step matrix factorization failed");
  }

  TwoStateTrajectory traj;
  traj.times = TimeGrid{dt, steps + 1, 0};
  traj.states.reserve(steps + 1);
  traj.states.push_back(u0);

  ComplexField u = u0.stacked();
  ComplexField f_now(2 * n), f_next(2 * n);
  if (source) f_now = (*source)(0.0).stacked();

  for (int s = 0; s < steps; ++s) {
    ComplexField b = minus * u;
    if (source) {
      f_next = (*source)((s + 1) * dt).stacked();
      b += c * (f_now + f_next);
      f_now.swap(f_next);
    }
    for (size_t k = 0; k < bnodes.size(); ++k) {
      b[bnodes[k].node] = g.gplus(k, s + 1);
      b[n + bnodes[k].node] = g.gminus(k, s + 1);
    }
    u = lu.solve(b);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("solve_ibvp: linear solve failed");
    }
    traj.states.push_back(TwoStateField::from_stacked(u));
  }
  return traj;
}

TwoStateTrajectory time_derivative(const TwoStateTrajectory& traj) {
  const int nt = traj.times.count;
  if (nt < 3) throw std::invalid_argument("time_derivative: need at least 3 time nodes");
  const double dt = traj.times.dt;
  TwoStateTrajectory out;
  out.times = traj.times;
  out.states.resize(nt);
  auto comb = [&](int a, double ca, int b, double cb, int c2, double cc) {
    TwoStateField f;
    f.up = (ca * traj.states[a].up + cb * traj.states[b].up + cc * traj.states[c2].up) / (2.0 * dt);
    f.um = (ca * traj.states[a].um + cb * traj.states[b].um + cc * traj.states[c2].um) / (2.0 * dt);
    return f;
  };
  out.states[0] = comb(0, -3.0, 1, 4.0, 2, -1.0);
  for (int j = 1; j < nt - 1; ++j) out.states[j] = comb(j - 1, -1.0, j, 0.0, j + 1, 1.0);
  out.states[nt - 1] = comb(nt - 1, 3.0, nt - 2, -4.0, nt - 3, 1.0);
  return out;
}

ObservationTrace observe(const SpatialGrid& grid, const TwoStateTrajectory& traj,
                         const ObservationBoundary& where) {
  if (traj.times.count < 3) throw std::invalid_argument("observe: need at least 3 time nodes");
  const TwoStateTrajectory dudt = time_derivative(traj);
  ObservationTrace tr;
  tr.times = traj.times;
  for (const auto& bn : where.trace_nodes) tr.nodes.push_back(bn.node);
  const int nb = static_cast<int>(where.trace_nodes.size());
  tr.dplus.resize(nb, traj.times.count);
  tr.dminus.resize(nb, traj.times.count);
  for (int j = 0; j < traj.times.count; ++j) {
    tr.dplus.col(j) = neumann_trace(grid, dudt.states[j].up, where);
    tr.dminus.col(j) = neumann_trace(grid, dudt.states[j].um, where);
  }
  return tr;
}

TwoStateTrajectory extend_time_symmetric(const TwoStateTrajectory& traj, TimeParity parity,
                                         double tol) {
  if (traj.times.time(0) != 0.0) {
    throw std::invalid_argument("extend_time_symmetric: trajectory must start at t = 0");
  }
  const int k = traj.times.count - 1;
  if (parity == TimeParity::OddConjugate) {
    const auto& w0 = traj.states[0];
    const double re = std::max(w0.up.real().cwiseAbs().maxCoeff(),
                               w0.um.real().cwiseAbs().maxCoeff());
    const double scale = std::max(1.0, std::max(w0.up.cwiseAbs().maxCoeff(),
                                                w0.um.cwiseAbs().maxCoeff()));
    if (re > tol * scale) {
      throw std::invalid_argument(
          "extend_time_symmetric: odd-conjugate extension needs an imaginary t=0 slice "
          "(initial data or coefficients were not real-valued)");
    }
  }
  TwoStateTrajectory out;
  out.times = TimeGrid{traj.times.dt, 2 * k + 1, k};
  out.states.resize(2 * k + 1);
  const double sgn = parity == TimeParity::EvenConjugate ? 1.0 : -1.0;
  for (int j = 0; j <= k; ++j) {
    out.states[k + j] = traj.states[j];
    if (j > 0) {
      out.states[k - j] = {sgn * traj.states[j].up.conjugate(),
                           sgn * traj.states[j].um.conjugate()};
    }
  }
  return out;
}

void write_trajectory(const std::string& path, const SpatialGrid& grid,
                      const TwoStateTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "t,node,re_uplus,im_uplus,re_uminus,im_uminus\n";
  char buf[400];
  for (int j = 0; j < traj.times.count; ++j) {
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const auto& s = traj.states[j];
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", traj.times.time(j),
                    node, s.up[node].real(), s.up[node].imag(), s.um[node].real(),
                    s.um[node].imag());
      os << buf;
    }
  }
}

Complex ManufacturedCase::uplus(std::array<double, 2> x, double t) const {
  const double xi = (x[0] - dom.lo[0]) / (dom.hi[0] - dom.lo[0]);
  double v = std::sin(kPi * xi);
  if (dom.dim == 2) v *= std::sin(kPi * (x[1] - dom.lo[1]) / (dom.hi[1] - dom.lo[1]));
  return std::exp(kI * t) * v;
}

Complex ManufacturedCase::uminus(std::array<double, 2> x, double t) const {
  const double xi = (x[0] - dom.lo[0]) / (dom.hi[0] - dom.lo[0]);
  double v = std::sin(2.0 * kPi * xi);
  if (dom.dim == 2) v *= std::sin(kPi * (x[1] - dom.lo[1]) / (dom.hi[1] - dom.lo[1]));
  return std::exp(2.0 * kI * t) * v;
}

std::array<Complex, 2> ManufacturedCase::grad_uplus(std::array<double, 2> x, double t) const {
  const double l0 = dom.hi[0] - dom.lo[0];
  const double xi = (x[0] - dom.lo[0]) / l0;
  const Complex ph = std::exp(kI * t);
  if (dom.dim == 1) return {ph * (kPi / l0) * std::cos(kPi * xi), 0.0};
  const double l1 = dom.hi[1] - dom.lo[1];
  const double up = (x[1] - dom.lo[1]) / l1;
  return {ph * (kPi / l0) * std::cos(kPi * xi) * std::sin(kPi * up),
          ph * (kPi / l1) * std::sin(kPi * xi) * std::cos(kPi * up)};
}

std::array<Complex, 2> ManufacturedCase::grad_uminus(std::array<double, 2> x, double t) const {
  const double l0 = dom.hi[0] - dom.lo[0];
  const double xi = (x[0] - dom.lo[0]) / l0;
  const Complex ph = std::exp(2.0 * kI * t);
  if (dom.dim == 1) return {ph * (2.0 * kPi / l0) * std::cos(2.0 * kPi * xi), 0.0};
  const double l1 = dom.hi[1] - dom.lo[1];
  const double up = (x[1] - dom.lo[1]) / l1;
  return {ph * (2.0 * kPi / l0) * std::cos(2.0 * kPi * xi) * std::sin(kPi * up),
          ph * (kPi / l1) * std::sin(2.0 * kPi * xi) * std::cos(kPi * up)};
}

Complex ManufacturedCase::fplus(std::array<double, 2> x, double t) const {
  const double l0 = dom.hi[0] - dom.lo[0];
  double kap2 = std::pow(kPi / l0, 2);
  if (dom.dim == 2) kap2 += std::pow(kPi / (dom.hi[1] - dom.lo[1]), 2);
  const auto gm = grad_uminus(x, t);
  const Complex adv = a0[0] * gm[0] + a0[1] * gm[1];
  return (1.0 + kap2 + qplus0) * uplus(x, t) + adv + p0 * uminus(x, t);
}

Complex ManufacturedCase::fminus(std::array<double, 2> x, double t) const {
  const double l0 = dom.hi[0] - dom.lo[0];
  double kap2 = std::pow(2.0 * kPi / l0, 2);
  if (dom.dim == 2) kap2 += std::pow(kPi / (dom.hi[1] - dom.lo[1]), 2);
  const auto gp = grad_uplus(x, t);
  const Complex adv = a0[0] * gp[0] + a0[1] * gp[1];
  return (2.0 + kap2 + qminus0) * uminus(x, t) - adv + p0 * uplus(x, t);
}

TwoStateField ManufacturedCase::exact(const SpatialGrid& grid, double t) const {
  TwoStateField f = TwoStateField::zero(grid);
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto x = grid.coords(node);
    f.up[node] = uplus(x, t);
    f.um[node] = uminus(x, t);
  }
  return f;
}

SourceFn ManufacturedCase::source(const SpatialGrid& grid) const {
  return [this, &grid](double t) {
    TwoStateField f = TwoStateField::zero(grid);
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const auto x = grid.coords(node);
      f.up[node] = fplus(x, t);
      f.um[node] = fminus(x, t);
    }
    return f;
  };
}

double ManufacturedCase::solve_error(std::array<int, 2> nodes, int steps) const {
  const SpatialGrid grid = SpatialGrid::build(dom, nodes);
  CoefficientSet coeffs = zero_coefficients(grid, 1e6);
  auto a = make_divergence_free(grid, a0);
  coeffs.A1 = a[0];
  if (grid.dim() == 2) coeffs.A2 = a[1];
  coeffs.p = constant_field(grid, p0);
  coeffs.qplus = constant_field(grid, qplus0);
  coeffs.qminus = constant_field(grid, qminus0);

  const double t_end = dom.time_horizon;
  const SourceFn f = source(grid);
  const BoundaryData g = BoundaryData::zero(grid, TimeGrid::forward(t_end, steps));
  const TwoStateTrajectory traj = solve_ibvp(grid, coeffs, exact(grid, 0.0), g, &f,
                                             t_end / steps, steps);
  double worst = 0.0;
  for (int j = 0; j <= steps; ++j) {
    const TwoStateField ref = exact(grid, traj.times.time(j));
    const TwoStateField& got = traj.states[j];
    worst = std::max(worst, l2_norm(grid, TwoStateField{got.up - ref.up, got.um - ref.um}));
  }
  return worst;
}

MmsStudy manufactured_convergence(const ManufacturedCase& mc, std::array<int, 2> base_nodes,
                                  int base_steps, int levels) {
  MmsStudy study;
  std::array<int, 2> nodes = base_nodes;
  int steps = base_steps;
  for (int l = 0; l < levels; ++l) {
    study.errors.push_back(mc.solve_error(nodes, steps));
    nodes[0] = 2 * (nodes[0] - 1) + 1;
    nodes[1] = 2 * (nodes[1] - 1) + 1;
    steps *= 2;
  }
  for (size_t l = 0; l + 1 < study.errors.size(); ++l) {
    study.orders.push_back(std::log2(study.errors[l] / study.errors[l + 1]));
  }
  return study;
}

void write_observation(const std::string& path, const ObservationTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "t,node,re_dnut_uplus,im_dnut_uplus,re_dnut_uminus,im_dnut_uminus\n";
  char buf[400];
  for (int j = 0; j < trace.times.count; ++j) {
    for (size_t b = 0; b < trace.nodes.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", trace.times.time(j),
                    trace.nodes[b], trace.dplus(b, j).real(), trace.dplus(b, j).imag(),
                    trace.dminus(b, j).real(), trace.dminus(b, j).imag());
      os << buf;
    }
  }
}

}  // namespace tss
