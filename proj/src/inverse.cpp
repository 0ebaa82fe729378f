#include "tss/inverse.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tss {

namespace {

constexpr Complex kI{0.0, 1.0};

double trapezoid_weight(const TimeGrid& tg, int j) {
  return (j == 0 || j == tg.count - 1) ? 0.5 * tg.dt : tg.dt;
}

RealField coordinate_field(const SpatialGrid& grid, int axis) {
  RealField f(grid.num_nodes());
  for (int node = 0; node < grid.num_nodes(); ++node) f[node] = grid.coords(node)[axis];
  return f;
}

}  // namespace

ProbeSuite build_probes(const SpatialGrid& grid, const CoefficientSet& baseline, double alpha,
                        int order, const TimeGrid& times) {
  if (!(alpha > 0.0)) throw std::invalid_argument("build_probes: alpha must be positive");
  ProbeSuite suite;
  suite.alpha = alpha;
  suite.order = order;

  auto add = [&](const ComplexField& up, const ComplexField& um, double constant, int axis) {
    Probe pr;
    pr.u0 = {up, um};
    pr.constant = constant;
    pr.coordinate_axis = axis;
    pr.g = compatibility_boundary_data(grid, pr.u0, baseline, order, times);
    suite.probes.push_back(std::move(pr));
  };

  const ComplexField zero = ComplexField::Zero(grid.num_nodes());
  const ComplexField alpha_field = ComplexField::Constant(grid.num_nodes(), Complex(alpha, 0));
  add(zero, alpha_field, alpha, -1);
  add(alpha_field, zero, alpha, -1);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const ComplexField xk = coordinate_field(grid, axis).cast<Complex>();
    add(xk, xk, 0.0, axis);
  }
  return suite;
}

ProbeMatrixReport probe_gradient_matrices(const SpatialGrid& grid, const ProbeSuite& probes) {
  const int n = grid.dim();
  ProbeMatrixReport rep;
  rep.u0_plus = Eigen::MatrixXd::Zero(n, n);
  rep.u0_minus = Eigen::MatrixXd::Zero(n, n);
  rep.min_singular_plus = rep.min_singular_minus = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd node_plus(n, n), node_minus(n, n);
  for (int node : grid.interior()) {
    for (int k = 0; k < n; ++k) {
      const auto& u0 = probes.probes[static_cast<size_t>(k) + 2].u0;
      for (int l = 0; l < n; ++l) {
        node_plus(k, l) = deriv1_at(grid, u0.up, node, l).real();
        node_minus(k, l) = deriv1_at(grid, u0.um, node, l).real();
      }
    }
    rep.u0_plus += node_plus;
    rep.u0_minus += node_minus;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_p(node_plus), svd_m(node_minus);
    rep.min_singular_plus =
        std::min(rep.min_singular_plus, svd_p.singularValues().minCoeff());
    rep.min_singular_minus =
        std::min(rep.min_singular_minus, svd_m.singularValues().minCoeff());
  }
  const double cnt = static_cast<double>(grid.interior().size());
  rep.u0_plus /= cnt;
  rep.u0_minus /= cnt;
  return rep;
}

StabilityReport run_pair_experiment(const SpatialGrid& grid, const CoefficientSet& coeffs1,
                                    const CoefficientSet& coeffs2, const ProbeSuite& probes,
                                    const ObservationBoundary& obs, double dt, int steps) {
  StabilityReport rep;
  rep.dt = dt;
  rep.grid_desc = grid.dim() == 1 ? std::to_string(grid.nodes(0))
                                  : std::to_string(grid.nodes(0)) + "x" +
                                        std::to_string(grid.nodes(1));

  auto sq = [](double v) { return v * v; };
  rep.lhs = sq(grid.l2_norm(RealField(coeffs1.p - coeffs2.p))) +
            sq(grid.l2_norm(RealField(coeffs1.qplus - coeffs2.qplus))) +
            sq(grid.l2_norm(RealField(coeffs1.qminus - coeffs2.qminus))) +
            sq(grid.l2_norm(RealField(coeffs1.A1 - coeffs2.A1)));
  if (grid.dim() == 2) rep.lhs += sq(grid.l2_norm(RealField(coeffs1.A2 - coeffs2.A2)));

  for (const auto& probe : probes.probes) {
    const TwoStateTrajectory t1 = solve_ibvp(grid, coeffs1, probe.u0, probe.g, nullptr, dt, steps);
    const TwoStateTrajectory t2 = solve_ibvp(grid, coeffs2, probe.u0, probe.g, nullptr, dt, steps);
    const ObservationTrace o1 = observe(grid, t1, obs);
    const ObservationTrace o2 = observe(grid, t2, obs);
    for (int j = 0; j < o1.times.count; ++j) {
      const double tw = trapezoid_weight(o1.times, j);
      for (size_t b = 0; b < obs.trace_nodes.size(); ++b) {
        rep.rhs_raw += tw * obs.trace_weights[b] *
                       (std::norm(o1.dplus(b, j) - o2.dplus(b, j)) +
                        std::norm(o1.dminus(b, j) - o2.dminus(b, j)));
      }
    }
  }
  if (rep.rhs_raw > 0.0) rep.ratio = rep.lhs / rep.rhs_raw;
  return rep;
}

std::vector<StabilityReport> stability_scaling_study(
    const SpatialGrid& grid, const CoefficientSet& baseline,
    const std::vector<double>& amplitudes, const std::vector<std::uint64_t>& seeds,
    const ProbeSuite& probes, const ObservationBoundary& obs, double dt, int steps) {
  std::vector<StabilityReport> rows;
  rows.reserve(amplitudes.size() * seeds.size());
  for (double a : amplitudes) {
    if (a < 0.0) throw std::invalid_argument("stability study: amplitudes must be >= 0");
    for (std::uint64_t seed : seeds) {
      const CoefficientSet perturbed = sample_admissible_perturbation(grid, baseline, a, seed);
      StabilityReport rep = run_pair_experiment(grid, perturbed, baseline, probes, obs, dt, steps);
      rep.amplitude = a;
      rep.seed = seed;
      rows.push_back(std::move(rep));
    }
  }
  return rows;
}

TwoStateField snapshot_v0(const SpatialGrid& grid, const CoefficientSet& coeffs1,
                          const CoefficientSet& coeffs2, const Probe& probe, double dt) {
  const TwoStateTrajectory t1 = solve_ibvp(grid, coeffs1, probe.u0, probe.g, nullptr, dt, 2);
  const TwoStateTrajectory t2 = solve_ibvp(grid, coeffs2, probe.u0, probe.g, nullptr, dt, 2);
  TwoStateField v0;
  auto diff = [&](int j) {
    return TwoStateField{t1.states[j].up - t2.states[j].up, t1.states[j].um - t2.states[j].um};
  };
  const TwoStateField w0 = diff(0), w1 = diff(1), w2 = diff(2);
  v0.up = (-3.0 * w0.up + 4.0 * w1.up - w2.up) / (2.0 * dt);
  v0.um = (-3.0 * w0.um + 4.0 * w1.um - w2.um) / (2.0 * dt);
  return v0;
}

ReconstructionResult linearized_reconstruct(const SpatialGrid& grid,
                                            const std::vector<TwoStateField>& snapshots,
                                            const ProbeSuite& probes) {
  const size_t expected = static_cast<size_t>(grid.dim()) + 2;
  if (snapshots.size() != expected || probes.probes.size() != expected) {
    throw std::invalid_argument("linearized_reconstruct: need one snapshot per probe");
  }
  const double alpha = probes.alpha;
  for (int k = 0; k < 2; ++k) {
    if (std::abs(probes.probes[k].constant) < alpha) {
      throw std::invalid_argument("linearized_reconstruct: constant probe below alpha");
    }
  }

  const ComplexField p_c = (kI / alpha) * snapshots[0].up;
  const ComplexField qminus_c = (kI / alpha) * snapshots[0].um;
  const ComplexField qplus_c = (kI / alpha) * snapshots[1].up;
  const ComplexField p_alt_c = (kI / alpha) * snapshots[1].um;

  ReconstructionResult rec;
  rec.p = p_c.real();
  rec.qplus = qplus_c.real();
  rec.qminus = qminus_c.real();

  std::vector<const ComplexField*> recovered = {&p_c, &qminus_c, &qplus_c};

  const double p_scale = std::max({grid.l2_norm(rec.p), grid.l2_norm(RealField(p_alt_c.real())),
                                   1e-300});
  rec.p_crosscheck_rel = grid.l2_norm(RealField((p_c - p_alt_c).real())) / p_scale;

  std::vector<ComplexField> a_fields;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const auto& snap = snapshots[static_cast<size_t>(axis) + 2];
    const ComplexField xk = coordinate_field(grid, axis).cast<Complex>();
    a_fields.push_back(kI * snap.up - (p_c + qplus_c).cwiseProduct(xk));
    const ComplexField& a_c = a_fields.back();
    const ComplexField a_alt_c = -(kI * snap.um - (p_c + qminus_c).cwiseProduct(xk));
    rec.A[axis] = a_c.real();
    const double a_scale = std::max(
        {grid.l2_norm(rec.A[axis]), grid.l2_norm(RealField(a_alt_c.real())), 1e-300});
    rec.A_crosscheck_rel[axis] =
        grid.l2_norm(RealField((a_c - a_alt_c).real())) / a_scale;
  }
  for (const auto& a : a_fields) recovered.push_back(&a);

  // imaginary residual against the overall recovered scale, so that fields
  // recovered as ~0 do not blow up the ratio
  double re_scale = 1e-300, im_worst = 0.0;
  for (const ComplexField* f : recovered) {
    re_scale = std::max(re_scale, grid.l2_norm(RealField(f->real())));
  }
  for (const ComplexField* f : recovered) {
    im_worst = std::max(im_worst, grid.l2_norm(RealField(f->imag())));
  }
  rec.imag_residual_rel = im_worst / re_scale;
  return rec;
}

double ReconstructionErrors::worst() const {
  return std::max({p, qplus, qminus, A[0], A[1]});
}

ReconstructionErrors reconstruction_errors(const SpatialGrid& grid,
                                           const ReconstructionResult& rec,
                                           const CoefficientSet& coeffs1,
                                           const CoefficientSet& coeffs2) {
  auto rel = [&](const RealField& got, const RealField& truth) {
    const double tn = grid.l2_norm(truth);
    const double err = grid.l2_norm(RealField(got - truth));
    return tn > 0.0 ? err / tn : err;
  };
  ReconstructionErrors e;
  e.p = rel(rec.p, coeffs1.p - coeffs2.p);
  e.qplus = rel(rec.qplus, coeffs1.qplus - coeffs2.qplus);
  e.qminus = rel(rec.qminus, coeffs1.qminus - coeffs2.qminus);
  e.A[0] = rel(rec.A[0], coeffs1.A1 - coeffs2.A1);
  if (grid.dim() == 2) e.A[1] = rel(rec.A[1], coeffs1.A2 - coeffs2.A2);
  return e;
}

double weighted_mu(const CarlemanWeights& weights, double s, const ObservationTrace& a,
                   const ObservationTrace& b, const ObservationBoundary& obs) {
  if (a.times.count != b.times.count || a.nodes != b.nodes) {
    throw std::invalid_argument("weighted_mu: traces are not comparable");
  }
  double mu = 0.0;
  for (int j = 0; j < a.times.count; ++j) {
    const double t = a.times.time(j);
    const double tw = trapezoid_weight(a.times, j);
    for (size_t k = 0; k < obs.trace_nodes.size(); ++k) {
      const auto& bn = obs.trace_nodes[k];
      const double w = weights.weight(bn.node, t, s);
      if (w == 0.0) continue;
      mu += tw * obs.trace_weights[k] * w * w * weights.phi(bn.node, t) *
            weights.dbeta_dnu(bn) *
            (std::norm(a.dplus(k, j) - b.dplus(k, j)) +
             std::norm(a.dminus(k, j) - b.dminus(k, j)));
    }
  }
  return 2.0 * mu;
}

void write_stability_csv(const std::string& path, const std::vector<StabilityReport>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "seed,amplitude,lhs,rhs_raw,ratio,grid,dt\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,",
                  static_cast<unsigned long long>(r.seed), r.amplitude, r.lhs, r.rhs_raw);
    os << buf;
    if (r.ratio) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.ratio);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%s,%.17g\n", r.grid_desc.c_str(), r.dt);
    os << buf;
  }
}

}  // namespace tss
