#include "tss/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace tss {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

void require_outside(const SpatialGrid& grid, const std::array<double, 2>& x0) {
  const auto& dom = grid.domain();
  bool inside = true;
  for (int a = 0; a < dom.dim; ++a) inside = inside && x0[a] >= dom.lo[a] && x0[a] <= dom.hi[a];
  if (inside) throw std::invalid_argument("carleman: x0 must lie outside the closed domain");
}

double distance_to_box(const SpatialGrid& grid, const std::array<double, 2>& x0) {
  const auto& dom = grid.domain();
  double d2 = 0.0;
  for (int a = 0; a < dom.dim; ++a) {
    const double d = std::max({dom.lo[a] - x0[a], 0.0, x0[a] - dom.hi[a]});
    d2 += d * d;
  }
  return std::sqrt(d2);
}

}  // namespace

SpaceTimeField SpaceTimeField::zero(const SpatialGrid& grid, const TimeGrid& times) {
  SpaceTimeField f;
  f.slices.assign(times.count, ComplexField::Zero(grid.num_nodes()));
  return f;
}

CarlemanWeights CarlemanWeights::build(const SpatialGrid& grid, const WeightConfig& cfg,
                                       const TimeGrid& times) {
  require_outside(grid, cfg.x0);
  if (!(cfg.r > 1.0)) throw std::invalid_argument("carleman: need r > 1");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("carleman: need lambda > 0");
  const double t_end = std::max(std::abs(times.time(0)), std::abs(times.back()));
  if (t_end >= cfg.t_horizon * (1.0 - 1e-12)) {
    throw std::invalid_argument("carleman: time nodes must lie strictly inside (-T, T)");
  }

  CarlemanWeights w;
  w.grid_ = grid;
  w.cfg_ = cfg;
  w.times_ = times;
  w.beta_.resize(grid.num_nodes());
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto x = grid.coords(node);
    double bt = 0.0;
    for (int a = 0; a < grid.dim(); ++a) bt += (x[a] - cfg.x0[a]) * (x[a] - cfg.x0[a]);
    w.beta_[node] = bt;
  }
  w.offset_ = cfg.r * w.beta_.maxCoeff();
  w.beta_.array() += w.offset_;
  w.k_ = w.beta_.maxCoeff();
  if (2.0 * cfg.lambda * w.k_ > 700.0) {
    throw std::invalid_argument("carleman: lambda * sup(beta) too large, e^{2 lambda K} overflows");
  }
  const double e2lk = std::exp(2.0 * cfg.lambda * w.k_);
  w.exp_lb_ = (cfg.lambda * w.beta_.array()).exp().matrix();
  w.numer_ = (e2lk - w.exp_lb_.array()).matrix();
  w.eta_min_ = (e2lk - std::exp(cfg.lambda * w.k_)) / (cfg.t_horizon * cfg.t_horizon);
  return w;
}

double CarlemanWeights::rho(double t) const {
  // T^2 - t^2 rather than (T+t)(T-t): exactly even in t
  return cfg_.t_horizon * cfg_.t_horizon - t * t;
}

double CarlemanWeights::eta(int node, double t) const { return numer_[node] / rho(t); }

double CarlemanWeights::phi(int node, double t) const {
  return exp_lb_[node] * exp_lb_[node] / rho(t);
}

double CarlemanWeights::eta_t(int node, double t) const {
  const double r = rho(t);
  return numer_[node] * 2.0 * t / (r * r);
}

std::array<double, 2> CarlemanWeights::grad_beta(int node) const {
  const auto x = grid_.coords(node);
  return {2.0 * (x[0] - cfg_.x0[0]), grid_.dim() == 2 ? 2.0 * (x[1] - cfg_.x0[1]) : 0.0};
}

std::array<double, 2> CarlemanWeights::grad_eta(int node, double t) const {
  const double c = -cfg_.lambda * exp_lb_[node] / rho(t);
  const auto gb = grad_beta(node);
  return {c * gb[0], c * gb[1]};
}

double CarlemanWeights::grad_eta_sq(int node, double t) const {
  const auto g = grad_eta(node, t);
  return g[0] * g[0] + g[1] * g[1];
}

double CarlemanWeights::lap_eta(int node, double t) const {
  const auto gb = grad_beta(node);
  const double gb2 = gb[0] * gb[0] + gb[1] * gb[1];
  const double lap_b = 2.0 * grid_.dim();
  return -cfg_.lambda * exp_lb_[node] * (cfg_.lambda * gb2 + lap_b) / rho(t);
}

double CarlemanWeights::weight(int node, double t, double s) const {
  const double r = rho(t);
  if (r <= 0.0) return 0.0;
  return std::exp(-s * (numer_[node] / r - eta_min_));
}

double CarlemanWeights::weight0(int node, double s) const {
  return std::exp(-s * (eta0(node) - eta_min_));
}

double CarlemanWeights::dbeta_dnu(const BoundaryNode& bn) const {
  const auto gb = grad_beta(bn.node);
  return gb[0] * bn.normal[0] + gb[1] * bn.normal[1];
}

Assumption1Report verify_assumption1(const CarlemanWeights& weights,
                                     const ObservationBoundary& gammastar, int num_zeta,
                                     std::uint64_t seed) {
  const auto& grid = weights.grid();
  Assumption1Report rep;
  rep.required_grad_norm = 2.0 * distance_to_box(grid, weights.config().x0);

  rep.min_grad_norm = std::numeric_limits<double>::infinity();
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const auto gb = weights.grad_beta(node);
    rep.min_grad_norm = std::min(rep.min_grad_norm, std::hypot(gb[0], gb[1]));
  }

  std::vector<char> in_star(grid.num_nodes(), 0);
  for (int node : gammastar.selected) in_star[node] = 1;
  rep.max_dnu_off_gamma = -std::numeric_limits<double>::infinity();
  for (const auto& bn : grid.boundary()) {
    if (in_star[bn.node]) continue;
    rep.max_dnu_off_gamma = std::max(rep.max_dnu_off_gamma, weights.dbeta_dnu(bn));
  }

  // condition (3): lambda |grad beta~ . zeta|^2 + D^2 beta~(zeta,zeta) over unit zeta;
  // the Hessian of |x-x0|^2 is 2 I, sampled here rather than assumed
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, grid.num_nodes() - 1);
  rep.min_condition3_margin = std::numeric_limits<double>::infinity();
  const double lambda = weights.config().lambda;
  for (int k = 0; k < num_zeta; ++k) {
    std::array<double, 2> zeta{uni(rng), grid.dim() == 2 ? uni(rng) : 0.0};
    const double nz = std::hypot(zeta[0], zeta[1]);
    if (nz < 1e-9) continue;
    zeta[0] /= nz;
    zeta[1] /= nz;
    const auto gb = weights.grad_beta(pick(rng));
    const double dot = gb[0] * zeta[0] + gb[1] * zeta[1];
    const double hess = 2.0 * (zeta[0] * zeta[0] + zeta[1] * zeta[1]);
    rep.min_condition3_margin =
        std::min(rep.min_condition3_margin, lambda * dot * dot + hess);
  }

  rep.pass = rep.min_grad_norm > 0.0 && rep.min_grad_norm >= rep.required_grad_norm - 1e-9 &&
             rep.max_dnu_off_gamma < 0.0 && rep.min_condition3_margin >= 2.0 - 1e-6;
  return rep;
}

namespace {

void check_shape(const CarlemanWeights& w, const SpaceTimeField& f, const char* who) {
  if (static_cast<int>(f.slices.size()) != w.times().count) {
    throw std::invalid_argument(std::string(who) + ": time slice count mismatch");
  }
  for (const auto& s : f.slices) {
    if (s.size() != w.grid().num_nodes()) {
      throw std::invalid_argument(std::string(who) + ": slice size mismatch");
    }
  }
}

ComplexField laplacian_slice(const SpatialGrid& grid, const ComplexField& f) {
  ComplexField out = ComplexField::Zero(grid.num_nodes());
  for (int node : grid.interior()) {
    Complex v = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) v += deriv2_at(grid, f, node, axis);
    out[node] = v;
  }
  return out;
}

}  // namespace

SpaceTimeField apply_M1(const CarlemanWeights& weights, double s, const SpaceTimeField& w) {
  check_shape(weights, w, "apply_M1");
  const auto& grid = weights.grid();
  const auto& tg = weights.times();
  SpaceTimeField out = SpaceTimeField::zero(grid, tg);
  for (int j = 1; j + 1 < tg.count; ++j) {
    const double t = tg.time(j);
    const ComplexField lap = laplacian_slice(grid, w.slices[j]);
    for (int node : grid.interior()) {
      const Complex dt = (w.slices[j + 1][node] - w.slices[j - 1][node]) / (2.0 * tg.dt);
      out.slices[j][node] =
          kI * dt + lap[node] + s * s * weights.grad_eta_sq(node, t) * w.slices[j][node];
    }
  }
  return out;
}

SpaceTimeField apply_M2(const CarlemanWeights& weights, double s, const SpaceTimeField& w) {
  check_shape(weights, w, "apply_M2");
  const auto& grid = weights.grid();
  const auto& tg = weights.times();
  SpaceTimeField out = SpaceTimeField::zero(grid, tg);
  for (int j = 1; j + 1 < tg.count; ++j) {
    const double t = tg.time(j);
    for (int node : grid.interior()) {
      const auto ge = weights.grad_eta(node, t);
      Complex adv = 0;
      for (int axis = 0; axis < grid.dim(); ++axis) {
        adv += ge[axis] * deriv1_at(grid, w.slices[j], node, axis);
      }
      out.slices[j][node] = kI * s * weights.eta_t(node, t) * w.slices[j][node] +
                            2.0 * s * adv + s * weights.lap_eta(node, t) * w.slices[j][node];
    }
  }
  return out;
}

SpaceTimeField weighted(const CarlemanWeights& weights, double s, const SpaceTimeField& w) {
  check_shape(weights, w, "weighted");
  SpaceTimeField out = w;
  const auto& tg = weights.times();
  for (int j = 0; j < tg.count; ++j) {
    const double t = tg.time(j);
    for (int node = 0; node < weights.grid().num_nodes(); ++node) {
      out.slices[j][node] *= weights.weight(node, t, s);
    }
  }
  return out;
}

EnergyInequalitySides corollary_check(const CarlemanWeights& weights, double s,
                                      const SpaceTimeField& z, const SpaceTimeField& lz,
                                      const ObservationBoundary& gammastar) {
  check_shape(weights, z, "corollary_check(z)");
  check_shape(weights, lz, "corollary_check(Lz)");
  if (!(s > 0.0)) throw std::invalid_argument("corollary_check: need s > 0");
  const auto& grid = weights.grid();
  const auto& tg = weights.times();
  const RealField& qw = grid.quad_weights();

  double zz = 0, gg = 0, src = 0, bdry = 0;
  for (int j = 0; j < tg.count; ++j) {
    const double t = tg.time(j);
    const ComplexField& zi = z.slices[j];
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const double w2 = std::pow(weights.weight(node, t, s), 2) * qw[node] * tg.dt;
      if (w2 == 0.0) continue;
      zz += w2 * std::norm(zi[node]);
      src += w2 * std::norm(lz.slices[j][node]);
      double g2 = 0;
      for (int axis = 0; axis < grid.dim(); ++axis) g2 += std::norm(deriv1_at(grid, zi, node, axis));
      gg += w2 * g2;
    }
    for (size_t b = 0; b < gammastar.trace_nodes.size(); ++b) {
      const auto& bn = gammastar.trace_nodes[b];
      const double dnu_beta = weights.dbeta_dnu(bn);
      if (dnu_beta < 0.0) {
        throw std::invalid_argument(
            "corollary_check: negative d_nu beta on Gamma_* (inconsistent x0)");
      }
      const double w = weights.weight(bn.node, t, s);
      if (w == 0.0) continue;
      const Complex dnu_z = neumann_trace_at(grid, zi, bn);
      bdry += gammastar.trace_weights[b] * tg.dt * w * w * weights.phi(bn.node, t) * dnu_beta *
              std::norm(dnu_z);
    }
  }

  double z0 = 0;
  const int j0 = tg.zero_index();
  for (int node = 0; node < grid.num_nodes(); ++node) {
    z0 += qw[node] * std::pow(weights.weight0(node, s), 2) * std::norm(z.slices[j0][node]);
  }

  EnergyInequalitySides sides;
  sides.boundary_term = bdry;
  sides.source_term = src;
  sides.lhs = (zz + gg) / std::sqrt(s) + z0;
  sides.rhs = (s * bdry + src) / std::pow(s, 1.5);
  return sides;
}

std::vector<ScanRow> empirical_constant_scan(const CarlemanWeights& weights,
                                             const std::vector<ScanMember>& family,
                                             const std::vector<double>& s_values,
                                             const ObservationBoundary& gammastar) {
  if (family.empty()) throw std::invalid_argument("empirical_constant_scan: empty family");
  std::vector<ScanRow> rows;
  rows.reserve(s_values.size());
  for (double s : s_values) {
    ScanRow row;
    row.s = s;
    for (const auto& member : family) {
      const auto sides = corollary_check(weights, s, member.z, member.lz, gammastar);
      if (sides.rhs == 0.0) {
        if (sides.lhs > 0.0) {
          row.counterexample = true;
          row.argmax_id = member.id;
          row.worst_ratio = std::numeric_limits<double>::infinity();
        }
        continue;
      }
      const double ratio = sides.lhs / sides.rhs;
      if (ratio > row.worst_ratio) {
        row.worst_ratio = ratio;
        row.argmax_id = member.id;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScanMember> make_scan_family(const SpatialGrid& grid, const TimeGrid& times,
                                         int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(1, 3);
  const auto& dom = grid.domain();

  std::vector<ScanMember> family;
  family.reserve(count);
  for (int m = 0; m < count; ++m) {
    ScanMember member;
    member.id = "m" + std::to_string(m);
    member.z = SpaceTimeField::zero(grid, times);
    member.lz = SpaceTimeField::zero(grid, times);
    for (int term = 0; term < 3; ++term) {
      const Complex c(uni(rng), uni(rng));
      const int kx = mode(rng);
      const int ky = grid.dim() == 2 ? mode(rng) : 0;
      const double omega = 10.0 * uni(rng);
      double kappa2 = std::pow(kx * kPi / (dom.hi[0] - dom.lo[0]), 2);
      if (grid.dim() == 2) kappa2 += std::pow(ky * kPi / (dom.hi[1] - dom.lo[1]), 2);

      ComplexField shape(grid.num_nodes());
      for (int node = 0; node < grid.num_nodes(); ++node) {
        const auto x = grid.coords(node);
        double v = std::sin(kx * kPi * (x[0] - dom.lo[0]) / (dom.hi[0] - dom.lo[0]));
        if (grid.dim() == 2) {
          v *= std::sin(ky * kPi * (x[1] - dom.lo[1]) / (dom.hi[1] - dom.lo[1]));
        }
        shape[node] = v;
      }
      for (int j = 0; j < times.count; ++j) {
        const Complex phase = c * std::exp(kI * omega * times.time(j));
        member.z.slices[j] += phase * shape;
        member.lz.slices[j] += (-omega - kappa2) * phase * shape;
      }
    }
    family.push_back(std::move(member));
  }
  return family;
}

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "s,worst_ratio,argmax_member_id\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", row.s, row.worst_ratio);
    os << buf << row.argmax_id << '\n';
  }
}

}  // namespace tss
