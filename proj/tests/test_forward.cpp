#include <doctest.h>

#include "tss/forward.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace tss;

namespace {

const Domain kInterval{1, {0, 0}, {1, 1}, 0.5};
const Domain kSquare{2, {0, 0}, {1, 1}, 0.5};

CoefficientSet seeded_admissible(const SpatialGrid& g, std::uint64_t seed) {
  CoefficientSet base = zero_coefficients(g, 1.0);
  base.p = constant_field(g, 0.2);
  base.qplus = constant_field(g, 0.3);
  base.qminus = constant_field(g, -0.1);
  auto a = make_divergence_free(g, {0.25, -0.15});
  base.A1 = a[0];
  if (g.dim() == 2) base.A2 = a[1];
  return sample_admissible_perturbation(g, base, 0.2, seed);
}

}  // namespace

TEST_CASE("free Hamiltonian: smallest eigenvalue is the discrete pi^2") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {101, 1});
  const auto ham = assemble_hamiltonian(g, zero_coefficients(g, 1.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(ham.interior));
  const double lam = es.eigenvalues().minCoeff();
  const double h = g.spacing(0);
  const double discrete = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
  CHECK(lam == doctest::Approx(discrete).epsilon(1e-10));
  CHECK(std::abs(lam - M_PI * M_PI) < 2e-3);  // O(h^2) gap to the continuum eigenvalue
}

TEST_CASE("assembled interior operator is Hermitian for admissible sets") {
  for (int dim : {1, 2}) {
    const SpatialGrid g = dim == 1 ? SpatialGrid::build(kInterval, {81, 1})
                                   : SpatialGrid::build(kSquare, {31, 31});
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
      const auto ham = assemble_hamiltonian(g, seeded_admissible(g, seed));
      CHECK(ham.divergence_clean);
      CHECK(hermiticity_defect(ham) <= 1e-12);
    }
  }
}

TEST_CASE("non-divergence-free A breaks Hermiticity and is flagged") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {81, 1});
  CoefficientSet bad = zero_coefficients(g, 2.0);
  for (int i = 0; i < g.num_nodes(); ++i) bad.A1[i] = g.coords(i)[0];  // div = 1
  const auto ham = assemble_hamiltonian(g, bad);
  CHECK_FALSE(ham.divergence_clean);
  CHECK(hermiticity_defect(ham) > 1e-12);
}

TEST_CASE("p-only coupling swaps components") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {41, 1});
  CoefficientSet c = zero_coefficients(g, 1.0);
  c.p = constant_field(g, 0.7);
  const auto ham = assemble_hamiltonian(g, c);
  const auto lap = assemble_hamiltonian(g, zero_coefficients(g, 1.0));

  ComplexField u = ComplexField::Zero(2 * g.num_nodes());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int node : g.interior()) u[node] = Complex(uni(rng), uni(rng));  // (u, 0)

  const ComplexField hu = ham.full * u;
  const ComplexField lu = lap.full * u;
  for (int node : g.interior()) {
    // first component feels only -Delta, second is exactly p * u
    CHECK(std::abs(hu[node] - lu[node]) == 0.0);
    CHECK(std::abs(hu[g.num_nodes() + node] - 0.7 * u[node]) < 1e-14);
  }
}

TEST_CASE("relative bound: free case is exact and admissible sets never violate") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {61, 1});
  const auto free_rep = check_relative_bound(g, zero_coefficients(g, 1.0), 0.5, 20, 1);
  CHECK(free_rep.c_eps == 0.0);
  CHECK(free_rep.pass);
  CHECK(free_rep.max_violation <= 0.0);

  const auto rep = check_relative_bound(g, seeded_admissible(g, 7), 0.5, 200, 2);
  CHECK(rep.pass);
  const auto rep_tight = check_relative_bound(g, seeded_admissible(g, 8), 0.1, 200, 3);
  CHECK(rep_tight.pass);
  CHECK_THROWS_AS(check_relative_bound(g, seeded_admissible(g, 7), 1.5, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("pure q coupling obeys the explicit multiplication bound") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {61, 1});
  CoefficientSet c = zero_coefficients(g, 1.0);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double x = g.coords(i)[0];
    c.qplus[i] = 0.4 * std::sin(M_PI * x);
    c.qminus[i] = -0.6 * std::cos(2 * M_PI * x);
  }
  const auto ham = assemble_hamiltonian(g, c);
  const auto lap = assemble_hamiltonian(g, zero_coefficients(g, 1.0));
  const Eigen::SparseMatrix<Complex> coupling = ham.interior - lap.interior;
  const double bound = std::sqrt(std::pow(c.qplus.cwiseAbs().maxCoeff(), 2) +
                                 std::pow(c.qminus.cwiseAbs().maxCoeff(), 2));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    ComplexField u(coupling.rows());
    for (int k = 0; k < u.size(); ++k) u[k] = Complex(uni(rng), uni(rng));
    CHECK((coupling * u).norm() <= bound * u.norm() * (1 + 1e-12));
  }
}

TEST_CASE("compatibility data: construction matches (-i)^l H^l u0 traces exactly") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {41, 1});
  CoefficientSet base = zero_coefficients(g, 1.0);
  base.p = constant_field(g, 0.35);
  base.qplus = constant_field(g, 0.2);
  base.qminus = constant_field(g, -0.5);
  base.A1 = constant_field(g, 0.15);

  TwoStateField u0 = TwoStateField::zero(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double x = g.coords(i)[0];
    u0.up[i] = std::cos(M_PI * x) + 2.0;
    u0.um[i] = x * x + 1.0;
  }
  const TimeGrid tg = TimeGrid::forward(0.5, 20);
  const BoundaryData gdata = compatibility_boundary_data(g, u0, base, 2, tg);

  // l-th time derivatives at t = 0 via stencils exact on quadratics
  const double dt = tg.dt;
  const auto& bn = g.boundary();
  TwoStateField w = u0;
  Complex fac(1, 0);
  for (int l = 0; l <= 2; ++l) {
    for (size_t b = 0; b < bn.size(); ++b) {
      Complex got_p, got_m;
      if (l == 0) {
        got_p = gdata.gplus(b, 0);
        got_m = gdata.gminus(b, 0);
      } else if (l == 1) {
        got_p = (-3.0 * gdata.gplus(b, 0) + 4.0 * gdata.gplus(b, 1) - gdata.gplus(b, 2)) /
                (2 * dt);
        got_m = (-3.0 * gdata.gminus(b, 0) + 4.0 * gdata.gminus(b, 1) - gdata.gminus(b, 2)) /
                (2 * dt);
      } else {
        got_p = (2.0 * gdata.gplus(b, 0) - 5.0 * gdata.gplus(b, 1) + 4.0 * gdata.gplus(b, 2) -
                 gdata.gplus(b, 3)) /
                (dt * dt);
        got_m = (2.0 * gdata.gminus(b, 0) - 5.0 * gdata.gminus(b, 1) +
                 4.0 * gdata.gminus(b, 2) - gdata.gminus(b, 3)) /
                (dt * dt);
      }
      const Complex want_p = fac * w.up[bn[b].node];
      const Complex want_m = fac * w.um[bn[b].node];
      CHECK(std::abs(got_p - want_p) < 1e-8 * std::max(1.0, std::abs(want_p)));
      CHECK(std::abs(got_m - want_m) < 1e-8 * std::max(1.0, std::abs(want_m)));
    }
    if (l < 2) {
      w = apply_operator_everywhere(g, base, w);
      fac *= Complex(0, -1);
    }
  }
}

TEST_CASE("compatibility data: order 0 is constant in time; kernel states stay constant") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {21, 1});
  const CoefficientSet zero = zero_coefficients(g, 1.0);
  TwoStateField u0 = TwoStateField::zero(g);
  u0.up.setConstant(Complex(1.5, 0));
  u0.um.setConstant(Complex(-0.5, 0));

  const TimeGrid tg = TimeGrid::forward(0.5, 10);
  const BoundaryData g0 = compatibility_boundary_data(g, u0, zero, 0, tg);
  const BoundaryData g2 = compatibility_boundary_data(g, u0, zero, 2, tg);
  for (int j = 0; j < tg.count; ++j) {
    CHECK(std::abs(g0.gplus(0, j) - Complex(1.5, 0)) == 0.0);
    // H u0 = 0 for constants with zero coefficients, so any order stays flat
    CHECK(std::abs(g2.gplus(0, j) - Complex(1.5, 0)) < 1e-13);
    CHECK(std::abs(g2.gminus(0, j) - Complex(-0.5, 0)) < 1e-13);
  }
  CHECK_THROWS_AS(compatibility_boundary_data(g, u0, zero, -1, tg), std::invalid_argument);
}

TEST_CASE("compatibility data: constant (0, c) initial state sees -i p0 c in dg+/dt") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {21, 1});
  CoefficientSet base = zero_coefficients(g, 1.0);
  base.p = constant_field(g, 0.4);
  const double c = 2.0;
  TwoStateField u0 = TwoStateField::zero(g);
  u0.um.setConstant(Complex(c, 0));

  const TimeGrid tg = TimeGrid::forward(0.5, 10);
  const BoundaryData gd = compatibility_boundary_data(g, u0, base, 1, tg);
  // coefficient of t in g+ is (-i) (H u0)+ = -i p0 c
  const Complex slope = gd.coeff_plus[1][0];
  CHECK(std::abs(slope - Complex(0, -0.4 * c)) < 1e-13);
}

TEST_CASE("eigenmode evolution matches e^{-i pi^2 t} sin(pi x) at the spec resolution") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {101, 1});
  const CoefficientSet zero = zero_coefficients(g, 1.0);
  const int steps = 200;
  const double t_end = 0.5;

  TwoStateField u0 = TwoStateField::zero(g);
  for (int i = 0; i < g.num_nodes(); ++i) u0.up[i] = std::sin(M_PI * g.coords(i)[0]);

  const BoundaryData gd = BoundaryData::zero(g, TimeGrid::forward(t_end, steps));
  const auto traj = solve_ibvp(g, zero, u0, gd, nullptr, t_end / steps, steps);

  double worst = 0.0;
  for (int j = 0; j <= steps; ++j) {
    const Complex phase = std::exp(Complex(0, -M_PI * M_PI * traj.times.time(j)));
    worst = std::max(worst, g.l2_norm(ComplexField(traj.states[j].up - phase * u0.up)));
    worst = std::max(worst, g.l2_norm(traj.states[j].um));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("homogeneous-Dirichlet evolution conserves the discrete norm") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {101, 1});
  const CoefficientSet coeffs = seeded_admissible(g, 11);
  const int steps = 200;

  TwoStateField u0 = TwoStateField::zero(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double x = g.coords(i)[0];
    u0.up[i] = std::sin(M_PI * x);
    u0.um[i] = Complex(0.3, 0.1) * std::sin(2 * M_PI * x);
  }
  const BoundaryData gd = BoundaryData::zero(g, TimeGrid::forward(0.5, steps));
  const auto traj = solve_ibvp(g, coeffs, u0, gd, nullptr, 0.5 / steps, steps);

  const double n0 = l2_norm(g, traj.states.front());
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(l2_norm(g, s) - n0));
  CHECK(drift / n0 <= 1e-8);
}

TEST_CASE("manufactured solution converges at order >= 1.9 in 1D and 2D") {
  SUBCASE("1D") {
    const ManufacturedCase mc{kInterval, {0.25, 0}, 0.2, 0.3, -0.1};
    const MmsStudy study = manufactured_convergence(mc, {41, 1}, 40, 3);
    REQUIRE(study.orders.size() == 2);
    CHECK(study.orders[0] >= 1.9);
    CHECK(study.orders[1] >= 1.9);
  }
  SUBCASE("2D") {
    const ManufacturedCase mc{kSquare, {0.25, -0.15}, 0.2, 0.3, -0.1};
    const MmsStudy study = manufactured_convergence(mc, {17, 17}, 24, 3);
    REQUIRE(study.orders.size() == 2);
    CHECK(study.orders[0] >= 1.9);
    CHECK(study.orders[1] >= 1.9);
  }
}

TEST_CASE("solver rejects boundary data that contradicts the initial state") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {21, 1});
  const CoefficientSet zero = zero_coefficients(g, 1.0);
  TwoStateField u0 = TwoStateField::zero(g);
  u0.up.setConstant(Complex(1, 0));  // nonzero trace, but g = 0
  const BoundaryData gd = BoundaryData::zero(g, TimeGrid::forward(0.5, 10));
  CHECK_THROWS_AS(solve_ibvp(g, zero, u0, gd, nullptr, 0.05, 10), std::invalid_argument);
}

TEST_CASE("observation traces: zero fields, determinism, manufactured convergence") {
  const ManufacturedCase mc{kInterval, {0.25, 0}, 0.2, 0.3, -0.1};

  SUBCASE("zero trajectory gives zero trace") {
    const SpatialGrid g = SpatialGrid::build(kInterval, {21, 1});
    TwoStateTrajectory traj;
    traj.times = TimeGrid::forward(0.5, 4);
    traj.states.assign(5, TwoStateField::zero(g));
    const auto obs = select_observation_boundary(g, {-1.0, 0.0});
    const auto tr = observe(g, traj, obs);
    CHECK(tr.dplus.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.dminus.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("identical runs produce identical traces") {
    const SpatialGrid g = SpatialGrid::build(kInterval, {41, 1});
    const CoefficientSet coeffs = seeded_admissible(g, 23);
    const auto obs = select_observation_boundary(g, {-1.0, 0.0});
    TwoStateField u0 = TwoStateField::zero(g);
    for (int i = 0; i < g.num_nodes(); ++i) u0.up[i] = std::sin(M_PI * g.coords(i)[0]);
    const BoundaryData gd = BoundaryData::zero(g, TimeGrid::forward(0.5, 50));
    const auto t1 = solve_ibvp(g, coeffs, u0, gd, nullptr, 0.01, 50);
    const auto t2 = solve_ibvp(g, coeffs, u0, gd, nullptr, 0.01, 50);
    const auto o1 = observe(g, t1, obs);
    const auto o2 = observe(g, t2, obs);
    CHECK((o1.dplus - o2.dplus).cwiseAbs().maxCoeff() == 0.0);
    CHECK((o1.dminus - o2.dminus).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("manufactured traces converge to the analytic normal derivative") {
    double errs[2];
    int nodes = 41, steps = 40;
    for (int level = 0; level < 2; ++level) {
      const SpatialGrid g = SpatialGrid::build(kInterval, {nodes, 1});
      CoefficientSet coeffs = zero_coefficients(g, 10.0);
      coeffs.A1 = constant_field(g, mc.a0[0]);
      coeffs.p = constant_field(g, mc.p0);
      coeffs.qplus = constant_field(g, mc.qplus0);
      coeffs.qminus = constant_field(g, mc.qminus0);
      const SourceFn f = mc.source(g);
      const BoundaryData gd = BoundaryData::zero(g, TimeGrid::forward(0.5, steps));
      const auto traj = solve_ibvp(g, coeffs, mc.exact(g, 0.0), gd, &f, 0.5 / steps, steps);
      const auto obs = select_observation_boundary(g, {-1.0, 0.0});
      const auto tr = observe(g, traj, obs);
      double worst = 0.0;
      for (int j = 0; j <= steps; ++j) {
        const double t = tr.times.time(j);
        // d_nu dt u+ at x=1 is -i pi e^{it}; d_nu dt u- is 4 i pi e^{2it}
        const Complex want_p = -Complex(0, M_PI) * std::exp(Complex(0, t));
        const Complex want_m = Complex(0, 4 * M_PI) * std::exp(Complex(0, 2 * t));
        worst = std::max({worst, std::abs(tr.dplus(0, j) - want_p),
                          std::abs(tr.dminus(0, j) - want_m)});
      }
      errs[level] = worst;
      nodes = 2 * (nodes - 1) + 1;
      steps *= 2;
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.5);
  }
}

TEST_CASE("time-symmetric extension: parities, fixed points, and rejection") {
  const SpatialGrid g = SpatialGrid::build(kInterval, {11, 1});
  TwoStateTrajectory traj;
  traj.times = TimeGrid::forward(0.4, 4);

  SUBCASE("constant real trajectory extends evenly") {
    TwoStateField s = TwoStateField::zero(g);
    s.up.setConstant(Complex(0.7, 0));
    traj.states.assign(5, s);
    const auto ext = extend_time_symmetric(traj, TimeParity::EvenConjugate);
    CHECK(ext.times.count == 9);
    CHECK(ext.times.time(0) == doctest::Approx(-0.4));
    for (const auto& st : ext.states) {
      CHECK((st.up.array() - Complex(0.7, 0)).abs().maxCoeff() < 1e-15);
    }
  }

  SUBCASE("purely imaginary constants are odd-conjugate fixed points") {
    TwoStateField s = TwoStateField::zero(g);
    s.up.setConstant(Complex(0, 0.3));
    s.um.setConstant(Complex(0, -1.1));
    traj.states.assign(5, s);
    const auto ext = extend_time_symmetric(traj, TimeParity::OddConjugate);
    for (const auto& st : ext.states) {
      CHECK((st.up.array() - Complex(0, 0.3)).abs().maxCoeff() < 1e-15);
      CHECK((st.um.array() - Complex(0, -1.1)).abs().maxCoeff() < 1e-15);
    }
  }

  SUBCASE("odd-conjugate extension rejects real t=0 slices") {
    TwoStateField s = TwoStateField::zero(g);
    s.up.setConstant(Complex(1.0, 0));
    traj.states.assign(5, s);
    CHECK_THROWS_AS(extend_time_symmetric(traj, TimeParity::OddConjugate),
                    std::invalid_argument);
  }
}
