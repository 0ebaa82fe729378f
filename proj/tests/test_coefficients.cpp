#include <doctest.h>

#include "tss/coefficients.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace tss;

namespace {

SpatialGrid grid_1d(int n = 101) {
  return SpatialGrid::build(Domain{1, {0, 0}, {1, 1}, 0.5}, {n, 1});
}
SpatialGrid grid_2d(int n = 41) {
  return SpatialGrid::build(Domain{2, {0, 0}, {1, 1}, 0.5}, {n, n});
}

}  // namespace

TEST_CASE("1D constant vector potential has zero discrete divergence") {
  const SpatialGrid g = grid_1d();
  const auto a = make_divergence_free(g, {0.3, 0.0});
  CHECK(a[0].minCoeff() == 0.3);
  CHECK(a[0].maxCoeff() == 0.3);
  const RealField div = discrete_divergence(g, a[0], RealField::Zero(g.num_nodes()));
  CHECK(div.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stream functions are rejected in 1D") {
  const SpatialGrid g = grid_1d();
  CHECK_THROWS_AS(make_divergence_free(g, [](double x, double) { return x * x; }),
                  std::invalid_argument);
}

TEST_CASE("2D curl of sin*sin stream function: matches analytic field, exact discrete div") {
  const SpatialGrid g = grid_2d();
  const auto psi = [](double x, double y) {
    return std::sin(M_PI * x) * std::sin(M_PI * y);
  };
  const auto a = make_divergence_free(g, psi);

  double worst = 0.0;
  for (int node = 0; node < g.num_nodes(); ++node) {
    const auto x = g.coords(node);
    const double a1 = M_PI * std::sin(M_PI * x[0]) * std::cos(M_PI * x[1]);
    const double a2 = -M_PI * std::cos(M_PI * x[0]) * std::sin(M_PI * x[1]);
    worst = std::max({worst, std::abs(a[0][node] - a1), std::abs(a[1][node] - a2)});
  }
  const double h = g.spacing(0);
  CHECK(worst < 6.0 * h * h);  // centered-difference error constant is pi^3/6 here

  const RealField div = discrete_divergence(g, a[0], a[1]);
  const double sup_a = std::max(a[0].cwiseAbs().maxCoeff(), a[1].cwiseAbs().maxCoeff());
  CHECK(div.cwiseAbs().maxCoeff() <= 1e-10 * sup_a);
}

TEST_CASE("2D seeded stream sums keep the discrete divergence at rounding level") {
  const SpatialGrid g = grid_2d();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const CoefficientSet base = zero_coefficients(g, 1.0);
    const CoefficientSet pert = sample_admissible_perturbation(g, base, 0.3, seed);
    const RealField div = discrete_divergence(g, pert.A1, pert.A2);
    const double sup_a =
        std::max(pert.A1.cwiseAbs().maxCoeff(), pert.A2.cwiseAbs().maxCoeff());
    REQUIRE(sup_a > 0.0);
    CHECK(div.cwiseAbs().maxCoeff() <= 1e-10 * sup_a);
  }
}

TEST_CASE("check_admissible: baseline against itself passes with zero residuals") {
  const SpatialGrid g = grid_1d();
  CoefficientSet base = zero_coefficients(g, 1.0);
  base.p = constant_field(g, 0.2);
  base.qplus = constant_field(g, -0.4);
  const auto rep = check_admissible(g, base, base);
  CHECK(rep.pass());
  CHECK(rep.trace_value_residual == 0.0);
  CHECK(rep.trace_diff_residual == 0.0);
  CHECK(rep.div_residual_rel == 0.0);
}

TEST_CASE("check_admissible: unmasked perturbation fails the boundary-trace check") {
  const SpatialGrid g = grid_1d();
  const CoefficientSet base = zero_coefficients(g, 1.0);
  CoefficientSet bad = base;
  for (int i = 0; i < g.num_nodes(); ++i) {
    bad.p[i] += 0.1 * std::cos(M_PI * g.coords(i)[0]);  // nonzero at both ends
  }
  const auto rep = check_admissible(g, bad, base);
  CHECK_FALSE(rep.trace_ok);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("check_admissible: cutoff-masked perturbation at 0.1 M passes") {
  const SpatialGrid g = grid_1d();
  CoefficientSet base = zero_coefficients(g, 1.0);
  base.p = constant_field(g, 0.1);
  const CoefficientSet pert = sample_admissible_perturbation(g, base, 0.1, 42);
  const auto rep = check_admissible(g, pert, base);
  CHECK(rep.pass());
}

TEST_CASE("sampling is pure in (baseline, amplitude, seed) and linear in amplitude") {
  const SpatialGrid g = grid_1d();
  const CoefficientSet base = zero_coefficients(g, 1.0);

  const CoefficientSet zero_amp = sample_admissible_perturbation(g, base, 0.0, 9);
  CHECK((zero_amp.p - base.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((zero_amp.qplus - base.qplus).cwiseAbs().maxCoeff() == 0.0);

  const CoefficientSet a = sample_admissible_perturbation(g, base, 0.2, 9);
  const CoefficientSet b = sample_admissible_perturbation(g, base, 0.1, 9);
  const RealField twice = 2.0 * (b.p - base.p);
  CHECK(((a.p - base.p) - twice).cwiseAbs().maxCoeff() == 0.0);

  const CoefficientSet c = sample_admissible_perturbation(g, base, 0.2, 9);
  CHECK((a.p - c.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.qminus - c.qminus).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampling rejects amplitudes that push past the bound") {
  const SpatialGrid g = grid_1d();
  CoefficientSet base = zero_coefficients(g, 0.5);
  base.p = constant_field(g, 0.45);
  CHECK_THROWS_AS(sample_admissible_perturbation(g, base, 5.0, 3), std::invalid_argument);
}

TEST_CASE("sampled perturbations vanish with first differences on the boundary (1D and 2D)") {
  for (int dim : {1, 2}) {
    const SpatialGrid g = dim == 1 ? grid_1d() : grid_2d();
    const CoefficientSet base = zero_coefficients(g, 1.0);
    for (std::uint64_t seed : {5ull, 6ull}) {
      const CoefficientSet pert = sample_admissible_perturbation(g, base, 0.25, seed);
      const auto rep = check_admissible(g, pert, base);
      CHECK(rep.pass());
      CHECK(rep.trace_value_residual == 0.0);
      CHECK(rep.trace_diff_residual == 0.0);
    }
  }
}

TEST_CASE("coefficient files round-trip through the columnar format") {
  const SpatialGrid g = grid_2d(11);
  const CoefficientSet base = zero_coefficients(g, 1.0);
  const CoefficientSet pert = sample_admissible_perturbation(g, base, 0.3, 17);
  const auto path = std::filesystem::temp_directory_path() / "tss_coeff_roundtrip.csv";
  write_coefficients(path.string(), g, pert);
  const CoefficientSet back = read_coefficients(path.string(), g);
  CHECK((back.p - pert.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.A1 - pert.A1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.A2 - pert.A2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.qminus - pert.qminus).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}
