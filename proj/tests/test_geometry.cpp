#include <doctest.h>

#include "tss/geometry.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace tss;

namespace {

Domain interval() { return Domain{1, {0, 0}, {1, 1}, 0.5}; }
Domain square() { return Domain{2, {0, 0}, {1, 1}, 0.5}; }

}  // namespace

TEST_CASE("1D grid: spacing, endpoints, normals") {
  const SpatialGrid g = SpatialGrid::build(interval(), {5, 1});
  CHECK(g.spacing(0) == doctest::Approx(0.25));
  CHECK(g.num_nodes() == 5);
  REQUIRE(g.boundary().size() == 2);
  CHECK(g.boundary()[0].node == 0);
  CHECK(g.boundary()[0].normal[0] == -1.0);
  CHECK(g.boundary()[1].node == 4);
  CHECK(g.boundary()[1].normal[0] == 1.0);
  CHECK(g.interior().size() == 3);
}

TEST_CASE("2D 5x5 grid: 16 boundary nodes, 9 interior, corner convention") {
  const SpatialGrid g = SpatialGrid::build(square(), {5, 5});
  CHECK(g.boundary().size() == 16);
  CHECK(g.interior().size() == 9);
  int corners = 0;
  for (const auto& bn : g.boundary()) {
    if (bn.corner) {
      ++corners;
      CHECK(std::hypot(bn.normal[0], bn.normal[1]) == doctest::Approx(1.0));
      CHECK(std::abs(bn.normal[0]) == doctest::Approx(std::abs(bn.normal[1])));
    }
  }
  CHECK(corners == 4);
}

TEST_CASE("degenerate grids are rejected") {
  CHECK_THROWS_AS(SpatialGrid::build(interval(), {2, 1}), std::invalid_argument);
  Domain bad = interval();
  bad.hi[0] = bad.lo[0];
  CHECK_THROWS_AS(SpatialGrid::build(bad, {5, 1}), std::invalid_argument);
  Domain bad_t = interval();
  bad_t.time_horizon = 0.0;
  CHECK_THROWS_AS(SpatialGrid::build(bad_t, {5, 1}), std::invalid_argument);
}

TEST_CASE("observation boundary selection in 1D") {
  const SpatialGrid g = SpatialGrid::build(interval(), {11, 1});
  const auto right_only = select_observation_boundary(g, {-1.0, 0.0});
  REQUIRE(right_only.selected.size() == 1);
  CHECK(right_only.selected[0] == 10);
  const auto left_only = select_observation_boundary(g, {2.0, 0.0});
  REQUIRE(left_only.selected.size() == 1);
  CHECK(left_only.selected[0] == 0);
  CHECK_THROWS_AS(select_observation_boundary(g, {0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("observation boundary selection in 2D matches the sign test node by node") {
  const SpatialGrid g = SpatialGrid::build(square(), {9, 9});
  const std::array<double, 2> x0{-1.0, 0.5};
  const auto ob = select_observation_boundary(g, x0);

  std::set<int> selected(ob.selected.begin(), ob.selected.end());
  int right_face = 0, left_face = 0;
  for (const auto& bn : g.boundary()) {
    const auto x = g.coords(bn.node);
    const double dot =
        (x[0] - x0[0]) * bn.normal[0] + (x[1] - x0[1]) * bn.normal[1];
    CHECK((dot >= 0.0) == (selected.count(bn.node) > 0));
    if (!bn.corner && bn.normal[0] == 1.0) ++right_face;
    if (!bn.corner && bn.normal[0] == -1.0 && selected.count(bn.node)) ++left_face;
  }
  // right edge fully selected, left edge excluded
  for (const auto& bn : g.boundary()) {
    if (!bn.corner && bn.normal[0] == 1.0) CHECK(selected.count(bn.node) == 1);
  }
  CHECK(left_face == 0);
  // top and bottom edges partially selected: x >= where (x-x0)·nu flips
  int top_selected = 0, top_total = 0;
  for (const auto& bn : g.boundary()) {
    if (!bn.corner && bn.normal[1] == 1.0) {
      ++top_total;
      top_selected += selected.count(bn.node);
    }
  }
  CHECK(top_selected > 0);
  CHECK(top_selected < top_total + 1);  // partial or full depending on x0
}

TEST_CASE("neumann trace: affine fields are exact, x^2 converges at second order") {
  const SpatialGrid g = SpatialGrid::build(interval(), {11, 1});
  const auto right = select_observation_boundary(g, {-1.0, 0.0});

  ComplexField linear(g.num_nodes()), zero = ComplexField::Zero(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) linear[i] = g.coords(i)[0];
  CHECK(neumann_trace(g, linear, right)[0].real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(neumann_trace(g, zero, right)[0]) == 0.0);

  double prev_err = 0;
  for (int level = 0; level < 2; ++level) {
    const int n = level == 0 ? 11 : 21;
    const SpatialGrid gl = SpatialGrid::build(interval(), {n, 1});
    const auto obs = select_observation_boundary(gl, {-1.0, 0.0});
    ComplexField sq(gl.num_nodes());
    for (int i = 0; i < gl.num_nodes(); ++i) sq[i] = std::pow(gl.coords(i)[0], 3);
    const double err = std::abs(neumann_trace(gl, sq, obs)[0] - Complex(3.0, 0.0));
    if (level == 1) CHECK(prev_err / err > 3.5);  // one-sided stencil is O(h^2)
    prev_err = err;
  }
}

TEST_CASE("neumann trace: affine exactness in 2D at face-interior nodes") {
  const SpatialGrid g = SpatialGrid::build(square(), {9, 9});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1, 1);
  const double a = uni(rng), b = uni(rng), c = uni(rng);
  ComplexField f(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto x = g.coords(i);
    f[i] = a + b * x[0] + c * x[1];
  }
  const auto ob = select_observation_boundary(g, {-0.5, -0.5});
  const auto tr = neumann_trace(g, f, ob);
  for (size_t k = 0; k < ob.trace_nodes.size(); ++k) {
    const auto& bn = ob.trace_nodes[k];
    const double expect = b * bn.normal[0] + c * bn.normal[1];
    CHECK(std::abs(tr[k] - Complex(expect, 0)) < 1e-12);
  }
}

TEST_CASE("l2 norm: constants exact, sin converges to 1/sqrt(2) at second order") {
  const SpatialGrid g = SpatialGrid::build(interval(), {101, 1});
  CHECK(g.l2_norm(RealField(RealField::Ones(g.num_nodes()))) == doctest::Approx(1.0));
  CHECK(g.l2_norm(RealField(RealField::Zero(g.num_nodes()))) == 0.0);

  RealField s(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) s[i] = std::sin(M_PI * g.coords(i)[0]);
  CHECK(g.l2_norm(s) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));

  // exp(x) has a genuine O(h^2) trapezoid error
  double errs[2];
  const int sizes[2] = {51, 101};
  const double exact = std::sqrt(0.5 * (std::exp(2.0) - 1.0));
  for (int level = 0; level < 2; ++level) {
    const SpatialGrid gl = SpatialGrid::build(interval(), {sizes[level], 1});
    RealField f(gl.num_nodes());
    for (int i = 0; i < gl.num_nodes(); ++i) f[i] = std::exp(gl.coords(i)[0]);
    errs[level] = std::abs(gl.l2_norm(f) - exact);
  }
  CHECK(errs[0] / errs[1] > 3.5);
}

TEST_CASE("symmetric time grid excludes the endpoints and hits t = 0") {
  const TimeGrid tg = TimeGrid::symmetric_open(0.5, 41);
  CHECK(tg.count == 41);
  CHECK(tg.time(0) > -0.5);
  CHECK(tg.back() < 0.5);
  CHECK(tg.time(tg.zero_index()) == doctest::Approx(0.0));
  CHECK_THROWS_AS(TimeGrid::symmetric_open(0.5, 40), std::invalid_argument);
}
