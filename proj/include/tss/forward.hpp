#pragma once

#include "tss/coefficients.hpp"
#include "tss/geometry.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tss {

/// One snapshot of the coupled pair (u+, u-), one value per grid node.
struct TwoStateField {
  ComplexField up, um;

  static TwoStateField zero(const SpatialGrid& grid);
  ComplexField stacked() const;
  static TwoStateField from_stacked(const ComplexField& v);
};

struct TwoStateTrajectory {
  TimeGrid times;
  std::vector<TwoStateField> states;
};

/// L2(Omega)^2 norm of a snapshot.
double l2_norm(const SpatialGrid& grid, const TwoStateField& f);

/// Sparse operator for -Delta + q~ + A~·grad + p~ on stacked (u+, u-) vectors.
/// The gradient coupling is discretized in skew form,
///   A·grad ~ (A·D + D·(A .)) / 2 - (div_h A) / 2,
/// so the interior block is Hermitian exactly when the discrete divergence of
/// A vanishes.
struct DiscreteHamiltonian {
  Eigen::SparseMatrix<Complex> full;      // 2N x 2N, boundary rows zero
  Eigen::SparseMatrix<Complex> interior;  // homogeneous-Dirichlet restriction
  std::vector<int> interior_pos;          // node -> row in `interior` (-1 on boundary)
  int num_nodes = 0;
  bool divergence_clean = true;  // discrete div A within kDivTolRel at assembly
};

DiscreteHamiltonian assemble_hamiltonian(const SpatialGrid& grid, const CoefficientSet& coeffs);

/// max |H - H^*| entry over max |H| entry, on the interior block.
double hermiticity_defect(const DiscreteHamiltonian& ham);

/// Applies the operator at every node, switching to one-sided second-order
/// stencils on the boundary (needed to evaluate H^l u0 traces).
TwoStateField apply_operator_everywhere(const SpatialGrid& grid, const CoefficientSet& coeffs,
                                        const TwoStateField& u);

struct RelativeBoundReport {
  double epsilon = 0;
  double c_eps = 0;          // ||A||^2/eps + sqrt(2)||p|| + sqrt(||q+||^2+||q-||^2)
  double max_violation = 0;  // max over fields of lhs - rhs (<= 0 when pass)
  int violations = 0;
  bool pass = false;
};

/// Checks ||(A~·grad + p~ + q~) u|| <= eps ||Delta u|| + C_eps ||u|| over a
/// seeded family of fields vanishing on the boundary.
RelativeBoundReport check_relative_bound(const SpatialGrid& grid, const CoefficientSet& coeffs,
                                         double epsilon, int num_fields, std::uint64_t seed);

/// Dirichlet data sampled on a time grid. Rows follow grid.boundary() order.
/// `coeff_*[l]` stores the time-polynomial coefficient (-i)^l/l! (H^l u0)|_Gamma.
struct BoundaryData {
  TimeGrid times;
  Eigen::MatrixXcd gplus, gminus;  // boundary node x time node
  std::vector<Eigen::VectorXcd> coeff_plus, coeff_minus;

  static BoundaryData zero(const SpatialGrid& grid, const TimeGrid& times);
};

/// Time-polynomial boundary data g = sum_l t^l/l! (-i)^l (H_baseline^l u0)|_Gamma,
/// whose l-th time derivative at t=0 matches the compatibility condition by
/// construction, l = 0..order.
BoundaryData compatibility_boundary_data(const SpatialGrid& grid, const TwoStateField& u0,
                                         const CoefficientSet& baseline, int order,
                                         const TimeGrid& times);

using SourceFn = std::function<TwoStateField(double)>;

/// Trapezoidal (Crank-Nicolson) step for -i du/dt + H u = f with Dirichlet
/// rows pinned to g. The step operator is factorized once per call.
TwoStateTrajectory solve_ibvp(const SpatialGrid& grid, const CoefficientSet& coeffs,
                              const TwoStateField& u0, const BoundaryData& g,
                              const SourceFn* source, double dt, int steps);

/// d/dt of a trajectory: centered differences inside, one-sided 3-point at
/// the ends (all second order).
TwoStateTrajectory time_derivative(const TwoStateTrajectory& traj);

/// Neumann traces of d/dt u± restricted to an observation boundary.
struct ObservationTrace {
  TimeGrid times;
  std::vector<int> nodes;          // trace node ids
  Eigen::MatrixXcd dplus, dminus;  // trace node x time node
};

ObservationTrace observe(const SpatialGrid& grid, const TwoStateTrajectory& traj,
                         const ObservationBoundary& where);

enum class TimeParity { EvenConjugate, OddConjugate };

/// Reflects a [0,T] trajectory onto [-T,T]:
///   even-conjugate  w(x,-t) =  conj(w(x,t))
///   odd-conjugate   w(x,-t) = -conj(w(x,t))  (t=0 slice must be imaginary)
TwoStateTrajectory extend_time_symmetric(const TwoStateTrajectory& traj, TimeParity parity,
                                         double tol = 1e-8);

/// Columnar exports: (t, node, Re/Im u±) and (t, node, Re/Im of traces).
void write_trajectory(const std::string& path, const SpatialGrid& grid,
                      const TwoStateTrajectory& traj);
void write_observation(const std::string& path, const ObservationTrace& trace);

/// Closed-form exact solution with constant coefficients for solver
/// verification: u+ = e^{it} sin(pi xi) [sin(pi ups)],
/// u- = e^{2it} sin(2 pi xi) [sin(pi ups)], and the source
/// f = -i du/dt + H u that makes it solve the system. Vanishes on the
/// boundary, so g = 0.
struct ManufacturedCase {
  Domain dom;
  std::array<double, 2> a0{0, 0};
  double p0 = 0, qplus0 = 0, qminus0 = 0;

  Complex uplus(std::array<double, 2> x, double t) const;
  Complex uminus(std::array<double, 2> x, double t) const;
  std::array<Complex, 2> grad_uplus(std::array<double, 2> x, double t) const;
  std::array<Complex, 2> grad_uminus(std::array<double, 2> x, double t) const;
  Complex fplus(std::array<double, 2> x, double t) const;
  Complex fminus(std::array<double, 2> x, double t) const;

  TwoStateField exact(const SpatialGrid& grid, double t) const;
  SourceFn source(const SpatialGrid& grid) const;

  /// Largest L2 error over the trajectory at the given resolution.
  double solve_error(std::array<int, 2> nodes, int steps) const;
};

struct MmsStudy {
  std::vector<double> errors;
  std::vector<double> orders;  // log2(e_k / e_{k+1})
};

/// Errors and observed orders under simultaneous (h, dt) halving.
MmsStudy manufactured_convergence(const ManufacturedCase& mc, std::array<int, 2> base_nodes,
                                  int base_steps, int levels);

}  // namespace tss
