#pragma once

#include "tss/carleman.hpp"
#include "tss/forward.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tss {

struct Probe {
  TwoStateField u0;
  BoundaryData g;            // compatibility data against the baseline
  double constant = 0.0;     // alpha for the two constant probes, 0 otherwise
  int coordinate_axis = -1;  // >= 0 for the coordinate-function probes
};

/// The n+2 initial states of the measurement protocol:
///   probe 1 = (0, alpha), probe 2 = (alpha, 0), probe k+2 = (x_k, x_k),
/// each with boundary data satisfying the compatibility conditions of the
/// given order against the baseline coefficients.
struct ProbeSuite {
  double alpha = 1.0;
  int order = 2;
  std::vector<Probe> probes;
};

ProbeSuite build_probes(const SpatialGrid& grid, const CoefficientSet& baseline, double alpha,
                        int order, const TimeGrid& times);

/// Gradient matrices U0± of the coordinate probes (identity by construction)
/// and their smallest per-node singular value over the interior.
struct ProbeMatrixReport {
  Eigen::MatrixXd u0_plus, u0_minus;
  double min_singular_plus = 0, min_singular_minus = 0;
};
ProbeMatrixReport probe_gradient_matrices(const SpatialGrid& grid, const ProbeSuite& probes);

struct StabilityReport {
  double lhs = 0;      // sum of squared L2 norms of the coefficient differences
  double rhs_raw = 0;  // sum over probes of squared trace-difference norms on Sigma_*
  std::optional<double> ratio;
  double amplitude = 0;
  std::uint64_t seed = 0;
  std::string grid_desc;
  double dt = 0;
};

StabilityReport run_pair_experiment(const SpatialGrid& grid, const CoefficientSet& coeffs1,
                                    const CoefficientSet& coeffs2, const ProbeSuite& probes,
                                    const ObservationBoundary& obs, double dt, int steps);

std::vector<StabilityReport> stability_scaling_study(
    const SpatialGrid& grid, const CoefficientSet& baseline,
    const std::vector<double>& amplitudes, const std::vector<std::uint64_t>& seeds,
    const ProbeSuite& probes, const ObservationBoundary& obs, double dt, int steps);

/// d/dt (u1 - u2) at t = 0 by the one-sided 3-point difference; solves two
/// steps of each forward problem internally.
TwoStateField snapshot_v0(const SpatialGrid& grid, const CoefficientSet& coeffs1,
                          const CoefficientSet& coeffs2, const Probe& probe, double dt);

/// Pointwise inversion of the linearized initial-slope identities:
///   p^ = (i/alpha) v+_1,  q-^ = (i/alpha) v-_1,  q+^ = (i/alpha) v+_2,
///   A_k^ = i v+_{k+2} - (p^ + q+^) x_k,
/// with the independent duplicates kept as cross-checks.
struct ReconstructionResult {
  RealField p, qplus, qminus;
  std::array<RealField, 2> A;
  double imag_residual_rel = 0;  // worst ||Im||_2 / ||Re||_2 over recovered fields
  double p_crosscheck_rel = 0;   // probes 1 vs 2
  std::array<double, 2> A_crosscheck_rel{0, 0};
};

ReconstructionResult linearized_reconstruct(const SpatialGrid& grid,
                                            const std::vector<TwoStateField>& snapshots,
                                            const ProbeSuite& probes);

struct ReconstructionErrors {
  double p = 0, qplus = 0, qminus = 0;
  std::array<double, 2> A{0, 0};
  double worst() const;
};

/// Relative L2 errors against the true differences coeffs1 - coeffs2
/// (absolute norms where the true difference vanishes).
ReconstructionErrors reconstruction_errors(const SpatialGrid& grid,
                                           const ReconstructionResult& rec,
                                           const CoefficientSet& coeffs1,
                                           const CoefficientSet& coeffs2);

/// Weighted trace functional mu(s) of a trace difference: twice the (0,T)
/// integral of e^{-2 s eta} phi (d_nu beta) |d_nu v|^2 over Gamma_*
/// (normalized like every other weight evaluation).
double weighted_mu(const CarlemanWeights& weights, double s, const ObservationTrace& a,
                   const ObservationTrace& b, const ObservationBoundary& obs);

void write_stability_csv(const std::string& path, const std::vector<StabilityReport>& rows);

}  // namespace tss
