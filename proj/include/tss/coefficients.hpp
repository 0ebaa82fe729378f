#pragma once

#include "tss/geometry.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace tss {

/// Real coefficient fields of the coupled system: vector potential A
/// (divergence-free), scalar coupling p, and the diagonal potentials q±.
/// `bound` is the admissibility sup-norm scale M.
struct CoefficientSet {
  RealField A1, A2;  // A2 is empty in 1D
  RealField p, qplus, qminus;
  double bound = 1.0;

  int num_components() const { return A2.size() > 0 ? 2 : 1; }
};

using ScalarFunc = std::function<double(double, double)>;

RealField constant_field(const SpatialGrid& grid, double value);

/// All-zero coefficients with the given admissibility bound.
CoefficientSet zero_coefficients(const SpatialGrid& grid, double bound);

/// 1D: the only divergence-free fields are the constants.
std::array<RealField, 2> make_divergence_free(const SpatialGrid& grid,
                                              std::array<double, 2> constant);

/// 2D: A = (d2 psi, -d1 psi) by centered differences of stream-function
/// samples on a ghost-extended node set, so the centered-stencil discrete
/// divergence vanishes to rounding at every interior node.
std::array<RealField, 2> make_divergence_free(const SpatialGrid& grid, const ScalarFunc& psi);

/// Centered-stencil divergence at interior nodes (zero elsewhere).
RealField discrete_divergence(const SpatialGrid& grid, const RealField& a1, const RealField& a2);

/// Smooth mask: identically 0 in a band of width 0.1 (relative to each axis
/// extent) along the boundary, identically 1 deep inside, 4th-order contact
/// at both plateau edges.
RealField boundary_cutoff(const SpatialGrid& grid);

struct AdmissibilityReport {
  double sup_A = 0, sup_p = 0, sup_qplus = 0, sup_qminus = 0;
  double div_residual_rel = 0;        // max |div A| / max |A| (0 if A == 0)
  double trace_value_residual = 0;    // max |set - baseline| over boundary nodes
  double trace_diff_residual = 0;     // max one-sided normal difference of set - baseline
  bool sup_ok = false, div_ok = false, trace_ok = false;
  bool pass() const { return sup_ok && div_ok && trace_ok; }
};

constexpr double kDivTolRel = 1e-10;

AdmissibilityReport check_admissible(const SpatialGrid& grid, const CoefficientSet& set,
                                     const CoefficientSet& baseline,
                                     double tol_div = kDivTolRel, double tol_trace = 1e-12);

/// Seeded smooth perturbation of (p, q±) and, in 2D, of the stream function,
/// masked by boundary_cutoff. Linear in `amplitude`; pure in
/// (baseline, amplitude, seed). Throws if a sup-norm would exceed the bound.
CoefficientSet sample_admissible_perturbation(const SpatialGrid& grid,
                                              const CoefficientSet& baseline,
                                              double amplitude, std::uint64_t seed);

/// Columnar text export/reload: node, x, [y], A1, [A2], p, qplus, qminus.
void write_coefficients(const std::string& path, const SpatialGrid& grid,
                        const CoefficientSet& set);
CoefficientSet read_coefficients(const std::string& path, const SpatialGrid& grid);

}  // namespace tss
