#pragma once

#include "tss/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tss {

struct WeightConfig {
  std::array<double, 2> x0{-1.0, 0.5};  // must lie outside the closed domain
  double r = 2.0;                       // > 1
  double lambda = 1.0;                  // > 0
  double t_horizon = 1.0;               // weights live on (-T, T)
};

/// Complex field on the tensor product of a spatial grid and a symmetric
/// time grid; slice j holds the values at time node j.
struct SpaceTimeField {
  std::vector<ComplexField> slices;

  static SpaceTimeField zero(const SpatialGrid& grid, const TimeGrid& times);
};

/// Carleman weight family over Omega x (-T,T):
///   beta~ = |x-x0|^2, beta = beta~ + r sup|beta~|, K = sup beta,
///   phi = e^{2 lambda beta} / rho(t), eta = (e^{2 lambda K} - e^{lambda beta}) / rho(t)
/// with rho(t) = (T+t)(T-t). Spatial/time derivatives of eta come from the
/// closed forms, never from differencing.
///
/// All weight evaluations share the normalization exp(-s * eta_shift()),
/// the peak of e^{-s eta} over the closed cylinder; every term of the
/// energy-inequality sides is quadratic in the weighted field, so ratios and
/// homogeneity are unaffected while the magnitudes stay representable.
class CarlemanWeights {
 public:
  static CarlemanWeights build(const SpatialGrid& grid, const WeightConfig& cfg,
                               const TimeGrid& times);

  const SpatialGrid& grid() const { return grid_; }
  const TimeGrid& times() const { return times_; }
  const WeightConfig& config() const { return cfg_; }

  double beta_tilde(int node) const { return beta_[node] - offset_; }
  double beta(int node) const { return beta_[node]; }
  double K() const { return k_; }
  double eta_shift() const { return eta_min_; }

  double rho(double t) const;  // (T+t)(T-t)
  double eta(int node, double t) const;
  double eta0(int node) const { return numer_[node] / (cfg_.t_horizon * cfg_.t_horizon); }
  double phi(int node, double t) const;
  double eta_t(int node, double t) const;
  std::array<double, 2> grad_eta(int node, double t) const;
  double lap_eta(int node, double t) const;
  double grad_eta_sq(int node, double t) const;

  /// exp(-s (eta - eta_shift)); 0 at |t| >= T.
  double weight(int node, double t, double s) const;
  double weight0(int node, double s) const;

  std::array<double, 2> grad_beta(int node) const;  // = 2 (x - x0)
  double dbeta_dnu(const BoundaryNode& bn) const;

 private:
  SpatialGrid grid_;
  WeightConfig cfg_;
  TimeGrid times_;
  RealField beta_;         // beta(x)
  RealField numer_;        // e^{2 lambda K} - e^{lambda beta(x)} > 0
  RealField exp_lb_;       // e^{lambda beta(x)}
  double offset_ = 0;      // r sup|beta~|
  double k_ = 0;           // sup beta
  double eta_min_ = 0;     // (e^{2 lambda K} - e^{lambda K}) / T^2
};

struct Assumption1Report {
  double min_grad_norm = 0;          // min |grad beta~| over nodes
  double required_grad_norm = 0;     // 2 dist(x0, domain)
  double max_dnu_off_gamma = 0;      // max d_nu beta~ over Gamma \ Gamma_* (< 0 expected)
  double min_condition3_margin = 0;  // min over sampled zeta of the convexity form
  bool pass = false;
};

Assumption1Report verify_assumption1(const CarlemanWeights& weights,
                                     const ObservationBoundary& gammastar, int num_zeta,
                                     std::uint64_t seed);

/// M1 = i d/dt + Delta + s^2 |grad eta|^2, centered differences; result is
/// zero on spatial boundary nodes and on the first/last time slice.
SpaceTimeField apply_M1(const CarlemanWeights& weights, double s, const SpaceTimeField& w);

/// M2 = i s eta' + 2 s grad eta · grad + s Delta eta.
SpaceTimeField apply_M2(const CarlemanWeights& weights, double s, const SpaceTimeField& w);

/// Multiplies each slice by the (normalized) weight e^{-s eta}.
SpaceTimeField weighted(const CarlemanWeights& weights, double s, const SpaceTimeField& w);

struct EnergyInequalitySides {
  double lhs = 0;            // s^{-1/2} (||e^{-s eta} z||^2 + ||e^{-s eta} grad z||^2) + ||e^{-s eta(.,0)} z(.,0)||^2
  double rhs = 0;            // s^{-3/2} (s * boundary_term + source_term)
  double boundary_term = 0;  // ||e^{-s eta} phi^{1/2} (d_nu beta)^{1/2} d_nu z||^2 on Sigma~*
  double source_term = 0;    // ||e^{-s eta} L z||^2 on Q~
};

/// Both sides of the weighted energy inequality for a field z vanishing on
/// Gamma, with L z supplied by the caller (analytically or by differencing).
EnergyInequalitySides corollary_check(const CarlemanWeights& weights, double s,
                                      const SpaceTimeField& z, const SpaceTimeField& lz,
                                      const ObservationBoundary& gammastar);

struct ScanMember {
  std::string id;
  SpaceTimeField z, lz;
};

struct ScanRow {
  double s = 0;
  double worst_ratio = 0;
  std::string argmax_id;
  bool counterexample = false;  // rhs == 0 with lhs > 0 for some member
};

std::vector<ScanRow> empirical_constant_scan(const CarlemanWeights& weights,
                                             const std::vector<ScanMember>& family,
                                             const std::vector<double>& s_values,
                                             const ObservationBoundary& gammastar);

/// Seeded family of smooth fields with homogeneous Dirichlet data and
/// closed-form L z (sine modes times complex exponentials in time).
std::vector<ScanMember> make_scan_family(const SpatialGrid& grid, const TimeGrid& times,
                                         int count, std::uint64_t seed);

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows);

}  // namespace tss
