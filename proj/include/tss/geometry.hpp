#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <vector>

namespace tss {

using Complex = std::complex<double>;
using RealField = Eigen::VectorXd;     // one value per grid node
using ComplexField = Eigen::VectorXcd;

/// Spatial box (interval or rectangle) together with the time horizon T.
struct Domain {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  double time_horizon = 1.0;

  void validate() const;  // throws std::invalid_argument on degenerate input
};

struct BoundaryNode {
  int node = -1;                        // flat node index
  std::array<double, 2> normal{0, 0};   // outward unit normal
  bool corner = false;                  // 2D corner: averaged normal, no trace
};

/// Uniform tensor grid over the domain. Nodes are stored flat, x fastest.
/// Immutable after build(); safe to share between threads.
class SpatialGrid {
 public:
  static SpatialGrid build(const Domain& dom, std::array<int, 2> nodes_per_axis);

  int dim() const { return dom_.dim; }
  const Domain& domain() const { return dom_; }
  int num_nodes() const { return total_; }
  int nodes(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }

  int index(int i, int j = 0) const { return dom_.dim == 1 ? i : i + n_[0] * j; }
  std::array<int, 2> multi_index(int node) const;
  std::array<double, 2> coords(int node) const;

  bool is_boundary(int node) const { return boundary_mask_[node] != 0; }
  bool is_corner(int node) const { return corner_mask_[node] != 0; }
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }

  /// Tensor-product trapezoidal quadrature weight of each node.
  const RealField& quad_weights() const { return quad_w_; }

  /// Trapezoidal approximation of the L2(Omega) norm.
  double l2_norm(const RealField& f) const;
  double l2_norm(const ComplexField& f) const;

 private:
  Domain dom_;
  std::array<int, 2> n_{0, 1};
  std::array<double, 2> h_{0, 0};
  int total_ = 0;
  std::vector<int> interior_;
  std::vector<BoundaryNode> boundary_;
  std::vector<char> boundary_mask_, corner_mask_;
  RealField quad_w_;
};

/// Uniform time grid; covers either [0,T] (node-centered) or a symmetric
/// open interval (-T,T) (cell-centered, odd count, so t=0 is the middle
/// node). Times are measured from the origin node, which makes symmetric
/// grids bitwise mirror-symmetric: time(count-1-j) == -time(j).
struct TimeGrid {
  double dt = 0.0;
  int count = 0;
  int origin = 0;  // node with t = 0

  double time(int j) const { return dt * (j - origin); }
  double back() const { return time(count - 1); }

  static TimeGrid forward(double t_end, int steps);
  static TimeGrid symmetric_open(double t_horizon, int cells);

  /// Index of the t=0 node.
  int zero_index() const { return origin; }
};

/// Part of the boundary selected by the sign condition (x-x0)·nu >= 0.
/// `selected` lists every qualifying boundary node (corners included);
/// traces and boundary quadrature use only the face-interior subset.
struct ObservationBoundary {
  std::array<double, 2> x0{0, 0};
  std::vector<int> selected;
  std::vector<BoundaryNode> trace_nodes;
  std::vector<double> trace_weights;
};

ObservationBoundary select_observation_boundary(const SpatialGrid& grid,
                                                std::array<double, 2> x0);

/// Outward normal derivative at the trace nodes of `where`,
/// one-sided 3-point stencil (exact on quadratics along the normal axis).
Eigen::VectorXcd neumann_trace(const SpatialGrid& grid, const ComplexField& field,
                               const ObservationBoundary& where);

/// Same stencil for a single boundary node (must not be a corner).
Complex neumann_trace_at(const SpatialGrid& grid, const ComplexField& field,
                         const BoundaryNode& bn);

/// Second-order first/second derivative along one axis: centered inside,
/// one-sided at the faces (deriv2 needs >= 4 nodes on the axis there).
Complex deriv1_at(const SpatialGrid& grid, const ComplexField& f, int node, int axis);
Complex deriv2_at(const SpatialGrid& grid, const ComplexField& f, int node, int axis);

}  // namespace tss
