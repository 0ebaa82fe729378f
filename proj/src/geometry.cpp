#include "tss/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tss {

void Domain::validate() const {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("domain: dim must be 1 or 2, got " + std::to_string(dim));
  }
  for (int a = 0; a < dim; ++a) {
    if (!(lo[a] < hi[a])) {
      throw std::invalid_argument("domain: lo must be < hi on axis " + std::to_string(a));
    }
  }
  if (!(time_horizon > 0.0)) {
    throw std::invalid_argument("domain: time horizon T must be positive");
  }
}

SpatialGrid SpatialGrid::build(const Domain& dom, std::array<int, 2> nodes_per_axis) {
  dom.validate();
  SpatialGrid g;
  g.dom_ = dom;
  g.n_ = {nodes_per_axis[0], dom.dim == 2 ? nodes_per_axis[1] : 1};
  for (int a = 0; a < dom.dim; ++a) {
    if (g.n_[a] < 3) {
      throw std::invalid_argument("grid: need at least 3 nodes per axis, got " +
                                  std::to_string(g.n_[a]));
    }
    g.h_[a] = (dom.hi[a] - dom.lo[a]) / (g.n_[a] - 1);
  }
  g.total_ = g.n_[0] * g.n_[1];
  g.boundary_mask_.assign(g.total_, 0);
  g.corner_mask_.assign(g.total_, 0);
  g.quad_w_.resize(g.total_);

  auto axis_weight = [&](int i, int a) {
    return (i == 0 || i == g.n_[a] - 1) ? 0.5 * g.h_[a] : g.h_[a];
  };

  if (dom.dim == 1) {
    for (int i = 0; i < g.n_[0]; ++i) {
      g.quad_w_[i] = axis_weight(i, 0);
      if (i == 0) {
        g.boundary_mask_[i] = 1;
        g.boundary_.push_back({i, {-1.0, 0.0}, false});
      } else if (i == g.n_[0] - 1) {
        g.boundary_mask_[i] = 1;
        g.boundary_.push_back({i, {+1.0, 0.0}, false});
      } else {
        g.interior_.push_back(i);
      }
    }
  } else {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < g.n_[1]; ++j) {
      for (int i = 0; i < g.n_[0]; ++i) {
        const int node = g.index(i, j);
        g.quad_w_[node] = axis_weight(i, 0) * axis_weight(j, 1);
        const bool on_x = (i == 0 || i == g.n_[0] - 1);
        const bool on_y = (j == 0 || j == g.n_[1] - 1);
        if (!on_x && !on_y) {
          g.interior_.push_back(node);
          continue;
        }
        g.boundary_mask_[node] = 1;
        BoundaryNode bn;
        bn.node = node;
        if (on_x && on_y) {
          // corner: averaged normal of the two adjacent faces
          bn.corner = true;
          g.corner_mask_[node] = 1;
          bn.normal = {(i == 0 ? -1.0 : 1.0) * inv_sqrt2, (j == 0 ? -1.0 : 1.0) * inv_sqrt2};
        } else if (on_x) {
          bn.normal = {i == 0 ? -1.0 : 1.0, 0.0};
        } else {
          bn.normal = {0.0, j == 0 ? -1.0 : 1.0};
        }
        g.boundary_.push_back(bn);
      }
    }
  }
  return g;
}

std::array<int, 2> SpatialGrid::multi_index(int node) const {
  return {node % n_[0], node / n_[0]};
}

std::array<double, 2> SpatialGrid::coords(int node) const {
  const auto ij = multi_index(node);
  return {dom_.lo[0] + ij[0] * h_[0], dom_.dim == 2 ? dom_.lo[1] + ij[1] * h_[1] : 0.0};
}

double SpatialGrid::l2_norm(const RealField& f) const {
  if (f.size() != total_) throw std::invalid_argument("l2_norm: field size mismatch");
  return std::sqrt(quad_w_.dot(f.cwiseAbs2()));
}

double SpatialGrid::l2_norm(const ComplexField& f) const {
  if (f.size() != total_) throw std::invalid_argument("l2_norm: field size mismatch");
  return std::sqrt(quad_w_.dot(f.cwiseAbs2()));
}

TimeGrid TimeGrid::forward(double t_end, int steps) {
  if (steps < 1 || !(t_end > 0.0)) throw std::invalid_argument("time grid: bad [0,T] spec");
  return {t_end / steps, steps + 1, 0};
}

TimeGrid TimeGrid::symmetric_open(double t_horizon, int cells) {
  if (cells < 3 || cells % 2 == 0) {
    throw std::invalid_argument("time grid: symmetric grid needs an odd cell count >= 3");
  }
  // cell-centered with an odd count: the middle cell sits at t = 0 and the
  // first/last stay half a step inside (-T, T)
  return {2.0 * t_horizon / cells, cells, (cells - 1) / 2};
}

ObservationBoundary select_observation_boundary(const SpatialGrid& grid,
                                                std::array<double, 2> x0) {
  const auto& dom = grid.domain();
  bool inside = true;
  for (int a = 0; a < dom.dim; ++a) {
    inside = inside && x0[a] >= dom.lo[a] && x0[a] <= dom.hi[a];
  }
  if (inside) {
    throw std::invalid_argument("observation boundary: x0 must lie outside the closed domain");
  }

  ObservationBoundary ob;
  ob.x0 = x0;
  for (const auto& bn : grid.boundary()) {
    const auto x = grid.coords(bn.node);
    double dot = 0.0;
    for (int a = 0; a < dom.dim; ++a) dot += (x[a] - x0[a]) * bn.normal[a];
    if (dot >= 0.0) {
      ob.selected.push_back(bn.node);
      if (!bn.corner) {
        ob.trace_nodes.push_back(bn);
        // 1D boundary carries counting measure; 2D faces carry arc length h
        ob.trace_weights.push_back(dom.dim == 1 ? 1.0
                                                : (bn.normal[0] != 0.0 ? grid.spacing(1)
                                                                       : grid.spacing(0)));
      }
    }
  }
  return ob;
}

Complex neumann_trace_at(const SpatialGrid& grid, const ComplexField& field,
                         const BoundaryNode& bn) {
  if (bn.corner) throw std::invalid_argument("neumann trace: not defined at corner nodes");
  const int axis = bn.normal[0] != 0.0 ? 0 : 1;
  const double sgn = bn.normal[axis];
  const int stride = axis == 0 ? 1 : grid.nodes(0);
  const int step = sgn > 0 ? -stride : stride;  // inward
  const int n0 = bn.node, n1 = bn.node + step, n2 = bn.node + 2 * step;
  // one-sided 3-point derivative along the inward direction, flipped to outward
  const Complex inward = (-3.0 * field[n0] + 4.0 * field[n1] - field[n2]) /
                         (2.0 * grid.spacing(axis));
  return -inward;
}

Complex deriv1_at(const SpatialGrid& grid, const ComplexField& f, int node, int axis) {
  const auto ij = grid.multi_index(node);
  const int i = axis == 0 ? ij[0] : ij[1];
  const int m = grid.nodes(axis);
  const int stride = axis == 0 ? 1 : grid.nodes(0);
  const double h = grid.spacing(axis);
  if (i == 0) {
    return (-3.0 * f[node] + 4.0 * f[node + stride] - f[node + 2 * stride]) / (2.0 * h);
  }
  if (i == m - 1) {
    return (3.0 * f[node] - 4.0 * f[node - stride] + f[node - 2 * stride]) / (2.0 * h);
  }
  return (f[node + stride] - f[node - stride]) / (2.0 * h);
}

Complex deriv2_at(const SpatialGrid& grid, const ComplexField& f, int node, int axis) {
  const auto ij = grid.multi_index(node);
  const int i = axis == 0 ? ij[0] : ij[1];
  const int m = grid.nodes(axis);
  const int stride = axis == 0 ? 1 : grid.nodes(0);
  const double inv_h2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
  if (i == 0 || i == m - 1) {
    if (m < 4) {
      throw std::invalid_argument(
          "deriv2_at: one-sided second derivative needs at least 4 nodes on the axis");
    }
    const int s = i == 0 ? stride : -stride;
    return (2.0 * f[node] - 5.0 * f[node + s] + 4.0 * f[node + 2 * s] - f[node + 3 * s]) * inv_h2;
  }
  return (f[node + stride] - 2.0 * f[node] + f[node - stride]) * inv_h2;
}

Eigen::VectorXcd neumann_trace(const SpatialGrid& grid, const ComplexField& field,
                               const ObservationBoundary& where) {
  if (field.size() != grid.num_nodes()) {
    throw std::invalid_argument("neumann trace: field size mismatch");
  }
  Eigen::VectorXcd out(static_cast<int>(where.trace_nodes.size()));
  for (size_t k = 0; k < where.trace_nodes.size(); ++k) {
    out[static_cast<int>(k)] = neumann_trace_at(grid, field, where.trace_nodes[k]);
  }
  return out;
}

}  // namespace tss
