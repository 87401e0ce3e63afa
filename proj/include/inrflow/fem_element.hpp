#pragma once

#include <span>

#include "inrflow/fem.hpp"

namespace inrflow {

// Standalone element-level entry points. The assembler runs the same kernels;
// these exist so element residuals can be verified against independent
// quadrature evaluators.
struct ElementSample {
  int dim = 2;
  Vec3 origin;  // lower corner
  Vec3 edges;   // size per axis
  std::vector<double> u, u_prev, u_prev2;  // dim * 2^dim, node-major
  std::vector<double> p;                   // 2^dim
  double dt = 1.0;
  double c0 = 1.0, c1 = -1.0, c2 = 0.0;  // time-derivative weights / dt
  double t_new = 0.0;
};

// Returns (dim+1)*2^dim entries, node-major [node*(dim+1)+comp] with the
// pressure-test row last per node.
std::vector<double> element_volume_residual(
    const ElementSample& e, const SolverParams& params,
    const std::function<Vec3(const Vec3&, double)>& forcing);

// SBM face terms for face (axis, dir) of the element; gp/d/u_d are the face
// Gauss points, distance vectors and Dirichlet data at the foot points.
std::vector<double> element_face_residual(const ElementSample& e, int axis, int dir,
                                          std::span<const Vec3> gp, std::span<const Vec3> d,
                                          std::span<const Vec3> u_d,
                                          const SolverParams& params);

}  // namespace inrflow
