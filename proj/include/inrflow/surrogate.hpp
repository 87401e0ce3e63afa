#pragma once

#include <span>

#include "inrflow/octree.hpp"

namespace inrflow {

// Element classification from Gauss-point sign counting. Exterior = fully in
// the fluid, Interior = fully inside the geometry. FalseIntercepted elements
// are excluded from assembly; NeighborsFalseIntercepted marks assembled
// elements carrying surrogate faces next to them.
enum class Marker : std::uint8_t {
  Exterior = 0,
  Interior = 1,
  TrueIntercepted = 2,
  FalseIntercepted = 3,
  NeighborsFalseIntercepted = 4,
};

inline bool is_assembled(Marker m) {
  return m == Marker::Exterior || m == Marker::TrueIntercepted ||
         m == Marker::NeighborsFalseIntercepted;
}

struct ElementMarkers {
  std::vector<Marker> marker;                        // per leaf
  std::vector<std::uint8_t> node_inside;             // per node: f(node) < 0
  std::vector<std::uint8_t> node_false_intercepted;  // per node
  double lambda_criteria = 0.5;
  int gp_order = 2;
};

// Per-leaf fraction of interior Gauss points against lambda_criteria.
// Branch order: fully-out -> Exterior, fully-in -> Interior, fraction >=
// lambda -> FalseIntercepted, else TrueIntercepted.
ElementMarkers classify_elements(const Octree& tree, const ImplicitField& field,
                                 double lambda_criteria, int gp_order);

struct BoundaryFace {
  std::uint32_t leaf = 0;  // assembled element owning the face
  std::uint8_t axis = 0;
  std::int8_t dir = 0;  // outward normal = dir * e_axis, out of the fluid
};

struct SurrogateBoundary {
  std::vector<BoundaryFace> faces;

  // Filled by boundary_gauss_distance_vectors: Gauss points per face (stored
  // contiguously) and the memoized distance vector of each point.
  int gp_order = 0;
  std::vector<std::size_t> gp_offset;  // faces.size()+1 entries
  std::vector<Vec3> gp;
  std::vector<Vec3> d;

  std::span<const Vec3> face_gps(std::size_t f) const {
    return {gp.data() + gp_offset[f], gp_offset[f + 1] - gp_offset[f]};
  }
  std::span<const Vec3> face_d(std::size_t f) const {
    return {d.data() + gp_offset[f], gp_offset[f + 1] - gp_offset[f]};
  }
};

// Surrogate boundary per the two-scenario face rule with the opposite-face
// cycle reclassification; markers are updated in place (FalseIntercepted may
// grow, NeighborsFalseIntercepted assigned).
SurrogateBoundary extract_surrogate_boundary(const Octree& tree, ElementMarkers& markers);

// Distance vectors at every face Gauss point, each unique point evaluated
// exactly once through a position-keyed cache. Returns the number of distinct
// points evaluated (cache misses).
std::size_t boundary_gauss_distance_vectors(const Octree& tree, SurrogateBoundary& boundary,
                                            const ImplicitField& field, int gp_order);

// Test/debug helper: every face must separate one assembled element from one
// non-assembled (or pruned) region. Throws on violation.
void validate_boundary(const Octree& tree, const ElementMarkers& markers,
                       const SurrogateBoundary& boundary);

void write_boundary_csv(const Octree& tree, const SurrogateBoundary& boundary,
                        const std::string& path);

}  // namespace inrflow
