#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inrflow/core.hpp"

namespace inrflow {

// Indexed triangle soup with per-triangle unit normals. Immutable after load;
// degenerate triangles (area below 1e-14 * bbox_diag^2) are dropped at
// construction and counted.
struct TriangleSoup {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;  // one unit normal per triangle
  std::size_t dropped_degenerate = 0;
  bool watertight = false;  // every edge shared by exactly two triangles

  std::size_t triangle_count() const { return triangles.size(); }
  Box bbox() const;
  double bbox_diag() const { return bbox().diagonal(3); }
  double total_area() const;
  Vec3 centroid() const;  // area-weighted surface centroid
};

// Builds a soup from raw data: validates indices, drops degenerate triangles,
// computes normals and the watertight flag.
TriangleSoup make_soup(std::vector<Vec3> vertices,
                       std::vector<std::array<std::uint32_t, 3>> triangles);

// Reads STL (ASCII or little-endian binary) or OBJ (v/f records; polygonal
// faces are fan-triangulated). Errors: ErrorCode::Io for unreadable files,
// Format for malformed records, EmptyInput for meshes with no triangles.
TriangleSoup load_triangle_soup(const std::string& path);

void save_stl_ascii(const TriangleSoup& soup, const std::string& path);

// Centers the soup at the domain center and scales uniformly so the longest
// bbox axis spans `fraction` of the domain's shortest edge.
TriangleSoup rescale_to_domain(const TriangleSoup& soup, const Box& domain,
                               double fraction = 0.5);

// Subdivided icosahedron with vertices projected onto the sphere; handy as a
// watertight fixture with a known chordal error.
TriangleSoup icosphere(double radius, int subdivisions);

}  // namespace inrflow
