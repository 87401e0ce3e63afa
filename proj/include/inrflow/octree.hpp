#pragma once

#include <unordered_map>
#include <vector>

#include "inrflow/implicit_field.hpp"

namespace inrflow {

// Leaf octant: integer anchor on the lattice of its own level, so tiling and
// adjacency checks are exact. anchor[a] in [0, 2^level).
struct Octant {
  std::uint8_t level = 0;
  std::array<std::uint32_t, 3> anchor{0, 0, 0};

  bool operator==(const Octant& o) const { return level == o.level && anchor == o.anchor; }
};

struct RegionRefine {
  enum class Kind { Sphere, Cylinder, BoxRegion };
  Kind kind = Kind::Sphere;
  Vec3 a;             // center / segment start / box lo
  Vec3 b;             // segment end / box hi
  double radius = 0.0;
  int level = 0;
};

// Refinement recipe: uniform base level, optional boundary band (octants with
// min |f| over test points below band_factor * octant diagonal get extra
// levels), and geometric refinement regions.
struct RefineSpec {
  int base_level = 3;
  int boundary_extra = 0;
  double band_factor = 1.0;
  std::vector<RegionRefine> regions;
};

inline constexpr int kMaxOctreeLevel = 21;

// Incomplete 2:1-balanced quadtree/octree. Leaves are kept in a canonical
// sorted order; the node table and hanging-node constraints are filled by
// build_node_table after balancing.
struct Octree {
  Box domain;
  int dim = 2;
  std::vector<Octant> leaves;

  // Node data (valid after build_node_table).
  int ref_level = 0;  // finest leaf level; node coords live on this lattice
  std::vector<std::array<std::uint32_t, 3>> node_coords;
  std::vector<Vec3> node_pos;
  std::vector<std::array<std::uint32_t, 8>> leaf_nodes;  // 2^dim corner ids per leaf

  struct Constraint {
    std::uint32_t node = 0;
    std::vector<std::pair<std::uint32_t, double>> masters;  // (node id, weight)
  };
  std::vector<Constraint> constraints;  // sorted by constrained node id

  Box octant_box(const Octant& o) const;
  Vec3 octant_center(const Octant& o) const;
  double octant_edge(const Octant& o, int axis) const;
  std::size_t node_count() const { return node_coords.size(); }

  // Lookup index of an exact (level, anchor) leaf; npos when absent.
  static constexpr std::uint32_t npos = 0xffffffffu;
  std::uint32_t find_leaf(int level, const std::array<std::uint32_t, 3>& anchor) const;
  void rebuild_leaf_map();

  std::unordered_map<std::uint64_t, std::uint32_t> leaf_map;  // internal index
};

// Recursive build driven by implicit queries: subdivide while the refine spec
// demands it, keep an octant iff any corner-or-center sample has f >= 0, then
// 2:1 balance (retention re-applied to leaves created by balancing).
Octree build_incomplete(const ImplicitField& field, const Box& domain, const RefineSpec& spec);

// Minimal additional subdivisions to restore the 2:1 invariant. Balancing is
// enforced across all touching leaves (faces, edges and corners), which is
// strictly stronger than the face/edge invariant and keeps every hanging
// node's masters non-hanging.
void balance_2to1(Octree& tree, const ImplicitField& field);

bool is_balanced(const Octree& tree);

// Node table plus hanging-node constraints (edge midpoints: 1/2 weights;
// 3D face centers: 1/4 weights). Requires a balanced tree.
void build_node_table(Octree& tree);

// Leaves adjacent to `leaf` across the face (axis, dir); with 2:1 balance the
// result is one same-or-coarser leaf or up to 2^(dim-1) finer ones.
std::vector<std::uint32_t> face_neighbors(const Octree& tree, std::uint32_t leaf, int axis,
                                          int dir);

void write_tree_csv(const Octree& tree, const std::string& path);

}  // namespace inrflow
