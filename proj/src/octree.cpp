#include "inrflow/octree.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace inrflow {

namespace {

inline std::uint64_t spread_by_1(std::uint64_t x) {
  x &= 0xffffffffULL;
  x = (x | (x << 16)) & 0x0000ffff0000ffffULL;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

inline std::uint64_t spread_by_2(std::uint64_t x) {
  x &= 0x1fffffULL;  // 21 bits
  x = (x | (x << 32)) & 0x1f00000000ffffULL;
  x = (x | (x << 16)) & 0x1f0000ff0000ffULL;
  x = (x | (x << 8)) & 0x100f00f00f00f00fULL;
  x = (x | (x << 4)) & 0x10c30c30c30c30c3ULL;
  x = (x | (x << 2)) & 0x1249249249249249ULL;
  return x;
}

// Exact linear code: level tag bit above the Morton interleave; unique for
// every (level, anchor) pair with level <= 21.
inline std::uint64_t pack_leaf_key(int dim, int level, const std::array<std::uint32_t, 3>& a) {
  if (dim == 2)
    return (std::uint64_t(1) << (2 * level)) |
           (spread_by_1(a[0]) | (spread_by_1(a[1]) << 1));
  return (std::uint64_t(1) << (3 * level)) |
         (spread_by_2(a[0]) | (spread_by_2(a[1]) << 1) | (spread_by_2(a[2]) << 2));
}

}  // namespace

Box Octree::octant_box(const Octant& o) const {
  Box b;
  double inv = std::ldexp(1.0, -int(o.level));
  Vec3 ext = domain.extent();
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = domain.lo[a] + ext[a] * (double(o.anchor[a]) * inv);
    b.hi[a] = domain.lo[a] + ext[a] * (double(o.anchor[a] + 1) * inv);
  }
  if (dim == 2) b.lo.z = b.hi.z = 0.0;
  return b;
}

Vec3 Octree::octant_center(const Octant& o) const {
  Box b = octant_box(o);
  Vec3 c = b.center();
  if (dim == 2) c.z = 0.0;
  return c;
}

double Octree::octant_edge(const Octant& o, int axis) const {
  return (domain.hi[axis] - domain.lo[axis]) * std::ldexp(1.0, -int(o.level));
}

void Octree::rebuild_leaf_map() {
  leaf_map.clear();
  leaf_map.reserve(leaves.size() * 2);
  for (std::uint32_t i = 0; i < std::uint32_t(leaves.size()); ++i)
    leaf_map.emplace(pack_leaf_key(dim, leaves[i].level, leaves[i].anchor), i);
}

std::uint32_t Octree::find_leaf(int level, const std::array<std::uint32_t, 3>& anchor) const {
  auto it = leaf_map.find(pack_leaf_key(dim, level, anchor));
  return it == leaf_map.end() ? npos : it->second;
}

namespace {

struct LatticeHash {
  std::size_t operator()(const std::array<std::uint64_t, 3>& c) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint64_t v : c) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ULL;
    }
    return std::size_t(h);
  }
};

struct Builder {
  const ImplicitField& field;
  const RefineSpec& spec;
  Octree& tree;
  int dim;
  // Corner/center sample cache on the level-(kMax+1) lattice; positions are
  // always recomputed from integer coordinates so cached keys are exact.
  std::unordered_map<std::array<std::uint64_t, 3>, double, LatticeHash> cache;

  double eval_lattice(const std::array<std::uint64_t, 3>& c) {
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
    Vec3 p;
    double inv = std::ldexp(1.0, -(kMaxOctreeLevel + 1));
    Vec3 ext = tree.domain.extent();
    for (int a = 0; a < dim; ++a)
      p[a] = tree.domain.lo[a] + ext[a] * (double(c[a]) * inv);
    double f = field.eval(p);
    if (!std::isfinite(f))
      throw Error(ErrorCode::InvalidArgument, "implicit field returned non-finite value");
    cache.emplace(c, f);
    return f;
  }

  // f at the 2^dim corners and the center of an octant.
  void sample_octant(const Octant& o, double* vals, int& count) {
    count = 0;
    std::uint64_t step = 1ULL << (kMaxOctreeLevel + 1 - o.level);
    std::array<std::uint64_t, 3> base = {std::uint64_t(o.anchor[0]) * step,
                                         std::uint64_t(o.anchor[1]) * step,
                                         std::uint64_t(o.anchor[2]) * step};
    int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
      std::array<std::uint64_t, 3> cc = base;
      for (int a = 0; a < dim; ++a)
        if (c & (1 << a)) cc[a] += step;
      vals[count++] = eval_lattice(cc);
    }
    std::array<std::uint64_t, 3> mid = base;
    for (int a = 0; a < dim; ++a) mid[a] += step / 2;
    vals[count++] = eval_lattice(mid);
  }

  bool retained(const double* vals, int count) const {
    for (int i = 0; i < count; ++i)
      if (vals[i] >= 0.0) return true;
    return false;
  }

  int target_level(const Octant& o, const double* vals, int count) const {
    int target = spec.base_level;
    if (spec.boundary_extra > 0) {
      double min_abs = 1e300;
      for (int i = 0; i < count; ++i) min_abs = std::min(min_abs, std::abs(vals[i]));
      Box b = tree.octant_box(o);
      if (min_abs < spec.band_factor * b.diagonal(dim))
        target = std::max(target, spec.base_level + spec.boundary_extra);
    }
    for (const RegionRefine& r : spec.regions) {
      if (r.level <= target) continue;
      Box b = tree.octant_box(o);
      Vec3 c = b.center();
      double half_diag = 0.5 * b.diagonal(dim);
      double dist = 0.0;
      switch (r.kind) {
        case RegionRefine::Kind::Sphere:
          dist = norm(c - r.a) - r.radius;
          break;
        case RegionRefine::Kind::Cylinder: {
          Vec3 ab = r.b - r.a;
          double t = norm2(ab) > 0.0 ? std::clamp(dot(c - r.a, ab) / norm2(ab), 0.0, 1.0) : 0.0;
          dist = norm(c - (r.a + ab * t)) - r.radius;
          break;
        }
        case RegionRefine::Kind::BoxRegion: {
          double d2 = 0.0;
          for (int a = 0; a < dim; ++a) {
            double q = std::max({r.a[a] - c[a], 0.0, c[a] - r.b[a]});
            d2 += q * q;
          }
          dist = std::sqrt(d2);
          break;
        }
      }
      if (dist <= half_diag) target = std::max(target, r.level);
    }
    return target;
  }

  void descend(const Octant& o) {
    double vals[9];
    int count = 0;
    sample_octant(o, vals, count);
    if (!retained(vals, count)) return;  // fully interior to the geometry
    int target = target_level(o, vals, count);
    if (target > kMaxOctreeLevel)
      throw Error(ErrorCode::InvalidArgument, "refinement level exceeds lattice limit 21");
    if (int(o.level) < target) {
      int children = 1 << dim;
      for (int c = 0; c < children; ++c) {
        Octant child;
        child.level = std::uint8_t(o.level + 1);
        child.anchor = {o.anchor[0] * 2, o.anchor[1] * 2, o.anchor[2] * 2};
        for (int a = 0; a < dim; ++a)
          if (c & (1 << a)) child.anchor[a] += 1;
        descend(child);
      }
    } else {
      tree.leaves.push_back(o);
    }
  }
};

void sort_leaves(Octree& tree) {
  std::sort(tree.leaves.begin(), tree.leaves.end(), [](const Octant& a, const Octant& b) {
    // Compare anchors normalized to a common lattice; tiling makes ties
    // impossible across distinct leaves.
    int shift_a = kMaxOctreeLevel - a.level, shift_b = kMaxOctreeLevel - b.level;
    for (int axis = 2; axis >= 0; --axis) {
      std::uint64_t ka = std::uint64_t(a.anchor[axis]) << shift_a;
      std::uint64_t kb = std::uint64_t(b.anchor[axis]) << shift_b;
      if (ka != kb) return ka < kb;
    }
    return a.level < b.level;
  });
}

}  // namespace

Octree build_incomplete(const ImplicitField& field, const Box& domain, const RefineSpec& spec) {
  if (spec.base_level < 1)
    throw Error(ErrorCode::InvalidArgument, "base level must be >= 1");
  if (spec.base_level + spec.boundary_extra > kMaxOctreeLevel)
    throw Error(ErrorCode::InvalidArgument, "refinement level exceeds lattice limit 21");
  for (const RegionRefine& r : spec.regions)
    if (r.level > kMaxOctreeLevel)
      throw Error(ErrorCode::InvalidArgument, "region level exceeds lattice limit 21");

  Octree tree;
  tree.domain = domain;
  tree.dim = field.dim();
  if (tree.dim == 2) {
    tree.domain.lo.z = 0.0;
    tree.domain.hi.z = 0.0;
  }

  Builder builder{field, spec, tree, tree.dim, {}};
  builder.descend(Octant{});
  if (tree.leaves.empty())
    throw Error(ErrorCode::EmptyInput, "no octants retained: field is negative everywhere");

  balance_2to1(tree, field);
  sort_leaves(tree);
  tree.rebuild_leaf_map();
  build_node_table(tree);
  return tree;
}

namespace {

// Locates the leaf containing the same-level cell (level, anchor): the cell
// itself, an ancestor, or npos when only finer leaves (or nothing) cover it.
std::uint32_t containing_leaf_at_or_above(const Octree& tree, int level,
                                          std::array<std::uint32_t, 3> anchor) {
  for (int l = level; l >= 0; --l) {
    std::uint32_t idx = tree.find_leaf(l, anchor);
    if (idx != Octree::npos) return idx;
    for (int a = 0; a < 3; ++a) anchor[a] >>= 1;
  }
  return Octree::npos;
}

}  // namespace

void balance_2to1(Octree& tree, const ImplicitField& field) {
  Builder builder{field, RefineSpec{}, tree, tree.dim, {}};

  bool changed = true;
  while (changed) {
    changed = false;
    tree.rebuild_leaf_map();

    std::vector<std::uint32_t> to_split;
    const int dim = tree.dim;
    for (std::uint32_t li = 0; li < tree.leaves.size(); ++li) {
      const Octant& leaf = tree.leaves[li];
      if (leaf.level < 2) continue;  // a level-0/1 neighbor can never violate
      std::uint32_t scale = 1u << leaf.level;
      // All touching directions: faces, edges and corners.
      for (int dz = dim == 3 ? -1 : 0; dz <= (dim == 3 ? 1 : 0); ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            std::int64_t nx = std::int64_t(leaf.anchor[0]) + dx;
            std::int64_t ny = std::int64_t(leaf.anchor[1]) + dy;
            std::int64_t nz = std::int64_t(leaf.anchor[2]) + dz;
            if (nx < 0 || ny < 0 || nz < 0 || nx >= scale || ny >= scale ||
                (dim == 3 && nz >= scale))
              continue;
            std::array<std::uint32_t, 3> na = {std::uint32_t(nx), std::uint32_t(ny),
                                               std::uint32_t(nz)};
            // Violation iff the covering leaf is 2+ levels coarser.
            std::array<std::uint32_t, 3> coarse = {na[0] >> 2, na[1] >> 2, na[2] >> 2};
            std::uint32_t host = containing_leaf_at_or_above(tree, leaf.level - 2, coarse);
            if (host != Octree::npos) to_split.push_back(host);
          }
    }
    if (to_split.empty()) break;

    std::sort(to_split.begin(), to_split.end());
    to_split.erase(std::unique(to_split.begin(), to_split.end()), to_split.end());
    changed = true;

    std::vector<Octant> splits;
    splits.reserve(to_split.size());
    // Remove in descending index order, then append retained children.
    for (auto it = to_split.rbegin(); it != to_split.rend(); ++it) {
      splits.push_back(tree.leaves[*it]);
      tree.leaves[*it] = tree.leaves.back();
      tree.leaves.pop_back();
    }
    for (const Octant& o : splits) {
      int children = 1 << tree.dim;
      for (int c = 0; c < children; ++c) {
        Octant child;
        child.level = std::uint8_t(o.level + 1);
        child.anchor = {o.anchor[0] * 2, o.anchor[1] * 2, o.anchor[2] * 2};
        for (int a = 0; a < tree.dim; ++a)
          if (c & (1 << a)) child.anchor[a] += 1;
        double vals[9];
        int count = 0;
        builder.sample_octant(child, vals, count);
        if (builder.retained(vals, count)) tree.leaves.push_back(child);
      }
    }
  }
  sort_leaves(tree);
  tree.rebuild_leaf_map();
}

bool is_balanced(const Octree& tree) {
  const int dim = tree.dim;
  for (std::uint32_t li = 0; li < tree.leaves.size(); ++li) {
    const Octant& leaf = tree.leaves[li];
    if (leaf.level < 2) continue;
    std::uint32_t scale = 1u << leaf.level;
    for (int dz = dim == 3 ? -1 : 0; dz <= (dim == 3 ? 1 : 0); ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          std::int64_t nx = std::int64_t(leaf.anchor[0]) + dx;
          std::int64_t ny = std::int64_t(leaf.anchor[1]) + dy;
          std::int64_t nz = std::int64_t(leaf.anchor[2]) + dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= scale || ny >= scale ||
              (dim == 3 && nz >= scale))
            continue;
          std::array<std::uint32_t, 3> coarse = {std::uint32_t(nx) >> 2,
                                                 std::uint32_t(ny) >> 2,
                                                 std::uint32_t(nz) >> 2};
          if (containing_leaf_at_or_above(tree, leaf.level - 2, coarse) != Octree::npos)
            return false;
        }
  }
  return true;
}

void build_node_table(Octree& tree) {
  if (!is_balanced(tree))
    throw Error(ErrorCode::InvalidArgument, "node table requires a 2:1-balanced tree");

  const int dim = tree.dim;
  tree.ref_level = 0;
  for (const Octant& o : tree.leaves) tree.ref_level = std::max(tree.ref_level, int(o.level));

  auto corner_coord = [&](const Octant& o, int corner) {
    std::uint32_t step = 1u << (tree.ref_level - o.level);
    std::array<std::uint32_t, 3> c = {o.anchor[0] * step, o.anchor[1] * step,
                                      o.anchor[2] * step};
    for (int a = 0; a < dim; ++a)
      if (corner & (1 << a)) c[a] += step;
    return c;
  };

  // Collect unique node coordinates in sorted order.
  std::vector<std::array<std::uint32_t, 3>> coords;
  coords.reserve(tree.leaves.size() * std::size_t(1 << dim));
  for (const Octant& o : tree.leaves)
    for (int c = 0; c < (1 << dim); ++c) coords.push_back(corner_coord(o, c));
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  tree.node_coords = std::move(coords);

  auto node_id = [&](const std::array<std::uint32_t, 3>& c) -> std::uint32_t {
    auto it = std::lower_bound(tree.node_coords.begin(), tree.node_coords.end(), c);
    if (it == tree.node_coords.end() || *it != c) return Octree::npos;
    return std::uint32_t(it - tree.node_coords.begin());
  };

  tree.node_pos.resize(tree.node_coords.size());
  double inv = std::ldexp(1.0, -tree.ref_level);
  Vec3 ext = tree.domain.extent();
  for (std::size_t i = 0; i < tree.node_coords.size(); ++i) {
    Vec3 p;
    for (int a = 0; a < dim; ++a)
      p[a] = tree.domain.lo[a] + ext[a] * (double(tree.node_coords[i][a]) * inv);
    tree.node_pos[i] = p;
  }

  tree.leaf_nodes.assign(tree.leaves.size(), {});
  for (std::size_t li = 0; li < tree.leaves.size(); ++li)
    for (int c = 0; c < (1 << dim); ++c) {
      std::uint32_t id = node_id(corner_coord(tree.leaves[li], c));
      if (id == Octree::npos) throw Error(ErrorCode::Internal, "corner node missing");
      tree.leaf_nodes[li][std::size_t(c)] = id;
    }

  // Hanging nodes live at edge midpoints (and 3D face centers) of coarser
  // leaves; if such a lattice point exists as a node, it is constrained.
  std::map<std::uint32_t, Octree::Constraint> hanging;
  auto add_constraint = [&](std::uint32_t node,
                            std::vector<std::pair<std::uint32_t, double>> masters) {
    if (hanging.count(node)) return;  // identical by construction
    Octree::Constraint c;
    c.node = node;
    c.masters = std::move(masters);
    hanging.emplace(node, std::move(c));
  };

  for (std::size_t li = 0; li < tree.leaves.size(); ++li) {
    const Octant& o = tree.leaves[li];
    if (int(o.level) == tree.ref_level) continue;  // no finer neighbor possible
    const auto& ln = tree.leaf_nodes[li];

    if (dim == 2) {
      const int edges[4][2] = {{0, 1}, {2, 3}, {0, 2}, {1, 3}};
      for (const auto& e : edges) {
        auto ca = corner_coord(o, e[0]), cb = corner_coord(o, e[1]);
        std::array<std::uint32_t, 3> mid = {(ca[0] + cb[0]) / 2, (ca[1] + cb[1]) / 2, 0};
        std::uint32_t id = node_id(mid);
        if (id != Octree::npos)
          add_constraint(id, {{ln[std::size_t(e[0])], 0.5}, {ln[std::size_t(e[1])], 0.5}});
      }
    } else {
      const int edges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
      for (const auto& e : edges) {
        auto ca = corner_coord(o, e[0]), cb = corner_coord(o, e[1]);
        std::array<std::uint32_t, 3> mid = {(ca[0] + cb[0]) / 2, (ca[1] + cb[1]) / 2,
                                            (ca[2] + cb[2]) / 2};
        std::uint32_t id = node_id(mid);
        if (id != Octree::npos)
          add_constraint(id, {{ln[std::size_t(e[0])], 0.5}, {ln[std::size_t(e[1])], 0.5}});
      }
      const int faces[6][4] = {{0, 2, 4, 6}, {1, 3, 5, 7}, {0, 1, 4, 5},
                               {2, 3, 6, 7}, {0, 1, 2, 3}, {4, 5, 6, 7}};
      for (const auto& f : faces) {
        auto c0 = corner_coord(o, f[0]), c3 = corner_coord(o, f[3]);
        std::array<std::uint32_t, 3> mid = {(c0[0] + c3[0]) / 2, (c0[1] + c3[1]) / 2,
                                            (c0[2] + c3[2]) / 2};
        std::uint32_t id = node_id(mid);
        if (id != Octree::npos)
          add_constraint(id, {{ln[std::size_t(f[0])], 0.25},
                              {ln[std::size_t(f[1])], 0.25},
                              {ln[std::size_t(f[2])], 0.25},
                              {ln[std::size_t(f[3])], 0.25}});
      }
    }
  }

  tree.constraints.clear();
  tree.constraints.reserve(hanging.size());
  for (auto& [node, c] : hanging) tree.constraints.push_back(std::move(c));

  // Full balance keeps masters regular; fail loudly if that ever breaks.
  for (const auto& c : tree.constraints)
    for (const auto& [m, w] : c.masters) {
      (void)w;
      if (hanging.count(m))
        throw Error(ErrorCode::Internal, "hanging node constrained to a hanging master");
    }
}

std::vector<std::uint32_t> face_neighbors(const Octree& tree, std::uint32_t leaf, int axis,
                                          int dir) {
  const Octant& o = tree.leaves[leaf];
  std::vector<std::uint32_t> out;
  std::int64_t n = std::int64_t(o.anchor[std::size_t(axis)]) + dir;
  if (n < 0 || n >= (std::int64_t(1) << o.level)) return out;

  std::array<std::uint32_t, 3> na = o.anchor;
  na[std::size_t(axis)] = std::uint32_t(n);

  // Same level or coarser.
  std::uint32_t host = containing_leaf_at_or_above(tree, o.level, na);
  if (host != Octree::npos) {
    out.push_back(host);
    return out;
  }
  // Finer: the 2^(dim-1) children touching the shared face.
  std::array<std::uint32_t, 3> base = {na[0] * 2, na[1] * 2, na[2] * 2};
  if (dir > 0)
    base[std::size_t(axis)] = na[std::size_t(axis)] * 2;
  else
    base[std::size_t(axis)] = na[std::size_t(axis)] * 2 + 1;
  int free_axes[2];
  int nfree = 0;
  for (int a = 0; a < tree.dim; ++a)
    if (a != axis) free_axes[nfree++] = a;
  int combos = 1 << nfree;
  for (int c = 0; c < combos; ++c) {
    std::array<std::uint32_t, 3> ca = base;
    for (int k = 0; k < nfree; ++k)
      if (c & (1 << k)) ca[std::size_t(free_axes[k])] += 1;
    std::uint32_t idx = tree.find_leaf(o.level + 1, ca);
    if (idx != Octree::npos) out.push_back(idx);
  }
  return out;
}

void write_tree_csv(const Octree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  out << (tree.dim == 2 ? "level,anchor_x,anchor_y\n" : "level,anchor_x,anchor_y,anchor_z\n");
  for (const Octant& o : tree.leaves) {
    out << int(o.level) << ',' << o.anchor[0] << ',' << o.anchor[1];
    if (tree.dim == 3) out << ',' << o.anchor[2];
    out << '\n';
  }
}

}  // namespace inrflow
