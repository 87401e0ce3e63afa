#include "inrflow/surrogate.hpp"

#include <cstring>
#include <fstream>

#include "inrflow/quadrature.hpp"

namespace inrflow {

ElementMarkers classify_elements(const Octree& tree, const ImplicitField& field,
                                 double lambda_criteria, int gp_order) {
  if (gp_order < 2)
    throw Error(ErrorCode::InvalidArgument, "classify: gp_order must be >= 2");
  if (!(lambda_criteria > 0.0 && lambda_criteria <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "classify: lambda_criteria must be in (0, 1]");

  const GaussRule rule = gauss_rule(gp_order);
  const int dim = tree.dim;
  const int num_gp = dim == 2 ? gp_order * gp_order : gp_order * gp_order * gp_order;

  ElementMarkers m;
  m.lambda_criteria = lambda_criteria;
  m.gp_order = gp_order;
  m.marker.resize(tree.leaves.size());

  for (std::size_t li = 0; li < tree.leaves.size(); ++li) {
    Box b = tree.octant_box(tree.leaves[li]);
    Vec3 c = b.center();
    Vec3 half = (b.hi - b.lo) * 0.5;
    int count = 0;
    const int nz = dim == 3 ? gp_order : 1;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < gp_order; ++j)
        for (int i = 0; i < gp_order; ++i) {
          Vec3 q = c;
          q.x += half.x * rule.x[std::size_t(i)];
          q.y += half.y * rule.x[std::size_t(j)];
          if (dim == 3) q.z += half.z * rule.x[std::size_t(k)];
          double f = field.eval(q);
          if (!std::isfinite(f))
            throw Error(ErrorCode::InvalidArgument,
                        "classify: non-finite field value at a Gauss point of leaf " +
                            std::to_string(li));
          if (f < 0.0) count++;
        }
    // Exterior/Interior take precedence; testing lambda first would make the
    // Interior branch unreachable for lambda_criteria <= 1.
    if (count == 0)
      m.marker[li] = Marker::Exterior;
    else if (count == num_gp)
      m.marker[li] = Marker::Interior;
    else if (double(count) / double(num_gp) >= lambda_criteria)
      m.marker[li] = Marker::FalseIntercepted;
    else
      m.marker[li] = Marker::TrueIntercepted;
  }

  // Nodal flags consumed by the boundary extraction.
  m.node_inside.resize(tree.node_count());
  for (std::size_t n = 0; n < tree.node_count(); ++n) {
    double f = field.eval(tree.node_pos[n]);
    if (!std::isfinite(f))
      throw Error(ErrorCode::InvalidArgument, "classify: non-finite field value at node");
    m.node_inside[n] = f < 0.0 ? 1 : 0;
  }
  m.node_false_intercepted.assign(tree.node_count(), 0);
  return m;
}

namespace {

// Corners of face (axis, dir): the 2^(dim-1) leaf corners whose axis bit
// matches the direction.
inline int face_corner_count(int dim) { return dim == 2 ? 2 : 4; }

inline void face_corners(int dim, int axis, int dir, int* out) {
  int n = 0;
  for (int c = 0; c < (1 << dim); ++c)
    if (((c >> axis) & 1) == (dir > 0 ? 1 : 0)) out[n++] = c;
}

}  // namespace

SurrogateBoundary extract_surrogate_boundary(const Octree& tree, ElementMarkers& markers) {
  if (markers.marker.size() != tree.leaves.size() ||
      markers.node_inside.size() != tree.node_count())
    throw Error(ErrorCode::InvalidArgument, "extract: marker/tree shape mismatch");

  const int dim = tree.dim;
  const int nfc = face_corner_count(dim);

  SurrogateBoundary boundary;
  while (true) {
    // FalseIntercepted nodal flags, then neighbor markers via node adjacency
    // (single-process substitute for the ghost write/read).
    std::fill(markers.node_false_intercepted.begin(), markers.node_false_intercepted.end(),
              std::uint8_t(0));
    for (std::size_t li = 0; li < tree.leaves.size(); ++li)
      if (markers.marker[li] == Marker::FalseIntercepted)
        for (int c = 0; c < (1 << dim); ++c)
          markers.node_false_intercepted[tree.leaf_nodes[li][std::size_t(c)]] = 1;

    for (std::size_t li = 0; li < tree.leaves.size(); ++li) {
      Marker& mk = markers.marker[li];
      if (mk == Marker::Exterior || mk == Marker::TrueIntercepted) {
        for (int c = 0; c < (1 << dim); ++c)
          if (markers.node_false_intercepted[tree.leaf_nodes[li][std::size_t(c)]]) {
            mk = Marker::NeighborsFalseIntercepted;
            break;
          }
      }
    }

    boundary.faces.clear();
    bool reclassified = false;
    for (std::size_t li = 0; li < tree.leaves.size(); ++li) {
      Marker mk = markers.marker[li];
      bool face_bit[6] = {false, false, false, false, false, false};
      if (mk == Marker::TrueIntercepted || mk == Marker::NeighborsFalseIntercepted) {
        for (int axis = 0; axis < dim; ++axis)
          for (int dir = -1; dir <= 1; dir += 2) {
            int corners[4];
            face_corners(dim, axis, dir, corners);
            bool all = true;
            for (int c = 0; c < nfc && all; ++c) {
              std::uint32_t node = tree.leaf_nodes[li][std::size_t(corners[c])];
              if (mk == Marker::TrueIntercepted) {
                all = markers.node_inside[node] != 0;
              } else {
                all = markers.node_inside[node] != 0 ||
                      markers.node_false_intercepted[node] != 0;
              }
            }
            if (all) face_bit[2 * axis + (dir > 0 ? 1 : 0)] = true;
          }
      }
      // Opposite faces both on the boundary: sliver pinched between boundary
      // segments, excluded from the fluid and re-extracted.
      bool cycle = false;
      for (int axis = 0; axis < dim; ++axis)
        if (face_bit[2 * axis] && face_bit[2 * axis + 1]) cycle = true;
      if (cycle) {
        markers.marker[li] = Marker::FalseIntercepted;
        reclassified = true;
      } else {
        for (int axis = 0; axis < dim; ++axis)
          for (int dir = -1; dir <= 1; dir += 2)
            if (face_bit[2 * axis + (dir > 0 ? 1 : 0)])
              boundary.faces.push_back(
                  {std::uint32_t(li), std::uint8_t(axis), std::int8_t(dir)});
      }
    }
    if (!reclassified) break;
  }
  return boundary;
}

namespace {

struct GpKeyHash {
  std::size_t operator()(const std::array<std::uint64_t, 3>& c) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t v : c) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ULL;
    }
    return std::size_t(h);
  }
};

inline std::array<std::uint64_t, 3> gp_key(const Vec3& q) {
  std::array<std::uint64_t, 3> k;
  std::uint64_t bits;
  static_assert(sizeof(double) == 8);
  std::memcpy(&bits, &q.x, 8);
  k[0] = bits;
  std::memcpy(&bits, &q.y, 8);
  k[1] = bits;
  std::memcpy(&bits, &q.z, 8);
  k[2] = bits;
  return k;
}

}  // namespace

std::size_t boundary_gauss_distance_vectors(const Octree& tree, SurrogateBoundary& boundary,
                                            const ImplicitField& field, int gp_order) {
  // Mapping already filled for this rule: every point is cached, nothing to
  // evaluate.
  if (boundary.gp_order == gp_order && boundary.gp_offset.size() == boundary.faces.size() + 1 &&
      !boundary.faces.empty() && !boundary.gp.empty())
    return 0;

  const GaussRule rule = gauss_rule(gp_order);
  const int dim = tree.dim;
  const double h = default_gradient_step(field);

  boundary.gp_order = gp_order;
  boundary.gp_offset.assign(boundary.faces.size() + 1, 0);
  boundary.gp.clear();
  boundary.d.clear();

  std::unordered_map<std::array<std::uint64_t, 3>, Vec3, GpKeyHash> cache;
  std::size_t evaluations = 0;

  for (std::size_t fi = 0; fi < boundary.faces.size(); ++fi) {
    const BoundaryFace& face = boundary.faces[fi];
    Box b = tree.octant_box(tree.leaves[face.leaf]);
    Vec3 c = b.center();
    Vec3 half = (b.hi - b.lo) * 0.5;
    double plane = face.dir > 0 ? b.hi[face.axis] : b.lo[face.axis];

    int t0 = -1, t1 = -1;  // tangential axes
    for (int a = 0; a < dim; ++a)
      if (a != face.axis) (t0 < 0 ? t0 : t1) = a;

    const int n1 = dim == 3 ? gp_order : 1;
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < gp_order; ++i) {
        Vec3 q = c;
        q[face.axis] = plane;
        q[t0] = c[t0] + half[t0] * rule.x[std::size_t(i)];
        if (dim == 3) q[t1] = c[t1] + half[t1] * rule.x[std::size_t(j)];
        auto key = gp_key(q);
        auto it = cache.find(key);
        Vec3 dv;
        if (it != cache.end()) {
          dv = it->second;
        } else {
          try {
            dv = distance_vector(field, q, h);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::DegenerateGradient)
              throw Error(ErrorCode::DegenerateGradient,
                          "distance vector degenerate at face Gauss point (" +
                              format_double(q.x) + ", " + format_double(q.y) + ", " +
                              format_double(q.z) + ")");
            throw;
          }
          cache.emplace(key, dv);
          evaluations++;
        }
        boundary.gp.push_back(q);
        boundary.d.push_back(dv);
      }
    boundary.gp_offset[fi + 1] = boundary.gp.size();
  }
  return evaluations;
}

void validate_boundary(const Octree& tree, const ElementMarkers& markers,
                       const SurrogateBoundary& boundary) {
  for (const BoundaryFace& f : boundary.faces) {
    if (!is_assembled(markers.marker[f.leaf]))
      throw Error(ErrorCode::Internal, "boundary face owned by a non-assembled element");
    for (std::uint32_t n : face_neighbors(tree, f.leaf, f.axis, f.dir))
      if (is_assembled(markers.marker[n]))
        throw Error(ErrorCode::Internal, "boundary face between two assembled elements");
  }
}

void write_boundary_csv(const Octree& tree, const SurrogateBoundary& boundary,
                        const std::string& path) {
  (void)tree;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  const int dim = tree.dim;
  out << (dim == 2 ? "leaf,face,qx,qy,dx,dy\n" : "leaf,face,qx,qy,qz,dx,dy,dz\n");
  const char* face_names[6] = {"-x", "+x", "-y", "+y", "-z", "+z"};
  for (std::size_t fi = 0; fi < boundary.faces.size(); ++fi) {
    const BoundaryFace& f = boundary.faces[fi];
    auto gps = boundary.face_gps(fi);
    auto ds = boundary.face_d(fi);
    for (std::size_t g = 0; g < gps.size(); ++g) {
      out << f.leaf << ',' << face_names[2 * f.axis + (f.dir > 0 ? 1 : 0)] << ','
          << format_double(gps[g].x) << ',' << format_double(gps[g].y);
      if (dim == 3) out << ',' << format_double(gps[g].z);
      out << ',' << format_double(ds[g].x) << ',' << format_double(ds[g].y);
      if (dim == 3) out << ',' << format_double(ds[g].z);
      out << '\n';
    }
  }
}

}  // namespace inrflow
