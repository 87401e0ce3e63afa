#include "inrflow/triangle_mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace inrflow {

Box TriangleSoup::bbox() const {
  Box b;
  b.lo = {1e300, 1e300, 1e300};
  b.hi = {-1e300, -1e300, -1e300};
  for (const Vec3& v : vertices)
    for (int a = 0; a < 3; ++a) {
      b.lo[a] = std::min(b.lo[a], v[a]);
      b.hi[a] = std::max(b.hi[a], v[a]);
    }
  return b;
}

double TriangleSoup::total_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const Vec3 &p0 = vertices[t[0]], &p1 = vertices[t[1]], &p2 = vertices[t[2]];
    area += 0.5 * norm(cross(p1 - p0, p2 - p0));
  }
  return area;
}

Vec3 TriangleSoup::centroid() const {
  Vec3 c;
  double area = 0.0;
  for (const auto& t : triangles) {
    const Vec3 &p0 = vertices[t[0]], &p1 = vertices[t[1]], &p2 = vertices[t[2]];
    double a = 0.5 * norm(cross(p1 - p0, p2 - p0));
    c += (p0 + p1 + p2) * (a / 3.0);
    area += a;
  }
  if (area <= 0.0) return {};
  return c / area;
}

static bool compute_watertight(const TriangleSoup& soup) {
  // Edge keyed by sorted vertex pair; watertight iff every edge count == 2.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : soup.triangles)
    for (int e = 0; e < 3; ++e) {
      std::uint32_t a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edges[{a, b}]++;
    }
  for (const auto& [k, c] : edges)
    if (c != 2) return false;
  return !soup.triangles.empty();
}

TriangleSoup make_soup(std::vector<Vec3> vertices,
                       std::vector<std::array<std::uint32_t, 3>> triangles) {
  TriangleSoup soup;
  soup.vertices = std::move(vertices);
  for (const auto& t : triangles)
    for (std::uint32_t idx : t)
      if (idx >= soup.vertices.size())
        throw Error(ErrorCode::Format, "triangle index out of range");

  Box bb;
  bb.lo = {1e300, 1e300, 1e300};
  bb.hi = {-1e300, -1e300, -1e300};
  for (const Vec3& v : soup.vertices)
    for (int a = 0; a < 3; ++a) {
      bb.lo[a] = std::min(bb.lo[a], v[a]);
      bb.hi[a] = std::max(bb.hi[a], v[a]);
    }
  double diag2 = soup.vertices.empty() ? 0.0 : norm2(bb.hi - bb.lo);
  double area_floor = 1e-14 * diag2;

  for (const auto& t : triangles) {
    const Vec3 &p0 = soup.vertices[t[0]], &p1 = soup.vertices[t[1]], &p2 = soup.vertices[t[2]];
    Vec3 n = cross(p1 - p0, p2 - p0);
    double a2 = norm(n);  // twice the area
    if (0.5 * a2 <= area_floor) {
      soup.dropped_degenerate++;
      continue;
    }
    soup.triangles.push_back(t);
    soup.normals.push_back(n / a2);
  }
  if (soup.triangles.empty())
    throw Error(ErrorCode::EmptyInput, "mesh has no non-degenerate triangles");
  soup.watertight = compute_watertight(soup);
  return soup;
}

// ---------------------------------------------------------------------------
// STL / OBJ readers
// ---------------------------------------------------------------------------

// STL files repeat vertices per facet; weld bit-identical coordinates so the
// index-based watertight test can see shared edges.
struct VertexWelder {
  std::vector<Vec3> verts;
  std::map<std::array<double, 3>, std::uint32_t> lookup;

  std::uint32_t add(const Vec3& v) {
    std::array<double, 3> key{v.x, v.y, v.z};
    auto it = lookup.find(key);
    if (it != lookup.end()) return it->second;
    verts.push_back(v);
    std::uint32_t id = std::uint32_t(verts.size() - 1);
    lookup[key] = id;
    return id;
  }
};

static TriangleSoup parse_stl_ascii(std::istream& in) {
  VertexWelder weld;
  std::vector<std::array<std::uint32_t, 3>> tris;
  std::string tok;
  std::vector<Vec3> face;
  while (in >> tok) {
    if (tok == "vertex") {
      Vec3 v;
      if (!(in >> v.x >> v.y >> v.z))
        throw Error(ErrorCode::Format, "STL: malformed vertex record");
      face.push_back(v);
    } else if (tok == "endfacet") {
      if (face.size() != 3)
        throw Error(ErrorCode::Format, "STL: facet without exactly 3 vertices");
      tris.push_back({weld.add(face[0]), weld.add(face[1]), weld.add(face[2])});
      face.clear();
    }
  }
  if (!face.empty()) throw Error(ErrorCode::Format, "STL: truncated facet");
  if (tris.empty()) throw Error(ErrorCode::EmptyInput, "STL: no facets");
  return make_soup(std::move(weld.verts), std::move(tris));
}

static TriangleSoup parse_stl_binary(const std::string& bytes) {
  if (bytes.size() < 84) throw Error(ErrorCode::Format, "binary STL: truncated header");
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  if (bytes.size() != 84 + std::size_t(count) * 50)
    throw Error(ErrorCode::Format, "binary STL: size does not match facet count");
  if (count == 0) throw Error(ErrorCode::EmptyInput, "binary STL: no facets");
  VertexWelder weld;
  std::vector<std::array<std::uint32_t, 3>> tris;
  tris.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* rec = bytes.data() + 84 + std::size_t(i) * 50;
    float f[12];
    std::memcpy(f, rec, 48);  // normal + 3 vertices
    std::array<std::uint32_t, 3> tri;
    for (int v = 0; v < 3; ++v)
      tri[v] = weld.add({double(f[3 + 3 * v]), double(f[4 + 3 * v]), double(f[5 + 3 * v])});
    tris.push_back(tri);
  }
  return make_soup(std::move(weld.verts), std::move(tris));
}

static TriangleSoup parse_obj(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<std::array<std::uint32_t, 3>> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z))
        throw Error(ErrorCode::Format, "OBJ: malformed v record: " + line);
      verts.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string ref;
      while (ls >> ref) {
        // accept i, i/t, i/t/n, i//n
        std::size_t slash = ref.find('/');
        std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
        long v = 0;
        try {
          v = std::stol(head);
        } catch (...) {
          throw Error(ErrorCode::Format, "OBJ: malformed f record: " + line);
        }
        if (v < 0) v = long(verts.size()) + v + 1;  // negative = relative
        if (v <= 0 || std::size_t(v) > verts.size())
          throw Error(ErrorCode::Format, "OBJ: f index out of range: " + line);
        idx.push_back(std::uint32_t(v - 1));
      }
      if (idx.size() < 3) throw Error(ErrorCode::Format, "OBJ: face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        tris.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  if (tris.empty()) throw Error(ErrorCode::EmptyInput, "OBJ: no faces");
  return make_soup(std::move(verts), std::move(tris));
}

TriangleSoup load_triangle_soup(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open mesh file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.empty()) throw Error(ErrorCode::EmptyInput, "empty mesh file: " + path);

  auto ends_with = [&](const char* suf) {
    std::string s = path;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    std::string e(suf);
    return s.size() >= e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0;
  };

  if (ends_with(".obj")) {
    std::istringstream ss(bytes);
    return parse_obj(ss);
  }
  // STL: a file is binary iff its size matches the 84 + 50n layout; ASCII
  // files start with "solid" but so do some binary exports, so size decides.
  if (bytes.size() >= 84) {
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    if (bytes.size() == 84 + std::size_t(count) * 50 && count > 0)
      return parse_stl_binary(bytes);
  }
  if (bytes.rfind("solid", 0) == 0) {
    std::istringstream ss(bytes);
    return parse_stl_ascii(ss);
  }
  throw Error(ErrorCode::Format, "unrecognized mesh format: " + path);
}

void save_stl_ascii(const TriangleSoup& soup, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  out << "solid inrflow\n";
  for (std::size_t i = 0; i < soup.triangles.size(); ++i) {
    const auto& t = soup.triangles[i];
    const Vec3& n = soup.normals[i];
    out << "  facet normal " << format_double(n.x) << ' ' << format_double(n.y) << ' '
        << format_double(n.z) << "\n    outer loop\n";
    for (int v = 0; v < 3; ++v) {
      const Vec3& p = soup.vertices[t[v]];
      out << "      vertex " << format_double(p.x) << ' ' << format_double(p.y) << ' '
          << format_double(p.z) << '\n';
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid inrflow\n";
}

TriangleSoup rescale_to_domain(const TriangleSoup& soup, const Box& domain, double fraction) {
  if (soup.vertices.empty()) throw Error(ErrorCode::EmptyInput, "rescale: empty soup");
  if (!(fraction > 0.0)) throw Error(ErrorCode::InvalidArgument, "rescale: fraction <= 0");
  Box bb = soup.bbox();
  Vec3 ext = bb.hi - bb.lo;
  double longest = std::max({ext.x, ext.y, ext.z});
  if (!(longest > 0.0)) throw Error(ErrorCode::EmptyInput, "rescale: zero-extent soup");
  double edge = std::min({domain.hi.x - domain.lo.x, domain.hi.y - domain.lo.y,
                          domain.hi.z - domain.lo.z});
  double scale = fraction * edge / longest;
  Vec3 bc = bb.center();
  Vec3 dc = domain.center();

  TriangleSoup out = soup;
  for (Vec3& v : out.vertices) v = dc + (v - bc) * scale;
  return out;
}

TriangleSoup icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Vec3& v : verts) v = v / norm(v);

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]) * 0.5;
      m = m / norm(m);
      verts.push_back(m);
      std::uint32_t id = std::uint32_t(verts.size() - 1);
      midpoint[{key.first, key.second}] = id;
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& tr : tris) {
      std::uint32_t a = mid(tr[0], tr[1]), b = mid(tr[1], tr[2]), c = mid(tr[2], tr[0]);
      next.push_back({tr[0], a, c});
      next.push_back({tr[1], b, a});
      next.push_back({tr[2], c, b});
      next.push_back({a, b, c});
    }
    tris = std::move(next);
  }
  for (Vec3& v : verts) v *= radius;
  return make_soup(std::move(verts), std::move(tris));
}

}  // namespace inrflow
