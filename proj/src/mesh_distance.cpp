#include "inrflow/mesh_distance.hpp"

namespace inrflow {

Vec3 point_triangle_closest(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double v = d1 / (d1 - d3);
    return a + ab * v;
  }

  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double w = d2 / (d2 - d6);
    return a + ac * w;
  }

  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + (c - b) * w;
  }

  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return a + ab * v + ac * w;
}

DistanceQuery exact_unsigned_distance(const TriangleSoup& soup, const Vec3& x) {
  if (!finite(x))
    throw Error(ErrorCode::InvalidArgument, "distance query: non-finite point");
  DistanceQuery best;
  double best2 = 1e300;
  for (const auto& t : soup.triangles) {
    Vec3 q = point_triangle_closest(x, soup.vertices[t[0]], soup.vertices[t[1]],
                                    soup.vertices[t[2]]);
    double d2 = norm2(q - x);
    if (d2 < best2) {
      best2 = d2;
      best.foot = q;
    }
  }
  best.distance = std::sqrt(best2);
  return best;
}

// Watertight ray/triangle crossing count. Returns -1 when the ray grazes a
// vertex/edge or runs parallel to a triangle, so the caller can retry.
static int count_crossings(const TriangleSoup& soup, const Vec3& origin, const Vec3& dir) {
  const double eps_det = 1e-12;
  const double eps_bary = 1e-9;
  int crossings = 0;
  for (const auto& t : soup.triangles) {
    const Vec3 &a = soup.vertices[t[0]], &b = soup.vertices[t[1]], &c = soup.vertices[t[2]];
    Vec3 e1 = b - a, e2 = c - a;
    Vec3 pvec = cross(dir, e2);
    double det = dot(e1, pvec);
    double scale = norm(e1) * norm(e2);
    if (std::abs(det) <= eps_det * scale) {
      // Parallel or degenerate wrt this triangle; only a problem if the ray
      // could actually pass near its plane.
      Vec3 q = point_triangle_closest(origin, a, b, c);
      Vec3 w = q - origin;
      double along = dot(w, dir);
      double off2 = norm2(w) - along * along;
      if (along > 0.0 && off2 <= 1e-18 * scale) return -1;
      continue;
    }
    double inv = 1.0 / det;
    Vec3 tvec = origin - a;
    double u = dot(tvec, pvec) * inv;
    if (u < -eps_bary || u > 1.0 + eps_bary) continue;
    Vec3 qvec = cross(tvec, e1);
    double v = dot(dir, qvec) * inv;
    if (v < -eps_bary || u + v > 1.0 + eps_bary) continue;
    double dist = dot(e2, qvec) * inv;
    if (dist <= 0.0) continue;
    // Hit within the grazing margin of an edge or vertex: ambiguous.
    if (u < eps_bary || v < eps_bary || u + v > 1.0 - eps_bary) return -1;
    crossings++;
  }
  return crossings;
}

bool point_inside_soup(const TriangleSoup& soup, const Vec3& x) {
  // Deterministic retry directions: irrational-ish base direction, then a
  // fixed pseudo-random sequence.
  Rng rng(0x5eed0f00dULL);
  Vec3 dir{0.57735026918962577, 0.51449575542752646, 0.63259899071719517};
  for (int attempt = 0; attempt < 64; ++attempt) {
    int c = count_crossings(soup, x, dir);
    if (c >= 0) return (c % 2) == 1;
    dir = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double n = norm(dir);
    if (n < 0.1) dir = {1.0, 0.3, 0.7};
    else dir = dir / n;
  }
  throw Error(ErrorCode::Internal, "ray parity: all retry directions grazed");
}

SignedDistanceQuery exact_signed_distance(const TriangleSoup& soup, const Vec3& x) {
  if (!soup.watertight)
    throw Error(ErrorCode::SignUnavailable,
                "signed distance needs a watertight soup (unsigned query still available)");
  DistanceQuery d = exact_unsigned_distance(soup, x);
  SignedDistanceQuery r;
  r.foot = d.foot;
  if (d.distance == 0.0) {
    r.s = 0.0;
    return r;
  }
  r.s = point_inside_soup(soup, x) ? -d.distance : d.distance;
  return r;
}

}  // namespace inrflow
