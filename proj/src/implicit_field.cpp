#include "inrflow/implicit_field.hpp"

#include <charconv>
#include <cstdio>

namespace inrflow {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

AnalyticField AnalyticField::circle(const Vec3& center, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "circle requires r > 0");
  AnalyticField f(Kind::Circle, 2);
  f.a_ = center;
  f.r1_ = r;
  return f;
}

AnalyticField AnalyticField::sphere(const Vec3& center, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere requires r > 0");
  AnalyticField f(Kind::Sphere, 3);
  f.a_ = center;
  f.r1_ = r;
  return f;
}

AnalyticField AnalyticField::ring(double r1, double r2) {
  if (!(0.0 < r1 && r1 < r2))
    throw Error(ErrorCode::InvalidArgument, "ring requires 0 < r1 < r2");
  AnalyticField f(Kind::Ring, 2);
  f.r1_ = r1;
  f.r2_ = r2;
  return f;
}

AnalyticField AnalyticField::box_shape(const Vec3& mn, const Vec3& mx, int dim) {
  for (int a = 0; a < dim; ++a)
    if (!(mn[a] < mx[a]))
      throw Error(ErrorCode::InvalidArgument, "box requires min < max per axis");
  AnalyticField f(Kind::BoxShape, dim);
  f.a_ = mn;
  f.b_ = mx;
  return f;
}

AnalyticField AnalyticField::cylinder(const Vec3& center, const Vec3& axis, double r,
                                      double height) {
  if (!(r > 0.0) || !(height > 0.0))
    throw Error(ErrorCode::InvalidArgument, "cylinder requires r > 0, height > 0");
  double n = norm(axis);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder axis must be nonzero");
  AnalyticField f(Kind::Cylinder, 3);
  f.a_ = center;
  f.b_ = axis / n;
  f.r1_ = r;
  f.r2_ = height;
  return f;
}

AnalyticField AnalyticField::cone(const Vec3& apex, const Vec3& axis, double half_angle) {
  if (!(half_angle > 0.0 && half_angle < M_PI / 2.0))
    throw Error(ErrorCode::InvalidArgument, "cone half-angle must be in (0, pi/2)");
  double n = norm(axis);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "cone axis must be nonzero");
  AnalyticField f(Kind::Cone, 3);
  f.a_ = apex;
  f.b_ = axis / n;
  f.r2_ = half_angle;
  return f;
}

AnalyticField AnalyticField::gyroid(double period, double thickness) {
  if (!(period > 0.0) || !(thickness > 0.0))
    throw Error(ErrorCode::InvalidArgument, "gyroid requires period > 0, thickness > 0");
  AnalyticField f(Kind::Gyroid, 3);
  f.r1_ = period;
  f.r2_ = thickness;
  return f;
}

double AnalyticField::eval(const Vec3& x) const {
  switch (kind_) {
    case Kind::Circle: {
      double dx = x.x - a_.x, dy = x.y - a_.y;
      return std::sqrt(dx * dx + dy * dy) - r1_;
    }
    case Kind::Sphere:
      return norm(x - a_) - r1_;
    case Kind::Ring: {
      double r = std::sqrt(x.x * x.x + x.y * x.y);
      if (r < r1_) return r1_ - r;
      if (r > r2_) return r - r2_;
      return -std::min(r - r1_, r2_ - r);
    }
    case Kind::BoxShape: {
      Vec3 c = (a_ + b_) * 0.5;
      Vec3 half = (b_ - a_) * 0.5;
      double out2 = 0.0;
      double inner = -1e300;
      for (int a = 0; a < dim_; ++a) {
        double q = std::abs(x[a] - c[a]) - half[a];
        if (q > 0.0) out2 += q * q;
        inner = std::max(inner, q);
      }
      if (out2 > 0.0) return std::sqrt(out2);
      return inner;  // <= 0 inside
    }
    case Kind::Cylinder: {
      Vec3 p = x - a_;
      double t = dot(p, b_);
      double rad = norm(p - b_ * t);
      double dr = rad - r1_;
      double dz = std::abs(t) - 0.5 * r2_;
      double outside = std::sqrt(std::max(dr, 0.0) * std::max(dr, 0.0) +
                                 std::max(dz, 0.0) * std::max(dz, 0.0));
      return std::min(std::max(dr, dz), 0.0) + outside;
    }
    case Kind::Cone: {
      Vec3 p = x - a_;
      double t = dot(p, b_);
      double rad = norm(p - b_ * t);
      double s = rad * std::sin(r2_) + t * std::cos(r2_);
      if (s <= 0.0) return norm(p);  // apex region
      return rad * std::cos(r2_) - t * std::sin(r2_);
    }
    case Kind::Gyroid: {
      double k = 2.0 * M_PI / r1_;
      double sx = std::sin(k * x.x), cx = std::cos(k * x.x);
      double sy = std::sin(k * x.y), cy = std::cos(k * x.y);
      double sz = std::sin(k * x.z), cz = std::cos(k * x.z);
      double g = sx * cy + sy * cz + sz * cx;
      double gx = k * (cx * cy - sz * sx);
      double gy = k * (-sx * sy + cy * cz);
      double gz = k * (-sy * sz + cz * cx);
      double gn = std::sqrt(gx * gx + gy * gy + gz * gz);
      if (gn < 1e-12) gn = 1e-12;
      // Approximate distance to the sheet; negative inside the thickened wall.
      return std::abs(g) / gn - 0.5 * r2_;
    }
  }
  throw Error(ErrorCode::Internal, "unreachable analytic kind");
}

double eval_sdf(const ImplicitField& field, const Vec3& x) {
  if (!finite(x))
    throw Error(ErrorCode::InvalidArgument, "eval_sdf: non-finite query point");
  return field.eval(x);
}

Vec3 sdf_gradient(const ImplicitField& field, const Vec3& x, double h) {
  if (!(h > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sdf_gradient: step h must be > 0");
  if (!finite(x))
    throw Error(ErrorCode::InvalidArgument, "sdf_gradient: non-finite query point");
  Vec3 g;
  for (int a = 0; a < field.dim(); ++a) {
    Vec3 xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    g[a] = (field.eval(xp) - field.eval(xm)) / (2.0 * h);
  }
  return g;
}

Vec3 distance_vector(const ImplicitField& field, const Vec3& x, double h) {
  double f = eval_sdf(field, x);
  if (f == 0.0) return Vec3{};
  Vec3 g = sdf_gradient(field, x, h);
  double gn = norm(g);
  if (gn < kGradientDegeneracyFloor)
    throw Error(ErrorCode::DegenerateGradient,
                "distance_vector: gradient norm " + format_double(gn) +
                    " below degeneracy floor (medial axis?)");
  return g * (-f / gn);
}

}  // namespace inrflow
