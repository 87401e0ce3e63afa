#pragma once

#include <memory>

#include "inrflow/core.hpp"

namespace inrflow {

// ----------------------------------------------------------------------------
// Signed-distance convention used everywhere: f < 0 inside the geometry
// (solid, Omega-), f > 0 outside (fluid, Omega+), f = 0 on the surface.
// Fields are immutable after construction and safe for concurrent readers.
// ----------------------------------------------------------------------------
class ImplicitField {
public:
  virtual ~ImplicitField() = default;

  virtual int dim() const = 0;

  // Raw evaluation; callers guarantee finite input. Use eval_sdf() at API
  // boundaries where inputs are untrusted.
  virtual double eval(const Vec3& x) const = 0;

  // Characteristic length of the embedding domain, used for default
  // finite-difference steps.
  virtual double char_length() const { return 2.0; }
};

// Closed-form shapes. All are exact Euclidean distances except the gyroid,
// which is a one-step Newton normalization of the triply periodic implicit
// (accurate near the surface, which is the only region SBM consumes).
class AnalyticField : public ImplicitField {
public:
  enum class Kind { Circle, Sphere, Ring, BoxShape, Cylinder, Cone, Gyroid };

  static AnalyticField circle(const Vec3& center, double r);
  static AnalyticField sphere(const Vec3& center, double r);
  static AnalyticField ring(double r1, double r2);  // 2D annulus at the origin
  static AnalyticField box_shape(const Vec3& mn, const Vec3& mx, int dim);
  // Finite capped cylinder: center, unit axis, radius, full height.
  static AnalyticField cylinder(const Vec3& center, const Vec3& axis, double r, double height);
  // One-sided infinite cone opening along `axis` from `apex`.
  static AnalyticField cone(const Vec3& apex, const Vec3& axis, double half_angle);
  static AnalyticField gyroid(double period, double thickness);

  int dim() const override { return dim_; }
  double eval(const Vec3& x) const override;
  Kind kind() const { return kind_; }

private:
  AnalyticField(Kind k, int dim) : kind_(k), dim_(dim) {}

  Kind kind_;
  int dim_;
  Vec3 a_, b_;        // center/min/apex, axis/max
  double r1_ = 0.0;   // radius / inner radius / period
  double r2_ = 0.0;   // outer radius / height / thickness / half-angle
};

// Field evaluation with input validation: rejects non-finite points.
double eval_sdf(const ImplicitField& field, const Vec3& x);

// Central-difference gradient, component i = (f(x+h e_i) - f(x-h e_i)) / 2h.
// Only the leading field.dim() components are populated.
Vec3 sdf_gradient(const ImplicitField& field, const Vec3& x, double h);

// Gradient norms below this are treated as medial-axis degeneracies.
inline constexpr double kGradientDegeneracyFloor = 0.1;

// d = -f(x) grad f / |grad f|, the vector from x to its closest surface point.
// Exactly zero when f(x) == 0; throws ErrorCode::DegenerateGradient when the
// numerical gradient norm falls below the floor.
Vec3 distance_vector(const ImplicitField& field, const Vec3& x, double h);

inline double default_gradient_step(const ImplicitField& field) {
  return 1e-4 * field.char_length();
}

}  // namespace inrflow
