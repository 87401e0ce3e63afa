#pragma once

#include <memory>

#include "inrflow/implicit_field.hpp"
#include "inrflow/triangle_mesh.hpp"

namespace inrflow {

// Closest point on a triangle (Ericson-style barycentric clamp).
Vec3 point_triangle_closest(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct DistanceQuery {
  double distance = 0.0;  // |s| for signed queries
  Vec3 foot;              // closest point on the soup
};

// Brute-force scan over all triangles; this is the ground truth the neural
// fields are measured against, so no spatial acceleration is used.
DistanceQuery exact_unsigned_distance(const TriangleSoup& soup, const Vec3& x);

struct SignedDistanceQuery {
  double s = 0.0;
  Vec3 foot;
};

// Sign from ray-crossing parity along a fixed direction, retried on
// vertex/edge grazing. Requires a watertight soup; otherwise throws
// ErrorCode::SignUnavailable (use exact_unsigned_distance instead).
SignedDistanceQuery exact_signed_distance(const TriangleSoup& soup, const Vec3& x);

// Parity test exposed for the sign-consistency property tests.
bool point_inside_soup(const TriangleSoup& soup, const Vec3& x);

// Implicit field backed by the brute-force oracle ("explicit" geometry path).
class SoupField : public ImplicitField {
public:
  explicit SoupField(std::shared_ptr<const TriangleSoup> soup, double char_length = 2.0)
      : soup_(std::move(soup)), char_length_(char_length) {
    if (!soup_ || !soup_->watertight)
      throw Error(ErrorCode::SignUnavailable, "SoupField requires a watertight soup");
  }

  int dim() const override { return 3; }
  double eval(const Vec3& x) const override { return exact_signed_distance(*soup_, x).s; }
  double char_length() const override { return char_length_; }
  const TriangleSoup& soup() const { return *soup_; }

private:
  std::shared_ptr<const TriangleSoup> soup_;
  double char_length_;
};

}  // namespace inrflow
