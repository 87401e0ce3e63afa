#pragma once

#include "inrflow/core.hpp"

namespace inrflow {

// Gauss-Legendre nodes/weights on [-1, 1], orders 1..5.
struct GaussRule {
  int n = 0;
  std::array<double, 5> x{};
  std::array<double, 5> w{};
};

inline GaussRule gauss_rule(int n) {
  GaussRule r;
  r.n = n;
  switch (n) {
    case 1:
      r.x = {0.0};
      r.w = {2.0};
      return r;
    case 2:
      r.x = {-0.5773502691896257645091488, 0.5773502691896257645091488};
      r.w = {1.0, 1.0};
      return r;
    case 3:
      r.x = {-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531};
      r.w = {0.5555555555555555555555556, 0.8888888888888888888888889,
             0.5555555555555555555555556};
      return r;
    case 4:
      r.x = {-0.8611363115940525752239465, -0.3399810435848562648026658,
             0.3399810435848562648026658, 0.8611363115940525752239465};
      r.w = {0.3478548451374538573730639, 0.6521451548625461426269361,
             0.6521451548625461426269361, 0.3478548451374538573730639};
      return r;
    case 5:
      r.x = {-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
             0.5384693101056830910363144, 0.9061798459386639927976269};
      r.w = {0.2369268850561890875142640, 0.4786286704993664680412915,
             0.5688888888888888888888889, 0.4786286704993664680412915,
             0.2369268850561890875142640};
      return r;
    default:
      throw Error(ErrorCode::InvalidArgument, "gauss rule supports orders 1..5");
  }
}

}  // namespace inrflow
