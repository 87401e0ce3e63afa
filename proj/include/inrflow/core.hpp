#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace inrflow {

// ----------------------------------------------------------------------------
// Error handling: one exception type with a machine-readable code so the CLI
// can map failures to exit codes without string matching.
// ----------------------------------------------------------------------------
enum class ErrorCode {
  InvalidArgument,   // bad parameters, domain errors on inputs
  Io,                // unreadable file, write failure
  Format,            // malformed STL/OBJ/model/config record
  EmptyInput,        // empty mesh, empty band, zero-extent geometry
  SignUnavailable,   // non-watertight soup queried for signed distance
  DegenerateGradient,// medial-axis / vanishing-gradient query
  TrainingDiverged,
  NonConvergence,    // Krylov or Newton failed to reach tolerance
  Breakdown,         // zero pivot, stagnation inside a Krylov method
  Internal
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// ----------------------------------------------------------------------------
// Small dense vector used for points, velocities and normals in 2D and 3D.
// The z component is carried but ignored by 2D code paths.
// ----------------------------------------------------------------------------
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double norm2(const Vec3& v) { return dot(v, v); }
inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Axis-aligned box. `dim` is passed by callers; the z extent of 2D boxes is 0.
struct Box {
  Vec3 lo, hi;

  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  double max_edge(int dim) const {
    double m = 0.0;
    for (int a = 0; a < dim; ++a) m = std::max(m, hi[a] - lo[a]);
    return m;
  }
  double diagonal(int dim) const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
    return std::sqrt(s);
  }
  bool contains(const Vec3& p, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
  }
};

// ----------------------------------------------------------------------------
// Deterministic RNG. splitmix64 gives identical streams on every platform,
// which the sampling and training determinism contracts rely on; the standard
// library distributions are implementation-defined and unusable here.
// ----------------------------------------------------------------------------
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; second deviate cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do { u1 = next_double(); } while (u1 <= 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    have_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec3 point_in_box(const Box& b, int dim) {
    Vec3 p;
    for (int a = 0; a < dim; ++a) p[a] = uniform(b.lo[a], b.hi[a]);
    return p;
  }

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Shortest-form decimal that round-trips a double; used by every text writer
// so reruns produce byte-identical files.
std::string format_double(double v);

}  // namespace inrflow
