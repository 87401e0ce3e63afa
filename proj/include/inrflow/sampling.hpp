#pragma once

#include <memory>
#include <string>
#include <vector>

#include "inrflow/mesh_distance.hpp"

namespace inrflow {

struct SurfaceSample {
  Vec3 x;
  Vec3 normal;  // outward unit normal
};

struct VolumeSample {
  Vec3 x;
  double s = 0.0;  // exact signed distance at x
};

// Hybrid sample set: surface points P_S, narrowband points P_NB with
// |s| <= delta, and uniform points P_U over the bounding domain.
// Regeneration with the same seed is bit-identical.
struct SampleSet {
  std::vector<SurfaceSample> surface;
  std::vector<VolumeSample> narrowband;
  std::vector<VolumeSample> uniform;
  double delta = 0.0;
  std::uint64_t seed = 0;

  void write_csv(const std::string& path) const;
};

// Ground-truth geometry supervision: either a watertight soup with the
// brute-force oracle behind it, or an analytic field.
class SdfOracle {
public:
  virtual ~SdfOracle() = default;
  virtual int dim() const = 0;
  virtual double signed_distance(const Vec3& x) const = 0;
  virtual SurfaceSample sample_surface_point(Rng& rng) const = 0;
  // Closest point on the true surface; ground truth for distance vectors.
  virtual Vec3 closest_point(const Vec3& x) const = 0;
};

class SoupOracle : public SdfOracle {
public:
  explicit SoupOracle(std::shared_ptr<const TriangleSoup> soup);
  int dim() const override { return 3; }
  double signed_distance(const Vec3& x) const override;
  SurfaceSample sample_surface_point(Rng& rng) const override;
  Vec3 closest_point(const Vec3& x) const override;
  const TriangleSoup& soup() const { return *soup_; }

private:
  std::shared_ptr<const TriangleSoup> soup_;
  std::vector<double> cumulative_area_;
};

// Surface points found by Newton projection onto the zero level set.
class AnalyticOracle : public SdfOracle {
public:
  AnalyticOracle(std::shared_ptr<const ImplicitField> field, const Box& domain);
  int dim() const override { return field_->dim(); }
  double signed_distance(const Vec3& x) const override { return field_->eval(x); }
  SurfaceSample sample_surface_point(Rng& rng) const override;
  Vec3 closest_point(const Vec3& x) const override;
  const ImplicitField& field() const { return *field_; }

private:
  std::shared_ptr<const ImplicitField> field_;
  Box domain_;
};

// Area-weighted triangle selection, then uniform barycentric placement.
std::vector<SurfaceSample> sample_surface(const TriangleSoup& soup, std::size_t n,
                                          std::uint64_t seed);

// Surface sample offset by t * normal, t uniform in [-delta, delta]; the
// stored distance comes from the exact oracle and offsets that land outside
// the band (concavities) are rejected. Rejection rate > 90% is an error.
std::vector<VolumeSample> sample_narrowband(const TriangleSoup& soup, std::size_t n,
                                            double delta, std::uint64_t seed);

std::vector<Vec3> sample_uniform(const Box& domain, int dim, std::size_t n,
                                 std::uint64_t seed);

// Full hybrid sampling pipeline over any oracle.
SampleSet build_sample_set(const SdfOracle& oracle, const Box& domain, std::size_t n_surface,
                           std::size_t n_narrowband, std::size_t n_uniform, double delta,
                           std::uint64_t seed);

}  // namespace inrflow
