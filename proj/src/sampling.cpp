#include "inrflow/sampling.hpp"

#include <algorithm>
#include <fstream>

namespace inrflow {

void SampleSet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  out << "x,y,z,s,nx,ny,nz,set\n";
  auto row = [&](const Vec3& x, double s, const Vec3& n, const char* tag) {
    out << format_double(x.x) << ',' << format_double(x.y) << ',' << format_double(x.z)
        << ',' << format_double(s) << ',' << format_double(n.x) << ','
        << format_double(n.y) << ',' << format_double(n.z) << ',' << tag << '\n';
  };
  for (const auto& p : surface) row(p.x, 0.0, p.normal, "surface");
  for (const auto& p : narrowband) row(p.x, p.s, Vec3{}, "narrowband");
  for (const auto& p : uniform) row(p.x, p.s, Vec3{}, "uniform");
}

SoupOracle::SoupOracle(std::shared_ptr<const TriangleSoup> soup) : soup_(std::move(soup)) {
  if (!soup_ || soup_->triangles.empty())
    throw Error(ErrorCode::EmptyInput, "SoupOracle: empty soup");
  cumulative_area_.reserve(soup_->triangles.size());
  double acc = 0.0;
  for (const auto& t : soup_->triangles) {
    const Vec3 &a = soup_->vertices[t[0]], &b = soup_->vertices[t[1]], &c = soup_->vertices[t[2]];
    acc += 0.5 * norm(cross(b - a, c - a));
    cumulative_area_.push_back(acc);
  }
}

double SoupOracle::signed_distance(const Vec3& x) const {
  return exact_signed_distance(*soup_, x).s;
}

Vec3 SoupOracle::closest_point(const Vec3& x) const {
  return exact_unsigned_distance(*soup_, x).foot;
}

static SurfaceSample pick_on_soup(const TriangleSoup& soup,
                                  const std::vector<double>& cumulative, Rng& rng) {
  double total = cumulative.back();
  double r = rng.next_double() * total;
  std::size_t idx =
      std::size_t(std::lower_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
  if (idx >= soup.triangles.size()) idx = soup.triangles.size() - 1;
  const auto& t = soup.triangles[idx];
  const Vec3 &a = soup.vertices[t[0]], &b = soup.vertices[t[1]], &c = soup.vertices[t[2]];
  // Uniform barycentric placement via the sqrt trick.
  double r1 = std::sqrt(rng.next_double());
  double r2 = rng.next_double();
  double u = 1.0 - r1, v = r1 * (1.0 - r2), w = r1 * r2;
  SurfaceSample s;
  s.x = a * u + b * v + c * w;
  s.normal = soup.normals[idx];
  return s;
}

SurfaceSample SoupOracle::sample_surface_point(Rng& rng) const {
  return pick_on_soup(*soup_, cumulative_area_, rng);
}

AnalyticOracle::AnalyticOracle(std::shared_ptr<const ImplicitField> field, const Box& domain)
    : field_(std::move(field)), domain_(domain) {
  if (!field_) throw Error(ErrorCode::InvalidArgument, "AnalyticOracle: null field");
}

SurfaceSample AnalyticOracle::sample_surface_point(Rng& rng) const {
  const int dim = field_->dim();
  const double h = default_gradient_step(*field_);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Vec3 p = rng.point_in_box(domain_, dim);
    bool ok = true;
    Vec3 g;
    for (int it = 0; it < 8; ++it) {
      double f = field_->eval(p);
      g = sdf_gradient(*field_, p, h);
      double g2 = norm2(g);
      if (g2 < kGradientDegeneracyFloor * kGradientDegeneracyFloor) {
        ok = false;
        break;
      }
      p -= g * (f / g2);
      if (std::abs(field_->eval(p)) < 1e-10 * field_->char_length()) break;
    }
    if (!ok) continue;
    if (std::abs(field_->eval(p)) > 1e-8 * field_->char_length()) continue;
    if (!domain_.contains(p, dim)) continue;
    SurfaceSample s;
    s.x = p;
    Vec3 n = sdf_gradient(*field_, p, h);
    double nn = norm(n);
    if (nn < kGradientDegeneracyFloor) continue;
    s.normal = n / nn;
    return s;
  }
  throw Error(ErrorCode::NonConvergence,
              "analytic surface sampling failed to project onto the zero level set");
}

Vec3 AnalyticOracle::closest_point(const Vec3& x) const {
  return x + distance_vector(*field_, x, default_gradient_step(*field_));
}

std::vector<SurfaceSample> sample_surface(const TriangleSoup& soup, std::size_t n,
                                          std::uint64_t seed) {
  if (n == 0) return {};
  SoupOracle oracle(std::make_shared<TriangleSoup>(soup));
  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle.sample_surface_point(rng));
  return out;
}

// Shared narrowband logic. |s| <= |t| <= delta always holds for the offset
// construction; a sample is a violation when the offset folded onto another
// surface sheet (concavity: s far from t) or left the sampling region.
static std::vector<VolumeSample> narrowband_impl(const SdfOracle& oracle, const Box& region,
                                                 double scale, std::size_t n, double delta,
                                                 std::uint64_t seed) {
  if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "narrowband: delta must be >= 0");
  Rng rng(seed);
  std::vector<VolumeSample> out;
  out.reserve(n);
  std::size_t attempts = 0;
  while (out.size() < n) {
    attempts++;
    SurfaceSample s = oracle.sample_surface_point(rng);
    double t = delta > 0.0 ? rng.uniform(-delta, delta) : 0.0;
    VolumeSample v;
    v.x = s.x + s.normal * t;
    v.s = oracle.signed_distance(v.x);
    bool fold = std::abs(v.s - t) > 0.01 * delta + 1e-12 * scale;
    if (!fold && region.contains(v.x, oracle.dim())) out.push_back(v);
    if (attempts >= 200 && out.size() * 10 < attempts)
      throw Error(ErrorCode::InvalidArgument,
                  "narrowband rejection rate above 90%: delta too large for this geometry");
  }
  return out;
}

std::vector<VolumeSample> sample_narrowband(const TriangleSoup& soup, std::size_t n,
                                            double delta, std::uint64_t seed) {
  if (n == 0) return {};
  SoupOracle oracle(std::make_shared<TriangleSoup>(soup));
  const double diag = soup.bbox_diag();
  Box region = soup.bbox();
  Vec3 pad{0.1 * diag, 0.1 * diag, 0.1 * diag};
  region.lo -= pad;
  region.hi += pad;
  return narrowband_impl(oracle, region, diag, n, delta, seed);
}

std::vector<Vec3> sample_uniform(const Box& domain, int dim, std::size_t n,
                                 std::uint64_t seed) {
  for (int a = 0; a < dim; ++a)
    if (!(domain.hi[a] > domain.lo[a]))
      throw Error(ErrorCode::InvalidArgument, "sample_uniform: degenerate box");
  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.point_in_box(domain, dim));
  return out;
}

SampleSet build_sample_set(const SdfOracle& oracle, const Box& domain, std::size_t n_surface,
                           std::size_t n_narrowband, std::size_t n_uniform, double delta,
                           std::uint64_t seed) {
  if (n_surface + n_narrowband + n_uniform == 0)
    throw Error(ErrorCode::InvalidArgument, "sample mix must have a positive total");
  SampleSet set;
  set.delta = delta;
  set.seed = seed;

  // Independent streams per pool so pool sizes do not perturb each other.
  Rng surf_rng(seed ^ 0x51f00001ULL);
  for (std::size_t i = 0; i < n_surface; ++i)
    set.surface.push_back(oracle.sample_surface_point(surf_rng));

  set.narrowband = narrowband_impl(oracle, domain, domain.max_edge(oracle.dim()),
                                   n_narrowband, delta, seed ^ 0xba9d0002ULL);

  std::vector<Vec3> pts = sample_uniform(domain, oracle.dim(), n_uniform, seed ^ 0x00f00003ULL);
  set.uniform.reserve(pts.size());
  for (const Vec3& p : pts) set.uniform.push_back({p, oracle.signed_distance(p)});
  return set;
}

}  // namespace inrflow
