#include "inrflow/metrics.hpp"

#include <fstream>

namespace inrflow {

double nmse(const ImplicitField& field, const SdfOracle& oracle, const Box& domain,
            double delta, int grid_res) {
  if (grid_res < 2) throw Error(ErrorCode::InvalidArgument, "nmse: grid_res must be >= 2");
  const int dim = oracle.dim();
  const double delta_char = domain.max_edge(dim);

  double acc = 0.0;
  std::size_t count = 0;
  const int nz = dim == 3 ? grid_res : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < grid_res; ++j)
      for (int i = 0; i < grid_res; ++i) {
        Vec3 x;
        x.x = domain.lo.x + (domain.hi.x - domain.lo.x) * double(i) / double(grid_res - 1);
        x.y = domain.lo.y + (domain.hi.y - domain.lo.y) * double(j) / double(grid_res - 1);
        if (dim == 3)
          x.z = domain.lo.z + (domain.hi.z - domain.lo.z) * double(k) / double(grid_res - 1);
        double s = oracle.signed_distance(x);
        if (std::abs(s) < delta) {
          double e = s - field.eval(x);
          acc += e * e;
          count++;
        }
      }
  if (count == 0)
    throw Error(ErrorCode::EmptyInput,
                "nmse: no grid points inside band delta=" + format_double(delta));
  return acc / double(count) / delta_char;
}

void SimilarityResult::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  out << "x,y,z,f_theta,s,log10_abs_err,log10_one_minus_cos\n";
  for (const SimilarityRow& r : rows)
    out << format_double(r.x.x) << ',' << format_double(r.x.y) << ',' << format_double(r.x.z)
        << ',' << format_double(r.f_theta) << ',' << format_double(r.s) << ','
        << format_double(r.log10_abs_err) << ',' << format_double(r.log10_one_minus_cos)
        << '\n';
}

SimilarityResult cosine_stats(std::span<const Vec3> d_true, std::span<const Vec3> d_field) {
  if (d_true.size() != d_field.size())
    throw Error(ErrorCode::InvalidArgument, "cosine_stats: size mismatch");
  SimilarityResult res;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < d_true.size(); ++i) {
    double na = norm(d_true[i]), nb = norm(d_field[i]);
    if (na == 0.0 || nb == 0.0) {
      res.excluded++;
      continue;
    }
    double c = dot(d_true[i], d_field[i]) / (na * nb);
    sum += c;
    sum2 += c * c;
    res.count++;
  }
  if (res.count > 0) {
    res.mean_cos = sum / double(res.count);
    double var = sum2 / double(res.count) - res.mean_cos * res.mean_cos;
    res.sd_cos = std::sqrt(std::max(var, 0.0));
  }
  return res;
}

SimilarityResult distance_vector_similarity(const ImplicitField& field, const SdfOracle& truth,
                                            std::span<const Vec3> points, double h) {
  std::vector<Vec3> d_true(points.size()), d_field(points.size());
  std::vector<bool> valid(points.size(), true);
  for (std::size_t i = 0; i < points.size(); ++i) {
    d_true[i] = truth.closest_point(points[i]) - points[i];
    try {
      d_field[i] = distance_vector(field, points[i], h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateGradient) throw;
      d_field[i] = Vec3{};  // excluded by the zero-length rule below
      valid[i] = false;
    }
  }
  SimilarityResult res = cosine_stats(d_true, d_field);

  res.rows.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    SimilarityRow row;
    row.x = points[i];
    row.s = truth.signed_distance(points[i]);
    row.f_theta = field.eval(points[i]);
    row.log10_abs_err = std::log10(std::max(std::abs(row.f_theta - row.s), 1e-300));
    double c = -1.0;
    double na = norm(d_true[i]), nb = norm(d_field[i]);
    if (valid[i] && na > 0.0 && nb > 0.0) c = dot(d_true[i], d_field[i]) / (na * nb);
    row.log10_one_minus_cos = std::log10(std::max(1.0 - c, 1e-16));
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace inrflow
