#pragma once

#include <span>
#include <string>

#include "inrflow/sampling.hpp"

namespace inrflow {

// Band-restricted normalized mean squared error: mean of (s_i - f(x_i))^2
// over grid points with |s_i| < delta, divided by the characteristic
// dimension of the domain. Only band points are evaluated through the field.
double nmse(const ImplicitField& field, const SdfOracle& oracle, const Box& domain,
            double delta, int grid_res);

struct SimilarityRow {
  Vec3 x;
  double f_theta = 0.0;
  double s = 0.0;
  double log10_abs_err = 0.0;
  double log10_one_minus_cos = 0.0;
};

struct SimilarityResult {
  double mean_cos = 0.0;
  double sd_cos = 0.0;
  std::size_t count = 0;     // points contributing to the statistics
  std::size_t excluded = 0;  // zero-length or degenerate-gradient points
  std::vector<SimilarityRow> rows;

  void write_csv(const std::string& path) const;
};

// Cosine similarity statistics over explicit vector pairs (the metric core).
SimilarityResult cosine_stats(std::span<const Vec3> d_true, std::span<const Vec3> d_field);

// Compares the field's distance vectors against oracle ground truth at the
// given points (typically surrogate-boundary Gauss points).
SimilarityResult distance_vector_similarity(const ImplicitField& field, const SdfOracle& truth,
                                            std::span<const Vec3> points, double h);

}  // namespace inrflow
