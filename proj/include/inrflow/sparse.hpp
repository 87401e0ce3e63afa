#pragma once

#include <span>
#include <vector>

#include "inrflow/core.hpp"

namespace inrflow {

struct Triplet {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

// Compressed-row storage with sorted, duplicate-free columns per row.
class SparseMatrix {
public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::uint32_t n, std::vector<Triplet> triplets);

  std::uint32_t size() const { return n_; }
  std::size_t nnz() const { return col_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& cols() const { return col_; }
  const std::vector<double>& values() const { return val_; }
  std::vector<double>& values() { return val_; }

  void multiply(std::span<const double> x, std::span<double> y) const;

  // Value at (r, c) or 0 when outside the pattern.
  double at(std::uint32_t r, std::uint32_t c) const;

private:
  std::uint32_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

}  // namespace inrflow
