#include "inrflow/sparse.hpp"

#include <algorithm>

namespace inrflow {

SparseMatrix SparseMatrix::from_triplets(std::uint32_t n, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    if (t.row >= n || t.col >= n)
      throw Error(ErrorCode::InvalidArgument, "triplet index out of range");

  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  m.col_.reserve(triplets.size());
  m.val_.reserve(triplets.size());

  std::size_t i = 0;
  for (std::uint32_t r = 0; r < n; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      std::uint32_t c = triplets[i].col;
      double v = 0.0;
      while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
        v += triplets[i++].value;
      m.col_.push_back(c);
      m.val_.push_back(v);
    }
    m.row_ptr_[r + 1] = m.col_.size();
  }
  return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_)
    throw Error(ErrorCode::InvalidArgument, "matvec: dimension mismatch");
  for (std::uint32_t r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      acc += val_[k] * x[col_[k]];
    y[r] = acc;
  }
}

double SparseMatrix::at(std::uint32_t r, std::uint32_t c) const {
  auto begin = col_.begin() + std::ptrdiff_t(row_ptr_[r]);
  auto end = col_.begin() + std::ptrdiff_t(row_ptr_[r + 1]);
  auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return val_[std::size_t(it - col_.begin())];
}

}  // namespace inrflow
