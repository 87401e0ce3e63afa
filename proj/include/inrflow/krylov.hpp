#pragma once

#include "inrflow/sparse.hpp"

namespace inrflow {

enum class KrylovMethod { BiCgStab, Gmres };
enum class PrecondKind { None, Jacobi, Ilu0 };

struct KrylovOptions {
  KrylovMethod method = KrylovMethod::BiCgStab;
  PrecondKind precond = PrecondKind::Ilu0;
  double rtol = 1e-8;
  std::size_t maxit = 2000;
  int gmres_restart = 50;
};

struct KrylovStats {
  std::size_t iterations = 0;
  double final_residual = 0.0;  // ||b - A x||_2
};

// Zero-fill incomplete LU on the matrix sparsity pattern.
class Ilu0 {
public:
  explicit Ilu0(const SparseMatrix& a);  // throws ErrorCode::Breakdown on zero pivot
  void apply(std::span<const double> r, std::span<double> z) const;

private:
  const SparseMatrix* pattern_;
  std::vector<double> val_;
  std::vector<std::size_t> diag_;
};

// Solves A x = b to ||b - A x|| <= rtol ||b||; x holds the initial guess on
// entry and the solution on success. Throws NonConvergence past maxit and
// Breakdown on method degeneracies.
KrylovStats solve_krylov(const SparseMatrix& a, std::span<const double> b,
                         std::vector<double>& x, const KrylovOptions& opts);

}  // namespace inrflow
