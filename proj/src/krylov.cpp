#include "inrflow/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace inrflow {

namespace {

double nrm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot_v(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

Ilu0::Ilu0(const SparseMatrix& a) : pattern_(&a), val_(a.values()) {
  const std::uint32_t n = a.size();
  const auto& rp = a.row_ptr();
  const auto& cols = a.cols();
  diag_.assign(n, std::size_t(-1));
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
      if (cols[k] == r) diag_[r] = k;
  for (std::uint32_t r = 0; r < n; ++r)
    if (diag_[r] == std::size_t(-1))
      throw Error(ErrorCode::Breakdown, "ilu0: missing diagonal entry in row " +
                                            std::to_string(r));

  // IKJ factorization restricted to the pattern.
  std::vector<std::ptrdiff_t> pos(n, -1);  // column -> slot in the current row
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) pos[cols[k]] = std::ptrdiff_t(k);
    for (std::size_t kk = rp[i]; kk < rp[i + 1]; ++kk) {
      std::uint32_t k = cols[kk];
      if (k >= i) break;
      double piv = val_[diag_[k]];
      if (std::abs(piv) < 1e-300)
        throw Error(ErrorCode::Breakdown, "ilu0: zero pivot at row " + std::to_string(k));
      double lik = val_[kk] / piv;
      val_[kk] = lik;
      for (std::size_t jj = diag_[k] + 1; jj < rp[k + 1]; ++jj) {
        std::ptrdiff_t p = pos[cols[jj]];
        if (p >= 0) val_[std::size_t(p)] -= lik * val_[jj];
      }
    }
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) pos[cols[k]] = -1;
    if (std::abs(val_[diag_[i]]) < 1e-300)
      throw Error(ErrorCode::Breakdown, "ilu0: zero pivot at row " + std::to_string(i));
  }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const {
  const std::uint32_t n = pattern_->size();
  const auto& rp = pattern_->row_ptr();
  const auto& cols = pattern_->cols();
  // L z = r (unit lower)
  for (std::uint32_t i = 0; i < n; ++i) {
    double acc = r[i];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (cols[k] >= i) break;
      acc -= val_[k] * z[cols[k]];
    }
    z[i] = acc;
  }
  // U z = z
  for (std::uint32_t ii = n; ii-- > 0;) {
    double acc = z[ii];
    for (std::size_t k = diag_[ii] + 1; k < rp[ii + 1]; ++k) acc -= val_[k] * z[cols[k]];
    z[ii] = acc / val_[diag_[ii]];
  }
}

namespace {

struct Preconditioner {
  PrecondKind kind;
  std::vector<double> jacobi;
  std::unique_ptr<Ilu0> ilu;

  void apply(std::span<const double> r, std::span<double> z) const {
    switch (kind) {
      case PrecondKind::None:
        std::copy(r.begin(), r.end(), z.begin());
        return;
      case PrecondKind::Jacobi:
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] * jacobi[i];
        return;
      case PrecondKind::Ilu0:
        ilu->apply(r, z);
        return;
    }
  }
};

Preconditioner make_precond(const SparseMatrix& a, PrecondKind kind) {
  Preconditioner p{kind, {}, nullptr};
  if (kind == PrecondKind::Jacobi) {
    p.jacobi.resize(a.size());
    for (std::uint32_t i = 0; i < a.size(); ++i) {
      double d = a.at(i, i);
      if (d == 0.0)
        throw Error(ErrorCode::Breakdown, "jacobi: zero diagonal at row " + std::to_string(i));
      p.jacobi[i] = 1.0 / d;
    }
  } else if (kind == PrecondKind::Ilu0) {
    p.ilu = std::make_unique<Ilu0>(a);
  }
  return p;
}

KrylovStats bicgstab(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const Preconditioner& pc, const KrylovOptions& opts) {
  const std::size_t n = a.size();
  double bnorm = nrm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  const double target = opts.rtol * bnorm;

  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  r0 = r;

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double rnorm = nrm2(r);
  if (rnorm <= target) return {0, rnorm};

  for (std::size_t it = 1; it <= opts.maxit; ++it) {
    double rho_new = dot_v(r0, r);
    if (std::abs(rho_new) < 1e-300)
      throw Error(ErrorCode::Breakdown, "bicgstab: rho breakdown at iteration " +
                                            std::to_string(it));
    if (it == 1) {
      p = r;
    } else {
      double beta = (rho_new / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    pc.apply(p, phat);
    a.multiply(phat, v);
    double r0v = dot_v(r0, v);
    if (std::abs(r0v) < 1e-300)
      throw Error(ErrorCode::Breakdown, "bicgstab: alpha breakdown at iteration " +
                                            std::to_string(it));
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (nrm2(s) <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      a.multiply(x, t);
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = b[i] - t[i];
        res += d * d;
      }
      return {it, std::sqrt(res)};
    }
    pc.apply(s, shat);
    a.multiply(shat, t);
    double tt = dot_v(t, t);
    if (tt < 1e-300)
      throw Error(ErrorCode::Breakdown, "bicgstab: omega breakdown at iteration " +
                                            std::to_string(it));
    omega = dot_v(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    rnorm = nrm2(r);
    if (rnorm <= target) {
      a.multiply(x, t);
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = b[i] - t[i];
        res += d * d;
      }
      double true_res = std::sqrt(res);
      if (true_res <= target) return {it, true_res};
      // Recurrence drifted from the true residual; refresh and continue.
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
      rnorm = true_res;
    }
    if (std::abs(omega) < 1e-300)
      throw Error(ErrorCode::Breakdown, "bicgstab: omega underflow at iteration " +
                                            std::to_string(it));
  }
  throw Error(ErrorCode::NonConvergence,
              "bicgstab: no convergence in " + std::to_string(opts.maxit) +
                  " iterations (residual " + format_double(rnorm / bnorm) + " of rhs)");
}

KrylovStats gmres(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                  const Preconditioner& pc, const KrylovOptions& opts) {
  const std::size_t n = a.size();
  const int m = std::max(1, opts.gmres_restart);
  double bnorm = nrm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  const double target = opts.rtol * bnorm;

  const std::size_t mm = std::size_t(m);
  std::vector<std::vector<double>> v(mm + 1, std::vector<double>(n));
  std::vector<std::vector<double>> z(mm, std::vector<double>(n));
  std::vector<double> h((mm + 1) * mm, 0.0);
  std::vector<double> cs(mm, 0.0), sn(mm, 0.0), g(mm + 1, 0.0);
  std::vector<double> w(n), tmp(n);

  std::size_t total_it = 0;
  auto H = [&](int i, int j) -> double& { return h[std::size_t(i * m + j)]; };

  while (total_it < opts.maxit) {
    a.multiply(x, tmp);
    for (std::size_t i = 0; i < n; ++i) v[0][i] = b[i] - tmp[i];
    double beta = nrm2(v[0]);
    if (beta <= target) return {total_it, beta};
    for (std::size_t i = 0; i < n; ++i) v[0][i] /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_it < opts.maxit; ++k, ++total_it) {
      pc.apply(v[std::size_t(k)], z[std::size_t(k)]);
      a.multiply(z[std::size_t(k)], w);
      for (int i = 0; i <= k; ++i) {
        double hik = dot_v(w, v[std::size_t(i)]);
        H(i, k) = hik;
        for (std::size_t q = 0; q < n; ++q) w[q] -= hik * v[std::size_t(i)][q];
      }
      double hnext = nrm2(w);
      H(k + 1, k) = hnext;
      if (hnext > 1e-300)
        for (std::size_t q = 0; q < n; ++q) v[std::size_t(k + 1)][q] = w[q] / hnext;

      for (int i = 0; i < k; ++i) {
        double t1 = cs[std::size_t(i)] * H(i, k) + sn[std::size_t(i)] * H(i + 1, k);
        double t2 = -sn[std::size_t(i)] * H(i, k) + cs[std::size_t(i)] * H(i + 1, k);
        H(i, k) = t1;
        H(i + 1, k) = t2;
      }
      double denom = std::hypot(H(k, k), H(k + 1, k));
      if (denom < 1e-300)
        throw Error(ErrorCode::Breakdown, "gmres: happy-breakdown rotation degenerate");
      cs[std::size_t(k)] = H(k, k) / denom;
      sn[std::size_t(k)] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[std::size_t(k + 1)] = -sn[std::size_t(k)] * g[std::size_t(k)];
      g[std::size_t(k)] = cs[std::size_t(k)] * g[std::size_t(k)];

      if (std::abs(g[std::size_t(k + 1)]) <= target || hnext <= 1e-300) {
        ++k;
        ++total_it;
        break;
      }
    }

    // Back-substitute y and update x += Z y.
    std::vector<double> y(std::size_t(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double acc = g[std::size_t(i)];
      for (int j = i + 1; j < k; ++j) acc -= H(i, j) * y[std::size_t(j)];
      y[std::size_t(i)] = acc / H(i, i);
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t q = 0; q < n; ++q) x[q] += y[std::size_t(j)] * z[std::size_t(j)][q];

    a.multiply(x, tmp);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = b[i] - tmp[i];
      res += d * d;
    }
    double true_res = std::sqrt(res);
    if (true_res <= target) return {total_it, true_res};
  }
  a.multiply(x, tmp);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = b[i] - tmp[i];
    res += d * d;
  }
  throw Error(ErrorCode::NonConvergence,
              "gmres: no convergence in " + std::to_string(opts.maxit) +
                  " iterations (residual " + format_double(std::sqrt(res) / bnorm) +
                  " of rhs)");
}

}  // namespace

KrylovStats solve_krylov(const SparseMatrix& a, std::span<const double> b,
                         std::vector<double>& x, const KrylovOptions& opts) {
  if (b.size() != a.size())
    throw Error(ErrorCode::InvalidArgument, "solve: rhs dimension mismatch");
  if (x.size() != a.size()) x.assign(a.size(), 0.0);

  Preconditioner pc = make_precond(a, opts.precond);
  switch (opts.method) {
    case KrylovMethod::BiCgStab:
      return bicgstab(a, b, x, pc, opts);
    case KrylovMethod::Gmres:
      return gmres(a, b, x, pc, opts);
  }
  throw Error(ErrorCode::Internal, "unreachable Krylov method");
}

}  // namespace inrflow
