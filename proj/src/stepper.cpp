#include "inrflow/fem.hpp"
#include "inrflow/quadrature.hpp"

namespace inrflow {

namespace {

std::vector<double> pack_state(int dim, const FlowState& s) {
  std::size_t n = s.pressure.size();
  std::vector<double> x((std::size_t(dim) + 1) * n);
  for (std::size_t node = 0; node < n; ++node) {
    for (int c = 0; c < dim; ++c)
      x[node * std::size_t(dim + 1) + std::size_t(c)] =
          s.velocity[node * std::size_t(dim) + std::size_t(c)];
    x[node * std::size_t(dim + 1) + std::size_t(dim)] = s.pressure[node];
  }
  return x;
}

void unpack_state(int dim, std::span<const double> x, FlowState& s) {
  std::size_t n = s.pressure.size();
  for (std::size_t node = 0; node < n; ++node) {
    for (int c = 0; c < dim; ++c)
      s.velocity[node * std::size_t(dim) + std::size_t(c)] =
          x[node * std::size_t(dim + 1) + std::size_t(c)];
    s.pressure[node] = x[node * std::size_t(dim + 1) + std::size_t(dim)];
  }
}

double norm2_vec(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

FemSystem::StepStats FemSystem::bdf2_step(FlowState& state) const {
  if (!(state.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "step: dt must be > 0");
  const bool bootstrap = state.step_index == 0;
  const double c0 = bootstrap ? 1.0 : 1.5;
  const double c1 = bootstrap ? -1.0 : -2.0;
  const double c2 = bootstrap ? 0.0 : 0.5;
  const double t_new = state.time + state.dt;

  Constraints cons = build_constraints(t_new);

  // Shift the history levels for this solve: the kernel sees u^n, u^{n-1}.
  FlowState work = state;
  work.velocity_prev = state.velocity;
  work.velocity_prev2 = state.velocity_prev;
  std::vector<double> x = pack_state(dim_, work);
  cons.enforce(x);
  unpack_state(dim_, x, work);

  StepStats stats;
  std::vector<double> residual;
  std::vector<Triplet> jac;
  std::vector<Triplet> jac_red;
  std::vector<double> b_unused;

  double res0 = 0.0;
  bool converged = false;
  for (int it = 0; it <= params_.newton_max_iters; ++it) {
    assemble(work, c0, c1, c2, t_new, residual, &jac);
    std::vector<double> res_f = cons.reduce_vector(residual);
    double rnorm = norm2_vec(res_f);
    stats.residual_history.push_back(rnorm);
    if (it == 0) res0 = std::max(rnorm, 1e-300);
    if (rnorm <= std::max(params_.newton_rtol * res0, params_.newton_atol)) {
      converged = true;
      break;
    }
    if (it == params_.newton_max_iters) break;

    // Increment form: (R^T J R) delta = -R^T F; constraint increments are
    // homogeneous so Dirichlet values and hanging interpolation survive.
    cons.reduce(jac, {}, jac_red, b_unused);
    SparseMatrix a = SparseMatrix::from_triplets(cons.free_count(), std::move(jac_red));
    for (double& v : res_f) v = -v;
    std::vector<double> delta(cons.free_count(), 0.0);
    try {
      KrylovStats ks = solve_krylov(a, res_f, delta, params_.linear);
      stats.krylov_iterations += ks.iterations;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Breakdown && e.code() != ErrorCode::NonConvergence) throw;
      // GMRES fallback for the stiff SBM systems.
      KrylovOptions fallback = params_.linear;
      fallback.method = KrylovMethod::Gmres;
      fallback.maxit = std::max<std::size_t>(params_.linear.maxit, 4000);
      std::fill(delta.begin(), delta.end(), 0.0);
      KrylovStats ks = solve_krylov(a, res_f, delta, fallback);
      stats.krylov_iterations += ks.iterations;
    }
    std::vector<double> delta_full = cons.recover_increment(delta);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += delta_full[i];
    unpack_state(dim_, x, work);
    stats.newton_iterations = it + 1;
  }

  if (!converged) {
    double last = stats.residual_history.back();
    if (last > 0.1 * res0) {
      std::string hist;
      for (double r : stats.residual_history) hist += " " + format_double(r);
      throw Error(ErrorCode::NonConvergence,
                  "newton stagnated (no 10x drop in " +
                      std::to_string(params_.newton_max_iters) + " iterations):" + hist);
    }
  }

  state.velocity_prev2 = state.velocity_prev;
  state.velocity_prev = state.velocity;
  state.velocity = work.velocity;
  state.pressure = work.pressure;
  state.time = t_new;
  state.step_index++;
  return stats;
}

double FemSystem::divergence_norm(const FlowState& state) const {
  const GaussRule rule = gauss_rule(params_.gp_order);
  const int dim = dim_;
  const int nn = 1 << dim;
  double acc = 0.0;

  for (std::uint32_t li : assembled_) {
    const Octant& leaf = tree_->leaves[li];
    Box b = tree_->octant_box(leaf);
    double edge[3] = {b.hi.x - b.lo.x, b.hi.y - b.lo.y, b.hi.z - b.lo.z};
    double det = 1.0;
    for (int a = 0; a < dim; ++a) det *= 0.5 * edge[a];
    const auto& ln = tree_->leaf_nodes[li];

    const int ngp = dim == 2 ? params_.gp_order * params_.gp_order
                             : params_.gp_order * params_.gp_order * params_.gp_order;
    for (int q = 0; q < ngp; ++q) {
      int qi = q % params_.gp_order;
      int qj = (q / params_.gp_order) % params_.gp_order;
      int qk = q / (params_.gp_order * params_.gp_order);
      double xi[3] = {rule.x[std::size_t(qi)], rule.x[std::size_t(qj)],
                      dim == 3 ? rule.x[std::size_t(qk)] : 0.0};
      double w = rule.w[std::size_t(qi)] * rule.w[std::size_t(qj)] *
                 (dim == 3 ? rule.w[std::size_t(qk)] : 1.0) * det;

      double div = 0.0;
      for (int a = 0; a < nn; ++a) {
        // d N_a / d x_i with the tensor-product linear basis.
        for (int i = 0; i < dim; ++i) {
          double prod = 1.0;
          for (int ax = 0; ax < dim; ++ax) {
            double s = (a >> ax) & 1 ? 1.0 : -1.0;
            prod *= (ax == i) ? 0.5 * s : 0.5 * (1.0 + s * xi[ax]);
          }
          div += prod * 2.0 / edge[i] *
                 state.velocity[ln[std::size_t(a)] * std::size_t(dim) + std::size_t(i)];
        }
      }
      acc += w * div * div;
    }
  }
  return std::sqrt(acc);
}

FemSystem::Probe FemSystem::probe(const FlowState& state, const Vec3& x) const {
  Probe out;
  if (!tree_->domain.contains(x, dim_)) return out;

  // Containing leaf: exactly one level hosts the point.
  std::uint32_t leaf_idx = Octree::npos;
  Vec3 ext = tree_->domain.extent();
  for (int lvl = 0; lvl <= tree_->ref_level && leaf_idx == Octree::npos; ++lvl) {
    std::array<std::uint32_t, 3> anchor{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      double t = (x[a] - tree_->domain.lo[a]) / ext[a] * std::ldexp(1.0, lvl);
      long idx = long(std::floor(t));
      idx = std::clamp(idx, 0L, (1L << lvl) - 1);
      anchor[std::size_t(a)] = std::uint32_t(idx);
    }
    leaf_idx = tree_->find_leaf(lvl, anchor);
  }
  if (leaf_idx == Octree::npos || !is_assembled(markers_->marker[leaf_idx])) return out;

  const Octant& leaf = tree_->leaves[leaf_idx];
  Box b = tree_->octant_box(leaf);
  double xi[3] = {0, 0, 0};
  for (int a = 0; a < dim_; ++a)
    xi[a] = (x[a] - b.lo[a]) / (0.5 * (b.hi[a] - b.lo[a])) - 1.0;

  const auto& ln = tree_->leaf_nodes[leaf_idx];
  out.valid = true;
  for (int a = 0; a < (1 << dim_); ++a) {
    double n = 1.0;
    for (int ax = 0; ax < dim_; ++ax) {
      double s = (a >> ax) & 1 ? 1.0 : -1.0;
      n *= 0.5 * (1.0 + s * xi[ax]);
    }
    std::uint32_t node = ln[std::size_t(a)];
    for (int c = 0; c < dim_; ++c)
      out.velocity[c] += n * state.velocity[node * std::size_t(dim_) + std::size_t(c)];
    out.pressure += n * state.pressure[node];
  }
  return out;
}

}  // namespace inrflow
