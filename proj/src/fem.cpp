#include "inrflow/fem.hpp"

#include <algorithm>

#include "inrflow/fem_element.hpp"
#include "inrflow/quadrature.hpp"

namespace inrflow {

// ---------------------------------------------------------------------------
// Forward-mode dual numbers, fixed derivative capacity (element-local DOFs).
// The Jacobian assembled this way is the exact linearization of everything the
// residual computes, except terms deliberately evaluated on frozen values.
// ---------------------------------------------------------------------------
namespace {

template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design

  Dual operator-() const {
    Dual r;
    r.v = -v;
    for (int i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }
  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, double s) {
    Dual r;
    r.v = a.v * s;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
    return r;
  }
  friend Dual operator*(double s, const Dual& a) { return a * s; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    double inv = 1.0 / b.v;
    r.v = a.v * inv;
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }
  friend Dual sqrt_(const Dual& a) {
    Dual r;
    r.v = std::sqrt(a.v);
    double inv = r.v > 0.0 ? 0.5 / r.v : 0.0;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * inv;
    return r;
  }
};

inline double sqrt_(double a) { return std::sqrt(a); }
inline double value_of(double a) { return a; }
template <int N>
double value_of(const Dual<N>& a) {
  return a.v;
}

// Basis helpers for tensor-product linear elements on [-1,1]^dim; corner bit
// a of node index selects the sign along axis a.
inline double shape(int dim, int node, const double* xi) {
  double n = 1.0;
  for (int a = 0; a < dim; ++a) {
    double s = (node >> a) & 1 ? 1.0 : -1.0;
    n *= 0.5 * (1.0 + s * xi[a]);
  }
  return n;
}

inline void shape_grad(int dim, int node, const double* xi, const double* edge, double* out) {
  for (int g = 0; g < dim; ++g) {
    double prod = 1.0;
    for (int a = 0; a < dim; ++a) {
      double s = (node >> a) & 1 ? 1.0 : -1.0;
      prod *= (a == g) ? 0.5 * s : 0.5 * (1.0 + s * xi[a]);
    }
    out[g] = prod * 2.0 / edge[g];
  }
}

template <typename T>
struct GpState {
  T u[3];
  T grad_u[3][3];  // grad_u[i][j] = du_i/dx_j
  T p;
  T grad_p[3];
  T div_u;
};

template <typename T>
void eval_gp(int dim, int nn, const T* u_nodes, const T* p_nodes, const double* shp,
             const double (*grd)[3], GpState<T>& s) {
  for (int i = 0; i < 3; ++i) {
    s.u[i] = T(0.0);
    s.grad_p[i] = T(0.0);
    for (int j = 0; j < 3; ++j) s.grad_u[i][j] = T(0.0);
  }
  s.p = T(0.0);
  for (int a = 0; a < nn; ++a) {
    for (int i = 0; i < dim; ++i) {
      const T& ui = u_nodes[a * dim + i];
      s.u[i] += ui * shp[a];
      for (int j = 0; j < dim; ++j) s.grad_u[i][j] += ui * grd[a][j];
    }
    s.p += p_nodes[a] * shp[a];
    for (int j = 0; j < dim; ++j) s.grad_p[j] += p_nodes[a] * grd[a][j];
  }
  s.div_u = T(0.0);
  for (int i = 0; i < dim; ++i) s.div_u += s.grad_u[i][i];
}

// ---------------------------------------------------------------------------
// Volume kernel: Galerkin + VMS terms of the stabilized momentum/continuity
// system. res is node-major, (dim+1) entries per node, pressure last.
// ---------------------------------------------------------------------------
template <typename T>
void volume_kernel(int dim, const Vec3& origin, const double* edge, const T* u_nodes,
                   const T* p_nodes, const double* uprev, const double* uprev2, double c0,
                   double c1, double c2, double dt, double t_new, const SolverParams& prm,
                   const std::function<Vec3(const Vec3&, double)>& forcing, T* res) {
  const int nn = 1 << dim;
  const GaussRule rule = gauss_rule(prm.gp_order);
  const double re = prm.re;

  double det = 1.0;
  for (int a = 0; a < dim; ++a) det *= 0.5 * edge[a];

  // Diagonal metric tensors of the affine map.
  double gdiag[3] = {0, 0, 0};
  double g_dot_g = 0.0, g_colon_g = 0.0;
  for (int a = 0; a < dim; ++a) {
    gdiag[a] = 2.0 / edge[a];
    g_dot_g += gdiag[a] * gdiag[a];
    g_colon_g += gdiag[a] * gdiag[a] * gdiag[a] * gdiag[a];
  }

  const int ngp = dim == 2 ? prm.gp_order * prm.gp_order
                           : prm.gp_order * prm.gp_order * prm.gp_order;
  for (int q = 0; q < ngp; ++q) {
    int qi = q % prm.gp_order;
    int qj = (q / prm.gp_order) % prm.gp_order;
    int qk = q / (prm.gp_order * prm.gp_order);
    double xi[3] = {rule.x[std::size_t(qi)], rule.x[std::size_t(qj)],
                    dim == 3 ? rule.x[std::size_t(qk)] : 0.0};
    double w = rule.w[std::size_t(qi)] * rule.w[std::size_t(qj)] *
               (dim == 3 ? rule.w[std::size_t(qk)] : 1.0) * det;

    double shp[8];
    double grd[8][3];
    for (int a = 0; a < nn; ++a) {
      shp[a] = shape(dim, a, xi);
      shape_grad(dim, a, xi, edge, grd[a]);
    }

    GpState<T> s;
    eval_gp(dim, nn, u_nodes, p_nodes, shp, grd, s);

    // History velocities at the Gauss point.
    double up[3] = {0, 0, 0}, upp[3] = {0, 0, 0};
    for (int a = 0; a < nn; ++a)
      for (int i = 0; i < dim; ++i) {
        up[i] += uprev[a * dim + i] * shp[a];
        upp[i] += uprev2[a * dim + i] * shp[a];
      }

    Vec3 x;
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + 0.5 * edge[a] * (1.0 + xi[a]);
    Vec3 f = forcing ? forcing(x, t_new) : Vec3{};

    T udot[3], conv[3], r_m[3];
    for (int i = 0; i < dim; ++i) {
      udot[i] = (s.u[i] * c0 + T(c1 * up[i] + c2 * upp[i])) * (1.0 / dt);
      conv[i] = T(0.0);
      for (int j = 0; j < dim; ++j) conv[i] += s.u[j] * s.grad_u[i][j];
      r_m[i] = udot[i] + conv[i] + s.grad_p[i] - T(f[i]);
    }

    // tau_M = (4/dt^2 + u.Gu + C_M/Re^2 G:G)^{-1/2}; tau_C = (tau_M g.g)^{-1}.
    T u_g_u = T(0.0);
    for (int i = 0; i < dim; ++i) u_g_u += s.u[i] * s.u[i] * (gdiag[i] * gdiag[i]);
    T tau_m = T(1.0) / sqrt_(T(4.0 / (dt * dt)) + u_g_u + T(prm.c_m / (re * re) * g_colon_g));
    T tau_c = T(1.0) / (tau_m * g_dot_g);

    T u_fine[3];
    double u_fine_frozen[3];
    for (int i = 0; i < dim; ++i) {
      u_fine[i] = -(tau_m * r_m[i]);
      u_fine_frozen[i] = value_of(u_fine[i]);
    }
    T p_fine = -(tau_c * s.div_u);

    for (int a = 0; a < nn; ++a) {
      T conv_w = T(0.0);  // u . grad(N_a)
      for (int j = 0; j < dim; ++j) conv_w += s.u[j] * grd[a][j];

      for (int i = 0; i < dim; ++i) {
        T acc = shp[a] * (udot[i] + conv[i] - T(f[i]));
        // (2/Re) eps(w) : eps(u) with w = N_a e_i.
        for (int j = 0; j < dim; ++j)
          acc += (1.0 / re) * (s.grad_u[i][j] + s.grad_u[j][i]) * grd[a][j];
        acc -= s.p * grd[a][i];
        acc -= conv_w * u_fine[i];
        for (int j = 0; j < dim; ++j) acc += shp[a] * (u_fine[j] * s.grad_u[i][j]);
        if (prm.include_cross_stress)
          for (int j = 0; j < dim; ++j)
            acc -= T(grd[a][j] * u_fine_frozen[i] * u_fine_frozen[j]);
        acc -= p_fine * grd[a][i];
        res[a * (dim + 1) + i] += acc * w;
      }
      T cacc = shp[a] * s.div_u;
      for (int i = 0; i < dim; ++i) cacc -= grd[a][i] * u_fine[i];
      res[a * (dim + 1) + dim] += cacc * w;
    }
  }
}

// ---------------------------------------------------------------------------
// SBM face kernel: consistency, adjoint consistency, penalty of the shifted
// Dirichlet condition on a surrogate face owned by an assembled element.
// ---------------------------------------------------------------------------
template <typename T>
void face_kernel(int dim, const Vec3& origin, const double* edge, int axis, int dir,
                 std::span<const Vec3> gps, std::span<const Vec3> dvec,
                 std::span<const Vec3> u_d, const T* u_nodes, const T* p_nodes,
                 const SolverParams& prm, T* res) {
  const int nn = 1 << dim;
  const GaussRule rule = gauss_rule(prm.gp_order);
  const double re = prm.re;

  int t0 = -1, t1 = -1;
  for (int a = 0; a < dim; ++a) {
    if (a == axis) continue;
    (t0 < 0 ? t0 : t1) = a;
  }
  double det = 0.5 * edge[t0] * (dim == 3 ? 0.5 * edge[t1] : 1.0);

  double nrm[3] = {0, 0, 0};
  nrm[axis] = double(dir);
  const double h_face = edge[axis];
  const double pen = prm.gamma / (re * h_face);

  for (std::size_t q = 0; q < gps.size(); ++q) {
    int qi = int(q) % prm.gp_order;
    int qj = int(q) / prm.gp_order;
    double w = rule.w[std::size_t(qi)] * (dim == 3 ? rule.w[std::size_t(qj)] : 1.0) * det;

    double xi[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a)
      xi[a] = (gps[q][a] - origin[a]) / (0.5 * edge[a]) - 1.0;
    xi[axis] = double(dir);  // exactly on the face

    double shp[8];
    double grd[8][3];
    for (int a = 0; a < nn; ++a) {
      shp[a] = shape(dim, a, xi);
      shape_grad(dim, a, xi, edge, grd[a]);
    }

    GpState<T> s;
    eval_gp(dim, nn, u_nodes, p_nodes, shp, grd, s);

    // sigma.n and the shifted mismatch v = u + grad(u).d - u_d.
    T sig_n[3], v[3];
    for (int i = 0; i < dim; ++i) {
      sig_n[i] = T(0.0);
      for (int j = 0; j < dim; ++j)
        sig_n[i] += (1.0 / re) * (s.grad_u[i][j] + s.grad_u[j][i]) * nrm[j];
      sig_n[i] -= s.p * nrm[i];
      v[i] = s.u[i] - T(u_d[q][i]);
      for (int j = 0; j < dim; ++j) v[i] += s.grad_u[i][j] * dvec[q][j];
    }

    for (int a = 0; a < nn; ++a) {
      double grad_n = 0.0, grad_d = 0.0;
      for (int k = 0; k < dim; ++k) {
        grad_n += grd[a][k] * nrm[k];
        grad_d += grd[a][k] * dvec[q][k];
      }
      T v_dot_gradw = T(0.0);
      for (int k = 0; k < dim; ++k) v_dot_gradw += v[k] * grd[a][k];

      for (int i = 0; i < dim; ++i) {
        T acc = -(shp[a] * sig_n[i]);
        acc -= (0.5 / re) * (v_dot_gradw * nrm[i] + T(grad_n) * v[i]);
        acc += pen * ((shp[a] + grad_d) * v[i]);
        res[a * (dim + 1) + i] += acc * w;
      }
      T cacc = T(0.0);
      for (int i = 0; i < dim; ++i) cacc += nrm[i] * v[i];
      res[a * (dim + 1) + dim] += -(1.0 / re) * shp[a] * cacc * w;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public element entry points (double-only wrappers over the kernels).
// ---------------------------------------------------------------------------
std::vector<double> element_volume_residual(
    const ElementSample& e, const SolverParams& params,
    const std::function<Vec3(const Vec3&, double)>& forcing) {
  const int nn = 1 << e.dim;
  std::vector<double> res(std::size_t((e.dim + 1) * nn), 0.0);
  double edge[3] = {e.edges.x, e.edges.y, e.edges.z};
  volume_kernel<double>(e.dim, e.origin, edge, e.u.data(), e.p.data(), e.u_prev.data(),
                        e.u_prev2.data(), e.c0, e.c1, e.c2, e.dt, e.t_new, params, forcing,
                        res.data());
  return res;
}

std::vector<double> element_face_residual(const ElementSample& e, int axis, int dir,
                                          std::span<const Vec3> gp, std::span<const Vec3> d,
                                          std::span<const Vec3> u_d,
                                          const SolverParams& params) {
  const int nn = 1 << e.dim;
  std::vector<double> res(std::size_t((e.dim + 1) * nn), 0.0);
  double edge[3] = {e.edges.x, e.edges.y, e.edges.z};
  face_kernel<double>(e.dim, e.origin, edge, axis, dir, gp, d, u_d, e.u.data(), e.p.data(),
                      params, res.data());
  return res;
}

TauPair compute_tau(double dt, const Vec3& u, const std::array<double, 9>& g_tensor,
                    const Vec3& g_vector, double re, double c_m, int dim) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "compute_tau: dt must be > 0");
  double u_g_u = 0.0, g_colon_g = 0.0, g_dot_g = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double gij = g_tensor[std::size_t(3 * i + j)];
      u_g_u += u[i] * gij * u[j];
      g_colon_g += gij * gij;
    }
    g_dot_g += g_vector[i] * g_vector[i];
  }
  TauPair t;
  t.tau_m = 1.0 / std::sqrt(4.0 / (dt * dt) + u_g_u + c_m / (re * re) * g_colon_g);
  t.tau_c = 1.0 / (t.tau_m * g_dot_g);
  return t;
}

// ---------------------------------------------------------------------------
// FemSystem
// ---------------------------------------------------------------------------
FemSystem::FemSystem(const Octree& tree, const ElementMarkers& markers,
                     const SurrogateBoundary& boundary, SolverParams params,
                     BoundaryConditions bc)
    : tree_(&tree), markers_(&markers), boundary_(&boundary), params_(std::move(params)),
      bc_(std::move(bc)), dim_(tree.dim) {
  params_.validate();
  if (markers.marker.size() != tree.leaves.size())
    throw Error(ErrorCode::InvalidArgument, "fem: marker count mismatch");

  for (std::uint32_t li = 0; li < tree.leaves.size(); ++li)
    if (is_assembled(markers.marker[li])) assembled_.push_back(li);
  if (assembled_.empty())
    throw Error(ErrorCode::EmptyInput, "fem: no assembled elements");

  node_active_.assign(tree.node_count(), 0);
  for (std::uint32_t li : assembled_)
    for (int c = 0; c < (1 << dim_); ++c)
      node_active_[tree.leaf_nodes[li][std::size_t(c)]] = 1;
  // Masters of active hanging nodes carry their interpolation.
  for (const auto& cst : tree.constraints)
    if (node_active_[cst.node])
      for (const auto& [m, w] : cst.masters) {
        (void)w;
        node_active_[m] = 1;
      }

  leaf_faces_.assign(tree.leaves.size(), {});
  for (std::size_t fi = 0; fi < boundary.faces.size(); ++fi)
    leaf_faces_[boundary.faces[fi].leaf].push_back(fi);
}

FlowState FemSystem::make_state(double dt) const {
  FlowState s;
  s.velocity.assign(std::size_t(dim_) * n_nodes(), 0.0);
  s.velocity_prev = s.velocity;
  s.velocity_prev2 = s.velocity;
  s.pressure.assign(n_nodes(), 0.0);
  s.dt = dt;
  return s;
}

template <int CAP>
static void assemble_impl(const FemSystem& sys, const Octree& tree,
                          const SurrogateBoundary& boundary,
                          const std::vector<std::uint32_t>& assembled,
                          const std::vector<std::vector<std::size_t>>& leaf_faces,
                          const SolverParams& prm, const BoundaryConditions& bc,
                          const FlowState& state, double c0, double c1, double c2,
                          double t_new, std::vector<double>& residual,
                          std::vector<Triplet>* jacobian) {
  const int dim = tree.dim;
  const int nn = 1 << dim;
  const int nloc = (dim + 1) * nn;

  residual.assign(sys.ndof(), 0.0);
  if (jacobian) {
    jacobian->clear();
    jacobian->reserve(assembled.size() * std::size_t(nloc) * std::size_t(nloc));
  }

  using D = Dual<CAP>;
  const std::size_t nvel = std::size_t(dim) * std::size_t(nn);
  const std::size_t nns = std::size_t(nn);
  const std::size_t nlocs = std::size_t(nloc);
  std::vector<D> u_nodes(nvel), p_nodes(nns);
  std::vector<double> u_nodes_d(nvel, 0.0), p_nodes_d(nns, 0.0);
  std::vector<double> uprev(nvel, 0.0), uprev2(nvel, 0.0);
  std::vector<D> res_dual(nlocs);
  std::vector<double> res_plain(nlocs, 0.0);
  std::vector<Vec3> u_d_buf;

  for (std::uint32_t li : assembled) {
    const Octant& leaf = tree.leaves[std::size_t(li)];
    Box b = tree.octant_box(leaf);
    double edge[3] = {b.hi.x - b.lo.x, b.hi.y - b.lo.y, b.hi.z - b.lo.z};
    const auto& ln = tree.leaf_nodes[std::size_t(li)];

    for (int a = 0; a < nn; ++a) {
      std::uint32_t node = ln[std::size_t(a)];
      for (int c = 0; c < dim; ++c) {
        double uv = state.velocity[node * std::size_t(dim) + std::size_t(c)];
        uprev[std::size_t(a * dim + c)] =
            state.velocity_prev[node * std::size_t(dim) + std::size_t(c)];
        uprev2[std::size_t(a * dim + c)] =
            state.velocity_prev2[node * std::size_t(dim) + std::size_t(c)];
        if (jacobian) {
          D d(uv);
          d.d[std::size_t(a * (dim + 1) + c)] = 1.0;
          u_nodes[std::size_t(a * dim + c)] = d;
        } else {
          u_nodes_d[std::size_t(a * dim + c)] = uv;
        }
      }
      double pv = state.pressure[node];
      if (jacobian) {
        D d(pv);
        d.d[std::size_t(a * (dim + 1) + dim)] = 1.0;
        p_nodes[std::size_t(a)] = d;
      } else {
        p_nodes_d[std::size_t(a)] = pv;
      }
    }

    auto scatter = [&](auto& res_local) {
      for (int lr = 0; lr < nloc; ++lr) {
        int a = lr / (dim + 1), c = lr % (dim + 1);
        std::uint32_t row = sys.dof(ln[std::size_t(a)], c);
        residual[row] += value_of(res_local[std::size_t(lr)]);
        if constexpr (!std::is_same_v<std::decay_t<decltype(res_local[0])>, double>) {
          for (int lc = 0; lc < nloc; ++lc) {
            double jv = res_local[std::size_t(lr)].d[std::size_t(lc)];
            if (jv != 0.0) {
              int ca = lc / (dim + 1), cc = lc % (dim + 1);
              jacobian->push_back({row, sys.dof(ln[std::size_t(ca)], cc), jv});
            }
          }
        }
      }
    };

    if (jacobian) {
      std::fill(res_dual.begin(), res_dual.end(), D(0.0));
      volume_kernel<D>(dim, b.lo, edge, u_nodes.data(), p_nodes.data(), uprev.data(),
                       uprev2.data(), c0, c1, c2, state.dt, t_new, prm, bc.forcing,
                       res_dual.data());
      for (std::size_t fi : leaf_faces[std::size_t(li)]) {
        const BoundaryFace& f = boundary.faces[fi];
        auto gps = boundary.face_gps(fi);
        auto ds = boundary.face_d(fi);
        u_d_buf.resize(gps.size());
        for (std::size_t q = 0; q < gps.size(); ++q)
          u_d_buf[q] = bc.immersed_velocity ? bc.immersed_velocity(gps[q] + ds[q]) : Vec3{};
        face_kernel<D>(dim, b.lo, edge, f.axis, f.dir, gps, ds, u_d_buf, u_nodes.data(),
                       p_nodes.data(), prm, res_dual.data());
      }
      scatter(res_dual);
    } else {
      std::fill(res_plain.begin(), res_plain.end(), 0.0);
      volume_kernel<double>(dim, b.lo, edge, u_nodes_d.data(), p_nodes_d.data(), uprev.data(),
                            uprev2.data(), c0, c1, c2, state.dt, t_new, prm, bc.forcing,
                            res_plain.data());
      for (std::size_t fi : leaf_faces[std::size_t(li)]) {
        const BoundaryFace& f = boundary.faces[fi];
        auto gps = boundary.face_gps(fi);
        auto ds = boundary.face_d(fi);
        u_d_buf.resize(gps.size());
        for (std::size_t q = 0; q < gps.size(); ++q)
          u_d_buf[q] = bc.immersed_velocity ? bc.immersed_velocity(gps[q] + ds[q]) : Vec3{};
        face_kernel<double>(dim, b.lo, edge, f.axis, f.dir, gps, ds, u_d_buf,
                            u_nodes_d.data(), p_nodes_d.data(), prm, res_plain.data());
      }
      scatter(res_plain);
    }
  }
}

void FemSystem::assemble(const FlowState& state, double c0, double c1, double c2,
                         double t_new, std::vector<double>& residual,
                         std::vector<Triplet>* jacobian) const {
  if (!boundary_->faces.empty() && boundary_->gp_offset.empty())
    throw Error(ErrorCode::InvalidArgument,
                "assemble: distance vectors missing for surrogate faces");
  if (!boundary_->faces.empty() && boundary_->gp_order != params_.gp_order)
    throw Error(ErrorCode::InvalidArgument,
                "assemble: boundary gauss order differs from solver gauss order");
  if (dim_ == 2)
    assemble_impl<12>(*this, *tree_, *boundary_, assembled_, leaf_faces_, params_, bc_,
                      state, c0, c1, c2, t_new, residual, jacobian);
  else
    assemble_impl<32>(*this, *tree_, *boundary_, assembled_, leaf_faces_, params_, bc_,
                      state, c0, c1, c2, t_new, residual, jacobian);
}

Constraints FemSystem::build_constraints(double t) const {
  Constraints cons;
  const std::uint32_t nd = std::uint32_t(ndof());

  std::vector<std::uint8_t> hanging(n_nodes(), 0);
  for (const auto& cst : tree_->constraints) {
    hanging[cst.node] = 1;
    for (int c = 0; c <= dim_; ++c) {
      std::vector<std::pair<std::uint32_t, double>> masters;
      masters.reserve(cst.masters.size());
      for (const auto& [m, w] : cst.masters) masters.push_back({dof(m, c), w});
      cons.add_linear(dof(cst.node, std::int32_t(c)), std::move(masters));
    }
  }

  for (std::uint32_t n = 0; n < n_nodes(); ++n) {
    if (!node_active_[n]) {
      if (!hanging[n])
        for (int c = 0; c <= dim_; ++c) cons.add_dirichlet(dof(n, c), 0.0);
      continue;
    }
    Vec3 value;
    if (bc_.strong && bc_.strong(*tree_, n, t, value))
      for (int c = 0; c < dim_; ++c) cons.add_dirichlet(dof(n, c), value[c]);
  }

  if (bc_.pin_pressure) {
    for (std::uint32_t n = 0; n < n_nodes(); ++n)
      if (node_active_[n] && !hanging[n]) {
        cons.add_dirichlet(dof(n, dim_), 0.0);
        break;
      }
  }

  cons.finalize(nd);
  return cons;
}

}  // namespace inrflow
