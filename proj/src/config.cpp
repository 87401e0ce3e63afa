#include "inrflow/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "inrflow/mesh_distance.hpp"
#include "inrflow/mlp.hpp"
#include "inrflow/triangle_mesh.hpp"

namespace inrflow {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Format, "config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Format, "config root must be an object");
  return j;
}

// Wrapper that rejects unknown keys after all known ones were consumed.
class Obj {
public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object())
      throw Error(ErrorCode::Format, where_ + " must be a JSON object");
  }
  ~Obj() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const std::exception&) {
      throw Error(ErrorCode::Format, where_ + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key))
      throw Error(ErrorCode::Format, where_ + " is missing required key '" + key + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const std::exception&) {
      throw Error(ErrorCode::Format, where_ + "." + key + " has the wrong type");
    }
  }

  const json* sub(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw Error(ErrorCode::Format, where_ + " has unknown key '" + it.key() + "'");
  }

private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec3 get_vec(const json& j, const std::string& where, int dim) {
  if (!j.is_array() || int(j.size()) < dim)
    throw Error(ErrorCode::Format, where + " must be an array of " + std::to_string(dim) +
                                       "+ numbers");
  Vec3 v;
  for (std::size_t i = 0; i < j.size() && i < 3; ++i) v[int(i)] = j[i].get<double>();
  return v;
}

Vec3 require_vec(Obj& o, const std::string& key, const std::string& where, int dim) {
  const json* j = o.sub(key);
  if (!j) throw Error(ErrorCode::Format, where + " is missing '" + key + "'");
  return get_vec(*j, where + "." + key, dim);
}

Box parse_domain(const json& j, int dim) {
  Obj o(j, "domain");
  Box b;
  b.lo = require_vec(o, "lo", "domain", dim);
  b.hi = require_vec(o, "hi", "domain", dim);
  o.finish();
  for (int a = 0; a < dim; ++a)
    if (!(b.hi[a] > b.lo[a]))
      throw Error(ErrorCode::Format, "domain must satisfy lo < hi per axis");
  if (dim == 2) b.lo.z = b.hi.z = 0.0;
  return b;
}

GeometryConfig parse_geometry(const json& j, const std::string& where, int dim) {
  Obj o(j, where);
  GeometryConfig g;
  std::string type = o.require<std::string>("type");
  if (type == "none") {
    g.type = GeometryConfig::Type::None;
  } else if (type == "circle") {
    g.type = GeometryConfig::Type::Circle;
    if (const json* c = o.sub("center")) g.a = get_vec(*c, where + ".center", 2);
    g.radius = o.require<double>("radius");
  } else if (type == "sphere") {
    g.type = GeometryConfig::Type::Sphere;
    if (const json* c = o.sub("center")) g.a = get_vec(*c, where + ".center", 3);
    g.radius = o.require<double>("radius");
  } else if (type == "ring") {
    g.type = GeometryConfig::Type::Ring;
    g.radius = o.require<double>("r1");
    g.r2 = o.require<double>("r2");
  } else if (type == "box") {
    g.type = GeometryConfig::Type::BoxShape;
    g.a = require_vec(o, "min", where, dim);
    g.b = require_vec(o, "max", where, dim);
  } else if (type == "cylinder") {
    g.type = GeometryConfig::Type::Cylinder;
    if (const json* c = o.sub("center")) g.a = get_vec(*c, where + ".center", 3);
    g.b = {0, 0, 1};
    if (const json* c = o.sub("axis")) g.b = get_vec(*c, where + ".axis", 3);
    g.radius = o.require<double>("radius");
    g.height = o.require<double>("height");
  } else if (type == "cone") {
    g.type = GeometryConfig::Type::Cone;
    if (const json* c = o.sub("apex")) g.a = get_vec(*c, where + ".apex", 3);
    g.b = {0, 0, 1};
    if (const json* c = o.sub("axis")) g.b = get_vec(*c, where + ".axis", 3);
    g.angle = o.require<double>("half_angle");
  } else if (type == "gyroid") {
    g.type = GeometryConfig::Type::Gyroid;
    g.period = o.get<double>("period", 1.0);
    g.thickness = o.get<double>("thickness", 0.1);
  } else if (type == "model") {
    g.type = GeometryConfig::Type::Model;
    g.path = o.require<std::string>("path");
  } else if (type == "soup") {
    g.type = GeometryConfig::Type::Soup;
    g.path = o.require<std::string>("path");
    g.rescale = o.get<bool>("rescale", false);
    g.rescale_fraction = o.get<double>("rescale_fraction", 0.5);
  } else {
    throw Error(ErrorCode::Format, where + ".type '" + type + "' is not recognized");
  }
  o.finish();
  return g;
}

RefineSpec parse_refine(const json& j) {
  Obj o(j, "refine");
  RefineSpec spec;
  spec.base_level = o.get<int>("base_level", 3);
  spec.boundary_extra = o.get<int>("boundary_extra", 0);
  spec.band_factor = o.get<double>("band_factor", 1.0);
  if (const json* regions = o.sub("regions")) {
    if (!regions->is_array()) throw Error(ErrorCode::Format, "refine.regions must be a list");
    for (const json& rj : *regions) {
      Obj r(rj, "refine.regions[]");
      RegionRefine reg;
      std::string type = r.require<std::string>("type");
      reg.level = r.require<int>("level");
      if (type == "sphere") {
        reg.kind = RegionRefine::Kind::Sphere;
        reg.a = require_vec(r, "center", "refine.regions[]", 2);
        reg.radius = r.require<double>("radius");
      } else if (type == "cylinder") {
        reg.kind = RegionRefine::Kind::Cylinder;
        reg.a = require_vec(r, "a", "refine.regions[]", 3);
        reg.b = require_vec(r, "b", "refine.regions[]", 3);
        reg.radius = r.require<double>("radius");
      } else if (type == "box") {
        reg.kind = RegionRefine::Kind::BoxRegion;
        reg.a = require_vec(r, "min", "refine.regions[]", 2);
        reg.b = require_vec(r, "max", "refine.regions[]", 2);
      } else {
        throw Error(ErrorCode::Format, "refine region type '" + type + "' unknown");
      }
      r.finish();
      spec.regions.push_back(reg);
    }
  }
  o.finish();
  return spec;
}

}  // namespace

int GeometryConfig::dim(int fallback) const {
  switch (type) {
    case Type::Circle:
    case Type::Ring:
      return 2;
    case Type::Sphere:
    case Type::Cylinder:
    case Type::Cone:
    case Type::Gyroid:
    case Type::Soup:
      return 3;
    case Type::Model: {
      Mlp net = Mlp::load(path);
      return net.input_dim();
    }
    default:
      return fallback;
  }
}

namespace {

// Positive-everywhere field used when no geometry is immersed.
class FreeField : public ImplicitField {
public:
  FreeField(int dim, double cl) : dim_(dim), cl_(cl) {}
  int dim() const override { return dim_; }
  double eval(const Vec3&) const override { return 1e6; }
  double char_length() const override { return cl_; }

private:
  int dim_;
  double cl_;
};

}  // namespace

std::shared_ptr<const ImplicitField> make_field(const GeometryConfig& g, const Box& domain,
                                                int dim) {
  const double cl = domain.max_edge(dim);
  switch (g.type) {
    case GeometryConfig::Type::None:
      return std::make_shared<FreeField>(dim, cl);
    case GeometryConfig::Type::Circle:
      return std::make_shared<AnalyticField>(AnalyticField::circle(g.a, g.radius));
    case GeometryConfig::Type::Sphere:
      return std::make_shared<AnalyticField>(AnalyticField::sphere(g.a, g.radius));
    case GeometryConfig::Type::Ring:
      return std::make_shared<AnalyticField>(AnalyticField::ring(g.radius, g.r2));
    case GeometryConfig::Type::BoxShape:
      return std::make_shared<AnalyticField>(AnalyticField::box_shape(g.a, g.b, dim));
    case GeometryConfig::Type::Cylinder:
      return std::make_shared<AnalyticField>(
          AnalyticField::cylinder(g.a, g.b, g.radius, g.height));
    case GeometryConfig::Type::Cone:
      return std::make_shared<AnalyticField>(AnalyticField::cone(g.a, g.b, g.angle));
    case GeometryConfig::Type::Gyroid:
      return std::make_shared<AnalyticField>(AnalyticField::gyroid(g.period, g.thickness));
    case GeometryConfig::Type::Model: {
      Mlp net = Mlp::load(g.path);
      if (net.input_dim() != dim)
        throw Error(ErrorCode::InvalidArgument,
                    "model dimension " + std::to_string(net.input_dim()) +
                        " does not match case dimension " + std::to_string(dim));
      return std::make_shared<MlpField>(std::move(net), cl);
    }
    case GeometryConfig::Type::Soup: {
      TriangleSoup soup = load_triangle_soup(g.path);
      if (g.rescale) soup = rescale_to_domain(soup, domain, g.rescale_fraction);
      return std::make_shared<SoupField>(std::make_shared<TriangleSoup>(std::move(soup)), cl);
    }
  }
  throw Error(ErrorCode::Internal, "unreachable geometry type");
}

std::shared_ptr<const SdfOracle> make_oracle(const GeometryConfig& g, const Box& domain,
                                             int dim) {
  if (g.type == GeometryConfig::Type::Soup) {
    TriangleSoup soup = load_triangle_soup(g.path);
    if (g.rescale) soup = rescale_to_domain(soup, domain, g.rescale_fraction);
    if (!soup.watertight)
      throw Error(ErrorCode::SignUnavailable, "training oracle needs a watertight soup");
    return std::make_shared<SoupOracle>(std::make_shared<TriangleSoup>(std::move(soup)));
  }
  if (g.type == GeometryConfig::Type::Model)
    throw Error(ErrorCode::InvalidArgument, "a model cannot serve as ground truth oracle");
  return std::make_shared<AnalyticOracle>(make_field(g, domain, dim), domain);
}

KrylovOptions LinearConfig::to_options() const {
  KrylovOptions o;
  if (method == "bicgstab")
    o.method = KrylovMethod::BiCgStab;
  else if (method == "gmres")
    o.method = KrylovMethod::Gmres;
  else
    throw Error(ErrorCode::Format, "linear.method must be bicgstab or gmres");
  if (precond == "ilu0")
    o.precond = PrecondKind::Ilu0;
  else if (precond == "jacobi")
    o.precond = PrecondKind::Jacobi;
  else if (precond == "none")
    o.precond = PrecondKind::None;
  else
    throw Error(ErrorCode::Format, "linear.precond must be ilu0, jacobi or none");
  o.rtol = rtol;
  o.maxit = maxit;
  o.gmres_restart = gmres_restart;
  return o;
}

CaseConfig parse_case_config(const std::string& path) {
  json j = load_json(path);
  Obj o(j, "config");
  CaseConfig c;
  c.dim = o.get<int>("dim", 2);
  if (c.dim != 2 && c.dim != 3) throw Error(ErrorCode::Format, "dim must be 2 or 3");
  if (const json* d = o.sub("domain")) c.domain = parse_domain(*d, c.dim);
  if (c.dim == 2) c.domain.lo.z = c.domain.hi.z = 0.0;
  if (const json* g = o.sub("geometry")) c.geometry = parse_geometry(*g, "geometry", c.dim);
  if (const json* r = o.sub("refine")) c.refine = parse_refine(*r);
  c.lambda_criteria = o.get<double>("lambda_criteria", 0.5);
  c.gp_order = o.get<int>("gp_order", 2);
  c.re = o.get<double>("re", 100.0);
  c.dt = o.get<double>("dt", 0.5);
  if (!(c.dt > 0.0)) throw Error(ErrorCode::Format, "dt must be > 0");
  c.gamma = o.get<double>("gamma", 200.0);
  c.bc = o.get<std::string>("bc", "ldc2d");
  c.steady_tol = o.get<double>("steady_tol", 1e-6);
  c.t_final = o.get<double>("t_final", 1e12);
  c.max_steps = o.get<int>("max_steps", 2000);
  c.newton_rtol = o.get<double>("newton_rtol", 1e-6);
  c.newton_max_iters = o.get<int>("newton_max_iters", 12);
  if (const json* l = o.sub("linear")) {
    Obj lo(*l, "linear");
    c.linear.method = lo.get<std::string>("method", c.linear.method);
    c.linear.precond = lo.get<std::string>("precond", c.linear.precond);
    c.linear.rtol = lo.get<double>("rtol", c.linear.rtol);
    c.linear.maxit = lo.get<std::size_t>("maxit", c.linear.maxit);
    c.linear.gmres_restart = lo.get<int>("gmres_restart", c.linear.gmres_restart);
    lo.finish();
  }
  c.vtk_every = o.get<int>("vtk_every", 0);
  c.probe_samples = o.get<int>("probe_samples", 257);
  c.seed = o.get<std::uint64_t>("seed", 1);
  o.finish();
  return c;
}

TrainCommandConfig parse_train_config(const std::string& path) {
  json j = load_json(path);
  Obj o(j, "config");
  TrainCommandConfig c;
  c.dim = o.get<int>("dim", 3);
  if (c.dim != 2 && c.dim != 3) throw Error(ErrorCode::Format, "dim must be 2 or 3");
  if (const json* d = o.sub("domain")) c.domain = parse_domain(*d, c.dim);
  if (const json* g = o.sub("source")) c.source = parse_geometry(*g, "source", c.dim);
  if (const json* t = o.sub("train")) {
    Obj to(*t, "train");
    TrainConfig& tc = c.train;
    tc.delta = to.get<double>("delta", tc.delta);
    tc.omega = to.get<double>("omega", tc.omega);
    tc.lambda_g = to.get<double>("lambda_g", tc.lambda_g);
    tc.tau = to.get<double>("tau", tc.tau);
    std::string loss = to.get<std::string>("loss", "igr");
    if (loss == "igr") tc.loss = LossKind::Igr;
    else if (loss == "l2_clamped") tc.loss = LossKind::L2Clamped;
    else if (loss == "l1_clamped") tc.loss = LossKind::L1Clamped;
    else if (loss == "l2_smooth") tc.loss = LossKind::L2Smooth;
    else throw Error(ErrorCode::Format, "train.loss '" + loss + "' unknown");
    tc.alpha = to.get<double>("alpha", tc.alpha);
    tc.batch = to.get<std::size_t>("batch", tc.batch);
    tc.steps = to.get<std::size_t>("steps", tc.steps);
    tc.lr = to.get<double>("lr", tc.lr);
    tc.lr_min = to.get<double>("lr_min", tc.lr_min);
    tc.seed = to.get<std::uint64_t>("seed", tc.seed);
    tc.n_surface = to.get<std::size_t>("n_surface", tc.n_surface);
    tc.n_narrowband = to.get<std::size_t>("n_narrowband", tc.n_narrowband);
    tc.n_uniform = to.get<std::size_t>("n_uniform", tc.n_uniform);
    tc.val_size = to.get<std::size_t>("val_size", tc.val_size);
    tc.checkpoint_every = to.get<std::size_t>("checkpoint_every", tc.checkpoint_every);
    tc.hidden_layers = to.get<int>("hidden_layers", tc.hidden_layers);
    tc.width = to.get<int>("width", tc.width);
    tc.skip_index = to.get<int>("skip_index", tc.hidden_layers / 2);
    tc.softplus_beta = to.get<double>("softplus_beta", tc.softplus_beta);
    tc.init_radius = to.get<double>("init_radius", tc.init_radius);
    to.finish();
  }
  o.finish();
  return c;
}

EvalConfig parse_eval_config(const std::string& path) {
  json j = load_json(path);
  Obj o(j, "config");
  EvalConfig c;
  c.model = o.get<std::string>("model", "");
  int dim_hint = 3;
  if (const json* g = o.sub("geometry")) c.geometry = parse_geometry(*g, "geometry", dim_hint);
  int dim = c.geometry.dim(dim_hint);
  if (const json* d = o.sub("domain")) c.domain = parse_domain(*d, dim);
  c.level = o.get<int>("level", 6);
  c.gp_order = o.get<int>("gp_order", 2);
  c.lambda_criteria = o.get<double>("lambda_criteria", 0.5);
  c.nmse_delta = o.get<double>("nmse_delta", c.nmse_delta);
  c.nmse_grid = o.get<int>("nmse_grid", c.nmse_grid);
  o.finish();
  return c;
}

BenchConfig parse_bench_config(const std::string& path) {
  json j = load_json(path);
  Obj o(j, "config");
  BenchConfig c;
  c.model = o.get<std::string>("model", "");
  c.icosphere_subdivisions =
      o.get<std::vector<int>>("icosphere_subdivisions", c.icosphere_subdivisions);
  c.soups = o.get<std::vector<std::string>>("soups", c.soups);
  c.queries = o.get<std::size_t>("queries", c.queries);
  c.repeats = o.get<int>("repeats", c.repeats);
  c.seed = o.get<std::uint64_t>("seed", c.seed);
  o.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Boundary-condition presets. Boundary tests use exact lattice coordinates.
// ---------------------------------------------------------------------------
namespace {

inline bool on_face(const Octree& tree, std::uint32_t node, int axis, bool upper) {
  std::uint32_t top = 1u << tree.ref_level;
  return tree.node_coords[node][std::size_t(axis)] == (upper ? top : 0u);
}

inline bool on_any_face(const Octree& tree, std::uint32_t node) {
  for (int a = 0; a < tree.dim; ++a)
    if (on_face(tree, node, a, false) || on_face(tree, node, a, true)) return true;
  return false;
}

}  // namespace

BoundaryConditions make_bc_preset(const std::string& name, int dim) {
  BoundaryConditions bc;
  if (name == "none") {
    bc.pin_pressure = true;
    return bc;
  }
  if (name == "ldc2d" || name == "ldc3d") {
    if ((name == "ldc2d") != (dim == 2))
      throw Error(ErrorCode::InvalidArgument, "bc preset dimension mismatch");
    bc.pin_pressure = true;
    bc.strong = [](const Octree& tree, std::uint32_t node, double, Vec3& value) {
      if (!on_any_face(tree, node)) return false;
      value = on_face(tree, node, 1, true) ? Vec3{1.0, 0.0, 0.0} : Vec3{};
      return true;
    };
    return bc;
  }
  if (name == "channel" || name == "pipe") {
    if (name == "pipe" && dim != 3)
      throw Error(ErrorCode::InvalidArgument, "pipe preset is 3D");
    bc.pin_pressure = false;  // outflow fixes the pressure level
    bc.strong = [dim](const Octree& tree, std::uint32_t node, double, Vec3& value) {
      bool wall = false;
      for (int a = 1; a < dim; ++a)
        if (on_face(tree, node, a, false) || on_face(tree, node, a, true)) wall = true;
      if (wall) {
        value = Vec3{};
        return true;
      }
      if (on_face(tree, node, 0, false)) {
        // Parabolic inlet, unit peak velocity.
        const Vec3& p = tree.node_pos[node];
        double prof = 1.0;
        for (int a = 1; a < dim; ++a) {
          double t = (p[a] - tree.domain.lo[a]) / (tree.domain.hi[a] - tree.domain.lo[a]);
          prof *= 4.0 * t * (1.0 - t);
        }
        value = Vec3{prof, 0.0, 0.0};
        return true;
      }
      return false;  // outlet (x upper face) stays natural
    };
    return bc;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown bc preset: " + name);
}

}  // namespace inrflow
