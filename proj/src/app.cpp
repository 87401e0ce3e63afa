#include "inrflow/app.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "inrflow/mesh_distance.hpp"
#include "inrflow/metrics.hpp"
#include "inrflow/mlp.hpp"
#include "inrflow/triangle_mesh.hpp"
#include "inrflow/vtk.hpp"

namespace inrflow {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

int error_exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
    case ErrorCode::Format:
    case ErrorCode::EmptyInput:
    case ErrorCode::SignUnavailable:
      return 2;
    default:
      return 3;
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------
void run_train(const std::string& config_path, const std::string& out_dir) {
  TrainCommandConfig cfg = parse_train_config(config_path);
  ensure_dir(out_dir);

  auto oracle = make_oracle(cfg.source, cfg.domain, cfg.dim);
  TrainResult result = train(*oracle, cfg.domain, cfg.train);

  result.net.save(join(out_dir, "model.inr"));

  std::ofstream log(join(out_dir, "train_log.csv"));
  if (!log) throw Error(ErrorCode::Io, "cannot write train_log.csv");
  log << "step,loss\n";
  for (std::size_t i = 0; i < result.step_loss.size(); ++i)
    log << (i + 1) << ',' << format_double(result.step_loss[i]) << '\n';

  std::ofstream val(join(out_dir, "val_history.csv"));
  val << "step,best_val_nmse\n";
  for (const auto& [step, v] : result.val_history)
    val << step << ',' << format_double(v) << '\n';
}

// ---------------------------------------------------------------------------
// eval-inr
// ---------------------------------------------------------------------------
void run_eval_inr(const std::string& config_path, const std::string& out_dir) {
  EvalConfig cfg = parse_eval_config(config_path);
  ensure_dir(out_dir);

  int dim = cfg.geometry.dim(3);
  auto oracle = make_oracle(cfg.geometry, cfg.domain, dim);
  std::shared_ptr<const ImplicitField> field;
  if (cfg.model.empty()) {
    field = make_field(cfg.geometry, cfg.domain, dim);
  } else {
    Mlp net = Mlp::load(cfg.model);
    if (net.input_dim() != dim)
      throw Error(ErrorCode::InvalidArgument,
                  "model dimension " + std::to_string(net.input_dim()) +
                      " does not match geometry dimension " + std::to_string(dim));
    field = std::make_shared<MlpField>(std::move(net), cfg.domain.max_edge(dim));
  }

  RefineSpec spec;
  spec.base_level = std::min(cfg.level, 4);
  spec.boundary_extra = cfg.level - spec.base_level;
  Octree tree = build_incomplete(*field, cfg.domain, spec);
  ElementMarkers markers = classify_elements(tree, *field, cfg.lambda_criteria, cfg.gp_order);
  SurrogateBoundary boundary = extract_surrogate_boundary(tree, markers);
  boundary_gauss_distance_vectors(tree, boundary, *field, cfg.gp_order);

  double nm = nmse(*field, *oracle, cfg.domain, cfg.nmse_delta, cfg.nmse_grid);
  SimilarityResult sim = distance_vector_similarity(*field, *oracle, boundary.gp,
                                                    default_gradient_step(*field));
  sim.write_csv(join(out_dir, "metrics.csv"));

  std::ofstream sum(join(out_dir, "summary.csv"));
  sum << "level,n_leaves,n_faces,n_gauss_points,nmse,cos_mean,cos_sd,excluded\n";
  sum << cfg.level << ',' << tree.leaves.size() << ',' << boundary.faces.size() << ','
      << boundary.gp.size() << ',' << format_double(nm) << ','
      << format_double(sim.mean_cos) << ',' << format_double(sim.sd_cos) << ','
      << sim.excluded << '\n';
}

// ---------------------------------------------------------------------------
// mesh
// ---------------------------------------------------------------------------
void run_mesh(const std::string& config_path, const std::string& out_dir) {
  CaseConfig cfg = parse_case_config(config_path);
  ensure_dir(out_dir);

  auto field = make_field(cfg.geometry, cfg.domain, cfg.dim);
  Octree tree = build_incomplete(*field, cfg.domain, cfg.refine);
  ElementMarkers markers = classify_elements(tree, *field, cfg.lambda_criteria, cfg.gp_order);
  SurrogateBoundary boundary = extract_surrogate_boundary(tree, markers);
  boundary_gauss_distance_vectors(tree, boundary, *field, cfg.gp_order);

  write_tree_csv(tree, join(out_dir, "tree.csv"));
  write_boundary_csv(tree, boundary, join(out_dir, "boundary.csv"));
  FlowState empty;
  empty.pressure.assign(tree.node_count(), 0.0);
  empty.velocity.assign(std::size_t(tree.dim) * tree.node_count(), 0.0);
  write_vtk(tree, markers, empty, join(out_dir, "mesh.vtk"), "mesh");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------
void ProbeTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  out << "line,t,x,y,z,valid,u,v,w,p\n";
  for (const Row& r : rows) {
    out << r.line << ',' << format_double(r.t) << ',' << format_double(r.x.x) << ','
        << format_double(r.x.y) << ',' << format_double(r.x.z) << ',' << (r.valid ? 1 : 0)
        << ',' << format_double(r.velocity.x) << ',' << format_double(r.velocity.y) << ','
        << format_double(r.velocity.z) << ',' << format_double(r.pressure) << '\n';
  }
}

ProbeTable probe_lines(const FemSystem& sys, const FlowState& state, int samples) {
  ProbeTable table;
  const Box& dom = sys.tree().domain;
  Vec3 c = dom.center();
  auto add_line = [&](const std::string& name, const Vec3& from, const Vec3& to) {
    for (int i = 0; i < samples; ++i) {
      double t = double(i) / double(samples - 1);
      Vec3 x = from + (to - from) * t;
      FemSystem::Probe p = sys.probe(state, x);
      table.rows.push_back({name, t, x, p.valid, p.velocity, p.pressure});
    }
  };
  if (sys.dim() == 2) {
    add_line("vertical", {c.x, dom.lo.y, 0}, {c.x, dom.hi.y, 0});
    add_line("horizontal", {dom.lo.x, c.y, 0}, {dom.hi.x, c.y, 0});
  } else {
    add_line("vertical", {c.x, dom.lo.y, c.z}, {c.x, dom.hi.y, c.z});
    add_line("horizontal", {dom.lo.x, c.y, c.z}, {dom.hi.x, c.y, c.z});
    add_line("diagonal", dom.lo, dom.hi);
  }
  return table;
}

SimulationResult simulate_case(const CaseConfig& cfg, const std::string& out_dir) {
  const bool write_files = !out_dir.empty();
  if (write_files) ensure_dir(out_dir);

  auto field = make_field(cfg.geometry, cfg.domain, cfg.dim);
  if (field->dim() != cfg.dim)
    throw Error(ErrorCode::InvalidArgument, "geometry/case dimension mismatch");

  SimulationResult sim;
  sim.tree = build_incomplete(*field, cfg.domain, cfg.refine);
  sim.markers = classify_elements(sim.tree, *field, cfg.lambda_criteria, cfg.gp_order);
  sim.boundary = extract_surrogate_boundary(sim.tree, sim.markers);
  boundary_gauss_distance_vectors(sim.tree, sim.boundary, *field, cfg.gp_order);

  SolverParams params;
  params.re = cfg.re;
  params.gamma = cfg.gamma;
  params.gp_order = cfg.gp_order;
  params.newton_rtol = cfg.newton_rtol;
  params.newton_max_iters = cfg.newton_max_iters;
  params.linear = cfg.linear.to_options();

  BoundaryConditions bc = make_bc_preset(cfg.bc, cfg.dim);
  FemSystem sys(sim.tree, sim.markers, sim.boundary, params, bc);
  sim.state = sys.make_state(cfg.dt);

  std::ofstream log;
  if (write_files) {
    log.open(join(out_dir, "residual_log.csv"));
    if (!log) throw Error(ErrorCode::Io, "cannot write residual_log.csv");
    log << "step,time,newton_iters,res_first,res_last,steady_metric,div_norm\n";
  }

  std::vector<double> u_old;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    u_old = sim.state.velocity;
    FemSystem::StepStats stats = sys.bdf2_step(sim.state);
    sim.steps = step;

    double diff = 0.0;
    for (std::size_t i = 0; i < u_old.size(); ++i)
      diff = std::max(diff, std::abs(sim.state.velocity[i] - u_old[i]));
    sim.steady_metric = diff / cfg.dt;
    sim.div_norm = sys.divergence_norm(sim.state);

    if (write_files) {
      log << step << ',' << format_double(sim.state.time) << ','
          << stats.newton_iterations << ','
          << format_double(stats.residual_history.front()) << ','
          << format_double(stats.residual_history.back()) << ','
          << format_double(sim.steady_metric) << ',' << format_double(sim.div_norm) << '\n';
      if (cfg.vtk_every > 0 && step % cfg.vtk_every == 0)
        write_vtk(sim.tree, sim.markers, sim.state,
                  join(out_dir, "snapshot_" + std::to_string(step) + ".vtk"));
    }

    if (sim.steady_metric < cfg.steady_tol) {
      sim.reached_steady = true;
      break;
    }
    if (sim.state.time >= cfg.t_final) break;
  }

  if (write_files) {
    write_vtk(sim.tree, sim.markers, sim.state, join(out_dir, "final.vtk"));
    ProbeTable probes = probe_lines(sys, sim.state, cfg.probe_samples);
    probes.write_csv(join(out_dir, "probes.csv"));
  }
  return sim;
}

void run_simulate(const std::string& config_path, const std::string& out_dir) {
  CaseConfig cfg = parse_case_config(config_path);
  simulate_case(cfg, out_dir);
}

// ---------------------------------------------------------------------------
// bench-geometry
// ---------------------------------------------------------------------------
namespace {

double median_ns_per_query(const std::function<void()>& body, int repeats,
                           std::size_t queries) {
  std::vector<double> times;
  times.reserve(std::size_t(repeats));
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    body();
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(
        double(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()) /
        double(queries));
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace

void run_bench_geometry(const std::string& config_path, const std::string& out_dir) {
  BenchConfig cfg = parse_bench_config(config_path);
  ensure_dir(out_dir);

  Mlp net;
  if (cfg.model.empty()) {
    net = Mlp::make_default(3);
    net.init_geometric(cfg.seed, 0.5);
  } else {
    net = Mlp::load(cfg.model);
  }

  std::ofstream out(join(out_dir, "bench.csv"));
  if (!out) throw Error(ErrorCode::Io, "cannot write bench.csv");
  out << "shape,triangles,oracle_ns_per_query,inference_ns_per_query\n";

  // Matched query set reused for every density.
  Rng rng(cfg.seed);
  Box qbox{{-1, -1, -1}, {1, 1, 1}};
  std::vector<Vec3> queries;
  queries.reserve(cfg.queries);
  for (std::size_t i = 0; i < cfg.queries; ++i) queries.push_back(rng.point_in_box(qbox, 3));

  auto bench_pair = [&](const std::string& name, const TriangleSoup& soup) {
    if (cfg.queries == 0) return;
    volatile double sink = 0.0;
    double oracle_ns = median_ns_per_query(
        [&] {
          double acc = 0.0;
          for (const Vec3& q : queries) acc += exact_unsigned_distance(soup, q).distance;
          sink = acc;
        },
        cfg.repeats, cfg.queries);
    double inference_ns = median_ns_per_query(
        [&] {
          double acc = 0.0;
          for (const Vec3& q : queries) acc += net.forward(q);
          sink = acc;
        },
        cfg.repeats, cfg.queries);
    (void)sink;
    out << name << ',' << soup.triangle_count() << ',' << format_double(oracle_ns) << ','
        << format_double(inference_ns) << '\n';
  };

  for (int sub : cfg.icosphere_subdivisions)
    bench_pair("icosphere_" + std::to_string(sub), icosphere(1.0, sub));
  for (const std::string& path : cfg.soups)
    bench_pair(fs::path(path).stem().string(), load_triangle_soup(path));
}

}  // namespace inrflow
