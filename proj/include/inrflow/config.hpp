#pragma once

#include <memory>
#include <string>

#include "inrflow/fem.hpp"
#include "inrflow/octree.hpp"
#include "inrflow/sampling.hpp"
#include "inrflow/train.hpp"

namespace inrflow {

struct GeometryConfig {
  enum class Type {
    None,      // no immersed geometry (field positive everywhere)
    Circle,
    Sphere,
    Ring,
    BoxShape,
    Cylinder,
    Cone,
    Gyroid,
    Model,  // INR1 file
    Soup    // STL/OBJ via the exact oracle
  };
  Type type = Type::None;
  Vec3 a, b;
  double radius = 0.0, r2 = 0.0, height = 0.0, angle = 0.0;
  double period = 1.0, thickness = 0.1;
  std::string path;
  bool rescale = false;
  double rescale_fraction = 0.5;

  int dim(int fallback) const;
};

// Field for simulation/meshing; soups go through the brute-force oracle.
std::shared_ptr<const ImplicitField> make_field(const GeometryConfig& g, const Box& domain,
                                                int dim);
// Ground-truth oracle for training/evaluation (analytic or soup-backed).
std::shared_ptr<const SdfOracle> make_oracle(const GeometryConfig& g, const Box& domain,
                                             int dim);

struct LinearConfig {
  std::string method = "bicgstab";
  std::string precond = "ilu0";
  double rtol = 1e-8;
  std::size_t maxit = 4000;
  int gmres_restart = 50;

  KrylovOptions to_options() const;
};

struct CaseConfig {
  int dim = 2;
  Box domain{{-1, -1, -1}, {1, 1, 1}};
  GeometryConfig geometry;
  RefineSpec refine;
  double lambda_criteria = 0.5;
  int gp_order = 2;
  double re = 100.0;
  double dt = 0.5;
  double gamma = 200.0;
  std::string bc = "ldc2d";
  double steady_tol = 1e-6;
  double t_final = 1e12;
  int max_steps = 2000;
  double newton_rtol = 1e-6;
  int newton_max_iters = 12;
  LinearConfig linear;
  int vtk_every = 0;  // 0 = final snapshot only
  int probe_samples = 257;
  std::uint64_t seed = 1;
};

struct TrainCommandConfig {
  int dim = 3;
  Box domain{{-1, -1, -1}, {1, 1, 1}};
  GeometryConfig source;
  TrainConfig train;
};

struct EvalConfig {
  std::string model;  // empty = evaluate the geometry field against itself
  GeometryConfig geometry;
  Box domain{{-1, -1, -1}, {1, 1, 1}};
  int level = 6;
  int gp_order = 2;
  double lambda_criteria = 0.5;
  double nmse_delta = 0.0009765625;  // 2^-10
  int nmse_grid = 128;
};

struct BenchConfig {
  std::string model;  // empty = untrained default net
  std::vector<int> icosphere_subdivisions = {2, 3, 4};
  std::vector<std::string> soups;
  std::size_t queries = 2000;
  int repeats = 5;
  std::uint64_t seed = 1;
};

CaseConfig parse_case_config(const std::string& path);
TrainCommandConfig parse_train_config(const std::string& path);
EvalConfig parse_eval_config(const std::string& path);
BenchConfig parse_bench_config(const std::string& path);

// Boundary-condition presets over exact lattice tests: ldc2d, ldc3d, channel,
// pipe, none.
BoundaryConditions make_bc_preset(const std::string& name, int dim);

}  // namespace inrflow
