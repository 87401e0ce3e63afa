#pragma once

#include <string>

#include "inrflow/config.hpp"

namespace inrflow {

// Command implementations behind the CLI; each reads a JSON config and writes
// its artifacts under out_dir. All are deterministic given config + seed
// (bench timings excepted).
void run_train(const std::string& config_path, const std::string& out_dir);
void run_eval_inr(const std::string& config_path, const std::string& out_dir);
void run_mesh(const std::string& config_path, const std::string& out_dir);
void run_simulate(const std::string& config_path, const std::string& out_dir);
void run_bench_geometry(const std::string& config_path, const std::string& out_dir);

// Shared by simulate and the acceptance harness.
struct SimulationResult {
  Octree tree;
  ElementMarkers markers;
  SurrogateBoundary boundary;
  FlowState state;
  int steps = 0;
  double steady_metric = 0.0;  // ||u_new - u_old||_inf / dt at the last step
  double div_norm = 0.0;
  bool reached_steady = false;
};
SimulationResult simulate_case(const CaseConfig& config, const std::string& out_dir);

// Centerline/diagonal probe table used for validation plots.
struct ProbeTable {
  struct Row {
    std::string line;
    double t = 0.0;  // parameter along the line in [0, 1]
    Vec3 x;
    bool valid = false;
    Vec3 velocity;
    double pressure = 0.0;
  };
  std::vector<Row> rows;
  void write_csv(const std::string& path) const;
};
ProbeTable probe_lines(const FemSystem& sys, const FlowState& state, int samples);

int error_exit_code(const Error& e);

}  // namespace inrflow
