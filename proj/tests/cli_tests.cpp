// End-to-end checks of the command-line surface: exit codes, file outputs and
// structural validity of the VTK/CSV artifacts. Invoked with the binary path.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

static int failures = 0;
static std::string g_bin;

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      std::cout << "FAIL " << __FILE__ << ":" << __LINE__ << "  " #cond  \
                << "\n";                                                  \
      failures++;                                                         \
    }                                                                     \
  } while (0)

static int run_cli(const std::string& args) {
  std::string cmd = g_bin + " " + args + " > /dev/null 2> /tmp/inrflow_cli_err.txt";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

static void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

static std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cout << "usage: cli_tests <inrflow binary>\n";
    return 1;
  }
  g_bin = argv[1];
  fs::path work = fs::temp_directory_path() / "inrflow_cli_tests";
  fs::remove_all(work);
  fs::create_directories(work);

  // --- bad invocations map to exit code 2 -------------------------------
  EXPECT(run_cli("") != 0);
  EXPECT(run_cli("train --config /nonexistent/cfg.json --out " + (work / "o1").string()) == 2);

  write_file(work / "unknown_key.json",
             R"({"dim":2,"geometry":{"type":"none"},"bogus_key":1})");
  EXPECT(run_cli("simulate --config " + (work / "unknown_key.json").string() + " --out " +
                 (work / "o2").string()) == 2);

  write_file(work / "bad_dt.json", R"({"dim":2,"dt":-0.5,"geometry":{"type":"none"}})");
  EXPECT(run_cli("simulate --config " + (work / "bad_dt.json").string() + " --out " +
                 (work / "o3").string()) == 2);

  // 2D model against a 3D geometry is a config error.
  write_file(work / "train0.json", R"({
    "dim": 2,
    "domain": {"lo": [-1,-1], "hi": [1,1]},
    "source": {"type": "circle", "center": [0,0], "radius": 0.5},
    "train": {"steps": 0, "hidden_layers": 2, "width": 8, "skip_index": 1,
              "n_surface": 16, "n_narrowband": 16, "n_uniform": 32, "val_size": 16}
  })");
  EXPECT(run_cli("train --config " + (work / "train0.json").string() + " --out " +
                 (work / "model0").string()) == 0);
  EXPECT(fs::exists(work / "model0" / "model.inr"));
  EXPECT(fs::exists(work / "model0" / "train_log.csv"));
  EXPECT(fs::exists(work / "model0" / "val_history.csv"));

  write_file(work / "eval_mismatch.json", std::string(R"({
    "model": ")") + (work / "model0" / "model.inr").string() + R"(",
    "geometry": {"type": "sphere", "center": [0,0,0], "radius": 0.5},
    "level": 3
  })");
  EXPECT(run_cli("eval-inr --config " + (work / "eval_mismatch.json").string() + " --out " +
                 (work / "o4").string()) == 2);

  // --- eval-inr self check: geometry field against itself ----------------
  write_file(work / "eval_self.json", R"({
    "geometry": {"type": "circle", "center": [0,0], "radius": 0.4},
    "domain": {"lo": [-1,-1], "hi": [1,1]},
    "level": 5,
    "nmse_delta": 0.01,
    "nmse_grid": 64
  })");
  EXPECT(run_cli("eval-inr --config " + (work / "eval_self.json").string() + " --out " +
                 (work / "self").string()) == 0);
  {
    std::ifstream in(work / "self" / "summary.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT(header ==
           "level,n_leaves,n_faces,n_gauss_points,nmse,cos_mean,cos_sd,excluded");
    // level,n_leaves,n_faces,n_gp,nmse,cos_mean,...
    std::vector<std::string> cols;
    std::stringstream ss(row);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    EXPECT(cols.size() == 8);
    EXPECT(std::stod(cols[4]) == 0.0);              // nmse of the field vs itself
    EXPECT(std::abs(std::stod(cols[5]) - 1.0) < 1e-8);  // cosine mean
  }

  // --- mesh command artifacts -------------------------------------------
  write_file(work / "mesh.json", R"({
    "dim": 2,
    "domain": {"lo": [-1,-1], "hi": [1,1]},
    "geometry": {"type": "circle", "center": [0,0], "radius": 0.55},
    "refine": {"base_level": 3}
  })");
  EXPECT(run_cli("mesh --config " + (work / "mesh.json").string() + " --out " +
                 (work / "mesh").string()) == 0);
  EXPECT(fs::exists(work / "mesh" / "tree.csv"));
  EXPECT(fs::exists(work / "mesh" / "boundary.csv"));
  {
    // Structural VTK validation: section order and counts.
    std::string vtk = slurp(work / "mesh" / "mesh.vtk");
    EXPECT(vtk.rfind("# vtk DataFile Version 3.0", 0) == 0);
    auto pos_points = vtk.find("POINTS ");
    auto pos_cells = vtk.find("CELLS ");
    auto pos_types = vtk.find("CELL_TYPES ");
    auto pos_pdata = vtk.find("POINT_DATA ");
    auto pos_cdata = vtk.find("CELL_DATA ");
    EXPECT(pos_points != std::string::npos);
    EXPECT(pos_points < pos_cells);
    EXPECT(pos_cells < pos_types);
    EXPECT(pos_types < pos_pdata);
    EXPECT(pos_pdata < pos_cdata);
    std::size_t n_points = 0, n_cells = 0;
    std::sscanf(vtk.c_str() + pos_points, "POINTS %zu", &n_points);
    std::sscanf(vtk.c_str() + pos_cells, "CELLS %zu", &n_cells);
    EXPECT(n_points > 0);
    EXPECT(n_cells > 0);
    // Count lines in tree.csv equals cell count.
    std::istringstream tree(slurp(work / "mesh" / "tree.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(tree, line);  // header
    while (std::getline(tree, line))
      if (!line.empty()) rows++;
    EXPECT(rows == n_cells);
  }

  // --- tiny simulate run produces the full artifact set ------------------
  write_file(work / "sim.json", R"({
    "dim": 2,
    "domain": {"lo": [-1,-1], "hi": [1,1]},
    "geometry": {"type": "none"},
    "refine": {"base_level": 3},
    "bc": "ldc2d",
    "re": 100.0,
    "dt": 0.5,
    "max_steps": 5,
    "steady_tol": 1e-12,
    "probe_samples": 33
  })");
  EXPECT(run_cli("simulate --config " + (work / "sim.json").string() + " --out " +
                 (work / "sim").string()) == 0);
  EXPECT(fs::exists(work / "sim" / "final.vtk"));
  EXPECT(fs::exists(work / "sim" / "probes.csv"));
  EXPECT(fs::exists(work / "sim" / "residual_log.csv"));
  {
    std::istringstream probes(slurp(work / "sim" / "probes.csv"));
    std::string header;
    std::getline(probes, header);
    EXPECT(header == "line,t,x,y,z,valid,u,v,w,p");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(probes, line))
      if (!line.empty()) rows++;
    EXPECT(rows == 66);  // two lines x 33 samples
  }

  // --- bench-geometry with zero queries: header-only CSV -----------------
  write_file(work / "bench0.json", R"({"queries": 0, "icosphere_subdivisions": [1]})");
  EXPECT(run_cli("bench-geometry --config " + (work / "bench0.json").string() + " --out " +
                 (work / "bench0").string()) == 0);
  {
    std::string csv = slurp(work / "bench0" / "bench.csv");
    EXPECT(csv == "shape,triangles,oracle_ns_per_query,inference_ns_per_query\n");
  }

  if (failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
    return 0;
  }
  std::cout << "cli_tests: " << failures << " failures\n";
  return 1;
}
