#include <cstdio>

#include <CLI11.hpp>

#include "inrflow/app.hpp"

// Flow simulation on implicit (neural or analytic) geometry via shifted
// surrogate boundaries. Exit codes: 0 ok, 2 config/input error, 3 numerical
// failure.
int main(int argc, char** argv) {
  CLI::App app{"inrflow: direct flow simulation on implicit geometry"};
  app.require_subcommand(1);

  struct Cmd {
    std::string config;
    std::string out;
    void (*run)(const std::string&, const std::string&) = nullptr;
  };
  std::vector<std::shared_ptr<Cmd>> cmds;

  auto add = [&](const char* name, const char* desc,
                 void (*fn)(const std::string&, const std::string&)) {
    auto cmd = std::make_shared<Cmd>();
    cmd->run = fn;
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", cmd->config, "JSON config path")->required();
    sub->add_option("--out", cmd->out, "output directory")->required();
    sub->callback([cmd] { cmd->run(cmd->config, cmd->out); });
    cmds.push_back(cmd);
  };

  add("train", "train an implicit network from a soup or analytic shape", inrflow::run_train);
  add("eval-inr", "NMSE and distance-vector metrics at surrogate Gauss points",
      inrflow::run_eval_inr);
  add("mesh", "build the incomplete tree, markers and surrogate boundary", inrflow::run_mesh);
  add("simulate", "run the flow solver to steady state or t_final", inrflow::run_simulate);
  add("bench-geometry", "oracle traversal vs neural inference query cost",
      inrflow::run_bench_geometry);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const inrflow::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return inrflow::error_exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
