// rsco-bench: run seeded experiment grids and fit excess-risk scaling laws.
//
//   rsco-bench run --config grid.json --out results.csv [--timing]
//   rsco-bench fit --in results.csv --axis epsilon|n
//
// Results and errors are single JSON lines. RSCO_THREADS sets the thread count.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsco/bench.hpp"
#include "rsco/kernels.hpp"

namespace {

int fail(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"status", "error"}, {"error", code}, {"message", message}}.dump() << '\n';
  return 1;
}

void apply_thread_env() {
  if (const char* env = std::getenv("RSCO_THREADS")) {
    char* end = nullptr;
    const long threads = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || threads < 1) throw rsco::InvalidArgument("RSCO_THREADS must be a positive integer");
    rsco::kernels::parallel::set_num_threads(static_cast<int>(threads));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust stochastic convex optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, axis;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run an experiment grid and write CSV");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_flag("--timing", timing, "Append a wall_seconds column");

  auto* fit = app.add_subcommand("fit", "Fit log(mean excess risk) against log(axis)");
  fit->add_option("--in", in_path, "CSV written by run")->required();
  fit->add_option("--axis", axis, "epsilon or n")->required()->check(CLI::IsMember({"epsilon", "n"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    apply_thread_env();
    if (*run) {
      const auto spec = rsco::bench::load_spec(config_path);
      const auto records = rsco::bench::run_experiment(spec);
      std::ofstream out(out_path);
      if (!out) throw rsco::InvalidArgument("cannot write '" + out_path + "'");
      rsco::bench::write_csv(out, records, timing);
      out.close();
      if (!out) throw rsco::InvalidArgument("failed writing '" + out_path + "'");
      std::cout << nlohmann::json{{"status", "ok"}, {"records", records.size()}, {"out", out_path}}.dump() << '\n';
    } else {
      std::ifstream in(in_path);
      if (!in) throw rsco::InvalidArgument("cannot open '" + in_path + "'");
      const auto records = rsco::bench::read_csv(in);
      const auto result = rsco::bench::fit_scaling(records, rsco::bench::axis_from_string(axis));
      std::cout << nlohmann::json{{"status", "ok"},
                                  {"axis", axis},
                                  {"exponent", result.exponent},
                                  {"prefactor", result.prefactor},
                                  {"r2", result.r2},
                                  {"points", result.points}}
                       .dump()
                << '\n';
    }
  } catch (const rsco::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
