// Command-line front end. Talks to the core exclusively through the public C
// interface so it doubles as a smoke test of the shared library.
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "execsim/execsim.h"

namespace {

// exit code contract: 0 success, 2 config error, 3 runtime error
int finish(exs_status status) {
  if (status == EXS_OK) return 0;
  std::fprintf(stderr, "error: %s\n", exs_last_error());
  return status == EXS_ERR_CONFIG ? 2 : 3;
}

struct CommonArgs {
  std::string config;
  std::string out;
  int workers = 1;
  bool resume = false;
};

void add_config_options(CLI::App& cmd, CommonArgs& args) {
  cmd.add_option("--config", args.config, "experiment config (JSON)")
      ->required();
  cmd.add_option("--out", args.out,
                 "output directory (default: the config's output_dir)");
}

void add_worker_options(CLI::App& cmd, CommonArgs& args) {
  cmd.add_option("--workers", args.workers, "parallel trial workers")
      ->envname("EXEC_SIM_WORKERS")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--resume", args.resume,
               "continue the halving study from its checkpoint");
}

const char* out_or_null(const CommonArgs& args) {
  return args.out.empty() ? nullptr : args.out.c_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"execsim — limit order book execution simulator"};
  app.set_version_flag("--version", exs_version());
  app.require_subcommand(1);

  CommonArgs args;

  CLI::App* simulate =
      app.add_subcommand("simulate", "run background flow and export the book "
                                     "event stream per seed");
  add_config_options(*simulate, args);

  CLI::App* train = app.add_subcommand(
      "train-local", "train the configured agent's tables (flat table or the "
                     "two default local policies)");
  add_config_options(*train, args);

  CLI::App* search = app.add_subcommand(
      "search-meta", "successive halving over the hierarchical meta selector");
  add_config_options(*search, args);
  add_worker_options(*search, args);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "roll out every configured seed and write episode metrics, "
                  "summary, and traces");
  add_config_options(*evaluate, args);

  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "train-local, search-meta, and evaluate in one run");
  add_config_options(*pipeline, args);
  add_worker_options(*pipeline, args);

  std::string trace_path;
  std::string replay_out;
  CLI::App* replay = app.add_subcommand(
      "replay", "render an evaluation trace into plot-ready price/fill series");
  replay->add_option("trace", trace_path, "trace CSV from evaluate")
      ->required();
  replay->add_option("--out", replay_out,
                     "output CSV (default: replay_<trace name> next to the "
                     "trace)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  if (simulate->parsed()) {
    return finish(exs_cmd_simulate(args.config.c_str(), out_or_null(args)));
  }
  if (train->parsed()) {
    return finish(exs_cmd_train_local(args.config.c_str(), out_or_null(args)));
  }
  if (search->parsed()) {
    return finish(exs_cmd_search_meta(args.config.c_str(), out_or_null(args),
                                      args.workers, args.resume ? 1 : 0));
  }
  if (evaluate->parsed()) {
    return finish(exs_cmd_evaluate(args.config.c_str(), out_or_null(args)));
  }
  if (pipeline->parsed()) {
    return finish(exs_cmd_pipeline(args.config.c_str(), out_or_null(args),
                                   args.workers, args.resume ? 1 : 0));
  }
  if (replay->parsed()) {
    if (replay_out.empty()) {
      const std::filesystem::path trace(trace_path);
      replay_out =
          (trace.parent_path() / ("replay_" + trace.filename().string()))
              .string();
    }
    return finish(exs_cmd_replay(trace_path.c_str(), replay_out.c_str()));
  }
  return 2;
}
