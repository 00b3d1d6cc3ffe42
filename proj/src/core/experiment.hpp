// Experiment orchestration: every CLI command lives here as a library call so
// the C interface and tests drive identical code. All commands are
// deterministic functions of the config bytes; outputs carry headers and each
// run writes a manifest naming its artifacts.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "hierarchy.hpp"

namespace execsim {

struct RunOptions {
  std::string out_dir;  // overrides config.output_dir when nonempty
  int workers = 1;      // search parallelism
  bool resume = false;  // continue a halving study from its checkpoint
};

// Per-episode evaluation metrics. Slippage is signed so that larger is
// better for both sides: side_sign × (market_vwap − exec_vwap). Both VWAPs
// (and so the slippage) read 0 when nothing printed or nothing filled;
// "best execution" itself has no computable definition here, so these are
// proxy metrics and the output headers label them as such.
struct EpisodeReport {
  std::uint64_t seed = 0;
  double filled_fraction = 0.0;
  double exec_vwap = 0.0;
  double market_vwap = 0.0;
  double slippage_per_share = 0.0;
  double participation = 0.0;
  double total_reward = 0.0;
  int option_switches = 0;
};

// Distribution summary of one agent's slippage over the evaluated seeds,
// plus how tightly it tracked the participation target.
struct StudySummary {
  std::string agent;
  int n_seeds = 0;
  double slippage_mean = 0.0;
  double slippage_stdev = 0.0;  // NaN below two seeds
  double slippage_p5 = 0.0;
  double slippage_p95 = 0.0;
  double slippage_ce = 0.0;  // under the configured utility
  double mean_abs_participation_gap = 0.0;
};

// The configured agent, ready to roll out episodes. Flat and hierarchical
// agents carry tables loaded from the output directory's artifacts.
struct AgentRuntime {
  AgentKind kind = AgentKind::Random;
  QTable flat;      // FlatCerl
  MetaPolicy meta;  // Hierarchical
};

struct EpisodeRollout {
  std::vector<HierStepRecord> steps;
  int option_switches = 0;
};

// ---- building blocks (also used directly by tests) ----------------------------

// Loads whatever tables the agent needs from `out_dir`; throws ConfigError
// naming the missing file. Random and PoV agents need nothing.
AgentRuntime load_agent(const ExperimentConfig& cfg, const std::string& out_dir);

// One greedy episode of the agent on a fresh reset of `env`.
EpisodeRollout run_episode(ExecEnv& env, const AgentRuntime& agent,
                           std::uint64_t seed);

// Metrics of the episode `env` just finished.
EpisodeReport report_of(const ExecEnv& env, std::uint64_t seed,
                        int option_switches);

StudySummary summarize(const std::string& agent,
                       const std::vector<EpisodeReport>& reports,
                       const UtilityFn& u, double pov_target);

// The meta-selector search space: one categorical dim per (schedule bucket ×
// spread bucket) cell over the option names, and the selector a sampled
// point denotes.
ParamSpace selector_space(const std::vector<std::string>& option_names);
std::vector<int> selector_from_params(const ParamPoint& params);

// Artifact filenames under the output directory (fixed conventions).
std::string flat_table_file();
std::string local_table_file(const std::string& spec_name);
std::string selector_file();
std::string meta_ledger_file();

// ---- commands ------------------------------------------------------------------

// Background flow only: events_<seed>.jsonl, trades_<seed>.csv,
// series_<seed>.csv per configured seed.
void run_simulate(const ExperimentConfig& cfg, const RunOptions& opt);

// Trains what the configured agent needs: the flat table for flat_cerl, the
// two default local policies for hierarchical.
void run_train_local(const ExperimentConfig& cfg, const RunOptions& opt);

// Successive halving over the meta selector for the hierarchical agent;
// writes the study ledger and the winning selector.
void run_search_meta(const ExperimentConfig& cfg, const RunOptions& opt);

// Rolls out every configured seed: episodes.csv, summary.csv, and
// traces/trace_<seed>.csv.
void run_evaluate(const ExperimentConfig& cfg, const RunOptions& opt);

// train-local → search-meta → evaluate, with stage-labeled errors. The
// search stage honors `resume`.
void run_pipeline(const ExperimentConfig& cfg, const RunOptions& opt);

// Renders an evaluation trace into plot-ready series: best bid/ask, the
// resting passive order price, and fill events (empty cells where absent).
void replay_trace(const std::string& trace_path, const std::string& out_csv);

}  // namespace execsim
