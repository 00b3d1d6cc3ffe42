#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "csv.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace execsim {

namespace fs = std::filesystem;

namespace {

constexpr char kProxyNote[] =
    "# proxy metrics: slippage_per_share and participation stand in for "
    "best-execution quality; no regulatory definition is computed";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

fs::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_hash,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seeds"] = seeds;
  j["artifacts"] = artifacts;
  const fs::path path = out_dir / "manifest.json";
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

// ---- simulate -----------------------------------------------------------------

std::vector<std::string> do_simulate(const ExperimentConfig& cfg,
                                     const fs::path& out_dir) {
  std::vector<std::string> artifacts;
  for (const std::uint64_t seed : cfg.seeds) {
    MarketSim sim(cfg.flow, seed);
    const std::string series_name = "series_" + fmt(seed) + ".csv";
    const fs::path series_path = out_dir / series_name;
    auto series = open_out(series_path);
    series << "step,best_bid,best_ask,mid_half_ticks,spread,bid_qty,ask_qty,"
              "trades,volume\n";
    std::size_t trades_seen = 0;
    for (int step = 0; step < cfg.simulate.steps; ++step) {
      sim.step_background();
      const LimitOrderBook& book = sim.book();
      const DepthSnapshot snap = book.depth(1);
      Qty volume = 0;
      const auto& log = book.trade_log();
      const std::size_t n_new = log.size() - trades_seen;
      for (std::size_t i = trades_seen; i < log.size(); ++i) volume += log[i].qty;
      trades_seen = log.size();

      auto cell = [](auto opt_value) {
        return opt_value ? fmt(static_cast<std::int64_t>(*opt_value))
                         : std::string();
      };
      series << fmt(static_cast<std::int64_t>(sim.step_index())) << ','
             << cell(book.best_bid()) << ',' << cell(book.best_ask()) << ','
             << cell(snap.mid_half_ticks) << ',' << cell(snap.spread) << ','
             << fmt(book.resting_qty(Side::Buy)) << ','
             << fmt(book.resting_qty(Side::Sell)) << ','
             << fmt(static_cast<std::int64_t>(n_new)) << ',' << fmt(volume)
             << '\n';
    }
    finish(series, series_path);

    const std::string events_name = "events_" + fmt(seed) + ".jsonl";
    const fs::path events_path = out_dir / events_name;
    auto events = open_out(events_path);
    sim.book().export_events_jsonl(events);
    finish(events, events_path);

    const std::string trades_name = "trades_" + fmt(seed) + ".csv";
    const fs::path trades_path = out_dir / trades_name;
    auto trades = open_out(trades_path);
    sim.book().export_trades_csv(trades);
    finish(trades, trades_path);

    artifacts.push_back(events_name);
    artifacts.push_back(trades_name);
    artifacts.push_back(series_name);
  }
  return artifacts;
}

// ---- training ------------------------------------------------------------------

std::vector<int> all_action_indices() {
  std::vector<int> ids(enumerate_actions().size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

std::vector<std::string> do_train_local(const ExperimentConfig& cfg,
                                        const fs::path& out_dir) {
  const TrainingConfig& tr = cfg.training;
  ExecEnv env(cfg.flow, cfg.parent, cfg.env);
  std::vector<std::string> artifacts;

  if (cfg.agent == AgentKind::FlatCerl) {
    const std::vector<int> ids = all_action_indices();
    CoarseExecEnv view(env, ids, std::nullopt, std::nullopt);
    const QTable table = ce_q_learning(view, cfg.utility, tr.episodes, tr.lr,
                                       tr.exploration, tr.seed, ids);
    const fs::path path = out_dir / flat_table_file();
    auto out = open_out(path);
    table.save_csv(out);
    finish(out, path);
    artifacts.push_back(flat_table_file());
  } else if (cfg.agent == AgentKind::Hierarchical) {
    const LocalPolicySpec specs[] = {passive_placer_spec(),
                                     aggressive_taker_spec()};
    for (std::size_t i = 0; i < 2; ++i) {
      const LocalPolicy local =
          train_local(env, specs[i], cfg.utility, tr.episodes, tr.lr,
                      tr.exploration, derive_key(tr.seed, 0x70CA, i));
      const std::string name = local_table_file(specs[i].name);
      const fs::path path = out_dir / name;
      auto out = open_out(path);
      local.table.save_csv(out);
      finish(out, path);
      artifacts.push_back(name);
    }
  } else {
    throw ConfigError(std::string("config: agent \"") + to_string(cfg.agent) +
                      "\" has nothing to train (training applies to "
                      "flat_cerl and hierarchical)");
  }
  return artifacts;
}

// ---- meta search ---------------------------------------------------------------

QTable load_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("missing trained table: " + path.string() +
                      " (run train-local first)");
  }
  return QTable::load_csv(in);
}

std::vector<LocalPolicy> load_locals(const fs::path& out_dir) {
  std::vector<LocalPolicy> options;
  for (const LocalPolicySpec& spec :
       {passive_placer_spec(), aggressive_taker_spec()}) {
    LocalPolicy local;
    local.spec = spec;
    local.table = load_table(out_dir / local_table_file(spec.name));
    options.push_back(std::move(local));
  }
  return options;
}

std::vector<std::string> do_search_meta(const ExperimentConfig& cfg,
                                        const fs::path& out_dir, int workers,
                                        bool resume) {
  if (cfg.agent != AgentKind::Hierarchical) {
    throw ConfigError(
        "config: the meta search requires agent \"hierarchical\"");
  }
  if (!cfg.search.present) {
    throw ConfigError("config: the search section is required");
  }
  const std::vector<LocalPolicy> options = load_locals(out_dir);
  std::vector<std::string> option_names;
  for (const LocalPolicy& o : options) option_names.push_back(o.spec.name);
  const ParamSpace space = selector_space(option_names);

  // one episode of the candidate hierarchy; a fresh env per call keeps the
  // objective pure and thread-safe
  const auto objective = [&cfg, &options](const ParamPoint& params,
                                          std::uint64_t seed) {
    ExecEnv env(cfg.flow, cfg.parent, cfg.env);
    MetaPolicy meta{options, selector_from_params(params), std::nullopt};
    return run_hierarchical(env, meta, seed).total_reward;
  };

  const fs::path ledger_path = out_dir / meta_ledger_file();
  const StudyResult result =
      successive_halving(objective, space, cfg.search.halving(), &cfg.utility,
                         cfg.search.study_seed, workers, ledger_path.string(),
                         resume);

  const fs::path selector_path = out_dir / selector_file();
  auto out = open_out(selector_path);
  save_selector_csv(out, selector_from_params(result.best_params));
  finish(out, selector_path);
  return {meta_ledger_file(), selector_file()};
}

// ---- evaluation ----------------------------------------------------------------

void write_trace(const fs::path& path, const EpisodeRollout& rollout) {
  auto out = open_out(path);
  out << "step,action_index,filled,reward,mid,spread,participation,"
         "option_index,best_bid,best_ask,passive_price,fill_qty,"
         "fill_price_min,fill_price_max\n";
  for (const HierStepRecord& rec : rollout.steps) {
    const StepInfo& info = rec.info;
    const Tick spread = info.best_bid_at_decision > 0 &&
                                info.best_ask_at_decision > 0
                            ? info.best_ask_at_decision -
                                  info.best_bid_at_decision
                            : 0;
    out << fmt(static_cast<std::int64_t>(rec.step)) << ','
        << fmt(static_cast<std::int64_t>(rec.action)) << ','
        << fmt(rec.filled_after) << ',' << fmt(rec.reward) << ','
        << fmt(info.mid_at_decision) << ',' << fmt(spread) << ','
        << fmt(rec.participation_after) << ','
        << fmt(static_cast<std::int64_t>(rec.option)) << ','
        << fmt(info.best_bid_at_decision) << ','
        << fmt(info.best_ask_at_decision) << ',' << fmt(info.passive_price)
        << ',' << fmt(info.filled_this_step) << ',' << fmt(info.fill_price_min)
        << ',' << fmt(info.fill_price_max) << '\n';
  }
  finish(out, path);
}

std::vector<std::string> do_evaluate(const ExperimentConfig& cfg,
                                     const fs::path& out_dir) {
  const AgentRuntime agent = load_agent(cfg, out_dir.string());
  ExecEnv env(cfg.flow, cfg.parent, cfg.env);
  fs::create_directories(out_dir / "traces");

  std::vector<std::string> artifacts = {"episodes.csv", "summary.csv"};
  std::vector<EpisodeReport> reports;
  for (const std::uint64_t seed : cfg.seeds) {
    const EpisodeRollout rollout = run_episode(env, agent, seed);
    const std::string trace_name = "traces/trace_" + fmt(seed) + ".csv";
    write_trace(out_dir / trace_name, rollout);
    artifacts.push_back(trace_name);
    reports.push_back(report_of(env, seed, rollout.option_switches));
  }

  const fs::path episodes_path = out_dir / "episodes.csv";
  auto episodes = open_out(episodes_path);
  episodes << kProxyNote << '\n'
           << "seed,filled_fraction,exec_vwap,market_vwap,slippage_per_share,"
              "participation,total_reward,option_switches\n";
  for (const EpisodeReport& r : reports) {
    episodes << fmt(r.seed) << ',' << fmt(r.filled_fraction) << ','
             << fmt(r.exec_vwap) << ',' << fmt(r.market_vwap) << ','
             << fmt(r.slippage_per_share) << ',' << fmt(r.participation) << ','
             << fmt(r.total_reward) << ','
             << fmt(static_cast<std::int64_t>(r.option_switches)) << '\n';
  }
  finish(episodes, episodes_path);

  const StudySummary s =
      summarize(to_string(cfg.agent), reports, cfg.utility, cfg.parent.pov_target);
  const fs::path summary_path = out_dir / "summary.csv";
  auto summary = open_out(summary_path);
  summary << kProxyNote << '\n'
          << "agent,n_seeds,slippage_mean,slippage_stdev,slippage_p5,"
             "slippage_p95,slippage_ce,mean_abs_participation_gap\n"
          << s.agent << ',' << fmt(static_cast<std::int64_t>(s.n_seeds)) << ','
          << fmt(s.slippage_mean) << ',' << fmt(s.slippage_stdev) << ','
          << fmt(s.slippage_p5) << ',' << fmt(s.slippage_p95) << ','
          << fmt(s.slippage_ce) << ',' << fmt(s.mean_abs_participation_gap)
          << '\n';
  finish(summary, summary_path);
  return artifacts;
}

}  // namespace

// ---- building blocks -----------------------------------------------------------

std::string flat_table_file() { return "flat_table.csv"; }
std::string local_table_file(const std::string& spec_name) {
  return "local_" + spec_name + ".csv";
}
std::string selector_file() { return "meta_selector.csv"; }
std::string meta_ledger_file() { return "meta_ledger.csv"; }

AgentRuntime load_agent(const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  AgentRuntime agent;
  agent.kind = cfg.agent;
  const fs::path dir = out_dir;
  if (cfg.agent == AgentKind::FlatCerl) {
    agent.flat = load_table(dir / flat_table_file());
    if (agent.flat.n_states() != kCoarseStates) {
      throw ConfigError("flat table " + (dir / flat_table_file()).string() +
                        " does not cover the coarse state grid");
    }
  } else if (cfg.agent == AgentKind::Hierarchical) {
    agent.meta.options = load_locals(dir);
    const fs::path sel_path = dir / selector_file();
    std::ifstream in(sel_path, std::ios::binary);
    if (!in) {
      throw ConfigError("missing meta selector: " + sel_path.string() +
                        " (run search-meta first)");
    }
    agent.meta.selector = load_selector_csv(in);
    agent.meta.validate();
  }
  return agent;
}

EpisodeRollout run_episode(ExecEnv& env, const AgentRuntime& agent,
                           std::uint64_t seed) {
  EpisodeRollout rollout;
  switch (agent.kind) {
    case AgentKind::FlatCerl: {
      HierEpisode ep = run_flat(env, agent.flat, seed);
      rollout.steps = std::move(ep.steps);
      rollout.option_switches = ep.option_switches;
      return rollout;
    }
    case AgentKind::Hierarchical: {
      HierEpisode ep = run_hierarchical(env, agent.meta, seed);
      rollout.steps = std::move(ep.steps);
      rollout.option_switches = ep.option_switches;
      return rollout;
    }
    case AgentKind::Random:
    case AgentKind::PovBaseline:
      break;
  }

  const int n_actions = static_cast<int>(enumerate_actions().size());
  CounterRng rng(derive_key(seed, 0xAC7F));
  Observation obs = env.reset(seed);
  while (!env.done()) {
    const int action =
        agent.kind == AgentKind::Random
            ? static_cast<int>(rng.uniform_below(
                  static_cast<std::uint64_t>(n_actions)))
            : pov_baseline_action(env);
    const int step_no = env.step_index();
    const int coarse = coarse_state(obs);
    StepResult res = env.step(action);
    rollout.steps.push_back({step_no, false, 0, coarse, action, res.reward,
                             res.done, env.filled(), env.participation(),
                             res.info});
    obs = std::move(res.obs);
  }
  return rollout;
}

EpisodeReport report_of(const ExecEnv& env, std::uint64_t seed,
                        int option_switches) {
  EpisodeReport r;
  r.seed = seed;
  r.filled_fraction = static_cast<double>(env.filled()) /
                      static_cast<double>(env.parent().total_qty);
  r.exec_vwap = env.exec_vwap();
  r.market_vwap = env.market_vwap();
  r.slippage_per_share =
      env.filled() > 0 && env.market_volume() > 0
          ? side_sign(env.parent().side) * (r.market_vwap - r.exec_vwap)
          : 0.0;
  r.participation = env.participation();
  r.total_reward = env.total_reward();
  r.option_switches = option_switches;
  return r;
}

StudySummary summarize(const std::string& agent,
                       const std::vector<EpisodeReport>& reports,
                       const UtilityFn& u, double pov_target) {
  if (reports.empty()) throw std::invalid_argument("summarize: no episodes");
  StudySummary s;
  s.agent = agent;
  s.n_seeds = static_cast<int>(reports.size());

  std::vector<double> slippages;
  OutcomeDist dist;
  const double w = 1.0 / static_cast<double>(reports.size());
  double gap = 0.0;
  for (const EpisodeReport& r : reports) {
    slippages.push_back(r.slippage_per_share);
    dist.push_back({r.slippage_per_share, w});
    gap += std::abs(r.participation - pov_target);
  }
  s.slippage_mean = mean(slippages);
  s.slippage_stdev = slippages.size() > 1
                         ? stdev(slippages)
                         : std::numeric_limits<double>::quiet_NaN();
  s.slippage_p5 = percentile(slippages, 0.05);
  s.slippage_p95 = percentile(slippages, 0.95);
  s.slippage_ce = u.ce_terms(dist);
  s.mean_abs_participation_gap = gap / static_cast<double>(reports.size());
  return s;
}

ParamSpace selector_space(const std::vector<std::string>& option_names) {
  static const char* kSched[] = {"behind", "on", "ahead"};
  static const char* kSpread[] = {"tight", "wide"};
  ParamSpace space;
  for (int sched = 0; sched < 3; ++sched) {
    for (int spread = 0; spread < 2; ++spread) {
      space.dims.push_back(ParamDim::categorical(
          std::string("sel_") + kSched[sched] + "_" + kSpread[spread],
          option_names));
    }
  }
  return space;
}

std::vector<int> selector_from_params(const ParamPoint& params) {
  if (params.size() != 6) {
    throw std::invalid_argument(
        "selector points have one value per (schedule, spread) cell");
  }
  std::vector<int> selector(kCoarseStates);
  for (int c = 0; c < kCoarseStates; ++c) {
    const int sched = (c / 2) % 3;
    const int spread = c % 2;
    selector[static_cast<std::size_t>(c)] =
        static_cast<int>(params[static_cast<std::size_t>(sched * 2 + spread)].number);
  }
  return selector;
}

// ---- commands ------------------------------------------------------------------

void run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path out_dir = resolve_out_dir(cfg, opt);
  const auto artifacts = do_simulate(cfg, out_dir);
  write_manifest(out_dir, "simulate", cfg.config_hash, cfg.seeds, artifacts);
}

void run_train_local(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path out_dir = resolve_out_dir(cfg, opt);
  const auto artifacts = do_train_local(cfg, out_dir);
  write_manifest(out_dir, "train-local", cfg.config_hash, cfg.seeds, artifacts);
}

void run_search_meta(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path out_dir = resolve_out_dir(cfg, opt);
  const auto artifacts =
      do_search_meta(cfg, out_dir, opt.workers, opt.resume);
  write_manifest(out_dir, "search-meta", cfg.config_hash, cfg.seeds, artifacts);
}

void run_evaluate(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path out_dir = resolve_out_dir(cfg, opt);
  const auto artifacts = do_evaluate(cfg, out_dir);
  write_manifest(out_dir, "evaluate", cfg.config_hash, cfg.seeds, artifacts);
}

void run_pipeline(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path out_dir = resolve_out_dir(cfg, opt);
  std::vector<std::string> artifacts;
  const auto stage = [&artifacts](const char* name, auto&& fn) {
    try {
      const std::vector<std::string> produced = fn();
      artifacts.insert(artifacts.end(), produced.begin(), produced.end());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("pipeline stage ") + name + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("pipeline stage ") + name + ": " +
                               e.what());
    }
  };
  stage("train-local", [&] { return do_train_local(cfg, out_dir); });
  stage("search-meta",
        [&] { return do_search_meta(cfg, out_dir, opt.workers, opt.resume); });
  stage("evaluate", [&] { return do_evaluate(cfg, out_dir); });
  write_manifest(out_dir, "pipeline", cfg.config_hash, cfg.seeds, artifacts);
}

// ---- replay --------------------------------------------------------------------

void replay_trace(const std::string& trace_path, const std::string& out_csv) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw ConfigError("replay: cannot read '" + trace_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string raw = buf.str();
  std::istringstream stream(raw);
  const auto rows = read_csv(stream);
  if (rows.empty()) throw ConfigError("replay: trace is empty");

  const char* needed[] = {"step",     "best_bid",       "best_ask",
                          "passive_price", "fill_qty",  "fill_price_min",
                          "fill_price_max"};
  std::vector<std::size_t> cols;
  for (const char* name : needed) {
    const auto it = std::find(rows[0].begin(), rows[0].end(), name);
    if (it == rows[0].end()) {
      throw ConfigError(std::string("replay: trace is missing column '") +
                        name + "'");
    }
    cols.push_back(static_cast<std::size_t>(it - rows[0].begin()));
  }

  const fs::path out_path = out_csv;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  auto out = open_out(out_path);
  out << "step,best_bid,best_ask,passive_price,fill_qty,fill_price_min,"
         "fill_price_max\n";
  std::int64_t prev_step = -1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::int64_t values[7] = {};
    for (std::size_t i = 0; i < 7; ++i) {
      if (cols[i] >= row.size()) {
        throw ConfigError("replay: short row " + std::to_string(r));
      }
      try {
        values[i] = parse_i64(row[cols[i]]);
      } catch (const std::exception&) {
        throw ConfigError("replay: bad number in row " + std::to_string(r) +
                          " column '" + needed[i] + "'");
      }
    }
    if (values[0] <= prev_step) {
      throw ConfigError("replay: step column is not strictly increasing");
    }
    prev_step = values[0];

    // prices and fills render as events: absent values become empty cells
    auto cell = [](std::int64_t v) { return v > 0 ? fmt(v) : std::string(); };
    const bool filled = values[4] > 0;
    out << fmt(values[0]) << ',' << cell(values[1]) << ',' << cell(values[2])
        << ',' << cell(values[3]) << ',' << (filled ? fmt(values[4]) : "")
        << ',' << (filled ? fmt(values[5]) : "") << ','
        << (filled ? fmt(values[6]) : "") << '\n';
  }
  finish(out, out_path);

  nlohmann::json j;
  j["schema_version"] = 1;
  j["command"] = "replay";
  j["config_hash"] = fnv1a64_hex(raw);
  j["seeds"] = nlohmann::json::array();
  j["artifacts"] = {out_path.filename().string()};
  const fs::path manifest_path = out_path.string() + ".manifest.json";
  auto mout = open_out(manifest_path);
  mout << j.dump(2) << '\n';
  finish(mout, manifest_path);
}

}  // namespace execsim
