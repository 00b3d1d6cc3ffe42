#include "hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csv.hpp"

namespace execsim {

// ---- coarse state grid ------------------------------------------------------

namespace {

int quarter_bin(double fraction) {
  if (fraction <= 0.0) return 0;
  if (fraction >= 1.0) return 3;
  return std::min(3, static_cast<int>(fraction * 4.0));
}

}  // namespace

CoarseState coarse_bins(const Observation& obs) {
  CoarseState c;
  c.rem_bin = quarter_bin(obs.remaining_fraction);
  c.time_bin = quarter_bin(obs.time_fraction);
  if (obs.schedule_deviation < -kScheduleBand) {
    c.sched_bin = 0;  // behind
  } else if (obs.schedule_deviation > kScheduleBand) {
    c.sched_bin = 2;  // ahead
  } else {
    c.sched_bin = 1;  // on schedule (closed band)
  }
  c.spread_bin = obs.spread_ticks == 1.0 ? 0 : 1;
  return c;
}

int coarse_index(const CoarseState& c) {
  return ((c.rem_bin * 4 + c.time_bin) * 3 + c.sched_bin) * 2 + c.spread_bin;
}

int coarse_state(const Observation& obs) { return coarse_index(coarse_bins(obs)); }

// ---- local policy specs -------------------------------------------------------

void LocalPolicySpec::validate() const {
  if (action_subspace.empty()) {
    throw std::invalid_argument("action_subspace must be nonempty");
  }
  const int n_all = static_cast<int>(enumerate_actions().size());
  for (std::size_t i = 0; i < action_subspace.size(); ++i) {
    if (action_subspace[i] < 0 || action_subspace[i] >= n_all) {
      throw std::invalid_argument("action_subspace index out of range");
    }
    if (i > 0 && action_subspace[i] <= action_subspace[i - 1]) {
      throw std::invalid_argument(
          "action_subspace must be strictly ascending");
    }
  }
  if (local_horizon < 1) {
    throw std::invalid_argument("local_horizon must be >= 1");
  }
  if (termination.kind == TerminationRule::Kind::FixedSteps &&
      termination.steps < 1) {
    throw std::invalid_argument("fixed_steps termination needs steps >= 1");
  }
}

LocalPolicySpec passive_placer_spec() {
  LocalPolicySpec s;
  s.name = "passive_placer";
  s.action_subspace = {0, 1, 2, 3, 4, 5, 6, 7};  // no-op, cancel, passives
  s.local_reward = LocalReward::SpreadCapture;
  s.local_horizon = 25;
  s.termination = TerminationRule::on_fill();
  return s;
}

LocalPolicySpec aggressive_taker_spec() {
  LocalPolicySpec s;
  s.name = "aggressive_taker";
  s.action_subspace = {0, 8, 9};  // no-op, aggressive small, aggressive large
  s.local_reward = LocalReward::ScheduleTracking;
  s.local_horizon = 10;
  s.termination = TerminationRule::fixed_steps(2);
  return s;
}

// ---- coarse environment adapter ------------------------------------------------

CoarseExecEnv::CoarseExecEnv(ExecEnv& env, std::vector<int> action_subspace,
                             std::optional<LocalReward> local_reward,
                             std::optional<int> horizon_cap)
    : env_(env),
      subspace_(std::move(action_subspace)),
      local_reward_(local_reward),
      horizon_cap_(horizon_cap) {
  if (subspace_.empty()) {
    throw std::invalid_argument("action_subspace must be nonempty");
  }
  if (horizon_cap_ && *horizon_cap_ < 1) {
    throw std::invalid_argument("horizon cap must be >= 1");
  }
}

int CoarseExecEnv::reset(std::uint64_t seed) {
  steps_ = 0;
  return coarse_state(env_.reset(seed));
}

DiscreteEnv::StepOutcome CoarseExecEnv::step(int col) {
  if (col < 0 || static_cast<std::size_t>(col) >= subspace_.size()) {
    throw std::invalid_argument("action column out of range");
  }
  const double dev_prev = env_.schedule_deviation();
  const double sign = static_cast<double>(side_sign(env_.parent().side));
  StepResult r = env_.step(subspace_[static_cast<std::size_t>(col)]);

  double reward = r.reward;
  if (local_reward_) {
    switch (*local_reward_) {
      case LocalReward::FillPriceVsMid:
        reward = sign * (r.info.mid_at_decision *
                             static_cast<double>(r.info.filled_this_step) -
                         r.info.fill_pv);
        break;
      case LocalReward::SpreadCapture:
        reward = sign * (r.info.mid_at_decision *
                             static_cast<double>(r.info.maker_fill_qty) -
                         r.info.maker_fill_pv);
        break;
      case LocalReward::ScheduleTracking:
        reward = std::abs(dev_prev) - std::abs(env_.schedule_deviation());
        break;
    }
  }

  ++steps_;
  const bool done = r.done || (horizon_cap_ && steps_ >= *horizon_cap_);
  return {coarse_state(r.obs), reward, done};
}

LocalPolicy train_local(ExecEnv& env, const LocalPolicySpec& spec,
                        const UtilityFn& u, std::int64_t episodes,
                        const LearningRate& lr, const Exploration& exploration,
                        std::uint64_t seed) {
  spec.validate();
  CoarseExecEnv cenv(env, spec.action_subspace, spec.local_reward,
                     spec.local_horizon);
  QTable table = ce_q_learning(cenv, u, episodes, lr, exploration, seed,
                               spec.action_subspace);
  return LocalPolicy{spec, std::move(table)};
}

// ---- meta policy ---------------------------------------------------------------

void MetaPolicy::validate() const {
  if (options.empty()) throw std::invalid_argument("meta needs options");
  for (const LocalPolicy& opt : options) {
    opt.spec.validate();
    if (opt.table.n_states() != kCoarseStates) {
      throw std::invalid_argument("option table must cover the coarse grid");
    }
    if (opt.table.action_ids() != opt.spec.action_subspace) {
      throw std::invalid_argument(
          "option table columns must match the action subspace");
    }
  }
  if (selector.size() != static_cast<std::size_t>(kCoarseStates)) {
    throw std::invalid_argument("selector must cover all coarse states");
  }
  for (int option : selector) {
    if (option < 0 || static_cast<std::size_t>(option) >= options.size()) {
      throw std::invalid_argument("selector option index out of range");
    }
  }
  if (epoch_rule && epoch_rule->kind == TerminationRule::Kind::FixedSteps &&
      epoch_rule->steps < 1) {
    throw std::invalid_argument("fixed_steps epoch rule needs steps >= 1");
  }
}

namespace {

bool termination_fires(const TerminationRule& rule, int steps_in_option,
                       Qty last_step_fill, int sched_at_select, int sched_now) {
  switch (rule.kind) {
    case TerminationRule::Kind::FixedSteps:
      return steps_in_option >= rule.steps;
    case TerminationRule::Kind::OnFill:
      return last_step_fill > 0;
    case TerminationRule::Kind::OnScheduleBandExit:
      return sched_now != sched_at_select;
  }
  return true;
}

}  // namespace

HierEpisode run_hierarchical(ExecEnv& env, const MetaPolicy& meta,
                             std::uint64_t seed) {
  meta.validate();
  HierEpisode ep;
  Observation obs = env.reset(seed);
  int active = -1;
  int steps_in_option = 0;
  int sched_at_select = -1;
  Qty last_step_fill = 0;
  bool done = false;
  int step = 0;

  while (!done) {
    const CoarseState bins = coarse_bins(obs);
    const int coarse = coarse_index(bins);

    bool fire = active < 0;
    if (!fire) {
      const TerminationRule& rule =
          meta.epoch_rule ? *meta.epoch_rule
                          : meta.options[static_cast<std::size_t>(active)]
                                .spec.termination;
      fire = termination_fires(rule, steps_in_option, last_step_fill,
                               sched_at_select, bins.sched_bin);
    }
    if (fire) {
      const int next = meta.selector[static_cast<std::size_t>(coarse)];
      if (active >= 0 && next != active) ++ep.option_switches;
      active = next;
      steps_in_option = 0;
      sched_at_select = bins.sched_bin;
    }

    const int action =
        meta.options[static_cast<std::size_t>(active)].greedy_action(coarse);
    StepResult r = env.step(action);

    HierStepRecord rec;
    rec.step = step;
    rec.reselected = fire;
    rec.option = active;
    rec.coarse = coarse;
    rec.action = action;
    rec.reward = r.reward;
    rec.done = r.done;
    rec.filled_after = env.filled();
    rec.participation_after = env.participation();
    rec.info = r.info;
    ep.steps.push_back(rec);
    ep.total_reward += r.reward;

    ++steps_in_option;
    last_step_fill = r.info.filled_this_step;
    obs = std::move(r.obs);
    done = r.done;
    ++step;
  }
  return ep;
}

HierEpisode run_flat(ExecEnv& env, const QTable& table, std::uint64_t seed) {
  if (table.n_states() != kCoarseStates) {
    throw std::invalid_argument("flat table must cover the coarse grid");
  }
  HierEpisode ep;
  Observation obs = env.reset(seed);
  bool done = false;
  int step = 0;
  while (!done) {
    const int coarse = coarse_state(obs);
    const int action = table.greedy_action(coarse);
    StepResult r = env.step(action);

    HierStepRecord rec;
    rec.step = step;
    rec.reselected = step == 0;
    rec.option = 0;
    rec.coarse = coarse;
    rec.action = action;
    rec.reward = r.reward;
    rec.done = r.done;
    rec.filled_after = env.filled();
    rec.participation_after = env.participation();
    rec.info = r.info;
    ep.steps.push_back(rec);
    ep.total_reward += r.reward;

    obs = std::move(r.obs);
    done = r.done;
    ++step;
  }
  return ep;
}

// ---- selector serialization ------------------------------------------------------

void save_selector_csv(std::ostream& out, const std::vector<int>& selector) {
  if (selector.size() != static_cast<std::size_t>(kCoarseStates)) {
    throw std::invalid_argument("selector must cover all coarse states");
  }
  out << "rem_bin,time_bin,sched_bin,spread_bin,option\n";
  for (int idx = 0; idx < kCoarseStates; ++idx) {
    const int rem = idx / 24;
    const int time = (idx / 6) % 4;
    const int sched = (idx / 2) % 3;
    const int spread = idx % 2;
    out << fmt(static_cast<std::int64_t>(rem)) << ','
        << fmt(static_cast<std::int64_t>(time)) << ','
        << fmt(static_cast<std::int64_t>(sched)) << ','
        << fmt(static_cast<std::int64_t>(spread)) << ','
        << fmt(static_cast<std::int64_t>(selector[static_cast<std::size_t>(idx)]))
        << '\n';
  }
}

std::vector<int> load_selector_csv(std::istream& in) {
  const auto rows = read_csv(in);
  if (rows.empty() ||
      rows[0] != std::vector<std::string>{"rem_bin", "time_bin", "sched_bin",
                                          "spread_bin", "option"}) {
    throw std::invalid_argument("selector csv: bad header");
  }
  if (rows.size() != static_cast<std::size_t>(kCoarseStates) + 1) {
    throw std::invalid_argument("selector csv: expected 96 rows");
  }
  std::vector<int> selector(kCoarseStates, 0);
  for (int idx = 0; idx < kCoarseStates; ++idx) {
    const auto& row = rows[static_cast<std::size_t>(idx) + 1];
    if (row.size() != 5) throw std::invalid_argument("selector csv: bad row");
    CoarseState c;
    c.rem_bin = static_cast<int>(parse_i64(row[0]));
    c.time_bin = static_cast<int>(parse_i64(row[1]));
    c.sched_bin = static_cast<int>(parse_i64(row[2]));
    c.spread_bin = static_cast<int>(parse_i64(row[3]));
    if (coarse_index(c) != idx) {
      throw std::invalid_argument("selector csv: rows out of order");
    }
    const std::int64_t option = parse_i64(row[4]);
    if (option < 0) throw std::invalid_argument("selector csv: bad option");
    selector[static_cast<std::size_t>(idx)] = static_cast<int>(option);
  }
  return selector;
}

}  // namespace execsim
