// Hierarchical agent: local policies trained on restricted action subspaces
// with short-horizon shaped rewards, composed by a lower-frequency meta
// selector over a coarse state grid (semi-MDP semantics: the active option
// only changes when its termination rule fires).
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cerl.hpp"
#include "exec_env.hpp"

namespace execsim {

// ---- coarse state grid ------------------------------------------------------

// remaining_fraction and time_fraction in 4 equal bins each, schedule
// deviation in {behind, on, ahead} with the closed band ±0.05, spread in
// {1 tick, wider}: 4 × 4 × 3 × 2 = 96 states.
inline constexpr int kCoarseStates = 96;
inline constexpr double kScheduleBand = 0.05;

struct CoarseState {
  int rem_bin = 0;     // 0..3
  int time_bin = 0;    // 0..3
  int sched_bin = 0;   // 0 behind, 1 on, 2 ahead
  int spread_bin = 0;  // 0: spread == 1 tick, 1: anything else
};

CoarseState coarse_bins(const Observation& obs);
int coarse_index(const CoarseState& c);
int coarse_state(const Observation& obs);

// ---- local policies ---------------------------------------------------------

enum class LocalReward {
  FillPriceVsMid,    // all fills: sign × (mid_at_decision − fill_price) per share
  SpreadCapture,     // maker fills only, same per-share price edge
  ScheduleTracking,  // |deviation before| − |deviation after|
};

struct TerminationRule {
  enum class Kind { FixedSteps, OnFill, OnScheduleBandExit };
  Kind kind = Kind::FixedSteps;
  int steps = 1;  // FixedSteps only

  static TerminationRule fixed_steps(int n) {
    return {Kind::FixedSteps, n};
  }
  static TerminationRule on_fill() { return {Kind::OnFill, 1}; }
  static TerminationRule on_schedule_band_exit() {
    return {Kind::OnScheduleBandExit, 1};
  }
};

struct LocalPolicySpec {
  std::string name;
  std::vector<int> action_subspace;  // indices into enumerate_actions(), ascending
  LocalReward local_reward = LocalReward::SpreadCapture;
  int local_horizon = 25;  // training episodes are truncated here
  TerminationRule termination = TerminationRule::on_fill();

  void validate() const;  // throws invalid_argument naming the violation
};

// The default option pair: a passive placer that works the spread and an
// aggressive taker that repairs schedule slippage.
LocalPolicySpec passive_placer_spec();
LocalPolicySpec aggressive_taker_spec();

// DiscreteEnv view of an execution episode on the coarse grid with a
// restricted action set. Rewards are the configured local shaping, or the raw
// environment reward when `local_reward` is empty (the flat agent's view).
// Episodes are truncated at `horizon_cap` steps when one is given.
class CoarseExecEnv : public DiscreteEnv {
 public:
  CoarseExecEnv(ExecEnv& env, std::vector<int> action_subspace,
                std::optional<LocalReward> local_reward,
                std::optional<int> horizon_cap);

  int n_states() const override { return kCoarseStates; }
  int n_actions() const override {
    return static_cast<int>(subspace_.size());
  }
  int reset(std::uint64_t seed) override;
  StepOutcome step(int col) override;
  const std::vector<int>& subspace() const { return subspace_; }

 private:
  ExecEnv& env_;
  std::vector<int> subspace_;
  std::optional<LocalReward> local_reward_;
  std::optional<int> horizon_cap_;
  int steps_ = 0;
};

struct LocalPolicy {
  LocalPolicySpec spec;
  QTable table;  // columns labeled with global action indices

  int greedy_action(int coarse) const { return table.greedy_action(coarse); }
};

// CE Q-learning restricted to spec.action_subspace with spec.local_reward in
// place of the environment reward; episodes truncated at spec.local_horizon.
LocalPolicy train_local(ExecEnv& env, const LocalPolicySpec& spec,
                        const UtilityFn& u, std::int64_t episodes,
                        const LearningRate& lr, const Exploration& exploration,
                        std::uint64_t seed);

// ---- meta policy and rollout --------------------------------------------------

struct MetaPolicy {
  std::vector<LocalPolicy> options;
  std::vector<int> selector;  // kCoarseStates entries -> option index
  // When set, replaces every option's own termination rule.
  std::optional<TerminationRule> epoch_rule;

  void validate() const;
};

struct HierStepRecord {
  int step = 0;
  bool reselected = false;  // the meta picked (or re-picked) an option here
  int option = 0;
  int coarse = 0;  // coarse state the decision was made in
  int action = 0;  // global action index
  double reward = 0.0;
  bool done = false;
  Qty filled_after = 0;
  double participation_after = 0.0;
  StepInfo info;
};

struct HierEpisode {
  std::vector<HierStepRecord> steps;
  int option_switches = 0;  // re-selections after the first pick
  double total_reward = 0.0;
};

// Greedy rollout of the hierarchy for one episode: each base step first
// re-evaluates the active option's termination rule (the epoch rule when the
// meta defines one) and lets the selector pick from the coarse state when it
// fires, then the active option supplies the action.
HierEpisode run_hierarchical(ExecEnv& env, const MetaPolicy& meta,
                             std::uint64_t seed);

// Greedy rollout of a single flat table over the full episode (option 0 in
// the records). A one-option meta produces the identical trace.
HierEpisode run_flat(ExecEnv& env, const QTable& table, std::uint64_t seed);

// ---- selector serialization ---------------------------------------------------

// CSV: rem_bin,time_bin,sched_bin,spread_bin,option — one row per coarse
// state in index order.
void save_selector_csv(std::ostream& out, const std::vector<int>& selector);
std::vector<int> load_selector_csv(std::istream& in);

}  // namespace execsim
