// Parent-order execution environment: fixed-dimension book observations, a
// finite action space of concurrent child orders, VWAP-relative rewards, and
// the PoV baseline rule.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"
#include "flow_sim.hpp"

namespace execsim {

struct ParentOrder {
  Side side = Side::Buy;
  Qty total_qty = 2000;
  int horizon = 250;          // base steps per episode
  double pov_target = 0.15;   // baseline participation target

  void validate() const;  // throws ConfigError naming the field
};

struct EnvConfig {
  int levels = 10;            // K book levels per side in the observation
  Qty small_child_qty = 25;
  Qty large_child_qty = 100;
  double pov_band = 0.02;     // tolerance band of the PoV baseline

  void validate() const;
};

enum class ChildSize { Small, Large };

// One agent decision: optionally rest a passive child order (level_offset
// ticks behind the same-side best), optionally fire an aggressive child, or
// cancel the resting passive order. All empty = no-op.
struct ActionSpec {
  struct Passive {
    int offset = 0;  // 0, 1, or 2 ticks behind the same-side best
    ChildSize size = ChildSize::Small;
  };
  std::optional<Passive> passive;
  std::optional<ChildSize> aggressive;
  bool cancel_all_passive = false;
};

// The fixed 22-action enumeration, stable across runs:
//   0             no-op
//   1             cancel the resting passive order
//   2..7          passive only: offsets 0,1,2 × sizes small,large
//   8..9          aggressive only: small, large
//   10..21        passive+aggressive: the six passives × sizes small,large
const std::vector<ActionSpec>& enumerate_actions();

// Fixed-dimension book summary plus parent-order context; missing levels are
// zero-filled so the length is always 4K + 4.
struct Observation {
  // (price offset from the reference in ticks, qty / init_depth_qty) per
  // level: K bid levels best-first, then K ask levels best-first
  std::vector<double> book_feats;
  double remaining_fraction = 1.0;
  double time_fraction = 0.0;
  double schedule_deviation = 0.0;  // participation − pov_target, 0 before any trade
  double spread_ticks = 0.0;        // 0 when either side is empty

  std::vector<double> as_vector() const;  // 4K book features + the 4 above
};

// Book features relative to the mid, or to `anchor price` when a side is
// empty; quantities are normalized by init_depth_qty.
Observation featurize(const LimitOrderBook& book, int levels, Qty init_depth_qty,
                      Tick anchor_price, double remaining_fraction,
                      double time_fraction, double schedule_deviation);

struct StepInfo {
  Qty filled_this_step = 0;
  double exec_vwap_so_far = 0.0;      // 0 until the first agent fill
  double market_vwap_so_far = 0.0;    // 0 until the first trade
  double participation_so_far = 0.0;  // agent fills / all trade volume

  // decision-time context and per-step fill detail, for traces and local
  // reward shaping
  double mid_at_decision = 0.0;  // reference price when the action was chosen
  Tick best_bid_at_decision = 0;      // 0 when the side was empty
  Tick best_ask_at_decision = 0;
  Tick passive_price = 0;             // resting passive price after this step, 0 if none
  Qty maker_fill_qty = 0;             // subset of fills where the agent was maker
  double maker_fill_pv = 0.0;         // Σ price×qty over maker fills
  double fill_pv = 0.0;               // Σ price×qty over all agent fills
  Tick fill_price_min = 0;            // 0 when no fills this step
  Tick fill_price_max = 0;
  double terminal_penalty = 0.0;      // liquidation term included in reward
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Episode lifecycle. One decision per simulation step:
//   1. apply the cancel flag, 2. place/replace the passive child (capped at
//   the unplaced remainder; an identical (price, size) instruction leaves the
//   resting order and its queue priority untouched), 3. fire the aggressive
//   child (capped so resting + filled never exceeds total), 4. run one
//   background step, 5. score fills against the running all-trades VWAP:
//   reward += sign(side) × (vwap − fill_price) × qty / total_qty, the VWAP
//   updating before each fill is scored.
// At the horizon any remainder is priced by walking the opposite side
// (agent orders excluded); whatever the book cannot supply is charged at the
// episode's worst observed trade price (the anchor price if nothing traded).
class ExecEnv {
 public:
  ExecEnv(FlowConfig flow, ParentOrder parent, EnvConfig env);

  Observation reset(std::uint64_t seed);
  StepResult step(int action_index);
  StepResult step(const ActionSpec& action);

  const ParentOrder& parent() const { return parent_; }
  const EnvConfig& env_config() const { return env_config_; }

  bool done() const { return done_; }
  int step_index() const { return step_index_; }
  Qty filled() const { return filled_; }
  Qty remaining() const { return parent_.total_qty - filled_; }
  Qty market_volume() const { return market_volume_; }
  double exec_vwap() const {
    return filled_ > 0 ? exec_pv_ / static_cast<double>(filled_) : 0.0;
  }
  double market_vwap() const {
    return market_volume_ > 0 ? market_pv_ / static_cast<double>(market_volume_)
                              : 0.0;
  }
  double participation() const {
    return market_volume_ > 0
               ? static_cast<double>(filled_) / static_cast<double>(market_volume_)
               : 0.0;
  }
  double schedule_deviation() const {
    return market_volume_ > 0 ? participation() - parent_.pov_target : 0.0;
  }
  double total_reward() const { return total_reward_; }

  // Remaining quantity of the agent's passive child currently resting in the
  // book, 0 when none rests.
  Qty passive_resting_qty() const;

  // The live market (tests script deterministic episodes through it).
  MarketSim& sim();
  const MarketSim& sim() const;

  Observation observe() const;

 private:
  void process_new_trades(StepInfo& info, double& reward);
  double reference_price() const;

  FlowConfig flow_;
  ParentOrder parent_;
  EnvConfig env_config_;

  std::optional<MarketSim> sim_;
  bool done_ = true;
  int step_index_ = 0;
  Qty filled_ = 0;
  double exec_pv_ = 0.0;
  Qty market_volume_ = 0;
  double market_pv_ = 0.0;
  double total_reward_ = 0.0;
  std::optional<OrderId> passive_id_;
  std::size_t trades_seen_ = 0;
  std::optional<Tick> worst_trade_price_;  // max for buys, min for sells
};

// PoV baseline rule on the current environment state: no-op when ahead of
// target, passive at the touch when on schedule, passive plus aggressive when
// behind by more than the band; child sizes switch to large when the
// behind-schedule quantity reaches large_child_qty. Near the end of the
// parent (remainder at most one large child) a behind-schedule agent stops
// quoting passively — it pulls any resting child and takes the remainder
// aggressively, since a passive child covering the whole remainder would cap
// the aggressive leg of a combo to zero and stall the order at a stale price.
// Returns an index into enumerate_actions().
int pov_baseline_action(const ExecEnv& env);

}  // namespace execsim
