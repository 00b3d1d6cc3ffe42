#include "exec_env.hpp"

#include <algorithm>
#include <stdexcept>

namespace execsim {

void ParentOrder::validate() const {
  if (total_qty <= 0) throw ConfigError("parent.total_qty must be > 0");
  if (horizon <= 0) throw ConfigError("parent.horizon must be > 0");
  if (!(pov_target > 0.0) || !(pov_target < 1.0)) {
    throw ConfigError("parent.pov_target must be in (0, 1)");
  }
}

void EnvConfig::validate() const {
  if (levels <= 0) throw ConfigError("env.levels must be > 0");
  if (small_child_qty <= 0) throw ConfigError("env.small_child_qty must be > 0");
  if (large_child_qty < small_child_qty) {
    throw ConfigError("env.large_child_qty must be >= env.small_child_qty");
  }
  if (pov_band < 0.0) throw ConfigError("env.pov_band must be >= 0");
}

const std::vector<ActionSpec>& enumerate_actions() {
  static const std::vector<ActionSpec> actions = [] {
    std::vector<ActionSpec> out;
    out.push_back({});  // 0: no-op
    ActionSpec cancel;
    cancel.cancel_all_passive = true;
    out.push_back(cancel);  // 1
    std::vector<ActionSpec::Passive> passives;
    for (int offset = 0; offset <= 2; ++offset) {
      for (ChildSize size : {ChildSize::Small, ChildSize::Large}) {
        passives.push_back({offset, size});
      }
    }
    for (const auto& p : passives) {  // 2..7
      ActionSpec a;
      a.passive = p;
      out.push_back(a);
    }
    for (ChildSize size : {ChildSize::Small, ChildSize::Large}) {  // 8..9
      ActionSpec a;
      a.aggressive = size;
      out.push_back(a);
    }
    for (const auto& p : passives) {  // 10..21
      for (ChildSize size : {ChildSize::Small, ChildSize::Large}) {
        ActionSpec a;
        a.passive = p;
        a.aggressive = size;
        out.push_back(a);
      }
    }
    return out;
  }();
  return actions;
}

std::vector<double> Observation::as_vector() const {
  std::vector<double> v = book_feats;
  v.push_back(remaining_fraction);
  v.push_back(time_fraction);
  v.push_back(schedule_deviation);
  v.push_back(spread_ticks);
  return v;
}

Observation featurize(const LimitOrderBook& book, int levels, Qty init_depth_qty,
                      Tick anchor_price, double remaining_fraction,
                      double time_fraction, double schedule_deviation) {
  if (levels <= 0) throw std::invalid_argument("levels must be > 0");
  if (init_depth_qty <= 0) {
    throw std::invalid_argument("init_depth_qty must be > 0");
  }
  DepthSnapshot snap = book.depth(levels);
  double ref = snap.mid_half_ticks
                   ? static_cast<double>(*snap.mid_half_ticks) / 2.0
                   : static_cast<double>(anchor_price);
  Observation obs;
  obs.book_feats.assign(static_cast<std::size_t>(4 * levels), 0.0);
  const double qty_scale = static_cast<double>(init_depth_qty);
  for (std::size_t i = 0; i < snap.bids.size(); ++i) {
    obs.book_feats[2 * i] = static_cast<double>(snap.bids[i].price) - ref;
    obs.book_feats[2 * i + 1] =
        static_cast<double>(snap.bids[i].qty) / qty_scale;
  }
  const std::size_t ask_base = static_cast<std::size_t>(2 * levels);
  for (std::size_t i = 0; i < snap.asks.size(); ++i) {
    obs.book_feats[ask_base + 2 * i] =
        static_cast<double>(snap.asks[i].price) - ref;
    obs.book_feats[ask_base + 2 * i + 1] =
        static_cast<double>(snap.asks[i].qty) / qty_scale;
  }
  obs.remaining_fraction = remaining_fraction;
  obs.time_fraction = time_fraction;
  obs.schedule_deviation = schedule_deviation;
  obs.spread_ticks = snap.spread ? static_cast<double>(*snap.spread) : 0.0;
  return obs;
}

ExecEnv::ExecEnv(FlowConfig flow, ParentOrder parent, EnvConfig env)
    : flow_(std::move(flow)), parent_(parent), env_config_(env) {
  flow_.validate();
  parent_.validate();
  env_config_.validate();
}

MarketSim& ExecEnv::sim() {
  if (!sim_) throw std::logic_error("environment has not been reset");
  return *sim_;
}

const MarketSim& ExecEnv::sim() const {
  if (!sim_) throw std::logic_error("environment has not been reset");
  return *sim_;
}

Qty ExecEnv::passive_resting_qty() const {
  if (!passive_id_ || !sim_) return 0;
  const LimitOrder* order = sim_->book().find_order(*passive_id_);
  return order && order->resting ? order->remaining : 0;
}

double ExecEnv::reference_price() const {
  const LimitOrderBook& book = sim_->book();
  auto bb = book.best_bid();
  auto ba = book.best_ask();
  if (bb && ba) return static_cast<double>(*bb + *ba) / 2.0;
  return static_cast<double>(sim_->anchor_price());
}

Observation ExecEnv::observe() const {
  if (!sim_) throw std::logic_error("environment has not been reset");
  double remaining_fraction = static_cast<double>(remaining()) /
                              static_cast<double>(parent_.total_qty);
  double time_fraction = static_cast<double>(step_index_) /
                         static_cast<double>(parent_.horizon);
  return featurize(sim_->book(), env_config_.levels, flow_.init_depth_qty,
                   sim_->anchor_price(), remaining_fraction, time_fraction,
                   schedule_deviation());
}

Observation ExecEnv::reset(std::uint64_t seed) {
  sim_.emplace(flow_, seed);
  done_ = false;
  step_index_ = 0;
  filled_ = 0;
  exec_pv_ = 0.0;
  market_volume_ = 0;
  market_pv_ = 0.0;
  total_reward_ = 0.0;
  passive_id_.reset();
  trades_seen_ = sim_->book().trade_log().size();
  worst_trade_price_.reset();
  return observe();
}

void ExecEnv::process_new_trades(StepInfo& info, double& reward) {
  const LimitOrderBook& book = sim_->book();
  const auto& log = book.trade_log();
  const double sign = static_cast<double>(side_sign(parent_.side));
  const double total = static_cast<double>(parent_.total_qty);
  for (std::size_t i = trades_seen_; i < log.size(); ++i) {
    const Trade& t = log[i];
    const double pq = static_cast<double>(t.price) * static_cast<double>(t.qty);
    market_pv_ += pq;
    market_volume_ += t.qty;
    const double vwap = market_pv_ / static_cast<double>(market_volume_);

    if (parent_.side == Side::Buy) {
      if (!worst_trade_price_ || t.price > *worst_trade_price_) {
        worst_trade_price_ = t.price;
      }
    } else {
      if (!worst_trade_price_ || t.price < *worst_trade_price_) {
        worst_trade_price_ = t.price;
      }
    }

    const bool maker_is_agent =
        book.find_order(t.maker_id)->owner == Owner::Agent;
    const bool taker_is_agent =
        book.find_order(t.taker_id)->owner == Owner::Agent;
    if (!maker_is_agent && !taker_is_agent) continue;

    filled_ += t.qty;
    exec_pv_ += pq;
    reward += sign * (vwap - static_cast<double>(t.price)) *
              static_cast<double>(t.qty) / total;
    info.filled_this_step += t.qty;
    info.fill_pv += pq;
    if (info.fill_price_min == 0 || t.price < info.fill_price_min) {
      info.fill_price_min = t.price;
    }
    if (info.fill_price_max == 0 || t.price > info.fill_price_max) {
      info.fill_price_max = t.price;
    }
    if (maker_is_agent) {
      info.maker_fill_qty += t.qty;
      info.maker_fill_pv += pq;
    }
  }
  trades_seen_ = log.size();
}

StepResult ExecEnv::step(int action_index) {
  const auto& actions = enumerate_actions();
  if (action_index < 0 ||
      static_cast<std::size_t>(action_index) >= actions.size()) {
    throw std::invalid_argument("action index out of range");
  }
  return step(actions[static_cast<std::size_t>(action_index)]);
}

StepResult ExecEnv::step(const ActionSpec& action) {
  if (!sim_) throw std::logic_error("environment has not been reset");
  if (done_) throw std::logic_error("episode is finished");
  if (action.passive &&
      (action.passive->offset < 0 || action.passive->offset > 2)) {
    throw std::invalid_argument("passive offset must be 0, 1, or 2");
  }

  LimitOrderBook& book = sim_->book();
  StepInfo info;
  double reward = 0.0;

  info.mid_at_decision = reference_price();
  info.best_bid_at_decision = book.best_bid().value_or(0);
  info.best_ask_at_decision = book.best_ask().value_or(0);

  if (action.cancel_all_passive && passive_id_) {
    book.cancel(*passive_id_);
    passive_id_.reset();
  }

  if (action.passive) {
    const Qty bucket = action.passive->size == ChildSize::Small
                           ? env_config_.small_child_qty
                           : env_config_.large_child_qty;
    const Qty desired = std::min(bucket, remaining());
    // Price the child `offset` ticks behind the same-side best (behind the
    // anchor when the side is empty) and never let it cross the opposite
    // touch, so "passive" always rests.
    const int sgn = side_sign(parent_.side);
    auto same_best =
        parent_.side == Side::Buy ? book.best_bid() : book.best_ask();
    Tick price = (same_best ? *same_best : sim_->anchor_price()) -
                 sgn * static_cast<Tick>(action.passive->offset);
    if (parent_.side == Side::Buy) {
      if (auto ba = book.best_ask()) price = std::min(price, *ba - 1);
    } else {
      if (auto bb = book.best_bid()) price = std::max(price, *bb + 1);
    }
    price = std::max<Tick>(price, 1);

    const LimitOrder* existing =
        passive_id_ ? book.find_order(*passive_id_) : nullptr;
    const bool keep = existing && existing->resting &&
                      existing->price == price && existing->qty == desired;
    if (!keep) {
      if (existing && existing->resting) book.cancel(*passive_id_);
      passive_id_.reset();
      if (desired > 0) {
        auto res = book.submit_limit(parent_.side, price, desired, Owner::Agent);
        passive_id_ = res.id;
      }
    }
  }

  if (action.aggressive) {
    Qty passive_rem = 0;
    if (passive_id_) {
      const LimitOrder* p = book.find_order(*passive_id_);
      if (p && p->resting) passive_rem = p->remaining;
    }
    const Qty bucket = *action.aggressive == ChildSize::Small
                           ? env_config_.small_child_qty
                           : env_config_.large_child_qty;
    const Qty size = std::min(bucket, remaining() - passive_rem);
    if (size > 0) book.submit_market(parent_.side, size, Owner::Agent);
  }

  sim_->step_background();
  process_new_trades(info, reward);

  ++step_index_;
  if (filled_ >= parent_.total_qty) {
    done_ = true;
  } else if (step_index_ >= parent_.horizon) {
    done_ = true;
    // Liquidate the remainder against the far-side background depth; price
    // anything the book cannot supply at the episode's worst trade print
    // (the anchor when nothing traded at all).
    const double sign = static_cast<double>(side_sign(parent_.side));
    const double total = static_cast<double>(parent_.total_qty);
    const double ref = market_volume_ > 0
                           ? market_vwap()
                           : static_cast<double>(sim_->anchor_price());
    const Side far_side = opposite(parent_.side);
    Qty to_fill = remaining();
    double penalty = 0.0;
    for (OrderId id : book.resting_ids(Owner::Background)) {
      if (to_fill == 0) break;
      const LimitOrder* o = book.find_order(id);
      if (o->side != far_side) continue;
      const Qty q = std::min(to_fill, o->remaining);
      penalty += sign * (ref - static_cast<double>(o->price)) *
                 static_cast<double>(q) / total;
      to_fill -= q;
    }
    if (to_fill > 0) {
      const double worst = worst_trade_price_
                               ? static_cast<double>(*worst_trade_price_)
                               : static_cast<double>(sim_->anchor_price());
      penalty += sign * (ref - worst) * static_cast<double>(to_fill) / total;
    }
    reward += penalty;
    info.terminal_penalty = penalty;
  }

  if (done_ && passive_id_) {
    const LimitOrder* p = book.find_order(*passive_id_);
    if (p && p->resting) book.cancel(*passive_id_);
    passive_id_.reset();
  }

  if (passive_id_) {
    const LimitOrder* p = book.find_order(*passive_id_);
    if (p && p->resting) {
      info.passive_price = p->price;
    } else {
      passive_id_.reset();
    }
  }

  total_reward_ += reward;
  info.exec_vwap_so_far = exec_vwap();
  info.market_vwap_so_far = market_vwap();
  info.participation_so_far = participation();

  StepResult out;
  out.obs = observe();
  out.reward = reward;
  out.done = done_;
  out.info = info;
  return out;
}

int pov_baseline_action(const ExecEnv& env) {
  const ParentOrder& parent = env.parent();
  const EnvConfig& cfg = env.env_config();
  const double dev = env.schedule_deviation();
  if (env.market_volume() > 0 && dev > 0.0) return 0;  // ahead: wait

  const double behind_shares =
      parent.pov_target * static_cast<double>(env.market_volume()) -
      static_cast<double>(env.filled());
  const Qty behind_qty =
      behind_shares > 0.0 ? static_cast<Qty>(behind_shares) : 0;
  const bool large = behind_qty >= cfg.large_child_qty;
  const int size_idx = large ? 1 : 0;

  // Passive child at the touch; add the aggressive child when participation
  // has fallen more than the band below target.
  if (env.market_volume() > 0 && dev < -cfg.pov_band) {
    // End game: a passive child covering the whole remainder caps a combo's
    // aggressive leg to zero, stalling the order at a possibly stale price.
    // Pull the passive first, then take the remainder aggressively.
    if (env.remaining() <= cfg.large_child_qty) {
      return env.passive_resting_qty() > 0 ? 1 : 8 + size_idx;
    }
    return 10 + size_idx;  // passive(offset 0) + aggressive, matching sizes
  }
  return 2 + size_idx;  // passive(offset 0) only
}

}  // namespace execsim
