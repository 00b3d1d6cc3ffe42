// Zero-intelligence background order flow. Each step draws Poisson event
// counts and feeds the matching engine; everything downstream of the seed is
// deterministic, so simulations replay exactly.
#pragma once

#include <cstdint>
#include <vector>

#include "common.hpp"
#include "order_book.hpp"
#include "rng.hpp"

namespace execsim {

struct SizeBucket {
  Qty size = 0;
  double prob = 0.0;
};

struct FlowConfig {
  double limit_rate = 6.0;    // expected limit arrivals per step
  double market_rate = 1.5;   // expected market arrivals per step
  double cancel_rate = 2.5;   // expected cancel events per step
  double depth_geom_p = 0.45; // geometric placement parameter, offset 0 joins best
  std::vector<SizeBucket> size_dist = {
      {25, 0.35}, {50, 0.30}, {100, 0.25}, {200, 0.10}};
  Tick init_mid = 1000;
  Qty init_depth_qty = 250;  // shares per seeded level
  int seed_levels = 5;       // seeded levels per side

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Book plus the stochastic flow driving it. Evolution is a pure function of
// (config, seed, agent inputs): the RNG is re-keyed from (seed, step_index)
// every step, so identical histories replay bit-identically.
//
// Flow rules per step, in order:
//   1. limit arrivals: side by fair coin (true = buy), placement offset
//      d ~ geometric(depth_geom_p) ticks behind the same-side best (d = 0
//      joins the best level, never improving the spread), size from
//      size_dist. An empty side re-anchors to the last trade price (init_mid
//      before any trade); re-anchored orders may cross and then simply match.
//   2. cancel arrivals: each removes one uniformly chosen resting background
//      order; agent orders are never touched. Skipped while none rest.
//   3. market arrivals: side by fair coin, size from size_dist, hitting the
//      opposite side (immediate-or-cancel).
//
// Liquidity consumed by anyone — including the agent — comes back only
// through these arrivals, so aggressive trading moves the mid until flow
// refills the book: the market-impact mechanism.
class MarketSim {
 public:
  MarketSim(FlowConfig config, std::uint64_t seed);

  // Runs one background step; returns the book events it generated.
  std::vector<BookEvent> step_background();

  LimitOrderBook& book() { return book_; }
  const LimitOrderBook& book() const { return book_; }
  const FlowConfig& config() const { return config_; }
  int step_index() const { return step_index_; }

  // Last trade price, or init_mid before any trade: the placement anchor for
  // empty sides and the fallback reference when the mid is absent.
  Tick anchor_price() const {
    return book_.trade_log().empty() ? config_.init_mid
                                     : book_.trade_log().back().price;
  }

 private:
  void place_limit(CounterRng& rng);
  void do_cancel(CounterRng& rng);
  void do_market(CounterRng& rng);

  FlowConfig config_;
  std::uint64_t seed_ = 0;
  LimitOrderBook book_;
  std::vector<double> size_probs_;
  int step_index_ = 0;
};

}  // namespace execsim
