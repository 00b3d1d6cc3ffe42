#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "common.hpp"

namespace execsim {

struct LimitOrder {
  OrderId id = 0;
  Side side = Side::Buy;
  Tick price = 0;  // 0 for market orders (no limit)
  Qty qty = 0;
  Qty remaining = 0;  // frozen at removal time, so qty - remaining == filled
  Seq ts = 0;
  Owner owner = Owner::Background;
  bool resting = false;
};

struct Trade {
  Tick price = 0;  // always the maker's price
  Qty qty = 0;
  OrderId maker_id = 0;
  OrderId taker_id = 0;
  Seq ts = 0;  // the taker event's sequence number
  Side aggressor_side = Side::Buy;
};

enum class EventKind : std::uint8_t { Limit, Market, Cancel, SelfCancel };

const char* to_string(EventKind k);

struct BookEvent {
  Seq ts = 0;
  EventKind kind = EventKind::Limit;
  Side side = Side::Buy;
  Tick price = 0;
  Qty qty = 0;
  OrderId order_id = 0;
  Owner owner = Owner::Background;
};

struct DepthLevel {
  Tick price = 0;
  Qty qty = 0;
};

struct DepthSnapshot {
  std::vector<DepthLevel> bids;  // best-first (descending price)
  std::vector<DepthLevel> asks;  // best-first (ascending price)
  std::optional<std::int64_t> mid_half_ticks;  // best_bid + best_ask
  std::optional<Tick> spread;
};

// Price-time-priority matching engine. Prices and sizes are integers; there
// is no floating point anywhere on the matching path. A book instance is
// single-threaded; instances are independent.
//
// Sequencing rules:
//  - every accepted submission or effective cancel allocates ts = next_ts++
//  - trades carry the taker's ts; match order is preserved by log order
//  - order ids are 1-based and sequential across both limit and market orders
//
// Matching never crosses two agent-owned orders: when agent aggressive flow
// reaches an agent-owned resting order, that order is removed and reported as
// a SelfCancel event, and matching continues with the next entry.
class LimitOrderBook {
 public:
  struct SubmitResult {
    OrderId id = 0;
    std::vector<Trade> trades;
  };

  // Crosses the opposite side in price-then-ts priority; any remainder rests.
  SubmitResult submit_limit(Side side, Tick price, Qty qty, Owner owner);

  // Walks the opposite side best-first; the unfilled remainder is cancelled
  // (immediate-or-cancel), it never rests.
  SubmitResult submit_market(Side side, Qty qty, Owner owner);

  // Removes a resting order. Returns the cancelled remaining quantity, or 0
  // if the id is unknown or no longer resting (idempotent).
  Qty cancel(OrderId id);

  // Up to k best levels per side with aggregated quantities. k >= 1.
  DepthSnapshot depth(int k) const;

  std::optional<Tick> best_bid() const;
  std::optional<Tick> best_ask() const;

  const std::vector<Trade>& trade_log() const { return trades_; }
  const std::vector<BookEvent>& event_log() const { return events_; }

  // Registry lookup over all orders ever accepted (including removed ones).
  const LimitOrder* find_order(OrderId id) const;

  std::size_t order_count() const { return orders_.size(); }

  // Resting orders in deterministic book order: bids best-first then asks
  // best-first, FIFO within a level.
  std::vector<OrderId> resting_ids(std::optional<Owner> owner = std::nullopt) const;

  Qty resting_qty(Side side) const;

  // One JSON object per accepted event:
  // {"ts":..,"kind":..,"side":..,"price":..,"qty":..,"order_id":..,"owner":..}
  void export_events_jsonl(std::ostream& out) const;

  // CSV: ts,price,qty,aggressor_side,maker_owner,taker_owner
  void export_trades_csv(std::ostream& out) const;

 private:
  using BidMap = std::map<Tick, std::deque<OrderId>, std::greater<Tick>>;
  using AskMap = std::map<Tick, std::deque<OrderId>>;

  LimitOrder& order_ref(OrderId id) { return orders_[id - 1]; }
  const LimitOrder& order_ref(OrderId id) const { return orders_[id - 1]; }

  // Matches `taker` against the opposite side while `marketable` holds.
  void match(LimitOrder& taker, std::vector<Trade>& out);
  template <typename LevelMap>
  void match_against(LevelMap& levels, LimitOrder& taker, std::vector<Trade>& out);

  void rest_order(LimitOrder& order);

  BidMap bids_;
  AskMap asks_;
  std::vector<LimitOrder> orders_;  // registry, id - 1 indexed
  std::vector<Trade> trades_;
  std::vector<BookEvent> events_;
  Seq next_ts_ = 1;
};

}  // namespace execsim
