// Brute-force O(n²) order-book oracle used only by tests. It shares nothing
// with the production matching engine beyond the primitive domain types: every
// rule (price-time priority, IOC market remainder, self-match handling, ts and
// id allocation) is re-derived here from the documented contract, with linear
// scans instead of price-indexed structures.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/common.hpp"

namespace reftest {

using execsim::Owner;
using execsim::Qty;
using execsim::Side;
using execsim::Tick;

struct RefOrder {
  std::uint64_t id = 0;
  Side side = Side::Buy;
  Tick price = 0;  // 0 for market orders
  Qty qty = 0;
  Qty remaining = 0;
  std::uint64_t ts = 0;
  Owner owner = Owner::Background;
  bool active = false;  // true while resting
};

struct RefTrade {
  Tick price = 0;
  Qty qty = 0;
  std::uint64_t maker_id = 0;
  std::uint64_t taker_id = 0;
  std::uint64_t ts = 0;
  Side aggressor_side = Side::Buy;
};

// kind strings mirror the engine's event-log vocabulary
struct RefEvent {
  std::uint64_t ts = 0;
  int kind = 0;  // 0 limit, 1 market, 2 cancel, 3 self_cancel
  Side side = Side::Buy;
  Tick price = 0;
  Qty qty = 0;
  std::uint64_t order_id = 0;
  Owner owner = Owner::Background;
};

class RefBook {
 public:
  std::uint64_t submit_limit(Side side, Tick price, Qty qty, Owner owner) {
    const std::uint64_t id = orders_.size() + 1;
    orders_.push_back({id, side, price, qty, qty, next_ts_++, owner, false});
    events_.push_back({orders_.back().ts, 0, side, price, qty, id, owner});
    match(orders_.back());
    if (orders_.back().remaining > 0) orders_.back().active = true;
    return id;
  }

  std::uint64_t submit_market(Side side, Qty qty, Owner owner) {
    const std::uint64_t id = orders_.size() + 1;
    orders_.push_back({id, side, 0, qty, qty, next_ts_++, owner, false});
    events_.push_back({orders_.back().ts, 1, side, 0, qty, id, owner});
    match(orders_.back());  // IOC: remainder simply never becomes active
    return id;
  }

  Qty cancel(std::uint64_t id) {
    if (id == 0 || id > orders_.size()) return 0;
    RefOrder& o = orders_[id - 1];
    if (!o.active) return 0;
    o.active = false;
    events_.push_back({next_ts_++, 2, o.side, o.price, o.remaining, id, o.owner});
    return o.remaining;
  }

  const std::vector<RefOrder>& orders() const { return orders_; }
  const std::vector<RefTrade>& trades() const { return trades_; }
  const std::vector<RefEvent>& events() const { return events_; }

  std::optional<Tick> best_price(Side side) const {
    std::optional<Tick> best;
    for (const RefOrder& o : orders_) {
      if (!o.active || o.side != side) continue;
      if (!best || (side == Side::Buy ? o.price > *best : o.price < *best))
        best = o.price;
    }
    return best;
  }

  // Active orders in book order: bids best-price-first then asks, ts order
  // within a price (insertion order equals ts order here).
  std::vector<std::uint64_t> resting_ids() const {
    std::vector<std::uint64_t> ids;
    for (const RefOrder& o : orders_)
      if (o.active) ids.push_back(o.id);
    std::sort(ids.begin(), ids.end(), [&](std::uint64_t a, std::uint64_t b) {
      const RefOrder& x = orders_[a - 1];
      const RefOrder& y = orders_[b - 1];
      if (x.side != y.side) return x.side == Side::Buy;
      if (x.price != y.price)
        return x.side == Side::Buy ? x.price > y.price : x.price < y.price;
      return x.ts < y.ts;
    });
    return ids;
  }

 private:
  // Scans every active opposite order for the current best maker: best price
  // first, earliest ts within a price.
  RefOrder* best_maker(Side taker_side) {
    RefOrder* best = nullptr;
    for (RefOrder& o : orders_) {
      if (!o.active || o.side == taker_side) continue;
      if (!best) {
        best = &o;
        continue;
      }
      const bool better =
          taker_side == Side::Buy ? o.price < best->price : o.price > best->price;
      if (better || (o.price == best->price && o.ts < best->ts)) best = &o;
    }
    return best;
  }

  void match(RefOrder& taker) {
    while (taker.remaining > 0) {
      RefOrder* maker = best_maker(taker.side);
      if (!maker) break;
      if (taker.price != 0) {
        const bool marketable = taker.side == Side::Buy
                                    ? maker->price <= taker.price
                                    : maker->price >= taker.price;
        if (!marketable) break;
      }
      if (taker.owner == Owner::Agent && maker->owner == Owner::Agent) {
        maker->active = false;
        events_.push_back({taker.ts, 3, maker->side, maker->price,
                           maker->remaining, maker->id, maker->owner});
        continue;
      }
      const Qty q = std::min(taker.remaining, maker->remaining);
      trades_.push_back(
          {maker->price, q, maker->id, taker.id, taker.ts, taker.side});
      maker->remaining -= q;
      taker.remaining -= q;
      if (maker->remaining == 0) maker->active = false;
    }
  }

  std::vector<RefOrder> orders_;
  std::vector<RefTrade> trades_;
  std::vector<RefEvent> events_;
  std::uint64_t next_ts_ = 1;
};

}  // namespace reftest
