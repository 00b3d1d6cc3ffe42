#include "order_book.hpp"

#include <algorithm>

namespace execsim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Limit: return "limit";
    case EventKind::Market: return "market";
    case EventKind::Cancel: return "cancel";
    case EventKind::SelfCancel: return "self_cancel";
  }
  return "?";
}

template <typename LevelMap>
void LimitOrderBook::match_against(LevelMap& levels, LimitOrder& taker,
                                   std::vector<Trade>& out) {
  while (taker.remaining > 0 && !levels.empty()) {
    auto level_it = levels.begin();
    const Tick level_price = level_it->first;
    if (taker.price != 0) {  // limit order: stop when no longer marketable
      if (taker.side == Side::Buy ? level_price > taker.price
                                  : level_price < taker.price)
        break;
    }
    auto& queue = level_it->second;
    LimitOrder& maker = order_ref(queue.front());
    if (taker.owner == Owner::Agent && maker.owner == Owner::Agent) {
      // Never cross own orders: drop the resting one and keep matching.
      queue.pop_front();
      maker.resting = false;
      events_.push_back({taker.ts, EventKind::SelfCancel, maker.side, maker.price,
                         maker.remaining, maker.id, maker.owner});
      if (queue.empty()) levels.erase(level_it);
      continue;
    }
    const Qty q = std::min(taker.remaining, maker.remaining);
    out.push_back({level_price, q, maker.id, taker.id, taker.ts, taker.side});
    maker.remaining -= q;
    taker.remaining -= q;
    if (maker.remaining == 0) {
      queue.pop_front();
      maker.resting = false;
      if (queue.empty()) levels.erase(level_it);
    }
  }
}

void LimitOrderBook::match(LimitOrder& taker, std::vector<Trade>& out) {
  if (taker.side == Side::Buy)
    match_against(asks_, taker, out);
  else
    match_against(bids_, taker, out);
  trades_.insert(trades_.end(), out.begin(), out.end());
}

void LimitOrderBook::rest_order(LimitOrder& order) {
  order.resting = true;
  if (order.side == Side::Buy)
    bids_[order.price].push_back(order.id);
  else
    asks_[order.price].push_back(order.id);
}

LimitOrderBook::SubmitResult LimitOrderBook::submit_limit(Side side, Tick price,
                                                          Qty qty, Owner owner) {
  if (price <= 0) throw std::invalid_argument("submit_limit: price must be > 0");
  if (qty <= 0) throw std::invalid_argument("submit_limit: qty must be > 0");
  const OrderId id = static_cast<OrderId>(orders_.size()) + 1;
  orders_.push_back({id, side, price, qty, qty, next_ts_++, owner, false});
  LimitOrder& order = orders_.back();
  events_.push_back({order.ts, EventKind::Limit, side, price, qty, id, owner});

  SubmitResult result{id, {}};
  match(order, result.trades);
  if (order.remaining > 0) rest_order(order);
  return result;
}

LimitOrderBook::SubmitResult LimitOrderBook::submit_market(Side side, Qty qty,
                                                           Owner owner) {
  if (qty <= 0) throw std::invalid_argument("submit_market: qty must be > 0");
  const OrderId id = static_cast<OrderId>(orders_.size()) + 1;
  orders_.push_back({id, side, 0, qty, qty, next_ts_++, owner, false});
  LimitOrder& order = orders_.back();
  events_.push_back({order.ts, EventKind::Market, side, 0, qty, id, owner});

  SubmitResult result{id, {}};
  match(order, result.trades);
  // IOC: whatever did not fill is dropped; `remaining` stays as the unfilled
  // amount so qty - remaining still equals the traded volume.
  return result;
}

Qty LimitOrderBook::cancel(OrderId id) {
  if (id == 0 || id > orders_.size()) return 0;
  LimitOrder& order = order_ref(id);
  if (!order.resting) return 0;
  auto remove_from = [&](auto& levels) {
    auto it = levels.find(order.price);
    auto& queue = it->second;
    queue.erase(std::find(queue.begin(), queue.end(), id));
    if (queue.empty()) levels.erase(it);
  };
  if (order.side == Side::Buy)
    remove_from(bids_);
  else
    remove_from(asks_);
  order.resting = false;
  events_.push_back({next_ts_++, EventKind::Cancel, order.side, order.price,
                     order.remaining, id, order.owner});
  return order.remaining;
}

DepthSnapshot LimitOrderBook::depth(int k) const {
  if (k < 1) throw std::invalid_argument("depth: k must be >= 1");
  DepthSnapshot snap;
  auto fill = [&](const auto& levels, std::vector<DepthLevel>& out) {
    for (const auto& [price, queue] : levels) {
      if (static_cast<int>(out.size()) == k) break;
      Qty total = 0;
      for (OrderId id : queue) total += order_ref(id).remaining;
      out.push_back({price, total});
    }
  };
  fill(bids_, snap.bids);
  fill(asks_, snap.asks);
  if (!snap.bids.empty() && !snap.asks.empty()) {
    snap.mid_half_ticks = snap.bids[0].price + snap.asks[0].price;
    snap.spread = snap.asks[0].price - snap.bids[0].price;
  }
  return snap;
}

std::optional<Tick> LimitOrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Tick> LimitOrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

const LimitOrder* LimitOrderBook::find_order(OrderId id) const {
  if (id == 0 || id > orders_.size()) return nullptr;
  return &order_ref(id);
}

std::vector<OrderId> LimitOrderBook::resting_ids(std::optional<Owner> owner) const {
  std::vector<OrderId> ids;
  auto collect = [&](const auto& levels) {
    for (const auto& [price, queue] : levels)
      for (OrderId id : queue)
        if (!owner || order_ref(id).owner == *owner) ids.push_back(id);
  };
  collect(bids_);
  collect(asks_);
  return ids;
}

Qty LimitOrderBook::resting_qty(Side side) const {
  Qty total = 0;
  auto sum = [&](const auto& levels) {
    for (const auto& [price, queue] : levels)
      for (OrderId id : queue) total += order_ref(id).remaining;
  };
  if (side == Side::Buy)
    sum(bids_);
  else
    sum(asks_);
  return total;
}

void LimitOrderBook::export_events_jsonl(std::ostream& out) const {
  for (const BookEvent& e : events_) {
    out << "{\"ts\":" << e.ts << ",\"kind\":\"" << to_string(e.kind)
        << "\",\"side\":\"" << to_string(e.side) << "\",\"price\":" << e.price
        << ",\"qty\":" << e.qty << ",\"order_id\":" << e.order_id
        << ",\"owner\":\"" << to_string(e.owner) << "\"}\n";
  }
}

void LimitOrderBook::export_trades_csv(std::ostream& out) const {
  out << "ts,price,qty,aggressor_side,maker_owner,taker_owner\n";
  for (const Trade& t : trades_) {
    out << t.ts << ',' << t.price << ',' << t.qty << ','
        << to_string(t.aggressor_side) << ','
        << to_string(order_ref(t.maker_id).owner) << ','
        << to_string(order_ref(t.taker_id).owner) << '\n';
  }
}

}  // namespace execsim
