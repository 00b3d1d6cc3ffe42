#include "flow_sim.hpp"

#include <cmath>
#include <string>

namespace execsim {

void FlowConfig::validate() const {
  auto reject = [](const std::string& what) { throw ConfigError("flow." + what); };
  if (!(limit_rate >= 0.0)) reject("limit_rate must be >= 0");
  if (!(market_rate >= 0.0)) reject("market_rate must be >= 0");
  if (!(cancel_rate >= 0.0)) reject("cancel_rate must be >= 0");
  if (!(depth_geom_p > 0.0) || depth_geom_p > 1.0)
    reject("depth_geom_p must be in (0, 1]");
  if (size_dist.empty()) reject("size_dist must be nonempty");
  double total = 0.0;
  for (const SizeBucket& b : size_dist) {
    if (b.size <= 0) reject("size_dist sizes must be > 0");
    if (!(b.prob > 0.0)) reject("size_dist probabilities must be > 0");
    total += b.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) reject("size_dist probabilities must sum to 1");
  if (seed_levels < 0) reject("seed_levels must be >= 0");
  if (init_mid <= seed_levels)
    reject("init_mid must exceed seed_levels so seeded bids stay positive");
  if (seed_levels > 0 && init_depth_qty <= 0)
    reject("init_depth_qty must be > 0 when levels are seeded");
}

MarketSim::MarketSim(FlowConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.validate();
  size_probs_.reserve(config_.size_dist.size());
  for (const SizeBucket& b : config_.size_dist) size_probs_.push_back(b.prob);
  for (int i = 1; i <= config_.seed_levels; ++i) {
    book_.submit_limit(Side::Buy, config_.init_mid - i, config_.init_depth_qty,
                       Owner::Background);
    book_.submit_limit(Side::Sell, config_.init_mid + i, config_.init_depth_qty,
                       Owner::Background);
  }
}

void MarketSim::place_limit(CounterRng& rng) {
  const Side side = rng.coin() ? Side::Buy : Side::Sell;
  const Tick d = static_cast<Tick>(rng.geometric(config_.depth_geom_p));
  const Qty size = config_.size_dist[rng.discrete(size_probs_)].size;
  const auto best = side == Side::Buy ? book_.best_bid() : book_.best_ask();
  const Tick from = best.value_or(anchor_price());
  const Tick price = side == Side::Buy ? from - d : from + d;
  book_.submit_limit(side, std::max<Tick>(price, 1), size, Owner::Background);
}

void MarketSim::do_cancel(CounterRng& rng) {
  const auto ids = book_.resting_ids(Owner::Background);
  if (ids.empty()) return;
  book_.cancel(ids[rng.uniform_below(ids.size())]);
}

void MarketSim::do_market(CounterRng& rng) {
  const Side side = rng.coin() ? Side::Buy : Side::Sell;
  const Qty size = config_.size_dist[rng.discrete(size_probs_)].size;
  book_.submit_market(side, size, Owner::Background);
}

std::vector<BookEvent> MarketSim::step_background() {
  CounterRng rng(derive_key(seed_, 0xF10Du,
                            static_cast<std::uint64_t>(step_index_)));
  const std::size_t first_event = book_.event_log().size();

  const std::int64_t n_limit = rng.poisson(config_.limit_rate);
  const std::int64_t n_market = rng.poisson(config_.market_rate);
  const std::int64_t n_cancel = rng.poisson(config_.cancel_rate);

  for (std::int64_t i = 0; i < n_limit; ++i) place_limit(rng);
  for (std::int64_t i = 0; i < n_cancel; ++i) do_cancel(rng);
  for (std::int64_t i = 0; i < n_market; ++i) do_market(rng);

  ++step_index_;
  const auto& log = book_.event_log();
  return std::vector<BookEvent>(log.begin() + first_event, log.end());
}

}  // namespace execsim
