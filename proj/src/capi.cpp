#include "execsim/execsim.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/cerl.hpp"
#include "core/common.hpp"
#include "core/config.hpp"
#include "core/experiment.hpp"
#include "core/order_book.hpp"
#include "core/utility.hpp"

namespace {

thread_local std::string g_last_error;

exs_status fail(exs_status code, const char* what) {
  g_last_error = what ? what : "";
  return code;
}

// Runs `fn` and maps thrown exceptions onto status codes. Exceptions never
// cross the C boundary.
template <typename Fn>
exs_status wrap(Fn&& fn) {
  try {
    return fn();
  } catch (const execsim::ConfigError& e) {
    return fail(EXS_ERR_CONFIG, e.what());
  } catch (const execsim::UnsupportedError& e) {
    return fail(EXS_ERR_UNSUPPORTED, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(EXS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(EXS_ERR_DOMAIN, e.what());
  } catch (const std::logic_error& e) {
    return fail(EXS_ERR_INVALID_STATE, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(EXS_ERR_IO, e.what());
  } catch (const std::bad_alloc& e) {
    return fail(EXS_ERR_RUNTIME, e.what());
  } catch (const std::exception& e) {
    return fail(EXS_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(EXS_ERR_RUNTIME, "unknown error");
  }
}

execsim::Side to_side(int32_t side) {
  if (side != 0 && side != 1) throw std::invalid_argument("side must be 0 or 1");
  return side == 0 ? execsim::Side::Buy : execsim::Side::Sell;
}

execsim::Owner to_owner(int32_t owner) {
  if (owner != 0 && owner != 1)
    throw std::invalid_argument("owner must be 0 or 1");
  return owner == 0 ? execsim::Owner::Background : execsim::Owner::Agent;
}

execsim::UtilityFn to_utility(int32_t kind, double param) {
  switch (kind) {
    case EXS_UTILITY_IDENTITY:
      return execsim::UtilityFn::identity();
    case EXS_UTILITY_EXPONENTIAL:
      return execsim::UtilityFn::exponential(param);
    case EXS_UTILITY_POWER:
      return execsim::UtilityFn::power(param);
    default:
      throw std::invalid_argument("utility_kind must be 0, 1, or 2");
  }
}

execsim::RunOptions to_options(const char* out_dir, int32_t workers,
                               int32_t resume) {
  execsim::RunOptions opt;
  if (out_dir) opt.out_dir = out_dir;
  opt.workers = workers >= 1 ? workers : 1;
  opt.resume = resume != 0;
  return opt;
}

template <typename T>
T* require(T* arg, const char* what) {
  if (!arg) throw std::invalid_argument(std::string(what) + " must not be NULL");
  return arg;
}

void copy_trades(const std::vector<execsim::Trade>& trades, exs_trade* out,
                 size_t cap, size_t* n_out) {
  if (n_out) *n_out = trades.size();
  if (!out) return;
  const size_t n = std::min(cap, trades.size());
  for (size_t i = 0; i < n; ++i) {
    const execsim::Trade& t = trades[i];
    out[i] = {t.price, t.qty, t.maker_id, t.taker_id, t.ts,
              t.aggressor_side == execsim::Side::Buy ? 0 : 1};
  }
}

}  // namespace

extern "C" {

struct exs_book {
  execsim::LimitOrderBook impl;
};

const char* exs_version(void) { return "0.1.0"; }

const char* exs_last_error(void) { return g_last_error.c_str(); }

exs_status exs_book_create(exs_book** out) {
  return wrap([&]() -> exs_status {
    if (!out) throw std::invalid_argument("out must not be NULL");
    *out = new exs_book{};
    return EXS_OK;
  });
}

void exs_book_destroy(exs_book* book) { delete book; }

exs_status exs_book_submit_limit(exs_book* book, int32_t side, int64_t price,
                                 int64_t qty, int32_t owner, uint64_t* out_id,
                                 exs_trade* trades, size_t trades_cap,
                                 size_t* n_trades) {
  return wrap([&]() -> exs_status {
    if (!book) throw std::invalid_argument("book must not be NULL");
    auto result =
        book->impl.submit_limit(to_side(side), price, qty, to_owner(owner));
    if (out_id) *out_id = result.id;
    copy_trades(result.trades, trades, trades_cap, n_trades);
    return EXS_OK;
  });
}

exs_status exs_book_submit_market(exs_book* book, int32_t side, int64_t qty,
                                  int32_t owner, uint64_t* out_id,
                                  exs_trade* trades, size_t trades_cap,
                                  size_t* n_trades) {
  return wrap([&]() -> exs_status {
    if (!book) throw std::invalid_argument("book must not be NULL");
    auto result = book->impl.submit_market(to_side(side), qty, to_owner(owner));
    if (out_id) *out_id = result.id;
    copy_trades(result.trades, trades, trades_cap, n_trades);
    return EXS_OK;
  });
}

exs_status exs_book_cancel(exs_book* book, uint64_t order_id,
                           int64_t* out_remaining) {
  return wrap([&]() -> exs_status {
    if (!book) throw std::invalid_argument("book must not be NULL");
    const execsim::Qty remaining = book->impl.cancel(order_id);
    if (out_remaining) *out_remaining = remaining;
    return EXS_OK;
  });
}

exs_status exs_book_depth(const exs_book* book, int32_t k, exs_level* bids,
                          size_t* n_bids, exs_level* asks, size_t* n_asks) {
  return wrap([&]() -> exs_status {
    if (!book) throw std::invalid_argument("book must not be NULL");
    const execsim::DepthSnapshot snap = book->impl.depth(k);
    auto emit = [](const std::vector<execsim::DepthLevel>& levels,
                   exs_level* out, size_t* n_out) {
      if (n_out) *n_out = levels.size();
      if (!out) return;
      for (size_t i = 0; i < levels.size(); ++i)
        out[i] = {levels[i].price, levels[i].qty};
    };
    emit(snap.bids, bids, n_bids);
    emit(snap.asks, asks, n_asks);
    return EXS_OK;
  });
}

exs_status exs_book_best(const exs_book* book, int64_t* out_bid,
                         int32_t* out_has_bid, int64_t* out_ask,
                         int32_t* out_has_ask) {
  return wrap([&]() -> exs_status {
    if (!book) throw std::invalid_argument("book must not be NULL");
    const auto bid = book->impl.best_bid();
    const auto ask = book->impl.best_ask();
    if (out_bid) *out_bid = bid.value_or(0);
    if (out_has_bid) *out_has_bid = bid.has_value() ? 1 : 0;
    if (out_ask) *out_ask = ask.value_or(0);
    if (out_has_ask) *out_has_ask = ask.has_value() ? 1 : 0;
    return EXS_OK;
  });
}

exs_status exs_ce(int32_t utility_kind, double param, const double* values,
                  const double* probs, size_t n, double* out_ce) {
  return wrap([&]() -> exs_status {
    require(values, "values");
    require(out_ce, "out_ce");
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    const execsim::UtilityFn u = to_utility(utility_kind, param);
    execsim::OutcomeDist dist;
    dist.reserve(n);
    const double w = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      dist.push_back({values[i], probs ? probs[i] : w});
    }
    *out_ce = execsim::ce(dist, u);
    return EXS_OK;
  });
}

exs_status exs_delayed_reward_ce(int32_t utility_kind, double param,
                                 double mean_reward, double variance_per_step,
                                 int32_t delay_steps, double* out_ce) {
  return wrap([&]() -> exs_status {
    require(out_ce, "out_ce");
    const execsim::UtilityFn u = to_utility(utility_kind, param);
    *out_ce = execsim::delayed_reward_ce(mean_reward, variance_per_step,
                                         delay_steps, u);
    return EXS_OK;
  });
}

exs_status exs_cmd_simulate(const char* config_path, const char* out_dir) {
  return wrap([&]() -> exs_status {
    execsim::run_simulate(execsim::load_config(require(config_path, "config_path")),
                          to_options(out_dir, 1, 0));
    return EXS_OK;
  });
}

exs_status exs_cmd_train_local(const char* config_path, const char* out_dir) {
  return wrap([&]() -> exs_status {
    execsim::run_train_local(
        execsim::load_config(require(config_path, "config_path")),
        to_options(out_dir, 1, 0));
    return EXS_OK;
  });
}

exs_status exs_cmd_search_meta(const char* config_path, const char* out_dir,
                               int32_t workers, int32_t resume) {
  return wrap([&]() -> exs_status {
    execsim::run_search_meta(
        execsim::load_config(require(config_path, "config_path")),
        to_options(out_dir, workers, resume));
    return EXS_OK;
  });
}

exs_status exs_cmd_evaluate(const char* config_path, const char* out_dir) {
  return wrap([&]() -> exs_status {
    execsim::run_evaluate(execsim::load_config(require(config_path, "config_path")),
                          to_options(out_dir, 1, 0));
    return EXS_OK;
  });
}

exs_status exs_cmd_pipeline(const char* config_path, const char* out_dir,
                            int32_t workers, int32_t resume) {
  return wrap([&]() -> exs_status {
    execsim::run_pipeline(
        execsim::load_config(require(config_path, "config_path")),
        to_options(out_dir, workers, resume));
    return EXS_OK;
  });
}

exs_status exs_cmd_replay(const char* trace_path, const char* out_csv_path) {
  return wrap([&]() -> exs_status {
    execsim::replay_trace(require(trace_path, "trace_path"),
                          require(out_csv_path, "out_csv_path"));
    return EXS_OK;
  });
}

}  // extern "C"
