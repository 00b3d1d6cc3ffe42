/* execsim — C interface to the execution simulator.
 *
 * All functions are thread-compatible: handles must not be shared between
 * threads without external synchronization, but distinct handles are
 * independent. Functions return an exs_status; on failure the thread-local
 * message from exs_last_error() describes what went wrong.
 */
#ifndef EXECSIM_H
#define EXECSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum exs_status {
  EXS_OK = 0,
  EXS_ERR_INVALID_ARGUMENT = 1,
  EXS_ERR_INVALID_STATE = 2,
  EXS_ERR_DOMAIN = 3,
  EXS_ERR_CONFIG = 4,
  EXS_ERR_IO = 5,
  EXS_ERR_RUNTIME = 6,
  EXS_ERR_UNSUPPORTED = 7
} exs_status;

/* Library version, e.g. "0.1.0". Static storage; do not free. */
const char* exs_version(void);

/* Message from the most recent failing call on this thread, or "" if none.
 * Valid until the next failing call on the same thread. */
const char* exs_last_error(void);

/* ---- order book -------------------------------------------------------- */

typedef struct exs_book exs_book; /* opaque */

typedef struct exs_trade {
  int64_t price;
  int64_t qty;
  uint64_t maker_id;
  uint64_t taker_id;
  uint64_t ts;
  int32_t aggressor_side; /* 0 = buy, 1 = sell */
} exs_trade;

typedef struct exs_level {
  int64_t price;
  int64_t qty;
} exs_level;

exs_status exs_book_create(exs_book** out);
void exs_book_destroy(exs_book* book);

/* side: 0 = buy, 1 = sell. owner: 0 = background, 1 = agent.
 * Any output pointer may be NULL if the caller does not need it. Trades are
 * copied into `trades` (up to trades_cap); *n_trades reports how many the
 * submission produced in total. */
exs_status exs_book_submit_limit(exs_book* book, int32_t side, int64_t price,
                                 int64_t qty, int32_t owner, uint64_t* out_id,
                                 exs_trade* trades, size_t trades_cap,
                                 size_t* n_trades);
exs_status exs_book_submit_market(exs_book* book, int32_t side, int64_t qty,
                                  int32_t owner, uint64_t* out_id,
                                  exs_trade* trades, size_t trades_cap,
                                  size_t* n_trades);

/* Cancels a resting order; *out_remaining gets the cancelled quantity, or 0
 * if the id is unknown or no longer resting. */
exs_status exs_book_cancel(exs_book* book, uint64_t order_id,
                           int64_t* out_remaining);

/* Up to k levels per side, best-first. *n_bids / *n_asks get the number of
 * levels written. Empty sides write zero levels. */
exs_status exs_book_depth(const exs_book* book, int32_t k, exs_level* bids,
                          size_t* n_bids, exs_level* asks, size_t* n_asks);

/* Best prices; *out_has_{bid,ask} are 0/1 flags for side presence. */
exs_status exs_book_best(const exs_book* book, int64_t* out_bid,
                         int32_t* out_has_bid, int64_t* out_ask,
                         int32_t* out_has_ask);

/* ---- certainty equivalents --------------------------------------------- */

/* utility kinds for exs_ce / exs_delayed_reward_ce */
typedef enum exs_utility_kind {
  EXS_UTILITY_IDENTITY = 0,
  EXS_UTILITY_EXPONENTIAL = 1, /* param = lambda > 0 */
  EXS_UTILITY_POWER = 2        /* param = eta in (0, 1] */
} exs_utility_kind;

/* Certainty equivalent of a discrete outcome distribution. `probs` may be
 * NULL for equal weights; otherwise it must be positive and sum to 1. */
exs_status exs_ce(int32_t utility_kind, double param, const double* values,
                  const double* probs, size_t n, double* out_ce);

/* CE of one reward with mean `mean_reward` and variance
 * `variance_per_step × delay_steps`, i.e. the certainty equivalent of a
 * payment whose uncertainty grows with how long it is delayed. */
exs_status exs_delayed_reward_ce(int32_t utility_kind, double param,
                                 double mean_reward, double variance_per_step,
                                 int32_t delay_steps, double* out_ce);

/* ---- experiment commands ------------------------------------------------ */

/* Each command reads a JSON config from `config_path` and writes its
 * artifacts under the config's output directory, or under `out_dir` when
 * that is non-NULL and nonempty. Failures return EXS_ERR_CONFIG for config
 * problems and another status for runtime problems; exs_last_error() has
 * the message either way. */
exs_status exs_cmd_simulate(const char* config_path, const char* out_dir);
exs_status exs_cmd_train_local(const char* config_path, const char* out_dir);
exs_status exs_cmd_search_meta(const char* config_path, const char* out_dir,
                               int32_t workers, int32_t resume);
exs_status exs_cmd_evaluate(const char* config_path, const char* out_dir);
exs_status exs_cmd_pipeline(const char* config_path, const char* out_dir,
                            int32_t workers, int32_t resume);

/* Renders an evaluation trace (traces/trace_<seed>.csv) into plot-ready
 * series at `out_csv_path`. */
exs_status exs_cmd_replay(const char* trace_path, const char* out_csv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EXECSIM_H */
