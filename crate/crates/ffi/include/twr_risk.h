#ifndef TWR_RISK_H
#define TWR_RISK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TwrStatus {
  TWR_STATUS_OK = 0,
  TWR_STATUS_INVALID_INPUT = 1,
  TWR_STATUS_NULL_POINTER = 2,
  TWR_STATUS_DIMENSION_MISMATCH = 3,
  TWR_STATUS_INDEX_OUT_OF_RANGE = 4,
  TWR_STATUS_NOT_INTERIOR = 5,
  TWR_STATUS_INADMISSIBLE = 6,
  TWR_STATUS_BUDGET_EXCEEDED = 7,
  TWR_STATUS_SOLVER = 8,
  TWR_STATUS_PANIC = 9,
} TwrStatus;

typedef enum TwrMeasure {
  TWR_MEASURE_DOWN = 0,
  TWR_MEASURE_DOWN_X = 1,
  TWR_MEASURE_DOWN_FIRST_APPROX = 2,
  TWR_MEASURE_CUR = 3,
  TWR_MEASURE_CUR_X = 4,
  TWR_MEASURE_CUR_FIRST_APPROX = 5,
  TWR_MEASURE_UP_EXPECT = 6,
  TWR_MEASURE_RUNUP_EXPECT = 7,
} TwrMeasure;

typedef enum TwrCertificateKind {
  /**
   * `y > 0` with `Tᵀy = 0`, one entry per row.
   */
  TWR_CERTIFICATE_KIND_POSITIVE_KERNEL = 0,
  /**
   * `θ` with `Tθ >= 0`, one entry per column.
   */
  TWR_CERTIFICATE_KIND_RISK_FREE_DIRECTION = 1,
  TWR_CERTIFICATE_KIND_INCONCLUSIVE = 2,
} TwrCertificateKind;

/**
 * Trade matrix with a number of draws and an enumeration budget.
 */
typedef struct TwrGame TwrGame;

/**
 * One-period market of a bond and risky assets.
 */
typedef struct TwrMarket TwrMarket;

/**
 * Path expectations of the five log series.
 */
typedef struct TwrExpectations {
  double log_twr;
  double up;
  double down;
  double current_drawdown;
  double run_up;
} TwrExpectations;

/**
 * Outcome of the no-risk-free check. `certificate_len` is the full length
 * even when the caller's buffer was shorter.
 */
typedef struct TwrCheck {
  bool holds;
  size_t rank;
  enum TwrCertificateKind kind;
  size_t certificate_len;
} TwrCheck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *twr_last_error_message(void);

/**
 * Creates a game from a row-major `rows x cols` return matrix. `probs` may be
 * NULL for uniform probabilities.
 *
 * # Safety
 * `returns` must hold `rows * cols` doubles, `probs` (if not NULL) `rows`
 * doubles, and `out` must be writable.
 */
enum TwrStatus twr_game_new(const double *returns,
                            size_t rows,
                            size_t cols,
                            const double *probs,
                            size_t draws,
                            struct TwrGame **out);

/**
 * Creates a game from a trade matrix or market JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum TwrStatus twr_game_from_json(const char *json, size_t draws, struct TwrGame **out);

/**
 * # Safety
 * `game` must come from this library and not be used afterwards.
 */
void twr_game_free(struct TwrGame *game);

/**
 * # Safety
 * `game` must be a live handle.
 */
enum TwrStatus twr_game_set_budget(struct TwrGame *game, uint64_t budget);

/**
 * Number of return rows, or 0 for NULL.
 *
 * # Safety
 * `game` must be a live handle or NULL.
 */
size_t twr_game_rows(const struct TwrGame *game);

/**
 * Number of trading systems, or 0 for NULL.
 *
 * # Safety
 * `game` must be a live handle or NULL.
 */
size_t twr_game_cols(const struct TwrGame *game);

/**
 * Value of a measure at `phi`.
 *
 * # Safety
 * `phi` must hold `len` doubles and `out` must be writable.
 */
enum TwrStatus twr_game_evaluate(const struct TwrGame *game,
                                 enum TwrMeasure measure,
                                 const double *phi,
                                 size_t len,
                                 double *out);

/**
 * First approximation or up-side expectation at `s θ` together with the
 * flag telling whether it is exact there. `θ` is normalized internally.
 *
 * # Safety
 * `theta` must hold `len` doubles; `value` and `small_s_regime` must be writable.
 */
enum TwrStatus twr_game_approximation(const struct TwrGame *game,
                                      enum TwrMeasure measure,
                                      double s,
                                      const double *theta,
                                      size_t len,
                                      double *value,
                                      bool *small_s_regime);

/**
 * Expectations of the log series at an interior `phi`.
 *
 * # Safety
 * `phi` must hold `len` doubles and `out` must be writable.
 */
enum TwrStatus twr_game_expectations(const struct TwrGame *game,
                                     const double *phi,
                                     size_t len,
                                     struct TwrExpectations *out);

/**
 * Current-drawdown measure for `K = 1..=k_max`, written to `out[0..k_max]`.
 *
 * # Safety
 * `phi` must hold `len` doubles and `out` must have room for `k_max` doubles.
 */
enum TwrStatus twr_game_converge(const struct TwrGame *game,
                                 const double *phi,
                                 size_t len,
                                 size_t k_max,
                                 double *out);

/**
 * Rank and no-risk-free verdict. Up to `capacity` certificate entries are
 * copied to `certificate`, which may be NULL.
 *
 * # Safety
 * `certificate` must have room for `capacity` doubles and `out` must be writable.
 */
enum TwrStatus twr_game_check_no_risk_free(const struct TwrGame *game,
                                           struct TwrCheck *out,
                                           double *certificate,
                                           size_t capacity);

/**
 * Creates a market. `initial` holds the risky prices, `scenarios` is
 * row-major `scenario_count x assets`, `probs` may be NULL for uniform.
 *
 * # Safety
 * Pointers must hold the stated number of doubles and `out` must be writable.
 */
enum TwrStatus twr_market_new(double rate,
                              const double *initial,
                              size_t assets,
                              const double *scenarios,
                              size_t scenario_count,
                              const double *probs,
                              bool allow_negative_prices,
                              struct TwrMarket **out);

/**
 * # Safety
 * `market` must come from this library and not be used afterwards.
 */
void twr_market_free(struct TwrMarket *market);

/**
 * Game on the market's trade return matrix.
 *
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum TwrStatus twr_market_game(const struct TwrMarket *market, size_t draws, struct TwrGame **out);

/**
 * Arbitrage check. On arbitrage, up to `capacity` entries of the risky
 * holdings `x̂` are copied to `certificate`.
 *
 * # Safety
 * `certificate` must have room for `capacity` doubles; `arbitrage_free` must be writable.
 */
enum TwrStatus twr_market_check_arbitrage(const struct TwrMarket *market,
                                          bool *arbitrage_free,
                                          double *certificate,
                                          size_t capacity);

/**
 * Portion vector of a portfolio `(x_0, x_1, ..., x_M)` including the bond.
 *
 * # Safety
 * `portfolio` must hold `len` doubles and `out` must have room for `len - 1`.
 */
enum TwrStatus twr_market_portions(const struct TwrMarket *market,
                                   const double *portfolio,
                                   size_t len,
                                   double *out);

/**
 * Expected log growth of a unit-cost portfolio over the bond.
 *
 * # Safety
 * `portfolio` must hold `len` doubles and `out` must be writable.
 */
enum TwrStatus twr_market_log_utility(const struct TwrMarket *market,
                                      const double *portfolio,
                                      size_t len,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWR_RISK_H */
