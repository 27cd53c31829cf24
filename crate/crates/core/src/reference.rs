//! Small reference games used by tests, the CLI and the verification suites.

use crate::market::{MarketOptions, OnePeriodMarket};
use crate::trade::TradeMatrix;

/// Two independent betting systems with equal expectation 1/4.
pub fn example_t() -> TradeMatrix {
    TradeMatrix::new(
        vec![
            vec![1.0, 1.0],
            vec![-0.5, 1.0],
            vec![1.0, -2.0],
            vec![-0.5, -2.0],
        ],
        Some(vec![0.375, 0.375, 0.125, 0.125]),
    )
    .expect("reference matrix is valid")
}

/// Three rows where only the last one loses near the diagonal, so the
/// single-draw down-trade measure is flat along `(1, -1)`.
pub fn flat_counterexample() -> TradeMatrix {
    TradeMatrix::new(
        vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![-1.0, -1.0]],
        None,
    )
    .expect("reference matrix is valid")
}

/// Direction along which [`flat_counterexample`] is flat near `α (1, 1)`.
pub const FLAT_DIRECTION: [f64; 2] = [1.0, -1.0];

/// One-period market with `R = 1` and unit initial prices whose trade
/// matrix is exactly [`example_t`]. The second asset needs a negative
/// price in the last two scenarios.
pub fn example_t_market() -> OnePeriodMarket {
    OnePeriodMarket::with_options(
        1.0,
        vec![1.0, 1.0],
        vec![
            vec![2.0, 2.0],
            vec![0.5, 2.0],
            vec![2.0, -1.0],
            vec![0.5, -1.0],
        ],
        Some(vec![0.375, 0.375, 0.125, 0.125]),
        MarketOptions {
            allow_negative_prices: true,
        },
    )
    .expect("reference market is valid")
}
