//! Exact drawdown risk measures for fractional trading games.
//!
//! A game draws `K` independent rows from a trade return matrix `T`. For a
//! vector of portions `φ` the crate evaluates expected down-trade and
//! current-drawdown log series, their approximations, and the one-period
//! market checks that decide whether the measures are well posed.

pub mod error;
pub mod io;
pub mod linalg;
pub mod market;
pub mod measures;
pub mod paths;
pub mod reference;
pub mod surface;
pub mod trade;
pub mod verify;

pub use error::{Result, RiskError};
pub use market::{ArbitrageCheck, MarketOptions, OnePeriodMarket, Portfolio};
pub use measures::{Approximation, CoefficientKind, CoefficientTable, Game, MeasureKind, PathExpectations};
pub use paths::{CountVector, LogSeries, PathEvaluator, PathOutcome, DEFAULT_BUDGET};
pub use trade::{AdmissibleSet, Certificate, Direction, Membership, NoRiskFreeCheck, PortionVector, TradeMatrix};
