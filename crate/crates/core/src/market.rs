//! One-period financial markets and their translation into trading games.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::linalg;
use crate::trade::{Certificate, PortionVector, TradeMatrix};

/// Allowed deviation of `S0 · x` from 1 for a unit-cost portfolio.
pub const UNIT_COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketOptions {
    /// Accept negative scenario prices. Off by default.
    pub allow_negative_prices: bool,
}

/// A bond with gross return `R` and `M` risky assets observed in `N` scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePeriodMarket {
    rate: f64,
    initial: Vec<f64>,
    scenarios: Vec<f64>,
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

/// Portfolio `x = (x_0, x̂)`; `x_0` is held in the bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio(pub Vec<f64>);

impl Portfolio {
    pub fn bond(&self) -> f64 {
        self.0[0]
    }

    pub fn risky(&self) -> &[f64] {
        &self.0[1..]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArbitrageCheck {
    NoArbitrage,
    /// Risky holdings `x̂` whose excess payoff is nonnegative and nonzero.
    Arbitrage(Vec<f64>),
}

impl ArbitrageCheck {
    pub fn is_arbitrage_free(&self) -> bool {
        matches!(self, ArbitrageCheck::NoArbitrage)
    }
}

impl OnePeriodMarket {
    /// `initial` holds the risky prices only; the bond price is 1.
    pub fn new(
        rate: f64,
        initial: Vec<f64>,
        scenarios: Vec<Vec<f64>>,
        probs: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_options(rate, initial, scenarios, probs, MarketOptions::default())
    }

    pub fn with_options(
        rate: f64,
        initial: Vec<f64>,
        scenarios: Vec<Vec<f64>>,
        probs: Option<Vec<f64>>,
        options: MarketOptions,
    ) -> Result<Self> {
        let rows = scenarios.len();
        let cols = initial.len();
        if rows == 0 || cols == 0 {
            return Err(RiskError::InvalidInput(
                "market needs at least one scenario and one risky asset".into(),
            ));
        }
        if !(rate.is_finite() && rate >= 1.0) {
            return Err(RiskError::InvalidInput(format!(
                "bond gross return must be finite and at least 1, got {rate}"
            )));
        }
        if let Some(bad) = initial.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(RiskError::InvalidInput(format!(
                "initial prices must be positive, got {bad}"
            )));
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for (i, row) in scenarios.iter().enumerate() {
            if row.len() != cols {
                return Err(RiskError::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(RiskError::InvalidInput(format!(
                        "scenario {} has a non-finite price",
                        i + 1
                    )));
                }
                if v < 0.0 && !options.allow_negative_prices {
                    return Err(RiskError::InvalidInput(format!(
                        "scenario {} has negative price {v}",
                        i + 1
                    )));
                }
            }
            flat.extend_from_slice(row);
        }
        let probs = probs.unwrap_or_else(|| vec![1.0 / rows as f64; rows]);
        // Validates the probabilities with the same rules as a trade matrix.
        TradeMatrix::from_flat(vec![0.0; rows], rows, 1, probs.clone())?;
        Ok(Self {
            rate,
            initial,
            scenarios: flat,
            rows,
            cols,
            probs,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Risky initial prices `Ŝ0`.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn scenarios(&self) -> Vec<Vec<f64>> {
        self.scenarios.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn scenario_count(&self) -> usize {
        self.rows
    }

    pub fn asset_count(&self) -> usize {
        self.cols
    }

    /// Full initial price vector `S0 = (1, Ŝ0)`.
    pub fn initial_with_bond(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.initial.iter().cloned()).collect()
    }

    /// Row-major `T̂_S = Ŝ1 - R Ŝ0`.
    pub fn excess_payoffs(&self) -> Vec<f64> {
        self.scenarios
            .iter()
            .enumerate()
            .map(|(k, v)| v - self.rate * self.initial[k % self.cols])
            .collect()
    }

    pub fn excess_payoff_rank(&self) -> usize {
        linalg::rank(&self.excess_payoffs(), self.rows, self.cols)
    }

    /// `t_{i,m} = (S1^m(α_i) - R S0^m) / (R S0^m)`.
    pub fn build_trade_matrix(&self) -> Result<TradeMatrix> {
        let returns = self
            .scenarios
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let base = self.rate * self.initial[k % self.cols];
                (v - base) / base
            })
            .collect();
        TradeMatrix::from_flat(returns, self.rows, self.cols, self.probs.clone())
    }

    /// Initial cost `S0 · x`.
    pub fn cost(&self, x: &Portfolio) -> Result<f64> {
        self.check_portfolio(x)?;
        Ok(linalg::dot(&self.initial_with_bond(), &x.0))
    }

    pub fn is_unit_cost(&self, x: &Portfolio) -> Result<bool> {
        Ok((self.cost(x)? - 1.0).abs() <= UNIT_COST_TOLERANCE)
    }

    /// `φ_m = S0^m x_m`. Only the risky holdings matter.
    pub fn portfolio_to_portions(&self, x: &Portfolio) -> Result<PortionVector> {
        self.check_portfolio(x)?;
        Ok(self.lift(x.risky()))
    }

    /// Portion vector of risky holdings `x̂`.
    pub fn lift(&self, risky: &[f64]) -> PortionVector {
        PortionVector::new(risky.iter().zip(&self.initial).map(|(x, s)| x * s).collect())
    }

    /// Unit-cost portfolio with `x_m = φ_m / S0^m` and `x_0 = 1 - Σ φ_m`.
    pub fn portions_to_portfolio(&self, phi: &PortionVector) -> Result<Portfolio> {
        if phi.len() != self.cols {
            return Err(RiskError::DimensionMismatch {
                expected: self.cols,
                got: phi.len(),
            });
        }
        let bond = 1.0 - phi.as_slice().iter().sum::<f64>();
        Ok(Portfolio(
            std::iter::once(bond)
                .chain(phi.as_slice().iter().zip(&self.initial).map(|(f, s)| f / s))
                .collect(),
        ))
    }

    /// `E[log(S1 · x)] - log R` for a unit-cost portfolio, evaluated through the
    /// portions as `Σ p_i log(1 + ⟨t_i, φ⟩)`.
    pub fn log_utility(&self, x: &Portfolio) -> Result<f64> {
        let phi = self.portfolio_to_portions(x)?;
        self.build_trade_matrix()?.log_gamma(&phi)
    }

    /// Arbitrage check: through the no-risk-free test on `T` when `T̂_S` has full
    /// rank, otherwise by a direct search.
    pub fn check_arbitrage(&self) -> Result<ArbitrageCheck> {
        if self.excess_payoff_rank() < self.cols {
            return Ok(self.search_arbitrage().map_or(ArbitrageCheck::NoArbitrage, ArbitrageCheck::Arbitrage));
        }
        let check = self.build_trade_matrix()?.check_no_risk_free();
        Ok(match check.certificate {
            Certificate::PositiveKernel(_) => ArbitrageCheck::NoArbitrage,
            Certificate::RiskFreeDirection(theta) => ArbitrageCheck::Arbitrage(linalg::normalized(
                theta
                    .iter()
                    .zip(&self.initial)
                    .map(|(t, s)| t / (self.rate * s))
                    .collect(),
            )),
            Certificate::Inconclusive => self
                .search_arbitrage()
                .map_or(ArbitrageCheck::NoArbitrage, ArbitrageCheck::Arbitrage),
        })
    }

    /// Direct search for `x̂` with `T̂_S x̂ >= 0` and `T̂_S x̂ != 0`.
    pub fn search_arbitrage(&self) -> Option<Vec<f64>> {
        linalg::semipositive_image(&self.excess_payoffs(), self.rows, self.cols)
            .map(linalg::normalized)
    }

    /// Nontrivial riskless holdings: `x̂ != 0` with `T̂_S x̂ >= 0`.
    pub fn find_riskless_portfolio(&self) -> Option<Vec<f64>> {
        linalg::nonnegative_image(&self.excess_payoffs(), self.rows, self.cols)
    }

    fn check_portfolio(&self, x: &Portfolio) -> Result<()> {
        if x.0.len() != self.cols + 1 {
            return Err(RiskError::DimensionMismatch {
                expected: self.cols + 1,
                got: x.0.len(),
            });
        }
        Ok(())
    }
}
