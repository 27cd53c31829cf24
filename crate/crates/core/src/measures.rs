//! Drawdown risk measures of a trading game and their approximations.
//!
//! Down-trade quantities are sums over count vectors; current-drawdown
//! quantities need ordered paths because the topping point depends on order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::linalg;
use crate::paths::{self, count_weighted_sum, first_topping_point, for_each_path, LinearEquity, DEFAULT_BUDGET};
use crate::trade::{Direction, Membership, PortionVector, TradeMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "down")]
    Down,
    #[serde(rename = "downX")]
    DownX,
    #[serde(rename = "downFirstApprox")]
    DownFirstApprox,
    #[serde(rename = "cur")]
    Cur,
    #[serde(rename = "curX")]
    CurX,
    #[serde(rename = "curFirstApprox")]
    CurFirstApprox,
    #[serde(rename = "upExpect")]
    UpExpect,
    #[serde(rename = "runupExpect")]
    RunupExpect,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 8] = [
        MeasureKind::Down,
        MeasureKind::DownX,
        MeasureKind::DownFirstApprox,
        MeasureKind::Cur,
        MeasureKind::CurX,
        MeasureKind::CurFirstApprox,
        MeasureKind::UpExpect,
        MeasureKind::RunupExpect,
    ];

    /// The four convex risk measures.
    pub const RISK_MEASURES: [MeasureKind; 4] = [
        MeasureKind::Down,
        MeasureKind::DownX,
        MeasureKind::Cur,
        MeasureKind::CurX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Down => "down",
            MeasureKind::DownX => "downX",
            MeasureKind::DownFirstApprox => "downFirstApprox",
            MeasureKind::Cur => "cur",
            MeasureKind::CurX => "curX",
            MeasureKind::CurFirstApprox => "curFirstApprox",
            MeasureKind::UpExpect => "upExpect",
            MeasureKind::RunupExpect => "runupExpect",
        }
    }

    /// First approximations are nonpositive; everything else is nonnegative.
    pub fn is_nonpositive(self) -> bool {
        matches!(self, MeasureKind::DownFirstApprox | MeasureKind::CurFirstApprox)
    }

    /// Value written for points outside the admissible interior.
    pub fn inadmissible_sentinel(self) -> f64 {
        if self.is_nonpositive() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }

    /// Whether the value needs ordered path enumeration.
    pub fn needs_paths(self) -> bool {
        matches!(
            self,
            MeasureKind::Cur | MeasureKind::CurX | MeasureKind::CurFirstApprox | MeasureKind::RunupExpect
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = MeasureKind::ALL.iter().map(|k| k.name()).collect();
                RiskError::InvalidInput(format!("unknown measure '{s}', expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientKind {
    /// Composition weight on the winning side, `U_n`.
    Up,
    /// Composition weight on the losing side, `D_n`.
    Down,
    /// Path weight after the linear topping point, `Λ_n^(ℓ)`.
    Lambda,
    /// Path weight up to the linear topping point, `Υ_n^(ℓ)`.
    Upsilon,
}

/// Coefficients `values[ℓ][n]`. Up/Down tables have a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub kind: CoefficientKind,
    pub theta: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl CoefficientTable {
    fn zeros(kind: CoefficientKind, theta: &Direction, levels: usize, rows: usize) -> Self {
        Self {
            kind,
            theta: theta.as_slice().to_vec(),
            values: vec![vec![0.0; rows]; levels],
        }
    }

    /// `Σ_ℓ values[ℓ][n]` for every `n`.
    pub fn totals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.first().map_or(0, Vec::len)];
        for level in &self.values {
            for (o, v) in out.iter_mut().zip(level) {
                *o += v;
            }
        }
        out
    }

    /// `Σ_n c_n log(1 + s a_n)`, skipping zero coefficients.
    fn log_contraction(&self, a: &[f64], s: f64) -> f64 {
        self.totals()
            .iter()
            .zip(a)
            .filter(|(&c, _)| c > 0.0)
            .map(|(&c, &a)| c * log_hpr(s * a))
            .sum()
    }
}

/// A value that equals the exact expectation only for small `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub value: f64,
    /// The sign patterns of the linear and the log model agree on every
    /// composition (or path), so the value is exact at this `(s, θ)`.
    pub small_s_regime: bool,
}

/// Path expectations of the five log series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathExpectations {
    pub log_twr: f64,
    pub up: f64,
    pub down: f64,
    pub current_drawdown: f64,
    pub run_up: f64,
}

fn log_hpr(a: f64) -> f64 {
    if 1.0 + a <= 0.0 {
        f64::NEG_INFINITY
    } else {
        a.ln_1p()
    }
}

/// `K` draws from a trade matrix with an enumeration budget.
#[derive(Debug, Clone, Copy)]
pub struct Game<'a> {
    matrix: &'a TradeMatrix,
    draws: usize,
    budget: u64,
}

impl<'a> Game<'a> {
    pub fn new(matrix: &'a TradeMatrix, draws: usize) -> Result<Self> {
        if draws == 0 {
            return Err(RiskError::InvalidInput("number of draws must be at least 1".into()));
        }
        Ok(Self {
            matrix,
            draws,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn matrix(&self) -> &'a TradeMatrix {
        self.matrix
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn counts(&self) -> Result<paths::Counts<'a>> {
        paths::enumerate_counts(self.matrix.probs(), self.draws, self.budget)
    }

    fn visit_paths<F: FnMut(&[usize], f64)>(&self, visit: F) -> Result<()> {
        for_each_path(self.matrix.probs(), self.draws, self.budget, visit)
    }

    fn projections(&self, theta: &Direction) -> Result<Vec<f64>> {
        self.matrix.projections(theta.as_slice())
    }

    /// `sθ` must lie in the closed admissible set.
    fn check_admissible(&self, s: f64, theta: &Direction) -> Result<Vec<f64>> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(RiskError::InvalidInput(format!("step s must be finite and nonnegative, got {s}")));
        }
        let a = self.projections(theta)?;
        let phi = theta.at(s);
        if self.matrix.admissible_set().membership(&phi)? == Membership::Outside {
            let min_hpr = self.matrix.admissible_set().min_hpr(&phi)?;
            return Err(RiskError::Inadmissible { min_hpr });
        }
        Ok(a)
    }

    fn check_interior(&self, s: f64, theta: &Direction) -> Result<Vec<f64>> {
        let a = self.check_admissible(s, theta)?;
        self.matrix.interior_log_hprs(&theta.at(s))?;
        Ok(a)
    }

    /// `ρ_down = -E[D]`, summed over count vectors.
    pub fn rho_down(&self, phi: &PortionVector) -> Result<f64> {
        let logs = self.matrix.interior_log_hprs(phi)?;
        let mut acc = 0.0;
        for c in self.counts()? {
            acc += c.weight * count_weighted_sum(&c.counts, &logs).min(0.0);
        }
        Ok(-acc)
    }

    /// Expectations of all log series by full path enumeration.
    pub fn path_expectations(&self, phi: &PortionVector) -> Result<PathExpectations> {
        let logs = self.matrix.interior_log_hprs(phi)?;
        let mut e = PathExpectations::default();
        self.visit_paths(|omega, prob| {
            let mut prefix = 0.0;
            let mut best: f64 = 0.0;
            for &i in omega {
                prefix += logs[i];
                best = best.max(prefix);
            }
            e.log_twr += prob * prefix;
            e.up += prob * prefix.max(0.0);
            e.down += prob * prefix.min(0.0);
            e.run_up += prob * best;
            e.current_drawdown += prob * suffix_minimum(&logs, omega);
        })?;
        Ok(e)
    }

    /// `U_n` and `D_n`: `Σ H(x) x_n` over compositions with `Σ x_i a_i > 0`
    /// and `<= 0` respectively.
    pub fn down_up_coefficients(
        &self,
        theta: &Direction,
    ) -> Result<(CoefficientTable, CoefficientTable)> {
        let lin = LinearEquity::new(self.matrix, theta.as_slice())?;
        let n = self.matrix.rows();
        let mut up = CoefficientTable::zeros(CoefficientKind::Up, theta, 1, n);
        let mut down = CoefficientTable::zeros(CoefficientKind::Down, theta, 1, n);
        for c in self.counts()? {
            let side = if lin.composition(&c.counts) > 0.0 { &mut up } else { &mut down };
            for (v, &x) in side.values[0].iter_mut().zip(&c.counts) {
                *v += c.weight * x as f64;
            }
        }
        Ok((up, down))
    }

    /// Linear and log sign patterns agree on every composition.
    pub fn small_s_regime_down(&self, s: f64, theta: &Direction) -> Result<bool> {
        let a = self.projections(theta)?;
        let equity = LinearEquity::new(self.matrix, theta.as_slice())?;
        let logs: Vec<f64> = a.iter().map(|&v| log_hpr(s * v)).collect();
        let mut ok = true;
        for c in self.counts()? {
            let lin = equity.composition(&c.counts);
            let h = count_weighted_sum(&c.counts, &logs);
            ok &= (lin > 0.0) == (h > 0.0);
        }
        Ok(ok)
    }

    /// First approximation `d = Σ_n D_n log(1 + s⟨t_n, θ⟩)` of `E[D]`.
    pub fn d_first_approx(&self, s: f64, theta: &Direction) -> Result<Approximation> {
        let a = self.check_admissible(s, theta)?;
        if s == 0.0 {
            return Ok(Approximation { value: 0.0, small_s_regime: true });
        }
        let (_, down) = self.down_up_coefficients(theta)?;
        Ok(Approximation {
            value: down.log_contraction(&a, s),
            small_s_regime: self.small_s_regime_down(s, theta)?,
        })
    }

    /// `u = Σ_n U_n log(1 + s⟨t_n, θ⟩)`.
    pub fn u_expect(&self, s: f64, theta: &Direction) -> Result<Approximation> {
        let a = self.check_interior(s, theta)?;
        if s == 0.0 {
            return Ok(Approximation { value: 0.0, small_s_regime: true });
        }
        let (up, _) = self.down_up_coefficients(theta)?;
        Ok(Approximation {
            value: up.log_contraction(&a, s),
            small_s_regime: self.small_s_regime_down(s, theta)?,
        })
    }

    /// `L(θ) = Σ_x H(x) min{Σ x_n⟨t_n, θ⟩, 0}`.
    pub fn down_linear_mass(&self, theta: &Direction) -> Result<f64> {
        let lin = LinearEquity::new(self.matrix, theta.as_slice())?;
        let mut acc = 0.0;
        for c in self.counts()? {
            acc += c.weight * lin.composition(&c.counts).min(0.0);
        }
        Ok(acc)
    }

    /// Second approximation `d̃ = s L(θ)`.
    pub fn d_second_approx(&self, s: f64, theta: &Direction) -> Result<f64> {
        Ok(s * self.down_linear_mass(theta)?)
    }

    /// `ρ_downX(φ) = -s L(θ)`, defined on all of `R^M`.
    pub fn rho_down_x(&self, phi: &PortionVector) -> Result<f64> {
        self.check_len(phi)?;
        match phi.decompose() {
            None => Ok(0.0),
            Some((s, theta)) => Ok(-s * self.down_linear_mass(&theta)?),
        }
    }

    /// `ρ_cur = -E[D_cur]`, by path enumeration.
    pub fn rho_cur(&self, phi: &PortionVector) -> Result<f64> {
        let logs = self.matrix.interior_log_hprs(phi)?;
        let mut acc = 0.0;
        self.visit_paths(|omega, prob| acc += prob * suffix_minimum(&logs, omega))?;
        Ok(-acc)
    }

    /// `Λ_n^(ℓ)` and `Υ_n^(ℓ)` for `ℓ = 0..=K`: path probability times the
    /// number of occurrences of `n` after, respectively up to, the linear
    /// topping point `ℓ̂* = ℓ`.
    pub fn cur_coefficients(&self, theta: &Direction) -> Result<(CoefficientTable, CoefficientTable)> {
        let lin = LinearEquity::new(self.matrix, theta.as_slice())?;
        let n = self.matrix.rows();
        let levels = self.draws + 1;
        let mut lambda = CoefficientTable::zeros(CoefficientKind::Lambda, theta, levels, n);
        let mut upsilon = CoefficientTable::zeros(CoefficientKind::Upsilon, theta, levels, n);
        self.visit_paths(|omega, prob| {
            let top = lin.topping_point(omega);
            for &i in &omega[..top] {
                upsilon.values[top][i] += prob;
            }
            for &i in &omega[top..] {
                lambda.values[top][i] += prob;
            }
        })?;
        Ok((lambda, upsilon))
    }

    /// TWR and linear topping points agree on every path.
    pub fn small_s_regime_cur(&self, s: f64, theta: &Direction) -> Result<bool> {
        let a = self.projections(theta)?;
        let lin = LinearEquity::new(self.matrix, theta.as_slice())?;
        let logs: Vec<f64> = a.iter().map(|&v| log_hpr(s * v)).collect();
        let mut ok = true;
        self.visit_paths(|omega, _| {
            ok &= lin.topping_point(omega)
                == first_topping_point(omega.iter().map(|&i| logs[i]));
        })?;
        Ok(ok)
    }

    /// First approximation `d_cur = Σ_n (Σ_ℓ Λ_n^(ℓ)) log(1 + s⟨t_n, θ⟩)` of `E[D_cur]`.
    pub fn d_cur_first_approx(&self, s: f64, theta: &Direction) -> Result<Approximation> {
        let a = self.check_admissible(s, theta)?;
        if s == 0.0 {
            return Ok(Approximation { value: 0.0, small_s_regime: true });
        }
        let (lambda, _) = self.cur_coefficients(theta)?;
        Ok(Approximation {
            value: lambda.log_contraction(&a, s),
            small_s_regime: self.small_s_regime_cur(s, theta)?,
        })
    }

    /// `u_run = Σ_n (Σ_ℓ Υ_n^(ℓ)) log(1 + s⟨t_n, θ⟩)`.
    pub fn u_run_expect(&self, s: f64, theta: &Direction) -> Result<Approximation> {
        let a = self.check_interior(s, theta)?;
        if s == 0.0 {
            return Ok(Approximation { value: 0.0, small_s_regime: true });
        }
        let (_, upsilon) = self.cur_coefficients(theta)?;
        Ok(Approximation {
            value: upsilon.log_contraction(&a, s),
            small_s_regime: self.small_s_regime_cur(s, theta)?,
        })
    }

    /// `L_cur(θ) = Σ_ω P(ω) Σ_{i > ℓ̂*} ⟨t_{ω_i}, θ⟩`.
    pub fn cur_linear_mass(&self, theta: &Direction) -> Result<f64> {
        let lin = LinearEquity::new(self.matrix, theta.as_slice())?;
        let mut acc = 0.0;
        self.visit_paths(|omega, prob| {
            let top = lin.topping_point(omega);
            acc += prob * lin.segment(&omega[top..]);
        })?;
        Ok(acc)
    }

    /// Second approximation `d̃_cur = s L_cur(θ)`.
    pub fn d_cur_second_approx(&self, s: f64, theta: &Direction) -> Result<f64> {
        Ok(s * self.cur_linear_mass(theta)?)
    }

    /// `ρ_curX(φ) = -s L_cur(θ)`, defined on all of `R^M`.
    pub fn rho_cur_x(&self, phi: &PortionVector) -> Result<f64> {
        self.check_len(phi)?;
        match phi.decompose() {
            None => Ok(0.0),
            Some((s, theta)) => Ok(-s * self.cur_linear_mass(&theta)?),
        }
    }

    /// Value of `kind` at `phi`; the origin gives 0 without decomposition.
    pub fn evaluate(&self, kind: MeasureKind, phi: &PortionVector) -> Result<f64> {
        self.check_len(phi)?;
        let radial = |f: fn(&Self, f64, &Direction) -> Result<Approximation>| match phi.decompose() {
            None => Ok(0.0),
            Some((s, theta)) => Ok(f(self, s, &theta)?.value),
        };
        match kind {
            MeasureKind::Down => self.rho_down(phi),
            MeasureKind::DownX => self.rho_down_x(phi),
            MeasureKind::Cur => self.rho_cur(phi),
            MeasureKind::CurX => self.rho_cur_x(phi),
            MeasureKind::DownFirstApprox => radial(Self::d_first_approx),
            MeasureKind::CurFirstApprox => radial(Self::d_cur_first_approx),
            MeasureKind::UpExpect => radial(Self::u_expect),
            MeasureKind::RunupExpect => radial(Self::u_run_expect),
        }
    }

    /// `ρ(φ + h v) - 2ρ(φ) + ρ(φ - h v)` for the chosen measure.
    pub fn second_difference(
        &self,
        kind: MeasureKind,
        phi: &PortionVector,
        direction: &[f64],
        h: f64,
    ) -> Result<f64> {
        let shifted = |sign: f64| {
            PortionVector::new(
                phi.as_slice()
                    .iter()
                    .zip(direction)
                    .map(|(p, v)| p + sign * h * v)
                    .collect(),
            )
        };
        Ok(self.evaluate(kind, &shifted(1.0))? - 2.0 * self.evaluate(kind, phi)?
            + self.evaluate(kind, &shifted(-1.0))?)
    }

    /// A direction along which `ρ_down` is locally affine at `phi`, if any.
    ///
    /// Only rows occurring in a losing composition influence `ρ_down` near
    /// `phi`; a common null vector of those rows is a flat direction.
    pub fn flat_direction(&self, phi: &PortionVector) -> Result<Option<Direction>> {
        let logs = self.matrix.interior_log_hprs(phi)?;
        let n = self.matrix.rows();
        let mut used = vec![false; n];
        for c in self.counts()? {
            if count_weighted_sum(&c.counts, &logs) < 0.0 {
                for (u, &x) in used.iter_mut().zip(&c.counts) {
                    *u |= x > 0;
                }
            }
        }
        let rows: Vec<f64> = (0..n)
            .filter(|&i| used[i])
            .flat_map(|i| self.matrix.row(i).to_vec())
            .collect();
        if rows.is_empty() {
            return Ok(None);
        }
        let m = self.matrix.cols();
        Ok(linalg::null_vector(&rows, rows.len() / m, m).and_then(|v| Direction::new(v).ok()))
    }

    fn check_len(&self, phi: &PortionVector) -> Result<()> {
        if phi.len() != self.matrix.cols() {
            return Err(RiskError::DimensionMismatch {
                expected: self.matrix.cols(),
                got: phi.len(),
            });
        }
        Ok(())
    }
}

/// `min{0, min_ℓ Σ_{j>=ℓ} log HPR_{ω_j}}` via backward suffix sums.
fn suffix_minimum(logs: &[f64], omega: &[usize]) -> f64 {
    let mut suffix = 0.0;
    let mut worst: f64 = 0.0;
    for &i in omega.iter().rev() {
        suffix += logs[i];
        worst = worst.min(suffix);
    }
    worst
}

/// Rows not orthogonal to `θ` span `R^M`.
pub fn span_condition(matrix: &TradeMatrix, theta: &Direction) -> Result<bool> {
    let a = matrix.projections(theta.as_slice())?;
    let m = matrix.cols();
    let rows: Vec<f64> = a
        .iter()
        .enumerate()
        .filter(|(i, &v)| v.abs() > 1e-12 * linalg::norm(matrix.row(*i)))
        .flat_map(|(i, _)| matrix.row(i).to_vec())
        .collect();
    Ok(!rows.is_empty() && linalg::rank(&rows, rows.len() / m, m) == m)
}

pub fn rho_down(matrix: &TradeMatrix, phi: &PortionVector, draws: usize) -> Result<f64> {
    Game::new(matrix, draws)?.rho_down(phi)
}

pub fn rho_down_x(matrix: &TradeMatrix, phi: &PortionVector, draws: usize) -> Result<f64> {
    Game::new(matrix, draws)?.rho_down_x(phi)
}

pub fn rho_cur(matrix: &TradeMatrix, phi: &PortionVector, draws: usize) -> Result<f64> {
    Game::new(matrix, draws)?.rho_cur(phi)
}

pub fn rho_cur_x(matrix: &TradeMatrix, phi: &PortionVector, draws: usize) -> Result<f64> {
    Game::new(matrix, draws)?.rho_cur_x(phi)
}

pub fn d_first_approx(matrix: &TradeMatrix, s: f64, theta: &Direction, draws: usize) -> Result<Approximation> {
    Game::new(matrix, draws)?.d_first_approx(s, theta)
}

pub fn d_cur_first_approx(
    matrix: &TradeMatrix,
    s: f64,
    theta: &Direction,
    draws: usize,
) -> Result<Approximation> {
    Game::new(matrix, draws)?.d_cur_first_approx(s, theta)
}

pub fn u_expect(matrix: &TradeMatrix, s: f64, theta: &Direction, draws: usize) -> Result<Approximation> {
    Game::new(matrix, draws)?.u_expect(s, theta)
}

pub fn u_run_expect(matrix: &TradeMatrix, s: f64, theta: &Direction, draws: usize) -> Result<Approximation> {
    Game::new(matrix, draws)?.u_run_expect(s, theta)
}
