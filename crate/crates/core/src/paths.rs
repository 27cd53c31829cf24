//! Enumeration of draw paths and count vectors, and the per-path log series.
//!
//! Row indices inside a path are zero based. Positions along a path are
//! zero based as well, so the TWR segment `TWR_m^n` of a path of length `K`
//! corresponds to the half-open position range `m-1..n`.

use std::ops::Range;

use crate::error::{Result, RiskError};
use crate::linalg;
use crate::trade::{Direction, PortionVector, TradeMatrix, BOUNDARY_TOLERANCE};

/// Default number of enumerated items allowed per call (`2^24`).
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Prefix values closer than this to the running maximum count as ties;
/// the first index wins.
pub const TIE_TOLERANCE: f64 = 1e-14;

/// `N^K`, saturating.
pub fn path_count(rows: usize, draws: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..draws {
        total = total.saturating_mul(rows as u128);
    }
    total
}

/// Number of compositions of `K` into `N` nonnegative parts, `C(K+N-1, N-1)`, saturating.
pub fn composition_count(rows: usize, draws: usize) -> u128 {
    if rows == 0 {
        return 0;
    }
    let k = (rows - 1) as u128;
    let n = (draws + rows - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

fn check_budget(required: u128, budget: u64) -> Result<()> {
    if required > budget as u128 {
        return Err(RiskError::BudgetExceeded { required, budget });
    }
    Ok(())
}

fn check_draws(draws: usize) -> Result<()> {
    if draws == 0 {
        return Err(RiskError::InvalidInput("number of draws must be at least 1".into()));
    }
    Ok(())
}

/// One ordered draw sequence `ω` and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub omega: Vec<usize>,
    pub prob: f64,
}

/// Lexicographic stream over `{0..N}^K`.
#[derive(Debug, Clone)]
pub struct Paths<'a> {
    probs: &'a [f64],
    omega: Vec<usize>,
    done: bool,
}

impl Iterator for Paths<'_> {
    type Item = PathOutcome;

    fn next(&mut self) -> Option<PathOutcome> {
        if self.done {
            return None;
        }
        let out = PathOutcome {
            omega: self.omega.clone(),
            prob: path_prob(self.probs, &self.omega),
        };
        self.done = !advance_odometer(&mut self.omega, self.probs.len());
        Some(out)
    }
}

fn path_prob(probs: &[f64], omega: &[usize]) -> f64 {
    omega.iter().map(|&i| probs[i]).product()
}

fn advance_odometer(omega: &mut [usize], base: usize) -> bool {
    for slot in omega.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Streams every path of `K` independent draws from `probs`.
pub fn enumerate_paths(probs: &[f64], draws: usize, budget: u64) -> Result<Paths<'_>> {
    check_draws(draws)?;
    check_budget(path_count(probs.len(), draws), budget)?;
    Ok(Paths {
        probs,
        omega: vec![0; draws],
        done: probs.is_empty(),
    })
}

/// Visits every path without allocating per path. Order is lexicographic.
pub fn for_each_path<F>(probs: &[f64], draws: usize, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize], f64),
{
    check_draws(draws)?;
    check_budget(path_count(probs.len(), draws), budget)?;
    if probs.is_empty() {
        return Ok(());
    }
    let mut omega = vec![0; draws];
    loop {
        visit(&omega, path_prob(probs, &omega));
        if !advance_odometer(&mut omega, probs.len()) {
            return Ok(());
        }
    }
}

/// Unordered reduction of a path: `counts[i]` draws of row `i`, with multinomial weight `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountVector {
    pub counts: Vec<usize>,
    pub weight: f64,
}

/// Colexicographic stream over compositions of `K` into `N` parts.
#[derive(Debug, Clone)]
pub struct Counts<'a> {
    probs: &'a [f64],
    draws: usize,
    counts: Vec<usize>,
    done: bool,
}

impl Iterator for Counts<'_> {
    type Item = CountVector;

    fn next(&mut self) -> Option<CountVector> {
        if self.done {
            return None;
        }
        let out = CountVector {
            weight: multinomial_weight(self.probs, &self.counts),
            counts: self.counts.clone(),
        };
        self.done = !advance_composition(&mut self.counts, self.draws);
        Some(out)
    }
}

fn advance_composition(x: &mut [usize], total: usize) -> bool {
    let Some(first) = x.iter().position(|&v| v > 0) else {
        return false;
    };
    let j = first + 1;
    if j >= x.len() {
        return false;
    }
    x[j] += 1;
    for v in &mut x[1..j] {
        *v = 0;
    }
    x[0] = total - x[1..].iter().sum::<usize>();
    true
}

/// `H(x) = K!/(x_1!...x_N!) * p_1^{x_1}...p_N^{x_N}`.
pub fn multinomial_weight(probs: &[f64], counts: &[usize]) -> f64 {
    let mut coeff = 1.0;
    let mut seen = 0usize;
    for &c in counts {
        // C(seen + c, c) built incrementally; exact while it fits in 53 bits.
        for j in 1..=c {
            coeff = coeff * (seen + j) as f64 / j as f64;
        }
        seen += c;
    }
    counts
        .iter()
        .zip(probs)
        .fold(coeff, |acc, (&c, &p)| acc * p.powi(c as i32))
}

/// Streams every composition of `K` draws with its weight `H^(K,N)`.
pub fn enumerate_counts(probs: &[f64], draws: usize, budget: u64) -> Result<Counts<'_>> {
    check_draws(draws)?;
    check_budget(composition_count(probs.len(), draws), budget)?;
    let mut counts = vec![0; probs.len()];
    if let Some(first) = counts.first_mut() {
        *first = draws;
    }
    Ok(Counts {
        probs,
        draws,
        counts,
        done: probs.is_empty(),
    })
}

/// `Σ x_n v_n` skipping zero counts, so `-∞` entries of unused rows do not poison the sum.
pub(crate) fn count_weighted_sum(counts: &[usize], values: &[f64]) -> f64 {
    counts
        .iter()
        .zip(values)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &v)| c as f64 * v)
        .sum()
}

/// The four log series of one path, with both topping points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSeries {
    /// `log TWR_1^K`.
    pub log_twr: f64,
    pub up: f64,
    pub down: f64,
    pub current_drawdown: f64,
    pub run_up: f64,
    /// First TWR topping point `ℓ*` in `0..=K`.
    pub topping_point: usize,
}

/// Per-row log holding period returns for a fixed admissible `phi`.
///
/// Boundary points are accepted: a zero HPR becomes `-∞`.
#[derive(Debug, Clone)]
pub struct PathEvaluator {
    hpr: Vec<f64>,
    log_hpr: Vec<f64>,
}

impl PathEvaluator {
    pub fn new(matrix: &TradeMatrix, phi: &PortionVector) -> Result<Self> {
        let proj = matrix.projections(phi.as_slice())?;
        let min_hpr = proj.iter().map(|a| 1.0 + a).fold(f64::INFINITY, f64::min);
        if min_hpr < -BOUNDARY_TOLERANCE {
            return Err(RiskError::Inadmissible { min_hpr });
        }
        let hpr = proj.iter().map(|a| (1.0 + a).max(0.0)).collect();
        let log_hpr = proj
            .iter()
            .map(|&a| if 1.0 + a <= BOUNDARY_TOLERANCE { f64::NEG_INFINITY } else { a.ln_1p() })
            .collect();
        Ok(Self { hpr, log_hpr })
    }

    pub fn log_hprs(&self) -> &[f64] {
        &self.log_hpr
    }

    /// `Π_{j ∈ positions} HPR_{ω_j}`; the empty product is 1.
    pub fn twr_segment(&self, omega: &[usize], positions: Range<usize>) -> f64 {
        omega[positions].iter().map(|&i| self.hpr[i]).product()
    }

    pub fn log_twr(&self, omega: &[usize]) -> f64 {
        omega.iter().map(|&i| self.log_hpr[i]).sum()
    }

    pub fn downtrade_log(&self, omega: &[usize]) -> f64 {
        self.log_twr(omega).min(0.0)
    }

    pub fn uptrade_log(&self, omega: &[usize]) -> f64 {
        self.log_twr(omega).max(0.0)
    }

    /// `log min_ℓ min{1, TWR_ℓ^K}` via suffix sums.
    pub fn current_drawdown_log(&self, omega: &[usize]) -> f64 {
        let mut suffix = 0.0;
        let mut worst: f64 = 0.0;
        for &i in omega.iter().rev() {
            suffix += self.log_hpr[i];
            worst = worst.min(suffix);
        }
        worst
    }

    /// `log max_ℓ max{1, TWR_1^ℓ}` via prefix sums.
    pub fn runup_log(&self, omega: &[usize]) -> f64 {
        let mut prefix = 0.0;
        let mut best: f64 = 0.0;
        for &i in omega {
            prefix += self.log_hpr[i];
            best = best.max(prefix);
        }
        best
    }

    /// First TWR topping point `ℓ* ∈ 0..=K`.
    pub fn topping_point(&self, omega: &[usize]) -> usize {
        first_topping_point(omega.iter().map(|&i| self.log_hpr[i]))
    }

    pub fn log_series(&self, omega: &[usize]) -> LogSeries {
        let log_twr = self.log_twr(omega);
        LogSeries {
            log_twr,
            up: log_twr.max(0.0),
            down: log_twr.min(0.0),
            current_drawdown: self.current_drawdown_log(omega),
            run_up: self.runup_log(omega),
            topping_point: self.topping_point(omega),
        }
    }
}

/// Minimal `ℓ` whose prefix sum attains the maximum strictly above 0, else 0.
pub(crate) fn first_topping_point<I: IntoIterator<Item = f64>>(increments: I) -> usize {
    let mut prefix = 0.0;
    let prefixes: Vec<f64> = increments
        .into_iter()
        .map(|v| {
            prefix += v;
            prefix
        })
        .collect();
    topping_point_of_prefixes(&prefixes)
}

pub(crate) fn topping_point_of_prefixes(prefixes: &[f64]) -> usize {
    let max = prefixes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return 0;
    }
    prefixes
        .iter()
        .position(|&v| v > 0.0 && v >= max - TIE_TOLERANCE)
        .map_or(0, |p| p + 1)
}

/// `TWR_m^n` for positions `m-1..n` of `omega`.
pub fn twr_segment(
    matrix: &TradeMatrix,
    phi: &PortionVector,
    omega: &[usize],
    positions: Range<usize>,
) -> Result<f64> {
    Ok(PathEvaluator::new(matrix, phi)?.twr_segment(omega, positions))
}

pub fn downtrade_log(matrix: &TradeMatrix, phi: &PortionVector, omega: &[usize]) -> Result<f64> {
    Ok(PathEvaluator::new(matrix, phi)?.downtrade_log(omega))
}

pub fn uptrade_log(matrix: &TradeMatrix, phi: &PortionVector, omega: &[usize]) -> Result<f64> {
    Ok(PathEvaluator::new(matrix, phi)?.uptrade_log(omega))
}

pub fn current_drawdown_log(
    matrix: &TradeMatrix,
    phi: &PortionVector,
    omega: &[usize],
) -> Result<f64> {
    Ok(PathEvaluator::new(matrix, phi)?.current_drawdown_log(omega))
}

pub fn runup_log(matrix: &TradeMatrix, phi: &PortionVector, omega: &[usize]) -> Result<f64> {
    Ok(PathEvaluator::new(matrix, phi)?.runup_log(omega))
}

pub fn twr_topping_point(
    matrix: &TradeMatrix,
    phi: &PortionVector,
    omega: &[usize],
) -> Result<usize> {
    Ok(PathEvaluator::new(matrix, phi)?.topping_point(omega))
}

/// Linear equity of a fixed vector `θ`.
///
/// Row vectors are summed before projecting, so row combinations that cancel
/// exactly give a linear value of exactly zero.
#[derive(Debug, Clone)]
pub struct LinearEquity<'a> {
    matrix: &'a TradeMatrix,
    theta: Vec<f64>,
}

impl<'a> LinearEquity<'a> {
    pub fn new(matrix: &'a TradeMatrix, theta: &[f64]) -> Result<Self> {
        if theta.len() != matrix.cols() {
            return Err(RiskError::DimensionMismatch {
                expected: matrix.cols(),
                got: theta.len(),
            });
        }
        Ok(Self {
            matrix,
            theta: theta.to_vec(),
        })
    }

    /// `⟨Σ_j t_{ω_j}, θ⟩` over the given draws.
    pub fn segment(&self, draws: &[usize]) -> f64 {
        let mut acc = vec![0.0; self.theta.len()];
        for &i in draws {
            for (a, t) in acc.iter_mut().zip(self.matrix.row(i)) {
                *a += t;
            }
        }
        linalg::dot(&acc, &self.theta)
    }

    /// `⟨Σ_n x_n t_n, θ⟩` for a count vector.
    pub fn composition(&self, counts: &[usize]) -> f64 {
        let mut acc = vec![0.0; self.theta.len()];
        for (n, &x) in counts.iter().enumerate().filter(|(_, &x)| x > 0) {
            for (a, t) in acc.iter_mut().zip(self.matrix.row(n)) {
                *a += x as f64 * t;
            }
        }
        linalg::dot(&acc, &self.theta)
    }

    /// `linEQ_1^n` for `n = 1..=K`.
    pub fn prefixes(&self, omega: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.theta.len()];
        omega
            .iter()
            .map(|&i| {
                for (a, t) in acc.iter_mut().zip(self.matrix.row(i)) {
                    *a += t;
                }
                linalg::dot(&acc, &self.theta)
            })
            .collect()
    }

    /// First linear topping point `ℓ̂* ∈ 0..=K`.
    pub fn topping_point(&self, omega: &[usize]) -> usize {
        topping_point_of_prefixes(&self.prefixes(omega))
    }

    /// Segment characterization of `ℓ̂* = ℓ`: every segment ending at `ℓ`
    /// gains and no segment starting after `ℓ` does.
    pub fn topping_conditions(&self, omega: &[usize], ell: usize) -> bool {
        (0..ell).all(|k| self.segment(&omega[k..ell]) > 0.0)
            && (ell + 1..=omega.len()).all(|k| self.segment(&omega[ell..k]) <= 0.0)
    }
}

/// Linear equity `linEQ_1^n(θ, ω)` for `n = 1..=K`.
pub fn linear_equity(matrix: &TradeMatrix, theta: &Direction, omega: &[usize]) -> Result<Vec<f64>> {
    Ok(LinearEquity::new(matrix, theta.as_slice())?.prefixes(omega))
}

/// First linear equity topping point `ℓ̂* ∈ 0..=K`.
pub fn linear_topping_point(matrix: &TradeMatrix, theta: &Direction, omega: &[usize]) -> Result<usize> {
    Ok(LinearEquity::new(matrix, theta.as_slice())?.topping_point(omega))
}
