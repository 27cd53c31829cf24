//! Trade-return matrices, portion vectors and the admissible set.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::linalg;

/// Tolerance on the sum of row probabilities.
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// `|min HPR| <= BOUNDARY_TOLERANCE` classifies a portion vector as a boundary point.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// An `N x M` matrix of net trade returns together with row probabilities.
///
/// Row `i` is the joint return of all `M` trading systems in scenario `i`,
/// which is drawn with probability `probs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeMatrix {
    returns: Vec<f64>,
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl TradeMatrix {
    /// Builds a matrix from rows. Missing probabilities default to uniform.
    pub fn new(rows: Vec<Vec<f64>>, probs: Option<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(RiskError::InvalidInput("trade matrix has no rows".into()));
        }
        let m = rows[0].len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(RiskError::InvalidInput(format!(
                "row {} has {} columns, expected {}",
                i + 1,
                row.len(),
                m
            )));
        }
        let returns = rows.into_iter().flatten().collect();
        let probs = probs.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        Self::from_flat(returns, n, m, probs)
    }

    /// Builds a matrix from row-major data.
    pub fn from_flat(returns: Vec<f64>, rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(RiskError::InvalidInput(format!(
                "trade matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if returns.len() != rows * cols {
            return Err(RiskError::DimensionMismatch {
                expected: rows * cols,
                got: returns.len(),
            });
        }
        if probs.len() != rows {
            return Err(RiskError::InvalidInput(format!(
                "{} probabilities given for {} rows",
                probs.len(),
                rows
            )));
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(RiskError::InvalidInput("trade returns must be finite".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(RiskError::InvalidInput(format!(
                "probabilities must be positive, found {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(RiskError::InvalidInput(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            returns,
            rows,
            cols,
            probs,
        })
    }

    /// Number of scenarios `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of trading systems `M`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.returns[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.returns
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.cols {
            return Err(RiskError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `⟨t_i, v⟩` for every row.
    pub fn projections(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok((0..self.rows).map(|i| linalg::dot(self.row(i), v)).collect())
    }

    /// Holding period return `1 + ⟨t_i, phi⟩` of row `i` (zero based).
    pub fn hpr(&self, phi: &PortionVector, i: usize) -> Result<f64> {
        self.check_dim(phi.as_slice())?;
        if i >= self.rows {
            return Err(RiskError::IndexOutOfRange {
                index: i,
                rows: self.rows,
            });
        }
        Ok(1.0 + linalg::dot(self.row(i), phi.as_slice()))
    }

    /// All holding period returns.
    pub fn hprs(&self, phi: &PortionVector) -> Result<Vec<f64>> {
        Ok(self
            .projections(phi.as_slice())?
            .into_iter()
            .map(|a| 1.0 + a)
            .collect())
    }

    /// `log(1 + ⟨t_i, phi⟩)` per row, after checking `phi` is an interior point.
    pub(crate) fn interior_log_hprs(&self, phi: &PortionVector) -> Result<Vec<f64>> {
        let proj = self.projections(phi.as_slice())?;
        let min_hpr = proj.iter().map(|a| 1.0 + a).fold(f64::INFINITY, f64::min);
        if classify_min_hpr(min_hpr) != Membership::Interior {
            return Err(RiskError::NotInterior { min_hpr });
        }
        Ok(proj.into_iter().map(f64::ln_1p).collect())
    }

    /// Weighted geometric mean `Γ(phi) = Π (1 + ⟨t_i, phi⟩)^{p_i}`.
    pub fn gamma_mean(&self, phi: &PortionVector) -> Result<f64> {
        Ok(self.log_gamma(phi)?.exp())
    }

    pub fn log_gamma(&self, phi: &PortionVector) -> Result<f64> {
        let logs = self.interior_log_hprs(phi)?;
        Ok(logs.iter().zip(&self.probs).map(|(l, p)| p * l).sum())
    }

    /// `E[log TWR_1^K] = K log Γ(phi)`.
    pub fn expected_log_z(&self, phi: &PortionVector, draws: usize) -> Result<f64> {
        if draws == 0 {
            return Err(RiskError::InvalidInput("number of draws must be at least 1".into()));
        }
        Ok(draws as f64 * self.log_gamma(phi)?)
    }

    pub fn admissible_set(&self) -> AdmissibleSet<'_> {
        AdmissibleSet { matrix: self }
    }

    /// Numerical rank of `T`.
    pub fn rank(&self) -> usize {
        linalg::rank(&self.returns, self.rows, self.cols)
    }

    /// Decides whether every nonzero direction loses in at least one scenario.
    ///
    /// Equivalent finite test: `rank(T) = M` and some `y >= 1` satisfies
    /// `T^T y = 0`. On failure a direction `θ` with `T θ >= 0` is returned.
    pub fn check_no_risk_free(&self) -> NoRiskFreeCheck {
        let rank = self.rank();
        if rank == self.cols {
            if let Some(y) = linalg::positive_left_kernel(&self.returns, self.rows, self.cols) {
                return NoRiskFreeCheck {
                    holds: true,
                    rank,
                    certificate: Certificate::PositiveKernel(y),
                };
            }
        }
        let direction = if rank < self.cols {
            linalg::null_vector(&self.returns, self.rows, self.cols)
        } else {
            None
        }
        .or_else(|| linalg::nonnegative_image(&self.returns, self.rows, self.cols));
        NoRiskFreeCheck {
            holds: false,
            rank,
            certificate: match direction {
                Some(theta) => Certificate::RiskFreeDirection(theta),
                None => Certificate::Inconclusive,
            },
        }
    }
}

/// Outcome of the no-risk-free-investment check.
#[derive(Debug, Clone, PartialEq)]
pub struct NoRiskFreeCheck {
    pub holds: bool,
    pub rank: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `y >= 1` with `T^T y = 0`.
    PositiveKernel(Vec<f64>),
    /// Unit `θ` with `T θ >= 0`: investing along `θ` never loses.
    RiskFreeDirection(Vec<f64>),
    /// The solver could not produce either certificate.
    Inconclusive,
}

/// Vector of capital portions `phi`, one entry per trading system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortionVector(Vec<f64>);

impl PortionVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Euclidean length `s`.
    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    /// Radial decomposition `phi = s θ`; `None` at the origin.
    pub fn decompose(&self) -> Option<(f64, Direction)> {
        let s = self.norm();
        (s > 0.0).then(|| (s, Direction(self.0.iter().map(|v| v / s).collect())))
    }
}

impl From<Vec<f64>> for PortionVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A unit vector on the sphere of allocation directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails for the zero vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let n = linalg::norm(&v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(RiskError::InvalidInput(
                "direction must be a finite nonzero vector".into(),
            ));
        }
        Ok(Self(v.into_iter().map(|x| x / n).collect()))
    }

    /// Unit direction at `angle` radians in the plane.
    pub fn from_angle(angle: f64) -> Self {
        Self(vec![angle.cos(), angle.sin()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The portion vector `s θ`.
    pub fn at(&self, s: f64) -> PortionVector {
        PortionVector(self.0.iter().map(|v| v * s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

fn classify_min_hpr(min_hpr: f64) -> Membership {
    if min_hpr.abs() <= BOUNDARY_TOLERANCE {
        Membership::Boundary
    } else if min_hpr > 0.0 {
        Membership::Interior
    } else {
        Membership::Outside
    }
}

/// The polyhedron `G = {phi : 1 + ⟨t_i, phi⟩ >= 0 for all i}`.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibleSet<'a> {
    matrix: &'a TradeMatrix,
}

impl<'a> AdmissibleSet<'a> {
    pub fn matrix(&self) -> &'a TradeMatrix {
        self.matrix
    }

    pub fn min_hpr(&self, phi: &PortionVector) -> Result<f64> {
        Ok(self
            .matrix
            .hprs(phi)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    pub fn membership(&self, phi: &PortionVector) -> Result<Membership> {
        Ok(classify_min_hpr(self.min_hpr(phi)?))
    }

    pub fn is_interior(&self, phi: &PortionVector) -> bool {
        matches!(self.membership(phi), Ok(Membership::Interior))
    }

    /// Largest `s` with `s θ ∈ G`; `None` when the whole ray is admissible.
    pub fn ray_exit(&self, theta: &Direction) -> Result<Option<f64>> {
        Ok(self
            .matrix
            .projections(theta.as_slice())?
            .into_iter()
            .filter(|&a| a < 0.0)
            .map(|a| -1.0 / a)
            .reduce(f64::min))
    }
}
