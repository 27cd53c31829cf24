//! Grid evaluation of measures and the convergence series in `K`.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Result, RiskError};
use crate::io::{csv_header, format_value};
use crate::measures::{Game, MeasureKind};
use crate::trade::{PortionVector, TradeMatrix};

/// One axis `min:max:steps` with `steps >= 2` equally spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(RiskError::InvalidInput(format!("axis needs min < max, got {min}:{max}")));
        }
        if steps < 2 {
            return Err(RiskError::InvalidInput(format!("axis needs at least 2 steps, got {steps}")));
        }
        Ok(Self { min, max, steps })
    }

    /// The `i`-th grid value. Values within rounding of 0 are snapped to 0 so
    /// grids through the origin hit it exactly.
    pub fn value(&self, i: usize) -> f64 {
        if i == 0 {
            return self.min;
        }
        if i + 1 >= self.steps {
            return self.max;
        }
        let last = (self.steps - 1) as f64;
        let i = i as f64;
        let v = (self.min * (last - i) + self.max * i) / last;
        if v.abs() <= 1e-12 * (self.max - self.min) {
            0.0
        } else {
            v
        }
    }
}

impl FromStr for Axis {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || RiskError::InvalidInput(format!("axis '{s}' must look like min:max:steps"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let max = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let steps = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        Axis::new(min, max, steps)
    }
}

/// A rectangular lattice of portion vectors with the measure to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    pub measure: MeasureKind,
    pub draws: usize,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>, measure: MeasureKind, draws: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(RiskError::InvalidInput("grid needs at least one axis".into()));
        }
        if draws == 0 {
            return Err(RiskError::InvalidInput("number of draws must be at least 1".into()));
        }
        Ok(Self { axes, measure, draws })
    }

    /// `min:max:steps[,min:max:steps...]`.
    pub fn parse_axes(text: &str) -> Result<Vec<Axis>> {
        text.split(',').map(str::parse).collect()
    }

    /// `[-0.4, 0.8]` with 121 steps on each of `dims` axes.
    pub fn default_axes(dims: usize) -> Vec<Axis> {
        vec![Axis { min: -0.4, max: 0.8, steps: 121 }; dims]
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    /// All lattice points; the first axis varies slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.point_count());
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            out.push(idx.iter().zip(&self.axes).map(|(&i, a)| a.value(i)).collect());
            let mut d = self.axes.len();
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < self.axes[d].steps {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRow {
    pub phi: Vec<f64>,
    pub value: f64,
}

/// Evaluated lattice. `complete` is false when evaluation stopped early; then
/// `rows` holds the prefix computed before the failing point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceResult {
    pub dims: usize,
    pub rows: Vec<SurfaceRow>,
    pub complete: bool,
    pub error: Option<RiskError>,
}

impl SurfaceResult {
    pub fn to_csv(&self) -> String {
        let mut out = csv_header(self.dims);
        out.push('\n');
        for row in &self.rows {
            for v in &row.phi {
                out.push_str(&format_value(*v));
                out.push(',');
            }
            out.push_str(&format_value(row.value));
            out.push('\n');
        }
        out
    }

    /// Largest finite difference between lattice neighbours.
    pub fn largest_adjacent_jump(&self, grid: &GridSpec) -> f64 {
        let mut stride = 1;
        let mut best: f64 = 0.0;
        for axis in grid.axes.iter().rev() {
            for (k, row) in self.rows.iter().enumerate() {
                let pos = (k / stride) % axis.steps;
                if pos + 1 < axis.steps {
                    if let Some(next) = self.rows.get(k + stride) {
                        let jump = (next.value - row.value).abs();
                        if jump.is_finite() {
                            best = best.max(jump);
                        }
                    }
                }
            }
            stride *= axis.steps;
        }
        best
    }
}

/// Value of `kind` at `phi`, or the sentinel outside the admissible interior.
pub fn evaluate_point(game: &Game<'_>, kind: MeasureKind, phi: &PortionVector) -> Result<f64> {
    if !game.matrix().admissible_set().is_interior(phi) {
        return Ok(kind.inadmissible_sentinel());
    }
    game.evaluate(kind, phi)
}

/// Evaluates the grid with `threads` workers. Rows do not depend on the
/// number of workers.
pub fn evaluate_surface(
    matrix: &TradeMatrix,
    grid: &GridSpec,
    budget: u64,
    threads: usize,
) -> Result<SurfaceResult> {
    if grid.axes.len() != matrix.cols() {
        return Err(RiskError::DimensionMismatch {
            expected: matrix.cols(),
            got: grid.axes.len(),
        });
    }
    let game = Game::new(matrix, grid.draws)?.with_budget(budget);
    let points = grid.points();
    let eval = |p: &Vec<f64>| evaluate_point(&game, grid.measure, &PortionVector::new(p.clone()));
    let values: Vec<Result<f64>> = if threads <= 1 {
        points.iter().map(eval).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RiskError::InvalidInput(format!("cannot start worker pool: {e}")))?
            .install(|| points.par_iter().map(eval).collect())
    };
    let mut rows = Vec::with_capacity(points.len());
    for (phi, value) in points.into_iter().zip(values) {
        match value {
            Ok(value) => rows.push(SurfaceRow { phi, value }),
            Err(e @ RiskError::BudgetExceeded { .. }) => {
                return Ok(SurfaceResult {
                    dims: grid.axes.len(),
                    rows,
                    complete: false,
                    error: Some(e),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SurfaceResult {
        dims: grid.axes.len(),
        rows,
        complete: true,
        error: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub draws: usize,
    pub value: f64,
}

/// `ρ_cur^(K)(φ)` for `K = 1..=k_max`.
pub fn converge(
    matrix: &TradeMatrix,
    phi: &PortionVector,
    k_max: usize,
    budget: u64,
) -> Result<Vec<ConvergencePoint>> {
    if k_max == 0 {
        return Err(RiskError::InvalidInput("Kmax must be at least 1".into()));
    }
    (1..=k_max)
        .map(|k| {
            let value = Game::new(matrix, k)?.with_budget(budget).rho_cur(phi)?;
            Ok(ConvergencePoint { draws: k, value })
        })
        .collect()
}

pub fn convergence_csv(points: &[ConvergencePoint]) -> String {
    let mut out = String::from("K,rho_cur\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.draws, format_value(p.value));
    }
    out
}
