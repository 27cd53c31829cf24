//! Seeded property suites run by `twr-risk verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measures::{span_condition, Game, MeasureKind};
use crate::paths::{first_topping_point, for_each_path, LinearEquity};
use crate::trade::{Direction, NoRiskFreeCheck, PortionVector, TradeMatrix};

/// Slack allowed in ordering comparisons.
pub const ORDER_SLACK: f64 = 1e-12;
/// Tolerance of the midpoint convexity test.
pub const CONVEXITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub draws: usize,
    pub samples: usize,
    pub seed: u64,
    pub budget: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            draws: 5,
            samples: 200,
            seed: 42,
            budget: crate::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub notes: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: 0,
            failed: 0,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.notes.len() < 5 {
                self.notes.push(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub assumption: NoRiskFreeCheck,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    /// False when the assumption fails, since the suites are then skipped.
    pub fn all_passed(&self) -> bool {
        self.assumption.holds && self.suites.iter().all(SuiteResult::ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.assumption.holds {
            return writeln!(f, "assumption: FAIL, suites skipped");
        }
        writeln!(f, "assumption: PASS")?;
        for s in &self.suites {
            let verdict = if s.ok() { "PASS" } else { "FAIL" };
            writeln!(f, "{}: {verdict} ({} passed, {} failed)", s.name, s.passed, s.failed)?;
            for n in &s.notes {
                writeln!(f, "  {n}")?;
            }
        }
        Ok(())
    }
}

/// Uniform direction by rejection from the cube.
pub fn sample_direction<R: Rng>(rng: &mut R, dims: usize) -> Direction {
    loop {
        let v: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = crate::linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return Direction::new(v).expect("nonzero sample");
        }
    }
}

/// Random interior point at up to 95% of the distance to the boundary.
pub fn sample_interior<R: Rng>(matrix: &TradeMatrix, rng: &mut R) -> PortionVector {
    let theta = sample_direction(rng, matrix.cols());
    let exit = matrix
        .admissible_set()
        .ray_exit(&theta)
        .expect("direction has matrix width")
        .unwrap_or(1.0);
    theta.at(0.95 * exit * rng.random::<f64>())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Runs every suite; suites are skipped when the no-risk-free check fails.
pub fn run_verify(matrix: &TradeMatrix, config: &VerifyConfig) -> Result<VerifyReport> {
    let assumption = matrix.check_no_risk_free();
    if !assumption.holds {
        return Ok(VerifyReport {
            assumption,
            suites: Vec::new(),
        });
    }
    let game = Game::new(matrix, config.draws)?.with_budget(config.budget);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let suites = vec![
        identities(&game, config, &mut rng)?,
        ordering(&game, config, &mut rng)?,
        convexity(&game, config, &mut rng)?,
        homogeneity(&game, config, &mut rng)?,
        monotonicity(&game, config, &mut rng)?,
        small_s(&game, config, &mut rng)?,
        topping_points(&game, config, &mut rng)?,
        diagnostics(&game, config, &mut rng)?,
    ];
    Ok(VerifyReport { assumption, suites })
}

fn identities(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("identities");
    let t = game.matrix();
    for _ in 0..cfg.samples {
        let phi = sample_interior(t, rng);
        let e = game.path_expectations(&phi)?;
        let z = t.expected_log_z(&phi, game.draws())?;
        let tol = 1e-10 * z.abs().max(1.0);
        let rho = game.rho_down(&phi)?;
        suite.record(
            close(e.up + e.down, z, tol)
                && close(e.current_drawdown + e.run_up, z, tol)
                && close(e.log_twr, z, tol)
                && close(rho, -e.down, 1e-10),
            || format!("phi={:?}: E[U]+E[D]={} E[Dcur]+E[Urun]={} K logGamma={z}", phi.as_slice(), e.up + e.down, e.current_drawdown + e.run_up),
        );
    }
    Ok(suite)
}

fn ordering(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("ordering");
    let t = game.matrix();
    let le = |a: f64, b: f64| a <= b + ORDER_SLACK;
    for _ in 0..cfg.samples {
        let phi = sample_interior(t, rng);
        let Some((s, theta)) = phi.decompose() else { continue };
        let e = game.path_expectations(&phi)?;
        let d = game.d_first_approx(s, &theta)?.value;
        let dt = game.d_second_approx(s, &theta)?;
        let dc = game.d_cur_first_approx(s, &theta)?.value;
        let dct = game.d_cur_second_approx(s, &theta)?;
        let rho_down = game.rho_down(&phi)?;
        let rho_down_x = game.rho_down_x(&phi)?;
        let rho_cur = game.rho_cur(&phi)?;
        let rho_cur_x = game.rho_cur_x(&phi)?;
        let ok = le(e.down, d)
            && le(d, dt)
            && le(dt, 0.0)
            && le(e.current_drawdown, dc)
            && le(dc, dct)
            && le(dct, 0.0)
            && le(rho_down, rho_cur)
            && le(-d, rho_down)
            && le(rho_down_x, -d)
            && le(0.0, rho_down_x)
            && le(-dc, rho_cur)
            && le(rho_cur_x, -dc)
            && le(rho_down_x, rho_cur_x);
        suite.record(ok, || format!("phi={:?}: chain violated", phi.as_slice()));
    }
    Ok(suite)
}

fn convexity(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("convexity");
    let t = game.matrix();
    for _ in 0..cfg.samples {
        let a = sample_interior(t, rng);
        let b = sample_interior(t, rng);
        let mid = PortionVector::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| 0.5 * (x + y)).collect());
        for kind in MeasureKind::RISK_MEASURES {
            let (ra, rb, rm) = (game.evaluate(kind, &a)?, game.evaluate(kind, &b)?, game.evaluate(kind, &mid)?);
            suite.record(rm <= 0.5 * (ra + rb) + CONVEXITY_TOLERANCE, || {
                format!("{kind}: midpoint of {:?} and {:?} above chord", a.as_slice(), b.as_slice())
            });
        }
    }
    Ok(suite)
}

fn homogeneity(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("homogeneity");
    let t = game.matrix();
    for _ in 0..cfg.samples {
        let phi = sample_interior(t, rng);
        for kind in [MeasureKind::DownX, MeasureKind::CurX] {
            let base = game.evaluate(kind, &phi)?;
            for factor in [0.5, 2.0, 10.0] {
                let scaled = game.evaluate(kind, &phi.scaled(factor))?;
                let expected = factor * base;
                suite.record(close(scaled, expected, 1e-12 * expected.abs()), || {
                    format!("{kind}: rho({factor} phi)={scaled} vs {expected}")
                });
            }
        }
    }
    Ok(suite)
}

fn monotonicity(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("monotonicity");
    let t = game.matrix();
    for _ in 0..cfg.samples {
        let theta = sample_direction(rng, t.cols());
        let exit = t.admissible_set().ray_exit(&theta)?.unwrap_or(1.0);
        let top = 0.95 * exit;
        let gap = 1e-3_f64.min(top / 2.0);
        let s1 = rng.random::<f64>() * (top - gap);
        let s2 = s1 + gap + rng.random::<f64>() * (top - gap - s1);
        for kind in MeasureKind::RISK_MEASURES {
            let (r1, r2) = (game.evaluate(kind, &theta.at(s1))?, game.evaluate(kind, &theta.at(s2))?);
            suite.record(r2 > r1 + 1e-12, || format!("{kind}: not increasing along {:?} from {s1} to {s2}", theta.as_slice()));
        }
    }
    Ok(suite)
}

fn small_s(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("small-s");
    let t = game.matrix();
    let scale = t.as_row_major().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for _ in 0..cfg.samples {
        let theta = sample_direction(rng, t.cols());
        // The regime threshold is not known in advance; shrink s until both flags hold.
        let mut s = 1e-4 / scale;
        let (mut d, mut dc) = (game.d_first_approx(s, &theta)?, game.d_cur_first_approx(s, &theta)?);
        while !(d.small_s_regime && dc.small_s_regime) && s > 1e-12 {
            s /= 10.0;
            d = game.d_first_approx(s, &theta)?;
            dc = game.d_cur_first_approx(s, &theta)?;
        }
        let e = game.path_expectations(&theta.at(s))?;
        let u = game.u_expect(s, &theta)?;
        let ur = game.u_run_expect(s, &theta)?;
        let ok = d.small_s_regime
            && dc.small_s_regime
            && close(e.down, d.value, 1e-12)
            && close(e.current_drawdown, dc.value, 1e-12)
            && close(e.up, u.value, 1e-12)
            && close(e.run_up, ur.value, 1e-12);
        suite.record(ok, || format!("theta={:?}: small-s equality fails at s={s}", theta.as_slice()));
    }
    Ok(suite)
}

fn topping_points(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("topping-points");
    let t = game.matrix();
    for _ in 0..cfg.samples {
        let phi = sample_interior(t, rng);
        let Some((_, theta)) = phi.decompose() else { continue };
        let logs = t.interior_log_hprs(&phi)?;
        let equity = LinearEquity::new(t, theta.as_slice())?;
        let mut ok = true;
        for_each_path(t.probs(), game.draws(), game.budget(), |omega, _| {
            let star = first_topping_point(omega.iter().map(|&i| logs[i]));
            let lin = equity.topping_point(omega);
            ok &= star <= lin;
            ok &= (0..=omega.len()).all(|ell| equity.topping_conditions(omega, ell) == (ell == lin));
        })?;
        suite.record(ok, || format!("phi={:?}: topping point property fails", phi.as_slice()));
    }
    Ok(suite)
}

/// Report-only: span condition over directions and flat directions of `ρ_down`.
fn diagnostics(game: &Game<'_>, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("diagnostics");
    let t = game.matrix();
    let directions: Vec<Direction> = if t.cols() == 2 {
        (0..360)
            .map(|k| Direction::from_angle(k as f64 * std::f64::consts::PI / 180.0))
            .collect()
    } else {
        (0..cfg.samples).map(|_| sample_direction(rng, t.cols())).collect()
    };
    let mut spans = 0;
    for theta in &directions {
        spans += usize::from(span_condition(t, theta)?);
    }
    suite.notes.push(format!("span condition holds at {spans}/{} directions", directions.len()));

    let mut flat = 0;
    let mut largest: f64 = 0.0;
    for _ in 0..cfg.samples {
        let phi = sample_interior(t, rng);
        if let Some(v) = game.flat_direction(&phi)? {
            let h = 1e-4 * t.admissible_set().min_hpr(&phi)?;
            let second = game.second_difference(MeasureKind::Down, &phi, v.as_slice(), h)?;
            largest = largest.max(second.abs());
            flat += 1;
        }
        suite.passed += 1;
    }
    suite.notes.push(format!(
        "flat directions of rho_down at {flat}/{} sampled points, largest second difference {largest:e}",
        cfg.samples
    ));
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{example_t, flat_counterexample};

    #[test]
    fn example_passes_small_run() {
        let cfg = VerifyConfig {
            draws: 3,
            samples: 10,
            ..VerifyConfig::default()
        };
        let report = run_verify(&example_t(), &cfg).unwrap();
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.suites.len(), 8);
    }

    #[test]
    fn counterexample_reports_flatness() {
        let cfg = VerifyConfig {
            draws: 1,
            samples: 20,
            ..VerifyConfig::default()
        };
        let report = run_verify(&flat_counterexample(), &cfg).unwrap();
        assert!(report.all_passed(), "{report}");
        let diag = report.suites.iter().find(|s| s.name == "diagnostics").unwrap();
        assert!(!diag.notes[1].starts_with("flat directions of rho_down at 0/"));
    }

    #[test]
    fn failing_assumption_skips_suites() {
        let t = TradeMatrix::new(vec![vec![1.0], vec![2.0]], None).unwrap();
        let report = run_verify(&t, &VerifyConfig::default()).unwrap();
        assert!(!report.all_passed());
        assert!(report.suites.is_empty());
    }
}
