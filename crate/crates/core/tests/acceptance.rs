//! One line per acceptance criterion; exits nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use twr_risk::measures::span_condition;
use twr_risk::paths::{enumerate_counts, LinearEquity};
use twr_risk::reference::{example_t, example_t_market, flat_counterexample, FLAT_DIRECTION};
use twr_risk::surface::converge;
use twr_risk::{Direction, Game, MeasureKind, PathEvaluator, Portfolio, PortionVector, TradeMatrix, DEFAULT_BUDGET};

type Outcome = Result<(), String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn pv(v: &[f64]) -> PortionVector {
    PortionVector::new(v.to_vec())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn points(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let rows = rows_of(&T_ROWS);
    let mut r = rng(seed);
    (0..count).map(|_| interior_point(&mut r, &rows)).collect()
}

fn sum_identities(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    for k in 1..=5 {
        let game = Game::new(t, k).map_err(|e| e.to_string())?;
        for p in points(101, 25) {
            let e = game.path_expectations(&pv(&p)).map_err(|e| e.to_string())?;
            let target = k as f64 * log_gamma(&rows, &T_PROBS, &p);
            let tol = 1e-10 * target.abs().max(1.0);
            ensure(close(e.up + e.down, target, tol), || format!("K={k} phi={p:?}: E[U]+E[D] off"))?;
            ensure(close(e.current_drawdown + e.run_up, target, tol), || {
                format!("K={k} phi={p:?}: E[D_cur]+E[U_run] off")
            })?;
        }
    }
    Ok(())
}

fn multinomial_identity() -> Outcome {
    for k in 1..=6 {
        let mut moments = [0.0; 4];
        for c in enumerate_counts(&T_PROBS, k, DEFAULT_BUDGET).map_err(|e| e.to_string())? {
            for (m, &x) in moments.iter_mut().zip(&c.counts) {
                *m += c.weight * x as f64;
            }
        }
        for n in 0..4 {
            let want = T_PROBS[n] * k as f64;
            ensure(close(moments[n], want, 1e-12), || format!("K={k} n={n}: {} vs {want}", moments[n]))?;
        }
    }
    Ok(())
}

fn count_form_matches_paths(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    for k in 1..=5 {
        let game = Game::new(t, k).map_err(|e| e.to_string())?;
        for p in points(103, 25) {
            let got = game.rho_down(&pv(&p)).map_err(|e| e.to_string())?;
            let want = -brute(&rows, &T_PROBS, &p, k).down;
            ensure(close(got, want, 1e-10), || format!("K={k} phi={p:?}: {got} vs {want}"))?;
        }
    }
    Ok(())
}

fn small_s_equalities(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    let mut r = rng(104);
    let s = 1e-4;
    let directions: Vec<Vec<f64>> = (0..64).map(|_| unit_direction(&mut r, 2)).collect();
    for k in 1..=4 {
        let game = Game::new(t, k).map_err(|e| e.to_string())?;
        for (j, theta) in directions.iter().enumerate() {
            let dir = Direction::new(theta.clone()).map_err(|e| e.to_string())?;
            let p: Vec<f64> = theta.iter().map(|v| s * v).collect();
            let o = brute(&rows, &T_PROBS, &p, k);
            let d = game.d_first_approx(s, &dir).map_err(|e| e.to_string())?;
            let dc = game.d_cur_first_approx(s, &dir).map_err(|e| e.to_string())?;
            ensure(d.small_s_regime && dc.small_s_regime, || {
                format!("K={k} direction {j}: sign patterns differ at s={s}")
            })?;
            ensure(close(d.value, o.down, 1e-12), || format!("K={k} direction {j}: d={} E[D]={}", d.value, o.down))?;
            ensure(close(dc.value, o.cur, 1e-12), || {
                format!("K={k} direction {j}: d_cur={} E[D_cur]={}", dc.value, o.cur)
            })?;
        }
    }
    Ok(())
}

fn ordering_chains(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    let game = Game::new(t, 5).map_err(|e| e.to_string())?;
    let slack = 1e-12;
    for p in points(105, 200) {
        let phi = pv(&p);
        let Some((s, theta)) = phi.decompose() else { continue };
        let o = brute(&rows, &T_PROBS, &p, 5);
        let err = |e: twr_risk::RiskError| e.to_string();
        let d = game.d_first_approx(s, &theta).map_err(err)?.value;
        let d2 = game.d_second_approx(s, &theta).map_err(err)?;
        let dc = game.d_cur_first_approx(s, &theta).map_err(err)?.value;
        let dc2 = game.d_cur_second_approx(s, &theta).map_err(err)?;
        ensure(o.down <= d + slack && d <= d2 + slack && d2 <= slack, || {
            format!("phi={p:?}: E[D]={} d={d} d2={d2}", o.down)
        })?;
        ensure(o.cur <= dc + slack && dc <= dc2 + slack && dc2 <= slack, || {
            format!("phi={p:?}: E[D_cur]={} d_cur={dc} d2_cur={dc2}", o.cur)
        })?;
        let down = game.rho_down(&phi).map_err(err)?;
        let cur = game.rho_cur(&phi).map_err(err)?;
        let down_x = game.rho_down_x(&phi).map_err(err)?;
        let cur_x = game.rho_cur_x(&phi).map_err(err)?;
        ensure(cur >= down - slack, || format!("phi={p:?}: rho_cur={cur} < rho_down={down}"))?;
        ensure(cur_x >= down_x - slack, || format!("phi={p:?}: rho_curX={cur_x} < rho_downX={down_x}"))?;
    }
    Ok(())
}

fn acrm_axioms(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    let game = Game::new(t, 5).map_err(|e| e.to_string())?;
    let err = |e: twr_risk::RiskError| e.to_string();
    let nonneg = points(106, 10_000);
    let mut r = rng(107);
    let segments: Vec<(Vec<f64>, Vec<f64>)> = (0..1000)
        .map(|_| (interior_point(&mut r, &rows), interior_point(&mut r, &rows)))
        .collect();
    let rays: Vec<Vec<f64>> = (0..64).map(|_| unit_direction(&mut r, 2)).collect();
    for kind in MeasureKind::RISK_MEASURES {
        ensure(game.evaluate(kind, &pv(&[0.0, 0.0])).map_err(err)? == 0.0, || format!("{kind}: value at 0"))?;
        for p in &nonneg {
            let v = game.evaluate(kind, &pv(p)).map_err(err)?;
            ensure(v >= 0.0, || format!("{kind}: negative value {v} at {p:?}"))?;
        }
        for (a, b) in &segments {
            let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
            let fa = game.evaluate(kind, &pv(a)).map_err(err)?;
            let fb = game.evaluate(kind, &pv(b)).map_err(err)?;
            let fm = game.evaluate(kind, &pv(&mid)).map_err(err)?;
            ensure(fm <= 0.5 * (fa + fb) + 1e-9, || format!("{kind}: midpoint convexity fails on {a:?}, {b:?}"))?;
        }
        for theta in &rays {
            let steps = 20;
            let ds = 0.95 * exit_step(&rows, theta) / steps as f64;
            let mut prev = 0.0;
            for j in 1..=steps {
                let s = j as f64 * ds;
                let v = game.evaluate(kind, &pv(&[s * theta[0], s * theta[1]])).map_err(err)?;
                ensure(ds >= 1e-3 && v > prev + 1e-12, || {
                    format!("{kind}: not strictly increasing along {theta:?} at s={s}")
                })?;
                prev = v;
            }
        }
    }
    Ok(())
}

fn homogeneity(t: &TradeMatrix) -> Outcome {
    let game = Game::new(t, 5).map_err(|e| e.to_string())?;
    for p in points(108, 100) {
        let phi = pv(&p);
        for kind in [MeasureKind::DownX, MeasureKind::CurX] {
            let base = game.evaluate(kind, &phi).map_err(|e| e.to_string())?;
            for f in [0.5, 2.0, 10.0] {
                let v = game.evaluate(kind, &phi.scaled(f)).map_err(|e| e.to_string())?;
                ensure((v - f * base).abs() <= 1e-12 * (f * base).abs(), || {
                    format!("{kind} at {p:?}, factor {f}: {v} vs {}", f * base)
                })?;
            }
        }
    }
    Ok(())
}

fn single_draw_collapse(t: &TradeMatrix) -> Outcome {
    let game = Game::new(t, 1).map_err(|e| e.to_string())?;
    let err = |e: twr_risk::RiskError| e.to_string();
    for p in points(109, 100) {
        let phi = pv(&p);
        let (down, cur) = (game.rho_down(&phi).map_err(err)?, game.rho_cur(&phi).map_err(err)?);
        let (dx, cx) = (game.rho_down_x(&phi).map_err(err)?, game.rho_cur_x(&phi).map_err(err)?);
        ensure(close(down, cur, 1e-12), || format!("phi={p:?}: rho_cur={cur} rho_down={down}"))?;
        ensure(close(dx, cx, 1e-12), || format!("phi={p:?}: rho_curX={cx} rho_downX={dx}"))?;
    }
    Ok(())
}

fn topping_points(t: &TradeMatrix) -> Outcome {
    let rows = rows_of(&T_ROWS);
    for p in points(110, 10) {
        let phi = pv(&p);
        let Some((_, theta)) = phi.decompose() else { continue };
        let equity = LinearEquity::new(t, theta.as_slice()).map_err(|e| e.to_string())?;
        let ev = PathEvaluator::new(t, &phi).map_err(|e| e.to_string())?;
        let mut failure = None;
        let mut paths = 0;
        for_paths(&T_PROBS, 5, |omega, _| {
            paths += 1;
            let star = first_argmax(&twr_prefixes(&rows, &p, omega));
            let hat = first_argmax(&linear_prefixes(&rows, theta.as_slice(), omega));
            let ok = ev.topping_point(omega) == star
                && equity.topping_point(omega) == hat
                && star <= hat
                && (0..=5).all(|ell| equity.topping_conditions(omega, ell) == (ell == hat));
            if !ok && failure.is_none() {
                failure = Some(format!("phi={p:?} omega={omega:?}: l*={star} l^*={hat}"));
            }
        });
        ensure(paths == 1024, || format!("visited {paths} paths"))?;
        if let Some(f) = failure {
            return Err(f);
        }
    }
    Ok(())
}

fn discontinuity_witness(t: &TradeMatrix) -> Outcome {
    let game = Game::new(t, 5).map_err(|e| e.to_string())?;
    let err = |e: twr_risk::RiskError| e.to_string();
    // Rows 1 and 3 drawn (2, 3) times sum to (5, -4); θ0 is orthogonal to it.
    let base = (5.0f64).atan2(4.0);
    let rotated = |delta: f64| Direction::from_angle(base + delta);
    let theta0 = rotated(0.0);
    let exit = t.admissible_set().ray_exit(&theta0).map_err(err)?.ok_or("unbounded ray")?;
    let s = 0.9 * exit;
    let (plus, minus) = (rotated(1e-9), rotated(-1e-9));
    let d_plus = game.d_first_approx(s, &plus).map_err(err)?.value;
    let d_minus = game.d_first_approx(s, &minus).map_err(err)?.value;
    let x_plus = game.rho_down_x(&plus.at(s)).map_err(err)?;
    let x_minus = game.rho_down_x(&minus.at(s)).map_err(err)?;
    let jump = (d_plus - d_minus).abs();
    ensure(jump > 1e-6, || format!("d jump {jump} too small"))?;
    ensure((x_plus - x_minus).abs() < 1e-6, || format!("rho_downX differs by {}", (x_plus - x_minus).abs()))
}

fn flat_counterexample_and_span() -> Outcome {
    let flat = flat_counterexample();
    let game = Game::new(&flat, 1).map_err(|e| e.to_string())?;
    let second = game
        .second_difference(MeasureKind::Down, &pv(&[0.1, 0.1]), &FLAT_DIRECTION, 0.05)
        .map_err(|e| e.to_string())?;
    ensure(second.abs() < 1e-12, || format!("second difference {second}"))?;
    let t = example_t();
    for k in 0..360 {
        let theta = Direction::from_angle(k as f64 * std::f64::consts::PI / 180.0);
        ensure(span_condition(&t, &theta).map_err(|e| e.to_string())?, || format!("span fails at {k} degrees"))?;
    }
    Ok(())
}

fn market_bridge() -> Outcome {
    let mut r = rng(112);
    for k in 0..20 {
        let market = random_market(&mut r, k);
        let legs = market_legs(&market);
        if legs.iter().filter(|&&l| l).count() >= 2 {
            ensure(legs == [true; 3], || format!("market {k}: legs {legs:?}"))?;
        }
    }
    let m = example_t_market();
    let t = m.build_trade_matrix().map_err(|e| e.to_string())?;
    let rows = rows_of(&T_ROWS);
    for _ in 0..100 {
        let p = interior_point(&mut r, &rows);
        let x = m.portions_to_portfolio(&pv(&p)).map_err(|e| e.to_string())?;
        let cost = m.cost(&x).map_err(|e| e.to_string())?;
        ensure(close(cost, 1.0, 1e-12), || format!("cost {cost}"))?;
        let back = m.portfolio_to_portions(&x).map_err(|e| e.to_string())?;
        ensure(back.as_slice().iter().zip(&p).all(|(a, b)| close(*a, *b, 1e-12)), || format!("round trip at {p:?}"))?;
        let again = m.portions_to_portfolio(&back).map_err(|e| e.to_string())?;
        ensure(again.0.iter().zip(&x.0).all(|(a, b)| close(*a, *b, 1e-12)), || format!("x round trip at {p:?}"))?;
        let u = m.log_utility(&Portfolio(x.0.clone())).map_err(|e| e.to_string())?;
        let g = t.log_gamma(&pv(&p)).map_err(|e| e.to_string())?;
        ensure(close(u, g, 1e-12) && close(g, log_gamma(&rows, &T_PROBS, &p), 1e-12), || {
            format!("log utility {u} vs log gamma {g}")
        })?;
    }
    Ok(())
}

fn convergence_series(t: &TradeMatrix) -> Outcome {
    let p = [0.2, 0.2];
    let start = Instant::now();
    let series = converge(t, &pv(&p), 8, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    ensure(series.len() == 8, || format!("{} rows", series.len()))?;
    let rows = rows_of(&T_ROWS);
    for point in &series {
        let want = -brute(&rows, &T_PROBS, &p, point.draws).cur;
        ensure(close(point.value, want, 1e-10), || format!("K={}: {} vs {want}", point.draws, point.value))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let t = example_t();
    let criteria: Vec<Criterion> = vec![
        ("sum identities", Box::new(|| sum_identities(&t))),
        ("multinomial identity", Box::new(multinomial_identity)),
        ("count form equals path enumeration", Box::new(|| count_form_matches_paths(&t))),
        ("small-s equalities", Box::new(|| small_s_equalities(&t))),
        ("upper-bound and ordering chains", Box::new(|| ordering_chains(&t))),
        ("risk measure axioms", Box::new(|| acrm_axioms(&t))),
        ("positive homogeneity", Box::new(|| homogeneity(&t))),
        ("single-draw collapse", Box::new(|| single_draw_collapse(&t))),
        ("topping points", Box::new(|| topping_points(&t))),
        ("discontinuity witness", Box::new(|| discontinuity_witness(&t))),
        ("flat counterexample and span diagnostic", Box::new(flat_counterexample_and_span)),
        ("market bridge", Box::new(market_bridge)),
        ("convergence series", Box::new(|| convergence_series(&t))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("criterion {}: PASS ({name}, {:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL ({name}): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: {} of {} criteria pass", criteria.len(), criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria fail", criteria.len());
        ExitCode::FAILURE
    }
}
