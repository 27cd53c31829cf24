//! Brute-force oracles that share no code with the library.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const T_ROWS: [[f64; 2]; 4] = [[1.0, 1.0], [-0.5, 1.0], [1.0, -2.0], [-0.5, -2.0]];
pub const T_PROBS: [f64; 4] = [0.375, 0.375, 0.125, 0.125];

pub fn rows_of(t: &[[f64; 2]]) -> Vec<Vec<f64>> {
    t.iter().map(|r| r.to_vec()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn hpr(rows: &[Vec<f64>], phi: &[f64], i: usize) -> f64 {
    1.0 + dot(&rows[i], phi)
}

/// Distance to the boundary of the admissible set along a unit vector.
pub fn exit_step(rows: &[Vec<f64>], theta: &[f64]) -> f64 {
    rows.iter()
        .map(|r| dot(r, theta))
        .filter(|&a| a < 0.0)
        .map(|a| -1.0 / a)
        .fold(f64::INFINITY, f64::min)
}

pub fn unit_direction(rng: &mut ChaCha8Rng, dims: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Interior point at up to 95% of the way to the boundary.
pub fn interior_point(rng: &mut ChaCha8Rng, rows: &[Vec<f64>]) -> Vec<f64> {
    let theta = unit_direction(rng, rows[0].len());
    let s = 0.95 * exit_step(rows, &theta).min(10.0) * rng.random::<f64>();
    theta.iter().map(|x| s * x).collect()
}

/// Visits all `N^K` paths by decoding base-`N` integers.
pub fn for_paths(probs: &[f64], k: usize, mut f: impl FnMut(&[usize], f64)) {
    let n = probs.len();
    let total = n.pow(k as u32);
    let mut omega = vec![0; k];
    for code in 0..total {
        let mut c = code;
        let mut prob = 1.0;
        for j in (0..k).rev() {
            omega[j] = c % n;
            c /= n;
        }
        for &i in &omega {
            prob *= probs[i];
        }
        f(&omega, prob);
    }
}

/// Expectations of the log series from products of HPRs.
#[derive(Debug, Default, Clone, Copy)]
pub struct Oracle {
    pub log_twr: f64,
    pub up: f64,
    pub down: f64,
    pub cur: f64,
    pub run: f64,
}

pub fn brute(rows: &[Vec<f64>], probs: &[f64], phi: &[f64], k: usize) -> Oracle {
    let mut o = Oracle::default();
    for_paths(probs, k, |omega, p| {
        let twr: f64 = omega.iter().map(|&i| hpr(rows, phi, i)).product();
        let lt = twr.ln();
        o.log_twr += p * lt;
        o.up += p * lt.max(0.0);
        o.down += p * lt.min(0.0);
        let mut worst: f64 = 0.0;
        let mut best: f64 = 0.0;
        for l in 0..k {
            let tail: f64 = omega[l..].iter().map(|&i| hpr(rows, phi, i)).product();
            worst = worst.min(tail.ln());
            let head: f64 = omega[..=l].iter().map(|&i| hpr(rows, phi, i)).product();
            best = best.max(head.ln());
        }
        o.cur += p * worst;
        o.run += p * best;
    });
    o
}

pub fn log_gamma(rows: &[Vec<f64>], probs: &[f64], phi: &[f64]) -> f64 {
    (0..rows.len()).map(|i| probs[i] * hpr(rows, phi, i).ln()).sum()
}

/// First index attaining the maximum of `values`, provided it is positive.
pub fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0.0;
    let mut at = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > best + 1e-14 {
            best = v;
            at = j + 1;
        }
    }
    at
}

/// Linear equity prefixes with vector-summed rows.
pub fn linear_prefixes(rows: &[Vec<f64>], theta: &[f64], omega: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; theta.len()];
    omega
        .iter()
        .map(|&i| {
            for (a, t) in acc.iter_mut().zip(&rows[i]) {
                *a += t;
            }
            dot(&acc, theta)
        })
        .collect()
}

pub fn twr_prefixes(rows: &[Vec<f64>], phi: &[f64], omega: &[usize]) -> Vec<f64> {
    let mut twr = 1.0;
    omega
        .iter()
        .map(|&i| {
            twr *= hpr(rows, phi, i);
            twr.ln()
        })
        .collect()
}

/// Path form of the two first approximations: the down-trade one charges the
/// log of paths whose linear equity ends `<= 0`, the current-drawdown one
/// charges the log increments after the linear topping point.
pub fn first_approximations(rows: &[Vec<f64>], probs: &[f64], k: usize, s: f64, theta: &[f64]) -> (f64, f64) {
    let mut d = 0.0;
    let mut d_cur = 0.0;
    for_paths(probs, k, |omega, p| {
        let lin = linear_prefixes(rows, theta, omega);
        let logs: Vec<f64> = omega.iter().map(|&i| (1.0 + s * dot(&rows[i], theta)).ln()).collect();
        if lin[k - 1] <= 0.0 {
            d += p * logs.iter().sum::<f64>();
        }
        let top = first_argmax(&lin);
        d_cur += p * logs[top..].iter().sum::<f64>();
    });
    (d, d_cur)
}

/// Path form of the linear masses behind the X measures.
pub fn linear_masses(rows: &[Vec<f64>], probs: &[f64], k: usize, theta: &[f64]) -> (f64, f64) {
    let mut down = 0.0;
    let mut cur = 0.0;
    for_paths(probs, k, |omega, p| {
        let lin = linear_prefixes(rows, theta, omega);
        down += p * lin[k - 1].min(0.0);
        let top = first_argmax(&lin);
        let before = if top == 0 { 0.0 } else { lin[top - 1] };
        cur += p * (lin[k - 1] - before);
    });
    (down, cur)
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let m = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else {
            break;
        };
        if a[p][c].abs() <= 1e-10 * scale {
            continue;
        }
        a.swap(r, p);
        for i in r + 1..a.len() {
            let f = a[i][c] / a[r][c];
            for j in c..m {
                a[i][j] -= f * a[r][j];
            }
        }
        r += 1;
    }
    r
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Seeded markets cycling through generic, duplicated-asset, dominant-asset
/// and short-scenario shapes so every leg of the equivalence is exercised.
pub fn random_market(rng: &mut ChaCha8Rng, shape: usize) -> twr_risk::OnePeriodMarket {
    let m = rng.random_range(1..=3usize);
    let n = if shape % 4 == 3 { m.saturating_sub(1).max(1) } else { rng.random_range(m + 1..=m + 3) };
    let rate = 1.0 + 0.1 * rng.random::<f64>();
    let initial: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut scenarios: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            initial
                .iter()
                .map(|s| s * rate * (1.0 + rng.random_range(-0.9..1.0)))
                .collect()
        })
        .collect();
    match shape % 4 {
        1 if m >= 2 => {
            for row in &mut scenarios {
                row[1] = row[0] * initial[1] / initial[0];
            }
        }
        2 => {
            for row in &mut scenarios {
                row[0] = initial[0] * rate * (1.0 + rng.random_range(0.05..1.0));
            }
        }
        _ => {}
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    twr_risk::OnePeriodMarket::new(rate, initial, scenarios, Some(probs)).expect("generated market is valid")
}

/// `(no arbitrage, no risk-free direction, full rank)` checked independently.
pub fn market_legs(market: &twr_risk::OnePeriodMarket) -> [bool; 3] {
    let cols = market.asset_count();
    let excess: Vec<Vec<f64>> = market.excess_payoffs().chunks(cols).map(<[f64]>::to_vec).collect();
    [
        market.search_arbitrage().is_none(),
        market.build_trade_matrix().unwrap().check_no_risk_free().holds,
        rank(&excess) == cols,
    ]
}
