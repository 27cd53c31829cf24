mod common;

use common::*;
use twr_risk::reference::example_t;
use twr_risk::{Certificate, Membership, PortionVector, RiskError, TradeMatrix};

fn phi(v: &[f64]) -> PortionVector {
    PortionVector::new(v.to_vec())
}

#[test]
fn hprs_match_direct_evaluation() {
    let t = example_t();
    let rows = rows_of(&T_ROWS);
    let p = [0.2, 0.2];
    let got = t.hprs(&phi(&p)).unwrap();
    let want: Vec<f64> = (0..4).map(|i| hpr(&rows, &p, i)).collect();
    assert_eq!(got, want);
    for (g, w) in got.iter().zip([1.4, 1.1, 0.8, 0.5]) {
        assert!(close(*g, w, 1e-15));
    }
    assert!(matches!(t.hpr(&phi(&p), 4), Err(RiskError::IndexOutOfRange { .. })));
}

#[test]
fn membership_examples() {
    let set_owner = example_t();
    let g = set_owner.admissible_set();
    assert_eq!(g.membership(&phi(&[0.0, 0.0])).unwrap(), Membership::Interior);
    assert_eq!(g.membership(&phi(&[0.2, 0.2])).unwrap(), Membership::Interior);
    assert_eq!(g.membership(&phi(&[0.0, 0.5])).unwrap(), Membership::Boundary);
    assert_eq!(g.membership(&phi(&[2.0, 1.0])).unwrap(), Membership::Outside);
    assert!(g.membership(&phi(&[0.1])).is_err());
}

#[test]
fn ray_exit_matches_half_spaces() {
    let t = example_t();
    let rows = rows_of(&T_ROWS);
    let mut r = rng(7);
    for _ in 0..50 {
        let theta = unit_direction(&mut r, 2);
        let d = twr_risk::Direction::new(theta.clone()).unwrap();
        let exit = t.admissible_set().ray_exit(&d).unwrap().unwrap();
        assert!(close(exit, exit_step(&rows, &theta), 1e-12 * exit.max(1.0)));
    }
}

#[test]
fn stiemke_certificate_for_example_t() {
    let check = example_t().check_no_risk_free();
    assert!(check.holds);
    assert_eq!(check.rank, 2);
    let Certificate::PositiveKernel(y) = check.certificate else {
        panic!("expected a positive kernel certificate");
    };
    assert_eq!(y, vec![1.0, 3.0, 1.0, 1.0]);
    for c in 0..2 {
        let s: f64 = (0..4).map(|i| y[i] * T_ROWS[i][c]).sum();
        assert!(s.abs() < 1e-12);
    }
}

#[test]
fn all_positive_column_has_risk_free_direction() {
    let t = TradeMatrix::new(vec![vec![1.0], vec![2.0]], None).unwrap();
    let check = t.check_no_risk_free();
    assert!(!check.holds);
    assert_eq!(check.certificate, Certificate::RiskFreeDirection(vec![1.0]));
}

#[test]
fn rank_deficient_matrix_fails() {
    let t = TradeMatrix::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], None).unwrap();
    let check = t.check_no_risk_free();
    assert!(!check.holds);
    assert_eq!(check.rank, 1);
}

#[test]
fn gamma_matches_product_oracle() {
    let t = example_t();
    let rows = rows_of(&T_ROWS);
    assert_eq!(t.gamma_mean(&phi(&[0.0, 0.0])).unwrap(), 1.0);
    let p = [0.1, 0.1];
    let product = 1.2f64.powf(0.375) * 1.05f64.powf(0.375) * 0.9f64.powf(0.125) * 0.75f64.powf(0.125);
    assert!(close(t.gamma_mean(&phi(&p)).unwrap(), product, 1e-14));
    assert!(close(t.log_gamma(&phi(&p)).unwrap(), log_gamma(&rows, &T_PROBS, &p), 1e-15));
    assert!(close(product, 1.0382500, 1e-6));
}

#[test]
fn expected_log_z_matches_path_oracle() {
    let t = example_t();
    let rows = rows_of(&T_ROWS);
    assert_eq!(t.expected_log_z(&phi(&[0.0, 0.0]), 3).unwrap(), 0.0);
    for (p, k) in [([0.1, 0.1], 5), ([0.1, 0.1], 1), ([0.2, 0.2], 4)] {
        let want = brute(&rows, &T_PROBS, &p, k).log_twr;
        assert!(close(t.expected_log_z(&phi(&p), k).unwrap(), want, 1e-12));
    }
    let five = t.expected_log_z(&phi(&[0.1, 0.1]), 5).unwrap();
    assert!(close(five, 0.1876829, 1e-6));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(TradeMatrix::new(vec![], None).is_err());
    assert!(TradeMatrix::new(vec![vec![1.0], vec![1.0, 2.0]], None).is_err());
    assert!(TradeMatrix::new(vec![vec![1.0], vec![-1.0]], Some(vec![0.5, 0.6])).is_err());
    assert!(TradeMatrix::new(vec![vec![1.0], vec![-1.0]], Some(vec![1.5, -0.5])).is_err());
    assert!(TradeMatrix::new(vec![vec![f64::NAN], vec![-1.0]], None).is_err());
    assert!(example_t().log_gamma(&phi(&[0.0, 0.5])).is_err());
}
