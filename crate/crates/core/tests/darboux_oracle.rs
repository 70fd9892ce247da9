mod support;

use std::f64::consts::PI;

use proptest::prelude::*;
use zollgeo::darboux::{
    darboux_integral, darboux_integral_checked, scan, uniform_t_grid, ScanOptions,
};
use zollgeo::{HFunction, MetricOfRevolution};

use support::{quadratic_control, quadratic_control_darboux, raw_darboux, zoll_family};

#[test]
fn oracle_reproduces_closed_forms() {
    let round = MetricOfRevolution::round();
    for t in [0.02, 0.5, 1.4] {
        assert!((raw_darboux(&round, t) - PI).abs() < 1e-10, "t = {t}");
        let e = quadratic_control();
        assert!(
            (raw_darboux(&e, t) - quadratic_control_darboux(t)).abs() < 1e-10,
            "t = {t}"
        );
    }
}

#[test]
fn quadratic_control_values_differ_and_match_oracle() {
    let m = quadratic_control();
    let vals: Vec<f64> = [0.3, 0.6, 1.2]
        .iter()
        .map(|&t| {
            let v = darboux_integral(&m, t, 128).unwrap();
            assert!((v - raw_darboux(&m, t)).abs() < 1e-8);
            v
        })
        .collect();
    assert!(vals.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-3));
}

#[test]
fn half_sine_example() {
    let m = MetricOfRevolution::zoll(HFunction::HalfSineExample);
    let v = darboux_integral(&m, 0.3, 128).unwrap();
    assert!((v - PI).abs() < 1e-10);
    assert!((v - raw_darboux(&m, 0.3)).abs() < 1e-10);
}

#[test]
fn node_doubling_converges() {
    let mut metrics = zoll_family();
    metrics.push(quadratic_control());
    for m in &metrics {
        for t in [0.02, 0.4, 1.3] {
            let deltas: Vec<f64> = [8, 16, 32, 64, 128]
                .iter()
                .map(|&n| darboux_integral_checked(m, t, n).unwrap().refinement_delta)
                .collect();
            assert!(deltas[4] < 1e-12, "{} t = {t}: {deltas:?}", m.label());
            // monotone until the rounding floor
            for w in deltas.windows(2) {
                assert!(
                    w[1] <= w[0] || w[1] < 1e-13,
                    "{} t = {t}: {deltas:?}",
                    m.label()
                );
            }
        }
    }
}

#[test]
fn scan_rotation_numbers() {
    let grid = uniform_t_grid(50);
    let s = scan(&MetricOfRevolution::round(), &grid, &ScanOptions::default()).unwrap();
    assert!(s.points.iter().all(|p| (p.value - PI).abs() < 1e-12));
    assert_eq!(s.rotation.to_string(), "1/1");
    let s = scan(&quadratic_control(), &grid, &ScanOptions::default()).unwrap();
    assert_eq!(s.rotation.to_string(), "non-constant");
    assert!(s.points.iter().all(|p| p.value > 0.0));
}

fn odd_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.2f64..0.2, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn odd_part_is_annihilated(a in odd_coeffs(), t in 0.01f64..1.56) {
        let h = MetricOfRevolution::zoll(HFunction::OddPolynomial(a));
        let round = MetricOfRevolution::round();
        let diff = darboux_integral(&h, t, 128).unwrap() - darboux_integral(&round, t, 128).unwrap();
        prop_assert!(diff.abs() < 1e-10);
    }

    #[test]
    fn sign_of_h_is_irrelevant(a in odd_coeffs(), t in 0.01f64..1.56) {
        let neg: Vec<f64> = a.iter().map(|c| -c).collect();
        let plus = darboux_integral(&MetricOfRevolution::zoll(HFunction::OddPolynomial(a)), t, 128).unwrap();
        let minus = darboux_integral(&MetricOfRevolution::zoll(HFunction::OddPolynomial(neg)), t, 128).unwrap();
        prop_assert!((plus - minus).abs() < 1e-12);
    }

    #[test]
    fn transformed_matches_raw(k in 0usize..5, t in 0.02f64..1.5) {
        let mut metrics = zoll_family();
        metrics.push(quadratic_control());
        let m = &metrics[k];
        prop_assert!((darboux_integral(m, t, 128).unwrap() - raw_darboux(m, t)).abs() < 1e-8);
    }
}
