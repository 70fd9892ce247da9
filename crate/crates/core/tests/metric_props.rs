use std::f64::consts::PI;

use proptest::prelude::*;
use zollgeo::metric::{DescentVerdict, ViolationKind};
use zollgeo::{EvenPerturbation, HFunction, MetricOfRevolution};

#[test]
fn cone_point_polynomial_is_flagged_but_usable() {
    // h(±1) = ±0.2: the endpoint condition fails, the profile stays positive.
    let m = MetricOfRevolution::zoll(HFunction::OddPolynomial(vec![0.3, -0.1]));
    let rep = m.validate(1001).unwrap();
    assert!(rep.has(ViolationKind::Endpoint));
    assert!(!rep.has(ViolationKind::Positivity) && !rep.has(ViolationKind::Range));
    assert!(m.sectional_curvature(1.0).is_ok());
}

#[test]
fn trig_example_curvature_grows_towards_the_poles() {
    let m = MetricOfRevolution::zoll(HFunction::TrigExample { k: 1 });
    let a = m.sectional_curvature(1e-2).unwrap();
    let b = m.sectional_curvature(1e-3).unwrap();
    assert!(b > 5.0 * a && a > 100.0, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_matches_finite_differences(k in 0u32..3, r in 0.05f64..(PI - 0.05)) {
        for h in [HFunction::HalfSineExample, HFunction::TrigExample { k }, HFunction::OddPolynomial(vec![0.2, -0.05])] {
            let m = MetricOfRevolution::zoll(h);
            let exact = m.sectional_curvature(r).unwrap();
            let fd = m.numerical_gauss_curvature(r, 1e-5).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-2), "{} r = {r}: {exact} vs {fd}", m.label());
        }
    }

    #[test]
    fn even_perturbations_descend(e in prop::collection::vec(-0.2f64..0.2, 1..4)) {
        let m = MetricOfRevolution::new(HFunction::Zero, EvenPerturbation::new(e));
        prop_assert!(m.rp2_descent_check().descends());
    }

    #[test]
    fn nonzero_odd_part_obstructs(a in prop::collection::vec(-0.2f64..0.2, 1..4)) {
        prop_assume!(a.iter().any(|c| c.abs() > 1e-3));
        let m = MetricOfRevolution::zoll(HFunction::OddPolynomial(a));
        let obstructed = matches!(m.rp2_descent_check(), DescentVerdict::Obstructed { .. });
        prop_assert!(obstructed);
    }

    #[test]
    fn balanced_odd_polynomials_validate(a in prop::collection::vec(-0.15f64..0.15, 1..4)) {
        // force h(1) = 0 by balancing the last coefficient
        let mut a = a;
        let s: f64 = a.iter().sum();
        a.push(-s);
        let m = MetricOfRevolution::zoll(HFunction::OddPolynomial(a));
        let rep = m.validate(501).unwrap();
        prop_assert!(rep.is_valid(), "{:?}", rep.violations);
    }

    #[test]
    fn f_is_even_plus_odd(u in -1.0f64..1.0, k in 1u32..4) {
        let m = MetricOfRevolution::new(HFunction::TrigExample { k }, EvenPerturbation::new(vec![0.05]));
        let even = 0.5 * (m.eval_f(u).unwrap() + m.eval_f(-u).unwrap());
        prop_assert!((even - (1.0 + 0.05 * u * u)).abs() < 1e-14);
    }
}
