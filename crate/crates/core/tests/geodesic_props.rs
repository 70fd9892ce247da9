mod support;

use std::f64::consts::PI;

use proptest::prelude::*;
use zollgeo::geodesics::{
    find_period, integrate, phase_distance, self_intersections, step_geodesic, IntegrationOptions,
    MeridianPath, PeriodEstimate, PeriodOptions,
};
use zollgeo::{GeodesicState, HFunction, MetricOfRevolution};

use support::{quadratic_control, zoll_family};

fn initial() -> impl Strategy<Value = GeodesicState> {
    (0.3f64..(PI - 0.3), 0.0f64..(2.0 * PI), 0.0f64..(2.0 * PI))
        .prop_filter("away from meridians", |&(r, _, b)| {
            (r.sin() * b.cos()).abs() > 1e-2
        })
        .prop_map(|(r, t, b)| GeodesicState::new(r, t, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zoll_geodesics_return_after_two_pi(st in initial(), k in 0usize..4) {
        let m = &zoll_family()[k];
        let end = step_geodesic(m, &st, 2.0 * PI, &IntegrationOptions::default()).unwrap();
        prop_assert!(phase_distance(&end, &st) < 1e-7, "{} {st:?} -> {end:?}", m.label());
    }

    #[test]
    fn flow_is_reversible(st in initial(), ds in 0.1f64..5.0) {
        let m = MetricOfRevolution::zoll(HFunction::HalfSineExample);
        let o = IntegrationOptions::default();
        let fwd = step_geodesic(&m, &st, ds, &o).unwrap();
        let back = step_geodesic(&m, &fwd.reversed(), ds, &o).unwrap();
        prop_assert!(phase_distance(&back.reversed(), &st) < 1e-8);
    }

    #[test]
    fn invariants_hold_over_a_period(st in initial()) {
        let m = quadratic_control();
        let traj = integrate(&m, &st, 2.0 * PI, &IntegrationOptions::default()).unwrap();
        prop_assert!(traj.diagnostics.max_clairaut_drift < 1e-8);
        prop_assert!(traj.diagnostics.max_energy_drift < 1e-8);
    }

    #[test]
    fn zoll_orbits_cross_the_equator_twice(st in initial(), k in 0usize..4) {
        let m = &zoll_family()[k];
        let traj = integrate(m, &st, 2.0 * PI, &IntegrationOptions::default()).unwrap();
        prop_assert_eq!(traj.crossings_before(2.0 * PI), 2);
        prop_assert_eq!(traj.turning_points().count(), 2);
    }
}

#[test]
fn meridians_use_the_analytic_path() {
    let m = quadratic_control();
    let st = GeodesicState::new(1.0, 0.3, PI / 2.0 + 1e-6);
    let p = find_period(&m, &st, &PeriodOptions::default()).unwrap();
    assert!(
        (p.period().unwrap() - 2.0 * PI * 1.05).abs() < 1e-9,
        "{p:?}"
    );
    let traj = integrate(&m, &st, 10.0, &IntegrationOptions::default()).unwrap();
    assert!(traj.meridian);
}

#[test]
fn meridian_period_by_quadrature() {
    for m in zoll_family() {
        let l = MeridianPath::from_north_pole(&m, 0.0).period();
        assert!((l - 2.0 * PI).abs() < 1e-12, "{}: {l}", m.label());
    }
}

#[test]
fn quadratic_control_does_not_close() {
    let m = quadratic_control();
    let st = GeodesicState::new(1.0, 0.0, 0.8);
    assert!(matches!(
        find_period(&m, &st, &PeriodOptions::default()).unwrap(),
        PeriodEstimate::NotClosed { .. }
    ));
}

/// Orbits of the quadratic control with `sin t = 1/11` advance by
/// `I = 12π/11` per half oscillation, so they close after 11 oscillations.
/// As `t → 0` such orbits approach the meridian, and their periods stay
/// above twice the meridian's.
#[test]
fn periods_near_the_meridian_are_long() {
    let m = quadratic_control();
    let t = (1.0f64 / 11.0).asin();
    let st = GeodesicState::new(t, 0.0, 0.0);
    let opts = PeriodOptions {
        horizon: 80.0,
        ..PeriodOptions::default()
    };
    let p = find_period(&m, &st, &opts)
        .unwrap()
        .period()
        .expect("closes");
    let oscillation = 2.0 * PI * (1.0 + 0.05 * t.cos().powi(2));
    assert!((p - 11.0 * oscillation).abs() < 1e-6, "{p}");
    let meridian = MeridianPath::from_north_pole(&m, 0.0).period();
    assert!(p >= 2.0 * meridian);

    let traj = integrate(&m, &st, p, &opts.integration).unwrap();
    assert!(self_intersections(&traj, (0.0, p), 0.1).unwrap().count > 0);
}
