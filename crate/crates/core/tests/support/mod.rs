//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use zollgeo::geodesics::StepRecord;
use zollgeo::{EvenPerturbation, HFunction, MetricOfRevolution};

/// Adaptive Simpson on `[a, b]` with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_t^{π-t} f(cos r) sin t / (sin r √(sin²r − sin²t)) dr` in its raw form.
///
/// Both halves are folded onto `r = t + w²` (the upper half via
/// `r ↦ π − r`), which weakens the inverse square roots: with
/// `sin²r − sin²t = sin(w²) sin(2t + w²)` the factor `2w / √(sin w²)` tends
/// to 2 at `w = 0`.
pub fn raw_darboux(m: &MetricOfRevolution, t: f64) -> f64 {
    let st = t.sin();
    let g = |w: f64| {
        let w2 = w * w;
        let weak = if w == 0.0 {
            2.0
        } else {
            2.0 * w / w2.sin().sqrt()
        };
        let r = t + w2;
        let u = r.cos();
        let f = m.eval_f(u).unwrap() + m.eval_f(-u).unwrap();
        weak * f * st / (r.sin() * (2.0 * t + w2).sin().sqrt())
    };
    let top = (PI / 2.0 - t).sqrt();
    // split near w = 0 where the remaining factor varies on the scale √t
    let knee = (2.0 * t).sqrt().min(top);
    adaptive_simpson(&g, 0.0, knee, 1e-14) + adaptive_simpson(&g, knee, top, 1e-14)
}

/// The metrics the Darboux and period criteria are checked on.
pub fn zoll_family() -> Vec<MetricOfRevolution> {
    vec![
        MetricOfRevolution::round(),
        MetricOfRevolution::zoll(HFunction::HalfSineExample),
        MetricOfRevolution::zoll(HFunction::TrigExample { k: 1 }),
        MetricOfRevolution::zoll(HFunction::OddPolynomial(vec![0.3, -0.1])),
    ]
}

/// `f = 1 + u²/10`: a metric of revolution that is not Zoll.
pub fn quadratic_control() -> MetricOfRevolution {
    MetricOfRevolution::new(HFunction::Zero, EvenPerturbation::new(vec![0.1]))
}

/// Closed form of the Darboux integral for [`quadratic_control`].
pub fn quadratic_control_darboux(t: f64) -> f64 {
    PI * (1.1 - 0.1 * t.sin())
}

/// A figure eight on the equatorial band with exactly one self-crossing,
/// at `φ = 0 ≡ π`. Samples are offset by half a step so that no vertex
/// sits on the crossing.
pub fn figure_eight(n: usize) -> Vec<StepRecord> {
    let mut out: Vec<StepRecord> = (0..n)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            StepRecord {
                s: phi,
                r: PI / 2.0 + 0.3 * (2.0 * phi).sin(),
                theta: 0.5 * phi.sin(),
                beta: 0.0,
            }
        })
        .collect();
    let first = out[0];
    out.push(StepRecord {
        s: first.s + 2.0 * PI,
        ..first
    });
    out
}
