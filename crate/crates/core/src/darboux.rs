//! The Darboux closedness integral.
//!
//! For a geodesic with turning colatitude `t` (so `|c| = sin t`) the
//! θ-advance between consecutive turning points is
//!
//! ```text
//! I(t) = ∫_t^{π-t} f(cos r) sin t / (sin r √(sin²r − sin²t)) dr.
//! ```
//!
//! With `u = cos r` and then `u = cos t · sin ψ` both inverse-square-root
//! endpoint singularities disappear:
//!
//! ```text
//! I(t) = sin t ∫_{-π/2}^{π/2} f(cos t sin ψ) / (1 − cos²t sin²ψ) dψ,
//! ```
//!
//! which is smooth in ψ, though sharply peaked at the ends when `t` is small.
//! All geodesics close iff `I(t)/π` is the same rational for every `t`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::batch::{self, Execution};
use crate::error::{Error, Result};
use crate::geodesics::{integrate, Event, GeodesicState, IntegrationOptions};
use crate::metric::MetricOfRevolution;
use crate::quadrature::GaussLegendre;

pub const DEFAULT_NODES: usize = 128;
pub const DEFAULT_CONSTANCY_TOL: f64 = 1e-8;
pub const DEFAULT_Q_MAX: u64 = 64;
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-6;
/// Doubling the node count must move the value by less than this.
pub const CONVERGENCE_TOL: f64 = 1e-10;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t < PI / 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "turning colatitude t = {t} not in (0, π/2)"
        )))
    }
}

/// The transformed integrand still peaks like `1/(t² + ψ²)` near `ψ = ±π/2`
/// when `t` is small. Subtracting the chord of `f` through `u = ±1` leaves
/// a bounded remainder; the chord part integrates in closed form because
/// `∫ dψ / (1 ∓ cos t sin ψ) = π / sin t` over `(-π/2, π/2)`.
fn transformed(m: &MetricOfRevolution, t: f64, rule: &GaussLegendre) -> f64 {
    let (st, ct) = t.sin_cos();
    let (fp, fm) = (m.f_unchecked(1.0), m.f_unchecked(-1.0));
    let remainder = rule.integrate(-PI / 2.0, PI / 2.0, |psi| {
        let u = ct * psi.sin();
        let chord = 0.5 * fp * (1.0 + u) + 0.5 * fm * (1.0 - u);
        (m.f_unchecked(u) - chord) / (1.0 - u * u)
    });
    0.5 * PI * (fp + fm) + st * remainder
}

/// `I(t)` by `n_nodes`-point Gauss–Legendre on the transformed integrand.
pub fn darboux_integral(m: &MetricOfRevolution, t: f64, n_nodes: usize) -> Result<f64> {
    check_t(t)?;
    if n_nodes < 8 {
        return Err(Error::Domain(format!("n_nodes = {n_nodes} < 8")));
    }
    Ok(transformed(m, t, &GaussLegendre::new(n_nodes)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarbouxValue {
    pub t: f64,
    pub value: f64,
    /// `|I_{2n}(t) − I_n(t)|`.
    pub refinement_delta: f64,
}

impl DarbouxValue {
    pub fn converged(&self) -> bool {
        self.refinement_delta <= CONVERGENCE_TOL
    }
}

/// `I(t)` at `n` and `2n` nodes; the finer value is reported.
pub fn darboux_integral_checked(
    m: &MetricOfRevolution,
    t: f64,
    n_nodes: usize,
) -> Result<DarbouxValue> {
    check_t(t)?;
    if n_nodes < 8 {
        return Err(Error::Domain(format!("n_nodes = {n_nodes} < 8")));
    }
    let rules = (GaussLegendre::new(n_nodes), GaussLegendre::new(2 * n_nodes));
    Ok(checked_with(m, t, &rules))
}

fn checked_with(
    m: &MetricOfRevolution,
    t: f64,
    rules: &(GaussLegendre, GaussLegendre),
) -> DarbouxValue {
    let coarse = transformed(m, t, &rules.0);
    let fine = transformed(m, t, &rules.1);
    DarbouxValue {
        t,
        value: fine,
        refinement_delta: (fine - coarse).abs(),
    }
}

/// `n` midpoints of a uniform partition of `(0, π/2)`.
pub fn uniform_t_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (i as f64 + 0.5) * (PI / 2.0) / n as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub p: u64,
    pub q: u64,
}

impl Rational {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn is_one(&self) -> bool {
        self.p == self.q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// First continued-fraction convergent `p/q` of `x` with `q ≤ q_max` and
/// `|x − p/q| < tol`.
pub fn rational_approx(x: f64, q_max: u64, tol: f64) -> Option<Rational> {
    if !(x > 0.0) || !x.is_finite() || q_max == 0 {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as u64;
        let p = a.checked_mul(p1)?.checked_add(p0)?;
        let q = a.checked_mul(q1)?.checked_add(q0)?;
        if q > q_max {
            return None;
        }
        if p > 0 && (x - p as f64 / q as f64).abs() < tol {
            return Some(Rational { p, q });
        }
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    pub nodes: usize,
    pub constancy_tol: f64,
    pub q_max: u64,
    pub rational_tol: f64,
    pub execution: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            nodes: DEFAULT_NODES,
            constancy_tol: DEFAULT_CONSTANCY_TOL,
            q_max: DEFAULT_Q_MAX,
            rational_tol: DEFAULT_RATIONAL_TOL,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub value: f64,
    pub deviation: f64,
    pub refinement_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationNumber {
    Rational {
        p: u64,
        q: u64,
    },
    /// Constant, but no convergent within `q_max` matches.
    Undetermined,
    /// Not constant in `t`: not all geodesics are closed.
    NonConstant,
}

impl fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationNumber::Rational { p, q } => write!(f, "{p}/{q}"),
            RotationNumber::Undetermined => f.write_str("undetermined"),
            RotationNumber::NonConstant => f.write_str("non-constant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxScan {
    pub label: String,
    pub points: Vec<ScanPoint>,
    pub mean: f64,
    pub max_deviation: f64,
    pub rotation: RotationNumber,
    /// Grid points where node doubling moved the value by more than
    /// [`CONVERGENCE_TOL`].
    pub unconverged: usize,
}

impl DarbouxScan {
    /// Rotation number exactly 1: every geodesic closes after one oscillation.
    pub fn is_zoll_compatible(&self) -> bool {
        matches!(self.rotation, RotationNumber::Rational { p, q } if p == q)
    }

    pub fn max_abs_error_from(&self, target: f64) -> f64 {
        self.points
            .iter()
            .map(|p| (p.value - target).abs())
            .fold(0.0, f64::max)
    }

    pub fn verdict(&self) -> &'static str {
        match self.rotation {
            RotationNumber::NonConstant => "non-constant: not all geodesics closed",
            RotationNumber::Undetermined => "constant, rotation number undetermined",
            RotationNumber::Rational { p, q } if p == q => "Zoll-compatible",
            RotationNumber::Rational { .. } => "all geodesics closed, rotation number != 1",
        }
    }
}

/// Evaluates `I` over `t_grid` and classifies the result.
pub fn scan(m: &MetricOfRevolution, t_grid: &[f64], opts: &ScanOptions) -> Result<DarbouxScan> {
    if t_grid.len() < 2 {
        return Err(Error::Domain("scan needs at least two grid points".into()));
    }
    for &t in t_grid {
        check_t(t)?;
    }
    if opts.nodes < 8 {
        return Err(Error::Domain(format!("n_nodes = {} < 8", opts.nodes)));
    }
    let rules = (
        GaussLegendre::new(opts.nodes),
        GaussLegendre::new(2 * opts.nodes),
    );
    let values = batch::map(opts.execution, t_grid, |&t| checked_with(m, t, &rules));

    let mean = values.iter().map(|v| v.value).sum::<f64>() / values.len() as f64;
    let points: Vec<ScanPoint> = values
        .iter()
        .map(|v| ScanPoint {
            t: v.t,
            value: v.value,
            deviation: v.value - mean,
            refinement_delta: v.refinement_delta,
        })
        .collect();
    let max_deviation = points.iter().map(|p| p.deviation.abs()).fold(0.0, f64::max);
    let rotation = if max_deviation >= opts.constancy_tol {
        RotationNumber::NonConstant
    } else {
        match rational_approx(mean / PI, opts.q_max, opts.rational_tol) {
            Some(Rational { p, q }) => RotationNumber::Rational { p, q },
            None => RotationNumber::Undetermined,
        }
    };
    Ok(DarbouxScan {
        label: m.label().to_string(),
        unconverged: values.iter().filter(|v| !v.converged()).count(),
        points,
        mean,
        max_deviation,
        rotation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsComparison {
    pub t: f64,
    pub integral: f64,
    pub measured: f64,
    pub difference: f64,
}

/// Compares `I(t)` with the θ-advance of an integrated geodesic between
/// its turning point at colatitude `t` and the next one.
pub fn darboux_vs_dynamics(
    m: &MetricOfRevolution,
    t: f64,
    opts: &IntegrationOptions,
) -> Result<DynamicsComparison> {
    check_t(t)?;
    let integral = darboux_integral(m, t, DEFAULT_NODES)?;
    let start = GeodesicState::new(t, 0.0, 0.0);
    let mut s_max = 2.0 * PI;
    loop {
        let traj = integrate(m, &start, s_max, opts)?;
        let mut turns = traj.events.iter().filter_map(|e| match e {
            Event::TurningPoint { s, theta, .. } if *s > 0.0 => Some(*theta),
            _ => None,
        });
        if let Some(theta) = turns.next() {
            let measured = theta - start.theta;
            return Ok(DynamicsComparison {
                t,
                integral,
                measured,
                difference: (integral - measured).abs(),
            });
        }
        if s_max > 64.0 * PI {
            return Err(Error::NoReturn { horizon: s_max });
        }
        s_max *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{EvenPerturbation, HFunction};

    fn e01() -> MetricOfRevolution {
        MetricOfRevolution::new(HFunction::Zero, EvenPerturbation::new(vec![0.1]))
    }

    #[test]
    fn round_value_is_pi() {
        let m = MetricOfRevolution::round();
        for t in [0.01, PI / 4.0, 1.5] {
            assert!((darboux_integral(&m, t, 128).unwrap() - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_part_integrates_out() {
        let m = MetricOfRevolution::zoll(HFunction::HalfSineExample);
        assert!((darboux_integral(&m, 0.3, 128).unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn quadratic_perturbation_closed_form() {
        // f = 1 + u²/10 gives I(t) = π (1.1 − 0.1 sin t).
        let m = e01();
        for t in [0.3, 0.6, 1.2] {
            let v = darboux_integral(&m, t, 128).unwrap();
            assert!((v - PI * (1.1 - 0.1 * t.sin())).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn domain_errors() {
        let m = MetricOfRevolution::round();
        assert!(darboux_integral(&m, 0.0, 128).is_err());
        assert!(darboux_integral(&m, PI / 2.0, 128).is_err());
        assert!(darboux_integral(&m, 0.5, 4).is_err());
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(
            rational_approx(1.0, 64, 1e-6),
            Some(Rational { p: 1, q: 1 })
        );
        assert_eq!(
            rational_approx(1.5, 10, 1e-6),
            Some(Rational { p: 3, q: 2 })
        );
        assert_eq!(rational_approx(2f64.sqrt(), 20, 1e-9), None);
        assert_eq!(
            rational_approx(12.0 / 11.0, 64, 1e-9),
            Some(Rational { p: 12, q: 11 })
        );
        assert_eq!(rational_approx(-1.0, 64, 1e-6), None);
    }

    #[test]
    fn scan_verdicts() {
        let grid = uniform_t_grid(50);
        let opts = ScanOptions::default();
        let s = scan(
            &MetricOfRevolution::zoll(HFunction::HalfSineExample),
            &grid,
            &opts,
        )
        .unwrap();
        assert!(s.max_deviation < 1e-8);
        assert!(s.is_zoll_compatible());
        assert_eq!(s.unconverged, 0);
        let s = scan(&e01(), &grid, &opts).unwrap();
        assert_eq!(s.rotation, RotationNumber::NonConstant);
        assert!(!s.is_zoll_compatible());
        assert!(scan(&e01(), &[0.3], &opts).is_err());
    }

    #[test]
    fn dynamics_match_integral() {
        let o = IntegrationOptions::default();
        let c = darboux_vs_dynamics(&MetricOfRevolution::round(), 0.5, &o).unwrap();
        assert!(
            (c.measured - PI).abs() < 1e-6 && c.difference < 1e-6,
            "{c:?}"
        );
        let c = darboux_vs_dynamics(
            &MetricOfRevolution::zoll(HFunction::HalfSineExample),
            0.7,
            &o,
        )
        .unwrap();
        assert!(c.difference < 1e-5, "{c:?}");
        let c = darboux_vs_dynamics(&e01(), 0.5, &o).unwrap();
        assert!(
            c.difference < 1e-5 && (c.integral - PI).abs() > 1e-3,
            "{c:?}"
        );
    }
}
