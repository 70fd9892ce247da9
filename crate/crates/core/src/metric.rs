//! Metrics of revolution `g = f(cos r)^2 dr^2 + sin^2 r dθ^2` on the sphere.
//!
//! The profile is `f(u) = 1 + h(u) + e(u)` with `u = cos r`. `h` is odd and
//! drawn from a small set of closed forms so that its symmetry and
//! derivatives are exact; `e` is an even polynomial without constant term
//! used to build non-Zoll controls.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::golden_min;

/// Default distance from the poles below which the `(r, θ)` chart is not used.
pub const DEFAULT_POLE_MARGIN: f64 = 1e-6;

/// Default tolerance for the antipodal symmetry test.
pub const DEFAULT_DESCENT_TOL: f64 = 1e-12;

/// Odd part `h` of the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HFunction {
    /// `h(u) = Σ a_k u^(2k+1)`; coefficients for `u, u^3, u^5, ...`.
    OddPolynomial(Vec<f64>),
    /// `h(cos r) = cos r · sin((2k+1) r)`.
    TrigExample {
        k: u32,
    },
    /// `h(u) = u (1 - u^2) / 2`.
    HalfSineExample,
    Zero,
}

impl HFunction {
    /// `h(u)` for `u ∈ [-1, 1]`.
    ///
    /// The trigonometric family is evaluated as `u √(1-u²) U_2k(u)` with the
    /// Chebyshev recurrence, which is odd bit for bit.
    pub fn value(&self, u: f64) -> f64 {
        match self {
            HFunction::OddPolynomial(a) => u * horner(a, u * u),
            HFunction::TrigExample { k } => {
                let s = (1.0 - u * u).max(0.0).sqrt();
                u * s * chebyshev_u(2 * *k, u)
            }
            HFunction::HalfSineExample => 0.5 * u * (1.0 - u * u),
            HFunction::Zero => 0.0,
        }
    }

    /// `h'(u)`. Unbounded at `u = ±1` for the trigonometric family.
    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            HFunction::OddPolynomial(a) => {
                let w = u * u;
                a.iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (k, &c)| acc * w + (2 * k + 1) as f64 * c)
            }
            HFunction::TrigExample { .. } => {
                let r = u.clamp(-1.0, 1.0).acos();
                -self.d_dr(r) / r.sin()
            }
            HFunction::HalfSineExample => 0.5 * (1.0 - 3.0 * u * u),
            HFunction::Zero => 0.0,
        }
    }

    /// `h(cos r)`.
    pub fn at_colatitude(&self, r: f64) -> f64 {
        match self {
            HFunction::TrigExample { k } => r.cos() * ((2 * k + 1) as f64 * r).sin(),
            _ => self.value(r.cos()),
        }
    }

    /// `d/dr [h(cos r)]`, smooth in `r` for every variant.
    pub fn d_dr(&self, r: f64) -> f64 {
        match self {
            HFunction::TrigExample { k } => {
                let n = (2 * k + 1) as f64;
                -r.sin() * (n * r).sin() + n * r.cos() * (n * r).cos()
            }
            _ => -r.sin() * self.derivative(r.cos()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            HFunction::Zero => true,
            HFunction::OddPolynomial(a) => a.iter().all(|&c| c == 0.0),
            _ => false,
        }
    }

    fn family_name(&self) -> String {
        match self {
            HFunction::OddPolynomial(a) => format!("odd_poly{a:?}"),
            HFunction::TrigExample { k } => format!("trig_example(k={k})"),
            HFunction::HalfSineExample => "half_sine".to_string(),
            HFunction::Zero => "zero".to_string(),
        }
    }
}

/// Even perturbation `e(u) = Σ b_j u^(2j+2)`; the constant term is fixed at 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvenPerturbation {
    coeffs: Vec<f64>,
}

impl EvenPerturbation {
    /// Coefficients for `u^2, u^4, ...`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        EvenPerturbation { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self, u: f64) -> f64 {
        let w = u * u;
        w * horner(&self.coeffs, w)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let w = u * u;
        let inner = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, &c)| acc * w + (2 * j + 2) as f64 * c);
        u * inner
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

fn horner(coeffs: &[f64], w: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * w + c)
}

/// Chebyshev polynomial of the second kind, `U_n(u)`.
fn chebyshev_u(n: u32, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * u);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * u * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A metric of revolution on the coordinate sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOfRevolution {
    h: HFunction,
    e: EvenPerturbation,
    label: String,
}

impl MetricOfRevolution {
    pub fn new(h: HFunction, e: EvenPerturbation) -> Self {
        let label = if e.is_zero() {
            h.family_name()
        } else {
            format!("{}+even{:?}", h.family_name(), e.coeffs())
        };
        MetricOfRevolution { h, e, label }
    }

    /// The constant curvature metric.
    pub fn round() -> Self {
        Self::new(HFunction::Zero, EvenPerturbation::default())
    }

    pub fn zoll(h: HFunction) -> Self {
        Self::new(h, EvenPerturbation::default())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn h(&self) -> &HFunction {
        &self.h
    }

    pub fn e(&self) -> &EvenPerturbation {
        &self.e
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when `e ≡ 0`, i.e. the metric belongs to the Zoll family.
    pub fn is_zoll_candidate(&self) -> bool {
        self.e.is_zero()
    }

    /// True for the round metric.
    pub fn is_round(&self) -> bool {
        self.h.is_zero() && self.e.is_zero()
    }

    /// `f(u) = 1 + h(u) + e(u)`.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("u = {u} outside [-1, 1]")));
        }
        Ok(self.f_unchecked(u))
    }

    pub(crate) fn f_unchecked(&self, u: f64) -> f64 {
        if u == 1.0 || u == -1.0 {
            // exact pole values through the r-form
            let r = if u == 1.0 { 0.0 } else { PI };
            return 1.0 + self.h.at_colatitude(r) + self.e.value(u);
        }
        1.0 + self.h.value(u) + self.e.value(u)
    }

    /// `f(cos r)`, evaluated through the smooth `r`-form of `h`.
    pub fn f_at(&self, r: f64) -> f64 {
        1.0 + self.h.at_colatitude(r) + self.e.value(r.cos())
    }

    /// `d/dr [f(cos r)]`.
    pub fn df_dr(&self, r: f64) -> f64 {
        self.h.d_dr(r) - r.sin() * self.e.derivative(r.cos())
    }

    /// Samples the invariants of `h` and `f` on a uniform grid in `u`.
    pub fn validate(&self, n_samples: usize) -> Result<ValidationReport> {
        if n_samples < 3 {
            return Err(Error::Domain(format!("n_samples = {n_samples} < 3")));
        }
        let grid: Vec<f64> = (0..n_samples)
            .map(|i| -1.0 + 2.0 * i as f64 / (n_samples - 1) as f64)
            .collect();

        let mut worst_odd = (0.0, 0.0);
        let mut worst_h = (0.0, 0.0);
        let mut worst_f = (f64::INFINITY, 0.0);
        let mut argmax = 0;
        for (i, &u) in grid.iter().enumerate() {
            let h = self.h.value(u);
            let odd = (h + self.h.value(-u)).abs();
            if odd > worst_odd.0 {
                worst_odd = (odd, u);
            }
            if h.abs() > worst_h.0 {
                worst_h = (h.abs(), u);
                argmax = i;
            }
            let f = self.f_unchecked(u);
            if f < worst_f.0 {
                worst_f = (f, u);
            }
        }

        // polish the maximum of |h| between the neighbouring grid points
        let lo = grid[argmax.saturating_sub(1)];
        let hi = grid[(argmax + 1).min(n_samples - 1)];
        let (u_star, neg) = golden_min(lo, hi, 100, |u| -self.h.value(u).abs());
        if -neg > worst_h.0 {
            worst_h = (-neg, u_star);
        }

        let mut violations = Vec::new();
        if worst_odd.0 > 1e-12 {
            violations.push(Violation {
                kind: ViolationKind::Oddness,
                witness_u: worst_odd.1,
                value: worst_odd.0,
            });
        }
        if worst_h.0 >= 1.0 {
            violations.push(Violation {
                kind: ViolationKind::Range,
                witness_u: worst_h.1,
                value: worst_h.0,
            });
        }
        let end = [1.0, -1.0]
            .into_iter()
            .map(|u| {
                (
                    self.h.at_colatitude(if u > 0.0 { 0.0 } else { PI }).abs(),
                    u,
                )
            })
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        if end.0 > 1e-12 {
            violations.push(Violation {
                kind: ViolationKind::Endpoint,
                witness_u: end.1,
                value: end.0,
            });
        }
        if worst_f.0 <= 0.0 {
            violations.push(Violation {
                kind: ViolationKind::Positivity,
                witness_u: worst_f.1,
                value: worst_f.0,
            });
        }

        Ok(ValidationReport {
            label: self.label.clone(),
            n_samples,
            max_abs_h: worst_h.0,
            max_abs_h_at: worst_h.1,
            min_f: worst_f.0,
            violations,
        })
    }

    /// Closed-form sectional curvature with the default pole margin.
    pub fn sectional_curvature(&self, r: f64) -> Result<f64> {
        self.sectional_curvature_with_margin(r, DEFAULT_POLE_MARGIN)
    }

    /// `σ(r) = (1 + h - u h'(u)) / (1 + h)^3` at `u = cos r`, Zoll family only.
    ///
    /// `u h'(u)` is computed as `-(cos r / sin r) d/dr[h(cos r)]`.
    pub fn sectional_curvature_with_margin(&self, r: f64, margin: f64) -> Result<f64> {
        if !self.is_zoll_candidate() {
            return Err(Error::Family {
                required: "e ≡ 0",
                label: self.label.clone(),
            });
        }
        if !(r > margin && r < PI - margin) {
            return Err(Error::PoleMargin { r, margin });
        }
        let h = self.h.at_colatitude(r);
        let u_dh = -(r.cos() / r.sin()) * self.h.d_dr(r);
        let one_h = 1.0 + h;
        Ok((one_h - u_dh) / (one_h * one_h * one_h))
    }

    /// Limit of σ at a pole, by quadratic extrapolation from `r = δ, 2δ, 4δ`.
    pub fn pole_curvature(&self, north: bool) -> Result<f64> {
        let d = 1e-3;
        let at = |x: f64| self.sectional_curvature(if north { x } else { PI - x });
        let (a, b, c) = (at(d)?, at(2.0 * d)?, at(4.0 * d)?);
        // Neville on nodes d, 2d, 4d evaluated at 0
        Ok((8.0 * a - 6.0 * b + c) / 3.0)
    }

    /// Gauss curvature from central differences of `q(r) = cos r / f(cos r)`,
    /// using `K = -q'(r) / (f(cos r) sin r)`. Valid for any `e`.
    pub fn numerical_gauss_curvature(&self, r: f64, step: f64) -> Result<f64> {
        if !(step > 0.0) {
            return Err(Error::Domain(format!("step = {step} must be positive")));
        }
        if !(r - step > 0.0 && r + step < PI) {
            return Err(Error::Domain(format!(
                "stencil [{}, {}] leaves (0, π)",
                r - step,
                r + step
            )));
        }
        let q = |x: f64| x.cos() / self.f_at(x);
        let dq = (q(r + step) - q(r - step)) / (2.0 * step);
        Ok(-dq / (self.f_at(r) * r.sin()))
    }

    /// Antipodal symmetry test `f(u) = f(-u)` with the default tolerance.
    pub fn rp2_descent_check(&self) -> DescentVerdict {
        self.rp2_descent_check_with_tol(DEFAULT_DESCENT_TOL)
    }

    /// The antipodal map `(r, θ) ↦ (π - r, θ + π)` is an isometry iff
    /// `f(u) = f(-u)`; the metric then descends to the projective plane.
    pub fn rp2_descent_check_with_tol(&self, tol: f64) -> DescentVerdict {
        let n = 2001;
        let asym = |u: f64| (self.f_unchecked(u) - self.f_unchecked(-u)).abs();
        let mut best = (0.0, 0.0);
        let mut best_i = 0;
        for i in 0..n {
            let u = i as f64 / (n - 1) as f64;
            let a = asym(u);
            if a > best.0 {
                best = (a, u);
                best_i = i;
            }
        }
        if best.0 < tol {
            return DescentVerdict::Descends {
                max_asymmetry: best.0,
            };
        }
        let step = 1.0 / (n - 1) as f64;
        let lo = (best_i as f64 - 1.0).max(0.0) * step;
        let hi = (best_i as f64 + 1.0).min((n - 1) as f64) * step;
        let (u, neg) = golden_min(lo, hi, 100, |u| -asym(u));
        if -neg > best.0 {
            best = (-neg, u);
        }
        DescentVerdict::Obstructed {
            witness_u: best.1,
            asymmetry: best.0,
        }
    }

    /// `n` closed-form curvature samples uniform in `r` on
    /// `[margin, π - margin]`.
    pub fn curvature_profile(&self, n: usize) -> Result<CurvatureProfile> {
        self.curvature_profile_with_margin(n, DEFAULT_POLE_MARGIN)
    }

    pub fn curvature_profile_with_margin(&self, n: usize, margin: f64) -> Result<CurvatureProfile> {
        if n < 2 {
            return Err(Error::Domain(format!("n = {n} < 2")));
        }
        if !self.is_zoll_candidate() {
            return Err(Error::Family {
                required: "e ≡ 0",
                label: self.label.clone(),
            });
        }
        // keep the endpoints strictly inside the margin check
        let lo = margin * (1.0 + 1e-9);
        let hi = PI - lo;
        let samples = (0..n)
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                self.sectional_curvature_with_margin(r, margin)
                    .map(|sigma| CurvatureSample { r, sigma })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurvatureProfile { samples })
    }
}

impl fmt::Display for MetricOfRevolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Oddness,
    Range,
    Endpoint,
    Positivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness_u: f64,
    /// Offending quantity: `|h(u)+h(-u)|`, `|h(u)|`, `|h(±1)|` or `f(u)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub label: String,
    pub n_samples: usize,
    pub max_abs_h: f64,
    pub max_abs_h_at: f64,
    pub min_f: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DescentVerdict {
    Descends { max_asymmetry: f64 },
    Obstructed { witness_u: f64, asymmetry: f64 },
}

impl DescentVerdict {
    pub fn descends(&self) -> bool {
        matches!(self, DescentVerdict::Descends { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub r: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    pub samples: Vec<CurvatureSample>,
}

impl CurvatureProfile {
    pub fn min(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.sigma)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.sigma)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
