//! The first-return map of upward crossings of the equator.
//!
//! The equator `r = π/2` is a closed geodesic for every metric of
//! revolution. A unit vector crossing it upwards is recorded as
//! `(x, α)`: position `x = θ mod 2π` and crossing angle `α ∈ (0, π)`
//! measured from `∂/∂θ`. `F(x, α)` is the next upward crossing of the
//! geodesic through `(x, α)`. Near `α → 0, π` the orbit hugs the equator
//! and `F` tends to the identity, which is how the two boundary circles
//! extend to fixed points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::batch::{self, Execution};
use crate::error::{Error, Result};
use crate::geodesics::{
    integrate, run_flow, self_intersections, GeodesicState, IntegrationOptions, MeridianPath,
    DEFAULT_INJECTIVITY_GUARD, DEFAULT_MATCH_TOL,
};
use crate::metric::MetricOfRevolution;
use crate::{angular_distance, wrap_2pi};

/// Crossing angles must lie in `(TANGENCY_ZONE, π − TANGENCY_ZONE)`.
pub const TANGENCY_ZONE: f64 = 1e-4;
/// Crossing angles probed for the boundary-limit diagnostic.
pub const BOUNDARY_ALPHAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusPoint {
    pub x: f64,
    pub alpha: f64,
}

impl AnnulusPoint {
    pub fn new(x: f64, alpha: f64) -> Result<Self> {
        if !(alpha > TANGENCY_ZONE && alpha < PI - TANGENCY_ZONE) {
            return Err(Error::Domain(format!(
                "crossing angle {alpha} inside the tangency zone"
            )));
        }
        Ok(AnnulusPoint {
            x: wrap_2pi(x),
            alpha,
        })
    }

    /// The angle divided by π, in `(0, 1)`.
    pub fn alpha_norm(&self) -> f64 {
        self.alpha / PI
    }

    pub fn state(&self) -> GeodesicState {
        GeodesicState::new(PI / 2.0, self.x, self.alpha)
    }

    /// Max of the angular distance in `x` and `|Δα|`.
    pub fn distance(&self, other: &AnnulusPoint) -> f64 {
        angular_distance(self.x, other.x).max((self.alpha - other.alpha).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReturnMapOptions {
    pub integration: IntegrationOptions,
    pub horizon: f64,
    pub match_tol: f64,
    pub guard: f64,
    pub execution: Execution,
}

impl Default for ReturnMapOptions {
    fn default() -> Self {
        ReturnMapOptions {
            integration: IntegrationOptions::default(),
            horizon: 16.0 * PI,
            match_tol: DEFAULT_MATCH_TOL,
            guard: DEFAULT_INJECTIVITY_GUARD,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstReturn {
    pub v: AnnulusPoint,
    pub fv: AnnulusPoint,
    pub flight: f64,
}

impl FirstReturn {
    pub fn displacement(&self) -> f64 {
        self.v.distance(&self.fv)
    }
}

/// `F(v)` and the arc length flown to reach it.
pub fn first_return(
    m: &MetricOfRevolution,
    v: &AnnulusPoint,
    opts: &ReturnMapOptions,
) -> Result<FirstReturn> {
    first_return_within(m, v, opts.horizon, &opts.integration)
}

fn first_return_within(
    m: &MetricOfRevolution,
    v: &AnnulusPoint,
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<FirstReturn> {
    let start = v.state();
    if start.clairaut().abs() < opts.meridian_threshold {
        let path = MeridianPath::through(m, &start);
        let snapped = path.state_at(0.0);
        let flight = path.period();
        if flight > horizon {
            return Err(Error::NoReturn { horizon });
        }
        return Ok(FirstReturn {
            v: *v,
            fv: AnnulusPoint {
                x: wrap_2pi(snapped.theta),
                alpha: snapped.beta,
            },
            flight,
        });
    }

    let g = |y: &[f64; 3]| y[0] - PI / 2.0;
    // Leaving the equator upwards: g is positive immediately after s = 0.
    let mut prev = f64::MIN_POSITIVE;
    let mut hit = None;
    run_flow(m, start.to_array(), horizon, opts, |seg| {
        let cur = g(&seg.y1);
        if prev < 0.0 && cur >= 0.0 {
            hit = Some(seg.bisect(g, prev, opts.event_tol));
            return Ok(false);
        }
        prev = cur;
        Ok(true)
    })?;
    let (flight, y) = hit.ok_or(Error::NoReturn { horizon })?;
    Ok(FirstReturn {
        v: *v,
        fv: AnnulusPoint {
            x: wrap_2pi(y[1]),
            alpha: wrap_2pi(y[2]),
        },
        flight,
    })
}

/// A grid point with its return orbit and crossing count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnMapSample {
    pub v: AnnulusPoint,
    pub fv: Option<AnnulusPoint>,
    pub flight: Option<f64>,
    /// `F(v), F²(v), …` up to the return or the horizon.
    pub orbit: Vec<AnnulusPoint>,
    pub per: Option<u32>,
    /// Least period `P(v)`: total flight over `Per` iterations.
    pub period: Option<f64>,
    /// Equator crossings (both directions) on `[0, P(v))`.
    pub crossings: Option<usize>,
    pub simple: Option<bool>,
    pub error: Option<String>,
}

impl ReturnMapSample {
    fn unresolved(v: AnnulusPoint) -> Self {
        ReturnMapSample {
            v,
            fv: None,
            flight: None,
            orbit: Vec::new(),
            per: None,
            period: None,
            crossings: None,
            simple: None,
            error: None,
        }
    }

    /// `2 · Per = crossings`, when both are known.
    pub fn relation_holds(&self) -> Option<bool> {
        Some(2 * self.per? as usize == self.crossings?)
    }

    /// `‖F^n(v) − v‖` if the orbit reaches `n` iterates.
    pub fn displacement_after(&self, n: u32) -> Option<f64> {
        let n = n.max(1) as usize;
        self.orbit.get(n - 1).map(|p| p.distance(&self.v))
    }
}

/// Iterates `F` from `v` until it returns within the match tolerance, then
/// integrates one full period to count equator crossings and test
/// simplicity.
pub fn per_and_crossings(
    m: &MetricOfRevolution,
    v: &AnnulusPoint,
    opts: &ReturnMapOptions,
) -> Result<ReturnMapSample> {
    let mut sample = ReturnMapSample::unresolved(*v);
    let mut cur = *v;
    let mut total = 0.0;
    loop {
        let remaining = opts.horizon - total;
        if remaining <= 0.0 {
            return Ok(sample);
        }
        let step = match first_return_within(m, &cur, remaining, &opts.integration) {
            Ok(step) => step,
            Err(Error::NoReturn { .. }) => return Ok(sample),
            Err(e) => return Err(e),
        };
        total += step.flight;
        if sample.fv.is_none() {
            sample.fv = Some(step.fv);
            sample.flight = Some(step.flight);
        }
        sample.orbit.push(step.fv);
        if step.fv.distance(v) < opts.match_tol {
            break;
        }
        cur = step.fv;
    }
    let per = sample.orbit.len() as u32;
    sample.per = Some(per);
    sample.period = Some(total);

    let traj = integrate(m, &v.state(), total, &opts.integration)?;
    sample.crossings = Some(traj.crossings_before(total - 1e-6));
    sample.simple = Some(self_intersections(&traj, (0.0, total), opts.guard)?.is_simple());
    Ok(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryProbe {
    pub alpha: f64,
    pub displacement: f64,
    pub flight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnMapReport {
    pub label: String,
    pub nx: usize,
    pub nalpha: usize,
    pub samples: Vec<ReturnMapSample>,
    pub resolved: usize,
    pub m0: Option<u32>,
    /// Distinct resolved `Per` values, ascending.
    pub spectrum: Vec<u32>,
    /// Spectrum contained in `{m₀, 2m₀}`.
    pub spectrum_ok: bool,
    /// `max ‖F^{m₀}(v) − v‖` (with `m₀ = 1` when nothing resolved).
    pub max_displacement: f64,
    pub simple_count: usize,
    /// `2 · Per = crossings` at every resolved sample.
    pub relation_holds: bool,
    /// Distinct grid points have distinct images at 1e-6 resolution.
    pub injective: bool,
    /// Probes at `α` and `π − α` for `α` in [`BOUNDARY_ALPHAS`], at `x = 0`.
    pub boundary: Vec<BoundaryProbe>,
    /// Displacements shrink along each boundary probe sequence.
    pub boundary_shrinks: bool,
}

impl ReturnMapReport {
    /// Every sample resolved: the sampled annulus behaves like that of a
    /// manifold all of whose geodesics close.
    pub fn all_resolved(&self) -> bool {
        self.resolved == self.samples.len()
    }
}

/// Grid `x_i = 2πi/nx`, `α_j = π(j + ½)/nalpha`, row-major in `x`.
pub fn annulus_grid(nx: usize, nalpha: usize) -> Vec<AnnulusPoint> {
    let mut out = Vec::with_capacity(nx * nalpha);
    for i in 0..nx {
        for j in 0..nalpha {
            out.push(AnnulusPoint {
                x: 2.0 * PI * i as f64 / nx as f64,
                alpha: PI * (j as f64 + 0.5) / nalpha as f64,
            });
        }
    }
    out
}

pub fn build_report(
    m: &MetricOfRevolution,
    nx: usize,
    nalpha: usize,
    opts: &ReturnMapOptions,
) -> Result<ReturnMapReport> {
    if nx < 2 || nalpha < 2 {
        return Err(Error::Domain(format!("grid {nx}×{nalpha} too small")));
    }
    let grid = annulus_grid(nx, nalpha);
    let samples: Vec<ReturnMapSample> = batch::map(opts.execution, &grid, |v| {
        per_and_crossings(m, v, opts).unwrap_or_else(|e| ReturnMapSample {
            error: Some(e.to_string()),
            ..ReturnMapSample::unresolved(*v)
        })
    });

    let mut spectrum: Vec<u32> = samples.iter().filter_map(|s| s.per).collect();
    spectrum.sort_unstable();
    spectrum.dedup();
    let m0 = spectrum.first().copied();
    let spectrum_ok = m0.is_none_or(|m0| spectrum.iter().all(|&p| p == m0 || p == 2 * m0));
    let max_displacement = samples
        .iter()
        .filter_map(|s| s.displacement_after(m0.unwrap_or(1)))
        .fold(0.0, f64::max);

    let images: Vec<AnnulusPoint> = samples.iter().filter_map(|s| s.fv).collect();
    let injective = images
        .iter()
        .enumerate()
        .all(|(i, a)| images[i + 1..].iter().all(|b| a.distance(b) > 1e-6));

    let mut boundary = Vec::new();
    for side in [false, true] {
        for &a in &BOUNDARY_ALPHAS {
            let alpha = if side { PI - a } else { a };
            let r = first_return(m, &AnnulusPoint { x: 0.0, alpha }, opts)?;
            boundary.push(BoundaryProbe {
                alpha,
                displacement: r.displacement(),
                flight: r.flight,
            });
        }
    }
    // below the match tolerance a displacement is indistinguishable from
    // zero: near tangency the crossing-angle error grows like event_tol/α
    let k = BOUNDARY_ALPHAS.len();
    let boundary_shrinks = boundary.chunks(k).all(|side| {
        side.windows(2)
            .all(|w| w[1].displacement <= w[0].displacement || w[1].displacement < opts.match_tol)
    });

    Ok(ReturnMapReport {
        label: m.label().to_string(),
        nx,
        nalpha,
        resolved: samples.iter().filter(|s| s.per.is_some()).count(),
        m0,
        spectrum,
        spectrum_ok,
        max_displacement,
        simple_count: samples.iter().filter(|s| s.simple == Some(true)).count(),
        relation_holds: samples.iter().all(|s| s.relation_holds() != Some(false)),
        injective,
        boundary,
        boundary_shrinks,
        samples,
    })
}
