//! Unit-speed geodesics of a metric of revolution.
//!
//! The phase point is `(r, θ, β)` where `β` is the heading measured from
//! `∂/∂θ` in the orthonormal frame `(e_θ, e_r)`. In these variables
//!
//! ```text
//! dr/ds = sin β / f(cos r)
//! dθ/ds = cos β / sin r
//! dβ/ds = cos β cos r / (f(cos r) sin r)
//! ```
//!
//! so unit speed holds identically and `c = sin r cos β` is the Clairaut
//! integral. Orbits with `|c|` below the meridian threshold pass too close
//! to the poles for the chart and are handled by [`MeridianPath`], which
//! parametrises the meridian great circle by quadrature.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intersect::{self, SelfIntersections};
use crate::metric::{MetricOfRevolution, DEFAULT_POLE_MARGIN};
use crate::ode::{dop853_step, next_step, Tolerances};
use crate::quadrature::GaussLegendre;
use crate::{angular_distance, golden_min, wrap_pi};

pub const DEFAULT_MERIDIAN_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_EVENT_TOL: f64 = 1e-10;
pub const DEFAULT_MATCH_TOL: f64 = 1e-5;
pub const DEFAULT_INJECTIVITY_GUARD: f64 = 0.1;

/// `|c|` above this means the orbit is the equator itself.
const EQUATORIAL_CLAIRAUT: f64 = 1.0 - 1e-12;

/// Phase point of a unit-speed geodesic.
///
/// `theta` is carried as a lifted (continuous) angle; reduce it modulo 2π
/// for display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub r: f64,
    pub theta: f64,
    pub beta: f64,
    pub s: f64,
}

impl GeodesicState {
    pub fn new(r: f64, theta: f64, beta: f64) -> Self {
        GeodesicState {
            r,
            theta,
            beta,
            s: 0.0,
        }
    }

    /// Clairaut constant `c = sin r cos β`.
    pub fn clairaut(&self) -> f64 {
        self.r.sin() * self.beta.cos()
    }

    /// `f² (dr/ds)² + sin² r (dθ/ds)²`.
    pub fn energy(&self, m: &MetricOfRevolution) -> f64 {
        let v = rhs(m, &self.to_array());
        let f = m.f_at(self.r);
        let sr = self.r.sin();
        f * f * v[0] * v[0] + sr * sr * v[1] * v[1]
    }

    /// Same point, opposite direction.
    pub fn reversed(&self) -> Self {
        GeodesicState {
            beta: self.beta + PI,
            ..*self
        }
    }

    /// Image under the antipodal map `(r, θ) ↦ (π - r, θ + π)`.
    pub fn antipode(&self) -> Self {
        GeodesicState {
            r: PI - self.r,
            theta: self.theta + PI,
            beta: -self.beta,
            s: self.s,
        }
    }

    pub(crate) fn to_array(self) -> [f64; 3] {
        [self.r, self.theta, self.beta]
    }

    pub(crate) fn from_array(y: [f64; 3], s: f64) -> Self {
        GeodesicState {
            r: y[0],
            theta: y[1],
            beta: y[2],
            s,
        }
    }
}

/// Max of `|Δr|` and the angular distances in `θ` and `β`.
pub fn phase_distance(a: &GeodesicState, b: &GeodesicState) -> f64 {
    (a.r - b.r)
        .abs()
        .max(angular_distance(a.theta, b.theta))
        .max(angular_distance(a.beta, b.beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationOptions {
    pub tolerances: Tolerances,
    pub meridian_threshold: f64,
    pub event_tol: f64,
    pub pole_margin: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            tolerances: Tolerances::default(),
            meridian_threshold: DEFAULT_MERIDIAN_THRESHOLD,
            event_tol: DEFAULT_EVENT_TOL,
            pole_margin: DEFAULT_POLE_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub s: f64,
    pub r: f64,
    pub theta: f64,
    pub beta: f64,
}

impl StepRecord {
    fn from_array(s: f64, y: &[f64; 3]) -> Self {
        StepRecord {
            s,
            r: y[0],
            theta: y[1],
            beta: y[2],
        }
    }
}

/// `Up` means the colatitude increases through `π/2`, i.e. `β ∈ (0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    Up,
    Down,
}

impl CrossingDirection {
    fn from_heading(beta: f64) -> Self {
        if beta.sin() > 0.0 {
            CrossingDirection::Up
        } else {
            CrossingDirection::Down
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CrossingDirection::Up => "up",
            CrossingDirection::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    EquatorCrossing {
        s: f64,
        theta: f64,
        beta: f64,
        direction: CrossingDirection,
    },
    TurningPoint {
        s: f64,
        r: f64,
        theta: f64,
    },
}

impl Event {
    pub fn s(&self) -> f64 {
        match *self {
            Event::EquatorCrossing { s, .. } | Event::TurningPoint { s, .. } => s,
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Event::EquatorCrossing { theta, .. } | Event::TurningPoint { theta, .. } => theta,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub max_energy_drift: f64,
    pub max_clairaut_drift: f64,
}

/// An arc-length sampled geodesic with its event log.
///
/// Events are logged on `[0, s_max)`: an event at the initial point counts,
/// an event at the final point (within the event tolerance) belongs to the
/// next window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub label: String,
    pub initial: GeodesicState,
    pub s_max: f64,
    pub records: Vec<StepRecord>,
    pub events: Vec<Event>,
    pub diagnostics: Diagnostics,
    /// True when the orbit was delegated to the meridian path.
    pub meridian: bool,
}

impl Trajectory {
    /// Builds a trajectory from an arbitrary polyline, e.g. a test fixture.
    pub fn from_polyline(label: impl Into<String>, records: Vec<StepRecord>) -> Self {
        let first = records.first().copied().unwrap_or(StepRecord {
            s: 0.0,
            r: PI / 2.0,
            theta: 0.0,
            beta: 0.0,
        });
        Trajectory {
            label: label.into(),
            initial: GeodesicState {
                r: first.r,
                theta: first.theta,
                beta: first.beta,
                s: first.s,
            },
            s_max: records.last().map_or(0.0, |r| r.s),
            records,
            events: Vec::new(),
            diagnostics: Diagnostics::default(),
            meridian: false,
        }
    }

    pub fn equator_crossings(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::EquatorCrossing { .. }))
    }

    pub fn turning_points(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::TurningPoint { .. }))
    }

    /// Equator crossings with `s < end`.
    pub fn crossings_before(&self, end: f64) -> usize {
        self.equator_crossings().filter(|e| e.s() < end).count()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Right-hand side of the geodesic equations in `(r, θ, β)`.
pub(crate) fn rhs(m: &MetricOfRevolution, y: &[f64; 3]) -> [f64; 3] {
    let f = m.f_at(y[0]);
    let (sr, cr) = y[0].sin_cos();
    let (sb, cb) = y[2].sin_cos();
    [sb / f, cb / sr, cb * cr / (f * sr)]
}

/// One accepted step of the flow.
pub(crate) struct Segment<'a> {
    m: &'a MetricOfRevolution,
    tol: &'a Tolerances,
    pub s0: f64,
    pub y0: [f64; 3],
    pub s1: f64,
    pub y1: [f64; 3],
}

impl Segment<'_> {
    /// State at `s ∈ [s0, s1]` by a single uncontrolled step from `y0`.
    pub fn state_at(&self, s: f64) -> [f64; 3] {
        if s <= self.s0 {
            self.y0
        } else if s >= self.s1 {
            self.y1
        } else {
            dop853_step(
                &|y: &[f64; 3]| rhs(self.m, y),
                &self.y0,
                s - self.s0,
                self.tol,
            )
            .y
        }
    }

    /// Bisection for a sign change of `g` between `s0` (value `g0`) and `s1`.
    pub fn bisect(&self, g: impl Fn(&[f64; 3]) -> f64, g0: f64, tol: f64) -> (f64, [f64; 3]) {
        let (mut a, mut b) = (self.s0, self.s1);
        let mut best = (b, self.y1);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let y = self.state_at(mid);
            let v = g(&y);
            best = (mid, y);
            if v.abs() < tol || b - a < 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
                break;
            }
            if (v > 0.0) == (g0 > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        best
    }
}

/// Drives the adaptive integrator from `y0` over `[0, s_max]`, handing
/// every accepted step to `visit`. `visit` returns `false` to stop early.
pub(crate) fn run_flow(
    m: &MetricOfRevolution,
    y0: [f64; 3],
    s_max: f64,
    opts: &IntegrationOptions,
    mut visit: impl FnMut(&Segment<'_>) -> Result<bool>,
) -> Result<()> {
    let tol = &opts.tolerances;
    let margin = opts.pole_margin;
    if !(y0[0] > margin && y0[0] < PI - margin) {
        return Err(Error::PoleMargin { r: y0[0], margin });
    }
    let f = |y: &[f64; 3]| rhs(m, y);
    let (mut s, mut y, mut h) = (0.0, y0, tol.max_step);
    while s < s_max {
        let hh = h.min(s_max - s);
        let trial = dop853_step(&f, &y, hh, tol);
        let r1 = trial.y[0];
        let in_chart = r1 > 0.0 && r1 < PI;
        let err = if in_chart { trial.err } else { f64::INFINITY };
        let accepted = err <= 1.0;
        if accepted {
            let s1 = if hh == s_max - s { s_max } else { s + hh };
            if !(r1 > margin && r1 < PI - margin) {
                return Err(Error::PoleMargin { r: r1, margin });
            }
            let seg = Segment {
                m,
                tol,
                s0: s,
                y0: y,
                s1,
                y1: trial.y,
            };
            let go_on = visit(&seg)?;
            s = s1;
            y = trial.y;
            if !go_on {
                return Ok(());
            }
        }
        h = next_step(hh, err, accepted).min(tol.max_step);
        if h < tol.min_step && s < s_max {
            return Err(Error::StepFailure { s });
        }
    }
    Ok(())
}

/// Advances `state` by arc length `ds`.
pub fn step_geodesic(
    m: &MetricOfRevolution,
    state: &GeodesicState,
    ds: f64,
    opts: &IntegrationOptions,
) -> Result<GeodesicState> {
    if !(ds >= 0.0) {
        return Err(Error::Domain(format!("ds = {ds} must be non-negative")));
    }
    let c = state.clairaut();
    if c.abs() < opts.meridian_threshold {
        return Err(Error::PoleMargin {
            r: c.abs().asin(),
            margin: opts.meridian_threshold,
        });
    }
    let mut end = state.to_array();
    if ds > 0.0 {
        run_flow(m, end, ds, opts, |seg| {
            end = seg.y1;
            Ok(true)
        })?;
    }
    Ok(GeodesicState::from_array(end, state.s + ds))
}

/// Integrates a geodesic over `[0, s_max]`, logging equator crossings and
/// turning points. Orbits with `|c|` below the meridian threshold are
/// delegated to [`MeridianPath`].
pub fn integrate(
    m: &MetricOfRevolution,
    initial: &GeodesicState,
    s_max: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    if !(s_max > 0.0) {
        return Err(Error::Domain(format!("s_max = {s_max} must be positive")));
    }
    let c0 = initial.clairaut();
    if c0.abs() < opts.meridian_threshold {
        return Ok(MeridianPath::through(m, initial).trajectory(s_max, opts));
    }
    let equatorial = c0.abs() > EQUATORIAL_CLAIRAUT;
    let tiny = f64::MIN_POSITIVE;
    let y0 = initial.to_array();

    let mut records = vec![StepRecord::from_array(0.0, &y0)];
    let mut events = Vec::new();
    let mut diag = Diagnostics::default();
    let mut note = |y: &[f64; 3]| {
        let st = GeodesicState::from_array(*y, 0.0);
        diag.max_energy_drift = diag.max_energy_drift.max((st.energy(m) - 1.0).abs());
        diag.max_clairaut_drift = diag.max_clairaut_drift.max((st.clairaut() - c0).abs());
    };
    note(&y0);

    let g_eq = |y: &[f64; 3]| y[0] - PI / 2.0;
    let g_turn = |y: &[f64; 3]| y[2].sin();
    let mut prev_eq = g_eq(&y0);
    let mut prev_turn = g_turn(&y0);
    if !equatorial {
        if prev_eq.abs() <= opts.event_tol {
            events.push(Event::EquatorCrossing {
                s: 0.0,
                theta: y0[1],
                beta: y0[2],
                direction: CrossingDirection::from_heading(y0[2]),
            });
            prev_eq = y0[2].sin().signum() * tiny;
        }
        if prev_turn.abs() <= opts.event_tol {
            events.push(Event::TurningPoint {
                s: 0.0,
                r: y0[0],
                theta: y0[1],
            });
            prev_turn = y0[0].cos().signum() * tiny;
        }
    }

    run_flow(m, y0, s_max, opts, |seg| {
        records.push(StepRecord::from_array(seg.s1, &seg.y1));
        note(&seg.y1);
        if equatorial {
            return Ok(true);
        }
        let at_end = seg.s1 >= s_max;

        let mut cur = g_eq(&seg.y1);
        if cur == 0.0 {
            cur = -prev_eq.signum() * tiny;
        }
        if prev_eq * cur < 0.0 && !(at_end && g_eq(&seg.y1).abs() <= opts.event_tol) {
            let (s, y) = seg.bisect(g_eq, prev_eq, opts.event_tol);
            note(&y);
            events.push(Event::EquatorCrossing {
                s,
                theta: y[1],
                beta: y[2],
                direction: CrossingDirection::from_heading(y[2]),
            });
        }
        prev_eq = cur;

        let mut cur = g_turn(&seg.y1);
        if cur == 0.0 {
            cur = -prev_turn.signum() * tiny;
        }
        if prev_turn * cur < 0.0 && !(at_end && g_turn(&seg.y1).abs() <= opts.event_tol) {
            let (s, y) = seg.bisect(g_turn, prev_turn, opts.event_tol);
            note(&y);
            events.push(Event::TurningPoint {
                s,
                r: y[0],
                theta: y[1],
            });
        }
        prev_turn = cur;
        Ok(true)
    })?;

    events.sort_by(|a, b| a.s().total_cmp(&b.s()));
    Ok(Trajectory {
        label: m.label().to_string(),
        initial: GeodesicState { s: 0.0, ..*initial },
        s_max,
        records,
        events,
        diagnostics: diag,
        meridian: false,
    })
}

/// A meridian great circle `θ ∈ {θ_s, θ_s + π}` parametrised by the
/// unfolded colatitude `ρ`: `ρ ∈ [0, π]` runs south along `θ_s`,
/// `ρ ∈ [π, 2π]` runs north along `θ_s + π`. Arc length is
/// `σ(ρ) = ∫_0^ρ f(cos x) dx`.
#[derive(Debug, Clone)]
pub struct MeridianPath<'a> {
    m: &'a MetricOfRevolution,
    theta_south: f64,
    rho0: f64,
    sigma0: f64,
    length: f64,
    rule: GaussLegendre,
}

impl<'a> MeridianPath<'a> {
    /// The meridian leaving the north pole southward along `theta0`.
    pub fn from_north_pole(m: &'a MetricOfRevolution, theta0: f64) -> Self {
        Self::build(m, theta0, 0.0)
    }

    /// The meridian through `state`, snapping its heading to due north/south.
    pub fn through(m: &'a MetricOfRevolution, state: &GeodesicState) -> Self {
        if state.beta.sin() >= 0.0 {
            Self::build(m, state.theta, state.r)
        } else {
            Self::build(m, state.theta - PI, 2.0 * PI - state.r)
        }
    }

    fn build(m: &'a MetricOfRevolution, theta_south: f64, rho0: f64) -> Self {
        let rule = GaussLegendre::new(64);
        let length = rule.integrate(0.0, 2.0 * PI, |x| m.f_at(x));
        let mut p = MeridianPath {
            m,
            theta_south,
            rho0,
            sigma0: 0.0,
            length,
            rule,
        };
        p.sigma0 = p.sigma(rho0);
        p
    }

    /// Period of the meridian, `2 ∫_0^π f(cos r) dr`.
    pub fn period(&self) -> f64 {
        self.length
    }

    /// `σ(ρ)` for unfolded `ρ ≥ 0`.
    fn sigma(&self, rho: f64) -> f64 {
        let laps = (rho / (2.0 * PI)).floor();
        let rem = rho - laps * 2.0 * PI;
        let part = if rem == 0.0 {
            0.0
        } else {
            self.rule.integrate(0.0, rem, |x| self.m.f_at(x))
        };
        laps * self.length + part
    }

    /// Unfolded `ρ` at arc length `s` from the start.
    fn rho_at(&self, s: f64) -> f64 {
        let target = self.sigma0 + s;
        let laps = (target / self.length).floor();
        let rem = target - laps * self.length;
        let mut rho = 2.0 * PI * rem / self.length;
        for _ in 0..60 {
            let step = (self.sigma(rho) - rem) / self.m.f_at(rho);
            rho = (rho - step).clamp(0.0, 2.0 * PI);
            if step.abs() < 1e-15 {
                break;
            }
        }
        laps * 2.0 * PI + rho
    }

    fn state_at_rho(&self, rho: f64, s: f64) -> GeodesicState {
        let lap = (rho / PI).floor();
        let within = rho - lap * PI;
        let south = (lap as i64) % 2 == 0;
        GeodesicState {
            r: if south { within } else { PI - within },
            theta: self.theta_south + lap * PI,
            beta: if south { PI / 2.0 } else { 3.0 * PI / 2.0 },
            s,
        }
    }

    pub fn state_at(&self, s: f64) -> GeodesicState {
        self.state_at_rho(self.rho_at(s), s)
    }

    /// Arc length from the start to the next occurrence of `target` on this
    /// path, if `target` lies on it.
    pub fn arc_to(&self, target: &GeodesicState, tol: f64) -> Option<f64> {
        let rho_t = if target.beta.sin() >= 0.0 {
            target.r
        } else {
            2.0 * PI - target.r
        };
        let mut s = (self.sigma(rho_t) - self.sigma0).rem_euclid(self.length);
        if s < 1e-12 {
            s += self.length;
        }
        (phase_distance(&self.state_at(s), target) < tol).then_some(s)
    }

    pub fn trajectory(&self, s_max: f64, opts: &IntegrationOptions) -> Trajectory {
        let n = (s_max / opts.tolerances.max_step).ceil().max(1.0) as usize;
        let records = (0..=n)
            .map(|i| {
                let s = s_max * i as f64 / n as f64;
                let st = self.state_at(s);
                StepRecord {
                    s,
                    r: st.r,
                    theta: st.theta,
                    beta: st.beta,
                }
            })
            .collect();

        let rho_end = self.rho_at(s_max);
        let mut events = Vec::new();
        let mut k = (self.rho0 / (PI / 2.0) - 1e-12).ceil() as i64;
        loop {
            let rho = k as f64 * PI / 2.0;
            if rho > rho_end + 1e-9 {
                break;
            }
            let s = self.sigma(rho) - self.sigma0;
            if s >= -1e-12 && s < s_max - 1e-12 {
                let st = self.state_at_rho(rho, s.max(0.0));
                let s = s.max(0.0);
                if k % 2 == 0 {
                    events.push(Event::TurningPoint {
                        s,
                        r: if k.rem_euclid(4) == 0 { 0.0 } else { PI },
                        theta: st.theta,
                    });
                } else {
                    let south = k.rem_euclid(4) == 1;
                    events.push(Event::EquatorCrossing {
                        s,
                        theta: st.theta,
                        beta: st.beta,
                        direction: if south {
                            CrossingDirection::Up
                        } else {
                            CrossingDirection::Down
                        },
                    });
                }
            }
            k += 1;
        }

        Trajectory {
            label: self.m.label().to_string(),
            initial: self.state_at(0.0),
            s_max,
            records,
            events,
            diagnostics: Diagnostics::default(),
            meridian: true,
        }
    }
}

/// Meridian from the north pole along `theta0`, over `[0, s_max]`.
pub fn meridian_trajectory(
    m: &MetricOfRevolution,
    theta0: f64,
    s_max: f64,
    opts: &IntegrationOptions,
) -> Trajectory {
    MeridianPath::from_north_pole(m, theta0).trajectory(s_max, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodOptions {
    pub integration: IntegrationOptions,
    pub horizon: f64,
    pub match_tol: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            integration: IntegrationOptions::default(),
            horizon: 8.0 * PI,
            match_tol: DEFAULT_MATCH_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PeriodEstimate {
    Closed { period: f64, return_error: f64 },
    NotClosed { horizon: f64, closest_approach: f64 },
}

impl PeriodEstimate {
    pub fn period(&self) -> Option<f64> {
        match *self {
            PeriodEstimate::Closed { period, .. } => Some(period),
            PeriodEstimate::NotClosed { .. } => None,
        }
    }
}

/// Least `s ∈ (0, horizon]` at which the orbit of `initial` comes within
/// `match_tol` of `target` in phase distance.
///
/// Candidates are the crossings of the hyperplane through `target` normal
/// to the flow, each refined by minimising the phase distance over `s`.
fn return_to(
    m: &MetricOfRevolution,
    initial: &GeodesicState,
    target: &GeodesicState,
    opts: &PeriodOptions,
) -> Result<PeriodEstimate> {
    let c0 = initial.clairaut();
    if c0.abs() < opts.integration.meridian_threshold {
        let path = MeridianPath::through(m, initial);
        let snapped = path.state_at(0.0);
        let target = if phase_distance(target, initial) == 0.0 {
            &snapped
        } else {
            target
        };
        return Ok(match path.arc_to(target, opts.match_tol) {
            Some(s) if s <= opts.horizon => PeriodEstimate::Closed {
                period: s,
                return_error: phase_distance(&path.state_at(s), target),
            },
            _ => PeriodEstimate::NotClosed {
                horizon: opts.horizon,
                closest_approach: f64::NAN,
            },
        });
    }

    let t = target.to_array();
    let v = rhs(m, &t);
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let v = [v[0] / norm, v[1] / norm, v[2] / norm];
    let section = move |y: &[f64; 3]| {
        (y[0] - t[0]) * v[0] + wrap_pi(y[1] - t[1]) * v[1] + wrap_pi(y[2] - t[2]) * v[2]
    };
    let dist2 = move |y: &[f64; 3]| {
        let d = [y[0] - t[0], wrap_pi(y[1] - t[1]), wrap_pi(y[2] - t[2])];
        d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    };
    let dist = |y: &[f64; 3]| phase_distance(&GeodesicState::from_array(*y, 0.0), target);

    let y0 = initial.to_array();
    let mut prev = section(&y0);
    let mut closest = f64::INFINITY;
    let mut found = None;
    run_flow(m, y0, opts.horizon, &opts.integration, |seg| {
        let cur = section(&seg.y1);
        closest = closest.min(dist(&seg.y1));
        if prev < 0.0 && cur >= 0.0 {
            let (root, _) = seg.bisect(section, prev, 1e-14);
            let half = (seg.s1 - seg.s0).min(1e-2);
            let lo = (root - half).max(seg.s0);
            let hi = (root + half).min(seg.s1);
            let (s, _) = golden_min(lo, hi, 80, |s| dist2(&seg.state_at(s)));
            let d = dist(&seg.state_at(s));
            closest = closest.min(d);
            if d < opts.match_tol {
                found = Some((s, d));
                return Ok(false);
            }
        }
        prev = cur;
        Ok(true)
    })?;

    Ok(match found {
        Some((period, return_error)) => PeriodEstimate::Closed {
            period,
            return_error,
        },
        None => PeriodEstimate::NotClosed {
            horizon: opts.horizon,
            closest_approach: closest,
        },
    })
}

/// Least period `P(v)` of the geodesic through `initial`.
pub fn find_period(
    m: &MetricOfRevolution,
    initial: &GeodesicState,
    opts: &PeriodOptions,
) -> Result<PeriodEstimate> {
    return_to(m, initial, initial, opts)
}

/// Counts transversal self-crossings of the trajectory on `window`.
///
/// The window is treated as one closed period: parameter distances are
/// measured cyclically and pairs closer than `guard` are ignored.
pub fn self_intersections(
    traj: &Trajectory,
    window: (f64, f64),
    guard: f64,
) -> Result<SelfIntersections> {
    let (start, end) = window;
    let covered = (
        traj.records.first().map_or(f64::NAN, |r| r.s),
        traj.records.last().map_or(f64::NAN, |r| r.s),
    );
    if !(end > start) || !(covered.0 <= start + 1e-12 && covered.1 >= end - 1e-9) {
        return Err(Error::WindowNotCovered {
            start,
            end,
            covered_start: covered.0,
            covered_end: covered.1,
        });
    }
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    let interp = |s: f64| -> (f64, f64, f64) {
        let i = traj
            .records
            .partition_point(|r| r.s < s)
            .clamp(1, traj.records.len() - 1);
        let (a, b) = (&traj.records[i - 1], &traj.records[i]);
        let w = if b.s > a.s {
            (s - a.s) / (b.s - a.s)
        } else {
            0.0
        };
        (s, a.r + w * (b.r - a.r), a.theta + w * (b.theta - a.theta))
    };
    pts.push(interp(start));
    pts.extend(
        traj.records
            .iter()
            .filter(|r| r.s > start && r.s < end)
            .map(|r| (r.s, r.r, r.theta)),
    );
    pts.push(interp(end.min(covered.1)));
    Ok(intersect::count_self_crossings(&pts, end - start, guard))
}

/// Period and equator-image crossings of a geodesic on the round projective
/// plane, viewed as the sphere modulo the antipodal map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rp2Quotient {
    pub initial: GeodesicState,
    pub period: f64,
    pub return_error: f64,
    pub crossings: usize,
}

pub fn quotient_crossings_round_rp2(
    m: &MetricOfRevolution,
    initial: &GeodesicState,
    opts: &PeriodOptions,
) -> Result<Rp2Quotient> {
    if !m.is_round() {
        return Err(Error::Family {
            required: "the round metric",
            label: m.label().to_string(),
        });
    }
    if initial.clairaut().abs() > 1.0 - 1e-9 {
        return Err(Error::Precondition(
            "initial vector is tangent to the equator image".into(),
        ));
    }
    let mut best: Option<(f64, f64)> = None;
    for target in [initial.antipode(), *initial] {
        if let PeriodEstimate::Closed {
            period,
            return_error,
        } = return_to(m, initial, &target, opts)?
        {
            if best.is_none_or(|(p, _)| period < p) {
                best = Some((period, return_error));
            }
        }
    }
    let (period, return_error) = best.ok_or(Error::NoReturn {
        horizon: opts.horizon,
    })?;
    let traj = integrate(m, initial, period, &opts.integration)?;
    let crossings = traj.crossings_before(period - 1e-6);
    Ok(Rp2Quotient {
        initial: *initial,
        period,
        return_error,
        crossings,
    })
}

/// Seeded random initial conditions away from the poles, the equator and
/// the turning circles, so that event counts over a window are unambiguous.
pub fn sample_initial_states(seed: u64, n: usize) -> Vec<GeodesicState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.gen_range(0.2..PI - 0.2);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let beta = rng.gen_range(0.0..2.0 * PI);
        let st = GeodesicState::new(r, theta, beta);
        let c = st.clairaut().abs();
        if !(1e-2..=0.999).contains(&c) || (r - PI / 2.0).abs() < 1e-3 || beta.sin().abs() < 1e-3 {
            continue;
        }
        out.push(st);
    }
    out
}
