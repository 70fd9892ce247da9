//! Composite pipelines: the Zoll verification and the projective-plane
//! descent demonstration.

use std::f64::consts::PI;

use serde::Serialize;

use crate::batch::{self, Execution};
use crate::config::RunConfig;
use crate::darboux::{scan, DarbouxScan, RotationNumber, ScanOptions};
use crate::error::Result;
use crate::geodesics::{
    find_period, integrate, quotient_crossings_round_rp2, sample_initial_states,
    self_intersections, GeodesicState, PeriodEstimate, PeriodOptions, Rp2Quotient,
    DEFAULT_INJECTIVITY_GUARD,
};
use crate::metric::{DescentVerdict, MetricOfRevolution, ValidationReport};
use crate::returnmap::{build_report, ReturnMapOptions, ReturnMapReport};

/// Allowed distance of a measured period from 2π.
pub const PERIOD_TOL: f64 = 1e-4;
/// Allowed `max ‖F(v) − v‖` over the return-map grid.
pub const RETURN_MAP_TOL: f64 = 1e-5;
/// Allowed `max |I(t) − π|` over the Darboux grid.
pub const DARBOUX_TOL: f64 = 1e-8;
/// Number of initials in the projective-plane demonstration.
pub const RP2_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub t_grid: Vec<f64>,
    pub scan: ScanOptions,
    pub period: PeriodOptions,
    pub return_map: ReturnMapOptions,
    pub grid: [usize; 2],
    pub n_random: usize,
    pub seed: u64,
    pub guard: f64,
    pub validation_samples: usize,
    pub execution: Execution,
}

impl VerifyOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        VerifyOptions {
            t_grid: cfg.t_grid_points(),
            scan: cfg.scan(),
            period: cfg.period(),
            return_map: cfg.return_map(),
            grid: cfg.returnmap_grid,
            n_random: cfg.n_random,
            seed: cfg.seed,
            guard: DEFAULT_INJECTIVITY_GUARD,
            validation_samples: cfg.validation_samples,
            execution: cfg.execution,
        }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self::from_config(&RunConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodEntry {
    pub initial: GeodesicState,
    pub estimate: Option<PeriodEstimate>,
    pub self_intersections: Option<usize>,
    pub error: Option<String>,
}

impl PeriodEntry {
    pub fn period(&self) -> Option<f64> {
        self.estimate.and_then(|e| e.period())
    }

    fn passes(&self) -> bool {
        self.period()
            .is_some_and(|p| (p - 2.0 * PI).abs() < PERIOD_TOL)
    }
}

/// Least period and self-crossing count of one geodesic.
pub fn period_entry(
    m: &MetricOfRevolution,
    initial: &GeodesicState,
    opts: &PeriodOptions,
    guard: f64,
) -> PeriodEntry {
    let run = || -> Result<(PeriodEstimate, Option<usize>)> {
        let est = find_period(m, initial, opts)?;
        let crossings = match est.period() {
            Some(p) => {
                let traj = integrate(m, initial, p, &opts.integration)?;
                Some(self_intersections(&traj, (0.0, p), guard)?.count)
            }
            None => None,
        };
        Ok((est, crossings))
    };
    match run() {
        Ok((est, crossings)) => PeriodEntry {
            initial: *initial,
            estimate: Some(est),
            self_intersections: crossings,
            error: None,
        },
        Err(e) => PeriodEntry {
            initial: *initial,
            estimate: None,
            self_intersections: None,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZollReport {
    pub label: String,
    pub seed: u64,
    pub n_random: usize,
    /// Reported but not part of the verdict.
    pub validation: ValidationReport,
    pub scan: DarbouxScan,
    pub periods: Vec<PeriodEntry>,
    pub return_map: ReturnMapReport,
    /// `max ‖F(v) − v‖` over the grid; infinite if a sample has no image.
    pub max_first_return_displacement: f64,
    pub stages: Vec<StageResult>,
    pub pass: bool,
}

impl ZollReport {
    pub fn first_failure(&self) -> Option<&StageResult> {
        self.stages.iter().find(|s| !s.passed)
    }
}

/// Darboux scan, random period estimates with self-intersection counts,
/// and the return-map report. PASS iff the scan is constant at π, every
/// period is 2π, every orbit is simple and `F` is the identity.
pub fn zoll_verify(m: &MetricOfRevolution, opts: &VerifyOptions) -> Result<ZollReport> {
    let validation = m.validate(opts.validation_samples)?;

    let scan = scan(m, &opts.t_grid, &opts.scan)?;
    let scan_err = scan.max_abs_error_from(PI);
    let scan_ok = scan.is_zoll_compatible() && scan_err < DARBOUX_TOL;

    let initials = sample_initial_states(opts.seed, opts.n_random);
    let periods = batch::map(opts.execution, &initials, |st| {
        period_entry(m, st, &opts.period, opts.guard)
    });
    let closed_ok = periods.iter().filter(|p| p.passes()).count();
    let worst_period = periods
        .iter()
        .map(|p| p.period().map_or(f64::INFINITY, |x| (x - 2.0 * PI).abs()))
        .fold(0.0, f64::max);
    let crossings: usize = periods
        .iter()
        .map(|p| p.self_intersections.unwrap_or(0))
        .sum();
    let simple_ok = periods.iter().all(|p| p.self_intersections == Some(0));

    let return_map = build_report(m, opts.grid[0], opts.grid[1], &opts.return_map)?;
    let max_first_return_displacement = return_map
        .samples
        .iter()
        .map(|s| s.displacement_after(1).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let map_ok = max_first_return_displacement < RETURN_MAP_TOL;

    let stages = vec![
        StageResult {
            name: "darboux",
            passed: scan_ok,
            detail: format!(
                "rotation {}, max |I - pi| = {:.3e}, max deviation = {:.3e}",
                scan.rotation, scan_err, scan.max_deviation
            ),
        },
        StageResult {
            name: "periods",
            passed: closed_ok == periods.len(),
            detail: format!(
                "{closed_ok}/{} closed with period 2pi ± {PERIOD_TOL:e}, worst |P - 2pi| = {worst_period:.3e}",
                periods.len()
            ),
        },
        StageResult {
            name: "simplicity",
            passed: simple_ok,
            detail: format!(
                "{crossings} self-intersections over {}/{} closed orbits",
                periods.iter().filter(|p| p.self_intersections.is_some()).count(),
                periods.len()
            ),
        },
        StageResult {
            name: "return_map",
            passed: map_ok,
            detail: format!(
                "max |F(v) - v| = {max_first_return_displacement:.3e}, m0 = {}, resolved {}/{}",
                return_map.m0.map_or("-".to_string(), |m0| m0.to_string()),
                return_map.resolved,
                return_map.samples.len()
            ),
        },
    ];
    let pass = stages.iter().all(|s| s.passed);
    Ok(ZollReport {
        label: m.label().to_string(),
        seed: opts.seed,
        n_random: opts.n_random,
        validation,
        scan,
        periods,
        return_map,
        max_first_return_displacement,
        stages,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rp2Report {
    pub label: String,
    pub verdict: DescentVerdict,
    /// Quotient periods and crossings; only for the round metric.
    pub quotient: Vec<Rp2Quotient>,
    /// Rotation number of a descending non-round metric.
    pub rotation: Option<RotationNumber>,
}

impl Rp2Report {
    pub fn quotient_ok(&self) -> bool {
        self.quotient
            .iter()
            .all(|q| (q.period - PI).abs() < 1e-6 && q.crossings == 1)
    }
}

pub fn rp2_report(m: &MetricOfRevolution, opts: &VerifyOptions) -> Result<Rp2Report> {
    let verdict = m.rp2_descent_check();
    let mut quotient = Vec::new();
    let mut rotation = None;
    if verdict.descends() {
        if m.is_round() {
            let initials = sample_initial_states(opts.seed, RP2_SAMPLES);
            quotient = batch::map(opts.execution, &initials, |st| {
                quotient_crossings_round_rp2(m, st, &opts.period)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        } else {
            rotation = Some(scan(m, &opts.t_grid, &opts.scan)?.rotation);
        }
    }
    Ok(Rp2Report {
        label: m.label().to_string(),
        verdict,
        quotient,
        rotation,
    })
}
