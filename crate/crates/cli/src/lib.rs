//! Command-line front end: reads a JSON run config, runs one pipeline and
//! writes CSV data, SVG plots and a plain-text summary into `--out`.
//!
//! Exit codes: 0 success / PASS, 1 FAIL or validation violation,
//! 2 usage or configuration error, 3 numerical or I/O failure.

pub mod plot;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use zollgeo::config::{ConfigError, RunConfig};
use zollgeo::darboux::{scan, RotationNumber};
use zollgeo::export;
use zollgeo::geodesics::{integrate, phase_distance, Event};
use zollgeo::metric::{CurvatureProfile, CurvatureSample, DescentVerdict, ValidationReport};
use zollgeo::returnmap::build_report;
use zollgeo::verify::{rp2_report, zoll_verify, VerifyOptions};
use zollgeo::{GeodesicState, MetricOfRevolution};

use plot::Series;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_COMPUTE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "zollgeo",
    version,
    about = "Closed geodesics on spheres of revolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate the metric and write its curvature profile.
    Metric {
        #[command(flatten)]
        common: Common,
        /// Number of curvature samples (overrides `curvature_samples`).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Integrate one geodesic and plot its trace.
    Geodesic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, default_value_t = 0.3)]
        beta0: f64,
        /// Arc length to integrate.
        #[arg(long, default_value_t = 2.0 * PI)]
        length: f64,
    },
    /// Scan the Darboux integral over the turning colatitude.
    Darboux {
        #[command(flatten)]
        common: Common,
        /// Number of grid points (overrides `t_grid`).
        #[arg(long)]
        grid: Option<usize>,
        /// Gauss–Legendre nodes (overrides `quadrature_nodes`).
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Sample the equatorial first-return map.
    Returnmap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nalpha: Option<usize>,
        /// Total flight allowed per sample (overrides `return_horizon`).
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Composite check that every geodesic is simple and closed of length 2π.
    ZollVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_random: Option<usize>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nalpha: Option<usize>,
    },
    /// Antipodal descent check and the round quotient demonstration.
    Rp2 {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(zollgeo::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Serialize(serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Serialize(e) => write!(f, "cannot serialize report: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_COMPUTE,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<zollgeo::Error> for CliError {
    fn from(e: zollgeo::Error) -> Self {
        CliError::Compute(e)
    }
}

/// What a command produced: its summary text and whether it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Files are collected first and written once the computation is done.
struct Output {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn write(self) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        for (name, content) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, content).map_err(io(&path))?;
        }
        Ok(())
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid(msg.into()))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Metric { common, samples } => {
            let mut cfg = load(common)?;
            if let Some(n) = *samples {
                if n < 2 {
                    return Err(invalid("--samples must be at least 2"));
                }
                cfg.curvature_samples = n;
            }
            cmd_metric(&cfg, &common.out)
        }
        Command::Geodesic {
            common,
            r0,
            theta0,
            beta0,
            length,
        } => {
            let cfg = load(common)?;
            if !(*r0 > 0.0 && *r0 < PI) || !theta0.is_finite() || !beta0.is_finite() {
                return Err(invalid("need 0 < r0 < π and finite theta0, beta0"));
            }
            if !(*length > 0.0 && length.is_finite()) {
                return Err(invalid("--length must be positive"));
            }
            cmd_geodesic(
                &cfg,
                GeodesicState::new(*r0, *theta0, *beta0),
                *length,
                &common.out,
            )
        }
        Command::Darboux {
            common,
            grid,
            nodes,
        } => {
            let mut cfg = load(common)?;
            if let Some(n) = *grid {
                if n < 2 {
                    return Err(invalid("--grid must be at least 2"));
                }
                cfg.t_grid = n;
            }
            if let Some(n) = *nodes {
                if n < 8 {
                    return Err(invalid("--nodes must be at least 8"));
                }
                cfg.quadrature_nodes = n;
            }
            cmd_darboux(&cfg, &common.out)
        }
        Command::Returnmap {
            common,
            nx,
            nalpha,
            horizon,
        } => {
            let mut cfg = load(common)?;
            apply_grid(&mut cfg, *nx, *nalpha)?;
            if let Some(h) = *horizon {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(invalid("--horizon must be positive"));
                }
                cfg.return_horizon = h;
            }
            cmd_returnmap(&cfg, &common.out)
        }
        Command::ZollVerify {
            common,
            n_random,
            nx,
            nalpha,
        } => {
            let mut cfg = load(common)?;
            apply_grid(&mut cfg, *nx, *nalpha)?;
            if let Some(n) = *n_random {
                cfg.n_random = n;
            }
            cmd_zoll_verify(&cfg, &common.out)
        }
        Command::Rp2 { common } => {
            let cfg = load(common)?;
            cmd_rp2(&cfg, &common.out)
        }
    }
}

fn apply_grid(
    cfg: &mut RunConfig,
    nx: Option<usize>,
    nalpha: Option<usize>,
) -> Result<(), CliError> {
    for (slot, v) in [(0, nx), (1, nalpha)] {
        if let Some(n) = v {
            if n < 2 {
                return Err(invalid(
                    "return-map grid needs at least two points per axis",
                ));
            }
            cfg.returnmap_grid[slot] = n;
        }
    }
    Ok(())
}

fn validation_text(out: &mut String, v: &ValidationReport) {
    let _ = writeln!(
        out,
        "max |h| = {:.6e} at u = {:.6}",
        v.max_abs_h, v.max_abs_h_at
    );
    let _ = writeln!(out, "min f = {:.6e}", v.min_f);
    if v.is_valid() {
        let _ = writeln!(out, "validation: OK ({} samples)", v.n_samples);
    } else {
        let _ = writeln!(out, "validation: {} violation(s)", v.violations.len());
        for viol in &v.violations {
            let kind = serde_json::to_value(viol.kind)
                .ok()
                .and_then(|k| k.as_str().map(str::to_string))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {kind}: value {:.6e} at u = {:.6}",
                viol.value, viol.witness_u
            );
        }
    }
}

/// Closed-form profile for the Zoll family, central differences of the
/// metric otherwise.
fn curvature(m: &MetricOfRevolution, cfg: &RunConfig) -> zollgeo::Result<CurvatureProfile> {
    if m.is_zoll_candidate() {
        return m.curvature_profile_with_margin(cfg.curvature_samples, cfg.pole_margin);
    }
    let n = cfg.curvature_samples;
    let lo = cfg.pole_margin.max(1e-3);
    let hi = PI - lo;
    let samples = (0..n)
        .map(|i| {
            let r = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            m.numerical_gauss_curvature(r, 1e-5)
                .map(|sigma| CurvatureSample { r, sigma })
        })
        .collect::<zollgeo::Result<Vec<_>>>()?;
    Ok(CurvatureProfile { samples })
}

pub fn cmd_metric(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let validation = m.validate(cfg.validation_samples)?;
    let mut summary = format!("metric {}\n", m.label());
    validation_text(&mut summary, &validation);

    let mut out = Output::new(out_dir);
    match curvature(&m, cfg) {
        Ok(profile) => {
            let method = if m.is_zoll_candidate() {
                "closed form"
            } else {
                "finite differences"
            };
            let _ = writeln!(
                summary,
                "curvature ({method}, {} samples): min {:.6}, max {:.6}",
                profile.samples.len(),
                profile.min(),
                profile.max()
            );
            for north in [true, false] {
                if let Ok(k) = m.pole_curvature(north) {
                    let _ = writeln!(
                        summary,
                        "pole curvature ({}): {k:.6}",
                        if north { "north" } else { "south" }
                    );
                }
            }
            let pts = profile.samples.iter().map(|s| (s.r, s.sigma)).collect();
            out.add(
                "curvature_profile.svg",
                plot::line_plot(
                    &format!("Gaussian curvature, {}", m.label()),
                    "colatitude r",
                    "sigma",
                    &[Series {
                        label: "sigma(r)",
                        points: pts,
                        color: "#c0392b",
                    }],
                    &[(1.0, "round")],
                ),
            );
            out.add("curvature_profile.csv", export::curvature_csv(&profile));
        }
        // an invalid metric may not even have a curvature; the violation
        // is the answer
        Err(e) if !validation.is_valid() => {
            let _ = writeln!(summary, "curvature: not computed ({e})");
        }
        Err(e) => return Err(e.into()),
    }
    out.add("metric_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome {
        summary,
        pass: validation.is_valid(),
    })
}

pub fn cmd_geodesic(
    cfg: &RunConfig,
    initial: GeodesicState,
    length: f64,
    out_dir: &Path,
) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let traj = integrate(&m, &initial, length, &cfg.integration())?;
    let last = traj.last().ok_or_else(|| invalid("empty trajectory"))?;
    let end = GeodesicState {
        r: last.r,
        theta: last.theta,
        beta: last.beta,
        s: last.s,
    };
    let crossings: Vec<(f64, f64)> = traj
        .equator_crossings()
        .map(|e| (PI / 2.0, e.theta()))
        .collect();
    let turning = traj
        .events
        .iter()
        .filter(|e| matches!(e, Event::TurningPoint { .. }))
        .count();

    let mut summary = format!("geodesic on {}\n", m.label());
    let _ = writeln!(
        summary,
        "initial r = {}, theta = {}, beta = {}, Clairaut c = {:.12}",
        initial.r,
        initial.theta,
        initial.beta,
        initial.clairaut()
    );
    let _ = writeln!(
        summary,
        "length {length}, {} records{}",
        traj.records.len(),
        if traj.meridian { ", meridian path" } else { "" }
    );
    let _ = writeln!(summary, "equator crossings: {}", crossings.len());
    let _ = writeln!(summary, "turning points: {turning}");
    let _ = writeln!(
        summary,
        "max Clairaut drift {:.3e}, max energy drift {:.3e}",
        traj.diagnostics.max_clairaut_drift, traj.diagnostics.max_energy_drift
    );
    let _ = writeln!(
        summary,
        "phase distance from start at s = {}: {:.6e}",
        end.s,
        phase_distance(&initial, &end)
    );

    let curve: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.r, r.theta)).collect();
    let mut out = Output::new(out_dir);
    out.add("trajectory.csv", export::trajectory_csv(&m, &traj));
    out.add("events.csv", export::events_csv(&traj));
    out.add(
        "trajectory.svg",
        plot::sphere_trace(&format!("Geodesic on {}", m.label()), &curve, &crossings),
    );
    out.add("geodesic_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome {
        summary,
        pass: true,
    })
}

pub fn cmd_darboux(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let s = scan(&m, &cfg.t_grid_points(), &cfg.scan())?;
    let mut summary = format!("Darboux scan of {}\n", m.label());
    let _ = writeln!(
        summary,
        "grid points: {}, nodes: {}",
        s.points.len(),
        cfg.quadrature_nodes
    );
    let _ = writeln!(summary, "mean I = {:.15}", s.mean);
    let _ = writeln!(summary, "max |I - pi| = {:.3e}", s.max_abs_error_from(PI));
    let _ = writeln!(summary, "max deviation from mean = {:.3e}", s.max_deviation);
    let _ = writeln!(summary, "unconverged points: {}", s.unconverged);
    let _ = writeln!(summary, "rotation number: {}", s.rotation);
    let _ = writeln!(summary, "verdict: {}", s.verdict());

    let pts = s.points.iter().map(|p| (p.t, p.value)).collect();
    let mut out = Output::new(out_dir);
    out.add("darboux_scan.csv", export::darboux_csv(&s));
    out.add(
        "darboux_scan.svg",
        plot::line_plot(
            &format!("Darboux integral, {}", m.label()),
            "turning colatitude t",
            "I(t)",
            &[Series {
                label: "I(t)",
                points: pts,
                color: "#1f4e9c",
            }],
            &[(PI, "pi")],
        ),
    );
    out.add("darboux_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome {
        summary,
        pass: true,
    })
}

pub fn cmd_returnmap(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let [nx, nalpha] = cfg.returnmap_grid;
    let rep = build_report(&m, nx, nalpha, &cfg.return_map())?;
    let mut summary = format!("return map of {} on a {nx}x{nalpha} grid\n", m.label());
    let _ = writeln!(summary, "resolved: {}/{}", rep.resolved, rep.samples.len());
    let _ = writeln!(
        summary,
        "m0 = {}, Per spectrum = {:?} (within {{m0, 2m0}}: {})",
        rep.m0.map_or("-".into(), |v| v.to_string()),
        rep.spectrum,
        rep.spectrum_ok
    );
    let _ = writeln!(summary, "max |F^m0(v) - v| = {:.3e}", rep.max_displacement);
    let _ = writeln!(
        summary,
        "simple orbits: {}/{}",
        rep.simple_count, rep.resolved
    );
    let _ = writeln!(
        summary,
        "2 Per = crossings everywhere: {}",
        rep.relation_holds
    );
    let _ = writeln!(summary, "injective on the grid: {}", rep.injective);
    for p in &rep.boundary {
        let _ = writeln!(
            summary,
            "boundary alpha = {:.3e}: displacement {:.3e}, flight {:.6}",
            p.alpha, p.displacement, p.flight
        );
    }
    let _ = writeln!(
        summary,
        "displacement shrinks toward the boundary: {}",
        rep.boundary_shrinks
    );

    let arrows: Vec<_> = rep
        .samples
        .iter()
        .filter_map(|s| {
            s.fv.map(|f| ((s.v.x, s.v.alpha_norm()), (f.x, f.alpha_norm())))
        })
        .collect();
    let mut out = Output::new(out_dir);
    out.add("returnmap.csv", export::returnmap_csv(&rep));
    out.add(
        "returnmap.svg",
        plot::displacement_field(&format!("First return v -> F(v), {}", m.label()), &arrows),
    );
    out.add("returnmap_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome {
        summary,
        pass: true,
    })
}

pub fn cmd_zoll_verify(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let rep = zoll_verify(&m, &VerifyOptions::from_config(cfg))?;
    let mut summary = format!(
        "Zoll verification of {} (seed {}, {} random geodesics)\n",
        m.label(),
        rep.seed,
        rep.n_random
    );
    validation_text(&mut summary, &rep.validation);
    for st in &rep.stages {
        let _ = writeln!(
            summary,
            "[{}] {}: {}",
            if st.passed { "PASS" } else { "FAIL" },
            st.name,
            st.detail
        );
    }
    match rep.first_failure() {
        None => summary.push_str("verdict: PASS\n"),
        Some(st) => {
            let _ = writeln!(summary, "verdict: FAIL (first failing stage: {})", st.name);
        }
    }
    let json = serde_json::to_string_pretty(&rep).map_err(CliError::Serialize)?;
    let mut out = Output::new(out_dir);
    out.add("zoll_report.json", json + "\n");
    out.add("zoll_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome {
        summary,
        pass: rep.pass,
    })
}

pub fn cmd_rp2(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let m = cfg.metric();
    let rep = rp2_report(&m, &VerifyOptions::from_config(cfg))?;
    let mut summary = format!("projective-plane descent of {}\n", m.label());
    let mut out = Output::new(out_dir);
    let mut pass = true;
    match rep.verdict {
        DescentVerdict::Descends { max_asymmetry } => {
            let _ = writeln!(summary, "descends: f(u) = f(-u) up to {max_asymmetry:.3e}");
            if !rep.quotient.is_empty() {
                let mut csv = String::from("r0,theta0,beta0,period,return_error,crossings\n");
                for q in &rep.quotient {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        q.initial.r,
                        q.initial.theta,
                        q.initial.beta,
                        q.period,
                        q.return_error,
                        q.crossings
                    );
                    let _ = writeln!(
                        summary,
                        "  quotient period {:.10}, equator crossings {}",
                        q.period, q.crossings
                    );
                }
                pass = rep.quotient_ok();
                let _ = writeln!(
                    summary,
                    "all {} quotient geodesics have period pi and cross the equator line once: {pass}",
                    rep.quotient.len()
                );
                out.add("rp2_quotient.csv", csv);
            }
            if let Some(rot) = rep.rotation {
                let _ = writeln!(summary, "Darboux rotation number on the sphere: {rot}");
                if !matches!(rot, RotationNumber::Rational { p, q } if p == q) {
                    summary
                        .push_str("descends, but not every geodesic is closed with period 2pi\n");
                }
            }
        }
        DescentVerdict::Obstructed {
            witness_u,
            asymmetry,
        } => {
            let _ = writeln!(
                summary,
                "obstructed: |f(u) - f(-u)| = {asymmetry:.6e} at u = {witness_u:.6}"
            );
            summary.push_str(
                "no metric of revolution in this family other than the round one \
                 has all geodesics closed and descends to the projective plane\n",
            );
        }
    }
    out.add("rp2_summary.txt", summary.clone());
    out.write()?;
    Ok(Outcome { summary, pass })
}
