//! CSV renderings of the computed objects.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files. Missing values are empty fields.

use std::fmt::Write;

use crate::darboux::DarbouxScan;
use crate::geodesics::{Event, GeodesicState, Trajectory};
use crate::metric::{CurvatureProfile, MetricOfRevolution};
use crate::returnmap::ReturnMapReport;
use crate::wrap_2pi;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `s,r,theta,beta,c,energy`; θ reduced to `[0, 2π)`.
pub fn trajectory_csv(m: &MetricOfRevolution, traj: &Trajectory) -> String {
    let mut out = String::from("s,r,theta,beta,c,energy\n");
    for rec in &traj.records {
        let st = GeodesicState {
            r: rec.r,
            theta: rec.theta,
            beta: rec.beta,
            s: rec.s,
        };
        let (c, energy) = if traj.meridian {
            (0.0, 1.0)
        } else {
            (st.clairaut(), st.energy(m))
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            rec.s,
            rec.r,
            wrap_2pi(rec.theta),
            wrap_2pi(rec.beta),
            c,
            energy
        );
    }
    out
}

/// `s,type,theta,direction`; direction is empty for turning points.
pub fn events_csv(traj: &Trajectory) -> String {
    let mut out = String::from("s,type,theta,direction\n");
    for ev in &traj.events {
        let _ = match ev {
            Event::EquatorCrossing {
                s,
                theta,
                direction,
                ..
            } => writeln!(
                out,
                "{s},equator,{},{}",
                wrap_2pi(*theta),
                direction.as_str()
            ),
            Event::TurningPoint { s, theta, .. } => {
                writeln!(out, "{s},turning,{},", wrap_2pi(*theta))
            }
        };
    }
    out
}

/// `t,I,deviation`.
pub fn darboux_csv(scan: &DarbouxScan) -> String {
    let mut out = String::from("t,I,deviation\n");
    for p in &scan.points {
        let _ = writeln!(out, "{},{},{}", p.t, p.value, p.deviation);
    }
    out
}

/// `x,alpha,alpha_norm,Fx,Falpha,flight,Per,crossings,simple`.
pub fn returnmap_csv(report: &ReturnMapReport) -> String {
    let mut out = String::from("x,alpha,alpha_norm,Fx,Falpha,flight,Per,crossings,simple\n");
    for s in &report.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.v.x,
            s.v.alpha,
            s.v.alpha_norm(),
            opt(s.fv.map(|p| p.x)),
            opt(s.fv.map(|p| p.alpha)),
            opt(s.flight),
            opt(s.per),
            opt(s.crossings),
            opt(s.simple),
        );
    }
    out
}

/// `r,sigma`.
pub fn curvature_csv(profile: &CurvatureProfile) -> String {
    let mut out = String::from("r,sigma\n");
    for p in &profile.samples {
        let _ = writeln!(out, "{},{}", p.r, p.sigma);
    }
    out
}
