//! Closed geodesics on rotationally symmetric spheres.
//!
//! A metric of revolution on the coordinate sphere is written
//! `g = f(cos r)^2 dr^2 + sin^2 r dθ^2` with `f(u) = 1 + h(u) + e(u)`, where
//! `h` is odd (the Zoll family) and `e` is an optional even perturbation.
//! The crate evaluates curvature, integrates unit-speed geodesics, evaluates
//! the Darboux closedness integral, builds the first-return map on the
//! equator and checks which metrics descend to the projective plane.
//!
//! Batch work (grids, random samples, scans) runs on rayon when the
//! `parallel` feature is enabled and falls back to a plain loop otherwise;
//! see [`batch::Execution`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod config;
pub mod darboux;
pub mod error;
pub mod export;
pub mod geodesics;
pub mod intersect;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod returnmap;
pub mod verify;

pub use error::{Error, Result};
pub use geodesics::{GeodesicState, Trajectory};
pub use metric::{EvenPerturbation, HFunction, MetricOfRevolution};

use std::f64::consts::PI;

/// Reduces an angle difference to `(-π, π]`.
pub(crate) fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Reduces an angle to `[0, 2π)`.
pub(crate) fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Unsigned distance between two angles on the circle.
pub(crate) fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(
    mut lo: f64,
    mut hi: f64,
    iters: usize,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
