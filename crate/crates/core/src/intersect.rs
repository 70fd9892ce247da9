//! Transversal self-crossings of a closed polyline on the unit sphere.
//!
//! Vertices `(r, θ)` are embedded as `(sin r cos θ, sin r sin θ, cos r)` and
//! consecutive vertices are joined by minor great-circle arcs. Two arcs
//! `AB`, `CD` cross when `C, D` lie on opposite sides of the plane of `AB`
//! and vice versa, with `A·C > 0` ruling out the antipodal solution. Zero
//! orientations are counted as negative so a crossing through a shared
//! vertex is seen exactly once.

use std::collections::HashMap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingPair {
    pub s_a: f64,
    pub s_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfIntersections {
    pub count: usize,
    pub pairs: Vec<CrossingPair>,
}

impl SelfIntersections {
    pub fn is_simple(&self) -> bool {
        self.count == 0
    }
}

type V3 = [f64; 3];

fn embed(r: f64, theta: f64) -> V3 {
    let (sr, cr) = r.sin_cos();
    let (st, ct) = theta.sin_cos();
    [sr * ct, sr * st, cr]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det(a: &V3, b: &V3, c: &V3) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn side(x: f64) -> bool {
    x > 0.0
}

fn arcs_cross(a: &V3, b: &V3, c: &V3, d: &V3) -> bool {
    side(det(a, b, c)) != side(det(a, b, d))
        && side(det(c, d, a)) != side(det(c, d, b))
        && dot(a, c) > 0.0
}

/// Counts crossings between non-neighbouring arcs of the polyline
/// `pts = [(s, r, θ)]`. Parameter distances are cyclic with the given
/// `period`; arc pairs closer than `guard` are never compared.
pub fn count_self_crossings(pts: &[(f64, f64, f64)], period: f64, guard: f64) -> SelfIntersections {
    let none = SelfIntersections {
        count: 0,
        pairs: Vec::new(),
    };
    if pts.len() < 4 {
        return none;
    }
    let v: Vec<V3> = pts.iter().map(|&(_, r, t)| embed(r, t)).collect();
    let nseg = v.len() - 1;
    let chord = |i: usize| {
        let (a, b) = (&v[i], &v[i + 1]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    let cell = (0..nseg).map(chord).fold(0.0, f64::max).max(1e-9);

    let key = |i: usize| -> [i64; 3] {
        let (a, b) = (&v[i], &v[i + 1]);
        std::array::from_fn(|k| (0.5 * (a[k] + b[k]) / cell).floor() as i64)
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for i in 0..nseg {
        grid.entry(key(i)).or_default().push(i);
    }

    let cyclic = |x: f64, y: f64| {
        let d = (x - y).abs().rem_euclid(period);
        d.min(period - d)
    };
    let gap = |i: usize, j: usize| {
        let (si, ei, sj, ej) = (pts[i].0, pts[i + 1].0, pts[j].0, pts[j + 1].0);
        cyclic(si, sj)
            .min(cyclic(si, ej))
            .min(cyclic(ei, sj))
            .min(cyclic(ei, ej))
    };

    let mut pairs = Vec::new();
    for i in 0..nseg {
        let k = key(i);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i || gap(i, j) < guard {
                            continue;
                        }
                        if arcs_cross(&v[i], &v[i + 1], &v[j], &v[j + 1]) {
                            pairs.push(CrossingPair {
                                s_a: 0.5 * (pts[i].0 + pts[i + 1].0),
                                s_b: 0.5 * (pts[j].0 + pts[j + 1].0),
                            });
                        }
                    }
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.s_a.total_cmp(&b.s_a).then(a.s_b.total_cmp(&b.s_b)));
    SelfIntersections {
        count: pairs.len(),
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn figure_eight(n: usize) -> Vec<(f64, f64, f64)> {
        let mut pts: Vec<_> = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (phi, PI / 2.0 + 0.3 * (2.0 * phi).sin(), 0.5 * phi.sin())
            })
            .collect();
        let first = pts[0];
        pts.push((2.0 * PI + first.0, first.1, first.2));
        pts
    }

    #[test]
    fn figure_eight_crosses_once() {
        for n in [64, 200, 1001] {
            let got = count_self_crossings(&figure_eight(n), 2.0 * PI, 0.1);
            assert_eq!(got.count, 1, "n = {n}");
        }
    }

    #[test]
    fn great_circle_is_simple() {
        let n = 300;
        let pts: Vec<_> = (0..=n)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                (s, PI / 2.0, s)
            })
            .collect();
        assert!(count_self_crossings(&pts, 2.0 * PI, 0.1).is_simple());
    }

    #[test]
    fn hashed_search_matches_brute_force() {
        let n = 800;
        let pts: Vec<_> = (0..=n)
            .map(|k| {
                let p = 2.0 * PI * k as f64 / n as f64;
                (p, PI / 2.0 + 0.3 * (3.0 * p).sin(), 0.4 * (2.0 * p).sin())
            })
            .collect();
        let got = count_self_crossings(&pts, 2.0 * PI, 0.1).count;
        let expected = brute_force(&pts, 2.0 * PI, 0.1);
        assert_eq!(got, expected);
        assert!(got > 1);
    }

    fn brute_force(pts: &[(f64, f64, f64)], period: f64, guard: f64) -> usize {
        let v: Vec<V3> = pts.iter().map(|&(_, r, t)| embed(r, t)).collect();
        let cyc = |x: f64, y: f64| {
            let d = (x - y).abs().rem_euclid(period);
            d.min(period - d)
        };
        let mut n = 0;
        for i in 0..v.len() - 1 {
            for j in i + 1..v.len() - 1 {
                let g = [
                    cyc(pts[i].0, pts[j].0),
                    cyc(pts[i].0, pts[j + 1].0),
                    cyc(pts[i + 1].0, pts[j].0),
                    cyc(pts[i + 1].0, pts[j + 1].0),
                ]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
                if g >= guard && arcs_cross(&v[i], &v[i + 1], &v[j], &v[j + 1]) {
                    n += 1;
                }
            }
        }
        n
    }
}
