//! Minimal self-contained SVG plots.

use std::f64::consts::PI;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

/// Data range padded so that constant data still gets a visible band.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if span < 1e-9 * scale {
        let c = 0.5 * (lo + hi);
        (c - 0.05 * scale, c + 0.05 * scale)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1) = (LEFT, W - RIGHT);
        let (y0, y1) = (H - BOTTOM, TOP);
        let _ = writeln!(
            out,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 12.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
}

/// Line plot with optional horizontal reference lines.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series<'_>],
    reference: &[(f64, &str)],
) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut xl, mut xh, mut yl, mut yh) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    for &(y, _) in reference {
        yl = yl.min(y);
        yh = yh.max(y);
    }
    let frame = Frame {
        x: padded(xl, xh),
        y: padded(yl, yh),
    };

    let mut out = String::new();
    header(&mut out, title);
    frame.axes(&mut out, xlabel, ylabel);
    for &(y, label) in reference {
        let py = frame.py(y);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{py}" x2="{}" y2="{py}" stroke="#888" stroke-dasharray="6 4"/><text x="{}" y="{}" text-anchor="end" fill="#555">{}</text>"##,
            W - RIGHT,
            W - RIGHT - 4.0,
            py - 4.0,
            escape(label)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut path = String::new();
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2},{:.2} ",
                if i == 0 { "M" } else { "L" },
                frame.px(x),
                frame.py(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path.trim_end(),
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            LEFT + 10.0,
            TOP + 16.0 + 14.0 * k as f64,
            s.color,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Orthographic view of a curve on the sphere given as `(r, θ)` pairs.
/// Hidden parts are dashed; `markers` are drawn as open circles.
pub fn sphere_trace(title: &str, curve: &[(f64, f64)], markers: &[(f64, f64)]) -> String {
    let (cx, cy, rad) = (W / 2.0, (H + TOP - 10.0) / 2.0, (H - TOP - 30.0) / 2.0);
    // view from latitude 25° above the equator
    let tilt = 25f64.to_radians();
    let project = |r: f64, t: f64| {
        let (x, y, z) = (r.sin() * t.cos(), r.sin() * t.sin(), r.cos());
        let (ys, zs) = (
            y * tilt.cos() + z * tilt.sin(),
            -y * tilt.sin() + z * tilt.cos(),
        );
        // the viewer looks down the x axis, so x is the depth
        (cx + rad * ys, cy - rad * zs, x)
    };

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r##"<circle cx="{cx}" cy="{cy}" r="{rad}" fill="#f4f6fb" stroke="#333"/>"##
    );
    let eq: Vec<(f64, f64, f64)> = (0..=180)
        .map(|i| project(PI / 2.0, 2.0 * PI * i as f64 / 180.0))
        .collect();
    draw_depth_path(&mut out, &eq, "#999");
    let pts: Vec<(f64, f64, f64)> = curve.iter().map(|&(r, t)| project(r, t)).collect();
    draw_depth_path(&mut out, &pts, "#c0392b");
    for &(r, t) in markers {
        let (x, y, d) = project(r, t);
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="#1f4e9c" stroke-width="{}"/>"##,
            if d >= 0.0 { 2 } else { 1 }
        );
    }
    out.push_str("</svg>\n");
    out
}

fn draw_depth_path(out: &mut String, pts: &[(f64, f64, f64)], color: &str) {
    let mut i = 0;
    while i + 1 < pts.len() {
        let front = pts[i].2 >= 0.0;
        let mut path = format!("M{:.2},{:.2}", pts[i].0, pts[i].1);
        let mut j = i + 1;
        while j < pts.len() && (pts[j].2 >= 0.0) == front {
            let _ = write!(path, " L{:.2},{:.2}", pts[j].0, pts[j].1);
            j += 1;
        }
        if j < pts.len() {
            let _ = write!(path, " L{:.2},{:.2}", pts[j].0, pts[j].1);
        }
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="{}"{}/>"#,
            if front { 1.6 } else { 1.0 },
            if front {
                ""
            } else {
                r#" stroke-dasharray="4 3" opacity="0.6""#
            }
        );
        i = j.max(i + 1);
    }
}

pub type Arrow = ((f64, f64), (f64, f64));

/// Arrows from `v` to `F(v)` in the `(x, α/π)` annulus coordinates,
/// with the `x` displacement taken the short way round.
pub fn displacement_field(title: &str, arrows: &[Arrow]) -> String {
    let frame = Frame {
        x: (0.0, 2.0 * PI),
        y: (0.0, 1.0),
    };
    let mut out = String::new();
    header(&mut out, title);
    frame.axes(&mut out, "x (position on the equator, rad)", "alpha / pi");
    let _ = writeln!(
        out,
        r##"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#1f4e9c"/></marker></defs>"##
    );
    for &((x, a), (fx, fa)) in arrows {
        let dx = (fx - x + PI).rem_euclid(2.0 * PI) - PI;
        let (x0, y0) = (frame.px(x), frame.py(a));
        let (x1, y1) = (frame.px(x + dx), frame.py(fa));
        if (x1 - x0).hypot(y1 - y0) < 1.0 {
            let _ = writeln!(
                out,
                r##"<circle cx="{x0:.2}" cy="{y0:.2}" r="2.5" fill="#1f4e9c"/>"##
            );
        } else {
            let _ = writeln!(
                out,
                r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#1f4e9c" marker-end="url(#head)"/>"##
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
