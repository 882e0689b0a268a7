//! Surface-of-revolution realization of `(Y, ds² + c²f²dθ²)` in ℝ³, OBJ meshes and SVG plots.
//!
//! The meridian `(r, x₃)` with `r = c f(s)` and `x₃ = ∫₀ˢ √(1 − c² f′²)` is
//! unit speed, so the revolved surface carries exactly the metric of `Y`. It
//! exists only where `c |f′| < 1`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::bubble::BubbleProfile;
use crate::error::{LabError, Result};
use crate::profile::WarpedGeometry;
use crate::quadrature::{gauss_kronrod15, integrate};
use crate::scalar::{linspace, maximize, Real};

fn check_interval<T: Real>(g: &WarpedGeometry<T>, (a, b): (T, T)) -> Result<()> {
    if !(a < b) || a < -g.s_max() || b > g.s_max() {
        return Err(LabError::InvalidInput(format!(
            "interval [{a}, {b}] is not a proper subinterval of (−{0}, {0})",
            g.s_max()
        )));
    }
    Ok(())
}

/// `1/max |f′|` over the interval; `None` when `f′ ≡ 0` (any `c` works).
pub fn max_c_for_embedding<T: Real>(g: &WarpedGeometry<T>, interval: (T, T)) -> Result<Option<T>> {
    check_interval(g, interval)?;
    let (_, m) = maximize(|s| g.f_s(s).abs(), interval.0, interval.1);
    Ok(if m > T::zero() { Some(m.recip()) } else { None })
}

/// Sampled meridian of the embedded `Y`.
#[derive(Debug, Clone)]
pub struct RevolutionCurve<T> {
    pub c: T,
    pub s: Vec<T>,
    pub r: Vec<T>,
    pub x3: Vec<T>,
    /// `r′ = c f′`.
    pub dr: Vec<T>,
}

fn x3_speed<T: Real>(g: &WarpedGeometry<T>, s: T) -> T {
    let d = g.c() * g.f_s(s);
    (T::one() - d * d).max(T::zero()).sqrt()
}

/// Samples the meridian on `n_samples` uniform points of the interval.
pub fn embed_revolution<T: Real>(
    g: &WarpedGeometry<T>,
    interval: (T, T),
    n_samples: usize,
) -> Result<RevolutionCurve<T>> {
    check_interval(g, interval)?;
    if n_samples < 8 {
        return Err(LabError::InvalidInput("need at least 8 meridian samples".into()));
    }
    let c = g.c();
    let (argmax, fmax) = maximize(|s| g.f_s(s).abs(), interval.0, interval.1);
    if c * fmax >= T::one() {
        return Err(LabError::InvalidInput(format!(
            "c = {c} is too large to embed: c|f'(s)| = {} ≥ 1 at s = {argmax}",
            c * fmax
        )));
    }
    let s = linspace(interval.0, interval.1, n_samples);
    let mut speed = |t: T| x3_speed(g, t);
    let mut x3 = Vec::with_capacity(n_samples);
    let mut acc = T::zero();
    x3.push(acc);
    for w in s.windows(2) {
        acc = acc + gauss_kronrod15(&mut speed, w[0], w[1]).0;
        x3.push(acc);
    }
    let tol = T::tol_floor(1e-14);
    let offset = integrate(|t| x3_speed(g, t), T::zero(), interval.0, tol, tol)?;
    for v in x3.iter_mut() {
        *v = *v + offset;
    }
    Ok(RevolutionCurve {
        c,
        r: s.iter().map(|&t| c * g.f(t)).collect(),
        dr: s.iter().map(|&t| c * g.f_s(t)).collect(),
        s,
        x3,
    })
}

impl<T: Real> RevolutionCurve<T> {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `x₃′` at every sample from fourth-order differences of the sampled `x₃`.
    pub fn x3_derivative(&self) -> Vec<T> {
        let n = self.len();
        let h = self.s[1] - self.s[0];
        let x = &self.x3;
        let k = |v: f64| T::lit(v);
        (0..n)
            .map(|i| {
                let d = if i >= 2 && i + 2 < n {
                    k(1.0) * x[i - 2] - k(8.0) * x[i - 1] + k(8.0) * x[i + 1] - x[i + 2]
                } else if i < 2 {
                    // forward stencils
                    let j = i;
                    match j {
                        0 => k(-25.0) * x[0] + k(48.0) * x[1] - k(36.0) * x[2] + k(16.0) * x[3] - k(3.0) * x[4],
                        _ => k(-3.0) * x[0] - k(10.0) * x[1] + k(18.0) * x[2] - k(6.0) * x[3] + x[4],
                    }
                } else if i + 1 == n {
                    k(25.0) * x[n - 1] - k(48.0) * x[n - 2] + k(36.0) * x[n - 3] - k(16.0) * x[n - 4]
                        + k(3.0) * x[n - 5]
                } else {
                    k(3.0) * x[n - 1] + k(10.0) * x[n - 2] - k(18.0) * x[n - 3] + k(6.0) * x[n - 4] - x[n - 5]
                };
                d / (k(12.0) * h)
            })
            .collect()
    }

    /// `max |r′² + x₃′² − 1|`.
    pub fn unit_speed_defect(&self) -> T {
        self.x3_derivative()
            .into_iter()
            .zip(&self.dr)
            .map(|(d3, dr)| (*dr * *dr + d3 * d3 - T::one()).abs())
            .fold(T::zero(), |m, v| m.max(v))
    }

    /// Meridian as `(r, x₃)` pairs.
    pub fn meridian(&self) -> Vec<(f64, f64)> {
        self.r.iter().zip(&self.x3).map(|(r, z)| (r.as_f64(), z.as_f64())).collect()
    }
}

/// Triangle mesh with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Unnormalized normal of a face.
    pub fn face_normal(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    }
}

/// Revolves a meridian `(r, z)` about the z-axis.
///
/// Vertex `i·n_theta + j` sits on meridian sample `i` at angle `2πj/n_theta`.
/// With `closed` the last sample connects back to the first, giving a torus.
/// A meridian traversed counter-clockwise in the `(r, z)` half-plane yields
/// outward normals.
pub fn revolution_mesh(meridian: &[(f64, f64)], n_theta: usize, closed: bool) -> Result<Mesh> {
    let n_s = meridian.len();
    if n_s < 2 || n_theta < 3 {
        return Err(LabError::InvalidInput("mesh needs ≥ 2 meridian samples and ≥ 3 angles".into()));
    }
    let mut vertices = Vec::with_capacity(n_s * n_theta);
    for &(r, z) in meridian {
        for j in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
            vertices.push([r * th.cos(), r * th.sin(), z]);
        }
    }
    let rows = if closed { n_s } else { n_s - 1 };
    let mut faces = Vec::with_capacity(2 * rows * n_theta);
    for i in 0..rows {
        let i1 = (i + 1) % n_s;
        for j in 0..n_theta {
            let j1 = (j + 1) % n_theta;
            let v00 = i * n_theta + j;
            let v01 = i * n_theta + j1;
            let v11 = i1 * n_theta + j1;
            let v10 = i1 * n_theta + j;
            faces.push([v00, v01, v11]);
            faces.push([v00, v11, v10]);
        }
    }
    Ok(Mesh { vertices, faces })
}

/// Reverses a closed meridian in place if it runs clockwise in the `(r, z)` plane.
pub fn orient_counter_clockwise(meridian: &mut [(f64, f64)]) {
    let n = meridian.len();
    let twice_area: f64 = (0..n)
        .map(|i| {
            let (a, b) = (meridian[i], meridian[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    if twice_area < 0.0 {
        meridian.reverse();
    }
}

/// ASCII OBJ with `v` and `f` records; coordinates use the shortest exact decimal form.
pub fn write_obj<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    let mut text = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(text, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(text, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_obj<R: BufRead>(input: R) -> Result<Mesh> {
    let mut mesh = Mesh {
        vertices: Vec::new(),
        faces: Vec::new(),
    };
    for (ln, line) in input.lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        let bad = || LabError::Parse(format!("OBJ line {}: `{line}`", ln + 1));
        match it.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for slot in v.iter_mut() {
                    *slot = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                }
                mesh.vertices.push(v);
            }
            Some("f") => {
                let mut f = [0usize; 3];
                for slot in f.iter_mut() {
                    let tok = it.next().ok_or_else(bad)?;
                    let idx: usize = tok.split('/').next().unwrap_or("").parse().map_err(|_| bad())?;
                    if idx == 0 {
                        return Err(bad());
                    }
                    *slot = idx - 1;
                }
                mesh.faces.push(f);
            }
            Some(t) if t.starts_with('#') => {}
            None => {}
            Some(_) => return Err(bad()),
        }
    }
    if mesh.faces.iter().flatten().any(|&i| i >= mesh.vertices.len()) {
        return Err(LabError::Parse("OBJ face refers to a missing vertex".into()));
    }
    Ok(mesh)
}

/// Closed profile curve `(s, y)` of a bubble, counter-clockwise from `(0, ũ(0))`.
pub fn closed_profile<T: Real>(bp: &BubbleProfile<T>) -> Vec<(f64, f64)> {
    let n = bp.len();
    let pt = |j: usize, sx: f64, sy: f64| (sx * bp.s[j].as_f64(), sy * bp.u[j].as_f64());
    let mut out = Vec::with_capacity(4 * (n - 1));
    // top-left, bottom-left, bottom-right, top-right quarters
    out.extend((0..n - 1).map(|j| pt(j, -1.0, 1.0)));
    out.extend((1..n).rev().map(|j| pt(j, -1.0, -1.0)));
    out.extend((0..n - 1).map(|j| pt(j, 1.0, -1.0)));
    out.extend((1..n).rev().map(|j| pt(j, 1.0, 1.0)));
    out
}

/// Bubble profile drawn on the embedded `Y`: the point `(s, y)` goes to
/// `(r + y x₃′, x₃ − y r′)`, i.e. distance `y` along the outward normal of the meridian.
/// The closed profile is thinned to at most `max_points` samples.
pub fn bubble_overlay<T: Real>(
    g: &WarpedGeometry<T>,
    bp: &BubbleProfile<T>,
    max_points: usize,
) -> Result<Vec<(f64, f64)>> {
    let c = g.c();
    let tol = T::tol_floor(1e-13);
    let bound = bp.s1;
    let (_, fmax) = maximize(|s| g.f_s(s).abs(), -bound, bound);
    if c * fmax >= T::one() {
        return Err(LabError::InvalidInput(format!(
            "c = {c} is too large to embed the bubble's base (c|f'| reaches {})",
            c * fmax
        )));
    }
    let pts = closed_profile(bp);
    let stride = pts.len().div_ceil(max_points.max(3)).max(1);
    pts.into_iter()
        .step_by(stride)
        .map(|(s, y)| {
            let st = T::lit(s);
            let r = c * g.f(st);
            let dr = c * g.f_s(st);
            let d3 = (T::one() - dr * dr).sqrt();
            let x3 = integrate(|t| x3_speed(g, t), T::zero(), st, tol, tol)?;
            let y = T::lit(y);
            Ok(((r + y * d3).as_f64(), (x3 - y * dr).as_f64()))
        })
        .collect()
}

/// SVG of the closed profile curve in the `s–y` plane (800×600 viewBox).
pub fn profile_svg<T: Real>(bp: &BubbleProfile<T>) -> String {
    let pts = closed_profile(bp);
    let sx = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs())).max(1e-300);
    let sy = pts.iter().fold(0.0f64, |m, p| m.max(p.1.abs())).max(1e-300);
    let scale = (360.0 / sx).min(260.0 / sy);
    let map = |(s, y): (f64, f64)| (400.0 + scale * s, 300.0 - scale * y);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#
    );
    let _ = writeln!(svg, r##"<rect width="800" height="600" fill="#ffffff"/>"##);
    let _ = writeln!(svg, r##"<line x1="20" y1="300" x2="780" y2="300" stroke="#999999" stroke-width="1"/>"##);
    let _ = writeln!(svg, r##"<line x1="400" y1="20" x2="400" y2="580" stroke="#999999" stroke-width="1"/>"##);
    let mut d = String::new();
    for (i, p) in pts.into_iter().enumerate() {
        let (x, y) = map(p);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    let _ = writeln!(svg, r##"<path d="{d}" fill="none" stroke="#1f4e9c" stroke-width="2"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="24" y="40" font-family="monospace" font-size="16">s1 = {:.6}  H = {:.6}</text>"##,
        bp.s1.as_f64(),
        bp.h.as_f64()
    );
    svg.push_str("</svg>\n");
    svg
}
