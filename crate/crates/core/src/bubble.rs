//! The CMC tori `S_{s₁}` of the warped product, one per `s₁ ∈ (0, s₀)`.
//!
//! Each surface is the rotated graph of an even height function `ũ(s)` on
//! `[−s₁, s₁]`. In the tilt angle α, with `sin α = Hφ(s)` and `H = 1/φ(s₁)`,
//! the quarter profile solves the smooth system
//!
//! ```text
//! ds/dα = cos α / (Hφ_s),   du/dα = −sin α / (Hφ_s),   dt/dα = 1 / (Hφ_s)
//! ```
//!
//! from `(0, 0, 0)` to `α = π/2`, after which `u` is shifted to vanish at the
//! fold `s = s₁`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::ode::{self, OdeTolerances};
use crate::profile::WarpedGeometry;
use crate::quadrature::{integrate, simpson};
use crate::scalar::{linspace, Real};
use crate::stability;

/// Smallest node count accepted by [`solve_profile`].
pub const MIN_NODES: usize = 64;

/// One sample of the quarter profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode<T> {
    pub alpha: T,
    pub s: T,
    pub u: T,
    pub t: T,
}

/// One member `S_{s₁}` of the family.
#[derive(Debug, Clone)]
pub struct BubbleProfile<T> {
    pub s1: T,
    /// Mean curvature `1/φ(s₁)`.
    pub h: T,
    pub alpha: Vec<T>,
    pub s: Vec<T>,
    /// Shifted height `ũ`, zero at the fold.
    pub u: Vec<T>,
    /// Arclength from the top of the profile.
    pub t: Vec<T>,
    pub volume: T,
    pub lateral_area: T,
    /// `|X₀| = 4πc·F(s₁)`.
    pub x0_measure: T,
    /// Warp constant the profile was built with.
    pub c: T,
}

impl<T: Real> BubbleProfile<T> {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Uniform tilt-angle spacing.
    pub fn step(&self) -> T {
        self.alpha[1] - self.alpha[0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = ProfileNode<T>> + '_ {
        (0..self.len()).map(move |j| ProfileNode {
            alpha: self.alpha[j],
            s: self.s[j],
            u: self.u[j],
            t: self.t[j],
        })
    }

    /// Maximum height `ũ(0)`.
    pub fn u_max(&self) -> T {
        self.u[0]
    }

    /// `max_j |sin α_j − Hφ(s_j)|`.
    pub fn first_integral_defect(&self, g: &WarpedGeometry<T>) -> T {
        let p = g.profile();
        self.nodes()
            .map(|n| (n.alpha.sin() - self.h * p.phi(n.s)).abs())
            .fold(T::zero(), |m, v| m.max(v))
    }

    /// `|s(π/2) − s₁|`.
    pub fn endpoint_defect(&self) -> T {
        (*self.s.last().expect("non-empty") - self.s1).abs()
    }
}

fn upper_limit<T: Real>(g: &WarpedGeometry<T>) -> T {
    g.profile().s0().unwrap_or_else(|| g.s_max())
}

/// Integrates the tilt-angle system on a uniform α grid of `n_nodes` points.
pub fn solve_profile<T: Real>(g: &WarpedGeometry<T>, s1: T, n_nodes: usize) -> Result<BubbleProfile<T>> {
    if n_nodes < MIN_NODES {
        return Err(LabError::InvalidInput(format!(
            "n_nodes = {n_nodes} is below the minimum of {MIN_NODES}"
        )));
    }
    let p = g.profile();
    let limit = upper_limit(g);
    if !(s1 > T::zero()) {
        return Err(LabError::InvalidInput(format!("s1 = {s1} must be positive")));
    }
    if s1 >= limit {
        return Err(match p.s0() {
            Some(s0) => LabError::InvalidInput(format!(
                "s1 = {s1} must be below s0 = {s0}: as s1 approaches s0 the height integral \
                 tends to -infinity, at least at a logarithmic rate, and no closed bubble exists"
            )),
            None => LabError::InvalidInput(format!("s1 = {s1} lies outside the domain (0, {limit})")),
        });
    }
    let h = p.phi(s1).recip();
    let alpha = linspace(T::zero(), T::FRAC_PI_2(), n_nodes);
    let tol = OdeTolerances::default();
    let rhs = |a: T, y: &[T; 3]| -> Result<[T; 3]> {
        let d = h * p.phi_s(y[0]);
        if !(d > T::zero()) {
            return Err(LabError::NumericalFailure(format!(
                "phi_s vanished at s = {} before the fold (alpha = {a})",
                y[0]
            )));
        }
        Ok([a.cos() / d, -a.sin() / d, d.recip()])
    };
    let mut s = Vec::with_capacity(n_nodes);
    let mut u = Vec::with_capacity(n_nodes);
    let mut t = Vec::with_capacity(n_nodes);
    let mut y = [T::zero(); 3];
    s.push(y[0]);
    u.push(y[1]);
    t.push(y[2]);
    for w in alpha.windows(2) {
        y = ode::integrate(rhs, w[0], y, w[1], w[1] - w[0], &tol)?;
        s.push(y[0]);
        u.push(y[1]);
        t.push(y[2]);
    }
    let shift = *u.last().expect("non-empty");
    for v in u.iter_mut() {
        *v = *v - shift;
    }
    let c = g.c();
    let mut bp = BubbleProfile {
        s1,
        h,
        alpha,
        s,
        u,
        t,
        volume: T::zero(),
        lateral_area: T::zero(),
        x0_measure: T::lit(4.0) * T::PI() * c * g.big_f(s1),
        c,
    };
    bp.volume = enclosed_volume(&bp, g);
    bp.lateral_area = lateral_area(&bp, g);
    Ok(bp)
}

/// Max of `|H(s) − 1/φ(s₁)|` with `H(s)` from centered second differences in α.
///
/// The profile is treated as a parametric curve `(s(α), u(α))`, so the vertical
/// tangent at the fold poses no difficulty; the 3 nodes nearest the fold are
/// still excluded. Node 0 uses the reflection `s(−α) = −s(α)`, `u(−α) = u(α)`.
pub fn mean_curvature_residual<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> T {
    let n = bp.len();
    let h = bp.step();
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for j in 0..n - 3 {
        let (s_prev, u_prev) = if j == 0 { (-bp.s[1], bp.u[1]) } else { (bp.s[j - 1], bp.u[j - 1]) };
        let (s_next, u_next) = (bp.s[j + 1], bp.u[j + 1]);
        let sa = (s_next - s_prev) / (two * h);
        let ua = (u_next - u_prev) / (two * h);
        let saa = (s_next - two * bp.s[j] + s_prev) / (h * h);
        let uaa = (u_next - two * bp.u[j] + u_prev) / (h * h);
        let norm = (sa * sa + ua * ua).sqrt();
        let kappa = -(sa * uaa - ua * saa) / (norm * norm * norm);
        let mc = kappa - ua / norm * g.log_f_s(bp.s[j]);
        worst = worst.max((mc - bp.h).abs());
    }
    worst
}

fn phi_s_nodes<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> Vec<T> {
    bp.s.iter().map(|&s| g.profile().phi_s(s)).collect()
}

/// `V = 8πc ∫₀^{s₁} f ũ ds`, by Simpson in α.
pub fn enclosed_volume<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> T {
    let ps = phi_s_nodes(bp, g);
    let vals: Vec<T> = (0..bp.len())
        .map(|j| g.f(bp.s[j]) * bp.u[j] * bp.alpha[j].cos() / (bp.h * ps[j]))
        .collect();
    T::lit(8.0) * T::PI() * g.c() * simpson(&vals, bp.step())
}

/// Area of the closed surface, `8πc ∫₀^{s₁} f √(1 + u′²) ds`, by Simpson in α.
pub fn lateral_area<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> T {
    let ps = phi_s_nodes(bp, g);
    let vals: Vec<T> = (0..bp.len()).map(|j| g.f(bp.s[j]) / (bp.h * ps[j])).collect();
    T::lit(8.0) * T::PI() * g.c() * simpson(&vals, bp.step())
}

/// `∫₀^{s₁} q(s) / √(φ(s₁)² − φ(s)²) ds` with `s = s₁ − w²` removing the endpoint singularity.
fn singular_integral<T: Real, Q: Fn(T) -> T>(g: &WarpedGeometry<T>, s1: T, q: Q) -> Result<T> {
    let p = g.profile();
    let phi1 = p.phi(s1);
    let tol = T::tol_floor(1e-13);
    integrate(
        |w: T| {
            let s = s1 - w * w;
            let phi = p.phi(s);
            let gap = (phi1 - phi) * (phi1 + phi);
            if gap <= T::zero() {
                // w below resolution: use the leading-order expansion
                let lead = (T::lit(2.0) * phi1 * p.phi_s(s1)).sqrt();
                return T::lit(2.0) * q(s) / lead;
            }
            T::lit(2.0) * w * q(s) / gap.sqrt()
        },
        T::zero(),
        s1.sqrt(),
        tol,
        tol,
    )
}

/// `ũ(0) = ∫₀^{s₁} φ / √(φ(s₁)² − φ²) ds`, computed independently of the ODE.
pub fn height_by_quadrature<T: Real>(g: &WarpedGeometry<T>, s1: T) -> Result<T> {
    let p = g.profile();
    singular_integral(g, s1, |s| p.phi(s))
}

/// Closed-surface area by adaptive quadrature in `s`, independent of the node grid.
pub fn lateral_area_by_quadrature<T: Real>(g: &WarpedGeometry<T>, s1: T) -> Result<T> {
    let phi1 = g.profile().phi(s1);
    let v = singular_integral(g, s1, |s| g.f(s) * phi1)?;
    Ok(T::lit(8.0) * T::PI() * g.c() * v)
}

/// Inverts the increasing map `s₁ ↦ V(s₁)` by bisection (relative tolerance 1e−8).
pub fn volume_to_s1<T: Real>(g: &WarpedGeometry<T>, v: T, n_nodes: usize) -> Result<T> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(LabError::InvalidInput(format!("volume {v} must be positive and finite")));
    }
    let hi_cap = upper_limit(g) * (T::one() - T::lit(1e-6));
    let v_hi = solve_profile(g, hi_cap, n_nodes)?.volume;
    if v > v_hi {
        return Err(LabError::InvalidInput(format!(
            "volume {v} exceeds the largest resolvable family volume {v_hi} (s1 = {hi_cap})"
        )));
    }
    let (mut lo, mut hi) = (T::zero(), hi_cap);
    let rtol = T::tol_floor(1e-8);
    while hi - lo > rtol * hi {
        let mid = T::lit(0.5) * (lo + hi);
        if solve_profile(g, mid, n_nodes)?.volume < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

/// One row of a family sweep; failed members keep their error text.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub s1: f64,
    pub h: f64,
    pub volume: f64,
    pub lateral_area: f64,
    pub u_max: f64,
    /// `φ(s₁)/c − β`.
    pub beta_margin: f64,
    pub error: Option<String>,
}

/// Builds every member in parallel; rows keep the order of `s1_list`.
pub fn family_sweep<T: Real>(g: &WarpedGeometry<T>, s1_list: &[T], n_nodes: usize) -> Vec<SweepRow> {
    if s1_list.is_empty() {
        return Vec::new();
    }
    let beta = stability::beta(g, stability::BetaReading::PhiS)
        .map(|b| b.value.as_f64())
        .unwrap_or(f64::NAN);
    s1_list
        .par_iter()
        .map(|&s1| match solve_profile(g, s1, n_nodes) {
            Ok(bp) => SweepRow {
                s1: s1.as_f64(),
                h: bp.h.as_f64(),
                volume: bp.volume.as_f64(),
                lateral_area: bp.lateral_area.as_f64(),
                u_max: bp.u_max().as_f64(),
                beta_margin: (g.profile().phi(s1) / g.c()).as_f64() - beta,
                error: None,
            },
            Err(e) => SweepRow {
                s1: s1.as_f64(),
                h: f64::NAN,
                volume: f64::NAN,
                lateral_area: f64::NAN,
                u_max: f64::NAN,
                beta_margin: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// CSV with header `s1,H,V,A_lat,u_max,beta_margin`; failed rows carry `NaN`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s1", "H", "V", "A_lat", "u_max", "beta_margin"])?;
    for r in rows {
        w.write_record([r.s1, r.h, r.volume, r.lateral_area, r.u_max, r.beta_margin].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with header `alpha,s,u,t`.
pub fn write_profile_csv<T: Real, W: Write>(bp: &BubbleProfile<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "s", "u", "t"])?;
    for n in bp.nodes() {
        w.write_record([n.alpha, n.s, n.u, n.t].map(|v| v.as_f64().to_string()))?;
    }
    w.flush()?;
    Ok(())
}
