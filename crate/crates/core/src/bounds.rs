//! Closed-form mean-curvature, area and slope bounds for hypersurfaces in `X × ℝⁿ`.

use std::io::Write;

use serde::Serialize;

use crate::bubble::SweepRow;
use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Volume `ωₙ` of the unit ball in `ℝⁿ`, from `ω₀ = 1`, `ω₁ = 2`, `ωₙ = 2π ωₙ₋₂ / n`.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut w = if n.is_multiple_of(2) { T::one() } else { T::lit(2.0) };
    let mut k = 2 + n % 2;
    while k <= n {
        w = w * two_pi / T::from_usize_lossy(k);
        k += 2;
    }
    w
}

fn positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::InvalidInput(format!("{name} = {v} must be positive")))
    }
}

/// `n (ωₙ |X|)^{1/n} v^{−1/n}`: mean curvature bound for isoperimetric regions.
pub fn isop_h_bound<T: Real>(n: usize, vol_x: T, v: T) -> Result<T> {
    if n == 0 {
        return Err(LabError::InvalidInput("n must be at least 1".into()));
    }
    positive("|X|", vol_x)?;
    positive("v", v)?;
    let nn = T::from_usize_lossy(n);
    Ok(nn * (unit_ball_volume::<T>(n) * vol_x / v).powf(nn.recip()))
}

/// Twice [`isop_h_bound`]: regions confined to `X × B̄(y, r)` with `r` large.
pub fn isop_h_bound_obstacle<T: Real>(n: usize, vol_x: T, v: T) -> Result<T> {
    Ok(T::lit(2.0) * isop_h_bound(n, vol_x, v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H0Bound {
    pub h0: f64,
    /// Residual of the defining equation at `h0`.
    pub residual: f64,
    /// `n = 1` with `R₀ = 0`: no positive root, use [`ric_nonneg_h_bound`].
    pub ric_nonneg: bool,
}

/// Positive root `H₀` of `H/(d−1) − d R₀/H − (n−1) d/H = 0`.
pub fn h0_large_bubble(d: usize, n: usize, r0: f64) -> Result<H0Bound> {
    if d < 2 || n < 1 || n >= d {
        return Err(LabError::InvalidInput(format!("need d ≥ 2 and 1 ≤ n < d (got d = {d}, n = {n})")));
    }
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(LabError::InvalidInput(format!("R0 = {r0} must be non-negative")));
    }
    let (df, nf) = (d as f64, n as f64);
    let rhs = r0 + nf - 1.0;
    if rhs == 0.0 {
        return Ok(H0Bound {
            h0: 0.0,
            residual: 0.0,
            ric_nonneg: true,
        });
    }
    let h0 = (df * (df - 1.0) * rhs).sqrt();
    Ok(H0Bound {
        h0,
        residual: h0 / (df - 1.0) - df * rhs / h0,
        ric_nonneg: false,
    })
}

/// `4(d−1)/ρ₁` for `n = 1`, `8(d−1)/ρ₁` for `n ≥ 2` (valid when `Ric ≥ 0`).
pub fn ric_nonneg_h_bound<T: Real>(d: usize, n: usize, rho1: T) -> Result<T> {
    positive("rho1", rho1)?;
    if d < 2 || n < 1 {
        return Err(LabError::InvalidInput("need d ≥ 2 and n ≥ 1".into()));
    }
    let factor = if n == 1 { 4.0 } else { 8.0 };
    Ok(T::lit(factor * (d - 1) as f64) / rho1)
}

/// Whether the surface minimizes area for its volume or is only a soap bubble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SoapBubble,
    Isoperimetric,
}

/// Measured data of a hypersurface `S ⊂ X^k × ℝⁿ`, `d = k + n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsInput {
    pub d: usize,
    pub n: usize,
    pub vol_x: f64,
    pub v: f64,
    pub h: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub r0: f64,
    /// Radius oscillation `C`.
    pub c_osc: f64,
    /// `|X₀|`, the base of a graph over part of `X` (`n = 1`).
    pub x0_measure: f64,
}

impl BoundsInput {
    pub fn k(&self) -> usize {
        self.d - self.n
    }

    pub fn omega_n(&self) -> f64 {
        unit_ball_volume(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.d <= self.n {
            return Err(LabError::InvalidInput(format!(
                "dimensions must satisfy d = k + n with k, n ≥ 1 (d = {}, n = {})",
                self.d, self.n
            )));
        }
        if !(self.rho0 <= self.rho1) {
            return Err(LabError::InvalidInput("rho0 must not exceed rho1".into()));
        }
        if !(self.vol_x > 0.0) || !(self.v > 0.0) {
            return Err(LabError::InvalidInput("|X| and v must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub inequality: String,
    pub applicable: bool,
    /// `larger side − smaller side`; `NaN` when not applicable.
    pub margin: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn applies(name: &str, margin: f64, scale: f64) -> Self {
        Self {
            inequality: name.into(),
            applicable: true,
            margin,
            pass: margin >= -1e-12 * scale.abs().max(1.0),
        }
    }

    fn skipped(name: &str) -> Self {
        Self {
            inequality: name.into(),
            applicable: false,
            margin: f64::NAN,
            pass: true,
        }
    }
}

/// Area/curvature/volume inequalities, each gated by its hypotheses.
///
/// - `vh-below-area`: `vH ≤ area` (soap bubbles and isoperimetric boundaries)
/// - `area-below-scaled-vh`: `area ≤ n/(n−1) H v` (`n ≥ 2`)
/// - `area-below-vh-plus-base`: `area ≤ vH + 2|X₀|` (`n = 1`)
/// - `area-below-cylinder`: `area ≤ n (ωₙ|X|)^{1/n} v^{(n−1)/n}` (isoperimetric only)
/// - `h-below-cylinder`: `H ≤ n (ωₙ|X|)^{1/n} v^{−1/n}` (isoperimetric only)
pub fn check_area_h_volume(input: &BoundsInput, area: f64, provenance: Provenance) -> Result<Vec<InequalityCheck>> {
    input.validate()?;
    let BoundsInput { n, v, h, vol_x, .. } = *input;
    let nf = n as f64;
    let vh = v * h;
    let mut out = vec![InequalityCheck::applies("vh-below-area", area - vh, area)];
    out.push(if n >= 2 {
        let bound = nf / (nf - 1.0) * vh;
        InequalityCheck::applies("area-below-scaled-vh", bound - area, area)
    } else {
        InequalityCheck::skipped("area-below-scaled-vh")
    });
    out.push(if n == 1 {
        InequalityCheck::applies("area-below-vh-plus-base", vh + 2.0 * input.x0_measure - area, area)
    } else {
        InequalityCheck::skipped("area-below-vh-plus-base")
    });
    if provenance == Provenance::Isoperimetric {
        let cyl = nf * (input.omega_n() * vol_x).powf(1.0 / nf) * v.powf((nf - 1.0) / nf);
        out.push(InequalityCheck::applies("area-below-cylinder", cyl - area, area));
        let hb = isop_h_bound(n, vol_x, v)?;
        out.push(InequalityCheck::applies("h-below-cylinder", hb - h, h));
    } else {
        out.push(InequalityCheck::skipped("area-below-cylinder"));
        out.push(InequalityCheck::skipped("h-below-cylinder"));
    }
    Ok(out)
}

/// CSV with header `inequality,applicable,margin,pass`.
pub fn write_checks_csv<W: Write>(checks: &[InequalityCheck], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["inequality", "applicable", "margin", "pass"])?;
    for c in checks {
        w.write_record([
            c.inequality.clone(),
            c.applicable.to_string(),
            c.margin.to_string(),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeConstants {
    pub c1: f64,
    /// `e^{C₁}/(e^{C₁/2} − 1)(1 + 20C)`; `inf` when it overflows.
    pub c_prime: f64,
    pub log_c_prime: f64,
}

/// Constants of the gradient estimate `|∇u| < C′` for rotated graphs.
///
/// `C₁ = max((18n + 27H)C², R₀)` for `n ≥ 2` and `max(9(2 + H)C², R₀)` for `n = 1`.
pub fn slope_bound_constants(n: usize, h: f64, c: f64, r0: f64) -> Result<SlopeConstants> {
    if n == 0 || !(c >= 0.0) || !(r0 >= 0.0) || !h.is_finite() {
        return Err(LabError::InvalidInput("need n ≥ 1, C ≥ 0, R0 ≥ 0 and finite H".into()));
    }
    let base = if n == 1 {
        9.0 * (2.0 + h) * c * c
    } else {
        (18.0 * n as f64 + 27.0 * h) * c * c
    };
    let c1 = base.max(r0);
    if !(c1 > 0.0) {
        return Err(LabError::UndefinedBound(
            "C1 = 0 makes e^C1/(e^(C1/2) - 1) undefined; the slope bound needs C > 0 or R0 > 0".into(),
        ));
    }
    let log_c_prime = 0.5 * c1 - (-(-0.5 * c1).exp()).ln_1p() + (20.0 * c).ln_1p();
    Ok(SlopeConstants {
        c1,
        c_prime: log_c_prime.exp(),
        log_c_prime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub applicable: bool,
    pub max_gradient: f64,
    pub pass: bool,
}

/// Compares the discrete `max |∇u|` of a radius function with `C′` (needs `min u > 1`).
pub fn verify_slope_bound<T: Real>(
    domain: &crate::flow::TorusDomain<T>,
    u: &[T],
    c_prime: f64,
) -> Result<SlopeCheck> {
    if u.len() != domain.n_cells() {
        return Err(LabError::InvalidInput("radius field does not match the domain".into()));
    }
    let grads: Vec<Vec<T>> = (0..domain.dim()).map(|a| domain.diff(u, a)).collect();
    let max_gradient = (0..u.len())
        .map(|i| grads.iter().map(|g| g[i] * g[i]).sum::<T>().sqrt())
        .fold(T::zero(), |m, v| m.max(v))
        .as_f64();
    let min_u = u.iter().fold(T::infinity(), |m, &v| m.min(v));
    if !(min_u > T::one()) {
        return Ok(SlopeCheck {
            applicable: false,
            max_gradient,
            pass: true,
        });
    }
    Ok(SlopeCheck {
        applicable: true,
        max_gradient,
        pass: max_gradient <= c_prime,
    })
}

/// Empirical stand-ins for the unspecified constants, over a family sweep
/// (`n = 1`: `ρ₁ = ũ(0)`, `ρ₀ = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEnvelope {
    pub members: usize,
    pub first_rho1_over_v: f64,
    pub max_rho1_over_v: f64,
    pub max_h_times_rho1: f64,
    pub min_h: f64,
}

impl SweepEnvelope {
    /// Regression guard: `ρ₁/v` stays within 10× its first value.
    pub fn within_guard(&self) -> bool {
        self.max_rho1_over_v <= 10.0 * self.first_rho1_over_v
    }
}

pub fn sweep_envelope(rows: &[SweepRow]) -> Option<SweepEnvelope> {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let first = ok.first()?;
    let mut env = SweepEnvelope {
        members: ok.len(),
        first_rho1_over_v: first.u_max / first.volume,
        max_rho1_over_v: f64::NEG_INFINITY,
        max_h_times_rho1: f64::NEG_INFINITY,
        min_h: f64::INFINITY,
    };
    for r in ok {
        env.max_rho1_over_v = env.max_rho1_over_v.max(r.u_max / r.volume);
        env.max_h_times_rho1 = env.max_h_times_rho1.max(r.h * r.u_max);
        env.min_h = env.min_h.min(r.h);
    }
    Some(env)
}
