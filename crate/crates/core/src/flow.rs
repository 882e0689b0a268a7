//! Slice-volume area functional on a flat torus and volume-constrained descent.
//!
//! A hypersurface `{ρ = u(x)}` in `X × ℝⁿ` is encoded by `σ = (u/n)ⁿ`. Then
//!
//! ```text
//! area   = nⁿ ωₙ ∫_X √(σ^{2α} + |∇σ|²),   α = (n − 1)/n
//! volume = nⁿ ωₙ ∫_X σ
//! ```
//!
//! so the enclosed volume is linear in σ and a mean-free update conserves it
//! exactly. `X` is a flat torus of dimension 1 or 2 with centered periodic
//! differences.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::unit_ball_volume;
use crate::error::{LabError, Result};
use crate::scalar::Real;

pub const MIN_RESOLUTION: usize = 16;

/// Flat torus `∏ ℝ/Lᵢℤ` with `resolution` nodes per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDomain<T> {
    lengths: Vec<T>,
    resolution: usize,
}

impl<T: Real> TorusDomain<T> {
    pub fn new(lengths: &[T], resolution: usize) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 2 {
            return Err(LabError::InvalidInput("torus dimension must be 1 or 2".into()));
        }
        if lengths.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
            return Err(LabError::InvalidInput("torus periods must be positive".into()));
        }
        if resolution < MIN_RESOLUTION {
            return Err(LabError::InvalidInput(format!(
                "resolution {resolution} is below the minimum of {MIN_RESOLUTION} nodes per axis"
            )));
        }
        Ok(Self {
            lengths: lengths.to_vec(),
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn n_cells(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / T::from_usize_lossy(self.resolution)
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim()).map(|a| self.spacing(a)).fold(T::one(), |p, h| p * h)
    }

    pub fn total_volume(&self) -> T {
        self.lengths.iter().fold(T::one(), |p, &l| p * l)
    }

    /// First nonzero Laplacian eigenvalue `(2π/max L)²`.
    pub fn lambda1(&self) -> T {
        let l = self.lengths.iter().fold(T::zero(), |m, &v| m.max(v));
        let k = T::lit(2.0) * T::PI() / l;
        k * k
    }

    fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let n = self.resolution;
        let stride = n.pow(axis as u32);
        let coord = (idx / stride) % n;
        let moved = if forward { (coord + 1) % n } else { (coord + n - 1) % n };
        idx - coord * stride + moved * stride
    }

    /// Centered periodic difference along `axis`.
    pub fn diff(&self, v: &[T], axis: usize) -> Vec<T> {
        let two_h = T::lit(2.0) * self.spacing(axis);
        (0..v.len())
            .map(|i| (v[self.neighbor(i, axis, true)] - v[self.neighbor(i, axis, false)]) / two_h)
            .collect()
    }

    /// Physical coordinates of a node.
    pub fn point(&self, idx: usize) -> Vec<T> {
        (0..self.dim())
            .map(|a| {
                let coord = (idx / self.resolution.pow(a as u32)) % self.resolution;
                self.spacing(a) * T::from_usize_lossy(coord)
            })
            .collect()
    }
}

/// Positive slice-volume function on a torus, for ball dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaField<T> {
    pub domain: TorusDomain<T>,
    pub values: Vec<T>,
    pub n: usize,
}

impl<T: Real> SigmaField<T> {
    pub fn new(domain: TorusDomain<T>, values: Vec<T>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(LabError::InvalidInput("ball dimension n must be at least 1".into()));
        }
        if values.len() != domain.n_cells() {
            return Err(LabError::InvalidInput(format!(
                "field has {} values, domain has {} cells",
                values.len(),
                domain.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(LabError::InvalidInput(format!(
                "slice volume must be positive and finite (node {i} has {})",
                values[i]
            )));
        }
        Ok(Self { domain, values, n })
    }

    pub fn constant(domain: TorusDomain<T>, a: T, n: usize) -> Result<Self> {
        let cells = domain.n_cells();
        Self::new(domain, vec![a; cells], n)
    }

    /// `α = (n − 1)/n`.
    pub fn alpha_exp(&self) -> T {
        T::from_usize_lossy(self.n - 1) / T::from_usize_lossy(self.n)
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }

    pub fn tau(&self) -> Vec<T> {
        let a = self.mean();
        self.values.iter().map(|&v| v - a).collect()
    }

    pub fn tau_inf(&self) -> T {
        self.tau().iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `nⁿ ωₙ`.
    pub fn prefactor(&self) -> T {
        T::from_usize_lossy(self.n).powi(self.n as i32) * unit_ball_volume::<T>(self.n)
    }

    fn gradient(&self, v: &[T]) -> Vec<Vec<T>> {
        (0..self.domain.dim()).map(|a| self.domain.diff(v, a)).collect()
    }

    fn root_terms(&self, grad: &[Vec<T>]) -> Vec<T> {
        let two_alpha = T::lit(2.0) * self.alpha_exp();
        (0..self.values.len())
            .map(|i| {
                let g2: T = grad.iter().map(|g| g[i] * g[i]).sum();
                (self.values[i].powf(two_alpha) + g2).sqrt()
            })
            .collect()
    }

    /// Radius function `u = n σ^{1/n}`.
    pub fn radius(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.n);
        self.values.iter().map(|&s| n * s.powf(n.recip())).collect()
    }
}

pub fn area_functional<T: Real>(field: &SigmaField<T>) -> T {
    let grad = field.gradient(&field.values);
    let r = field.root_terms(&grad);
    field.prefactor() * r.into_iter().sum::<T>() * field.domain.cell_volume()
}

pub fn volume_functional<T: Real>(field: &SigmaField<T>) -> T {
    field.prefactor() * field.values.iter().copied().sum::<T>() * field.domain.cell_volume()
}

/// Derivative of the area in the direction `dot` (which must have zero mean).
pub fn first_variation<T: Real>(field: &SigmaField<T>, dot: &[T]) -> Result<T> {
    if dot.len() != field.values.len() {
        return Err(LabError::InvalidInput("direction has the wrong length".into()));
    }
    let mean = dot.iter().copied().sum::<T>() / T::from_usize_lossy(dot.len());
    let scale = dot.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::min_positive_value());
    if mean.abs() > T::tol_floor(1e-10) * scale {
        return Err(LabError::InvalidInput("variation direction must have zero mean".into()));
    }
    let alpha = field.alpha_exp();
    let expo = T::lit(2.0) * alpha - T::one();
    let grad = field.gradient(&field.values);
    let gdot = field.gradient(dot);
    let r = field.root_terms(&grad);
    let mut acc = T::zero();
    for i in 0..dot.len() {
        let zeroth = if field.n == 1 {
            T::zero()
        } else {
            alpha * field.values[i].powf(expo) * dot[i]
        };
        let first: T = (0..grad.len()).map(|a| gdot[a][i] * grad[a][i]).sum();
        acc = acc + (zeroth + first) / r[i];
    }
    Ok(field.prefactor() * acc * field.domain.cell_volume())
}

/// `L²` gradient `G` with `δ area = Σ G σ̇ · cellvol`.
pub fn l2_gradient<T: Real>(field: &SigmaField<T>) -> Vec<T> {
    let alpha = field.alpha_exp();
    let expo = T::lit(2.0) * alpha - T::one();
    let grad = field.gradient(&field.values);
    let r = field.root_terms(&grad);
    let k = field.prefactor();
    let mut g: Vec<T> = (0..r.len())
        .map(|i| {
            if field.n == 1 {
                T::zero()
            } else {
                alpha * field.values[i].powf(expo) / r[i]
            }
        })
        .collect();
    for (axis, ga) in grad.iter().enumerate() {
        let flux: Vec<T> = ga.iter().zip(&r).map(|(d, ri)| *d / *ri).collect();
        let div = field.domain.diff(&flux, axis);
        for (gi, di) in g.iter_mut().zip(div) {
            *gi = *gi - di;
        }
    }
    g.into_iter().map(|v| k * v).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub area: f64,
    pub volume: f64,
    pub tau_inf_over_a: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub max_steps: usize,
    /// Initial step; `None` picks one from the linearized stability limit.
    pub step_size: Option<f64>,
    /// Stop once `‖τ‖∞/a` drops below this.
    pub tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_steps: 100_000,
            step_size: None,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentSummary<T> {
    pub steps: usize,
    pub converged: bool,
    pub field: SigmaField<T>,
    pub trajectory: Vec<TrajectoryRow>,
    /// `|V_final − V_0| / V_0`.
    pub volume_drift: f64,
    pub final_step_size: f64,
}

impl<T: Real> DescentSummary<T> {
    /// Whether the recorded area never increased.
    pub fn area_monotone(&self) -> bool {
        self.trajectory.windows(2).all(|w| w[1].area <= w[0].area)
    }
}

fn default_step<T: Real>(field: &SigmaField<T>) -> T {
    let grad = field.gradient(&field.values);
    let r_min = field.root_terms(&grad).into_iter().fold(T::infinity(), |m, v| m.min(v));
    let h_min = (0..field.domain.dim())
        .map(|a| field.domain.spacing(a))
        .fold(T::infinity(), |m, v| m.min(v));
    r_min * h_min * h_min / (field.prefactor() * T::from_usize_lossy(field.domain.dim()))
}

/// Steepest descent `σ ← σ − h (G − mean G)` with step halving on area increase.
pub fn constrained_descent<T: Real>(field0: &SigmaField<T>, opts: &DescentOptions) -> Result<DescentSummary<T>> {
    let mut field = field0.clone();
    let mut h = match opts.step_size {
        Some(h) if h > 0.0 && h.is_finite() => T::lit(h),
        Some(h) => return Err(LabError::InvalidInput(format!("step size {h} must be positive"))),
        None => default_step(&field),
    };
    let v0 = volume_functional(&field);
    let mut area = area_functional(&field);
    let record = |step: usize, f: &SigmaField<T>, area: T| TrajectoryRow {
        step,
        area: area.as_f64(),
        volume: volume_functional(f).as_f64(),
        tau_inf_over_a: (f.tau_inf() / f.mean()).as_f64(),
    };
    let mut trajectory = vec![record(0, &field, area)];
    let tol = T::lit(opts.tol);
    let mut steps = 0;
    let mut converged = field.tau_inf() / field.mean() < tol;
    let h_floor = h * T::lit(1e-30);
    while !converged && steps < opts.max_steps {
        let g = l2_gradient(&field);
        let gm = g.iter().copied().sum::<T>() / T::from_usize_lossy(g.len());
        loop {
            let trial: Vec<T> = field
                .values
                .iter()
                .zip(&g)
                .map(|(s, gi)| *s - h * (*gi - gm))
                .collect();
            if trial.iter().all(|v| *v > T::zero()) {
                let cand = SigmaField {
                    domain: field.domain.clone(),
                    values: trial,
                    n: field.n,
                };
                let a_new = area_functional(&cand);
                if a_new <= area {
                    field = cand;
                    area = a_new;
                    break;
                }
            }
            h = h * T::lit(0.5);
            if h < h_floor {
                return Err(LabError::NumericalFailure(format!(
                    "descent stalled at step {steps}: no step keeps sigma positive and lowers the area; \
                     reduce the step size"
                )));
            }
        }
        steps += 1;
        trajectory.push(record(steps, &field, area));
        converged = field.tau_inf() / field.mean() < tol;
    }
    let drift = ((volume_functional(&field) - v0) / v0).abs().as_f64();
    Ok(DescentSummary {
        steps,
        converged,
        field,
        trajectory,
        volume_drift: drift,
        final_step_size: h.as_f64(),
    })
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "area", "volume", "tau_inf_over_a"])?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            r.area.to_string(),
            r.volume.to_string(),
            r.tau_inf_over_a.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Zero-mean trigonometric polynomial with Fourier modes up to `max_mode` per
/// axis, normalized to `‖τ‖∞ = 1`.
///
/// The centered difference cannot see the grid's highest (alternating) mode, so
/// descent never damps it; restricting to low modes keeps random starts inside
/// the range the scheme resolves.
pub fn random_mode_field<T: Real>(domain: &TorusDomain<T>, max_mode: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let m = max_mode.max(1) as i64;
    let mut modes: Vec<(i64, i64)> = Vec::new();
    if domain.dim() == 1 {
        modes.extend((1..=m).map(|k| (k, 0)));
    } else {
        for kx in 0..=m {
            for ky in -m..=m {
                if kx > 0 || ky > 0 {
                    modes.push((kx, ky));
                }
            }
        }
    }
    let coeffs: Vec<(f64, f64)> = modes
        .iter()
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let lengths: Vec<f64> = domain.lengths().iter().map(|l| l.as_f64()).collect();
    let mut v: Vec<f64> = (0..domain.n_cells())
        .map(|i| {
            let x: Vec<f64> = domain.point(i).iter().map(|c| c.as_f64()).collect();
            modes
                .iter()
                .zip(&coeffs)
                .map(|(&(kx, ky), &(a, b))| {
                    let mut ph = two_pi * kx as f64 * x[0] / lengths[0];
                    if x.len() == 2 {
                        ph += two_pi * ky as f64 * x[1] / lengths[1];
                    }
                    a * ph.cos() + b * ph.sin()
                })
                .sum()
        })
        .collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.into_iter().map(|x| T::lit(x / sup)).collect()
}

/// `σ = a + τ` with a random low-mode `τ` of sup norm `amplitude`.
pub fn random_field<T: Real>(
    domain: &TorusDomain<T>,
    a: T,
    amplitude: T,
    n: usize,
    seed: u64,
) -> Result<SigmaField<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = random_mode_field(domain, 4, &mut rng);
    let values = shape.into_iter().map(|t| a + amplitude * t).collect();
    SigmaField::new(domain.clone(), values, n)
}

/// Reads a field from a headerless CSV grid: one row for a circle, `N` rows of
/// `N` values for a square torus of the given side length.
pub fn read_grid_csv<T: Real, R: Read>(reader: R, length: T, n: usize) -> Result<SigmaField<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|x| {
                x.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| LabError::Parse(format!("line {}: `{x}` is not a number", line + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(LabError::Parse("grid rows have unequal lengths".into()));
    }
    let domain = match rows.len() {
        1 => TorusDomain::new(&[length], width)?,
        h if h == width => TorusDomain::new(&[length, length], width)?,
        h => {
            return Err(LabError::Parse(format!(
                "grid must be a single row or square, found {h} rows of {width}"
            )))
        }
    };
    // row index is the second axis
    SigmaField::new(domain, rows.into_iter().flatten().collect(), n)
}

/// `C″ = 2^{−α} / (√(1 + C′²) + 1)`: the constant produced by the proof of the
/// positivity lemma from a gradient bound `C′`. One valid choice, not the best one.
pub fn positivity_constant<T: Real>(n: usize, c_prime: T) -> T {
    let alpha = T::from_usize_lossy(n - 1) / T::from_usize_lossy(n);
    T::lit(2.0).powf(-alpha) / ((T::one() + c_prime * c_prime).sqrt() + T::one())
}

/// `C″ − 4/(n λ₁ a^{2/n})`; positive once the average slice volume is large enough.
pub fn positivity_threshold<T: Real>(a: T, n: usize, lambda1: T, c_dd: T) -> Result<T> {
    if !(a > T::zero() && lambda1 > T::zero() && c_dd > T::zero()) || n == 0 {
        return Err(LabError::InvalidInput("threshold inputs must be positive".into()));
    }
    let nn = T::from_usize_lossy(n);
    Ok(c_dd - T::lit(4.0) / (nn * lambda1 * a.powf(T::lit(2.0) / nn)))
}

/// Root `a* = (4/(n λ₁ C″))^{n/2}` of [`positivity_threshold`].
pub fn positivity_root<T: Real>(n: usize, lambda1: T, c_dd: T) -> T {
    let nn = T::from_usize_lossy(n);
    (T::lit(4.0) / (nn * lambda1 * c_dd)).powf(nn / T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub c_double_prime: f64,
}

/// Evaluates both sides of the positivity lemma,
///
/// ```text
/// ∫ (σ^{2α−1}τ + |∇τ|²)/√(σ^{2α} + |∇τ|²)  ≥  a^{−α} ∫ (C″|∇τ|² − (4/n) a^{2α−2} τ²),
/// ```
///
/// after checking the lemma's hypotheses on the field.
pub fn positivity_check<T: Real>(field: &SigmaField<T>, c: T, c_prime: T) -> Result<PositivityCheck> {
    let a = field.mean();
    let alpha = field.alpha_exp();
    let tau = field.tau();
    let half = T::lit(0.5);
    if let Some(i) = field.values.iter().position(|&s| s < half * a || s > T::lit(2.0) * a) {
        return Err(LabError::Precondition(format!(
            "sigma must stay within [a/2, 2a]; node {i} has {} with a = {a}",
            field.values[i]
        )));
    }
    let tau_cap = T::lit(2.0) * c * a.powf(alpha);
    if let Some(i) = tau.iter().position(|t| t.abs() > tau_cap) {
        return Err(LabError::Precondition(format!(
            "|tau| must not exceed 2 C a^alpha = {tau_cap}; node {i} has {}",
            tau[i]
        )));
    }
    let grad = field.gradient(&field.values);
    let dtau = field.gradient(&tau);
    for i in 0..tau.len() {
        let g: T = grad.iter().map(|g| g[i] * g[i]).sum::<T>().sqrt();
        // |∇u| = |∇σ| / σ^α
        if g > c_prime * field.values[i].powf(alpha) {
            return Err(LabError::Precondition(format!(
                "discrete radius gradient {} exceeds C' = {c_prime} at node {i}",
                g / field.values[i].powf(alpha)
            )));
        }
    }
    let c_dd = positivity_constant(field.n, c_prime);
    let nn = T::from_usize_lossy(field.n);
    let two_alpha = T::lit(2.0) * alpha;
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for i in 0..tau.len() {
        let s = field.values[i];
        let dt2: T = dtau.iter().map(|g| g[i] * g[i]).sum();
        lhs = lhs + (s.powf(two_alpha - T::one()) * tau[i] + dt2) / (s.powf(two_alpha) + dt2).sqrt();
        rhs = rhs + c_dd * dt2 - T::lit(4.0) / nn * a.powf(two_alpha - T::lit(2.0)) * tau[i] * tau[i];
    }
    let cv = field.domain.cell_volume();
    let lhs = lhs * cv;
    let rhs = rhs * cv * a.powf(-alpha);
    let scale = lhs.abs().max(rhs.abs());
    let margin = lhs - rhs;
    Ok(PositivityCheck {
        lhs: lhs.as_f64(),
        rhs: rhs.as_f64(),
        margin: margin.as_f64(),
        holds: margin >= -T::tol_floor(1e-12) * scale,
        c_double_prime: c_dd.as_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityTrials {
    pub trials: usize,
    pub violations: usize,
    pub min_margin: f64,
}

/// Random admissible fields (mean `a`) whose amplitude respects the `|τ|`,
/// `[a/2, 2a]` and gradient hypotheses; reports the worst margin.
pub fn positivity_trials<T: Real>(
    domain: &TorusDomain<T>,
    a: T,
    n: usize,
    c: T,
    c_prime: T,
    trials: usize,
    seed: u64,
) -> Result<PositivityTrials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = T::from_usize_lossy(n - 1) / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let mut out = PositivityTrials {
        trials,
        violations: 0,
        min_margin: f64::INFINITY,
    };
    for _ in 0..trials {
        let shape = random_mode_field(domain, 4, &mut rng);
        let slope = (0..domain.dim())
            .map(|ax| domain.diff(&shape, ax))
            .fold(vec![T::zero(); shape.len()], |acc, d| {
                acc.into_iter().zip(d).map(|(x, y)| x + y * y).collect()
            })
            .into_iter()
            .fold(T::zero(), |m, v| m.max(v.sqrt()));
        let mut cap = (T::lit(2.0) * c * a.powf(alpha)).min(half * a);
        if slope > T::zero() {
            cap = cap.min(c_prime * (half * a).powf(alpha) / slope);
        }
        let amp = cap * T::lit(rng.gen_range(0.0..1.0));
        let values = shape.iter().map(|&t| a + amp * t).collect();
        let field = SigmaField::new(domain.clone(), values, n)?;
        let r = positivity_check(&field, c, c_prime)?;
        if !r.holds {
            out.violations += 1;
        }
        out.min_margin = out.min_margin.min(r.margin);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> TorusDomain<f64> {
        TorusDomain::new(&[1.0], n).unwrap()
    }

    #[test]
    fn constant_field_closed_forms() {
        let f = SigmaField::constant(circle(32), 9.0, 2).unwrap();
        let pi = std::f64::consts::PI;
        assert!((area_functional(&f) - 4.0 * pi * 3.0).abs() < 1e-12);
        assert!((volume_functional(&f) - 4.0 * pi * 9.0).abs() < 1e-12);
        let f1 = SigmaField::constant(circle(32), 5.0, 1).unwrap();
        assert!((area_functional(&f1) - 2.0).abs() < 1e-14);
        let g = l2_gradient(&f);
        assert!(g.iter().all(|v| (v - g[0]).abs() < 1e-12));
    }

    #[test]
    fn domain_validation() {
        assert!(TorusDomain::<f64>::new(&[1.0], 8).is_err());
        assert!(TorusDomain::<f64>::new(&[1.0, 1.0, 1.0], 16).is_err());
        let d = TorusDomain::<f64>::new(&[1.0, 2.0], 16).unwrap();
        assert_eq!(d.n_cells(), 256);
        assert!((d.lambda1() - std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert!(SigmaField::new(circle(16), vec![-1.0; 16], 2).is_err());
    }

    #[test]
    fn gradient_is_adjoint_of_variation() {
        let d = TorusDomain::new(&[1.0, 1.0], 16).unwrap();
        let f = random_field(&d, 50.0, 3.0, 3, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dir = random_mode_field(&d, 3, &mut rng);
        let g = l2_gradient(&f);
        let via_grad: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() * d.cell_volume();
        let direct = first_variation(&f, &dir).unwrap();
        assert!((via_grad - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn threshold_root() {
        let cdd = positivity_constant(2, 1.5);
        let l1 = 4.0 * std::f64::consts::PI.powi(2);
        let root = positivity_root(2, l1, cdd);
        assert!(positivity_threshold(root, 2, l1, cdd).unwrap().abs() < 1e-12);
        assert!(positivity_threshold(1e-6, 2, l1, cdd).unwrap() < 0.0);
        assert!(positivity_threshold(0.0, 2, l1, cdd).is_err());
    }

    #[test]
    fn grid_csv_round() {
        let text = (0..16).map(|i| format!("{}", 1.0 + i as f64)).collect::<Vec<_>>().join(",");
        let f: SigmaField<f64> = read_grid_csv(text.as_bytes(), 2.0, 2).unwrap();
        assert_eq!(f.domain.dim(), 1);
        assert_eq!(f.values[15], 16.0);
        assert!(read_grid_csv::<f64, _>("1,2\n3\n".as_bytes(), 1.0, 2).is_err());
    }
}
