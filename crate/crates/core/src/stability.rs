//! Index form of a bubble, its Sturm–Liouville sectors, and the stability verdict.
//!
//! After a Fourier decomposition in θ and a parity split in `s` and `y`, the
//! Jacobi operator on mode `k` becomes, in the arclength `t` of the profile,
//!
//! ```text
//! L_k g = −(w g_t)_t / w + (P + k²/(c²f²)) g,   w = c f,   P = H²(−φφ_ss − φ_s)
//! ```
//!
//! on the quarter profile between the fold at `s = 0` (α = 0) and the fold at
//! `y = 0` (α = π/2). Even parity at a fold is a Neumann condition, odd parity a
//! Dirichlet one. The discretization is a finite-volume scheme whose symmetric
//! form `M^{-1/2} K M^{-1/2}` is tridiagonal.

use rayon::prelude::*;
use serde::Serialize;

use crate::bubble::BubbleProfile;
use crate::error::{LabError, Result};
use crate::profile::WarpedGeometry;
use crate::scalar::{maximize, Real};
use crate::tridiag::SymTridiagonal;

/// Per-node coefficients of the index form in the `(s, θ)` coordinates.
#[derive(Debug, Clone)]
pub struct IndexCoefficients<T> {
    /// `A = Hcf√(φ(s₁)² − φ²) = cf cos α`.
    pub a: Vec<T>,
    /// `B cos α`; `B` itself is unbounded at the fold.
    pub b_cos: Vec<T>,
    /// `P = H²(−φφ_ss − φ_s)`.
    pub p: Vec<T>,
    /// `|II|² = H²(φ_s² + (φ_s − 1)²)`.
    pub second_ff_sq: Vec<T>,
    /// `Ric(ν, ν) = −(f_ss/f) H² φ²`.
    pub ricci_normal: Vec<T>,
}

impl<T: Real> IndexCoefficients<T> {
    /// Max of `|P − (−Ric(ν,ν) − |II|²)|`.
    pub fn recombination_defect(&self) -> T {
        (0..self.p.len())
            .map(|j| (self.p[j] + self.ricci_normal[j] + self.second_ff_sq[j]).abs())
            .fold(T::zero(), |m, v| m.max(v))
    }
}

fn x_term<T: Real>(g: &WarpedGeometry<T>, s: T) -> T {
    let j = g.profile().jet(s);
    -j.phi * j.phi_ss - j.phi_s
}

pub fn index_coefficients<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> IndexCoefficients<T> {
    let c = g.c();
    let h2 = bp.h * bp.h;
    let n = bp.len();
    let mut out = IndexCoefficients {
        a: Vec::with_capacity(n),
        b_cos: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        second_ff_sq: Vec::with_capacity(n),
        ricci_normal: Vec::with_capacity(n),
    };
    for node in bp.nodes() {
        let jet = g.profile().jet(node.s);
        let f = g.f(node.s);
        let x = x_term(g, node.s);
        out.a.push(c * f * node.alpha.cos());
        out.b_cos.push(h2 * c * f * x);
        out.p.push(h2 * x);
        let d = jet.phi_s - T::one();
        out.second_ff_sq.push(h2 * (jet.phi_s * jet.phi_s + d * d));
        out.ricci_normal.push(-g.f_ss_over_f(node.s) * h2 * jet.phi * jet.phi);
    }
    out
}

/// Which integrand defines β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaReading<T> {
    /// `f²|−φφ_ss − φ_s|`.
    PhiS,
    /// `f²|−φφ_ss − φ_s(s₁)|`, with the slope frozen at `s₁`.
    PhiSAt(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta<T> {
    pub value: T,
    pub argmax: T,
}

/// `β² = max_{[0, s₀]} f²|−φφ_ss − φ_s|`.
pub fn beta<T: Real>(g: &WarpedGeometry<T>, reading: BetaReading<T>) -> Result<Beta<T>> {
    let s0 = g
        .profile()
        .s0()
        .ok_or_else(|| LabError::Precondition("beta needs a profile with a local maximum s0".into()))?;
    let q = |s: T| {
        let j = g.profile().jet(s);
        let slope = match reading {
            BetaReading::PhiS => j.phi_s,
            BetaReading::PhiSAt(s1) => g.profile().phi_s(s1),
        };
        let f = g.f(s);
        f * f * (-j.phi * j.phi_ss - slope).abs()
    };
    let (argmax, v) = maximize(q, T::zero(), s0);
    Ok(Beta {
        value: v.sqrt(),
        argmax,
    })
}

/// Smallest ratio `φ(s₁)/c` for which `1/A + B > 0` on `[0, s₁]`:
/// `√(max_{[0,s₁]} (−f²(−φφ_ss − φ_s))⁺)`.
pub fn sharp_ratio_threshold<T: Real>(g: &WarpedGeometry<T>, s1: T) -> T {
    let q = |s: T| {
        let f = g.f(s);
        (-f * f * x_term(g, s)).max(T::zero())
    };
    maximize(q, T::zero(), s1).1.sqrt()
}

/// `min_j (1 + H²c²f²X)`, which has the sign of `1/A + B` at every node.
pub fn positivity_margin<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> T {
    let hc = bp.h * g.c();
    bp.s.iter()
        .map(|&s| {
            let f = g.f(s);
            T::one() + hc * hc * f * f * x_term(g, s)
        })
        .fold(T::infinity(), |m, v| m.min(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

impl From<Parity> for Boundary {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => Boundary::Neumann,
            Parity::Odd => Boundary::Dirichlet,
        }
    }
}

/// Finite-volume discretization of `−(w g_t)_t/w + q g` on a nonuniform grid.
#[derive(Debug, Clone)]
pub struct SturmLiouville<T> {
    /// Symmetric form `M^{-1/2} K M^{-1/2}`.
    pub op: SymTridiagonal<T>,
    /// Diagonal mass `w_j × (dual cell length)` on the retained nodes.
    pub mass: Vec<T>,
    /// Indices of the retained nodes in the input grid.
    pub first: usize,
    pub stiffness: SymTridiagonal<T>,
}

impl<T: Real> SturmLiouville<T> {
    /// Assembles the operator; a Dirichlet end drops its node.
    pub fn assemble(t: &[T], w: &[T], q: &[T], left: Boundary, right: Boundary) -> Result<Self> {
        let n = t.len();
        if w.len() != n || q.len() != n || n < 3 {
            return Err(LabError::InvalidInput("Sturm-Liouville arrays must share a length ≥ 3".into()));
        }
        let half = T::lit(0.5);
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n - 1];
        let mut mass = vec![T::zero(); n];
        for j in 0..n - 1 {
            let dt = t[j + 1] - t[j];
            if !(dt > T::zero()) {
                return Err(LabError::InvalidInput("arclength grid must be strictly increasing".into()));
            }
            let flux = half * (w[j] + w[j + 1]) / dt;
            diag[j] = diag[j] + flux;
            diag[j + 1] = diag[j + 1] + flux;
            off[j] = -flux;
            mass[j] = mass[j] + half * dt;
            mass[j + 1] = mass[j + 1] + half * dt;
        }
        for j in 0..n {
            mass[j] = mass[j] * w[j];
            diag[j] = diag[j] + q[j] * mass[j];
        }
        let first = usize::from(left == Boundary::Dirichlet);
        let last = n - usize::from(right == Boundary::Dirichlet);
        let diag = diag[first..last].to_vec();
        let off = off[first..last - 1].to_vec();
        let mass = mass[first..last].to_vec();
        let root: Vec<T> = mass.iter().map(|m| m.sqrt()).collect();
        let sd: Vec<T> = diag.iter().zip(&mass).map(|(d, m)| *d / *m).collect();
        let so: Vec<T> = (0..off.len()).map(|j| off[j] / (root[j] * root[j + 1])).collect();
        Ok(Self {
            op: SymTridiagonal::new(sd, so)?,
            stiffness: SymTridiagonal::new(diag, off)?,
            mass,
            first,
        })
    }

    /// `(L g)_j = (K g)_j / M_j` for `g` on the retained nodes.
    pub fn apply(&self, g: &[T]) -> Vec<T> {
        self.stiffness
            .matvec(g)
            .into_iter()
            .zip(&self.mass)
            .map(|(v, m)| v / *m)
            .collect()
    }

    /// `M^{1/2} g`: maps a grid function into the symmetric frame.
    pub fn to_symmetric(&self, g: &[T]) -> Vec<T> {
        g.iter().zip(&self.mass).map(|(v, m)| *v * m.sqrt()).collect()
    }
}

/// Operator for Fourier mode `k` on the sector with the given parities.
pub fn sector_operator<T: Real>(
    bp: &BubbleProfile<T>,
    g: &WarpedGeometry<T>,
    k: usize,
    s_parity: Parity,
    y_parity: Parity,
) -> Result<SturmLiouville<T>> {
    let c = g.c();
    let h2 = bp.h * bp.h;
    let kk = T::from_usize_lossy(k * k);
    let w: Vec<T> = bp.s.iter().map(|&s| c * g.f(s)).collect();
    let q: Vec<T> = bp
        .s
        .iter()
        .zip(&w)
        .map(|(&s, &wj)| h2 * x_term(g, s) + kk / (wj * wj))
        .collect();
    SturmLiouville::assemble(&bp.t, &w, &q, s_parity.into(), y_parity.into())
}

/// Translation Jacobi field `ψ = φ(s₁) cos α` on the quarter profile.
pub fn translation_field<T: Real>(bp: &BubbleProfile<T>) -> Vec<T> {
    let phi1 = bp.h.recip();
    bp.alpha.iter().map(|a| phi1 * a.cos()).collect()
}

/// Max-norm of the `(k=0, s-even, y-odd)` operator applied to ψ.
pub fn jacobi_field_residual<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> Result<T> {
    let op = sector_operator(bp, g, 0, Parity::Even, Parity::Odd)?;
    let psi = translation_field(bp);
    let kept = &psi[op.first..op.first + op.mass.len()];
    Ok(op.apply(kept).into_iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

/// Lowest eigenvalue of the translation sector and the correlation of its
/// eigenvector with ψ (both in the mass-weighted inner product).
pub fn translation_mode<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> Result<(T, T)> {
    let op = sector_operator(bp, g, 0, Parity::Even, Parity::Odd)?;
    let lambda = op.op.lowest_eigenvalues(1)[0];
    let v = op.op.eigenvector(lambda);
    let psi = translation_field(bp);
    let e = op.to_symmetric(&psi[op.first..op.first + op.mass.len()]);
    let dot: T = v.iter().zip(&e).map(|(a, b)| *a * *b).sum();
    let nv = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
    let ne = e.iter().map(|a| *a * *a).sum::<T>().sqrt();
    Ok((lambda, dot.abs() / (nv * ne)))
}

/// Max defect of `(Aφ_s)_s = Bφ − (cfφ(s₁)/√(φ(s₁)² − φ²)) φ (log f)_ss`,
/// checked after multiplying by `ds/dα`, which keeps both sides bounded:
/// `d(Aφ_s)/dα = (B cos α · φ − cfφ (log f)_ss) / (Hφ_s)`.
pub fn verify_case2_identity<T: Real>(bp: &BubbleProfile<T>, g: &WarpedGeometry<T>) -> T {
    let coeff = index_coefficients(bp, g);
    let p = g.profile();
    let n = bp.len();
    let h = bp.step();
    let lhs_fn: Vec<T> = (0..n).map(|j| coeff.a[j] * p.phi_s(bp.s[j])).collect();
    let mut worst = T::zero();
    for j in 0..n - 1 {
        // Aφ_s is even in α through the fold at s = 0
        let prev = if j == 0 { lhs_fn[1] } else { lhs_fn[j - 1] };
        let lhs = (lhs_fn[j + 1] - prev) / (T::lit(2.0) * h);
        let s = bp.s[j];
        let jet = p.jet(s);
        let rhs = (coeff.b_cos[j] * jet.phi - g.c() * g.f(s) * jet.phi * g.log_f_ss(s)) / (bp.h * jet.phi_s);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorSpectrum {
    pub k: usize,
    pub s_parity: Parity,
    pub y_parity: Parity,
    pub eigenvalues: Vec<f64>,
    /// Spectrum on the admissible subspace, for the two constrained sectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constrained_eigenvalues: Option<Vec<f64>>,
}

impl SectorSpectrum {
    /// Lowest eigenvalue entering the stability test.
    pub fn admissible_lowest(&self) -> f64 {
        self.constrained_eigenvalues
            .as_ref()
            .unwrap_or(&self.eigenvalues)
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}

const PARITIES: [(Parity, Parity); 4] = [
    (Parity::Even, Parity::Even),
    (Parity::Even, Parity::Odd),
    (Parity::Odd, Parity::Even),
    (Parity::Odd, Parity::Odd),
];

fn sector_spectrum<T: Real>(
    bp: &BubbleProfile<T>,
    g: &WarpedGeometry<T>,
    k: usize,
    sp: Parity,
    yp: Parity,
    m: usize,
) -> Result<SectorSpectrum> {
    let op = sector_operator(bp, g, k, sp, yp)?;
    let eig = op.op.lowest_eigenvalues(m);
    let constraint = match (k, sp, yp) {
        (0, Parity::Even, Parity::Even) => Some(op.to_symmetric(&vec![T::one(); op.mass.len()])),
        (0, Parity::Even, Parity::Odd) => {
            let psi = translation_field(bp);
            Some(op.to_symmetric(&psi[op.first..op.first + op.mass.len()]))
        }
        _ => None,
    };
    let constrained = constraint
        .map(|e| op.op.lowest_restricted_eigenvalues(&e, m))
        .transpose()?;
    let to64 = |v: Vec<T>| -> Result<Vec<f64>> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::NumericalFailure(format!("non-finite eigenvalue in sector k = {k}")));
        }
        Ok(v.into_iter().map(|x| x.as_f64()).collect())
    };
    Ok(SectorSpectrum {
        k,
        s_parity: sp,
        y_parity: yp,
        eigenvalues: to64(eig)?,
        constrained_eigenvalues: constrained.map(to64).transpose()?,
    })
}

/// The `m` lowest eigenvalues of every sector with `k ≤ k_max`, ordered by `(k, parities)`.
pub fn jacobi_spectrum<T: Real>(
    bp: &BubbleProfile<T>,
    g: &WarpedGeometry<T>,
    k_max: usize,
    m: usize,
) -> Result<Vec<SectorSpectrum>> {
    if k_max < 1 || m < 1 {
        return Err(LabError::InvalidInput("k_max and m must be at least 1".into()));
    }
    let jobs: Vec<(usize, Parity, Parity)> = (0..=k_max)
        .flat_map(|k| PARITIES.iter().map(move |&(a, b)| (k, a, b)))
        .collect();
    jobs.par_iter()
        .map(|&(k, sp, yp)| sector_spectrum(bp, g, k, sp, yp, m))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityOptions {
    pub k_max: usize,
    pub m: usize,
    /// Relative to the largest computed eigenvalue magnitude.
    pub tol_rel: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            k_max: 16,
            m: 6,
            tol_rel: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub beta: f64,
    pub ratio: f64,
    pub sectors: Vec<SectorSpectrum>,
    pub translation_residual: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Highest mode actually computed; raised above the requested `k_max` when the tail bound needs it.
    pub k_max: usize,
    /// `min P + (k_max+1)²/(c² max f²)`; positive certifies every higher mode.
    pub tail_margin: f64,
    pub sharp_ratio_threshold: f64,
    pub positivity_margin: f64,
}

pub fn stability_verdict<T: Real>(
    bp: &BubbleProfile<T>,
    g: &WarpedGeometry<T>,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    let c = g.c();
    let coeff = index_coefficients(bp, g);
    let p_min = coeff.p.iter().fold(T::infinity(), |m, &v| m.min(v));
    let f_max = bp.s.iter().map(|&s| g.f(s)).fold(T::zero(), |m, v| m.max(v));
    let cf = c * f_max;
    let needed = if p_min < T::zero() {
        (cf * (-p_min).sqrt()).ceil().to_usize().unwrap_or(usize::MAX)
    } else {
        0
    };
    let k_max = opts.k_max.max(needed).max(1);
    let sectors = jacobi_spectrum(bp, g, k_max, opts.m)?;
    let next = T::from_usize_lossy(k_max + 1);
    let tail_margin = p_min + next * next / (cf * cf);

    let scale = sectors
        .iter()
        .flat_map(|s| s.eigenvalues.iter().chain(s.constrained_eigenvalues.iter().flatten()))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = opts.tol_rel * scale;
    let lowest: Vec<f64> = sectors.iter().map(SectorSpectrum::admissible_lowest).collect();
    let verdict = if lowest.iter().any(|&l| l < -tol) {
        Verdict::Unstable
    } else if lowest.iter().all(|&l| l > tol) && tail_margin > T::zero() {
        Verdict::Stable
    } else {
        Verdict::Marginal
    };
    let beta = beta(g, BetaReading::PhiS).map(|b| b.value.as_f64()).unwrap_or(f64::NAN);
    Ok(StabilityReport {
        beta,
        ratio: (bp.h.recip() / c).as_f64(),
        sectors,
        translation_residual: jacobi_field_residual(bp, g)?.as_f64(),
        verdict,
        tolerance: tol,
        k_max,
        tail_margin: tail_margin.as_f64(),
        sharp_ratio_threshold: sharp_ratio_threshold(g, bp.s1).as_f64(),
        positivity_margin: positivity_margin(bp, g).as_f64(),
    })
}

/// The mode-`k` operator on the whole closed profile, as a periodic
/// (cyclic tridiagonal) matrix in the symmetric frame.
///
/// Nodes run once around the curve, starting at the top (`s = 0, y > 0`); the
/// return value holds the diagonal, the cyclic off-diagonal (`off[i]` couples
/// `i` and `i+1 mod N`), and the mass.
#[derive(Debug, Clone)]
pub struct ClosedCurveOperator<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    pub mass: Vec<T>,
    /// `(s, y)` of each node.
    pub points: Vec<(T, T)>,
}

pub fn closed_curve_operator<T: Real>(
    bp: &BubbleProfile<T>,
    g: &WarpedGeometry<T>,
    k: usize,
) -> Result<ClosedCurveOperator<T>> {
    let n = bp.len();
    let c = g.c();
    let h2 = bp.h * bp.h;
    let kk = T::from_usize_lossy(k * k);
    let total = bp.t[n - 1];
    // quarter: j = 0..n-1 from (0, u0) to (s1, 0); reflect through the folds
    let mut t = Vec::new();
    let mut pts = Vec::new();
    let mut src = Vec::new();
    for j in 0..n - 1 {
        t.push(bp.t[j]);
        pts.push((bp.s[j], bp.u[j]));
        src.push(j);
    }
    for j in (1..n).rev() {
        t.push(T::lit(2.0) * total - bp.t[j]);
        pts.push((bp.s[j], -bp.u[j]));
        src.push(j);
    }
    for j in 0..n - 1 {
        t.push(T::lit(2.0) * total + bp.t[j]);
        pts.push((-bp.s[j], -bp.u[j]));
        src.push(j);
    }
    for j in (1..n).rev() {
        t.push(T::lit(4.0) * total - bp.t[j]);
        pts.push((-bp.s[j], bp.u[j]));
        src.push(j);
    }
    let len = t.len();
    let w: Vec<T> = src.iter().map(|&j| c * g.f(bp.s[j])).collect();
    let q: Vec<T> = src
        .iter()
        .zip(&w)
        .map(|(&j, &wj)| h2 * x_term(g, bp.s[j]) + kk / (wj * wj))
        .collect();
    let half = T::lit(0.5);
    let mut diag = vec![T::zero(); len];
    let mut off = vec![T::zero(); len];
    let mut mass = vec![T::zero(); len];
    for i in 0..len {
        let next = (i + 1) % len;
        let dt = if next == 0 { T::lit(4.0) * total - t[i] } else { t[next] - t[i] };
        let flux = half * (w[i] + w[next]) / dt;
        diag[i] = diag[i] + flux;
        diag[next] = diag[next] + flux;
        off[i] = -flux;
        mass[i] = mass[i] + half * dt;
        mass[next] = mass[next] + half * dt;
    }
    for i in 0..len {
        mass[i] = mass[i] * w[i];
        diag[i] = diag[i] + q[i] * mass[i];
    }
    let sd: Vec<T> = (0..len).map(|i| diag[i] / mass[i]).collect();
    let so: Vec<T> = (0..len)
        .map(|i| off[i] / (mass[i] * mass[(i + 1) % len]).sqrt())
        .collect();
    Ok(ClosedCurveOperator {
        diag: sd,
        off: so,
        mass,
        points: pts,
    })
}
