//! Generating function φ and the warped metric `ds² + c²f(s)²dθ² + dy²` it determines.
//!
//! A profile φ (odd, `φ'(0) = 1`, positive on `(0, s_max)`) fixes the warp
//! factor `f` up to a constant through `f_s/f = (1 − φ_s)/φ`. With
//! `φ(s) = s + s²φ̃(s)` the reconstruction
//!
//! ```text
//! f(s) = 1/(1 + sφ̃(s)) · exp ∫₀ˢ −φ̃/(1 + tφ̃) dt
//! ```
//!
//! is regular at the origin and normalized by `f(0) = 1`. The integral is
//! tabulated once on a uniform grid; evaluations add a single Kronrod panel from
//! the nearest table node.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quadrature::{gauss_kronrod15, integrate};
use crate::scalar::{linspace, Real};
use crate::spline::CubicSpline;

/// Default distance between the builtin domains and the poles of their warp factors.
pub const DEFAULT_MARGIN: f64 = 0.05;

const TABLE_PANELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    BuiltinEx1,
    BuiltinEx2,
    UserClosedForm,
    UserSampled,
}

/// The two builtin profiles: `φ = sin s` and `φ = s − s³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Ex1,
    Ex2,
}

impl FromStr for Builtin {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1" => Ok(Builtin::Ex1),
            "ex2" => Ok(Builtin::Ex2),
            other => Err(LabError::InvalidInput(format!(
                "unknown builtin profile `{other}` (expected ex1 or ex2)"
            ))),
        }
    }
}

/// φ and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiJet<T> {
    pub phi: T,
    pub phi_s: T,
    pub phi_ss: T,
}

pub type ClosedForm<T> = Arc<dyn Fn(T) -> PhiJet<T> + Send + Sync>;

#[derive(Clone)]
enum Source<T> {
    Ex1,
    Ex2,
    Closed(ClosedForm<T>),
    Sampled(Arc<CubicSpline<T>>),
}

/// Odd generating function φ on the symmetric interval `(−s_max, s_max)`.
#[derive(Clone)]
pub struct PhiProfile<T> {
    kind: ProfileKind,
    s_max: T,
    source: Source<T>,
    s0: Option<T>,
    s0_pattern_ok: bool,
}

impl<T: Real> fmt::Debug for PhiProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiProfile")
            .field("kind", &self.kind)
            .field("s_max", &self.s_max)
            .field("s0", &self.s0)
            .finish()
    }
}

impl<T: Real> PhiProfile<T> {
    /// Builtin profile on `(−L + margin, L − margin)` with `L = π` (ex1) or `1` (ex2).
    pub fn builtin(name: Builtin, margin: T) -> Self {
        match name {
            Builtin::Ex1 => Self {
                kind: ProfileKind::BuiltinEx1,
                s_max: T::PI() - margin,
                source: Source::Ex1,
                s0: Some(T::FRAC_PI_2()),
                s0_pattern_ok: true,
            },
            Builtin::Ex2 => Self {
                kind: ProfileKind::BuiltinEx2,
                s_max: T::one() - margin,
                source: Source::Ex2,
                s0: Some(T::one() / T::lit(3.0).sqrt()),
                s0_pattern_ok: true,
            },
        }
    }

    /// User-supplied closed form. `s0` is located by [`detect_s0`].
    pub fn closed_form(s_max: T, jet: ClosedForm<T>) -> Result<Self> {
        if !(s_max > T::zero()) {
            return Err(LabError::InvalidInput("s_max must be positive".into()));
        }
        let mut p = Self {
            kind: ProfileKind::UserClosedForm,
            s_max,
            source: Source::Closed(jet),
            s0: None,
            s0_pattern_ok: true,
        };
        p.attach_s0();
        Ok(p)
    }

    /// Sampled φ interpolated by a natural cubic spline.
    ///
    /// The samples must contain `s = 0`. When no negative abscissae are given
    /// the data are extended by odd reflection.
    pub fn sampled(s: Vec<T>, phi: Vec<T>) -> Result<Self> {
        if s.len() != phi.len() {
            return Err(LabError::InvalidInput("s and phi columns differ in length".into()));
        }
        let mut pairs: Vec<(T, T)> = s.into_iter().zip(phi).collect();
        if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(LabError::InvalidInput("profile samples must be finite".into()));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let zero_tol = T::tol_floor(1e-12);
        if !pairs.iter().any(|(a, _)| a.abs() <= zero_tol) {
            return Err(LabError::InvalidInput("sampled profile must include s = 0".into()));
        }
        if pairs[0].0 > -zero_tol {
            let mirrored: Vec<(T, T)> = pairs
                .iter()
                .rev()
                .filter(|(a, _)| *a > zero_tol)
                .map(|&(a, b)| (-a, -b))
                .collect();
            pairs = mirrored.into_iter().chain(pairs).collect();
        }
        let (xs, ys): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();
        let s_max = (-xs[0]).min(*xs.last().expect("non-empty"));
        if !(s_max > T::zero()) {
            return Err(LabError::InvalidInput("sampled profile has an empty symmetric domain".into()));
        }
        let spline = CubicSpline::new(xs, ys)?;
        let mut p = Self {
            kind: ProfileKind::UserSampled,
            s_max,
            source: Source::Sampled(Arc::new(spline)),
            s0: None,
            s0_pattern_ok: true,
        };
        p.attach_s0();
        Ok(p)
    }

    /// Reads a two-column CSV with header `s,phi`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "phi" {
            return Err(LabError::Parse(format!(
                "profile CSV header must be `s,phi`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut s = Vec::new();
        let mut phi = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<T> {
                let v: f64 = rec[k].parse().map_err(|_| {
                    LabError::Parse(format!("row {}: `{}` is not a number", line + 2, &rec[k]))
                })?;
                Ok(T::lit(v))
            };
            s.push(parse(0)?);
            phi.push(parse(1)?);
        }
        Self::sampled(s, phi)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    fn attach_s0(&mut self) {
        let d = detect_s0(self);
        self.s0 = d.s0;
        self.s0_pattern_ok = d.pattern_ok;
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn s_max(&self) -> T {
        self.s_max
    }

    /// First local maximum of φ on `(0, s_max)`, when there is one.
    pub fn s0(&self) -> Option<T> {
        self.s0
    }

    /// Whether φ_s changes sign (+ to −) at `s0` as the family construction requires.
    pub fn s0_pattern_ok(&self) -> bool {
        self.s0_pattern_ok
    }

    pub fn jet(&self, s: T) -> PhiJet<T> {
        match &self.source {
            Source::Ex1 => PhiJet {
                phi: s.sin(),
                phi_s: s.cos(),
                phi_ss: -s.sin(),
            },
            Source::Ex2 => PhiJet {
                phi: s - s * s * s,
                phi_s: T::one() - T::lit(3.0) * s * s,
                phi_ss: T::lit(-6.0) * s,
            },
            Source::Closed(f) => f(s),
            Source::Sampled(sp) => {
                let (phi, phi_s, phi_ss) = sp.eval(s);
                PhiJet { phi, phi_s, phi_ss }
            }
        }
    }

    pub fn phi(&self, s: T) -> T {
        self.jet(s).phi
    }

    pub fn phi_s(&self, s: T) -> T {
        self.jet(s).phi_s
    }

    pub fn phi_ss(&self, s: T) -> T {
        self.jet(s).phi_ss
    }

    fn validation_tolerance(&self) -> T {
        match self.kind {
            ProfileKind::UserSampled => T::tol_floor(1e-4),
            _ => T::tol_floor(1e-8),
        }
    }
}

/// Builtin constructor with the default margin.
pub fn make_builtin_profile<T: Real>(name: Builtin) -> PhiProfile<T> {
    PhiProfile::builtin(name, T::lit(DEFAULT_MARGIN))
}

/// A violated admissibility criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "criterion", rename_all = "kebab-case")]
pub enum Diagnostic {
    NotOdd { at: f64, defect: f64 },
    WrongSlopeAtZero { slope: f64 },
    SignViolation { at: f64 },
}

impl Diagnostic {
    pub fn code(&self) -> &'static str {
        match self {
            Diagnostic::NotOdd { .. } => "not-odd",
            Diagnostic::WrongSlopeAtZero { .. } => "wrong-slope-at-zero",
            Diagnostic::SignViolation { .. } => "sign-violation",
        }
    }
}

/// Checks the three criteria a generating function must meet.
///
/// The slope and sign criteria are stated for odd functions, so a profile that
/// fails oddness reports only `not-odd`.
pub fn validate_profile<T: Real>(p: &PhiProfile<T>) -> Vec<Diagnostic> {
    let tol = p.validation_tolerance();
    let probe: Vec<T> = match &p.source {
        Source::Sampled(sp) => sp.knots().iter().copied().filter(|s| s.abs() <= p.s_max).collect(),
        _ => linspace(-p.s_max, p.s_max, 801),
    };
    let mut worst: Option<(T, T)> = None;
    for &s in &probe {
        let defect = (p.phi(s) + p.phi(-s)).abs();
        let scale = T::one().max(p.phi(s).abs());
        if defect > tol * scale && worst.is_none_or(|w| defect > w.1) {
            worst = Some((s, defect));
        }
    }
    if let Some((at, defect)) = worst {
        return vec![Diagnostic::NotOdd {
            at: at.as_f64(),
            defect: defect.as_f64(),
        }];
    }
    let mut out = Vec::new();
    let slope = p.phi_s(T::zero());
    if (slope - T::one()).abs() > tol {
        out.push(Diagnostic::WrongSlopeAtZero { slope: slope.as_f64() });
    }
    let s_lim = p.s0.unwrap_or(p.s_max);
    for s in linspace(T::zero(), s_lim, 801) {
        let j = p.jet(s);
        let phi_bad = s > T::zero() && !(j.phi > T::zero());
        let slope_bad = s < s_lim && !(j.phi_s > T::zero());
        if phi_bad || slope_bad {
            out.push(Diagnostic::SignViolation { at: s.as_f64() });
            break;
        }
    }
    out
}

/// Result of the search for the first local maximum of φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S0Detection<T> {
    pub s0: Option<T>,
    /// `false` when φ_s touches zero without becoming negative afterwards.
    pub pattern_ok: bool,
}

/// Smallest `s` in `(0, s_max)` where φ_s changes sign from + to −, refined by bisection.
pub fn detect_s0<T: Real>(p: &PhiProfile<T>) -> S0Detection<T> {
    let n = 4096;
    let grid = linspace(T::zero(), p.s_max, n + 1);
    let tol = T::tol_floor(1e-12);
    let mut prev = grid[0];
    for &s in grid.iter().skip(1) {
        let d = p.phi_s(s);
        if d <= T::zero() {
            let (mut lo, mut hi) = (prev, s);
            if d == T::zero() {
                hi = s;
            }
            while hi - lo > tol {
                let mid = T::lit(0.5) * (lo + hi);
                if p.phi_s(mid) > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s0 = T::lit(0.5) * (lo + hi);
            // hypothesis: φ_s < 0 on some interval after s0
            let probe_end = (s0 + (p.s_max - s0) * T::lit(0.05)).min(p.s_max);
            let pattern_ok = linspace(s0, probe_end, 12)
                .into_iter()
                .skip(1)
                .all(|t| p.phi_s(t) < T::zero());
            return S0Detection {
                s0: Some(s0),
                pattern_ok,
            };
        }
        prev = s;
    }
    S0Detection {
        s0: None,
        pattern_ok: true,
    }
}

/// Odd quintic through three points of `(0, δ]`, used in place of
/// expressions that cancel catastrophically near `s = 0`.
#[derive(Debug, Clone, Copy)]
struct OddFit<T> {
    delta: T,
    a: [T; 3],
}

impl<T: Real> OddFit<T> {
    fn new<F: Fn(T) -> T>(delta: T, q: F) -> Self {
        // z_k = k/3, rows [z, z³, z⁵]
        let z: [T; 3] = [T::lit(1.0 / 3.0), T::lit(2.0 / 3.0), T::one()];
        let mut m = [[T::zero(); 4]; 3];
        for k in 0..3 {
            let zk = z[k];
            m[k] = [zk, zk.powi(3), zk.powi(5), q(zk * delta)];
        }
        // Gaussian elimination with partial pivoting
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).expect("finite"))
                .expect("rows");
            m.swap(col, piv);
            let pivot = m[col];
            for row in m.iter_mut().skip(col + 1) {
                let w = row[col] / pivot[col];
                for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                    *x = *x - w * *p;
                }
            }
        }
        let mut a = [T::zero(); 3];
        for row in (0..3).rev() {
            let mut acc = m[row][3];
            for k in row + 1..3 {
                acc = acc - m[row][k] * a[k];
            }
            a[row] = acc / m[row][row];
        }
        Self { delta, a }
    }

    fn eval(&self, s: T) -> T {
        let z = s / self.delta;
        let z2 = z * z;
        z * (self.a[0] + z2 * (self.a[1] + z2 * self.a[2]))
    }

    fn deriv(&self, s: T) -> T {
        let z = s / self.delta;
        let z2 = z * z;
        (self.a[0] + z2 * (T::lit(3.0) * self.a[1] + z2 * T::lit(5.0) * self.a[2])) / self.delta
    }
}

/// Metric data `(φ, f, F, c)` of `Y × ℝ` with `Y = I × S¹`.
#[derive(Clone)]
pub struct WarpedGeometry<T> {
    profile: PhiProfile<T>,
    c: T,
    step: T,
    log_table: Vec<T>,
    big_f_table: Vec<T>,
    tilde_fit: OddFit<T>,
    log_slope_fit: OddFit<T>,
}

impl<T: Real> fmt::Debug for WarpedGeometry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedGeometry")
            .field("profile", &self.profile)
            .field("c", &self.c)
            .finish()
    }
}

/// Reconstructs the normalized warp factor `f` (and `F = ∫f`) from φ.
pub fn f_from_phi<T: Real>(p: &PhiProfile<T>, c: T) -> Result<WarpedGeometry<T>> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(LabError::InvalidInput(format!("warp constant c = {c} must be positive")));
    }
    let diags = validate_profile(p);
    if !diags.is_empty() {
        let codes: Vec<&str> = diags.iter().map(|d| d.code()).collect();
        return Err(LabError::InvalidInput(format!(
            "profile fails admissibility: {}",
            codes.join(", ")
        )));
    }
    let s_max = p.s_max();
    let delta = T::lit(4e-3).min(s_max / T::lit(8.0));
    let tilde_direct = |t: T| (p.phi(t) - t) / (t * t);
    let log_slope_direct = |t: T| {
        let j = p.jet(t);
        (T::one() - j.phi_s) / j.phi
    };
    let tilde_fit = OddFit::new(delta, tilde_direct);
    let log_slope_fit = OddFit::new(delta, log_slope_direct);

    let mut g = WarpedGeometry {
        profile: p.clone(),
        c,
        step: s_max / T::from_usize_lossy(TABLE_PANELS),
        log_table: Vec::with_capacity(TABLE_PANELS + 1),
        big_f_table: Vec::with_capacity(TABLE_PANELS + 1),
        tilde_fit,
        log_slope_fit,
    };
    let nodes = linspace(T::zero(), s_max, TABLE_PANELS + 1);
    let tol = T::tol_floor(1e-15);
    let mut acc = T::zero();
    g.log_table.push(acc);
    for w in nodes.windows(2) {
        acc = acc + integrate(|t| g.log_integrand(t), w[0], w[1], tol, tol)?;
        g.log_table.push(acc);
    }
    let mut acc = T::zero();
    g.big_f_table.push(acc);
    for w in nodes.windows(2) {
        acc = acc + integrate(|t| g.f(t), w[0], w[1], tol, tol)?;
        g.big_f_table.push(acc);
    }
    Ok(g)
}

/// Min of `(log f)_ss` on an interval (convexity hypothesis check).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck<T> {
    pub min_value: T,
    pub argmin: T,
    pub positive: bool,
}

impl<T: Real> WarpedGeometry<T> {
    pub fn profile(&self) -> &PhiProfile<T> {
        &self.profile
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn s_max(&self) -> T {
        self.profile.s_max()
    }

    /// Same warp factor, different warp constant.
    pub fn with_c(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(LabError::InvalidInput(format!("warp constant c = {c} must be positive")));
        }
        let mut g = self.clone();
        g.c = c;
        Ok(g)
    }

    fn phi_tilde(&self, t: T) -> T {
        if t.abs() < self.tilde_fit.delta {
            self.tilde_fit.eval(t)
        } else {
            (self.profile.phi(t) - t) / (t * t)
        }
    }

    fn log_integrand(&self, t: T) -> T {
        let pt = self.phi_tilde(t);
        -pt / (T::one() + t * pt)
    }

    fn log_integral(&self, a: T) -> T {
        let last = self.log_table.len() - 1;
        let i = ((a / self.step).floor().to_usize().unwrap_or(0)).min(last);
        let ti = self.step * T::from_usize_lossy(i);
        if a == ti {
            return self.log_table[i];
        }
        let mut h = |t: T| self.log_integrand(t);
        self.log_table[i] + gauss_kronrod15(&mut h, ti, a).0
    }

    /// Warp factor, even, `f(0) = 1`.
    pub fn f(&self, s: T) -> T {
        let a = s.abs();
        let pt = self.phi_tilde(a);
        self.log_integral(a).exp() / (T::one() + a * pt)
    }

    /// `(log f)_s = (1 − φ_s)/φ`.
    pub fn log_f_s(&self, s: T) -> T {
        if s.abs() < self.log_slope_fit.delta {
            self.log_slope_fit.eval(s)
        } else {
            let j = self.profile.jet(s);
            (T::one() - j.phi_s) / j.phi
        }
    }

    /// `(log f)_ss`.
    pub fn log_f_ss(&self, s: T) -> T {
        if s.abs() < self.log_slope_fit.delta {
            self.log_slope_fit.deriv(s)
        } else {
            let j = self.profile.jet(s);
            (-j.phi_ss * j.phi - (T::one() - j.phi_s) * j.phi_s) / (j.phi * j.phi)
        }
    }

    pub fn f_s(&self, s: T) -> T {
        self.f(s) * self.log_f_s(s)
    }

    /// `f_ss/f = (log f)_ss + ((log f)_s)²`.
    pub fn f_ss_over_f(&self, s: T) -> T {
        let g = self.log_f_s(s);
        self.log_f_ss(s) + g * g
    }

    pub fn f_ss(&self, s: T) -> T {
        self.f(s) * self.f_ss_over_f(s)
    }

    /// `F(s) = ∫₀ˢ f`, odd.
    pub fn big_f(&self, s: T) -> T {
        let a = s.abs();
        let last = self.big_f_table.len() - 1;
        let i = ((a / self.step).floor().to_usize().unwrap_or(0)).min(last);
        let ti = self.step * T::from_usize_lossy(i);
        let mut f = |t: T| self.f(t);
        let v = if a == ti {
            self.big_f_table[i]
        } else {
            self.big_f_table[i] + gauss_kronrod15(&mut f, ti, a).0
        };
        if s < T::zero() {
            -v
        } else {
            v
        }
    }

    /// Gaussian curvature `−f_ss/f` of `Y`; independent of `c`.
    pub fn gauss_curvature(&self, s: T) -> T {
        -self.f_ss_over_f(s)
    }

    fn check_interval(&self, (a, b): (T, T)) -> Result<()> {
        let s_max = self.s_max();
        if !(a <= b) || a < -s_max || b > s_max {
            return Err(LabError::InvalidInput(format!(
                "interval [{a}, {b}] is not inside (−{s_max}, {s_max})"
            )));
        }
        Ok(())
    }

    /// Dense-grid minimum of `(log f)_ss`; positive certifies log-convexity of `f`.
    pub fn log_f_convexity(&self, interval: (T, T)) -> Result<ConvexityCheck<T>> {
        self.check_interval(interval)?;
        let (mut min_value, mut argmin) = (T::infinity(), interval.0);
        for s in linspace(interval.0, interval.1, 2001) {
            let v = self.log_f_ss(s);
            if v < min_value {
                min_value = v;
                argmin = s;
            }
        }
        Ok(ConvexityCheck {
            min_value,
            argmin,
            positive: min_value > T::zero(),
        })
    }

    /// `R₀ = max (f_ss/f)⁺`: the only negative Ricci direction of `Y × ℝ` is tangent
    /// to `Y` with `Ric = −f_ss/f`.
    pub fn ricci_bound_r0(&self, interval: (T, T)) -> Result<T> {
        self.check_interval(interval)?;
        Ok(linspace(interval.0, interval.1, 2001)
            .into_iter()
            .map(|s| self.f_ss_over_f(s).max(T::zero()))
            .fold(T::zero(), |m, v| m.max(v)))
    }

    /// Max of `|f_s/f − (1 − φ_s)/φ|` with `f_s` from a 5-point difference of the
    /// reconstructed `f` (grid of `n` points, `|s| ≥ 1e−6`). The difference step
    /// shrinks where `f` varies quickly.
    pub fn identity_defect(&self, n: usize) -> T {
        let s_max = self.s_max();
        let h_max = T::lit(1e-3).min(s_max / T::lit(100.0));
        let edge = s_max - T::lit(2.0) * h_max;
        let mut worst = T::zero();
        for s in linspace(-edge, edge, n) {
            if s.abs() < T::lit(1e-6) {
                continue;
            }
            let h = h_max / (T::one() + self.log_f_s(s).abs() * T::lit(0.5)).powi(2);
            let fd = (self.f(s - T::lit(2.0) * h) - T::lit(8.0) * self.f(s - h)
                + T::lit(8.0) * self.f(s + h)
                - self.f(s + T::lit(2.0) * h))
                / (T::lit(12.0) * h);
            let j = self.profile.jet(s);
            let rhs = (T::one() - j.phi_s) / j.phi;
            worst = worst.max((fd / self.f(s) - rhs).abs());
        }
        worst
    }

    /// Max of `|F/f − φ|` on an `n`-point grid over the domain.
    pub fn round_trip_defect(&self, n: usize) -> T {
        linspace(-self.s_max(), self.s_max(), n)
            .into_iter()
            .map(|s| (self.big_f(s) / self.f(s) - self.profile.phi(s)).abs())
            .fold(T::zero(), |m, v| m.max(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> PhiProfile<f64> {
        make_builtin_profile(Builtin::Ex1)
    }

    fn ex2() -> PhiProfile<f64> {
        make_builtin_profile(Builtin::Ex2)
    }

    fn closed(s_max: f64, f: fn(f64) -> PhiJet<f64>) -> PhiProfile<f64> {
        PhiProfile::closed_form(s_max, Arc::new(f)).unwrap()
    }

    #[test]
    fn builtin_s0_values() {
        assert_eq!(ex1().s0(), Some(std::f64::consts::FRAC_PI_2));
        assert!((ex2().s0().unwrap() - 0.577_350_269_189_625_8).abs() < 1e-15);
        let j = ex1().jet(0.0);
        assert_eq!((j.phi, j.phi_s), (0.0, 1.0));
    }

    #[test]
    fn detect_s0_matches_closed_forms() {
        let d = detect_s0(&ex1());
        assert!((d.s0.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
        assert!(d.pattern_ok);
        let d = detect_s0(&ex2());
        assert!((d.s0.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-11);
        let lin = closed(0.95, |s| PhiJet { phi: s, phi_s: 1.0, phi_ss: 0.0 });
        assert_eq!(detect_s0(&lin).s0, None);
    }

    #[test]
    fn detect_s0_flags_touching_zero() {
        // φ_s = (s − 1/2)² + ... touches zero at 1/2 and turns positive again
        let p = closed(0.9, |s| PhiJet {
            phi: s - 2.0 * s * s * s.signum() + 4.0 / 3.0 * s * s * s,
            phi_s: 1.0 - 4.0 * s.abs() + 4.0 * s * s,
            phi_ss: -4.0 * s.signum() + 8.0 * s,
        });
        let d = detect_s0(&p);
        if let Some(s0) = d.s0 {
            assert!((s0 - 0.5).abs() < 1e-6);
            assert!(!d.pattern_ok);
        }
    }

    #[test]
    fn validation_diagnostics() {
        assert!(validate_profile(&ex1()).is_empty());
        assert!(validate_profile(&ex2()).is_empty());
        let sq = closed(0.9, |s| PhiJet { phi: s * s, phi_s: 2.0 * s, phi_ss: 2.0 });
        let d = validate_profile(&sq);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code(), "not-odd");
        let twice = closed(0.9, |s| PhiJet { phi: 2.0 * s, phi_s: 2.0, phi_ss: 0.0 });
        let d = validate_profile(&twice);
        assert_eq!(d.iter().map(|d| d.code()).collect::<Vec<_>>(), ["wrong-slope-at-zero"]);
        let neg = closed(3.0, |s| PhiJet {
            phi: s - s * s * s,
            phi_s: 1.0 - 3.0 * s * s,
            phi_ss: -6.0 * s,
        });
        // s0 = 1/√3 exists so the sign check stops there; past 1 φ < 0 is allowed
        assert!(validate_profile(&neg).is_empty());
    }

    #[test]
    fn reconstruction_matches_closed_forms() {
        let g = f_from_phi(&ex1(), 1.0).unwrap();
        assert!((g.f(std::f64::consts::FRAC_PI_2) - 2.0).abs() < 1e-12);
        let g = f_from_phi(&ex2(), 1.0).unwrap();
        assert!((g.f(0.5) - 0.75f64.powf(-1.5)).abs() < 1e-12);
        let lin = closed(0.95, |s| PhiJet { phi: s, phi_s: 1.0, phi_ss: 0.0 });
        let g = f_from_phi(&lin, 1.0).unwrap();
        for s in [-0.9, -0.2, 0.0, 0.4, 0.93] {
            assert!((g.f(s) - 1.0).abs() < 1e-14);
            assert!(g.gauss_curvature(s).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_rejects_invalid_profiles() {
        let sq = closed(0.9, |s| PhiJet { phi: s * s, phi_s: 2.0 * s, phi_ss: 2.0 });
        assert!(matches!(f_from_phi(&sq, 1.0), Err(LabError::InvalidInput(_))));
        assert!(f_from_phi(&ex1(), 0.0).is_err());
    }

    #[test]
    fn curvature_values_at_origin() {
        let g1 = f_from_phi(&ex1(), 1.0).unwrap();
        let g2 = f_from_phi(&ex2(), 1.0).unwrap();
        assert!((g1.gauss_curvature(0.0) + 0.5).abs() < 1e-9);
        assert!((g2.gauss_curvature(0.0) + 3.0).abs() < 1e-9);
        assert!((g1.log_f_ss(0.0) - 0.5).abs() < 1e-9);
        assert!((g2.log_f_ss(0.0) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn convexity_and_ricci_bound() {
        let g2 = f_from_phi(&ex2(), 1.0).unwrap();
        let conv = g2.log_f_convexity((-0.5, 0.5)).unwrap();
        assert!(conv.positive);
        assert!((conv.min_value - 3.0).abs() < 1e-9);
        let r0 = g2.ricci_bound_r0((-0.5, 0.5)).unwrap();
        assert!((r0 - 32.0 / 3.0).abs() < 1e-8, "{r0}");
        let g1 = f_from_phi(&ex1(), 1.0).unwrap();
        assert!((g1.ricci_bound_r0((0.0, 0.0)).unwrap() - 0.5).abs() < 1e-9);
        let lin = closed(0.95, |s| PhiJet { phi: s, phi_s: 1.0, phi_ss: 0.0 });
        let gl = f_from_phi(&lin, 1.0).unwrap();
        let conv = gl.log_f_convexity((-0.5, 0.5)).unwrap();
        assert!(!conv.positive);
        assert_eq!(gl.ricci_bound_r0((-0.5, 0.5)).unwrap(), 0.0);
        assert!(g2.log_f_convexity((-0.99, 0.5)).is_err());
    }

    #[test]
    fn sampled_profile_from_csv() {
        let mut text = String::from("s,phi\n");
        for i in 0..=180 {
            let s = i as f64 * 0.005;
            text.push_str(&format!("{s},{}\n", s.sin()));
        }
        let p = PhiProfile::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(p.kind(), ProfileKind::UserSampled);
        assert!((p.s_max() - 0.9).abs() < 1e-12);
        assert!(validate_profile(&p).is_empty());
        let g = f_from_phi(&p, 1.0).unwrap();
        let exact = 1.0 / (0.4f64 / 2.0).cos().powi(2);
        assert!((g.f(0.4) - exact).abs() < 1e-6);
    }

    #[test]
    fn sampled_profile_requires_origin_and_header() {
        assert!(PhiProfile::<f64>::read_csv("x,y\n0,0\n".as_bytes()).is_err());
        let text = "s,phi\n0.1,0.1\n0.2,0.2\n0.3,0.3\n0.4,0.4\n";
        assert!(matches!(
            PhiProfile::<f64>::read_csv(text.as_bytes()),
            Err(LabError::InvalidInput(_))
        ));
    }
}
