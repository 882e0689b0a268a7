//! Symmetric tridiagonal eigenproblems by Sturm-sequence bisection.
//!
//! Only the lowest few eigenvalues of each Sturm–Liouville sector are needed,
//! so bisection on the inertia count is both cheap (`O(n)` per probe) and
//! exact to working precision. The same LDLᵀ sweep that yields the inertia also
//! evaluates `eᵀ(S − λ)⁻¹e`, which turns the count into one for the operator
//! restricted to the orthogonal complement of a unit vector `e`.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(LabError::InvalidInput(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v = v + self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v = v + self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = (hi - lo).abs().max(hi.abs()).max(lo.abs()).max(T::one()) * T::epsilon() * T::lit(8.0);
        (lo - pad, hi + pad)
    }

    fn pivot_guard(&self) -> T {
        let scale = self
            .off
            .iter()
            .chain(self.diag.iter())
            .fold(T::zero(), |m, &x| m.max(x.abs()))
            .max(T::min_positive_value());
        scale * T::epsilon() * T::epsilon()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let guard = self.pivot_guard();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0.. {
            if d.abs() < guard {
                d = -guard;
            }
            if d < T::zero() {
                count += 1;
            }
            if i + 1 == self.dim() {
                break;
            }
            d = self.diag[i + 1] - x - self.off[i] * self.off[i] / d;
        }
        count
    }

    /// Inertia count of `(S − x)` restricted to `e⊥`, for unit `e`.
    ///
    /// Uses the bordered-matrix identity
    /// `n₋(restricted) = n₋(S − x) + [eᵀ(S − x)⁻¹e > 0] − 1`.
    pub fn count_below_restricted(&self, x: T, e: &[T]) -> usize {
        let guard = self.pivot_guard();
        let mut neg = 0usize;
        let mut secular = T::zero();
        let mut d = self.diag[0] - x;
        let mut z = e[0];
        for i in 0.. {
            if d.abs() < guard {
                d = -guard;
            }
            if d < T::zero() {
                neg += 1;
            }
            secular = secular + z * z / d;
            if i + 1 == self.dim() {
                break;
            }
            let l = self.off[i] / d;
            d = self.diag[i + 1] - x - l * self.off[i];
            z = e[i + 1] - l * z;
        }
        (neg + usize::from(secular > T::zero())).saturating_sub(1)
    }

    fn bisect<C: Fn(T) -> usize>(&self, count: C, index: usize) -> T {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            let width = hi - lo;
            if width <= T::epsilon() * T::lit(2.0) * lo.abs().max(hi.abs()) {
                break;
            }
        }
        T::lit(0.5) * (lo + hi)
    }

    /// The `m` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, m: usize) -> Vec<T> {
        let m = m.min(self.dim());
        (0..m).map(|k| self.bisect(|x| self.count_below(x), k)).collect()
    }

    /// The `m` smallest eigenvalues of the compression of `S` onto `e⊥`.
    pub fn lowest_restricted_eigenvalues(&self, e: &[T], m: usize) -> Result<Vec<T>> {
        if e.len() != self.dim() {
            return Err(LabError::InvalidInput("constraint vector has wrong length".into()));
        }
        let norm = e.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(LabError::InvalidInput("constraint vector is zero".into()));
        }
        let unit: Vec<T> = e.iter().map(|&v| v / norm).collect();
        let m = m.min(self.dim().saturating_sub(1));
        Ok((0..m)
            .map(|k| self.bisect(|x| self.count_below_restricted(x, &unit), k))
            .collect())
    }

    /// Solves `(S − shift) x = b` by LDLᵀ without pivoting (tiny pivots are nudged).
    pub fn solve_shifted(&self, shift: T, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let guard = self.pivot_guard().max(T::min_positive_value());
        let mut d = vec![T::zero(); n];
        let mut l = vec![T::zero(); n.saturating_sub(1)];
        d[0] = self.diag[0] - shift;
        for i in 0..n - 1 {
            if d[i].abs() < guard {
                d[i] = guard;
            }
            l[i] = self.off[i] / d[i];
            d[i + 1] = self.diag[i + 1] - shift - l[i] * self.off[i];
        }
        if d[n - 1].abs() < guard {
            d[n - 1] = guard;
        }
        let mut z = b.to_vec();
        for i in 1..n {
            z[i] = z[i] - l[i - 1] * z[i - 1];
        }
        for i in 0..n {
            z[i] = z[i] / d[i];
        }
        for i in (0..n - 1).rev() {
            z[i] = z[i] - l[i] * z[i + 1];
        }
        z
    }

    /// Unit eigenvector for an (accurately known) eigenvalue, by inverse iteration.
    pub fn eigenvector(&self, lambda: T) -> Vec<T> {
        let n = self.dim();
        let (lo, hi) = self.gershgorin();
        let shift = lambda + (hi - lo) * T::epsilon() * T::lit(4.0);
        // deterministic start that is unlikely to be orthogonal to any eigenvector
        let mut x: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.1) * T::from_usize_lossy(i % 7) / T::lit(7.0))
            .collect();
        for _ in 0..4 {
            let y = self.solve_shifted(shift, &x);
            let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
            if !norm.is_finite() || norm == T::zero() {
                break;
            }
            x = y.into_iter().map(|v| v / norm).collect();
        }
        x
    }
}
