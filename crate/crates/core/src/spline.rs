//! Natural cubic spline with analytic first and second derivatives.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    // second derivatives at the knots
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(LabError::InvalidInput(
                "cubic spline needs at least 4 samples of matching length".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidInput(
                "spline abscissae must be strictly increasing".into(),
            ));
        }
        let six = T::lit(6.0);
        let two = T::lit(2.0);
        // tridiagonal system for interior second derivatives (natural ends)
        let k = n - 2;
        let mut sub = vec![T::zero(); k];
        let mut dia = vec![T::zero(); k];
        let mut sup = vec![T::zero(); k];
        let mut rhs = vec![T::zero(); k];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i - 1] = h0;
            dia[i - 1] = two * (h0 + h1);
            sup[i - 1] = h1;
            rhs[i - 1] = six * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for i in 1..k {
            let w = sub[i] / dia[i - 1];
            dia[i] = dia[i] - w * sup[i - 1];
            rhs[i] = rhs[i] - w * rhs[i - 1];
        }
        let mut m = vec![T::zero(); n];
        m[k] = rhs[k - 1] / dia[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / dia[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], *self.x.last().expect("non-empty"))
    }

    pub fn knots(&self) -> &[T] {
        &self.x
    }

    fn segment(&self, t: T) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).expect("finite knot")) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `t` (cubic extrapolation outside the knots).
    pub fn eval(&self, t: T) -> (T, T, T) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let six = T::lit(6.0);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let d = (y1 - y0) / h
            + (-(T::lit(3.0) * a * a - T::one()) * m0 + (T::lit(3.0) * b * b - T::one()) * m1) * h
                / six;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }
}
