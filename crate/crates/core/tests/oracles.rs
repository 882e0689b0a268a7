//! Independent numerical oracles for the bubble family and its index form.

use std::f64::consts::PI;

use bubble_lab::bubble::{self, solve_profile};
use bubble_lab::profile::{f_from_phi, make_builtin_profile, Builtin};
use bubble_lab::stability::{self, closed_curve_operator, jacobi_spectrum, Boundary, Parity, SturmLiouville};
use bubble_lab::Geometry;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ex1(c: f64) -> Geometry {
    f_from_phi(&make_builtin_profile(Builtin::Ex1), c).unwrap()
}

fn ex2(c: f64) -> Geometry {
    f_from_phi(&make_builtin_profile(Builtin::Ex2), c).unwrap()
}

#[test]
fn monte_carlo_volume_ex1() {
    let g = ex1(1.0);
    let s1 = PI / 6.0;
    let bp = solve_profile(&g, s1, 2000).unwrap();
    // with φ = sin and φ(s₁) = 1/2 the height is ũ(s) = acosh(2 cos s / √3)
    let height = |s: f64| (2.0 * s.cos() / 3f64.sqrt()).acosh();
    let u0 = height(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples = 10_000_000u64;
    let mut acc = 0.0;
    for _ in 0..samples {
        let s: f64 = rng.gen_range(-s1..s1);
        let y: f64 = rng.gen_range(-u0..u0);
        if y.abs() <= height(s.abs()) {
            acc += 2.0 * PI / (s / 2.0).cos().powi(2);
        }
    }
    let mc = acc / samples as f64 * (2.0 * s1) * (2.0 * u0);
    assert!(((bp.volume - mc) / mc).abs() < 5e-3, "{} vs {mc}", bp.volume);
}

#[test]
fn lateral_area_two_quadratures() {
    let g = ex1(1.0);
    let bp = solve_profile(&g, PI / 6.0, 2000).unwrap();
    let direct = bubble::lateral_area_by_quadrature(&g, PI / 6.0).unwrap();
    assert!(((bp.lateral_area - direct) / direct).abs() < 1e-6);
}

#[test]
fn max_height_matches_quadrature() {
    for (g, s1) in [(ex1(1.0), 0.7), (ex2(1.0), 0.3), (ex2(0.5), 0.5)] {
        let bp = solve_profile(&g, s1, 1000).unwrap();
        let q = bubble::height_by_quadrature(&g, s1).unwrap();
        assert!((bp.u_max() - q).abs() < 1e-8);
    }
}

#[test]
fn first_integral_and_endpoint() {
    for (g, s1) in [(ex1(0.1), 0.05), (ex1(1.0), 1.5), (ex2(1.0), 0.57)] {
        let bp = solve_profile(&g, s1, 500).unwrap();
        assert!(bp.first_integral_defect(&g) <= 1e-10);
        assert!(bp.endpoint_defect() <= 1e-8);
        assert!(bp.s.windows(2).all(|w| w[1] > w[0]));
        assert!(bp.u.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*bp.u.last().unwrap(), 0.0);
    }
}

#[test]
fn mean_curvature_converges_second_order() {
    for (g, s1) in [(ex1(1.0), PI / 6.0), (ex2(1.0), 0.3)] {
        let r: Vec<f64> = [500, 1000, 2000]
            .iter()
            .map(|&n| bubble::mean_curvature_residual(&solve_profile(&g, s1, n).unwrap(), &g))
            .collect();
        assert!(r[2] <= 1e-6);
        assert!(r[0] / r[1] >= 3.5 && r[1] / r[2] >= 3.5, "{r:?}");
    }
}

fn dense(op: &stability::ClosedCurveOperator<f64>) -> Vec<f64> {
    let n = op.diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = op.diag[i];
        let j = (i + 1) % n;
        m[(i, j)] += op.off[i];
        m[(j, i)] += op.off[i];
    }
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[test]
fn sector_spectra_union_is_closed_curve_spectrum() {
    let g = ex1(0.3);
    let bp = solve_profile(&g, 0.6, 96).unwrap();
    let m = 6;
    let sectors = jacobi_spectrum(&bp, &g, 3, m).unwrap();
    for k in 0..=3 {
        let full = dense(&closed_curve_operator(&bp, &g, k).unwrap());
        let mut union: Vec<f64> = sectors
            .iter()
            .filter(|s| s.k == k)
            .flat_map(|s| s.eigenvalues.clone())
            .collect();
        union.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in union.iter().zip(&full).take(m) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn parity_sectors_are_orthogonal() {
    // a vector even in s and odd in y pairs to zero with one even in both
    let g = ex1(0.3);
    let bp = solve_profile(&g, 0.6, 96).unwrap();
    let op = closed_curve_operator(&bp, &g, 1).unwrap();
    let n = op.diag.len();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                op.diag[i] * x[i] + op.off[i] * x[(i + 1) % n] + op.off[prev] * x[prev]
            })
            .collect()
    };
    let sym = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        op.points
            .iter()
            .zip(&op.mass)
            .map(|(&(s, y), m)| f(s, y) * m.sqrt())
            .collect()
    };
    let a = sym(&|s, y| 1.0 + s * s + y * y);
    let b = sym(&|s, y| y * (1.0 + s * s));
    let c = sym(&|s, y| s * (2.0 + y * y));
    let la = apply(&a);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let scale = dot(&la, &a).abs();
    assert!(dot(&la, &b).abs() <= 1e-10 * scale);
    assert!(dot(&la, &c).abs() <= 1e-10 * scale);
}

#[test]
fn spectrum_invariant_under_reversal() {
    let g = ex2(0.4);
    let bp = solve_profile(&g, 0.4, 300).unwrap();
    for (sp, yp) in [(Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even), (Parity::Even, Parity::Even)] {
        let fwd = stability::sector_operator(&bp, &g, 2, sp, yp).unwrap();
        let c = g.c();
        let total = *bp.t.last().unwrap();
        let t: Vec<f64> = bp.t.iter().rev().map(|t| total - t).collect();
        let w: Vec<f64> = bp.s.iter().rev().map(|&s| c * g.f(s)).collect();
        let idx = stability::index_coefficients(&bp, &g);
        let q: Vec<f64> = idx.p.iter().rev().zip(&w).map(|(p, w)| p + 4.0 / (w * w)).collect();
        let rev = SturmLiouville::assemble(&t, &w, &q, Boundary::from(yp), Boundary::from(sp)).unwrap();
        let a = fwd.op.lowest_eigenvalues(6);
        let b = rev.op.lowest_eigenvalues(6);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn translation_sector_kernel() {
    let g = ex1(1.0);
    let mut prev = f64::INFINITY;
    let mut prev_res = f64::INFINITY;
    for n in [250, 500, 1000] {
        let bp = solve_profile(&g, PI / 6.0, n).unwrap();
        let (lambda, corr) = stability::translation_mode(&bp, &g).unwrap();
        assert!(corr > 0.999);
        assert!(lambda.abs() < prev);
        prev = lambda.abs();
        let res = stability::jacobi_field_residual(&bp, &g).unwrap();
        assert!(prev_res / res >= 3.5);
        prev_res = res;
    }
    assert!(prev_res < 1e-3);
}

#[test]
fn case2_identity_defect() {
    for (g, s1) in [(ex1(1.0), PI / 6.0), (ex2(1.0), 0.3)] {
        let bp = solve_profile(&g, s1, 2000).unwrap();
        assert!(stability::verify_case2_identity(&bp, &g) <= 1e-6);
    }
}

#[test]
fn higher_modes_raise_the_spectrum() {
    let g = ex1(0.1);
    let bp = solve_profile(&g, 0.4, 400).unwrap();
    let sectors = jacobi_spectrum(&bp, &g, 10, 2).unwrap();
    for sp in [Parity::Even, Parity::Odd] {
        for yp in [Parity::Even, Parity::Odd] {
            let low: Vec<f64> = (0..=10)
                .map(|k| {
                    sectors
                        .iter()
                        .find(|s| s.k == k && s.s_parity == sp && s.y_parity == yp)
                        .unwrap()
                        .eigenvalues[0]
                })
                .collect();
            assert!(low.windows(2).all(|w| w[0] <= w[1]));
            assert!(low[10] > 0.0);
        }
    }
}

#[test]
fn index_coefficient_recombination() {
    let g = ex2(0.7);
    let bp = solve_profile(&g, 0.45, 400).unwrap();
    let idx = stability::index_coefficients(&bp, &g);
    assert!(idx.recombination_defect() <= 1e-8);
    assert!((idx.a[0] - g.c()).abs() < 1e-12);
    assert!(idx.a.last().unwrap().abs() < 1e-12);
    assert!(idx.a[..idx.a.len() - 1].iter().all(|&a| a > 0.0));
}
