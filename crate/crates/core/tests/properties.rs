use std::sync::OnceLock;

use bubble_lab::bubble::{self, solve_profile};
use bubble_lab::flow::{self, SigmaField, TorusDomain};
use bubble_lab::profile::{f_from_phi, make_builtin_profile, Builtin};
use bubble_lab::stability::{self, BetaReading};
use bubble_lab::Geometry;
use proptest::prelude::*;

fn geom(b: Builtin) -> &'static Geometry {
    static EX1: OnceLock<Geometry> = OnceLock::new();
    static EX2: OnceLock<Geometry> = OnceLock::new();
    let cell = match b {
        Builtin::Ex1 => &EX1,
        Builtin::Ex2 => &EX2,
    };
    cell.get_or_init(|| f_from_phi(&make_builtin_profile(b), 1.0).unwrap())
}

fn builtin() -> impl Strategy<Value = Builtin> {
    prop_oneof![Just(Builtin::Ex1), Just(Builtin::Ex2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn warp_factor_parity_and_identity(b in builtin(), x in 1e-3f64..0.999) {
        let g = geom(b);
        let s = x * g.s_max();
        prop_assert!(g.f(s) > 0.0);
        prop_assert!((g.f(s) - g.f(-s)).abs() <= 1e-12 * g.f(s));
        prop_assert!((g.big_f(s) + g.big_f(-s)).abs() <= 1e-12 * g.big_f(s).abs().max(1.0));
        let p = g.profile();
        let rhs = (1.0 - p.phi_s(s)) / p.phi(s);
        prop_assert!((g.log_f_s(s) - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
        prop_assert!((g.big_f(s) / g.f(s) - p.phi(s)).abs() <= 1e-8);
    }

    #[test]
    fn curvature_independent_of_c(b in builtin(), x in 0.0f64..0.95, c in 0.05f64..3.0) {
        let g = geom(b);
        let s = x * g.s_max();
        let h = g.with_c(c).unwrap();
        prop_assert_eq!(g.gauss_curvature(s), h.gauss_curvature(s));
        prop_assert_eq!(g.f(s), h.f(s));
        let two_ways = g.log_f_ss(s) + g.log_f_s(s).powi(2);
        prop_assert!((g.f_ss_over_f(s) - two_ways).abs() <= 1e-8 * two_ways.abs().max(1.0));
    }

    #[test]
    fn members_respect_the_mean_curvature_floor(b in builtin(), x in 0.02f64..0.98) {
        let g = geom(b);
        let s0 = g.profile().s0().unwrap();
        let bp = solve_profile(g, x * s0, 128).unwrap();
        prop_assert!(bp.h >= 1.0 / g.profile().phi(s0) - 1e-12);
        prop_assert!(bp.first_integral_defect(g) <= 1e-10);
        prop_assert!(bp.lateral_area <= bp.volume * bp.h + 2.0 * bp.x0_measure);
    }

    #[test]
    fn volume_round_trip(x in 0.1f64..0.9) {
        let g = geom(Builtin::Ex2);
        let s1 = x * g.profile().s0().unwrap();
        let v = solve_profile(g, s1, 256).unwrap().volume;
        let back = bubble::volume_to_s1(g, v, 256).unwrap();
        prop_assert!((back - s1).abs() <= 1e-7);
    }

    #[test]
    fn ratio_above_beta_gives_positive_potential(b in builtin(), x in 0.05f64..0.95, c in 0.02f64..1.0) {
        let g = geom(b).with_c(c).unwrap();
        let s1 = x * g.profile().s0().unwrap();
        let beta = stability::beta(&g, BetaReading::PhiS).unwrap().value;
        let ratio = g.profile().phi(s1) / c;
        prop_assume!(ratio > beta * (1.0 + 1e-9));
        let bp = solve_profile(&g, s1, 128).unwrap();
        prop_assert!(stability::positivity_margin(&bp, &g) > 0.0);
    }

    #[test]
    fn first_variation_matches_difference_quotient(seed in 0u64..1000, n in 1usize..4) {
        let d = TorusDomain::new(&[1.0, 1.5], 16).unwrap();
        let field = flow::random_field(&d, 5.0, 1.0, n, seed).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed + 1);
        let dir = flow::random_mode_field(&d, 3, &mut rng);
        let exact = flow::first_variation(&field, &dir).unwrap();
        let eps = 1e-5 * field.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let central = |h: f64| {
            let shifted = |t: f64| {
                let v = field.values.iter().zip(&dir).map(|(s, x)| s + t * x).collect();
                flow::area_functional(&SigmaField::new(d.clone(), v, n).unwrap())
            };
            (shifted(h) - shifted(-h)) / (2.0 * h)
        };
        // Richardson: cancels the O(h²) term, which dominates when the derivative is small
        let fd = (4.0 * central(eps / 2.0) - central(eps)) / 3.0;
        prop_assert!(((fd - exact) / exact).abs() < 1e-6);
    }
}

#[test]
fn volume_is_linear() {
    let d = TorusDomain::<f64>::new(&[1.0], 32).unwrap();
    let a = flow::random_field(&d, 4.0, 1.0, 2, 1).unwrap();
    let b = flow::random_field(&d, 3.0, 1.0, 2, 2).unwrap();
    let sum = SigmaField::new(d.clone(), a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(), 2).unwrap();
    let lhs = flow::volume_functional(&sum);
    let rhs = flow::volume_functional(&a) + flow::volume_functional(&b);
    assert!((lhs - rhs).abs() <= 1e-12 * lhs);
}
