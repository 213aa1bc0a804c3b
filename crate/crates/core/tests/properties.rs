use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use openbook_core::brieskorn::{defect, theta, BrieskornParams};
use openbook_core::cotangent::{
    dehn_twist, dehn_twist_inverse, normalize_torus_point, CotangentPoint, TorusModel, TorusPoint,
};
use openbook_core::openbook::{c_map, c_map_inverse, f_cap, g_cap, phi_embed, rescale_radius};
use openbook_core::profile::TwistProfile;
use openbook_core::sampling::cotangent_point;

fn point(n: usize, r: f64, seed: u64) -> CotangentPoint {
    cotangent_point(&mut ChaCha8Rng::seed_from_u64(seed), n, r)
}

fn dist(a: &CotangentPoint, b: &CotangentPoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn radicand_identities(k in 1u32..10, r in 0.0f64..0.9999) {
        let s = r * r;
        let u = 1.0 - s;
        let (f, g) = (f_cap(k, r).unwrap(), g_cap(k, r).unwrap());
        prop_assert!((f * f * s + g * g + u * u - 2.0).abs() <= 1e-12);
        prop_assert!((u.powi(k as i32) + f * f * s - g * g).abs() <= 1e-12);
    }

    #[test]
    fn h_aux_increasing_and_bounded(k in 1u32..10, y in 0.0f64..5.0, dy in 1e-6f64..1.0) {
        let prof = TwistProfile::new(k).unwrap();
        let (a, b) = (prof.h_aux_eval(y).unwrap(), prof.h_aux_eval(y + dy).unwrap());
        prop_assert!(b > a);
        prop_assert!(b < prof.h_aux_sup());
        let back = prof.h_aux_inverse(a).unwrap();
        prop_assert!((back - y).abs() <= 1e-10 * y.max(1.0));
    }

    #[test]
    fn h_k_at_least_a_quarter(k in 1u32..10, y in 0.0f64..1.0) {
        let prof = TwistProfile::new(k).unwrap();
        prop_assert!(prof.h_k_eval(y).unwrap() >= 0.25);
    }

    #[test]
    fn twist_round_trip(n in 2usize..5, k in 1u32..9, r in 0.0f64..0.2, seed in any::<u64>()) {
        let prof = TwistProfile::new(k).unwrap();
        let pt = point(n, r, seed);
        let there = dehn_twist(&prof, &pt);
        prop_assert!((there.p_norm() - r).abs() <= 1e-12);
        prop_assert!(there.constraint_residual() <= 1e-12);
        prop_assert!(dist(&dehn_twist_inverse(&prof, &there), &pt) <= 1e-10);
    }

    #[test]
    fn normalize_idempotent(n in 2usize..5, k in 1u32..9, t in -5.0f64..5.0, r in 0.0f64..0.2, seed in any::<u64>()) {
        let prof = TwistProfile::new(k).unwrap();
        let tp = TorusPoint::new(t, point(n, r, seed), TorusModel::Twist);
        let once = normalize_torus_point(&prof, &tp);
        prop_assert!((0.0..1.0).contains(&once.t));
        let twice = normalize_torus_point(&prof, &once);
        prop_assert!((twice.t - once.t).abs() <= 1e-12);
        prop_assert!(dist(&twice.base, &once.base) <= 1e-12);
    }

    #[test]
    fn phi_lands_on_w(n in 2usize..5, k in 1u32..9, t in -2.0f64..2.0, r in 0.0f64..0.999, seed in any::<u64>()) {
        let params = BrieskornParams::new(n, k).unwrap();
        let z = phi_embed(&params, t, &point(n, r, seed)).unwrap();
        let (a, b) = defect(&params, &z);
        prop_assert!(a <= 1e-9 && b <= 1e-9);
        let th = theta(&z).unwrap();
        let expected = nalgebra::Complex::from_polar(1.0, std::f64::consts::TAU * t);
        prop_assert!((th - expected).norm() <= 1e-10);
    }

    #[test]
    fn rescale_radius_increasing(k in 1u32..9, r in 0.0f64..0.99, dr in 1e-4f64..0.009) {
        let prof = TwistProfile::new(k).unwrap();
        prop_assert!(rescale_radius(&prof, r + dr).unwrap() > rescale_radius(&prof, r).unwrap());
    }

    #[test]
    fn c_map_round_trip(n in 2usize..5, k in 1u32..9, t in 0.0f64..1.0, r in 0.0f64..1.5, seed in any::<u64>()) {
        let params = BrieskornParams::new(n, k).unwrap();
        let prof = TwistProfile::new(k).unwrap();
        let tp = TorusPoint::new(t, point(n, r / prof.c_k() * 10.0, seed), TorusModel::Twist);
        let z = c_map(&params, &prof, &tp).unwrap();
        let back = c_map(&params, &prof, &c_map_inverse(&params, &prof, &z).unwrap()).unwrap();
        let err = z.0.iter().zip(&back.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8);
    }
}
