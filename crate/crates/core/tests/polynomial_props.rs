mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::{angle_distance, monic, qd_of, roots_strategy, set_distance};
use stokes_core::{ComplexPolynomial, Error, C64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_keeps_roots(roots in roots_strategy(1..=8, 0.05), t in -3.0..3.0f64) {
        let p = monic(&roots);
        let a = p.roots(1e-12).unwrap();
        let b = p.rotate(t).roots(1e-12).unwrap();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(set_distance(&a.locations(), &b.locations()) < 1e-9);
        let qd = qd_of(&p);
        prop_assert_eq!(qd.rotated(t).turning_points().locations(), qd.turning_points().locations());
    }

    #[test]
    fn rotation_shifts_rays(roots in roots_strategy(1..=8, 0.05), t in -3.0..3.0f64) {
        let p = monic(&roots);
        let d = p.degree();
        let n = (d + 2) as f64;
        let a = p.stokes_sectors();
        let b = p.rotate(t).stokes_sectors();
        for (x, y) in a.ray_angles.iter().zip(&b.ray_angles) {
            prop_assert!(angle_distance(y - x, -2.0 * t / n, 2.0 * PI / n) < 1e-12);
        }
    }

    #[test]
    fn roots_reconstruct_polynomial(roots in roots_strategy(1..=8, 0.05)) {
        let p = monic(&roots);
        let tps = p.roots(1e-12).unwrap();
        prop_assert_eq!(tps.total_multiplicity(), p.degree());
        prop_assert!(tps.reconstruction_residual(&p) < 1e-8);
    }

    #[test]
    fn random_coefficients_reconstruct(c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..=9)) {
        let mut coeffs: Vec<C64> = c.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        coeffs[0] += C64::new(1.5, 0.0);
        let p = ComplexPolynomial::new(coeffs).unwrap();
        let tps = p.roots(1e-12).unwrap();
        prop_assert!(tps.reconstruction_residual(&p) < 1e-8);
    }
}

#[test]
fn double_root_is_clustered() {
    let p = ComplexPolynomial::from_real(&[1.0, -2.0, 1.0, 0.0]).unwrap();
    let tps = p.roots(1e-12).unwrap();
    assert_eq!(tps.len(), 2);
    let double = tps.points.iter().find(|t| t.multiplicity == 2).unwrap();
    assert!((double.location - C64::new(1.0, 0.0)).norm() < 1e-6);
}

#[test]
fn malformed_coefficient_lists_fail_to_parse() {
    for bad in ["1,,2", "", "abc", "1,nan"] {
        assert!(
            matches!(bad.parse::<ComplexPolynomial>(), Err(Error::Parse(_))),
            "{bad}"
        );
    }
}

#[test]
fn sectors_of_monic_quadratic() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let s = p.stokes_sectors();
    assert_eq!(s.len(), 4);
    for (k, a) in s.ray_angles.iter().enumerate() {
        assert!((a - PI * (2 * k + 1) as f64 / 4.0).abs() < 1e-15);
    }
}
