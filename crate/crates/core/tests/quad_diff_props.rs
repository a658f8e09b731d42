mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::{monic, qd_of, roots_strategy};
use stokes_core::quad_diff::{circle_contour, sqrt_near, QuadraticDifferential};
use stokes_core::{ComplexPolynomial, C64};

/// Branch at `z` far out that continues `sqrt(a) z^{d/2}`.
fn outer_seed(p: &ComplexPolynomial, z: C64) -> C64 {
    let d = p.degree() as i32;
    sqrt_near(
        p.eval(z),
        p.leading().sqrt() * z.powi(d / 2) * if d % 2 == 1 { z.sqrt() } else { C64::new(1.0, 0.0) },
    )
}

fn segment(a: C64, b: C64, n: usize) -> Vec<C64> {
    (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reversed_path_negates_integral(
        roots in roots_strategy(2..=6, 0.1),
        a in (-3.0..3.0f64, -3.0..3.0f64),
        b in (-3.0..3.0f64, -3.0..3.0f64),
    ) {
        let p = monic(&roots);
        let qd = qd_of(&p);
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let path = segment(a, b, 8);
        let clear = roots.iter().all(|r| stokes_core::quad_diff::point_segment_distance(*r, a, b) > 0.05);
        prop_assume!(clear && (a - b).norm() > 0.1);
        let fwd = qd.sqrt_continuation(&path, p.eval(a).sqrt()).unwrap();
        let back: Vec<C64> = path.iter().rev().copied().collect();
        let rev = qd.canonical_parameter_integral(&back, fwd.final_sqrt()).unwrap();
        prop_assert!((fwd.total_integral + rev).norm() <= 1e-10 * (1.0 + fwd.total_integral.norm()));
    }

    #[test]
    fn alpha_integrals_are_deformation_invariant(
        roots in roots_strategy(2..=6, 0.1),
        r1 in 3.5..5.0f64,
        r2 in 6.0..9.0f64,
    ) {
        let p = monic(&roots);
        prop_assume!(p.degree() % 2 == 0);
        let qd = qd_of(&p);
        let c1 = circle_contour(C64::new(0.0, 0.0), r1, 256);
        let c2 = circle_contour(C64::new(0.0, 0.0), r2, 256);
        let a = qd.alpha_contour_integrals(&c1, 3, Some(outer_seed(&p, c1[0]))).unwrap();
        let b = qd.alpha_contour_integrals(&c2, 3, Some(outer_seed(&p, c2[0]))).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-8 * (1.0 + x.norm()), "{x} vs {y}");
        }
        let (l1, _) = qd.loop_integral(&c1, Some(outer_seed(&p, c1[0]))).unwrap();
        let (l2, _) = qd.loop_integral(&c2, Some(outer_seed(&p, c2[0]))).unwrap();
        prop_assert!((l1 - l2).norm() <= 1e-8 * (1.0 + l1.norm()));
    }

    #[test]
    fn periods_rotate_covariantly(roots in roots_strategy(2..=5, 0.1), t in -1.5..1.5f64) {
        let p = monic(&roots);
        let qd = qd_of(&p);
        let rq = qd.rotated(t);
        let phase = C64::from_polar(1.0, t);
        for w in qd.pairwise_periods().unwrap() {
            let v = rq.period(w.pair.0, w.pair.1).unwrap().value;
            // periods are normalised to Im w >= 0, which fixes them only up to sign
            let err = (v - phase * w.value).norm().min((v + phase * w.value).norm());
            prop_assert!(err <= 1e-10 * (1.0 + w.value.norm()), "{} vs {}", v, phase * w.value);
        }
    }
}

#[test]
fn alpha0_counts_enclosed_multiplicity() {
    let p = ComplexPolynomial::from_roots(C64::new(1.0, 0.0), &[(C64::new(1.0, 0.0), 2), (C64::new(-1.0, 0.0), 1)])
        .unwrap();
    let qd = QuadraticDifferential::new(p).unwrap();
    let around_double = circle_contour(C64::new(1.0, 0.0), 0.5, 128);
    let a = qd.alpha_contour_integrals(&around_double, 0, None).unwrap();
    assert!((a[0] - C64::new(0.0, -PI)).norm() < 1e-10, "{}", a[0]);

    let q = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let qd = QuadraticDifferential::new(q).unwrap();
    let both = circle_contour(C64::new(0.0, 0.0), 3.0, 128);
    let a = qd.alpha_contour_integrals(&both, 0, None).unwrap();
    assert!((a[0] - C64::new(0.0, -PI)).norm() < 1e-10, "{}", a[0]);
}

#[test]
fn loop_around_one_simple_root_is_rejected() {
    let q = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let qd = QuadraticDifferential::new(q).unwrap();
    let c = circle_contour(C64::new(1.0, 0.0), 0.5, 64);
    assert!(qd.loop_integral(&c, None).is_err());
}

#[test]
fn harmonic_oscillator_loop_period() {
    // sqrt(z^2 - 1) ~ z near infinity, so the loop integral is the residue term
    let q = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let qd = QuadraticDifferential::new(q.clone()).unwrap();
    let c = circle_contour(C64::new(0.0, 0.0), 3.0, 256);
    let (v, _) = qd.loop_integral(&c, Some(outer_seed(&q, c[0]))).unwrap();
    assert!((v - C64::new(0.0, -PI)).norm() < 1e-10, "{v}");
}
