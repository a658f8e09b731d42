mod common;

use common::{geodesic_options, qd_of};
use stokes_core::geodesics::enumerate_short_geodesics;
use stokes_core::spectrum::{
    accumulation_rays, eigenvalue_asymptotics, wronskian_eigenvalue_search, AccumulationRay, Rect,
};
use stokes_core::{ComplexPolynomial, C64};

fn rays_of(p: &ComplexPolynomial) -> (stokes_core::quad_diff::QuadraticDifferential, Vec<AccumulationRay>) {
    let qd = qd_of(p);
    let report = enumerate_short_geodesics(&qd, &geodesic_options(&qd)).unwrap();
    let rays = accumulation_rays(&qd, &report.geodesics).unwrap();
    (qd, rays)
}

fn sorted_by_re(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re));
    v
}

#[test]
fn harmonic_oscillator_leading_order_is_exact() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let (qd, rays) = rays_of(&p);
    assert_eq!(rays.len(), 1);
    for order in [0, 2] {
        let est = eigenvalue_asymptotics(&qd, &rays[0], 0, 6, order).unwrap();
        for e in &est {
            let exact = C64::new(2.0 * e.n as f64 + 1.0, 0.0);
            assert!((e.value - exact).norm() < 1e-9, "order {order} n={} {}", e.n, e.value);
            assert!(e.converged);
        }
    }
}

#[test]
fn corrections_converge_with_monotone_residuals() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
    let (qd, rays) = rays_of(&p);
    assert!(!rays.is_empty());
    for ray in &rays {
        for e in eigenvalue_asymptotics(&qd, ray, 2, 8, 3).unwrap() {
            assert!(e.converged, "n={} residual {}", e.n, e.residual);
            assert!(e.monotone, "n={}", e.n);
            assert!(e.residual <= 1e-10 * e.value.norm());
        }
    }
}

#[test]
fn wronskian_zeros_of_harmonic_oscillator() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let pos = Rect {
        re: (0.5, 7.5),
        im: (-0.5, 0.5),
    };
    let z = sorted_by_re(wronskian_eigenvalue_search(&p, 1.0, (0, 2), pos, (7, 1), C64::new(0.0, 0.0)).unwrap());
    assert_eq!(z.len(), 4, "{z:?}");
    for (k, v) in z.iter().enumerate() {
        assert!((v - C64::new(2.0 * k as f64 + 1.0, 0.0)).norm() < 1e-6, "{v}");
    }
}

#[test]
fn negated_spectrum_under_relabelled_sectors() {
    // lambda -> -lambda swaps which branch decays, moving each sector by one
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let neg = Rect {
        re: (-5.5, -0.5),
        im: (-0.5, 0.5),
    };
    let z = sorted_by_re(wronskian_eigenvalue_search(&p, 1.0, (1, 3), neg, (5, 1), C64::new(0.0, 0.0)).unwrap());
    let expected = [-5.0, -3.0, -1.0];
    assert_eq!(z.len(), expected.len(), "{z:?}");
    for (v, e) in z.iter().zip(expected) {
        assert!((v - C64::new(e, 0.0)).norm() < 1e-6, "{v}");
    }
}

#[test]
fn quartic_asymptotics_match_wronskian_zero() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
    let (qd, rays) = rays_of(&p);
    let ray = rays
        .iter()
        .min_by(|a, b| a.angle.abs().total_cmp(&b.angle.abs()))
        .unwrap();
    let est = eigenvalue_asymptotics(&qd, ray, 4, 4, 3).unwrap()[0].value;
    let rect = Rect {
        re: (est.re - 0.4, est.re + 0.4),
        im: (est.im - 0.4, est.im + 0.4),
    };
    let z = wronskian_eigenvalue_search(&p, 1.0, (0, 3), rect, (1, 1), C64::new(0.0, 0.0)).unwrap();
    assert_eq!(z.len(), 1, "{z:?} near {est}");
    assert!((z[0] - est).norm() < 1e-4, "{} vs {est}", z[0]);
}
