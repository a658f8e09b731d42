#![allow(dead_code)]

use proptest::prelude::*;

use stokes_core::config::RunConfig;
use stokes_core::geodesics::GeodesicOptions;
use stokes_core::quad_diff::QuadraticDifferential;
use stokes_core::stokes_tracer::TraceOptions;
use stokes_core::{ComplexPolynomial, C64};

pub fn min_separation(roots: &[C64]) -> f64 {
    roots
        .iter()
        .enumerate()
        .flat_map(|(i, a)| roots[i + 1..].iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min)
}

/// Monic, centred, simple roots in `[-2, 2]^2` at least `sep` apart.
pub fn roots_strategy(d: std::ops::RangeInclusive<usize>, sep: f64) -> impl Strategy<Value = Vec<C64>> {
    d.prop_flat_map(|d| prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), d))
        .prop_map(|v| {
            let roots: Vec<C64> = v.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            let mean = roots.iter().sum::<C64>() / roots.len() as f64;
            roots.into_iter().map(|r| r - mean).collect::<Vec<_>>()
        })
        .prop_filter("roots too close", move |r| min_separation(r) >= sep)
}

pub fn monic(roots: &[C64]) -> ComplexPolynomial {
    let rs: Vec<(C64, usize)> = roots.iter().map(|r| (*r, 1)).collect();
    ComplexPolynomial::from_roots(C64::new(1.0, 0.0), &rs).unwrap()
}

pub fn qd_of(p: &ComplexPolynomial) -> QuadraticDifferential {
    QuadraticDifferential::from_config(p.clone(), &RunConfig::default()).unwrap()
}

pub fn trace_options(qd: &QuadraticDifferential) -> TraceOptions {
    TraceOptions::new(qd.turning_points(), &RunConfig::default())
}

pub fn geodesic_options(qd: &QuadraticDifferential) -> GeodesicOptions {
    GeodesicOptions::new(qd.turning_points(), &RunConfig::default())
}

/// Distance between two angles modulo `period`.
pub fn angle_distance(a: f64, b: f64, period: f64) -> f64 {
    let x = (a - b).rem_euclid(period);
    x.min(period - x)
}

/// Greedy matching distance between two point sets of equal size.
pub fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
