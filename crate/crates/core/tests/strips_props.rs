mod common;

use proptest::prelude::*;

use common::{geodesic_options, monic, qd_of, roots_strategy, trace_options};
use stokes_core::geodesics::count_short_geodesics;
use stokes_core::stokes_tracer::build_stokes_graph;
use stokes_core::strips::{
    is_very_flat, realize_count, visibility, visible_pairs, visible_pairs_without_cut, ChoppedStrip, Cut,
};
use stokes_core::{ComplexPolynomial, C64};

fn strip_strategy() -> impl Strategy<Value = ChoppedStrip> {
    (3usize..=8)
        .prop_flat_map(|d| {
            (
                Just(d),
                Just((0..d as i64).map(|y| y * 3 - 7).collect::<Vec<_>>()).prop_shuffle(),
                prop::collection::vec(any::<bool>(), d - 2),
                prop::collection::vec(1u8..4, d - 1),
            )
        })
        .prop_map(|(_, ys, ups, gaps)| {
            let mut x = 0.0;
            let mut nodes = vec![[x, ys[0] as f64]];
            for (y, g) in ys[1..].iter().zip(gaps) {
                x += g as f64;
                nodes.push([x, *y as f64]);
            }
            let cuts = ups.into_iter().map(|u| if u { Cut::Up } else { Cut::Down }).collect();
            ChoppedStrip::new(nodes, cuts).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn deleting_a_cut_never_hides_a_pair(s in strip_strategy()) {
        let base = visible_pairs(&s);
        for j in 1..s.len() - 1 {
            let more = visible_pairs_without_cut(&s, j);
            for p in &base {
                prop_assert!(more.contains(p));
            }
        }
    }

    #[test]
    fn visible_count_is_bounded(s in strip_strategy()) {
        let d = s.len();
        let v = visibility(&s);
        for i in 0..d - 1 {
            prop_assert!(v.pairs.contains(&(i, i + 1)));
        }
        prop_assert!(v.pairs.len() >= d - 1 && v.pairs.len() <= d * (d - 1) / 2);
        for t in &v.ties {
            prop_assert!(!v.pairs.contains(t));
        }
    }

    #[test]
    fn realized_strip_has_requested_count(d in 2usize..=9, extra in 0usize..40) {
        let lo = d - 1;
        let hi = d * (d - 1) / 2;
        let k = lo + extra % (hi - lo + 1);
        let s = realize_count(d, k).unwrap();
        prop_assert_eq!(s.len(), d);
        let v = visibility(&s);
        prop_assert_eq!(v.pairs.len(), k);
        prop_assert!(v.ties.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn very_flat_strip_counts_geodesics(roots in roots_strategy(2..=4, 0.15)) {
        let p = monic(&roots);
        let qd = qd_of(&p);
        let g = build_stokes_graph(&qd, &trace_options(&qd)).unwrap();
        prop_assume!(!g.incomplete && g.finite_edges.is_empty());
        let report = is_very_flat(&g).unwrap();
        prop_assume!(report.very_flat);
        let s = report.strip.unwrap();
        prop_assert_eq!(s.len(), p.degree());
        let count = count_short_geodesics(&qd, &geodesic_options(&qd)).unwrap();
        prop_assert_eq!(visible_pairs(&s).len(), count);
    }
}

#[test]
fn out_of_range_counts_are_rejected() {
    assert!(realize_count(3, 1).is_err());
    assert!(realize_count(3, 4).is_err());
    assert!(realize_count(1, 0).is_err());
}

#[test]
fn cubic_strips_with_one_cut() {
    let up = ChoppedStrip::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]], vec![Cut::Up]).unwrap();
    assert_eq!(visible_pairs(&up).len(), 3);
    let down = ChoppedStrip::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]], vec![Cut::Down]).unwrap();
    assert_eq!(visible_pairs(&down).len(), 2);
}

#[test]
fn rotated_quadratic_is_very_flat() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let qd = qd_of(&p).rotated(0.3);
    let g = build_stokes_graph(&qd, &trace_options(&qd)).unwrap();
    let r = is_very_flat(&g).unwrap();
    assert!(r.very_flat);
    let s = r.strip.unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(visible_pairs(&s), vec![(0, 1)]);
}

#[test]
fn critical_quadratic_is_not_very_flat() {
    let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
    let qd = qd_of(&p);
    let g = build_stokes_graph(&qd, &trace_options(&qd)).unwrap();
    let r = is_very_flat(&g).unwrap();
    assert!(!r.very_flat);
    assert!(r.strip.is_none());
}

#[test]
fn double_root_is_not_very_flat() {
    let p = ComplexPolynomial::from_roots(
        C64::new(1.0, 0.0),
        &[
            (C64::new(0.0, 0.0), 2),
            (C64::new(1.5, 0.7), 1),
            (C64::new(-1.5, -0.7), 1),
        ],
    )
    .unwrap();
    let qd = qd_of(&p).rotated(0.2);
    let g = build_stokes_graph(&qd, &trace_options(&qd)).unwrap();
    let r = is_very_flat(&g).unwrap();
    assert!(!r.simple_roots);
    assert!(!r.very_flat);
}
