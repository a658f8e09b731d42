//! Stokes lines, the Stokes graph, its complementary domains and the chord
//! diagrams of strip domains.

mod faces;
mod trace;

pub use faces::{admissible_domains, AdmissibleDomain, DomainKind, RayTransition};
pub use trace::{emanating_directions, trace_stokes_line, TraceOptions, Trajectory, TrajectoryFate};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{nearest_angle_index, ComplexPolynomial, TurningPointSet, C64};
use crate::quad_diff::{point_segment_distance, QuadraticDifferential};

/// One traced half-line of the Stokes graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StokesEdge {
    pub origin: usize,
    pub direction_index: usize,
    pub trajectory: Trajectory,
}

/// A short Stokes line joining two turning points, assembled from the two
/// half-traces `a -> b` and `b -> a`. `flagged` marks an edge seen only from
/// one side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteEdge {
    pub a: usize,
    pub b: usize,
    pub forward: usize,
    pub backward: Option<usize>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StokesComplex {
    pub turning_points: Vec<usize>,
    pub simple: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StokesGraph {
    pub polynomial: ComplexPolynomial,
    pub turning_points: TurningPointSet,
    pub edges: Vec<StokesEdge>,
    pub finite_edges: Vec<FiniteEdge>,
    pub rays: Vec<f64>,
    pub complexes: Vec<StokesComplex>,
    pub options: TraceOptions,
    pub incomplete: bool,
}

impl StokesGraph {
    pub fn truncated_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e.trajectory.fate, TrajectoryFate::Truncated { .. }))
            .count()
    }

    pub fn escaping_edges(&self) -> impl Iterator<Item = (usize, &StokesEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.trajectory.fate.escape_ray().is_some())
    }

    /// Copy with every polyline reduced by [`decimate_indices`] at absolute
    /// tolerance `tol`; `xi` keeps the matching samples.
    pub fn decimated(&self, tol: f64) -> StokesGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            let t = &mut e.trajectory;
            let keep = decimate_indices(&t.polyline, tol);
            t.polyline = keep.iter().map(|&i| t.polyline[i]).collect();
            t.xi = keep.iter().map(|&i| t.xi[i]).collect();
        }
        g
    }

    pub fn max_drift_ratio(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.trajectory.max_drift / (1.0 + e.trajectory.arc_length))
            .fold(0.0, f64::max)
    }
}

/// Douglas-Peucker simplification: indices of the vertices kept so that every
/// dropped vertex lies within `tol` of the simplified polyline. Endpoints are
/// always kept.
pub fn decimate_indices(poly: &[C64], tol: f64) -> Vec<usize> {
    let n = poly.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0, n - 1)];
    while let Some((a, b)) = stack.pop() {
        let mut worst = (0.0, 0);
        for i in a + 1..b {
            let dist = point_segment_distance(poly[i], poly[a], poly[b]);
            if dist > worst.0 {
                worst = (dist, i);
            }
        }
        if worst.0 > tol {
            keep[worst.1] = true;
            stack.push((a, worst.1));
            stack.push((worst.1, b));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Traces all `sum (m_i + 2)` Stokes lines of `qd` and assembles the graph.
/// Truncated traces do not fail the build; they mark the graph incomplete.
pub fn build_stokes_graph(qd: &QuadraticDifferential, opts: &TraceOptions) -> Result<StokesGraph> {
    let p = qd.polynomial();
    if p.degree() < 1 {
        return Err(Error::InvalidInput("Stokes graph needs degree >= 1".into()));
    }
    let tps = qd.turning_points();
    let mut edges = Vec::new();
    for (i, tp) in tps.points.iter().enumerate() {
        for (k, theta) in emanating_directions(p, tp).into_iter().enumerate() {
            let trajectory = trace_stokes_line(qd, i, theta, opts)?;
            edges.push(StokesEdge {
                origin: i,
                direction_index: k,
                trajectory,
            });
        }
    }
    let finite_edges = merge_finite_edges(p, tps, &edges);
    let complexes = connected_complexes(tps.len(), &finite_edges);
    let incomplete = edges
        .iter()
        .any(|e| matches!(e.trajectory.fate, TrajectoryFate::Truncated { .. }));
    Ok(StokesGraph {
        polynomial: p.clone(),
        turning_points: tps.clone(),
        edges,
        finite_edges,
        rays: p.stokes_sectors().ray_angles,
        complexes,
        options: *opts,
        incomplete,
    })
}

/// Direction (emanating-direction index) in which a trace hitting `b`
/// arrives, seen from `b`.
fn arrival_direction(p: &ComplexPolynomial, tps: &TurningPointSet, e: &StokesEdge, b: usize) -> usize {
    let zb = tps.points[b].location;
    let poly = &e.trajectory.polyline;
    let far = (zb - poly[0]).norm() * 0.01;
    let probe = poly
        .iter()
        .rev()
        .find(|z| (**z - zb).norm() > far)
        .copied()
        .unwrap_or(poly[0]);
    let dirs = emanating_directions(p, &tps.points[b]);
    nearest_angle_index(&dirs, (probe - zb).arg())
}

fn merge_finite_edges(p: &ComplexPolynomial, tps: &TurningPointSet, edges: &[StokesEdge]) -> Vec<FiniteEdge> {
    let mut used = vec![false; edges.len()];
    let mut out = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if used[i] {
            continue;
        }
        let Some(b) = e.trajectory.fate.hit_target() else {
            continue;
        };
        used[i] = true;
        let arrival = arrival_direction(p, tps, e, b);
        let partner = edges.iter().enumerate().position(|(j, f)| {
            !used[j]
                && f.origin == b
                && f.direction_index == arrival
                && f.trajectory.fate.hit_target() == Some(e.origin)
        });
        if let Some(j) = partner {
            used[j] = true;
        }
        out.push(FiniteEdge {
            a: e.origin,
            b,
            forward: i,
            backward: partner,
            flagged: partner.is_none(),
        });
    }
    out
}

fn connected_complexes(n: usize, finite: &[FiniteEdge]) -> Vec<StokesComplex> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for f in finite {
        let (ra, rb) = (find(&mut parent, f.a), find(&mut parent, f.b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_group = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_group[r] == usize::MAX {
            root_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_group[r]].push(i);
    }
    groups
        .into_iter()
        .map(|g| StokesComplex {
            simple: g.len() == 1,
            turning_points: g,
        })
        .collect()
}

/// Simple (one turning point) or not, per complex of the graph.
pub fn classify_complexes(g: &StokesGraph) -> Vec<bool> {
    g.complexes.iter().map(|c| c.simple).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub vertices: (usize, usize),
    pub weight: f64,
}

/// Weighted non-crossing chords of the `(d+2)`-gon of Stokes rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordDiagram {
    pub n_vertices: usize,
    pub chords: Vec<Chord>,
}

impl ChordDiagram {
    pub fn neighbors(&self, a: usize, b: usize) -> bool {
        let n = self.n_vertices;
        (a + 1) % n == b || (b + 1) % n == a
    }

    pub fn crossing(a: (usize, usize), b: (usize, usize)) -> bool {
        let (p, q) = (a.0.min(a.1), a.0.max(a.1));
        let inside = |x: usize| p < x && x < q;
        let shared = [b.0, b.1].iter().any(|x| *x == p || *x == q);
        !shared && (inside(b.0) != inside(b.1))
    }

    pub fn is_valid(&self) -> bool {
        let chords_ok = self
            .chords
            .iter()
            .all(|c| c.weight > 0.0 && c.vertices.0 != c.vertices.1 && !self.neighbors(c.vertices.0, c.vertices.1));
        let non_crossing = self.chords.iter().enumerate().all(|(i, a)| {
            self.chords[i + 1..]
                .iter()
                .all(|b| !Self::crossing(a.vertices, b.vertices))
        });
        chords_ok && non_crossing
    }

    fn from_domains(d: usize, domains: &[AdmissibleDomain]) -> Self {
        let mut chords: Vec<Chord> = domains
            .iter()
            .filter(|dom| dom.kind == DomainKind::Strip)
            .map(|dom| {
                let (a, b) = (dom.incident_rays[0], dom.incident_rays[1]);
                Chord {
                    vertices: (a.min(b), a.max(b)),
                    weight: dom.width.unwrap_or(0.0),
                }
            })
            .collect();
        chords.sort_by(|x, y| x.vertices.cmp(&y.vertices).then(x.weight.total_cmp(&y.weight)));
        Self {
            n_vertices: d + 2,
            chords,
        }
    }
}

/// Chord diagrams of the Stokes graph of `P` and of `-P` (the anti-Stokes
/// graph). Fails unless both graphs have exactly `d - 1` strip domains.
pub fn chord_diagram(qd: &QuadraticDifferential, opts: &TraceOptions) -> Result<(ChordDiagram, ChordDiagram)> {
    let d = qd.polynomial().degree();
    let mut out = Vec::with_capacity(2);
    for t in [0.0, PI / 2.0] {
        let q = if t == 0.0 { qd.clone() } else { qd.rotated(t) };
        let g = build_stokes_graph(&q, opts)?;
        let domains = admissible_domains(&g)?;
        let diagram = ChordDiagram::from_domains(d, &domains);
        if diagram.chords.len() + 1 != d {
            return Err(Error::NonGeneric(format!(
                "{} strip domains, expected {}",
                diagram.chords.len(),
                d.saturating_sub(1)
            )));
        }
        out.push(diagram);
    }
    let anti = out.pop().unwrap();
    let stokes = out.pop().unwrap();
    Ok((stokes, anti))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn graph(coeffs: &[f64], t: f64) -> (QuadraticDifferential, StokesGraph) {
        let qd = QuadraticDifferential::new(ComplexPolynomial::from_real(coeffs).unwrap())
            .unwrap()
            .rotated(t);
        let opts = TraceOptions::new(qd.turning_points(), &RunConfig::default());
        let g = build_stokes_graph(&qd, &opts).unwrap();
        (qd, g)
    }

    #[test]
    fn harmonic_graph_has_one_finite_edge() {
        let (_, g) = graph(&[1.0, 0.0, -1.0], 0.0);
        assert_eq!(g.edges.len(), 6);
        assert_eq!(g.finite_edges.len(), 1);
        assert!(!g.finite_edges[0].flagged);
        assert_eq!(g.escaping_edges().count(), 4);
        assert_eq!(g.complexes.len(), 1);
        assert_eq!(classify_complexes(&g), vec![false]);
    }

    #[test]
    fn rotation_destroys_the_short_line() {
        let (_, g) = graph(&[1.0, 0.0, -1.0], 0.3);
        assert!(g.finite_edges.is_empty());
        assert_eq!(classify_complexes(&g), vec![true, true]);
    }

    #[test]
    fn decimation_drops_collinear_points_only() {
        let line: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 0.0)).collect();
        assert_eq!(decimate_indices(&line, 1e-9), vec![0, 9]);
        let mut bent = line.clone();
        bent[4].im = 1.0;
        assert_eq!(decimate_indices(&bent, 0.1), vec![0, 3, 4, 5, 9]);
        let (_, g) = graph(&[1.0, 0.0, -1.0], 0.0);
        let d = g.decimated(1e-4);
        for (a, b) in g.edges.iter().zip(&d.edges) {
            assert!(b.trajectory.polyline.len() <= a.trajectory.polyline.len());
            assert_eq!(b.trajectory.polyline.len(), b.trajectory.xi.len());
        }
    }

    #[test]
    fn chord_crossing_rules() {
        assert!(ChordDiagram::crossing((0, 2), (1, 3)));
        assert!(!ChordDiagram::crossing((0, 2), (2, 4)));
        assert!(!ChordDiagram::crossing((0, 3), (1, 2)));
        let d = ChordDiagram {
            n_vertices: 5,
            chords: vec![Chord {
                vertices: (0, 1),
                weight: 1.0,
            }],
        };
        assert!(!d.is_valid());
    }
}
