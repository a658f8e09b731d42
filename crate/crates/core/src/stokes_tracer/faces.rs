//! Faces of the Stokes graph closed up by a circle at infinity, found by
//! walking a doubly connected edge list.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{emanating_directions, StokesGraph};
use crate::error::{Error, Result};
use crate::polynomial::C64;
use crate::quad_diff::QuadraticDifferential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    HalfPlane,
    Strip,
}

/// A place where a face boundary passes through a ray at infinity: it comes
/// in along `incoming_edge` and leaves along `outgoing_edge`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayTransition {
    pub ray: usize,
    pub incoming_edge: usize,
    pub outgoing_edge: usize,
    pub from_root: usize,
    pub to_root: usize,
    /// `int sqrt(P)` from `from_root` to `to_root` inside the face, on the
    /// branch of the incoming trace.
    pub delta_xi: C64,
    /// `+1` or `-1`: the incoming branch continued to the outgoing trace's
    /// end is this multiple of the outgoing trace's branch.
    pub outgoing_sign: f64,
}

/// A connected component of the complement of the Stokes graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibleDomain {
    /// Indices into `StokesGraph::edges`; finite edges appear through their
    /// forward half-trace.
    pub boundary_edges: Vec<usize>,
    pub incident_rays: Vec<usize>,
    pub turning_points: Vec<usize>,
    pub kind: DomainKind,
    pub width: Option<f64>,
    pub transitions: Vec<RayTransition>,
}

#[derive(Debug, Clone, Copy)]
enum HalfKind {
    Trace { edge: usize },
    Arc { from_ray: usize, forward: bool },
}

#[derive(Debug, Clone, Copy)]
struct HalfEdge {
    from: usize,
    to: usize,
    angle: f64,
    kind: HalfKind,
}

/// Enumerates the faces of `g` and classifies the bounded-at-infinity ones
/// as half-planes or strips. Strip widths are `|Re delta xi|` between the
/// two boundary components, measured across the strip near infinity.
pub fn admissible_domains(g: &StokesGraph) -> Result<Vec<AdmissibleDomain>> {
    if g.incomplete {
        return Err(Error::IncompleteGraph(g.truncated_count()));
    }
    let tps = &g.turning_points;
    let n_roots = tps.len();
    let n_rays = g.rays.len();
    let ray_vertex = |k: usize| n_roots + k;
    let big_r = 2.0 * g.options.r_escape;
    let anchor = |k: usize| C64::from_polar(big_r, g.rays[k]);

    let mut half: Vec<HalfEdge> = Vec::new();
    let mut push_pair = |a: HalfEdge, b: HalfEdge| {
        half.push(a);
        half.push(b);
    };
    for f in &g.finite_edges {
        let fwd = &g.edges[f.forward];
        let back_angle = match f.backward {
            Some(j) => g.edges[j].trajectory.direction,
            None => {
                let dirs = emanating_directions(&g.polynomial, &tps.points[f.b]);
                let zb = tps.points[f.b].location;
                let poly = &fwd.trajectory.polyline;
                let probe = poly[poly.len().saturating_sub(2)];
                dirs[crate::polynomial::nearest_angle_index(&dirs, (probe - zb).arg())]
            }
        };
        push_pair(
            HalfEdge {
                from: f.a,
                to: f.b,
                angle: fwd.trajectory.direction,
                kind: HalfKind::Trace { edge: f.forward },
            },
            HalfEdge {
                from: f.b,
                to: f.a,
                angle: back_angle,
                kind: HalfKind::Trace { edge: f.forward },
            },
        );
    }
    let mut n_escaping = 0;
    for (i, e) in g.edges.iter().enumerate() {
        let Some(k) = e.trajectory.fate.escape_ray() else {
            continue;
        };
        n_escaping += 1;
        push_pair(
            HalfEdge {
                from: e.origin,
                to: ray_vertex(k),
                angle: e.trajectory.direction,
                kind: HalfKind::Trace { edge: i },
            },
            HalfEdge {
                from: ray_vertex(k),
                to: e.origin,
                angle: (e.trajectory.end() - anchor(k)).arg(),
                kind: HalfKind::Trace { edge: i },
            },
        );
    }
    for k in 0..n_rays {
        let k1 = (k + 1) % n_rays;
        push_pair(
            HalfEdge {
                from: ray_vertex(k),
                to: ray_vertex(k1),
                angle: g.rays[k] + PI / 2.0,
                kind: HalfKind::Arc {
                    from_ray: k,
                    forward: true,
                },
            },
            HalfEdge {
                from: ray_vertex(k1),
                to: ray_vertex(k),
                angle: g.rays[k1] - PI / 2.0,
                kind: HalfKind::Arc {
                    from_ray: k,
                    forward: false,
                },
            },
        );
    }

    let n_vertices = n_roots + n_rays;
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for (h, he) in half.iter().enumerate() {
        around[he.from].push(h);
    }
    for list in &mut around {
        list.sort_by(|&a, &b| {
            half[a]
                .angle
                .rem_euclid(2.0 * PI)
                .total_cmp(&half[b].angle.rem_euclid(2.0 * PI))
        });
    }
    let next = |h: usize| -> usize {
        let twin = h ^ 1;
        let list = &around[half[h].to];
        let pos = list.iter().position(|&x| x == twin).unwrap();
        list[(pos + list.len() - 1) % list.len()]
    };

    let mut visited = vec![false; half.len()];
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for start in 0..half.len() {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut h = start;
        while !visited[h] {
            visited[h] = true;
            cycle.push(h);
            h = next(h);
        }
        if h != start {
            return Err(Error::NonGeneric("inconsistent rotation system in Stokes graph".into()));
        }
        faces.push(cycle);
    }
    let n_edges = g.finite_edges.len() + n_escaping + n_rays;
    let euler = n_vertices as i64 - n_edges as i64 + faces.len() as i64;
    if euler != 2 {
        return Err(Error::NonGeneric(format!(
            "face enumeration gives V - E + F = {euler}, expected 2"
        )));
    }

    let qd = QuadraticDifferential::with_roots(g.polynomial.clone(), tps.clone(), 1e-3);
    let mut out = Vec::new();
    for cycle in faces {
        let is_outer = cycle
            .iter()
            .any(|&h| matches!(half[h].kind, HalfKind::Arc { forward: false, .. }));
        if is_outer {
            continue;
        }
        out.push(describe_face(g, &qd, &half, &cycle, n_roots, &next)?);
    }
    Ok(out)
}

fn describe_face(
    g: &StokesGraph,
    qd: &QuadraticDifferential,
    half: &[HalfEdge],
    cycle: &[usize],
    n_roots: usize,
    next: &dyn Fn(usize) -> usize,
) -> Result<AdmissibleDomain> {
    let n_rays = g.rays.len();
    let mut boundary_edges = Vec::new();
    let mut roots = BTreeSet::new();
    let mut rays = BTreeSet::new();
    let mut arc_rays = Vec::new();
    let mut transitions = Vec::new();
    for &h in cycle {
        let he = half[h];
        if he.from < n_roots {
            roots.insert(he.from);
        } else {
            rays.insert(he.from - n_roots);
        }
        match he.kind {
            HalfKind::Trace { edge } => {
                if !boundary_edges.contains(&edge) {
                    boundary_edges.push(edge);
                }
                let nx = half[next(h)];
                if he.to >= n_roots {
                    if let HalfKind::Trace { edge: out_edge } = nx.kind {
                        transitions.push(transition(g, qd, he.to - n_roots, edge, out_edge)?);
                    }
                }
            }
            HalfKind::Arc { from_ray, .. } => arc_rays.push(from_ray),
        }
    }
    let (kind, incident_rays) = if let Some(&k) = arc_rays.first() {
        (DomainKind::HalfPlane, vec![k, (k + 1) % n_rays])
    } else {
        let r: Vec<usize> = rays.iter().copied().collect();
        if r.len() != 2 {
            return Err(Error::NonGeneric(format!(
                "domain touches {} rays at infinity",
                r.len()
            )));
        }
        let neighbors = (r[0] + 1) % n_rays == r[1] || (r[1] + 1) % n_rays == r[0];
        let kind = if neighbors {
            DomainKind::HalfPlane
        } else {
            DomainKind::Strip
        };
        (kind, r)
    };
    let width = match kind {
        DomainKind::Strip => {
            let w = transitions.iter().map(|t| t.delta_xi.re.abs()).sum::<f64>() / transitions.len().max(1) as f64;
            if !(w > 0.0) {
                return Err(Error::NonGeneric("strip of zero width".into()));
            }
            Some(w)
        }
        DomainKind::HalfPlane => None,
    };
    Ok(AdmissibleDomain {
        boundary_edges,
        incident_rays,
        turning_points: roots.into_iter().collect(),
        kind,
        width,
        transitions,
    })
}

fn transition(
    g: &StokesGraph,
    qd: &QuadraticDifferential,
    ray: usize,
    incoming: usize,
    outgoing: usize,
) -> Result<RayTransition> {
    let u = &g.edges[incoming].trajectory;
    let v = &g.edges[outgoing].trajectory;
    let bp = qd.sqrt_continuation(&[u.end(), v.end()], u.final_sqrt)?;
    let s2 = bp.final_sqrt();
    let sigma = if (s2 + v.final_sqrt).norm() < (s2 - v.final_sqrt).norm() {
        -1.0
    } else {
        1.0
    };
    Ok(RayTransition {
        ray,
        incoming_edge: incoming,
        outgoing_edge: outgoing,
        from_root: u.origin,
        to_root: v.origin,
        delta_xi: u.xi_end() + bp.total_integral - v.xi_end() * sigma,
        outgoing_sign: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::polynomial::ComplexPolynomial;
    use crate::stokes_tracer::{build_stokes_graph, TraceOptions};

    fn domains(coeffs: &[f64], t: f64) -> Vec<AdmissibleDomain> {
        let qd = QuadraticDifferential::new(ComplexPolynomial::from_real(coeffs).unwrap())
            .unwrap()
            .rotated(t);
        let opts = TraceOptions::new(qd.turning_points(), &RunConfig::default());
        admissible_domains(&build_stokes_graph(&qd, &opts).unwrap()).unwrap()
    }

    fn count(ds: &[AdmissibleDomain], kind: DomainKind) -> usize {
        ds.iter().filter(|d| d.kind == kind).count()
    }

    #[test]
    fn airy_has_three_half_planes() {
        let ds = domains(&[1.0, 0.0], 0.0);
        assert_eq!(ds.len(), 3);
        assert_eq!(count(&ds, DomainKind::HalfPlane), 3);
    }

    #[test]
    fn rotated_harmonic_has_one_strip_of_known_width() {
        let ds = domains(&[1.0, 0.0, -1.0], 0.3);
        assert_eq!(count(&ds, DomainKind::HalfPlane), 4);
        assert_eq!(count(&ds, DomainKind::Strip), 1);
        let strip = ds.iter().find(|d| d.kind == DomainKind::Strip).unwrap();
        let (a, b) = (strip.incident_rays[0], strip.incident_rays[1]);
        assert_eq!((a + 2) % 4, b);
        // the boundaries carry the two roots, so the width is
        // |Re(e^{it} int_{-1}^{1} sqrt(z^2 - 1) dz)| = (pi/2) sin t
        let w = strip.width.unwrap();
        assert!((w - PI / 2.0 * 0.3f64.sin()).abs() < 1e-6, "{w}");
    }

    #[test]
    fn harmonic_with_short_line_has_no_strip() {
        let ds = domains(&[1.0, 0.0, -1.0], 0.0);
        assert_eq!(count(&ds, DomainKind::HalfPlane), 4);
        assert_eq!(count(&ds, DomainKind::Strip), 0);
    }
}
