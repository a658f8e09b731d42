//! Chopped vertical strips: nodes in the canonical chart with vertical cuts
//! at the interior nodes. Node pairs joined by a cut-free segment correspond
//! to short geodesics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::C64;
use crate::stokes_tracer::{admissible_domains, AdmissibleDomain, DomainKind, StokesGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cut {
    Up,
    Down,
}

impl Cut {
    pub fn flipped(self) -> Self {
        match self {
            Cut::Up => Cut::Down,
            Cut::Down => Cut::Up,
        }
    }
}

/// `d` nodes with strictly increasing real parts and distinct imaginary
/// parts; `cuts[j]` belongs to node `j + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrip")]
pub struct ChoppedStrip {
    nodes: Vec<[f64; 2]>,
    cuts: Vec<Cut>,
}

#[derive(Deserialize)]
struct RawStrip {
    nodes: Vec<[f64; 2]>,
    cuts: Vec<Cut>,
}

impl TryFrom<RawStrip> for ChoppedStrip {
    type Error = Error;

    fn try_from(raw: RawStrip) -> Result<Self> {
        ChoppedStrip::new(raw.nodes, raw.cuts)
    }
}

impl ChoppedStrip {
    pub fn new(nodes: Vec<[f64; 2]>, cuts: Vec<Cut>) -> Result<Self> {
        let d = nodes.len();
        if d < 2 {
            return Err(Error::InvalidInput("a strip needs at least 2 nodes".into()));
        }
        if cuts.len() != d - 2 {
            return Err(Error::InvalidInput(format!(
                "{} cuts given, expected {}",
                cuts.len(),
                d - 2
            )));
        }
        if nodes.iter().any(|n| !n[0].is_finite() || !n[1].is_finite()) {
            return Err(Error::InvalidInput("node coordinates must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[0][0] >= w[1][0]) {
            return Err(Error::InvalidInput("node real parts must increase strictly".into()));
        }
        let mut ys: Vec<f64> = nodes.iter().map(|n| n[1]).collect();
        ys.sort_by(f64::total_cmp);
        if ys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("node imaginary parts must be distinct".into()));
        }
        Ok(Self { nodes, cuts })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cut at node `j`, if `j` is interior.
    pub fn cut_at(&self, j: usize) -> Option<Cut> {
        if j == 0 || j + 1 >= self.nodes.len() {
            None
        } else {
            Some(self.cuts[j - 1])
        }
    }

    /// Node coordinates on an integer lattice, exact for integer inputs.
    fn lattice(&self) -> Vec<[i64; 2]> {
        // scale by a power of two so every coordinate is an integer below 2^52
        let max = self
            .nodes
            .iter()
            .flat_map(|n| [n[0].abs(), n[1].abs()])
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let shift = 52 - (max.log2().floor() as i32 + 1);
        let scale = 2f64.powi(shift);
        self.nodes
            .iter()
            .map(|n| [(n[0] * scale).round() as i64, (n[1] * scale).round() as i64])
            .collect()
    }
}

impl fmt::Display for ChoppedStrip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// Result of the exact visibility test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visibility {
    pub pairs: Vec<(usize, usize)>,
    /// Pairs whose segment passes exactly through an interior node; they
    /// count as blocked.
    pub ties: Vec<(usize, usize)>,
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    let (ax, ay) = (a[0] as i128, a[1] as i128);
    (b[0] as i128 - ax) * (c[1] as i128 - ay) - (b[1] as i128 - ay) * (c[0] as i128 - ax)
}

fn visibility_with(s: &ChoppedStrip, skip_cut: Option<usize>) -> Visibility {
    let pts = s.lattice();
    let d = pts.len();
    let mut pairs = Vec::new();
    let mut ties = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let mut blocked = false;
            let mut tie = false;
            for c in a + 1..b {
                if Some(c) == skip_cut {
                    continue;
                }
                // a -> b runs left to right, so positive means c lies above
                let o = orient(pts[a], pts[b], pts[c]);
                let cut = s.cuts[c - 1];
                if o == 0 {
                    tie = true;
                    blocked = true;
                } else if (o > 0) == (cut == Cut::Down) {
                    blocked = true;
                }
            }
            if tie {
                ties.push((a, b));
            }
            if !blocked {
                pairs.push((a, b));
            }
        }
    }
    Visibility { pairs, ties }
}

/// All node pairs whose open segment meets no cut, with exact ties.
pub fn visibility(s: &ChoppedStrip) -> Visibility {
    visibility_with(s, None)
}

pub fn visible_pairs(s: &ChoppedStrip) -> Vec<(usize, usize)> {
    visibility(s).pairs
}

/// Visible pairs when the cut at interior node `j` is ignored.
pub fn visible_pairs_without_cut(s: &ChoppedStrip, j: usize) -> Vec<(usize, usize)> {
    visibility_with(s, Some(j)).pairs
}

fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

type Lattice = (Vec<[i64; 2]>, Vec<Cut>);

/// Nodes `1..d` on the concave cap `(M i, -M i^2)` plus a node to the left
/// of it on a line through the cap's first node that passes above exactly
/// `v - 1` further cap nodes. A down cut at the first cap node then leaves
/// `C(d-1, 2) + v` visible pairs.
fn cap_construction(d: usize, v: usize) -> Lattice {
    let m = 16 * d as i64;
    let mut nodes = Vec::with_capacity(d);
    // slope -(v - 1/2), stepped back by 2 in x
    nodes.push([-2, 2 * v as i64 - 1]);
    for i in 0..(d - 1) as i64 {
        nodes.push([m * i, -m * i * i]);
    }
    let mut cuts = vec![Cut::Up; d - 2];
    cuts[0] = Cut::Down;
    (nodes, cuts)
}

/// Appends a node so that only the new consecutive pair becomes visible:
/// an up cut at the old last node and a new node high above it.
fn append_blocked(base: Lattice) -> Lattice {
    let (mut nodes, mut cuts) = base;
    let ymax = nodes.iter().map(|n| n[1].abs()).max().unwrap_or(0);
    let last = *nodes.last().unwrap();
    if nodes.len() >= 2 {
        cuts.push(Cut::Up);
    }
    nodes.push([last[0] + 1, 4 * ymax + 1]);
    (nodes, cuts)
}

fn build(d: usize, k: usize) -> Lattice {
    if d == 2 {
        return (vec![[0, 0], [1, 1]], Vec::new());
    }
    if k >= binom2(d - 1) + 2 {
        cap_construction(d, k - binom2(d - 1))
    } else {
        append_blocked(build(d - 1, k - 1))
    }
}

/// A strip with `d` nodes and exactly `k` visible pairs, all consecutive
/// pairs among them, for `d - 1 <= k <= C(d, 2)`.
pub fn realize_count(d: usize, k: usize) -> Result<ChoppedStrip> {
    if d < 2 {
        return Err(Error::Domain(format!("degree {d} must be at least 2")));
    }
    if k < d - 1 || k > binom2(d) {
        return Err(Error::Domain(format!(
            "count {k} outside [{}, {}] for d = {d}",
            d - 1,
            binom2(d)
        )));
    }
    let (nodes, cuts) = build(d, k);
    let strip = ChoppedStrip::new(nodes.iter().map(|n| [n[0] as f64, n[1] as f64]).collect(), cuts)?;
    let vis = visibility(&strip);
    let consecutive = (0..d - 1).all(|j| vis.pairs.contains(&(j, j + 1)));
    if vis.pairs.len() != k || !vis.ties.is_empty() || !consecutive {
        return Err(Error::Domain(format!(
            "construction for d = {d}, k = {k} produced {} visible pairs",
            vis.pairs.len()
        )));
    }
    Ok(strip)
}

/// Outcome of the very-flat test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub very_flat: bool,
    pub simple_roots: bool,
    pub strip_count: usize,
    /// Largest number of strip domains whose closure contains one root.
    pub max_strips_per_root: usize,
    pub strip: Option<ChoppedStrip>,
    /// Node `j` of `strip` is turning point `root_order[j]`.
    pub root_order: Vec<usize>,
}

/// Checks that all roots are simple, that there are `d - 1` strip domains
/// and that no root touches more than two of them; if so, maps the roots to
/// a chopped strip through the canonical coordinate.
pub fn is_very_flat(g: &StokesGraph) -> Result<FlatnessReport> {
    let domains = admissible_domains(g)?;
    let d = g.polynomial.degree();
    let n = g.turning_points.len();
    let simple_roots = g.turning_points.all_simple() && n == d;
    let strips: Vec<&AdmissibleDomain> = domains.iter().filter(|x| x.kind == DomainKind::Strip).collect();
    let mut per_root = vec![0usize; n];
    for s in &strips {
        for &r in &s.turning_points {
            per_root[r] += 1;
        }
    }
    let max_strips_per_root = per_root.iter().copied().max().unwrap_or(0);
    let mut report = FlatnessReport {
        very_flat: false,
        simple_roots,
        strip_count: strips.len(),
        max_strips_per_root,
        strip: None,
        root_order: Vec::new(),
    };
    if !simple_roots || strips.len() + 1 != d || max_strips_per_root > 2 || d < 2 {
        return Ok(report);
    }
    let (order, strip) = project(g, &strips)?;
    report.very_flat = true;
    report.strip = Some(strip);
    report.root_order = order;
    Ok(report)
}

/// The two roots of a strip domain of a very flat differential, one per
/// boundary component.
fn strip_roots(s: &AdmissibleDomain) -> Result<(usize, usize)> {
    match s.turning_points.as_slice() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::NonGeneric(format!(
            "strip domain touches {} turning points, expected 2",
            other.len()
        ))),
    }
}

fn project(g: &StokesGraph, strips: &[&AdmissibleDomain]) -> Result<(Vec<usize>, ChoppedStrip)> {
    let n = g.turning_points.len();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in strips.iter().enumerate() {
        let (a, b) = strip_roots(s)?;
        adj.entry(a).or_default().push(i);
        adj.entry(b).or_default().push(i);
    }
    // the strips chain the roots into a path; walk it from an end
    let start = (0..n)
        .find(|r| adj.get(r).map_or(0, |v| v.len()) == 1)
        .ok_or_else(|| Error::NonGeneric("strip domains do not form a path".into()))?;
    let mut order = vec![start];
    let mut via = Vec::new();
    let mut xi = vec![C64::new(0.0, 0.0)];
    let mut prev_strip = usize::MAX;
    while order.len() < n {
        let cur = *order.last().unwrap();
        let Some(&si) = adj[&cur].iter().find(|&&i| i != prev_strip) else {
            return Err(Error::NonGeneric("strip domains do not form a path".into()));
        };
        let (a, b) = strip_roots(strips[si])?;
        let next = if a == cur { b } else { a };
        if order.contains(&next) {
            return Err(Error::NonGeneric("strip domains form a cycle".into()));
        }
        let t = strips[si]
            .transitions
            .first()
            .ok_or_else(|| Error::NonGeneric("strip domain without transitions".into()))?;
        let dx = if t.delta_xi.re < 0.0 { -t.delta_xi } else { t.delta_xi };
        xi.push(*xi.last().unwrap() + dx);
        order.push(next);
        via.push(si);
        prev_strip = si;
    }
    let position: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut cuts = Vec::new();
    for j in 1..n - 1 {
        let (left, right) = (strips[via[j - 1]], strips[via[j]]);
        let root = order[j];
        let shared = left
            .boundary_edges
            .iter()
            .copied()
            .find(|e| right.boundary_edges.contains(e) && g.edges[*e].origin == root)
            .ok_or_else(|| Error::NonGeneric(format!("no shared Stokes line at turning point {root}")))?;
        let up = shared_edge_points_up(&[left, right], &position, shared)?;
        cuts.push(if up { Cut::Down } else { Cut::Up });
    }
    let strip = ChoppedStrip::new(xi.iter().map(|z| [z.re, z.im]).collect(), cuts)?;
    Ok((order, strip))
}

/// Whether the Stokes line `edge` heads in the `+i` direction of the chart
/// in which the path order increases the real part. Along its own branch a
/// traced line always heads in the `+i` direction.
fn shared_edge_points_up(faces: &[&AdmissibleDomain], position: &BTreeMap<usize, usize>, edge: usize) -> Result<bool> {
    for f in faces {
        for t in &f.transitions {
            if t.incoming_edge != edge && t.outgoing_edge != edge {
                continue;
            }
            let forward = position[&t.to_root] > position[&t.from_root];
            let eps = if (t.delta_xi.re > 0.0) == forward { 1.0 } else { -1.0 };
            let sign = if t.incoming_edge == edge {
                eps
            } else {
                eps * t.outgoing_sign
            };
            return Ok(sign > 0.0);
        }
    }
    Err(Error::NonGeneric(format!(
        "Stokes line {edge} not on a strip transition"
    )))
}
