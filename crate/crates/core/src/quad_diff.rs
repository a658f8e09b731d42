//! Branch-tracked `sqrt(P)` along polylines, canonical-parameter integrals,
//! periods between turning points and contour integrals of the WKB
//! correction densities `alpha_j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{ComplexPolynomial, Poly, TurningPointSet, C64};
use crate::quadrature::{integrate, QuadOptions};

/// Largest `j` for which `alpha_j` contour integrals are supported.
pub const MAX_ALPHA_ORDER: usize = 8;

/// Maximum rotation of `sqrt(P)` allowed between consecutive branch samples.
const MAX_BRANCH_TURN: f64 = PI / 8.0;
/// Parameter offset of the first regular sample next to a turning point.
const SINGULAR_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub z: C64,
    pub sqrt_p: C64,
}

/// `sqrt(P)` continued along a polyline, plus `int sqrt(P) dz` along it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchedPath {
    pub samples: Vec<BranchSample>,
    pub total_integral: C64,
}

impl BranchedPath {
    pub fn final_sqrt(&self) -> C64 {
        self.samples.last().map(|s| s.sqrt_p).unwrap_or_default()
    }
}

/// `w_ab = int_a^b sqrt(P) dz` along a path avoiding the other turning points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Period {
    pub pair: (usize, usize),
    pub path: Vec<C64>,
    pub value: C64,
    /// Direction of `sqrt(P)` as the path leaves turning point `pair.0`.
    pub branch_seed: C64,
}

/// One straight piece of a path with the parametrisation used to integrate
/// it. Endpoints sitting on a turning point get a quadratic substitution so
/// the integrand is smooth in `u`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    a: C64,
    b: C64,
    sing_a: bool,
    sing_b: bool,
}

impl Segment {
    fn z(&self, u: f64) -> C64 {
        let d = self.b - self.a;
        match (self.sing_a, self.sing_b) {
            (false, false) => self.a + d * u,
            (true, false) => self.a + d * (u * u),
            (false, true) => self.b - d * ((1.0 - u) * (1.0 - u)),
            (true, true) => self.a + d * (u * u * (3.0 - 2.0 * u)),
        }
    }

    fn dz(&self, u: f64) -> C64 {
        let d = self.b - self.a;
        match (self.sing_a, self.sing_b) {
            (false, false) => d,
            (true, false) => d * (2.0 * u),
            (false, true) => d * (2.0 * (1.0 - u)),
            (true, true) => d * (6.0 * u * (1.0 - u)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct USample {
    u: f64,
    s: C64,
}

/// Sign convention for periods: `Im w >= 0`, and `Re w > 0` when `w` is
/// real up to rounding.
pub fn normalize_period(w: C64) -> C64 {
    let flip = if w.im.abs() <= 1e-12 * w.norm() {
        w.re < 0.0
    } else {
        w.im < 0.0
    };
    if flip {
        -w
    } else {
        w
    }
}

/// Picks the sign of `sqrt(v)` closest to `reference`.
pub fn sqrt_near(v: C64, reference: C64) -> C64 {
    let r = v.sqrt();
    if r.re * reference.re + r.im * reference.im < 0.0 {
        -r
    } else {
        r
    }
}

fn turn_angle(a: C64, b: C64) -> f64 {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return 0.0;
    }
    (b / a).arg().abs()
}

/// Distance from `c` to the segment `[a, b]`.
pub fn point_segment_distance(c: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (c - a).norm();
    }
    let t = (((c - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - c).norm()
}

/// Winding number of a closed polyline around `c`.
pub fn winding_number(contour: &[C64], c: C64) -> i64 {
    let n = contour.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = contour[i] - c;
        let b = contour[(i + 1) % n] - c;
        total += (b / a).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

/// Signed area of a closed polyline (positive for counter-clockwise).
pub fn signed_area(contour: &[C64]) -> f64 {
    let n = contour.len();
    (0..n)
        .map(|i| {
            let a = contour[i];
            let b = contour[(i + 1) % n];
            a.re * b.im - a.im * b.re
        })
        .sum::<f64>()
        * 0.5
}

/// A polynomial quadratic differential `P(z) dz^2` together with its
/// turning points and path tolerances.
#[derive(Debug, Clone)]
pub struct QuadraticDifferential {
    p: ComplexPolynomial,
    turning: TurningPointSet,
    delta_path: f64,
    quad: QuadOptions,
}

impl QuadraticDifferential {
    /// Default `delta_path` is `1e-3` times the diameter of the root set.
    pub fn new(p: ComplexPolynomial) -> Result<Self> {
        let turning = p.roots(1e-10)?;
        Ok(Self::with_roots(p, turning, 1e-3))
    }

    /// Reuses already computed turning points (e.g. across the rotation
    /// family, whose roots do not depend on `t`).
    pub fn with_roots(p: ComplexPolynomial, turning: TurningPointSet, delta_path_factor: f64) -> Self {
        let diam = turning.diameter();
        let scale = if diam > 0.0 { diam } else { 1.0 + turning.max_modulus() };
        Self {
            p,
            turning,
            delta_path: delta_path_factor * scale,
            quad: QuadOptions::default(),
        }
    }

    /// Root tolerance, path clearance and quadrature tolerance from `cfg`.
    pub fn from_config(p: ComplexPolynomial, cfg: &crate::config::RunConfig) -> Result<Self> {
        let turning = p.roots(cfg.root_tol)?;
        Ok(Self::with_roots(p, turning, cfg.delta_path).with_quad_tol(cfg.quad_rtol))
    }

    pub fn with_quad_tol(mut self, rel_tol: f64) -> Self {
        self.quad.rel_tol = rel_tol;
        self
    }

    pub fn polynomial(&self) -> &ComplexPolynomial {
        &self.p
    }

    pub fn turning_points(&self) -> &TurningPointSet {
        &self.turning
    }

    pub fn delta_path(&self) -> f64 {
        self.delta_path
    }

    /// Same turning points, potential `exp(2it) P`.
    pub fn rotated(&self, t: f64) -> Self {
        Self {
            p: self.p.rotate(t),
            turning: self.turning.clone(),
            delta_path: self.delta_path,
            quad: self.quad,
        }
    }

    fn root_scale(&self) -> f64 {
        1.0 + self.turning.max_modulus()
    }

    /// Index of a turning point sitting at `z`, if any.
    fn turning_at(&self, z: C64) -> Option<usize> {
        let tol = 1e-9 * self.root_scale();
        self.turning.points.iter().position(|t| (t.location - z).norm() <= tol)
    }

    fn segments(&self, path: &[C64], open_ends: bool) -> Result<Vec<Segment>> {
        if path.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two vertices".into()));
        }
        let n = path.len() - 1;
        let start_tp = if open_ends { self.turning_at(path[0]) } else { None };
        let end_tp = if open_ends { self.turning_at(path[n]) } else { None };
        let mut segs = Vec::with_capacity(n);
        for i in 0..n {
            let mut a = path[i];
            let mut b = path[i + 1];
            let sing_a = i == 0 && start_tp.is_some();
            let sing_b = i == n - 1 && end_tp.is_some();
            if sing_a {
                a = self.turning.points[start_tp.unwrap()].location;
            }
            if sing_b {
                b = self.turning.points[end_tp.unwrap()].location;
            }
            for (k, tp) in self.turning.points.iter().enumerate() {
                if (sing_a && Some(k) == start_tp) || (sing_b && Some(k) == end_tp) {
                    continue;
                }
                let dist = point_segment_distance(tp.location, a, b);
                if dist < self.delta_path {
                    return Err(Error::Clearance {
                        point: tp.location,
                        distance: dist,
                        clearance: self.delta_path,
                    });
                }
            }
            segs.push(Segment { a, b, sing_a, sing_b });
        }
        Ok(segs)
    }

    fn dist_to_roots(&self, z: C64, seg: &Segment) -> f64 {
        self.turning
            .points
            .iter()
            .filter(|t| !((seg.sing_a && t.location == seg.a) || (seg.sing_b && t.location == seg.b)))
            .map(|t| (t.location - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Adaptive branch samples in the segment parameter.
    fn track_segment(&self, seg: &Segment, s_start: C64) -> Result<Vec<USample>> {
        let mut out = Vec::new();
        let (mut u, mut s) = if seg.sing_a {
            out.push(USample {
                u: 0.0,
                s: C64::new(0.0, 0.0),
            });
            let u0 = SINGULAR_OFFSET;
            let s0 = sqrt_near(self.p.eval(seg.z(u0)), s_start);
            (u0, s0)
        } else {
            (0.0, s_start)
        };
        out.push(USample { u, s });
        let u_end = if seg.sing_b { 1.0 - SINGULAR_OFFSET } else { 1.0 };
        let mut du = u_end - u;
        while u < u_end {
            let z = seg.z(u);
            let reach = 0.5 * self.dist_to_roots(z, seg);
            loop {
                let u_next = (u + du).min(u_end);
                let z_next = seg.z(u_next);
                let s_next = sqrt_near(self.p.eval(z_next), s);
                let ok = (z_next - z).norm() <= reach && turn_angle(s, s_next) <= MAX_BRANCH_TURN;
                if ok {
                    u = u_next;
                    s = s_next;
                    out.push(USample { u, s });
                    du *= 2.0;
                    break;
                }
                du *= 0.5;
                if du < 1e-15 {
                    return Err(Error::Trace {
                        last: z,
                        reason: "branch tracking step underflow".into(),
                    });
                }
            }
        }
        if seg.sing_b {
            out.push(USample {
                u: 1.0,
                s: C64::new(0.0, 0.0),
            });
        }
        Ok(out)
    }

    /// Integrates `f(z, sqrt P(z)) dz` along `path`, continuing the branch
    /// from `seed`. Returns the integral, the branch samples and the final
    /// branch value.
    fn integrate_along<F>(&self, path: &[C64], seed: C64, open_ends: bool, f: F) -> Result<(C64, Vec<BranchSample>)>
    where
        F: Fn(C64, C64) -> C64,
    {
        let segs = self.segments(path, open_ends)?;
        if !segs[0].sing_a {
            let v = self.p.eval(segs[0].a);
            if (seed * seed - v).norm() > 1e-8 * v.norm().max(1.0) {
                return Err(Error::SeedMismatch { seed, value: v });
            }
        } else if seed.norm() == 0.0 {
            return Err(Error::InvalidInput("branch hint must be nonzero".into()));
        }
        let mut total = C64::new(0.0, 0.0);
        let mut samples = Vec::new();
        let mut s_cur = seed;
        for seg in &segs {
            let track = self.track_segment(seg, s_cur)?;
            for w in track.windows(2) {
                let (l, r) = (w[0], w[1]);
                let reference = |u: f64| -> C64 {
                    if l.s.norm() == 0.0 {
                        r.s
                    } else if r.s.norm() == 0.0 {
                        l.s
                    } else {
                        let t = (u - l.u) / (r.u - l.u);
                        l.s * (1.0 - t) + r.s * t
                    }
                };
                let res = integrate(
                    |u| {
                        let z = seg.z(u);
                        let s = sqrt_near(self.p.eval(z), reference(u));
                        f(z, s) * seg.dz(u)
                    },
                    l.u,
                    r.u,
                    self.quad,
                );
                total += res.value;
            }
            for t in &track {
                if samples.is_empty() || t.u > 0.0 {
                    samples.push(BranchSample {
                        z: seg.z(t.u),
                        sqrt_p: t.s,
                    });
                }
            }
            // continue the branch into the next segment from the last regular sample
            s_cur = track
                .iter()
                .rev()
                .find(|t| t.s.norm() > 0.0)
                .map(|t| t.s)
                .unwrap_or(seed);
        }
        Ok((total, samples))
    }

    /// Continues `sqrt(P)` along `path` from `seed`.
    ///
    /// When the path starts on a turning point, `seed` only selects the
    /// branch: the sign whose direction is closest to `seed` is taken.
    pub fn sqrt_continuation(&self, path: &[C64], seed: C64) -> Result<BranchedPath> {
        let (total, samples) = self.integrate_along(path, seed, true, |_, s| s)?;
        Ok(BranchedPath {
            samples,
            total_integral: total,
        })
    }

    /// `int sqrt(P) dz` along `path` on the branch selected by `seed`.
    pub fn canonical_parameter_integral(&self, path: &[C64], seed: C64) -> Result<C64> {
        Ok(self.sqrt_continuation(path, seed)?.total_integral)
    }

    /// Default period path between turning points `a` and `b`: the straight
    /// segment, bent around any other turning point within `delta_path`.
    pub fn period_path(&self, a: usize, b: usize) -> Result<Vec<C64>> {
        let za = self.turning.points[a].location;
        let zb = self.turning.points[b].location;
        let len = (zb - za).norm();
        if len <= 1e-12 * self.root_scale() {
            return Err(Error::DegeneratePair(a, b));
        }
        let dir = (zb - za) / len;
        let rho = 2.0 * self.delta_path;
        let mut obstacles: Vec<(f64, C64)> = self
            .turning
            .points
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != a && *k != b)
            .filter(|(_, t)| point_segment_distance(t.location, za, zb) < self.delta_path)
            .map(|(_, t)| (((t.location - za) * dir.conj()).re.clamp(0.0, len), t.location))
            .collect();
        obstacles.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut path = vec![za];
        for (s, _) in obstacles {
            let q = za + dir * s;
            let normal = dir * C64::new(0.0, 1.0);
            let left = self.p.eval(q + normal * rho).norm();
            let right = self.p.eval(q - normal * rho).norm();
            let side = if right < left { -1.0 } else { 1.0 };
            const ARC_STEPS: usize = 16;
            for k in 0..=ARC_STEPS {
                let phi = PI * k as f64 / ARC_STEPS as f64;
                path.push(q + (-dir * phi.cos() + normal * (side * phi.sin())) * rho);
            }
        }
        path.push(zb);
        Ok(path)
    }

    /// Period for one pair, normalised so that `Im w >= 0` (real periods get
    /// `Re w > 0`).
    pub fn period(&self, a: usize, b: usize) -> Result<Period> {
        let path = self.period_path(a, b)?;
        let hint = C64::new(1.0, 0.0);
        let raw = self.canonical_parameter_integral(&path, hint)?;
        let value = normalize_period(raw);
        let seed = if value == raw { hint } else { -hint };
        Ok(Period {
            pair: (a, b),
            path,
            value,
            branch_seed: seed,
        })
    }

    /// One period per unordered pair of distinct turning points.
    pub fn pairwise_periods(&self) -> Result<Vec<Period>> {
        let n = self.turning.len();
        if self.p.degree() < 2 || n < 2 {
            return Err(Error::InvalidInput(
                "periods need degree >= 2 and at least two distinct roots".into(),
            ));
        }
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                out.push(self.period(a, b)?);
            }
        }
        Ok(out)
    }

    /// Total multiplicity of the turning points enclosed by `contour`.
    pub fn enclosed_multiplicity(&self, contour: &[C64]) -> usize {
        self.turning
            .points
            .iter()
            .map(|t| winding_number(contour, t.location).unsigned_abs() as usize * t.multiplicity)
            .sum()
    }

    fn closed(contour: &[C64]) -> Vec<C64> {
        let mut c = contour.to_vec();
        if c.first() != c.last() {
            c.push(c[0]);
        }
        c
    }

    fn check_contour(&self, contour: &[C64]) -> Result<()> {
        let m = self.enclosed_multiplicity(contour);
        if m % 2 == 1 {
            return Err(Error::BranchInconsistency(m));
        }
        Ok(())
    }

    /// `oint sqrt(P) dz` around a closed contour; returns the value and the
    /// branch value used at the first vertex.
    pub fn loop_integral(&self, contour: &[C64], seed: Option<C64>) -> Result<(C64, C64)> {
        self.check_contour(contour)?;
        let path = Self::closed(contour);
        let seed = seed.unwrap_or_else(|| self.p.eval(path[0]).sqrt());
        let (v, samples) = self.integrate_along(&path, seed, false, |_, s| s)?;
        let end = samples.last().map(|s| s.sqrt_p).unwrap_or(seed);
        if (end + seed).norm() < (end - seed).norm() {
            return Err(Error::BranchInconsistency(self.enclosed_multiplicity(contour)));
        }
        Ok((v, seed))
    }

    /// `oint alpha_j dz` for `j = 0..=j_max` around a closed contour.
    ///
    /// The odd densities depend on the branch of `sqrt(P)`; it is fixed by
    /// `seed` at the first vertex (principal root when `None`).
    pub fn alpha_contour_integrals(&self, contour: &[C64], j_max: usize, seed: Option<C64>) -> Result<Vec<C64>> {
        if j_max > MAX_ALPHA_ORDER {
            return Err(Error::Domain(format!(
                "alpha order {j_max} exceeds supported maximum {MAX_ALPHA_ORDER}"
            )));
        }
        self.check_contour(contour)?;
        let path = Self::closed(contour);
        let seed = seed.unwrap_or_else(|| self.p.eval(path[0]).sqrt());
        let alphas = AlphaDensities::new(&self.p, j_max);
        (0..=j_max)
            .map(|j| {
                let (v, _) = self.integrate_along(&path, seed, false, |z, s| alphas.eval(j, z, s))?;
                Ok(v)
            })
            .collect()
    }
}

/// The correction densities `alpha_j`, each held as `N_j / (P^(j+1) s^j)`
/// with `s = sqrt(P)` and `N_j` a polynomial built from the recurrence
///
/// `alpha_0 = -P'/(4P)`,
/// `alpha_j = -(sum_{m<j} alpha_m alpha_{j-1-m} + alpha'_{j-1}) / (2 s)`.
#[derive(Debug, Clone)]
pub struct AlphaDensities {
    p: Poly,
    numerators: Vec<Poly>,
}

impl AlphaDensities {
    pub fn new(p: &ComplexPolynomial, j_max: usize) -> Self {
        let pp = p.to_poly();
        let dp = pp.derivative();
        let mut numerators: Vec<Poly> = vec![dp.scale(C64::new(-0.25, 0.0))];
        for j in 1..=j_max {
            let mut acc = Poly::zero();
            for m in 0..j {
                acc = acc.add(&numerators[m].mul(&numerators[j - 1 - m]));
            }
            let prev = &numerators[j - 1];
            acc = acc.add(&prev.derivative().mul(&pp));
            let k = j as f64 + (j as f64 - 1.0) / 2.0;
            acc = acc.add(&prev.mul(&dp).scale(C64::new(-k, 0.0)));
            numerators.push(acc.scale(C64::new(-0.5, 0.0)));
        }
        Self { p: pp, numerators }
    }

    pub fn max_order(&self) -> usize {
        self.numerators.len() - 1
    }

    pub fn numerator(&self, j: usize) -> &Poly {
        &self.numerators[j]
    }

    /// `alpha_j(z)` on the branch where `sqrt(P(z)) = s`.
    pub fn eval(&self, j: usize, z: C64, s: C64) -> C64 {
        let pz = self.p.eval(z);
        self.numerators[j].eval(z) / (pz.powu(j as u32 + 1) * s.powu(j as u32))
    }
}

/// Closed polyline around `polyline` at distance `radius`: offset sides
/// joined by semicircular caps, counter-clockwise.
pub fn tube_contour(polyline: &[C64], radius: f64) -> Vec<C64> {
    const CAP_STEPS: usize = 24;
    let pts: Vec<C64> = {
        let mut v: Vec<C64> = Vec::with_capacity(polyline.len());
        for &p in polyline {
            if v.last().map_or(true, |q: &C64| (p - *q).norm() > 0.25 * radius) {
                v.push(p);
            }
        }
        if let (Some(&last), Some(&end)) = (v.last(), polyline.last()) {
            if last != end {
                if v.len() > 1 && (end - last).norm() <= 0.25 * radius {
                    v.pop();
                }
                v.push(end);
            }
        }
        v
    };
    if pts.len() < 2 {
        let c = polyline[0];
        return (0..2 * CAP_STEPS)
            .map(|k| c + C64::from_polar(radius, PI * k as f64 / CAP_STEPS as f64))
            .collect();
    }
    let n = pts.len();
    let tangent = |i: usize| -> C64 {
        let t = if i == 0 {
            pts[1] - pts[0]
        } else if i == n - 1 {
            pts[n - 1] - pts[n - 2]
        } else {
            let a = pts[i] - pts[i - 1];
            let b = pts[i + 1] - pts[i];
            a / a.norm() + b / b.norm()
        };
        t / t.norm()
    };
    let mut out = Vec::new();
    // right side forward
    for i in 0..n {
        out.push(pts[i] - tangent(i) * C64::new(0.0, 1.0) * radius);
    }
    // cap around the end
    let te = tangent(n - 1);
    for k in 1..CAP_STEPS {
        let phi = -PI / 2.0 + PI * k as f64 / CAP_STEPS as f64;
        out.push(pts[n - 1] + te * C64::from_polar(radius, phi));
    }
    // left side backward
    for i in (0..n).rev() {
        out.push(pts[i] + tangent(i) * C64::new(0.0, 1.0) * radius);
    }
    let ts = tangent(0);
    for k in 1..CAP_STEPS {
        let phi = PI / 2.0 + PI * k as f64 / CAP_STEPS as f64;
        out.push(pts[0] + ts * C64::from_polar(radius, phi));
    }
    if signed_area(&out) < 0.0 {
        out.reverse();
    }
    out
}

/// Counter-clockwise circle polygon.
pub fn circle_contour(center: C64, radius: f64, vertices: usize) -> Vec<C64> {
    (0..vertices)
        .map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / vertices as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qd(coeffs: &[f64]) -> QuadraticDifferential {
        QuadraticDifferential::new(ComplexPolynomial::from_real(coeffs).unwrap()).unwrap()
    }

    #[test]
    fn constant_potential_has_constant_branch() {
        // P = 1 has no turning points; the tracker only sees a constant.
        let q = QuadraticDifferential::with_roots(
            ComplexPolynomial::from_real(&[1.0]).unwrap(),
            TurningPointSet { points: vec![] },
            1e-3,
        );
        let path = [c(0.0, 0.0), c(1.0, 2.0), c(-3.0, 0.5)];
        let bp = q.sqrt_continuation(&path, c(1.0, 0.0)).unwrap();
        assert!(bp.samples.iter().all(|s| (s.sqrt_p - c(1.0, 0.0)).norm() < 1e-15));
        assert!((bp.total_integral - c(-3.0, 0.5)).norm() < 1e-13);
    }

    #[test]
    fn perfect_square_has_no_monodromy() {
        let q = qd(&[1.0, 0.0, 0.0]);
        let mut loop_path = circle_contour(c(0.0, 0.0), 1.0, 64);
        loop_path.push(loop_path[0]);
        let bp = q.sqrt_continuation(&loop_path, c(1.0, 0.0)).unwrap();
        assert!((bp.final_sqrt() - c(1.0, 0.0)).norm() < 1e-12);
        for s in &bp.samples {
            assert!((s.sqrt_p - s.z).norm() < 1e-12);
        }
    }

    #[test]
    fn sqrt_z_flips_sign_around_origin() {
        let q = qd(&[1.0, 0.0]);
        let mut loop_path = circle_contour(c(0.0, 0.0), 1.0, 64);
        loop_path.push(loop_path[0]);
        let bp = q.sqrt_continuation(&loop_path, c(1.0, 0.0)).unwrap();
        assert!((bp.final_sqrt() - c(-1.0, 0.0)).norm() < 1e-8);
        for w in bp.samples.windows(2) {
            assert!(turn_angle(w[0].sqrt_p, w[1].sqrt_p) < PI / 2.0);
        }
    }

    #[test]
    fn seed_and_clearance_errors() {
        let q = qd(&[1.0, 0.0, -1.0]);
        let err = q.sqrt_continuation(&[c(0.0, 0.0), c(0.0, 1.0)], c(2.0, 0.0));
        assert!(matches!(err, Err(Error::SeedMismatch { .. })));
        let ok = q.sqrt_continuation(&[c(0.0, 0.5), c(2.0, 0.5)], c(-1.25, 0.0).sqrt());
        assert!(ok.is_ok());
        let err = q.sqrt_continuation(&[c(0.5, 0.0), c(1.5, 0.0)], c(-0.75, 0.0).sqrt());
        assert!(matches!(err, Err(Error::Clearance { .. })));
    }

    #[test]
    fn canonical_integrals_from_turning_points() {
        let q = qd(&[1.0, 0.0]);
        let v = q
            .canonical_parameter_integral(&[c(0.0, 0.0), c(1.0, 0.0)], c(1.0, 0.0))
            .unwrap();
        assert!((v - c(2.0 / 3.0, 0.0)).norm() < 1e-12);

        let q = qd(&[1.0, 0.0, -1.0]);
        let v = q
            .canonical_parameter_integral(&[c(-1.0, 0.0), c(1.0, 0.0)], c(0.0, 1.0))
            .unwrap();
        assert!((v - c(0.0, PI / 2.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn reversing_a_path_negates_the_integral() {
        let q = qd(&[1.0, -0.5, 0.3, 2.0]);
        let path = [c(2.0, 2.0), c(-1.0, 2.5), c(-2.5, -1.0)];
        let seed = q.polynomial().eval(path[0]).sqrt();
        let fwd = q.sqrt_continuation(&path, seed).unwrap();
        let back: Vec<C64> = path.iter().rev().copied().collect();
        let rev = q.canonical_parameter_integral(&back, fwd.final_sqrt()).unwrap();
        assert!((fwd.total_integral + rev).norm() < 1e-11 * fwd.total_integral.norm());
    }

    #[test]
    fn alpha_zero_counts_enclosed_roots() {
        let q = qd(&[1.0, 0.0, -1.0]);
        let contour = circle_contour(c(0.0, 0.0), 2.0, 64);
        let a = q.alpha_contour_integrals(&contour, 0, None).unwrap();
        assert!((a[0] - c(0.0, -PI)).norm() < 1e-10);
        let empty = circle_contour(c(5.0, 5.0), 1.0, 32);
        let a = q.alpha_contour_integrals(&empty, 3, None).unwrap();
        assert!(a.iter().all(|v| v.norm() < 1e-10));
        let odd = circle_contour(c(1.0, 0.0), 0.5, 32);
        assert!(matches!(
            q.alpha_contour_integrals(&odd, 1, None),
            Err(Error::BranchInconsistency(1))
        ));
    }

    #[test]
    fn alpha_numerators_match_hand_expansion() {
        // For P = z^2 - 1: N_0 = -z/2, N_1 = -(3z^2/8 + 1/4).
        let a = AlphaDensities::new(&ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap(), 1);
        assert_eq!(a.numerator(0).coeffs(), &[c(0.0, 0.0), c(-0.5, 0.0)]);
        assert_eq!(a.numerator(1).coeffs(), &[c(-0.25, 0.0), c(0.0, 0.0), c(-0.375, 0.0)]);
    }

    #[test]
    fn alpha_recurrence_matches_finite_differences() {
        // Oracle: the recurrence with alpha'_{j-1} replaced by a central
        // difference of the closed-form alpha_{j-1}.
        let p = ComplexPolynomial::new(vec![c(1.0, 0.5), c(0.0, 0.0), c(-0.3, 1.0), c(2.0, 0.0)]).unwrap();
        let a = AlphaDensities::new(&p, 4);
        let z = c(1.3, -0.8);
        let s = p.eval(z).sqrt();
        let h = 1e-4;
        let at = |j: usize, w: C64| a.eval(j, w, sqrt_near(p.eval(w), s));
        assert!((at(0, z) + p.eval_derivative(z) / (p.eval(z) * 4.0)).norm() < 1e-14);
        for j in 1..=4 {
            let deriv = (at(j - 1, z + h) - at(j - 1, z - h)) / (2.0 * h);
            let conv: C64 = (0..j).map(|m| at(m, z) * at(j - 1 - m, z)).sum();
            let expected = -(conv + deriv) / (s * 2.0);
            let got = at(j, z);
            assert!(
                (got - expected).norm() < 1e-6 * (1.0 + got.norm()),
                "j={j}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn tube_contour_encloses_only_the_segment() {
        let line: Vec<C64> = (0..=20).map(|k| c(-1.0 + 0.1 * k as f64, 0.0)).collect();
        let tube = tube_contour(&line, 0.05);
        assert!(signed_area(&tube) > 0.0);
        assert_eq!(winding_number(&tube, c(-1.0, 0.0)), 1);
        assert_eq!(winding_number(&tube, c(1.0, 0.0)), 1);
        assert_eq!(winding_number(&tube, c(0.0, 0.2)), 0);
    }
}
