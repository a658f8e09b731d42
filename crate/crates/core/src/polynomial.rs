//! Complex polynomial potentials: evaluation, roots (turning points), Stokes
//! sectors at infinity and the rotation family `P_t = exp(2it) P`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Reduces an angle into `[0, period)`.
pub fn reduce_mod(theta: f64, period: f64) -> f64 {
    let t = theta.rem_euclid(period);
    if t >= period {
        0.0
    } else {
        t
    }
}

/// Signed distance between two angles modulo `period`, in `(-period/2, period/2]`.
pub fn angle_diff_mod(a: f64, b: f64, period: f64) -> f64 {
    let mut d = (a - b).rem_euclid(period);
    if d > period / 2.0 {
        d -= period;
    }
    d
}

/// A complex polynomial `a_0 z^d + ... + a_d` with `a_0 != 0`.
///
/// Coefficients are stored highest degree first, the same order used by the
/// text and JSON formats.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<C64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        if coeffs[0] == C64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("leading coefficient must be nonzero".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Builds `a0 * prod (z - r)^m`.
    pub fn from_roots(a0: C64, roots: &[(C64, usize)]) -> Result<Self> {
        let mut acc = vec![a0];
        for &(r, m) in roots {
            for _ in 0..m {
                let mut next = vec![C64::new(0.0, 0.0); acc.len() + 1];
                for (i, &c) in acc.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] -= c * r;
                }
                acc = next;
            }
        }
        Self::new(acc)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[0]
    }

    /// `arg a_0` in `(-pi, pi]`.
    pub fn phi0(&self) -> f64 {
        let a0 = self.leading();
        // divide by the larger component first so that the result depends
        // only on the ratio im/re, which positive scalings preserve
        let m = a0.re.abs().max(a0.im.abs());
        let phi = (a0.im / m).atan2(a0.re / m);
        if phi <= -PI {
            phi + 2.0 * PI
        } else {
            phi
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Returns `(P(z), P'(z), P''(z))` by a single Horner sweep.
    pub fn eval_with_derivs(&self, z: C64) -> (C64, C64, C64) {
        let zero = C64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        let mut ddp = zero;
        for &c in &self.coeffs {
            ddp = ddp * z + dp * 2.0;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, ddp)
    }

    pub fn eval_derivative(&self, z: C64) -> C64 {
        self.eval_with_derivs(z).1
    }

    /// `k`-th derivative evaluated at `z`.
    pub fn eval_nth_derivative(&self, k: usize, z: C64) -> C64 {
        let d = self.degree();
        if k > d {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, &c) in self.coeffs.iter().enumerate().take(d - k + 1) {
            let power = d - i;
            let falling: f64 = (0..k).map(|j| (power - j) as f64).product();
            acc = acc * z + c * falling;
        }
        acc
    }

    /// Sum of `|a_i| |z|^(d-i)`, used to judge evaluation error.
    pub fn abs_eval(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Multiplies by a nonzero complex constant.
    pub fn scale(&self, c: C64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// The rotation family member `exp(2it) P`.
    pub fn rotate(&self, t: f64) -> Self {
        let f = C64::from_polar(1.0, 2.0 * t);
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * f).collect(),
        }
    }

    /// Lowest-first algebra form.
    pub fn to_poly(&self) -> Poly {
        Poly::new(self.coeffs.iter().rev().copied().collect())
    }

    pub fn roots(&self, tol: f64) -> Result<TurningPointSet> {
        find_roots(self, tol)
    }

    pub fn stokes_sectors(&self) -> StokesSectorSet {
        StokesSectorSet::for_phase(self.degree(), self.phi0())
    }
}

impl fmt::Display for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format_coefficient(*c)).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn format_coefficient(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn parse_coefficient(token: &str) -> Result<C64> {
    let s = token.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    let bad = || Error::Parse(format!("malformed coefficient `{s}`"));
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not an exponent sign and not leading
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse().map_err(|_| bad())?,
        };
        Ok(C64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(C64::new(re, 0.0))
    }
}

impl FromStr for ComplexPolynomial {
    type Err = Error;

    /// Parses `"1,0,-1"` or `"1,2+0.5i,-3i"`, highest degree first.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s.split(',').map(parse_coefficient).collect::<Result<Vec<_>>>()?;
        Self::new(coeffs).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// JSON wire form `{"coeffs": [[re, im], ...]}`, highest degree first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&ComplexPolynomial> for PolynomialJson {
    fn from(p: &ComplexPolynomial) -> Self {
        Self {
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for ComplexPolynomial {
    type Error = Error;

    fn try_from(value: PolynomialJson) -> Result<Self> {
        Self::new(value.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

impl Serialize for ComplexPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolynomialJson::deserialize(d)?;
        ComplexPolynomial::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Dense polynomial with lowest-degree coefficient first. Unlike
/// [`ComplexPolynomial`] it may be zero; used for symbolic recurrences.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    c: Vec<C64>,
}

impl Poly {
    pub fn new(mut c: Vec<C64>) -> Self {
        while c.last().is_some_and(|x| *x == C64::new(0.0, 0.0)) {
            c.pop();
        }
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect())
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::new(self.c.iter().map(|&a| a * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let zero = C64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|i| *self.c.get(i).unwrap_or(&zero) + *other.c.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub location: C64,
    pub multiplicity: usize,
}

/// Distinct roots of `P` with multiplicities, in a deterministic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointSet {
    pub points: Vec<TurningPoint>,
}

impl TurningPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.location).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.points.iter().all(|p| p.multiplicity == 1)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.location.norm()).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max((a.location - b.location).norm());
            }
        }
        d
    }

    /// Nearest turning point to `z`: `(index, distance)`.
    pub fn nearest(&self, z: C64) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p.location - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Max coefficient error of `a0 * prod (z - r)^m` against `p`.
    pub fn reconstruction_residual(&self, p: &ComplexPolynomial) -> f64 {
        let roots: Vec<(C64, usize)> = self.points.iter().map(|t| (t.location, t.multiplicity)).collect();
        match ComplexPolynomial::from_roots(p.leading(), &roots) {
            Ok(q) if q.degree() == p.degree() => q
                .coeffs()
                .iter()
                .zip(p.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }
}

/// `|arg z - center| < half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesSector {
    pub center_angle: f64,
    pub half_width: f64,
}

/// The `d+2` open sectors at infinity and the `d+2` separating ray angles.
///
/// Sector `j` is centred at `(2 pi j - phi0)/(d+2)`; ray `k` sits at
/// `(pi (2k+1) - phi0)/(d+2)`, between sectors `k` and `k+1`. Angles are kept
/// in index order (cyclic), not re-sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesSectorSet {
    pub sectors: Vec<StokesSector>,
    pub ray_angles: Vec<f64>,
}

impl StokesSectorSet {
    pub fn for_phase(degree: usize, phi0: f64) -> Self {
        let n = (degree + 2) as f64;
        let half_width = PI / n;
        let sectors = (0..degree + 2)
            .map(|j| StokesSector {
                center_angle: (2.0 * PI * j as f64 - phi0) / n,
                half_width,
            })
            .collect();
        let ray_angles = (0..degree + 2).map(|k| (PI * (2 * k + 1) as f64 - phi0) / n).collect();
        Self { sectors, ray_angles }
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    /// Index of the ray closest in angle to `theta`.
    pub fn nearest_ray(&self, theta: f64) -> usize {
        nearest_angle_index(&self.ray_angles, theta)
    }

    pub fn contains(&self, j: usize, theta: f64) -> bool {
        let s = &self.sectors[j];
        angle_diff_mod(theta, s.center_angle, 2.0 * PI).abs() < s.half_width
    }
}

pub(crate) fn nearest_angle_index(angles: &[f64], theta: f64) -> usize {
    angles
        .iter()
        .enumerate()
        .map(|(i, &a)| (i, angle_diff_mod(theta, a, 2.0 * PI).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

const ABERTH_MAX_ITER: usize = 2000;

fn find_roots(p: &ComplexPolynomial, tol: f64) -> Result<TurningPointSet> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("root tolerance must be positive".into()));
    }
    let monic = p.scale(p.leading().inv())?;
    let approx = aberth(&monic)?;
    let scale = 1.0 + approx.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clusters = cluster_roots(&approx, tol, scale);

    let mut points = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let m = cluster.len();
        let centroid = cluster.iter().sum::<C64>() / m as f64;
        let polished = polish(&monic, centroid, m, tol.powf(1.0 / m as f64) * scale);
        points.push(TurningPoint {
            location: polished,
            multiplicity: m,
        });
    }
    points.sort_by(|a, b| root_key(a.location).cmp(&root_key(b.location)));
    Ok(TurningPointSet { points })
}

fn root_key(z: C64) -> (i64, i64) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(z.re), q(z.im))
}

fn aberth(monic: &ComplexPolynomial) -> Result<Vec<C64>> {
    let d = monic.degree();
    let c = monic.coeffs();
    let center = -c[1] / d as f64;
    let shifted_radius = (1..=d).map(|k| c[k].norm().powf(1.0 / k as f64)).fold(0.0, f64::max);
    let radius = if shifted_radius > 0.0 { shifted_radius } else { 1.0 };
    let mut z: Vec<C64> = (0..d)
        .map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / d as f64 + 0.4))
        .collect();
    let mut done = vec![false; d];
    let eps = f64::EPSILON;

    for _ in 0..ABERTH_MAX_ITER {
        if done.iter().all(|&x| x) {
            break;
        }
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (pz, dpz, _) = monic.eval_with_derivs(z[i]);
            if pz.norm() <= 8.0 * eps * monic.abs_eval(z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = pz / dpz;
            let sum: C64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                // coincident iterates; nudge apart
                let bump = C64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += bump;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 1e-15 * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
    }
    if done.iter().all(|&x| x) {
        return Ok(z);
    }
    let residuals: Vec<f64> = z
        .iter()
        .map(|&zi| monic.eval(zi).norm() / monic.abs_eval(zi).max(1.0))
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    if max_residual < 1e-10 {
        return Ok(z);
    }
    Err(Error::RootNonConvergence {
        iterations: ABERTH_MAX_ITER,
        max_residual,
        residuals,
    })
}

/// Greedy single-linkage clustering where a cluster of size `m` may span a
/// radius proportional to `tol^(1/m)`.
fn cluster_roots(z: &[C64], tol: f64, scale: f64) -> Vec<Vec<C64>> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(((z[i] - z[j]).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (dist, i, j) in pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        let m = size[ri] + size[rj];
        let radius = 2.0 * scale * tol.powf(1.0 / m as f64);
        if dist <= radius {
            parent[rj] = ri;
            size[ri] = m;
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.push(z[i]),
            None => groups.push((r, vec![z[i]])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Newton on `P^(m-1)`, which has a simple zero at an `m`-fold root.
fn polish(monic: &ComplexPolynomial, start: C64, m: usize, max_move: f64) -> C64 {
    let mut z = start;
    for _ in 0..8 {
        let f = monic.eval_nth_derivative(m - 1, z);
        let df = monic.eval_nth_derivative(m, z);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        let next = z - step;
        if !next.re.is_finite() || (next - start).norm() > max_move {
            break;
        }
        z = next;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}
