//! Spectral asymptotics of `-y'' + lambda^2 P(z) y = 0`: accumulation rays,
//! quantization along each ray, and eigenvalues located independently as
//! zeros of a Wronskian of subdominant solutions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::ShortGeodesic;
use crate::ode::{dp5_step, step_factor};
use crate::polynomial::{ComplexPolynomial, C64};
use crate::quad_diff::{
    point_segment_distance, sqrt_near, tube_contour, winding_number, AlphaDensities, QuadraticDifferential,
    MAX_ALPHA_ORDER,
};
use crate::quadrature::gauss_legendre;

/// Clearance of the loop contour around a short geodesic, in units of
/// `delta_path`.
const LOOP_CLEARANCE: f64 = 3.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccumulationRay {
    /// Argument of the ray in the `lambda` plane, in `[0, pi)`.
    pub angle: f64,
    pub geodesic: ShortGeodesic,
    /// Counter-clockwise contour hugging the geodesic.
    pub loop_contour: Vec<C64>,
    /// `oint sqrt(P)` around `loop_contour`.
    pub loop_period: C64,
    /// Branch of `sqrt(P)` at the first contour vertex.
    pub loop_seed: C64,
}

/// Closed contour around the polyline `path` at distance `radius`, checked
/// to wind once around both endpoints and not around any other turning point.
fn enclosing_contour(qd: &QuadraticDifferential, path: &[C64], pair: (usize, usize), radius: f64) -> Result<Vec<C64>> {
    let contour = tube_contour(path, radius);
    for (k, tp) in qd.turning_points().points.iter().enumerate() {
        let want = if k == pair.0 || k == pair.1 { 1 } else { 0 };
        if winding_number(&contour, tp.location) != want {
            return Err(Error::Clearance {
                point: tp.location,
                distance: radius,
                clearance: radius,
            });
        }
    }
    Ok(contour)
}

fn distance_to_others(qd: &QuadraticDifferential, path: &[C64], pair: (usize, usize)) -> f64 {
    let mut best = f64::INFINITY;
    for (k, tp) in qd.turning_points().points.iter().enumerate() {
        if k == pair.0 || k == pair.1 {
            continue;
        }
        for w in path.windows(2) {
            best = best.min(point_segment_distance(tp.location, w[0], w[1]));
        }
    }
    best
}

/// One accumulation ray per verified short geodesic.
pub fn accumulation_rays(qd: &QuadraticDifferential, geodesics: &[ShortGeodesic]) -> Result<Vec<AccumulationRay>> {
    geodesics
        .iter()
        .map(|g| {
            let radius = (LOOP_CLEARANCE * qd.delta_path()).min(0.3 * distance_to_others(qd, &g.polyline, g.pair));
            let contour = enclosing_contour(qd, &g.polyline, g.pair, radius)?;
            let (loop_period, loop_seed) = qd.loop_integral(&contour, None)?;
            Ok(AccumulationRay {
                angle: g.t_star,
                geodesic: g.clone(),
                loop_contour: contour,
                loop_period,
                loop_seed,
            })
        })
        .collect()
}

/// Contour used for the quantization condition: a tube around the geodesic
/// as wide as the other turning points allow, which keeps the correction
/// integrands moderate.
fn quantization_contour(qd: &QuadraticDifferential, ray: &AccumulationRay) -> Result<Vec<C64>> {
    let g = &ray.geodesic;
    let tps = qd.turning_points();
    let span = (tps.points[g.pair.0].location - tps.points[g.pair.1].location).norm();
    let radius = (0.45 * distance_to_others(qd, &g.polyline, g.pair)).min(0.5 * span);
    enclosing_contour(qd, &g.polyline, g.pair, radius)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenvalueEstimate {
    pub n: u32,
    pub ray_angle: f64,
    pub value: C64,
    pub order: usize,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residuals decreased monotonically after the second iterate.
    pub monotone: bool,
}

/// Contour data entering the quantization condition for one ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantizationData {
    pub contour: Vec<C64>,
    /// `oint sqrt(P)`, with the branch making the leading estimate lie on
    /// the forward ray.
    pub period: C64,
    /// `oint alpha_j` for `j = 0..=order` on the same branch.
    pub alpha: Vec<C64>,
}

pub fn quantization_data(qd: &QuadraticDifferential, ray: &AccumulationRay, order: usize) -> Result<QuantizationData> {
    if order > MAX_ALPHA_ORDER {
        return Err(Error::Domain(format!(
            "order {order} exceeds supported maximum {MAX_ALPHA_ORDER}"
        )));
    }
    let contour = quantization_contour(qd, ray)?;
    let (mut period, seed) = qd.loop_integral(&contour, None)?;
    let mut alpha = qd.alpha_contour_integrals(&contour, order, Some(seed))?;
    // forward ray: Re(e^{-i angle} lambda0) > 0 with lambda0 = i pi / period
    let lambda0 = C64::new(0.0, PI) / period;
    if (lambda0 * C64::from_polar(1.0, -ray.angle)).re < 0.0 {
        period = -period;
        for (j, a) in alpha.iter_mut().enumerate() {
            if j % 2 == 1 {
                *a = -*a;
            }
        }
    }
    Ok(QuantizationData { contour, period, alpha })
}

/// Solves `lambda L = i (2 pi n + pi) - sum_{j=1}^{order} lambda^{-j} A_j`
/// for each `n` by fixed-point iteration from `lambda0 = i (2n+1) pi / L`,
/// where `L = oint sqrt(P)` and `A_j = oint alpha_j` around the ray's
/// geodesic. `oint alpha_0 = -pi i` supplies the `+pi`.
pub fn eigenvalue_asymptotics(
    qd: &QuadraticDifferential,
    ray: &AccumulationRay,
    n_min: u32,
    n_max: u32,
    order: usize,
) -> Result<Vec<EigenvalueEstimate>> {
    let data = quantization_data(qd, ray, order)?;
    Ok((n_min..=n_max)
        .map(|n| solve_quantization(&data, ray.angle, n, order))
        .collect())
}

pub fn solve_quantization(data: &QuantizationData, angle: f64, n: u32, order: usize) -> EigenvalueEstimate {
    let rhs0 = C64::new(0.0, (2.0 * n as f64 + 1.0) * PI);
    let correction = |lam: C64| -> C64 { (1..=order).map(|j| data.alpha[j] / lam.powu(j as u32)).sum() };
    let residual = |lam: C64| (lam * data.period - rhs0 + correction(lam)).norm();
    let mut lam = rhs0 / data.period;
    let mut residuals = vec![residual(lam)];
    let mut converged = order == 0;
    let mut iterations = 0;
    if order > 0 {
        for it in 1..=50 {
            let next = (rhs0 - correction(lam)) / data.period;
            let change = (next - lam).norm();
            lam = next;
            iterations = it;
            residuals.push(residual(lam));
            if change <= 1e-12 * lam.norm() {
                converged = true;
                break;
            }
        }
    }
    let monotone = residuals
        .windows(2)
        .skip(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    EigenvalueEstimate {
        n,
        ray_angle: angle,
        value: lam,
        order,
        residual: *residuals.last().unwrap(),
        iterations,
        converged,
        monotone,
    }
}

/// Numerically integrated solution decaying into one Stokes sector of
/// `lambda^2 P`, evaluated at the matching point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdominantSolution {
    pub sector: usize,
    pub lambda: C64,
    pub z_far: C64,
    pub z_match: C64,
    /// `y` and `y'` at `z_match` are `(y, dy) * exp(log_scale)`.
    pub y: C64,
    pub dy: C64,
    pub log_scale: f64,
    pub steps: usize,
    /// `|y|` grew monotonically (up to rounding) while integrating inward
    /// over the outer half of the path, i.e. it decays outward.
    pub decays_outward: bool,
}

/// Centre angle of sector `j` of `lambda^2 P`.
pub fn sector_center(p: &ComplexPolynomial, lambda: C64, j: usize) -> f64 {
    let n = (p.degree() + 2) as f64;
    (2.0 * PI * j as f64 - p.phi0() - 2.0 * lambda.arg()) / n
}

/// Default start radius for the WKB initial data.
pub fn default_radius(p: &ComplexPolynomial, roots_radius: f64, lambda: C64) -> f64 {
    let n = (p.degree() + 2) as f64;
    let r = 1.0 + roots_radius;
    (2.0 * r).max(10.0 * r * lambda.norm().powf(-2.0 / n))
}

const WKB_ORDER: usize = 3;

/// Subdominant solution starting at `R e^{i theta}` from WKB data and
/// integrated straight to `z_match` with relative tolerance `1e-10`. `s` is
/// the branch of `sqrt(P)` at the start point; holding it fixed makes the
/// result holomorphic in `lambda`.
pub fn subdominant_along(
    p: &ComplexPolynomial,
    alphas: &AlphaDensities,
    lambda: C64,
    s: C64,
    theta: f64,
    radius: f64,
    z_match: C64,
) -> Result<(C64, C64, f64, usize, bool)> {
    let z_far = C64::from_polar(radius, theta);
    let pz = p.eval(z_far);
    let mut dlog = -lambda * s;
    for j in 0..=WKB_ORDER.min(alphas.max_order()) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        dlog += alphas.eval(j, z_far, s) * sign / lambda.powu(j as u32);
    }
    let delta = z_match - z_far;
    let lam2 = lambda * lambda;
    let rhs = |tau: f64, y: &[C64; 2]| -> [C64; 2] {
        let z = z_far + delta * tau;
        [y[1] * delta, lam2 * p.eval(z) * y[0] * delta]
    };
    let rtol = 1e-10;
    let mut y = [C64::new(1.0, 0.0), dlog];
    let mut log_scale = 0.0;
    let mut tau = 0.0;
    let scale0 = lambda.norm() * pz.norm().sqrt() * radius;
    let mut h = (0.1 / scale0.max(1.0)).min(0.05);
    let mut steps = 0;
    let mut last_log = f64::NEG_INFINITY;
    let mut decays = true;
    while tau < 1.0 {
        h = h.min(1.0 - tau);
        let (yn, err) = dp5_step(rhs, tau, &y, h);
        let size = y[0].norm().max(yn[0].norm()) + (y[1].norm().max(yn[1].norm()) / lambda.norm().max(1.0));
        let e = err[0] + err[1] / lambda.norm().max(1.0);
        let ratio = e / (rtol * size + 1e-300);
        if ratio > 1.0 {
            h *= step_factor(ratio).min(0.9);
            if h < 1e-14 {
                return Err(Error::Integration("step size underflow".into()));
            }
            continue;
        }
        tau += h;
        steps += 1;
        let m = yn[0].norm() + yn[1].norm() / lambda.norm().max(1.0);
        y = [yn[0] / m, yn[1] / m];
        log_scale += m.ln();
        let current = log_scale + y[0].norm().ln();
        if tau <= 0.5 && current < last_log - 1e-6 * last_log.abs().max(1.0) {
            decays = false;
        }
        last_log = current;
        h *= step_factor(ratio);
        if steps > 5_000_000 {
            return Err(Error::Integration("too many steps".into()));
        }
    }
    Ok((y[0], y[1], log_scale, steps, decays))
}

/// The solution subdominant in sector `sector` of `lambda^2 P`, started at
/// radius `radius` on the sector's centre line and continued to `z_match`.
pub fn subdominant_solution(
    p: &ComplexPolynomial,
    lambda: C64,
    sector: usize,
    radius: f64,
    z_match: C64,
) -> Result<SubdominantSolution> {
    if lambda.norm() == 0.0 {
        return Err(Error::Domain("lambda must be nonzero".into()));
    }
    if sector >= p.degree() + 2 {
        return Err(Error::InvalidInput(format!("sector {sector} out of range")));
    }
    let alphas = AlphaDensities::new(p, WKB_ORDER);
    let theta = sector_center(p, lambda, sector);
    let s = decaying_branch(p, lambda, theta, radius);
    let (y, dy, log_scale, steps, decays) = subdominant_along(p, &alphas, lambda, s, theta, radius, z_match)?;
    Ok(SubdominantSolution {
        sector,
        lambda,
        z_far: C64::from_polar(radius, theta),
        z_match,
        y,
        dy,
        log_scale,
        steps,
        decays_outward: decays,
    })
}

/// Branch of `sqrt(P)` at `R e^{i theta}` along which `exp(-lambda int sqrt(P))`
/// decays outward.
pub fn decaying_branch(p: &ComplexPolynomial, lambda: C64, theta: f64, radius: f64) -> C64 {
    let s = p.eval(C64::from_polar(radius, theta)).sqrt();
    if (lambda * s * C64::from_polar(1.0, theta)).re < 0.0 {
        -s
    } else {
        s
    }
}

/// `int sqrt(P) dz` along the ray of angle `theta` from radius `r_in` to
/// `radius`, with branch `s_far` at the outer end. No turning point lies
/// outside `r_in`, so the branch is continued sample by sample.
fn outer_action(p: &ComplexPolynomial, s_far: C64, theta: f64, r_in: f64, radius: f64) -> C64 {
    const PANELS: usize = 64;
    let (x, w) = gauss_legendre(8);
    let dir = C64::from_polar(1.0, theta);
    let h = (radius - r_in) / PANELS as f64;
    let mut s_prev = s_far;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..PANELS {
        let hi = radius - k as f64 * h;
        let mid = hi - 0.5 * h;
        // walk nodes from the outer end inward to keep the branch continuous
        for i in (0..x.len()).rev() {
            let r = mid + 0.5 * h * x[i];
            let sv = sqrt_near(p.eval(dir * r), s_prev);
            s_prev = sv;
            total += sv * dir * (0.5 * h * w[i]);
        }
    }
    total
}

/// `W = y1 y2' - y1' y2` as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub mantissa: C64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn ratio(&self, other: &ScaledValue) -> C64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// Wronskian of two subdominant solutions as an analytic function of
/// `lambda`. Start points and branches are frozen at `lambda_ref` so the
/// initial data depend holomorphically on `lambda`. The zero-free factor
/// `exp(lambda (J1 + J2))`, with `J` the action over the outer part of each
/// start ray, is divided out to keep the phase slowly varying.
#[derive(Debug, Clone)]
pub struct WronskianFunction {
    p: ComplexPolynomial,
    alphas: AlphaDensities,
    thetas: (f64, f64),
    branches: (C64, C64),
    action: C64,
    radius: f64,
    z_match: C64,
}

impl WronskianFunction {
    /// Sectors are those of `lambda_ref^2 P`; they must not be adjacent.
    pub fn new(
        p: &ComplexPolynomial,
        roots_radius: f64,
        sectors: (usize, usize),
        lambda_ref: C64,
        z_match: C64,
    ) -> Result<Self> {
        let n = p.degree() + 2;
        let (a, b) = sectors;
        if a >= n || b >= n || a == b || (a + 1) % n == b || (b + 1) % n == a {
            return Err(Error::InvalidInput(format!(
                "sectors {a} and {b} must be distinct and non-adjacent"
            )));
        }
        let radius = default_radius(p, roots_radius, lambda_ref);
        let r_in = (1.0 + roots_radius).min(radius);
        let thetas = (sector_center(p, lambda_ref, a), sector_center(p, lambda_ref, b));
        let branches = (
            decaying_branch(p, lambda_ref, thetas.0, radius),
            decaying_branch(p, lambda_ref, thetas.1, radius),
        );
        let action =
            outer_action(p, branches.0, thetas.0, r_in, radius) + outer_action(p, branches.1, thetas.1, r_in, radius);
        Ok(Self {
            p: p.clone(),
            alphas: AlphaDensities::new(p, WKB_ORDER),
            thetas,
            branches,
            action,
            radius,
            z_match,
        })
    }

    pub fn eval(&self, lambda: C64) -> Result<ScaledValue> {
        let (y1, d1, l1, _, _) = subdominant_along(
            &self.p,
            &self.alphas,
            lambda,
            self.branches.0,
            self.thetas.0,
            self.radius,
            self.z_match,
        )?;
        let (y2, d2, l2, _, _) = subdominant_along(
            &self.p,
            &self.alphas,
            lambda,
            self.branches.1,
            self.thetas.1,
            self.radius,
            self.z_match,
        )?;
        let shift = -lambda * self.action;
        Ok(ScaledValue {
            mantissa: (y1 * d2 - d1 * y2) * C64::from_polar(1.0, shift.im),
            log_scale: l1 + l2 + shift.re,
        })
    }
}

/// Search rectangle in the `lambda` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn contains(&self, z: C64, pad: f64) -> bool {
        z.re >= self.re.0 - pad && z.re <= self.re.1 + pad && z.im >= self.im.0 - pad && z.im <= self.im.1 + pad
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re.0, self.im.0),
            C64::new(self.re.1, self.im.0),
            C64::new(self.re.1, self.im.1),
            C64::new(self.re.0, self.im.1),
        ]
    }
}

const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_EDGE_DEPTH: usize = 14;

/// Phase change of `f` along the segment `a -> b`, refined until successive
/// samples differ by less than `pi/4`.
fn phase_change<F: Fn(C64) -> Result<C64>>(f: &F, a: C64, b: C64, fa: C64, fb: C64, depth: usize) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() <= MAX_PHASE_STEP || depth >= MAX_EDGE_DEPTH {
        if d.abs() > MAX_PHASE_STEP {
            return Err(Error::Integration("phase not resolved on cell edge".into()));
        }
        return Ok(d);
    }
    let m = (a + b) * 0.5;
    let fm = f(m)?;
    Ok(phase_change(f, a, m, fa, fm, depth + 1)? + phase_change(f, m, b, fm, fb, depth + 1)?)
}

fn winding<F: Fn(C64) -> Result<C64>>(f: &F, rect: &Rect) -> Result<i64> {
    let c = rect.corners();
    let vals = [f(c[0])?, f(c[1])?, f(c[2])?, f(c[3])?];
    let mut total = 0.0;
    for i in 0..4 {
        let j = (i + 1) % 4;
        // fixed samples before adaptive refinement, dense enough that a
        // full turn cannot hide between two of them
        let samples = ((c[j] - c[i]).norm() / 0.25).ceil().max(8.0) as usize;
        let mut prev = (c[i], vals[i]);
        for k in 1..=samples {
            let z = c[i] + (c[j] - c[i]) * (k as f64 / samples as f64);
            let fz = if k == samples { vals[j] } else { f(z)? };
            total += phase_change(f, prev.0, z, prev.1, fz, 0)?;
            prev = (z, fz);
        }
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 0.1 {
        return Err(Error::Integration(format!("inconsistent winding {w}")));
    }
    Ok(r as i64)
}

/// Zeros of the Wronskian of the solutions subdominant in `sectors` inside
/// `rect`, located by the argument principle on subdivided cells and refined
/// by Newton's method.
pub fn wronskian_eigenvalue_search(
    p: &ComplexPolynomial,
    roots_radius: f64,
    sectors: (usize, usize),
    rect: Rect,
    grid: (usize, usize),
    z_match: C64,
) -> Result<Vec<C64>> {
    let w = WronskianFunction::new(p, roots_radius, sectors, rect.center(), z_match)?;
    let phase = |z: C64| -> Result<C64> {
        let v = w.eval(z)?.mantissa;
        Ok(v / v.norm())
    };
    let (nx, ny) = (grid.0.max(1), grid.1.max(1));
    let dx = (rect.re.1 - rect.re.0) / nx as f64;
    let dy = (rect.im.1 - rect.im.0) / ny as f64;
    let mut stack: Vec<(Rect, usize)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            stack.push((
                Rect {
                    re: (rect.re.0 + i as f64 * dx, rect.re.0 + (i + 1) as f64 * dx),
                    im: (rect.im.0 + j as f64 * dy, rect.im.0 + (j + 1) as f64 * dy),
                },
                0,
            ));
        }
    }
    let mut zeros: Vec<C64> = Vec::new();
    let mut jitter_count = 0usize;
    while let Some((cell, depth)) = stack.pop() {
        if depth > 40 {
            return Err(Error::Integration("cell subdivision did not isolate zeros".into()));
        }
        let count = match winding(&phase, &cell) {
            Ok(c) => c,
            Err(_) => {
                // zero on or near the boundary: shift the cell slightly and retry
                jitter_count += 1;
                if jitter_count > 64 {
                    return Err(Error::Integration("winding inconsistency persists after jitter".into()));
                }
                let shift = 0.013 * (cell.re.1 - cell.re.0) * if jitter_count % 2 == 0 { 1.0 } else { -1.0 };
                stack.push((
                    Rect {
                        re: (cell.re.0 + shift, cell.re.1 + shift),
                        im: cell.im,
                    },
                    depth + 1,
                ));
                continue;
            }
        };
        if count < 0 {
            return Err(Error::Integration(format!("negative winding {count} in cell")));
        }
        if count == 0 {
            continue;
        }
        if count == 1 {
            if let Some(z) = newton(&w, cell.center(), &cell)? {
                if !zeros.iter().any(|q| (q - z).norm() < 1e-8 * (1.0 + z.norm())) {
                    zeros.push(z);
                }
                continue;
            }
        }
        // split the longer side at a slightly off-centre ratio
        let ratio = 0.5 + 0.037 * ((depth % 3) as f64 - 1.0);
        let (a, b) = if cell.re.1 - cell.re.0 >= cell.im.1 - cell.im.0 {
            let m = cell.re.0 + ratio * (cell.re.1 - cell.re.0);
            (
                Rect {
                    re: (cell.re.0, m),
                    im: cell.im,
                },
                Rect {
                    re: (m, cell.re.1),
                    im: cell.im,
                },
            )
        } else {
            let m = cell.im.0 + ratio * (cell.im.1 - cell.im.0);
            (
                Rect {
                    re: cell.re,
                    im: (cell.im.0, m),
                },
                Rect {
                    re: cell.re,
                    im: (m, cell.im.1),
                },
            )
        };
        stack.push((a, depth + 1));
        stack.push((b, depth + 1));
    }
    zeros.retain(|z| rect.contains(*z, 0.0));
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(zeros)
}

/// Newton's method with a central-difference logarithmic derivative.
/// Returns `None` if the iteration leaves the (slightly padded) cell.
fn newton(w: &WronskianFunction, start: C64, cell: &Rect) -> Result<Option<C64>> {
    let pad = 0.25 * ((cell.re.1 - cell.re.0).max(cell.im.1 - cell.im.0));
    let mut z = start;
    for _ in 0..60 {
        let h = 1e-6 * (1.0 + z.norm());
        let f0 = w.eval(z)?;
        let fp = w.eval(z + h)?;
        let fm = w.eval(z - h)?;
        let dlog = (fp.ratio(&f0) - fm.ratio(&f0)) / (2.0 * h);
        if dlog.norm() == 0.0 || !dlog.is_finite() {
            return Ok(None);
        }
        let step = -1.0 / dlog;
        z += step;
        if !cell.contains(z, pad) {
            return Ok(None);
        }
        if step.norm() <= 1e-10 * (1.0 + z.norm()) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}
