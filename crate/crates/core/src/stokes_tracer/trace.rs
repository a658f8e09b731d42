use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ode::{dp5_step, step_factor};
use crate::polynomial::{ComplexPolynomial, TurningPoint, TurningPointSet, C64};
use crate::quad_diff::{sqrt_near, QuadraticDifferential};
use crate::quadrature::gauss_legendre;

/// Stopping rules and step control for trajectory tracing, in absolute units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub delta_hit: f64,
    pub r_escape: f64,
    pub l_max: f64,
    /// Local error tolerance of the predictor step.
    pub step_tol: f64,
    /// Length scale `D = diam + 1` of the root set.
    pub scale: f64,
}

impl TraceOptions {
    pub fn new(turning: &TurningPointSet, cfg: &RunConfig) -> Self {
        let scale = turning.diameter() + 1.0;
        Self {
            delta_hit: cfg.delta_hit * scale,
            r_escape: cfg.r_escape_multiplier * (1.0 + turning.max_modulus()),
            l_max: cfg.l_max_multiplier * scale,
            step_tol: 1e-9 * scale,
            scale,
        }
    }

    pub fn with_r_escape(mut self, r: f64) -> Self {
        self.r_escape = r;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryFate {
    HitTurningPoint { target: usize, distance: f64 },
    EscapedToRay { ray: usize },
    Truncated { arc_length: f64 },
}

impl TrajectoryFate {
    pub fn hit_target(&self) -> Option<usize> {
        match *self {
            Self::HitTurningPoint { target, .. } => Some(target),
            _ => None,
        }
    }

    pub fn escape_ray(&self) -> Option<usize> {
        match *self {
            Self::EscapedToRay { ray } => Some(ray),
            _ => None,
        }
    }
}

/// A traced Stokes line: the level set `Re xi = Re xi(origin)` leaving a
/// turning point in one of its emanating directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub origin: usize,
    pub direction: f64,
    pub polyline: Vec<C64>,
    /// `xi(z) = int_origin^z sqrt(P)` at each polyline vertex.
    pub xi: Vec<C64>,
    /// Branch of `sqrt(P)` at the last vertex.
    pub final_sqrt: C64,
    pub fate: TrajectoryFate,
    pub arc_length: f64,
    /// `max |Re xi|` over the vertices.
    pub max_drift: f64,
    /// Polar angle where the trajectory crosses `|z| = r_escape`.
    pub exit_angle: Option<f64>,
}

impl Trajectory {
    pub fn end(&self) -> C64 {
        *self.polyline.last().unwrap()
    }

    pub fn xi_end(&self) -> C64 {
        *self.xi.last().unwrap()
    }
}

/// The `m+2` directions in which Stokes lines leave a turning point of
/// multiplicity `m`: `(pi (2k+1) - arg c)/(m+2)` with `c = P^(m)(z0)/m!`.
pub fn emanating_directions(p: &ComplexPolynomial, tp: &TurningPoint) -> Vec<f64> {
    let m = tp.multiplicity;
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    let c = p.eval_nth_derivative(m, tp.location) / fact;
    let arg = c.arg();
    (0..m + 2)
        .map(|k| (PI * (2 * k + 1) as f64 - arg) / (m + 2) as f64)
        .collect()
}

/// `int sqrt(P)` along the chord `z0 -> z1` by 8-point Gauss–Legendre, with
/// the branch interpolated between the endpoint values `s0`, `s1`.
pub(crate) fn chord_integral(p: &ComplexPolynomial, z0: C64, z1: C64, s0: C64, s1: C64) -> C64 {
    let (x, w) = gauss_legendre(8);
    let half = (z1 - z0) * 0.5;
    let mid = (z0 + z1) * 0.5;
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let t = 0.5 * (1.0 + xi);
        let reference = s0 * (1.0 - t) + s1 * t;
        acc += sqrt_near(p.eval(mid + half * xi), reference) * *wi;
    }
    acc * half
}

fn field(p: &ComplexPolynomial, z: C64, reference: C64) -> (C64, C64) {
    let s = sqrt_near(p.eval(z), reference);
    (C64::new(0.0, 1.0) * s.conj() / s.norm(), s)
}

struct Step {
    z: C64,
    s: C64,
    dxi: C64,
    err: f64,
}

/// Predictor step of length `h` followed by Newton correction back onto the
/// level set `Re xi = 0`.
fn corrected_step(p: &ComplexPolynomial, z: C64, s: C64, xi: C64, h: f64) -> Step {
    let (y, err) = dp5_step(|_, y: &[C64; 1]| [field(p, y[0], s).0], 0.0, &[z], h);
    let mut zn = y[0];
    let mut sn = sqrt_near(p.eval(zn), s);
    let mut dxi = chord_integral(p, z, zn, s, sn);
    for _ in 0..4 {
        let r = (xi + dxi).re;
        if r.abs() <= 1e-15 * (1.0 + xi.norm()) || sn.norm() == 0.0 {
            break;
        }
        zn -= sn.conj() * (r / sn.norm_sqr());
        sn = sqrt_near(p.eval(zn), s);
        dxi = chord_integral(p, z, zn, s, sn);
    }
    Step {
        z: zn,
        s: sn,
        dxi,
        err: err[0],
    }
}

/// Traces the Stokes line from turning point `root` leaving in direction
/// `direction` (one of [`emanating_directions`]).
///
/// The trajectory follows `dz/ds = i conj(sqrt P)/|sqrt P|`, with each
/// predictor step projected back onto `Re xi = 0`.
pub fn trace_stokes_line(
    qd: &QuadraticDifferential,
    root: usize,
    direction: f64,
    opts: &TraceOptions,
) -> Result<Trajectory> {
    let p = qd.polynomial();
    let tps = qd.turning_points();
    let z0 = tps.points[root].location;
    let others: Vec<(usize, C64)> = tps
        .points
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != root)
        .map(|(k, t)| (k, t.location))
        .collect();
    let nearest_other = |z: C64| -> (usize, f64) {
        others
            .iter()
            .map(|&(k, w)| (k, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((usize::MAX, f64::INFINITY))
    };
    let sep = nearest_other(z0).1;
    let rho = (1e-3 * opts.scale).min(0.05 * sep);
    let hint = C64::new(0.0, 1.0) * C64::from_polar(1.0, -direction);

    let mut z = z0 + C64::from_polar(rho, direction);
    let mut s = sqrt_near(p.eval(z), hint);
    let mut xi = qd.canonical_parameter_integral(&[z0, z], hint)?;
    for _ in 0..4 {
        let r = xi.re;
        if r.abs() <= 1e-15 * (1.0 + xi.norm()) {
            break;
        }
        let zc = z - s.conj() * (r / s.norm_sqr());
        let sc = sqrt_near(p.eval(zc), s);
        xi += chord_integral(p, z, zc, s, sc);
        z = zc;
        s = sc;
    }

    let mut polyline = vec![z0, z];
    let mut xis = vec![C64::new(0.0, 0.0), xi];
    let mut arc = (z - z0).norm();
    let mut max_drift = xi.re.abs();
    let mut h = rho / 4.0;
    let min_h = 1e-15 * opts.scale;
    // (target, arc length, squared distance) of the last few vertices
    let mut approach: Vec<(usize, f64, f64)> = Vec::new();

    let finish = |polyline: Vec<C64>, xis: Vec<C64>, s: C64, fate, arc, drift, exit| Trajectory {
        origin: root,
        direction,
        polyline,
        xi: xis,
        final_sqrt: s,
        fate,
        arc_length: arc,
        max_drift: drift,
        exit_angle: exit,
    };

    loop {
        if arc > opts.l_max {
            return Ok(finish(
                polyline,
                xis,
                s,
                TrajectoryFate::Truncated { arc_length: arc },
                arc,
                max_drift,
                None,
            ));
        }
        let (_, d_near) = nearest_other(z);
        let clearance = d_near.min((z - z0).norm());
        let h_cap = (clearance / 4.0).min(0.1 * opts.scale.max(z.norm()));
        h = h.min(h_cap);
        let step = corrected_step(p, z, s, xi, h);
        if step.err > opts.step_tol {
            h *= step_factor(step.err / opts.step_tol).min(0.9);
            if h < min_h {
                return Err(Error::Trace {
                    last: z,
                    reason: "step size underflow".into(),
                });
            }
            continue;
        }
        let outward = (z.conj() * (step.z - z)).re > 0.0;
        if step.z.norm() > opts.r_escape && outward {
            // bisect the step length for the crossing of |z| = r_escape
            let (mut lo, mut hi) = (0.0, h);
            let mut best = step;
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                let trial = corrected_step(p, z, s, xi, mid);
                if trial.z.norm() > opts.r_escape {
                    hi = mid;
                    best = trial;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-13 * opts.r_escape {
                    break;
                }
            }
            arc += (best.z - z).norm();
            xi += best.dxi;
            max_drift = max_drift.max(xi.re.abs());
            polyline.push(best.z);
            xis.push(xi);
            let exit = best.z.arg();
            let ray = p.stokes_sectors().nearest_ray(exit);
            return Ok(finish(
                polyline,
                xis,
                best.s,
                TrajectoryFate::EscapedToRay { ray },
                arc,
                max_drift,
                Some(exit),
            ));
        }

        arc += (step.z - z).norm();
        z = step.z;
        s = step.s;
        xi += step.dxi;
        max_drift = max_drift.max(xi.re.abs());
        polyline.push(z);
        xis.push(xi);

        let (target, dist) = nearest_other(z);
        if dist <= opts.delta_hit {
            return Ok(finish(
                polyline,
                xis,
                s,
                TrajectoryFate::HitTurningPoint { target, distance: dist },
                arc,
                max_drift,
                None,
            ));
        }
        approach.push((target, arc, dist * dist));
        if approach.len() > 3 {
            approach.remove(0);
        }
        if let [a, b, c] = approach[..] {
            if a.0 == b.0 && b.0 == c.0 && b.2 < a.2 && b.2 < c.2 {
                if let Some(m) = parabola_min((a.1, a.2), (b.1, b.2), (c.1, c.2)) {
                    if m <= opts.delta_hit * opts.delta_hit {
                        polyline.pop();
                        xis.pop();
                        return Ok(finish(
                            polyline,
                            xis,
                            s,
                            TrajectoryFate::HitTurningPoint {
                                target: b.0,
                                distance: b.2.sqrt(),
                            },
                            b.1,
                            max_drift,
                            None,
                        ));
                    }
                }
            }
        }

        h *= step_factor(step.err / opts.step_tol);
    }
}

/// Minimum value of the parabola through three points, when it opens upward.
fn parabola_min(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if curv <= 0.0 {
        return None;
    }
    // y = b.1 + slope (x - b.0) + curv (x - b.0)^2 at the vertex
    let slope = d1 + curv * (b.0 - a.0);
    Some((b.1 - slope * slope / (4.0 * curv)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(coeffs: &[f64]) -> (QuadraticDifferential, TraceOptions) {
        let qd = QuadraticDifferential::new(ComplexPolynomial::from_real(coeffs).unwrap()).unwrap();
        let opts = TraceOptions::new(qd.turning_points(), &RunConfig::default());
        (qd, opts)
    }

    fn approx_set(mut got: Vec<f64>, want: &[f64]) {
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn emanating_direction_examples() {
        let p = ComplexPolynomial::from_real(&[1.0, 0.0, -1.0]).unwrap();
        let tp = TurningPoint {
            location: C64::new(1.0, 0.0),
            multiplicity: 1,
        };
        approx_set(emanating_directions(&p, &tp), &[PI / 3.0, PI, 5.0 * PI / 3.0]);
        let p = ComplexPolynomial::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let tp = TurningPoint {
            location: C64::new(0.0, 0.0),
            multiplicity: 2,
        };
        approx_set(
            emanating_directions(&p, &tp),
            &[PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0],
        );
    }

    #[test]
    fn emanating_directions_keep_re_xi_small_to_second_order() {
        // Oracle: xi along the ray z0 + r e^{i theta}, integrated exactly for
        // P = z^2 - 1 near z0 = 1: Re xi / |xi| -> 0 linearly in r.
        let (qd, _) = setup(&[1.0, 0.0, -1.0]);
        let tp = qd.turning_points().points[1];
        assert!((tp.location - C64::new(1.0, 0.0)).norm() < 1e-12);
        for theta in emanating_directions(qd.polynomial(), &tp) {
            let ratio = |r: f64| {
                let z = tp.location + C64::from_polar(r, theta);
                let xi = qd
                    .canonical_parameter_integral(&[tp.location, z], C64::new(1.0, 0.0))
                    .unwrap();
                xi.re.abs() / xi.norm()
            };
            assert!(ratio(1e-3) < 1e-3);
            assert!(ratio(1e-4) < 0.2 * ratio(1e-3) + 1e-12);
        }
    }

    #[test]
    fn real_segment_is_a_stokes_line() {
        let (qd, opts) = setup(&[1.0, 0.0, -1.0]);
        let root = qd.turning_points().nearest(C64::new(1.0, 0.0)).unwrap().0;
        let tr = trace_stokes_line(&qd, root, PI, &opts).unwrap();
        let target = qd.turning_points().nearest(C64::new(-1.0, 0.0)).unwrap().0;
        assert_eq!(tr.fate.hit_target(), Some(target));
        assert!(tr.polyline.iter().all(|z| z.im.abs() < 1e-6));
        assert!(tr.max_drift < 1e-10);
    }

    #[test]
    fn oblique_line_escapes_near_a_ray() {
        // the exit angle approaches the ray like log R / R^2, so R is enlarged
        let (qd, opts) = setup(&[1.0, 0.0, -1.0]);
        let mut opts = opts.with_r_escape(200.0);
        opts.l_max = 1000.0;
        let root = qd.turning_points().nearest(C64::new(1.0, 0.0)).unwrap().0;
        let tr = trace_stokes_line(&qd, root, PI / 3.0, &opts).unwrap();
        let ray = tr.fate.escape_ray().expect("escapes");
        let rays = qd.polynomial().stokes_sectors().ray_angles;
        let exit = tr.exit_angle.unwrap();
        assert!(
            crate::polynomial::angle_diff_mod(exit, rays[ray], 2.0 * PI).abs() < 1e-3,
            "{exit}"
        );
    }

    #[test]
    fn airy_lines_escape_along_rays() {
        let (qd, opts) = setup(&[1.0, 0.0]);
        let rays = qd.polynomial().stokes_sectors().ray_angles;
        let tp = qd.turning_points().points[0];
        for (k, theta) in emanating_directions(qd.polynomial(), &tp).into_iter().enumerate() {
            let tr = trace_stokes_line(&qd, 0, theta, &opts).unwrap();
            assert_eq!(tr.fate, TrajectoryFate::EscapedToRay { ray: k });
            // for P = z the Stokes lines are exact rays
            let exit = tr.exit_angle.unwrap();
            assert!(crate::polynomial::angle_diff_mod(exit, rays[k], 2.0 * PI).abs() < 1e-8);
            assert!(tr.max_drift < 1e-9 * (1.0 + tr.arc_length));
        }
    }

    #[test]
    fn parabola_vertex() {
        let f = |x: f64| x * x - 4.0 * x + 5.0;
        let m = parabola_min((0.0, f(0.0)), (1.0, f(1.0)), (3.0, f(3.0))).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        assert!(parabola_min((0.0, 0.0), (1.0, 1.0), (2.0, 0.0)).is_none());
    }
}
