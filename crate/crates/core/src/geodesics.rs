//! Short geodesics of `|P| |dz|^2`, found as short Stokes lines of the
//! rotation family `P_t = exp(2it) P`, and the Teichmüller angle identity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{reduce_mod, C64};
use crate::quad_diff::{normalize_period, Period, QuadraticDifferential};
use crate::stokes_tracer::{trace_stokes_line, TraceOptions, Trajectory, TrajectoryFate};

/// Largest half-width of the bisection bracket in `t`.
const MAX_BRACKET: f64 = PI / 8.0;
const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    pub trace: TraceOptions,
    /// Initial half-width of the bisection bracket.
    pub eps_t: f64,
}

impl GeodesicOptions {
    pub fn new(turning: &crate::polynomial::TurningPointSet, cfg: &crate::config::RunConfig) -> Self {
        Self {
            trace: TraceOptions::new(turning, cfg),
            eps_t: cfg.eps_t,
        }
    }
}

/// A pair of turning points and the rotation angle at which the straight
/// (or minimally detoured) period becomes purely imaginary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub pair: (usize, usize),
    pub t: f64,
    pub period: Period,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortGeodesic {
    pub pair: (usize, usize),
    pub t_star: f64,
    /// `int_a^b sqrt(P)` along the geodesic, with `Im >= 0`.
    pub period: C64,
    pub polyline: Vec<C64>,
    pub verified: bool,
    /// Number of bisection steps used (0 when the candidate angle hit directly).
    pub bisection_steps: usize,
    pub max_drift: f64,
    pub arc_length: f64,
}

/// What a trace from the first turning point does, with rays labelled
/// continuously in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FateLabel {
    Hit { target: usize },
    Escape { ray: usize },
    Truncated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Refutation {
    pub pair: (usize, usize),
    pub t: f64,
    pub fates: Vec<FateLabel>,
    /// `(t_lo, fate_lo, t_hi, fate_hi)` of the last bracket examined.
    pub flanking: Option<(f64, FateLabel, f64, FateLabel)>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verification {
    Verified(ShortGeodesic),
    Refuted(Refutation),
}

/// `t = (pi/2 - arg w_ab) mod pi` for every pair of distinct turning points.
pub fn candidate_angles(qd: &QuadraticDifferential) -> Result<Vec<Candidate>> {
    Ok(qd
        .pairwise_periods()?
        .into_iter()
        .map(|period| Candidate {
            pair: period.pair,
            t: reduce_mod(PI / 2.0 - period.value.arg(), PI),
            period,
        })
        .collect())
}

struct Family<'a> {
    qd: &'a QuadraticDifferential,
    opts: GeodesicOptions,
    a: usize,
    b: usize,
    /// `arg` of the leading local coefficient at `a` for `t = 0`.
    local_arg: f64,
    m: usize,
}

impl<'a> Family<'a> {
    fn new(qd: &'a QuadraticDifferential, opts: GeodesicOptions, a: usize, b: usize) -> Self {
        let tp = qd.turning_points().points[a];
        let m = tp.multiplicity;
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        let c = qd.polynomial().eval_nth_derivative(m, tp.location) / fact;
        Self {
            qd,
            opts,
            a,
            b,
            local_arg: c.arg(),
            m,
        }
    }

    /// Emanating direction `k` of `P_t` at `a`, continuous in `t`.
    fn direction(&self, k: usize, t: f64) -> f64 {
        (PI * (2 * k + 1) as f64 - self.local_arg - 2.0 * t) / (self.m + 2) as f64
    }

    fn label(&self, tr: &Trajectory, t: f64) -> FateLabel {
        match tr.fate {
            TrajectoryFate::HitTurningPoint { target, .. } => FateLabel::Hit { target },
            TrajectoryFate::Truncated { .. } => FateLabel::Truncated,
            TrajectoryFate::EscapedToRay { .. } => {
                let n = (self.qd.polynomial().degree() + 2) as f64;
                let phi0 = self.qd.polynomial().phi0();
                let theta = tr.exit_angle.unwrap_or(0.0);
                let k = ((n * theta + phi0 + 2.0 * t) / (2.0 * PI) - 0.5).round();
                FateLabel::Escape {
                    ray: k.rem_euclid(n) as usize,
                }
            }
        }
    }

    fn trace(&self, k: usize, t: f64) -> Result<Trajectory> {
        let q = self.qd.rotated(t);
        trace_stokes_line(&q, self.a, self.direction(k, t), &self.opts.trace)
    }

    fn closest_approach(&self, tr: &Trajectory) -> f64 {
        let zb = self.qd.turning_points().points[self.b].location;
        tr.polyline
            .iter()
            .map(|z| (z - zb).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Turns a trace from `a` that hit `b` into a geodesic.
    fn geodesic(&self, tr: Trajectory, t: f64, steps: usize) -> Result<ShortGeodesic> {
        let tps = self.qd.turning_points();
        let zb = tps.points[self.b].location;
        for (k, tp) in tps.points.iter().enumerate() {
            if k == self.a || k == self.b {
                continue;
            }
            let gap = tr
                .polyline
                .iter()
                .map(|z| (z - tp.location).norm())
                .fold(f64::INFINITY, f64::min);
            if gap <= self.opts.trace.delta_hit {
                return Err(Error::NonGeneric(format!(
                    "geodesic between {} and {} passes through turning point {k}",
                    self.a, self.b
                )));
            }
        }
        let q = self.qd.rotated(t);
        let tail = q.canonical_parameter_integral(&[tr.end(), zb], tr.final_sqrt)?;
        let w = normalize_period((tr.xi_end() + tail) * C64::from_polar(1.0, -t));
        let mut polyline = tr.polyline;
        polyline.push(zb);
        Ok(ShortGeodesic {
            pair: (self.a.min(self.b), self.a.max(self.b)),
            t_star: reduce_mod(PI / 2.0 - w.arg(), PI),
            period: w,
            polyline,
            verified: true,
            bisection_steps: steps,
            max_drift: tr.max_drift,
            arc_length: tr.arc_length,
        })
    }
}

/// Checks whether `P_t` has a short Stokes line from `pair.0` to `pair.1`.
///
/// All directions at `pair.0` are traced at `t`. Without a direct hit, the
/// trace passing closest to `pair.1` is followed in `t`: its continuously
/// labelled fate is piecewise constant and jumps exactly where a short line
/// appears, so the jump is bracketed and bisected.
pub fn verify_geodesic(
    qd: &QuadraticDifferential,
    pair: (usize, usize),
    t: f64,
    opts: &GeodesicOptions,
) -> Result<Verification> {
    let (a, b) = pair;
    let n = qd.turning_points().len();
    if a >= n || b >= n || a == b {
        return Err(Error::InvalidInput(format!("invalid turning point pair ({a}, {b})")));
    }
    let fam = Family::new(qd, *opts, a, b);
    let traces: Vec<Trajectory> = (0..fam.m + 2).map(|k| fam.trace(k, t)).collect::<Result<_>>()?;
    let fates: Vec<FateLabel> = traces.iter().map(|tr| fam.label(tr, t)).collect();
    if let Some(k) = fates.iter().position(|f| *f == FateLabel::Hit { target: b }) {
        let tr = traces.into_iter().nth(k).unwrap();
        return Ok(Verification::Verified(fam.geodesic(tr, t, 0)?));
    }
    if let Some(FateLabel::Hit { target }) = fates.iter().find(|f| matches!(f, FateLabel::Hit { .. })) {
        return Err(Error::NonGeneric(format!(
            "at t = {t} a Stokes line from {a} hits turning point {target}"
        )));
    }
    let k = (0..traces.len())
        .min_by(|&i, &j| {
            fam.closest_approach(&traces[i])
                .total_cmp(&fam.closest_approach(&traces[j]))
        })
        .unwrap();

    let refute = |flanking, reason: &str| {
        Ok(Verification::Refuted(Refutation {
            pair,
            t,
            fates: fates.clone(),
            flanking,
            reason: reason.into(),
        }))
    };

    let mut eps = opts.eps_t;
    let bracket = loop {
        let (lo, hi) = (t - eps, t + eps);
        let (f_lo, f_hi) = (fam.label(&fam.trace(k, lo)?, lo), fam.label(&fam.trace(k, hi)?, hi));
        for (tt, f) in [(lo, f_lo), (hi, f_hi)] {
            if f == (FateLabel::Hit { target: b }) {
                let tr = fam.trace(k, tt)?;
                return Ok(Verification::Verified(fam.geodesic(tr, tt, 0)?));
            }
        }
        if f_lo != f_hi {
            break (lo, f_lo, hi, f_hi);
        }
        if eps >= MAX_BRACKET {
            return refute(Some((lo, f_lo, hi, f_hi)), "no fate transition within the bracket");
        }
        eps = (eps * 4.0).min(MAX_BRACKET);
    };

    let (mut lo, mut f_lo, mut hi, mut f_hi) = bracket;
    for step in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let tr = fam.trace(k, mid)?;
        let f = fam.label(&tr, mid);
        match f {
            FateLabel::Hit { target } if target == b => {
                return Ok(Verification::Verified(fam.geodesic(tr, mid, step)?));
            }
            FateLabel::Hit { .. } => {
                return refute(
                    Some((lo, f_lo, hi, f_hi)),
                    "transition is a connection to another turning point",
                );
            }
            _ => {}
        }
        if f == f_lo {
            lo = mid;
            f_lo = f;
        } else if f == f_hi {
            hi = mid;
            f_hi = f;
        } else {
            // three distinct fates: keep the half adjacent to the low side
            hi = mid;
            f_hi = f;
        }
    }
    refute(
        Some((lo, f_lo, hi, f_hi)),
        "bisection did not reach a short Stokes line",
    )
}

/// Outcome of enumerating all pairs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GeodesicReport {
    pub geodesics: Vec<ShortGeodesic>,
    pub refutations: Vec<Refutation>,
    /// Pairs whose verification raised an error.
    pub errors: Vec<((usize, usize), String)>,
    pub warnings: Vec<String>,
}

/// Candidate generation followed by verification of every pair. Errors are
/// recorded per pair; the other pairs still run.
pub fn enumerate_short_geodesics(qd: &QuadraticDifferential, opts: &GeodesicOptions) -> Result<GeodesicReport> {
    if !qd.turning_points().all_simple() {
        return Err(Error::Domain("short geodesics need simple turning points".into()));
    }
    let mut report = GeodesicReport::default();
    for cand in candidate_angles(qd)? {
        let pair = cand.pair;
        if report.geodesics.iter().any(|g| g.pair == pair) {
            continue;
        }
        match verify_geodesic(qd, pair, cand.t, opts) {
            Ok(Verification::Verified(g)) => {
                let w = cand.period.value;
                if (g.period - w).norm().min((g.period + w).norm()) > 1e-6 * w.norm() {
                    report.warnings.push(format!(
                        "pair {pair:?}: verified geodesic is not homotopic to the straight period path"
                    ));
                }
                report.geodesics.push(g);
            }
            Ok(Verification::Refuted(r)) => report.refutations.push(r),
            Err(e) => report.errors.push((pair, e.to_string())),
        }
    }
    report
        .geodesics
        .sort_by(|x, y| x.t_star.total_cmp(&y.t_star).then(x.pair.cmp(&y.pair)));
    for w in report.geodesics.windows(2) {
        if (w[1].t_star - w[0].t_star).abs() < 1e-8 {
            report.warnings.push(format!(
                "pairs {:?} and {:?} connect at the same angle {}",
                w[0].pair, w[1].pair, w[0].t_star
            ));
        }
    }
    Ok(report)
}

/// Number of verified short geodesics; fails if any pair was non-generic.
pub fn count_short_geodesics(qd: &QuadraticDifferential, opts: &GeodesicOptions) -> Result<usize> {
    let report = enumerate_short_geodesics(qd, opts)?;
    if let Some((pair, msg)) = report.errors.first() {
        return Err(Error::NonGeneric(format!("pair {pair:?}: {msg}")));
    }
    Ok(report.geodesics.len())
}

/// A closed curve of finite geodesics: corner orders `n_j` with interior
/// angles `theta_j`, and the orders `n_i` of singular points inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiPolygon {
    pub vertices: Vec<(i32, f64)>,
    pub interior: Vec<i32>,
}

impl PsiPolygon {
    pub fn new(vertices: Vec<(i32, f64)>, interior: Vec<i32>) -> Result<Self> {
        for &(n, theta) in &vertices {
            if n < -1 || !(0.0..=2.0 * PI).contains(&theta) {
                return Err(Error::InvalidInput(format!("bad polygon vertex ({n}, {theta})")));
            }
        }
        Ok(Self { vertices, interior })
    }
}

/// `sum_j (1 - (n_j + 2) theta_j / (2 pi)) - (2 + sum_i n_i)`, which
/// vanishes for a genuine geodesic polygon.
pub fn teichmuller_defect(poly: &PsiPolygon) -> f64 {
    let corners: f64 = poly
        .vertices
        .iter()
        .map(|&(n, theta)| 1.0 - (n as f64 + 2.0) * theta / (2.0 * PI))
        .sum();
    let inside: i32 = poly.interior.iter().sum();
    corners - (2.0 + inside as f64)
}
