//! One function per subcommand. Each returns a report; writing files and
//! choosing the exit status is left to `main`.

use serde::Serialize;
use serde_json::{json, Value};

use stokes_core::config::RunConfig;
use stokes_core::geodesics::{enumerate_short_geodesics, GeodesicOptions};
use stokes_core::quad_diff::QuadraticDifferential;
use stokes_core::spectrum::{
    accumulation_rays, quantization_data, solve_quantization, wronskian_eigenvalue_search, Rect,
};
use stokes_core::stokes_tracer::{admissible_domains, build_stokes_graph, chord_diagram, TraceOptions};
use stokes_core::strips::{realize_count, visibility};
use stokes_core::{ComplexPolynomial, Result, C64};

use crate::svg;

/// What a command produced. `json` is the `result` member of the envelope.
pub struct Report {
    pub stem: &'static str,
    pub json: Value,
    pub svg: Option<String>,
    pub csv: Option<String>,
    /// Some traces were truncated; outputs are partial.
    pub truncated: bool,
}

impl Report {
    fn new(stem: &'static str, json: Value) -> Self {
        Self {
            stem,
            json,
            svg: None,
            csv: None,
            truncated: false,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn differential(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<QuadraticDifferential> {
    let qd = QuadraticDifferential::from_config(p.clone(), cfg)?;
    Ok(if t == 0.0 { qd } else { qd.rotated(t) })
}

pub fn roots(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<Report> {
    let q = p.rotate(t);
    let tps = q.roots(cfg.root_tol)?;
    Ok(Report::new(
        "roots",
        json!({
            "degree": q.degree(),
            "turning_points": tps.points,
            "sectors": q.stokes_sectors(),
        }),
    ))
}

pub fn stokes_graph(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<Report> {
    let qd = differential(p, t, cfg)?;
    let opts = TraceOptions::new(qd.turning_points(), cfg);
    let g = build_stokes_graph(&qd, &opts)?;
    let domains = if g.incomplete {
        Value::Null
    } else {
        match admissible_domains(&g) {
            Ok(d) => to_value(&d),
            Err(e) => json!({ "error": e.to_string() }),
        }
    };
    let dump = g.decimated(cfg.polyline_tolerance * opts.scale);
    let mut report = Report::new(
        "stokes_graph",
        json!({
            "graph": dump,
            "finite_edge_count": g.finite_edges.len(),
            "escaping_edge_count": g.escaping_edges().count(),
            "truncated_count": g.truncated_count(),
            "max_drift_ratio": g.max_drift_ratio(),
            "domains": domains,
        }),
    );
    report.svg = Some(svg::stokes_graph(&dump, &[]));
    report.truncated = g.incomplete;
    Ok(report)
}

pub fn geodesics(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<Report> {
    let qd = differential(p, t, cfg)?;
    let opts = GeodesicOptions::new(qd.turning_points(), cfg);
    let found = enumerate_short_geodesics(&qd, &opts)?;
    let g = build_stokes_graph(&qd, &opts.trace)?;
    let overlays: Vec<Vec<C64>> = found.geodesics.iter().map(|g| g.polyline.clone()).collect();
    let mut report = Report::new(
        "geodesics",
        json!({
            "count": found.geodesics.len(),
            "report": found,
        }),
    );
    report.svg = Some(svg::stokes_graph(
        &g.decimated(cfg.polyline_tolerance * opts.trace.scale),
        &overlays,
    ));
    Ok(report)
}

pub fn rays(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<Report> {
    let qd = differential(p, t, cfg)?;
    let opts = GeodesicOptions::new(qd.turning_points(), cfg);
    let found = enumerate_short_geodesics(&qd, &opts)?;
    let rays = accumulation_rays(&qd, &found.geodesics)?;
    let list: Vec<Value> = rays
        .iter()
        .map(|r| {
            json!({
                "angle": r.angle,
                "pair": r.geodesic.pair,
                "geodesic_period": r.geodesic.period,
                "loop_period": r.loop_period,
            })
        })
        .collect();
    Ok(Report::new(
        "rays",
        json!({
            "count": rays.len(),
            "rays": list,
            "warnings": found.warnings,
        }),
    ))
}

/// Optional Wronskian search requested on the command line.
pub struct Search {
    pub rect: Rect,
    pub sectors: Option<(usize, usize)>,
}

pub fn eigenvalues(
    p: &ComplexPolynomial,
    t: f64,
    cfg: &RunConfig,
    n: (u32, u32),
    order: usize,
    search: Option<Search>,
) -> Result<Report> {
    let qd = differential(p, t, cfg)?;
    let opts = GeodesicOptions::new(qd.turning_points(), cfg);
    let found = enumerate_short_geodesics(&qd, &opts)?;
    let rays = accumulation_rays(&qd, &found.geodesics)?;
    let mut list = Vec::new();
    let mut csv = String::from("ray,n,re,im\n");
    for (i, ray) in rays.iter().enumerate() {
        let data = quantization_data(&qd, ray, order)?;
        let estimates: Vec<_> = (n.0..=n.1)
            .map(|k| solve_quantization(&data, ray.angle, k, order))
            .collect();
        for e in &estimates {
            csv.push_str(&format!("{i},{},{},{}\n", e.n, e.value.re, e.value.im));
        }
        list.push(json!({
            "angle": ray.angle,
            "pair": ray.geodesic.pair,
            "loop_period": data.period,
            "alpha_integrals": data.alpha,
            "estimates": estimates,
        }));
    }
    let zeros = match search {
        None => Value::Null,
        Some(s) => {
            let q = qd.polynomial();
            let n_sectors = q.degree() + 2;
            let sectors = s.sectors.unwrap_or((0, n_sectors / 2));
            let z = wronskian_eigenvalue_search(
                q,
                qd.turning_points().max_modulus(),
                sectors,
                s.rect,
                (((s.rect.re.1 - s.rect.re.0).ceil() as usize).max(1), 1),
                C64::new(0.0, 0.0),
            )?;
            json!({ "sectors": sectors, "rect": s.rect, "zeros": z })
        }
    };
    let mut report = Report::new(
        "eigenvalues",
        json!({
            "order": order,
            "n_range": [n.0, n.1],
            "rays": list,
            "wronskian": zeros,
        }),
    );
    report.csv = Some(csv);
    Ok(report)
}

pub fn strip_realize(d: usize, k: usize) -> Result<Report> {
    let strip = realize_count(d, k)?;
    let vis = visibility(&strip);
    let mut report = Report::new(
        "strip",
        json!({
            "strip": strip,
            "visible_pairs": vis.pairs,
            "count": vis.pairs.len(),
            "ties": vis.ties,
        }),
    );
    report.svg = Some(svg::chopped_strip(&strip, &vis.pairs));
    Ok(report)
}

pub fn chords(p: &ComplexPolynomial, t: f64, cfg: &RunConfig) -> Result<Report> {
    let qd = differential(p, t, cfg)?;
    let opts = TraceOptions::new(qd.turning_points(), cfg);
    let (stokes, anti) = chord_diagram(&qd, &opts)?;
    Ok(Report::new("chords", json!({ "stokes": stokes, "anti_stokes": anti })))
}
