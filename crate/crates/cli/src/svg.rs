//! Plain SVG rendering of Stokes graphs, geodesics and chopped strips.

use std::fmt::Write;

use stokes_core::stokes_tracer::{StokesGraph, TrajectoryFate};
use stokes_core::strips::{ChoppedStrip, Cut};
use stokes_core::C64;

const SIZE: f64 = 600.0;

struct View {
    center: C64,
    half: f64,
}

impl View {
    fn map(&self, z: C64) -> (f64, f64) {
        let x = (z.re - self.center.re) / self.half;
        let y = (z.im - self.center.im) / self.half;
        (0.5 * SIZE * (1.0 + x), 0.5 * SIZE * (1.0 - y))
    }

    fn path(&self, pts: &[C64]) -> String {
        let mut d = String::new();
        for (i, z) in pts.iter().enumerate() {
            let (x, y) = self.map(*z);
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x, y);
        }
        d
    }
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Turning points as dots, finite edges thick, escaping edges thin, Stokes
/// rays dashed; `overlays` are drawn on top in red.
pub fn stokes_graph(g: &StokesGraph, overlays: &[Vec<C64>]) -> String {
    let tps = &g.turning_points;
    let half = 2.5 * (1.0 + tps.max_modulus());
    let view = View {
        center: C64::new(0.0, 0.0),
        half,
    };
    let mut out = header(SIZE, SIZE);
    out.push_str("<g fill=\"none\" stroke-linecap=\"round\">\n");
    for angle in &g.rays {
        let far = C64::from_polar(2.0 * half, *angle);
        let _ = writeln!(
            out,
            "<path d=\"{}\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>",
            view.path(&[C64::new(0.0, 0.0), far])
        );
    }
    for e in &g.edges {
        let t = &e.trajectory;
        let (width, color) = match t.fate {
            TrajectoryFate::HitTurningPoint { .. } => (3.0, "#1f4e9c"),
            TrajectoryFate::EscapedToRay { .. } => (1.2, "#1f4e9c"),
            TrajectoryFate::Truncated { .. } => (1.2, "#d08000"),
        };
        let _ = writeln!(
            out,
            "<path d=\"{}\" stroke=\"{color}\" stroke-width=\"{width}\"/>",
            view.path(&t.polyline)
        );
    }
    for poly in overlays {
        let _ = writeln!(
            out,
            "<path d=\"{}\" stroke=\"#c62828\" stroke-width=\"2.5\"/>",
            view.path(poly)
        );
    }
    out.push_str("</g>\n");
    for tp in &tps.points {
        let (x, y) = view.map(tp.location);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"black\"/>");
    }
    out.push_str("</svg>\n");
    out
}

/// Two panels: the strip with its cuts, and the same strip with the
/// segments of `pairs` drawn in.
pub fn chopped_strip(s: &ChoppedStrip, pairs: &[(usize, usize)]) -> String {
    let nodes: Vec<C64> = s.nodes().iter().map(|n| C64::new(n[0], n[1])).collect();
    let (xmin, xmax) = (nodes[0].re, nodes[nodes.len() - 1].re);
    let (ymin, ymax) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| {
        (a.min(z.im), b.max(z.im))
    });
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let view = View {
        center: C64::new(0.5 * (xmin + xmax), 0.5 * (ymin + ymax)),
        half: 0.6 * span,
    };
    let mut out = header(2.0 * SIZE, SIZE);
    for panel in 0..2 {
        let dx = panel as f64 * SIZE;
        let _ = writeln!(out, "<g transform=\"translate({dx},0)\" fill=\"none\">");
        let top = view.center.im + view.half;
        let bottom = view.center.im - view.half;
        for x in [xmin, xmax] {
            let _ = writeln!(
                out,
                "<path d=\"{}\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"4 4\"/>",
                view.path(&[C64::new(x, bottom), C64::new(x, top)])
            );
        }
        for (j, z) in nodes.iter().enumerate() {
            if let Some(cut) = s.cut_at(j) {
                let end = C64::new(z.re, if cut == Cut::Up { top } else { bottom });
                let _ = writeln!(
                    out,
                    "<path d=\"{}\" stroke=\"black\" stroke-width=\"2\"/>",
                    view.path(&[*z, end])
                );
            }
        }
        if panel == 1 {
            for &(a, b) in pairs {
                let _ = writeln!(
                    out,
                    "<path d=\"{}\" stroke=\"#c62828\" stroke-width=\"1.5\"/>",
                    view.path(&[nodes[a], nodes[b]])
                );
            }
        }
        for z in &nodes {
            let (x, y) = view.map(*z);
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"black\"/>");
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
