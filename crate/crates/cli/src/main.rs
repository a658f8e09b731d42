//! `stokes`: command-line frontend for the Stokes graph, geodesic, spectral
//! and chopped-strip pipelines.
//!
//! Exit codes: 0 success, 2 malformed input, 3 numerical failure, 4 some
//! Stokes lines were truncated (outputs are written but partial).

mod commands;
mod svg;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use stokes_core::config::{OutputFormat, RunConfig};
use stokes_core::spectrum::Rect;
use stokes_core::{ComplexPolynomial, Error};

use commands::{Report, Search};

#[derive(Args, Clone)]
struct Common {
    /// JSON file mirroring the run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated output formats: json, svg, csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Seed recorded in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct PolyArgs {
    /// Coefficients, highest degree first, e.g. "1,0,-1" or "1,2+0.5i".
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    /// Rotation angle: the potential becomes exp(2it) P.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Turning points with multiplicities and Stokes sectors.
    Roots(PolyArgs),
    /// Traced Stokes graph and its complementary domains.
    StokesGraph(PolyArgs),
    /// Short geodesics of the rotation family.
    Geodesics(PolyArgs),
    /// Accumulation rays of the spectrum.
    Rays(PolyArgs),
    /// Eigenvalue asymptotics along every ray.
    Eigenvalues {
        #[command(flatten)]
        poly: PolyArgs,
        /// Range of quantum numbers, "a..b" inclusive or a single integer.
        #[arg(long, default_value = "0..5")]
        n: String,
        /// Number of correction terms.
        #[arg(long, default_value_t = 0)]
        order: usize,
        /// Also locate Wronskian zeros in "re0,re1,im0,im1".
        #[arg(long, allow_hyphen_values = true)]
        search: Option<String>,
        /// Sector pair for the Wronskian, "a,b".
        #[arg(long)]
        sectors: Option<String>,
    },
    /// A chopped strip with d nodes and exactly k visible pairs.
    StripRealize { d: usize, k: usize },
    /// Weighted chord diagrams of the Stokes and anti-Stokes graphs.
    Chords(PolyArgs),
}

#[derive(Parser)]
#[command(
    name = "stokes",
    version,
    about = "Stokes graphs, short geodesics and spectral asymptotics of P(z) dz^2"
)]
struct Top {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidInput(_) | Error::Domain(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Some(list) = &common.format {
        cfg.formats = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<OutputFormat>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_range(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || input_error(format!("invalid range {text:?}"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_floats(text: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input_error(format!("invalid list {text:?}")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(input_error(format!("expected {n} numbers in {text:?}")));
    }
    Ok(v)
}

fn run(top: Top) -> Result<u8, Failure> {
    let cfg = load_config(&top.common)?;
    let parse_poly = |a: &PolyArgs| -> Result<ComplexPolynomial, Failure> {
        if !a.t.is_finite() {
            return Err(input_error("rotation angle must be finite".into()));
        }
        Ok(a.poly.parse::<ComplexPolynomial>()?)
    };
    let (name, poly_args, report) = match &top.command {
        Command::Roots(a) => ("roots", Some(a), commands::roots(&parse_poly(a)?, a.t, &cfg)?),
        Command::StokesGraph(a) => (
            "stokes-graph",
            Some(a),
            commands::stokes_graph(&parse_poly(a)?, a.t, &cfg)?,
        ),
        Command::Geodesics(a) => ("geodesics", Some(a), commands::geodesics(&parse_poly(a)?, a.t, &cfg)?),
        Command::Rays(a) => ("rays", Some(a), commands::rays(&parse_poly(a)?, a.t, &cfg)?),
        Command::Chords(a) => ("chords", Some(a), commands::chords(&parse_poly(a)?, a.t, &cfg)?),
        Command::Eigenvalues {
            poly,
            n,
            order,
            search,
            sectors,
        } => {
            let p = parse_poly(poly)?;
            let range = parse_range(n)?;
            let search = match search {
                None => None,
                Some(text) => {
                    let v = parse_floats(text, 4)?;
                    let sectors = match sectors {
                        None => None,
                        Some(s) => {
                            let v = parse_floats(s, 2)?;
                            Some((v[0] as usize, v[1] as usize))
                        }
                    };
                    Some(Search {
                        rect: Rect {
                            re: (v[0], v[1]),
                            im: (v[2], v[3]),
                        },
                        sectors,
                    })
                }
            };
            (
                "eigenvalues",
                Some(poly),
                commands::eigenvalues(&p, poly.t, &cfg, range, *order, search)?,
            )
        }
        Command::StripRealize { d, k } => ("strip-realize", None, commands::strip_realize(*d, *k)?),
    };
    write_outputs(name, poly_args, &cfg, &report)?;
    Ok(if report.truncated { 4 } else { 0 })
}

fn write_outputs(name: &str, poly: Option<&PolyArgs>, cfg: &RunConfig, report: &Report) -> Result<(), Failure> {
    let mut envelope = json!({
        "command": name,
        "config": cfg,
        "result": report.json,
    });
    if let Some(a) = poly {
        envelope["polynomial"] = json!(a.poly.parse::<ComplexPolynomial>()?);
        envelope["t"] = json!(a.t);
    }
    let text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    // a closed pipe on stdout is not an error; the files are still written
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    let dir = PathBuf::from(&cfg.out_dir);
    let io = |e: std::io::Error| Failure {
        code: 3,
        message: format!("{}: {e}", dir.display()),
    };
    fs::create_dir_all(&dir).map_err(io)?;
    for format in &cfg.formats {
        let (ext, body) = match format {
            OutputFormat::Json => ("json", Some(text.clone() + "\n")),
            OutputFormat::Svg => ("svg", report.svg.clone()),
            OutputFormat::Csv => ("csv", report.csv.clone()),
        };
        if let Some(body) = body {
            fs::write(dir.join(format!("{}.{ext}", report.stem)), body).map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let top = Top::parse();
    match run(top) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
