use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use flatwalk::complex::{plane_rings_for_reach, GeneratorSpec};
use flatwalk::dual::{self, DualGraph};
use flatwalk::transport::{self, TransportParams};
use flatwalk::{fields, report, scaling, Complex, Point, SimplexRef};

#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Io(String),
}

impl From<flatwalk::ComplexError> for CmdError {
    fn from(e: flatwalk::ComplexError) -> Self {
        match e {
            flatwalk::ComplexError::Io(m) => CmdError::Io(m),
            other => CmdError::Validation(other.to_string()),
        }
    }
}

impl From<dual::DualError> for CmdError {
    fn from(e: dual::DualError) -> Self {
        CmdError::Validation(e.to_string())
    }
}

fn io_err<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Io(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "flatwalk",
    version,
    about = "Random motion on piecewise-flat simplicial complexes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file with defaults for seed, threads and format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the data file here; reports still go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for data-producing commands.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Source {
    /// Path to a complex-definition document.
    #[arg(long)]
    complex: Option<PathBuf>,
    /// Generator spec: plane:R|auto, fan:M, book:M[:R], tree:D[:R], line:R.
    #[arg(long)]
    generate: Option<String>,
}

#[derive(Args)]
struct StartArg {
    /// Start simplex as comma-separated vertex ids; the walk starts at its
    /// midpoint. Defaults to the generator's origin.
    #[arg(long)]
    start: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Load a complex and report its validation flags.
    Validate {
        /// Document path (alias for --complex).
        path: Option<PathBuf>,
        #[command(flatten)]
        src: Source,
    },
    /// Check the link condition of a two-complex.
    Cat0 {
        #[command(flatten)]
        src: Source,
    },
    /// Simulate scaled transport paths and dump the trajectory log.
    Simulate {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        start: StartArg,
        /// Scale parameter; one means the unscaled process.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Observed-time horizon.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        paths: usize,
    },
    /// Empirical finite-dimensional distributions of the scaled process.
    Fdd {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        start: StartArg,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Comma-separated increasing observed times.
        #[arg(long)]
        times: String,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
    },
    /// Pairwise KS distances of displacement laws across decreasing scales.
    Sweep {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        start: StartArg,
        /// Comma-separated strictly decreasing scales.
        #[arg(long)]
        etas: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10000)]
        paths: usize,
    },
    /// Windowed min-distance tightness statistic.
    Tightness {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        start: StartArg,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long)]
        window: f64,
        #[arg(long)]
        mesh: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10000)]
        paths: usize,
    },
    /// Resolvent series consistency check.
    Resolvent {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        start: StartArg,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 12)]
        terms: usize,
        #[arg(long, default_value_t = 100000)]
        samples: usize,
        /// Field under test: const:<value> or ball:<radius> (around start).
        #[arg(long, default_value = "ball:0.3")]
        field: String,
    },
    /// Dump the dual graph edge list.
    Dual {
        #[command(flatten)]
        src: Source,
    },
    /// Return-probability estimate of the dual-graph chain.
    Walk {
        #[command(flatten)]
        src: Source,
        /// Origin codimension-one simplex, comma-separated vertex ids.
        #[arg(long)]
        origin: Option<String>,
        #[arg(long, default_value_t = 10000)]
        horizon: usize,
        #[arg(long, default_value_t = 10000)]
        walks: usize,
    },
    /// Effective resistance to shorted spheres of growing radius.
    Resistance {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        origin: Option<String>,
        #[arg(long, default_value_t = 10)]
        radius: usize,
    },
    /// Transience classification by the branching criterion.
    Classify {
        #[command(flatten)]
        src: Source,
        /// Treat a loaded complex as simply connected.
        #[arg(long, default_value_t = false)]
        assume_simply_connected: bool,
    },
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: String,
    version: String,
    seed: u64,
    config: serde_json::Value,
    result: T,
    outputs: Vec<String>,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn emit_data(&self, data: &str, outputs: &mut Vec<String>) -> Result<(), CmdError> {
        match &self.out {
            Some(path) => {
                fs::write(path, data).map_err(io_err)?;
                outputs.push(path.display().to_string());
            }
            None => print!("{data}"),
        }
        Ok(())
    }

    fn emit_report<T: Serialize>(
        &self,
        command: &str,
        config: serde_json::Value,
        result: T,
        outputs: Vec<String>,
    ) -> Result<(), CmdError> {
        let env = Envelope {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config,
            result,
            outputs,
        };
        let text = serde_json::to_string_pretty(&env).expect("report serializes");
        println!("{text}");
        if let Some(path) = &self.out {
            // JSON-result commands may also persist the envelope.
            if self.format == Format::Json && path.extension().is_some_and(|e| e == "json") {
                fs::write(path, &text).map_err(io_err)?;
            }
        }
        Ok(())
    }
}

#[derive(serde::Deserialize, Default)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    format: Option<String>,
}

pub fn run(cli: Cli) -> Result<(), CmdError> {
    let file_cfg: FileConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err)?;
            serde_json::from_str(&text)
                .map_err(|e| CmdError::Validation(format!("bad config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file_cfg.seed).unwrap_or(0);
    let threads = cli.threads.or(file_cfg.threads);
    let format = cli.format.or(match file_cfg.format.as_deref() {
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        _ => None,
    });
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }

    let ctx = Ctx {
        seed,
        out: cli.out.clone(),
        format: format.unwrap_or(Format::Csv),
    };
    dispatch(cli.command, &ctx)
}

/// Load from a file or materialize a generator; `reach` sizes `plane:auto`
/// from the speed bound plus margin.
fn load_source(src: &Source, reach: Option<f64>) -> Result<(Complex, String), CmdError> {
    match (&src.complex, &src.generate) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(io_err)?;
            Ok((Complex::load(&text)?, path.display().to_string()))
        }
        (None, Some(spec)) => {
            let spec = if let Some(rest) = spec.strip_prefix("plane:") {
                if rest == "auto" {
                    let reach = reach.ok_or_else(|| {
                        CmdError::Validation(
                            "plane:auto needs a time horizon to size the radius".into(),
                        )
                    })?;
                    GeneratorSpec::Plane {
                        rings: plane_rings_for_reach(reach),
                    }
                } else {
                    spec.parse::<GeneratorSpec>()?
                }
            } else {
                spec.parse::<GeneratorSpec>()?
            };
            let c = Complex::generate(&spec)?;
            Ok((c, spec.to_string()))
        }
        _ => Err(CmdError::Validation(
            "exactly one of --complex or --generate is required".into(),
        )),
    }
}

fn start_point(c: &Complex, arg: &Option<String>) -> Result<Point, CmdError> {
    match arg {
        Some(spec) => {
            let ids = parse_ids(spec)?;
            let s = c.simplex_ref(&ids).ok_or_else(|| {
                CmdError::Validation(format!("no simplex with vertices {ids:?}"))
            })?;
            Ok(Point::midpoint(s))
        }
        None => {
            let s = c
                .origin_hint()
                .unwrap_or(SimplexRef {
                    dim: c.dimension(),
                    idx: 0,
                });
            Ok(Point::midpoint(s))
        }
    }
}

fn origin_vertex(c: &Complex, g: &DualGraph, arg: &Option<String>) -> Result<usize, CmdError> {
    let n = c.dimension();
    let s = match arg {
        Some(spec) => {
            let ids = parse_ids(spec)?;
            c.simplex_ref(&ids)
                .filter(|s| s.dim == n - 1)
                .ok_or_else(|| {
                    CmdError::Validation(format!(
                        "origin must name a codimension-one simplex, got {ids:?}"
                    ))
                })?
        }
        None => c.origin_hint().ok_or_else(|| {
            CmdError::Validation("loaded complexes need an explicit --origin".into())
        })?,
    };
    if g.is_absorbing(s.idx) {
        return Err(CmdError::Validation(
            "origin lies on the truncation boundary".into(),
        ));
    }
    Ok(s.idx)
}

fn parse_ids(spec: &str) -> Result<Vec<u32>, CmdError> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| CmdError::Validation(format!("bad vertex id {t:?}")))
        })
        .collect()
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CmdError> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CmdError::Validation(format!("bad number {t:?}")))
        })
        .collect()
}

fn dispatch(cmd: Command, ctx: &Ctx) -> Result<(), CmdError> {
    match cmd {
        Command::Validate { path, src } => {
            let src = Source {
                complex: src.complex.or(path),
                generate: src.generate,
            };
            let (c, name) = load_source(&src, None)?;
            let flags = c.flags();
            let boundary = c.check_boundaryless();
            let result = json!({
                "source": name,
                "dimension": c.dimension(),
                "counts": (0..=c.dimension()).map(|d| c.count(d)).collect::<Vec<_>>(),
                "connected": flags.connected,
                "boundaryless": flags.boundaryless,
                "boundary_codim1_count": boundary.boundary_simplices.len(),
                "admissible": flags.admissible,
                "cat0": flags.cat0,
            });
            // With --out, also emit the canonical document for the complex.
            let mut outputs = Vec::new();
            if let Some(out) = &ctx.out {
                fs::write(out, c.to_document().to_json()).map_err(io_err)?;
                outputs.push(out.display().to_string());
            }
            ctx.emit_report("validate", json!({"source": name}), result, outputs)
        }
        Command::Cat0 { src } => {
            let (c, name) = load_source(&src, None)?;
            let report = c.check_cat0()?;
            let result = json!({
                "cat0": report.cat0,
                "violations": report
                    .violations
                    .iter()
                    .map(|(v, len)| json!({"vertex": v.0, "loop_length": len}))
                    .collect::<Vec<_>>(),
            });
            ctx.emit_report("cat0", json!({"source": name}), result, Vec::new())
        }
        Command::Simulate {
            src,
            start,
            eta,
            t,
            paths,
        } => {
            let (c, name) = load_source(&src, Some(t / eta))?;
            let x0 = start_point(&c, &start.start)?;
            let samples: Vec<_> = (0..paths as u64)
                .map(|i| scaling::sample_scaled_path(&c, &x0, eta, t, ctx.seed, i))
                .collect::<Result<_, _>>()?;
            let csv = report::paths_csv(&c, &samples);
            let mut outputs = Vec::new();
            ctx.emit_data(&csv, &mut outputs)?;
            if !outputs.is_empty() {
                let absorbed = samples.iter().filter(|p| p.cemetery).count();
                let config = json!({
                    "source": name, "eta": eta, "t": t, "paths": paths,
                });
                ctx.emit_report(
                    "simulate",
                    config,
                    json!({"absorbed_paths": absorbed}),
                    outputs,
                )?;
            }
            Ok(())
        }
        Command::Fdd {
            src,
            start,
            eta,
            times,
            paths,
        } => {
            let times = parse_f64_list(&times)?;
            if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CmdError::Validation("times must strictly increase".into()));
            }
            let t_max = *times.last().unwrap();
            let (c, name) = load_source(&src, Some(t_max / eta))?;
            let x0 = start_point(&c, &start.start)?;
            let fdd = scaling::estimate_fdd(&c, &x0, eta, &times, paths, ctx.seed)?;
            let csv = report::fdd_csv(&c, &fdd);
            let mut outputs = Vec::new();
            ctx.emit_data(&csv, &mut outputs)?;
            if !outputs.is_empty() {
                let config = json!({
                    "source": name, "eta": eta, "times": times, "paths": paths,
                });
                ctx.emit_report("fdd", config, json!({"paths": paths}), outputs)?;
            }
            Ok(())
        }
        Command::Sweep {
            src,
            start,
            etas,
            t,
            paths,
        } => {
            let etas = parse_f64_list(&etas)?;
            if etas.len() < 2 || etas.windows(2).any(|w| w[0] <= w[1]) {
                return Err(CmdError::Validation(
                    "need at least two strictly decreasing scales".into(),
                ));
            }
            let (c, name) = load_source(&src, Some(t / etas.last().unwrap()))?;
            let x0 = start_point(&c, &start.start)?;
            let report = scaling::convergence_sweep(&c, &x0, &etas, t, paths, ctx.seed)?;
            let config = json!({
                "source": name, "etas": etas, "t": t, "paths": paths,
            });
            ctx.emit_report("sweep", config, report, Vec::new())
        }
        Command::Tightness {
            src,
            start,
            eta,
            horizon,
            window,
            mesh,
            epsilon,
            paths,
        } => {
            let (c, name) = load_source(&src, Some(horizon / eta))?;
            let x0 = start_point(&c, &start.start)?;
            let grid = scaling::TightnessGrid {
                horizon,
                window,
                mesh,
            };
            let report = scaling::tightness_stat(&c, &x0, eta, grid, epsilon, paths, ctx.seed)?;
            let config = json!({
                "source": name, "eta": eta, "horizon": horizon, "window": window,
                "mesh": mesh, "epsilon": epsilon, "paths": paths,
            });
            ctx.emit_report("tightness", config, report, Vec::new())
        }
        Command::Resolvent {
            src,
            start,
            lambda,
            terms,
            samples,
            field,
        } => {
            let (c, name) = load_source(&src, None)?;
            let x0 = start_point(&c, &start.start)?;
            let (check, field_echo) = match field.split_once(':') {
                Some(("const", v)) => {
                    let v: f64 = v
                        .parse()
                        .map_err(|_| CmdError::Validation(format!("bad field {field:?}")))?;
                    (
                        transport::resolvent_series_check(
                            &c,
                            fields::constant(v),
                            v.abs(),
                            &x0,
                            lambda,
                            terms,
                            TransportParams::default(),
                            samples,
                            ctx.seed,
                        ),
                        field,
                    )
                }
                Some(("ball", r)) => {
                    let r: f64 = r
                        .parse()
                        .map_err(|_| CmdError::Validation(format!("bad field {field:?}")))?;
                    (
                        transport::resolvent_series_check(
                            &c,
                            fields::ball_indicator(x0.clone(), r),
                            1.0,
                            &x0,
                            lambda,
                            terms,
                            TransportParams::default(),
                            samples,
                            ctx.seed,
                        ),
                        field,
                    )
                }
                _ => {
                    return Err(CmdError::Validation(format!(
                        "field must be const:<v> or ball:<r>, got {field:?}"
                    )))
                }
            };
            let config = json!({
                "source": name, "lambda": lambda, "terms": terms,
                "samples": samples, "field": field_echo,
            });
            ctx.emit_report("resolvent", config, check, Vec::new())
        }
        Command::Dual { src } => {
            let (c, name) = load_source(&src, None)?;
            let g = DualGraph::build(&c);
            let text = report::dual_edges_text(&g);
            let mut outputs = Vec::new();
            ctx.emit_data(&text, &mut outputs)?;
            if !outputs.is_empty() {
                let result = json!({
                    "v_top": g.v_top_count(),
                    "v_codim1": g.v_codim1_count(),
                    "edges": g.edge_count(),
                });
                ctx.emit_report("dual", json!({"source": name}), result, outputs)?;
            }
            Ok(())
        }
        Command::Walk {
            src,
            origin,
            horizon,
            walks,
        } => {
            let (c, name) = load_source(&src, None)?;
            let g = DualGraph::build(&c);
            let origin = origin_vertex(&c, &g, &origin)?;
            let stats = dual::estimate_return(&g, origin, horizon, walks, ctx.seed);
            let config = json!({
                "source": name, "origin": origin, "horizon": horizon, "walks": walks,
            });
            ctx.emit_report("walk", config, stats, Vec::new())
        }
        Command::Resistance {
            src,
            origin,
            radius,
        } => {
            let (c, name) = load_source(&src, None)?;
            let g = DualGraph::build(&c);
            let origin = origin_vertex(&c, &g, &origin)?;
            let shells = dual::effective_resistance(&g, origin, radius)?;
            match ctx.format {
                Format::Csv => {
                    let csv = report::resistance_csv(&shells);
                    let mut outputs = Vec::new();
                    ctx.emit_data(&csv, &mut outputs)?;
                    if !outputs.is_empty() {
                        let config = json!({
                            "source": name, "origin": origin, "radius": radius,
                        });
                        ctx.emit_report(
                            "resistance",
                            config,
                            json!({"shells": shells.len()}),
                            outputs,
                        )?;
                    }
                    Ok(())
                }
                Format::Json => {
                    let config = json!({
                        "source": name, "origin": origin, "radius": radius,
                    });
                    ctx.emit_report("resistance", config, shells, Vec::new())
                }
            }
        }
        Command::Classify {
            src,
            assume_simply_connected,
        } => {
            let (mut c, name) = load_source(&src, None)?;
            if assume_simply_connected {
                c.assume_simply_connected(true);
            }
            let verdict = dual::classify_transience(&c)?;
            let config = json!({
                "source": name,
                "assume_simply_connected": assume_simply_connected,
            });
            ctx.emit_report("classify", config, verdict, Vec::new())
        }
    }
}
