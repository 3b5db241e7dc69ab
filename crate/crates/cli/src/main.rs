use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use carpet_core::oracle::{self, BUDGET};
use carpet_core::{
    dims, instances, render, Axis, CarpetError, DiagonalIfs, NonAutoFibre, RenderSpec, Scalar, SequenceSpec, Symbolic,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Dimensions, covering counts and pictures of diagonal self-affine carpets.
///
/// Carpets are read as JSON: `{"maps":[{"a":"1/2","b":"1/4","dx":0,"dy":0}, ...]}`.
/// Use `-` to read from stdin.
#[derive(Parser, Debug)]
#[command(name = "carpet", version)]
struct Cli {
    /// Root-finding and optimizer tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Cap on enumerated words, cells and points.
    #[arg(long, global = true, default_value_t = BUDGET)]
    budget: u64,
    /// Emit a JSON report instead of text or CSV.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Carpet type and separation flags.
    Classify { carpet: PathBuf },
    /// Hausdorff, box, Assouad and lower dimensions.
    Dims { carpet: PathBuf },
    /// Assouad dimension of the fibre above a sequence.
    FibreDim {
        carpet: PathBuf,
        #[command(flatten)]
        args: FibreArgs,
    },
    /// Pointwise Assouad dimension at the point coded by a sequence.
    Pointwise {
        carpet: PathBuf,
        #[command(flatten)]
        args: PointwiseArgs,
    },
    /// A sequence whose pointwise Assouad dimension approximates a target.
    TargetSeq {
        carpet: PathBuf,
        #[command(flatten)]
        args: TargetArgs,
    },
    /// Grid box counts at dyadic scales, as `scale,count` rows.
    Boxcount {
        carpet: PathBuf,
        #[command(flatten)]
        args: BoxArgs,
    },
    /// Distances between a rescaled square and its product approximation.
    Tangent {
        carpet: PathBuf,
        #[command(flatten)]
        args: TangentArgs,
    },
    /// Grid counts of a ball around the point coded by a sequence.
    Local {
        carpet: PathBuf,
        #[command(flatten)]
        args: LocalArgs,
    },
    /// Draws cylinders and highlighted squares as SVG.
    Render {
        carpet: PathBuf,
        #[command(flatten)]
        args: RenderArgs,
    },
    /// Runs a command on the two-column Baranski example.
    ExampleBaranski {
        /// Gap parameter; `p/q` is kept exact.
        #[arg(long, default_value = "1/40")]
        delta: Scalar,
        /// Defaults to printing the carpet.
        #[command(subcommand)]
        action: Option<Action>,
    },
}

#[derive(Subcommand, Debug, Clone)]
enum Action {
    Classify,
    Dims,
    FibreDim(FibreArgs),
    Pointwise(PointwiseArgs),
    TargetSeq(TargetArgs),
    Boxcount(BoxArgs),
    Tangent(TangentArgs),
    Local(LocalArgs),
    Render(RenderArgs),
}

#[derive(Args, Debug, Clone)]
struct FibreArgs {
    /// Sequence, as JSON or `pre|period` with comma separated letters.
    #[arg(long)]
    gamma: String,
    /// Projection axis, 1 (horizontal) or 2 (vertical).
    #[arg(long, default_value_t = 1)]
    axis: u8,
    /// Longest window scanned.
    #[arg(long, default_value_t = 4096)]
    m_max: usize,
}

#[derive(Args, Debug, Clone)]
struct PointwiseArgs {
    #[arg(long)]
    gamma: String,
    #[arg(long, default_value_t = 4096)]
    m_max: usize,
}

#[derive(Args, Debug, Clone)]
struct TargetArgs {
    #[arg(long)]
    alpha: f64,
    /// Number of refinement rounds.
    #[arg(long, default_value_t = 4)]
    depth: usize,
}

#[derive(Args, Debug, Clone)]
struct BoxArgs {
    /// Coarsest scale is `2^-min-k`.
    #[arg(long, default_value_t = 1)]
    min_k: u32,
    /// Finest scale is `2^-max-k`.
    #[arg(long, default_value_t = 8)]
    max_k: u32,
}

#[derive(Args, Debug, Clone)]
struct TangentArgs {
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    n: usize,
    /// Point spacing of both clouds.
    #[arg(long, default_value_t = 1.0 / 128.0)]
    resolution: f64,
    /// Also write the overlay to this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LocalArgs {
    #[arg(long)]
    gamma: String,
    /// Ball radius.
    #[arg(long = "R")]
    big_r: f64,
    /// Grid side.
    #[arg(long = "r")]
    r: f64,
}

#[derive(Args, Debug, Clone)]
struct RenderArgs {
    /// JSON render options; flags below override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<CarpetError>()) {
        Some(c) if c.is_budget() => 3,
        Some(c) if c.is_validation() => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (ifs, action) = match &cli.command {
        Command::Classify { carpet } => (load(carpet)?, Action::Classify),
        Command::Dims { carpet } => (load(carpet)?, Action::Dims),
        Command::FibreDim { carpet, args } => (load(carpet)?, Action::FibreDim(args.clone())),
        Command::Pointwise { carpet, args } => (load(carpet)?, Action::Pointwise(args.clone())),
        Command::TargetSeq { carpet, args } => (load(carpet)?, Action::TargetSeq(args.clone())),
        Command::Boxcount { carpet, args } => (load(carpet)?, Action::Boxcount(args.clone())),
        Command::Tangent { carpet, args } => (load(carpet)?, Action::Tangent(args.clone())),
        Command::Local { carpet, args } => (load(carpet)?, Action::Local(args.clone())),
        Command::Render { carpet, args } => (load(carpet)?, Action::Render(args.clone())),
        Command::ExampleBaranski { delta, action } => {
            let ifs = instances::baranski_example(*delta)?;
            match action {
                Some(a) => (ifs, a.clone()),
                None => {
                    emit(cli, json!({ "delta": delta.value(), "carpet": ifs }), || ifs.to_json())?;
                    return Ok(());
                }
            }
        }
    };
    execute(cli, &ifs, action)
}

fn load(path: &Path) -> Result<DiagonalIfs> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading carpet from stdin")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    DiagonalIfs::from_json(&text).with_context(|| format!("parsing carpet {}", path.display()))
}

/// JSON, or `pre|period` with comma separated letters (`|period` or a bare
/// period for purely periodic sequences).
fn parse_gamma(s: &str) -> Result<SequenceSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(SequenceSpec::from_json(s)?);
    }
    let letters = |part: &str| -> Result<Vec<usize>> {
        part.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| CarpetError::Parse(format!("bad letter {p:?}")).into())
            })
            .collect()
    };
    let (pre, period) = match s.split_once('|') {
        Some((pre, period)) => (letters(pre)?, letters(period)?),
        None => (Vec::new(), letters(s)?),
    };
    if period.is_empty() {
        return Err(CarpetError::Parse(format!("sequence {s:?} has an empty period")).into());
    }
    Ok(SequenceSpec::periodic(pre, period))
}

fn emit(cli: &Cli, mut report: Value, text: impl FnOnce() -> String) -> Result<()> {
    let mut out = io::stdout().lock();
    if cli.json {
        if let Value::Object(map) = &mut report {
            map.insert("schema".into(), json!(1));
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        let body = text();
        out.write_all(body.as_bytes())?;
        if !body.ends_with('\n') {
            writeln!(out)?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli, ifs: &DiagonalIfs, action: Action) -> Result<()> {
    let tol = cli.tol;
    match action {
        Action::Classify => {
            let c = ifs.classify();
            emit(cli, json!({ "classification": c, "maps": ifs.len() }), || {
                format!(
                    "kind: {}\nmaps: {}\ninteriors disjoint: {}\naligned or disjoint: {:?}\nstrict domination: {}\nprojected SSC: {:?}",
                    c.kind,
                    ifs.len(),
                    c.interiors_disjoint,
                    c.aligned_or_disjoint,
                    c.strict_domination,
                    c.proj_ssc
                )
            })
        }
        Action::Dims => {
            let r = dims::dimensions(ifs, tol)?;
            emit(cli, json!({ "dimensions": r }), || {
                let mut s = format!(
                    "kind: {}\ndim_H: {:.10}\ndim_B: {:.10}\ndim_A: {:.10}\ndim_L: {:.10}\n",
                    r.kind, r.dim_h, r.dim_b, r.dim_a, r.dim_l
                );
                for d in &r.directions {
                    let dj =
                        d.d.as_ref()
                            .map_or("absent".to_string(), |m| format!("{:.10}", m.value));
                    s.push_str(&format!(
                        "direction {}: d = {dj}, dim_B proj = {:.10}, Assouad = {:.10}, lower = {:.10}\n",
                        d.axis.number(),
                        d.dim_b_proj,
                        d.assouad_candidate,
                        d.lower_candidate
                    ));
                }
                s
            })
        }
        Action::FibreDim(a) => {
            let gamma = parse_gamma(&a.gamma)?;
            gamma.validate(ifs.len())?;
            let axis = Axis::from_number(a.axis)?;
            let f = NonAutoFibre::from_carpet(ifs, axis, &gamma)?.fibre_assouad(a.m_max, tol)?;
            emit(cli, json!({ "gamma": gamma, "axis": axis, "fibre": f }), || {
                format!(
                    "fibre Assouad dimension: {:.10} +- {:.3e}\nperiodic limit: {:.10}\nwindows: {} distinct up to length {}",
                    f.estimate, f.error_bound, f.periodic_limit, f.distinct_windows, f.m_max
                )
            })
        }
        Action::Pointwise(a) => {
            let gamma = parse_gamma(&a.gamma)?;
            let p = Symbolic::new(ifs)?.pointwise_assouad(&gamma, a.m_max, tol)?;
            emit(cli, json!({ "gamma": gamma, "pointwise": p }), || {
                let bound = if p.lower_bound_only { " (lower bound)" } else { "" };
                format!(
                    "pointwise Assouad dimension: {:.10} +- {:.3e}{bound}\nregularity: {:?}\nmax tangent dimension: {:.10}\ndim_B: {:.10}",
                    p.value, p.error_bound, p.regularity, p.max_tangent_dim, p.dim_b
                )
            })
        }
        Action::TargetSeq(a) => {
            let t = Symbolic::new(ifs)?.sequence_for_target(a.alpha, a.depth, tol)?;
            emit(cli, json!({ "target": t }), || {
                format!(
                    "sequence: {}\nlimit: {:.10} (target {}, error {:.3e})",
                    t.spec.to_json(),
                    t.limit,
                    t.alpha,
                    t.limit_error
                )
            })
        }
        Action::Boxcount(a) => {
            if a.min_k > a.max_k || a.max_k > 30 {
                return Err(
                    CarpetError::Invalid(format!("need min-k <= max-k <= 30, got {}..{}", a.min_k, a.max_k)).into(),
                );
            }
            let deltas: Vec<f64> = (a.min_k..=a.max_k).map(|k| 0.5f64.powi(k as i32)).collect();
            let rows = oracle::box_count_series(ifs, &deltas, cli.budget)?;
            let counts: Vec<(f64, u64)> = deltas
                .iter()
                .zip(&rows)
                .map(|(&d, &(_, ln_n))| (d, ln_n.exp().round() as u64))
                .collect();
            let fit = if rows.len() >= 3 {
                Some(oracle::regression(&rows)?)
            } else {
                None
            };
            let report = json!({
                "rows": counts.iter().map(|&(scale, count)| json!({ "scale": scale, "count": count })).collect::<Vec<_>>(),
                "regression": fit,
            });
            emit(cli, report, || {
                csv(
                    &["scale", "count"],
                    counts.iter().map(|&(s, c)| vec![s.to_string(), c.to_string()]),
                )
            })
        }
        Action::Tangent(a) => {
            let gamma = parse_gamma(&a.gamma)?;
            let spec = RenderSpec {
                resolution: a.resolution,
                ..RenderSpec::default()
            };
            let cmp = render::render_tangent_comparison(ifs, &gamma, a.n, &spec, cli.budget)?;
            if let Some(path) = &a.svg {
                render::write_svg(path, &cmp.svg).with_context(|| format!("writing {}", path.display()))?;
            }
            let d = &cmp.distances;
            emit(
                cli,
                json!({ "gamma": gamma, "n": a.n, "resolution": a.resolution, "distances": d }),
                || {
                    csv(
                        &["n", "product_in_tangent", "tangent_in_product", "hausdorff"],
                        [vec![
                            a.n.to_string(),
                            d.product_in_tangent.to_string(),
                            d.tangent_in_product.to_string(),
                            d.hausdorff.to_string(),
                        ]],
                    )
                },
            )
        }
        Action::Local(a) => {
            let gamma = parse_gamma(&a.gamma)?;
            let count = oracle::local_count(ifs, &gamma, a.big_r, a.r, cli.budget)?;
            emit(
                cli,
                json!({ "gamma": gamma, "R": a.big_r, "r": a.r, "count": count }),
                || csv(&["scale", "count"], [vec![a.r.to_string(), count.to_string()]]),
            )
        }
        Action::Render(a) => {
            let mut spec = match &a.spec {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<RenderSpec>(&text).map_err(|e| CarpetError::Parse(e.to_string()))?
                }
                None => RenderSpec::default(),
            };
            if let Some(d) = a.depth {
                spec.depth = d;
            }
            if a.output.is_some() {
                spec.output = a.output.clone();
            }
            let svg = render::render_carpet(ifs, &spec, cli.budget)?;
            match &spec.output {
                Some(path) => {
                    render::write_svg(path, &svg).with_context(|| format!("writing {}", path.display()))?;
                    emit(
                        cli,
                        json!({ "output": path, "depth": spec.depth, "bytes": svg.len() }),
                        || format!("wrote {}", path.display()),
                    )
                }
                None if cli.json => bail!("--json needs an output file for render"),
                None => emit(cli, Value::Null, || svg),
            }
        }
    }
}

fn csv<I: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: I) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
