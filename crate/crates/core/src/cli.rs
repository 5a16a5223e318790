//! Command-line front end. [`run`] does all the work and returns the exit
//! code together with the bytes for stdout and stderr.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::domains::{photon_convexity_probe, r_proper_probe, AnyDomain, DomainJson, ProbeReport};
use crate::error::{Error, Result};
use crate::grassmann::{arithmetic_distance, photon_collinearity_residual, photon_through, Plane, PlaneJson};
use crate::metrics::{
    caratheodory_lower, geodesic_r_chain, hyperbolicity_csv, hyperbolicity_probe, kobayashi_closed_form, sample_duals,
    sandwich, ChainSearchConfig, HyperbolicityConfig, SandwichConfig,
};
use crate::nagano::{self, Param};
use crate::numerics::Tolerance;
use crate::rng::SplitRng;

#[derive(Debug, Parser)]
#[command(name = "grassmetric", version, about = "Kobayashi and Carathéodory distances on Grassmannian domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random choice; recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// JSON input file (`{"domain": .., "x": .., "y": ..}`); stdin when absent.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    #[arg(long, global = true)]
    pub rank_rel: Option<f64>,

    #[arg(long, global = true)]
    pub geom_abs: Option<f64>,

    #[arg(long, global = true)]
    pub metric_abs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Only for `table`.
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Carathéodory and chain bounds, plus the closed form when available.
    Kob(SandwichArgs),
    /// Carathéodory lower bound only.
    Carat(DualArgs),
    /// Geodesic r-chain of a symmetric domain.
    Chain,
    /// Arithmetic distance of x and y and, for photon-related points, the
    /// Plücker collinearity residual of their photon.
    CheckPhoton,
    /// R-properness and photon-convexity probes.
    Probe {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Four-point hyperbolicity table.
    Hyperbolicity {
        /// Comma-separated list of scales.
        #[arg(long, default_value = "2,4,8,16", value_delimiter = ',')]
        scales: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        quadruples: usize,
        #[command(flatten)]
        sandwich: SandwichArgs,
    },
    /// Nagano pairs.
    Table {
        /// Only the real-type rows.
        #[arg(long)]
        real_type: bool,
        /// A single row, by id or by name.
        #[arg(long)]
        id: Option<String>,
        /// Parameter values for `--id`, e.g. `p=2,q=3`.
        #[arg(long, value_delimiter = ',')]
        bind: Vec<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DualArgs {
    #[arg(long, default_value_t = 1000)]
    pub dual_samples: usize,
    /// Skip the local optimization of the dual pair.
    #[arg(long)]
    pub no_optimize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SandwichArgs {
    #[arg(long, default_value_t = 4)]
    pub max_segments: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Objective evaluations for the chain search.
    #[arg(long, default_value_t = 600)]
    pub budget: usize,
    #[command(flatten)]
    pub duals: DualArgs,
}

impl SandwichArgs {
    fn config(&self) -> SandwichConfig {
        SandwichConfig {
            search: ChainSearchConfig {
                max_segments: self.max_segments,
                restarts: self.restarts,
                budget: self.budget,
            },
            dual_samples: self.duals.dual_samples,
            optimize_duals: !self.duals.no_optimize,
        }
    }
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Deserialize)]
struct InputJson {
    #[serde(default)]
    domain: Option<DomainJson>,
    #[serde(default)]
    x: Option<PlaneJson>,
    #[serde(default)]
    y: Option<PlaneJson>,
}

struct Input {
    domain: Option<AnyDomain>,
    x: Option<Plane>,
    y: Option<Plane>,
}

impl Input {
    fn domain(&self) -> Result<&AnyDomain> {
        self.domain
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("input has no `domain`".into()))
    }

    fn pair(&self) -> Result<(&Plane, &Plane)> {
        match (&self.x, &self.y) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::InvalidInput("input needs planes `x` and `y`".into())),
        }
    }
}

fn read_input(path: Option<&PathBuf>, stdin: &mut dyn std::io::Read, tol: Tolerance) -> Result<Input> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    let raw: InputJson = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("input JSON: {e}")))?;
    let plane = |j: Option<PlaneJson>| -> Result<Option<Plane>> {
        j.map(|j| {
            if j.basis.len() != j.n * j.k {
                return Err(Error::InvalidInput(format!(
                    "plane basis has {} entries, expected n*k = {}",
                    j.basis.len(),
                    j.n * j.k
                )));
            }
            Plane::from_basis(nalgebra::DMatrix::from_row_slice(j.n, j.k, &j.basis), &tol)
        })
        .transpose()
    };
    Ok(Input {
        domain: raw.domain.map(|d| d.build(tol)).transpose()?,
        x: plane(raw.x)?,
        y: plane(raw.y)?,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn no_text(format: Format) -> Result<()> {
    if format == Format::Text {
        return Err(Error::InvalidInput("--format text is only available for `table`".into()));
    }
    Ok(())
}

fn parse_bindings(bind: &[String]) -> Result<BTreeMap<Param, u64>> {
    bind.iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let (k, v) = b
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("binding `{b}` is not name=value")))?;
            let p = Param::parse(k.trim()).ok_or_else(|| Error::BindingOutOfRange(format!("unknown parameter `{k}`")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| Error::BindingOutOfRange(format!("`{v}` is not a natural number")))?;
            Ok((p, v))
        })
        .collect()
}

fn probe_row(r: &ProbeReport) -> Vec<String> {
    vec![
        r.probe.clone(),
        r.samples.to_string(),
        r.passed.to_string(),
        r.failed.to_string(),
        r.skipped.to_string(),
        r.max_components.map(|c| c.to_string()).unwrap_or_default(),
        r.heuristic.to_string(),
        r.seed.to_string(),
    ]
}

fn execute(cli: &Cli, stdin: &mut dyn std::io::Read) -> Result<String> {
    let mut tol = Tolerance::default();
    if cli.rank_rel.is_some() || cli.geom_abs.is_some() || cli.metric_abs.is_some() {
        tol = Tolerance::new(
            cli.rank_rel.unwrap_or(tol.rank_rel),
            cli.geom_abs.unwrap_or(tol.geom_abs),
            cli.metric_abs.unwrap_or(tol.metric_abs),
        )?;
    }
    let rng = SplitRng::new(cli.seed);
    let seed = cli.seed;
    let format = cli.format;
    if let Command::Table { real_type, id, bind } = &cli.command {
        return table(*real_type, id.as_deref(), bind, format, seed);
    }
    no_text(format)?;
    let input = read_input(cli.input.as_ref(), stdin, tol)?;
    match &cli.command {
        Command::Kob(args) => {
            let (x, y) = input.pair()?;
            let r = sandwich(input.domain()?, x, y, &args.config(), &rng)?;
            match format {
                Format::Csv => csv_table(
                    &["lower", "upper", "exact", "gap", "segments", "heuristic", "seed"],
                    &[vec![
                        sci(r.lower),
                        sci(r.upper),
                        r.exact.map(sci).unwrap_or_default(),
                        sci(r.gap),
                        r.chain_witness.segments().to_string(),
                        r.heuristic.to_string(),
                        r.seed.to_string(),
                    ]],
                ),
                _ => to_json(&r),
            }
        }
        Command::Carat(args) => {
            let (x, y) = input.pair()?;
            let dom = input.domain()?;
            let duals = sample_duals(dom, x, y, args.dual_samples, &rng.split(1))?;
            let b = caratheodory_lower(dom, x, y, &duals, !args.no_optimize, &rng.split(2))?;
            match format {
                Format::Csv => csv_table(
                    &["value", "sampled_value", "duals", "seed"],
                    &[vec![sci(b.value), sci(b.sampled_value), duals.len().to_string(), seed.to_string()]],
                ),
                _ => to_json(&json!({
                    "value": b.value,
                    "sampled_value": b.sampled_value,
                    "dual_witness": [b.xi, b.eta],
                    "duals": duals.len(),
                    "optimized": !args.no_optimize,
                    "seed": seed,
                })),
            }
        }
        Command::Chain => {
            let (x, y) = input.pair()?;
            let dom = input
                .domain()?
                .as_symmetric()
                .ok_or_else(|| Error::InvalidInput("`chain` needs a symmetric domain".into()))?;
            let c = geodesic_r_chain(dom, x, y)?;
            let k = kobayashi_closed_form(dom, x, y)?;
            match format {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = c
                        .segment_lengths
                        .iter()
                        .enumerate()
                        .map(|(i, l)| vec![i.to_string(), sci(*l), seed.to_string()])
                        .collect();
                    csv_table(&["segment", "length", "seed"], &rows)
                }
                _ => to_json(&json!({
                    "points": c.points,
                    "segment_lengths": c.segment_lengths,
                    "total": c.total(),
                    "closed_form": k,
                    "seed": seed,
                })),
            }
        }
        Command::CheckPhoton => {
            let (x, y) = input.pair()?;
            if x.n() != y.n() || x.dim() != y.dim() {
                return Err(Error::DimensionMismatch {
                    what: "plane y",
                    expected: x.dim(),
                    found: y.dim(),
                });
            }
            let ctx = crate::grassmann::GrassmannContext::with_tolerance(x.dim(), x.n() - x.dim(), tol)?;
            let d = arithmetic_distance(&ctx, x, y)?;
            let residual = match photon_through(&ctx, x, y)? {
                Some(ph) if d == 1 => Some(photon_collinearity_residual(&ctx, &ph)?),
                _ => None,
            };
            match format {
                Format::Csv => csv_table(
                    &["arithmetic_distance", "photon_related", "residual", "seed"],
                    &[vec![d.to_string(), (d <= 1).to_string(), residual.map(sci).unwrap_or_default(), seed.to_string()]],
                ),
                _ => to_json(&json!({
                    "arithmetic_distance": d,
                    "photon_related": d <= 1,
                    "residual": residual,
                    "seed": seed,
                })),
            }
        }
        Command::Probe { samples } => {
            let dom = input.domain()?;
            let reports = [
                r_proper_probe(dom, *samples, rng.split(1))?,
                photon_convexity_probe(dom, *samples, rng.split(2))?,
            ];
            match format {
                Format::Csv => csv_table(
                    &["probe", "samples", "passed", "failed", "skipped", "max_components", "heuristic", "seed"],
                    &reports.iter().map(probe_row).collect::<Vec<_>>(),
                ),
                _ => to_json(&json!({ "seed": seed, "reports": reports })),
            }
        }
        Command::Hyperbolicity {
            scales,
            quadruples,
            sandwich,
        } => {
            let cfg = HyperbolicityConfig {
                scales: scales.clone(),
                quadruples_per_scale: *quadruples,
                sandwich: sandwich.config(),
            };
            let rows = hyperbolicity_probe(input.domain()?, &cfg, &rng)?;
            match format {
                Format::Csv => Ok(hyperbolicity_csv(&rows)),
                _ => to_json(&json!({ "seed": seed, "rows": rows })),
            }
        }
        Command::Table { .. } => unreachable!("handled above"),
    }
}

fn table(real_type: bool, id: Option<&str>, bind: &[String], format: Format, seed: u64) -> Result<String> {
    if let Some(id) = id {
        let row = nagano::lookup(id)?;
        if real_type && !row.is_real_type() {
            return Err(Error::InvalidInput(format!("row {} is not of real type", row.id)));
        }
        let bindings = parse_bindings(bind)?;
        if !bindings.is_empty() || row.parameters.is_empty() {
            let c = nagano::instantiate(&row.id, &bindings)?;
            return match format {
                Format::Json => to_json(&json!({ "seed": seed, "row": c })),
                Format::Csv | Format::Text => csv_table(
                    &["id", "algebra", "root", "space", "dim_g_alpha", "compact_isometry", "noncompact_dual", "rank", "real_type", "higher_rank"],
                    &[vec![
                        c.id.clone(),
                        c.algebra.clone(),
                        c.root.clone(),
                        c.space.clone(),
                        c.dim_g_alpha.to_string(),
                        c.compact_isometry.clone(),
                        c.noncompact_dual.clone(),
                        c.rank.to_string(),
                        c.real_type.to_string(),
                        c.higher_rank.to_string(),
                    ]],
                ),
            };
        }
        return emit_rows(&[row], format, seed);
    }
    if !bind.is_empty() {
        return Err(Error::InvalidInput("--bind needs --id".into()));
    }
    let rows: Vec<_> = if real_type {
        nagano::real_type_rows()
    } else {
        nagano::rows().iter().collect()
    };
    emit_rows(&rows, format, seed)
}

fn emit_rows(rows: &[&nagano::NaganoPairRow], format: Format, seed: u64) -> Result<String> {
    match format {
        Format::Text => Ok(nagano::format_table(rows)),
        Format::Json => to_json(&json!({ "seed": seed, "rows": rows })),
        Format::Csv => csv_table(
            &["id", "algebra", "root", "space", "dim_g_alpha", "compact_isometry", "noncompact_dual", "rank", "real_type"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.id.clone(),
                        r.algebra.symbolic(),
                        r.root.symbolic(),
                        r.space.symbolic(),
                        r.dim_g_alpha.to_string(),
                        r.compact_isometry.symbolic(),
                        r.noncompact_dual.symbolic(),
                        r.rank.to_string(),
                        r.is_real_type().to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    }
}

fn error_json(code: &str, message: String, context: serde_json::Value) -> String {
    let mut s = json!({ "code": code, "message": message, "context": context }).to_string();
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command, reading
/// JSON input from `stdin` unless `--input` is given.
pub fn run<I, T>(args: I, stdin: &mut dyn std::io::Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Outcome {
                    code: 0,
                    stdout: e.render().to_string(),
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: error_json("Usage", e.render().to_string().trim_end().to_string(), json!({})),
                },
            };
        }
    };
    match execute(&cli, stdin) {
        Ok(out) => Outcome {
            code: 0,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => {
            let command = format!("{:?}", cli.command);
            let name = command.split([' ', '(', '{']).next().unwrap_or("").to_lowercase();
            Outcome {
                code: 2,
                stdout: String::new(),
                stderr: error_json(
                    e.code(),
                    e.to_string(),
                    json!({
                        "command": name,
                        "input": cli.input.as_ref().map(|p| p.display().to_string()),
                        "seed": cli.seed,
                    }),
                ),
            }
        }
    }
}
