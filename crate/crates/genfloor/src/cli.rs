//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use genfloor_core::eval::evaluate;
use genfloor_core::extend::extend_layout;
use genfloor_core::geom::Rect;
use genfloor_core::io::{write_run_dir, ExtendedDoc, FloorplanDoc};
use genfloor_core::model::{build_standard_tree, load_requirements_csv, Problem, Representation};
use genfloor_core::perturb::{perturb, PermutationParams};
use genfloor_core::placement::place;
use genfloor_core::render::{render_bubble_svg, render_floorplan_svg, render_tree_svg, RenderKind, RenderSpec};
use genfloor_core::search::{nsga2_run, Constraint, GAConfig, Objective, RunOptions};
use genfloor_core::units::{parse_decimal, Len};
use genfloor_core::Error;

#[derive(Debug, Parser)]
#[command(name = "genfloor", version, about = "Tree-encoded floorplan generation and search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place one layout from permutation parameters.
    Generate(GenerateArgs),
    /// Score a layout.
    Evaluate(EvaluateArgs),
    /// Run NSGA-II and write a run directory.
    Optimize(OptimizeArgs),
    /// Scale and grow a layout into a rectangular boundary.
    Extend(ExtendArgs),
    /// Draw a layout as SVG.
    Render(RenderArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Requirement sheet (CSV) or problem document (JSON).
    #[arg(long, alias = "problem")]
    pub reqs: PathBuf,
    #[arg(long, default_value = "bstar_available_nodes")]
    pub method: Representation,
    /// Comma-separated values, `up:down` pairs for ascend/descend. Defaults
    /// to the identity parameters.
    #[arg(long)]
    pub params: Option<String>,
    /// Comma-separated 0/1 flags, one per requirement.
    #[arg(long)]
    pub rotations: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub layout: PathBuf,
    /// Problem to score against; defaults to the one embedded in the layout.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    pub min_shared: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Overrides the problem's representation.
    #[arg(long)]
    pub method: Option<Representation>,
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 15)]
    pub gens: usize,
    #[arg(long, default_value_t = 0.2)]
    pub crossover: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mutation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated subset of `adjacency,area,distance`.
    #[arg(long, default_value = "adjacency,area")]
    pub objectives: String,
    /// Treat layouts achieving fewer goal endpoints than this as infeasible.
    #[arg(long)]
    pub min_adjacency: Option<usize>,
    #[arg(long)]
    pub rotation_genes: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub layout: PathBuf,
    /// `WxH`, optionally `WxH+X+Y`.
    #[arg(long)]
    pub boundary: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long, default_value = "floorplan")]
    pub kind: RenderKind,
    #[arg(long, default_value_t = 480)]
    pub size: u32,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long)]
    pub state: Option<PathBuf>,
}

/// An input problem: user-facing, so mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

fn invalid(e: impl ToString) -> anyhow::Error {
    Invalid(e.to_string()).into()
}

fn core(e: Error) -> anyhow::Error {
    if e.is_validation() {
        invalid(e)
    } else {
        e.into()
    }
}

/// Exit status for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Invalid>().is_some() {
        2
    } else {
        1
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{}", text.trim_end()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

/// Loads a CSV sheet or a JSON problem document.
pub fn load_problem(path: &Path, method: Option<Representation>) -> anyhow::Result<Problem> {
    let text = read(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let problem = if is_csv {
        let sheet = load_requirements_csv(&text).map_err(core)?;
        Problem::from_sheet(sheet, method.unwrap_or_default()).map_err(core)?
    } else {
        let p: Problem = serde_json::from_str(&text).map_err(invalid)?;
        match method {
            Some(m) => p.with_representation(m),
            None => p,
        }
    };
    Ok(problem)
}

fn load_layout(path: &Path) -> anyhow::Result<FloorplanDoc> {
    FloorplanDoc::from_json(&read(path)?).map_err(core)
}

fn parse_rotations(text: &str, n: usize) -> anyhow::Result<Vec<bool>> {
    let flags = text
        .split(',')
        .map(|t| match t.trim().to_ascii_lowercase().as_str() {
            "1" | "true" | "t" => Ok(true),
            "0" | "false" | "f" => Ok(false),
            other => Err(invalid(format!("bad rotation flag `{other}`"))),
        })
        .collect::<anyhow::Result<Vec<bool>>>()?;
    if flags.len() != n {
        return Err(invalid(format!("expected {n} rotation flags, got {}", flags.len())));
    }
    Ok(flags)
}

/// Parses `WxH` or `WxH+X+Y`.
pub fn parse_boundary(text: &str) -> anyhow::Result<Rect> {
    let bad = || invalid(format!("boundary must look like WxH or WxH+X+Y, got `{text}`"));
    let mut parts = text.split('+');
    let size = parts.next().ok_or_else(bad)?;
    let (w, h) = size.split_once(['x', 'X']).ok_or_else(bad)?;
    let num = |s: &str| parse_decimal(s).ok_or_else(bad);
    let (w, h) = (num(w)?, num(h)?);
    let x = parts.next().map(num).transpose()?.unwrap_or(0);
    let y = parts.next().map(num).transpose()?.unwrap_or(0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Rect::new(x, y, w, h))
}

fn parse_objectives(text: &str) -> anyhow::Result<Vec<Objective>> {
    text.split(',')
        .map(|t| match t.trim() {
            "adjacency" => Ok(Objective::MaximizeAdjacency),
            "area" => Ok(Objective::MinimizeBoundingArea),
            "distance" => Ok(Objective::MinimizeTotalClosestDistance),
            other => Err(invalid(format!("unknown objective `{other}`"))),
        })
        .collect()
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let p = load_problem(&a.reqs, Some(a.method))?;
            let params = match &a.params {
                Some(t) => PermutationParams::parse(a.method, t).map_err(core)?,
                None => PermutationParams::identity(a.method, p.n()),
            };
            params.validate(p.n()).map_err(core)?;
            let rotations = match &a.rotations {
                Some(t) => parse_rotations(t, p.n())?,
                None => Vec::new(),
            };
            let tree = perturb(&build_standard_tree(&p), &params).map_err(core)?;
            let fp = place(&tree, p.requirements(), &rotations);
            emit(a.output.as_deref(), &FloorplanDoc::new(&p, &fp, Some(params)).to_json())
        }
        Command::Evaluate(a) => {
            let doc = load_layout(&a.layout)?;
            let p = match &a.problem {
                Some(path) => load_problem(path, Some(doc.representation))?,
                None => doc.problem().map_err(core)?,
            };
            let min_shared: Len = parse_decimal(&a.min_shared)
                .filter(|v| *v >= 0)
                .ok_or_else(|| invalid("min-shared must be a non-negative decimal"))?;
            let fp = doc.floorplan(p.requirements()).map_err(core)?;
            let report = evaluate(&p, &fp, min_shared).map_err(core)?;
            emit(a.output.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::Optimize(a) => {
            let p = load_problem(&a.problem, a.method)?;
            let p = if a.rotation_genes { p.with_rotation_genes(true) } else { p };
            let mut config = GAConfig {
                population: a.pop,
                generations: a.gens,
                crossover_rate: a.crossover,
                mutation_rate: a.mutation,
                seed: a.seed,
                objectives: parse_objectives(&a.objectives)?,
                ..GAConfig::default()
            };
            config.constraints.extend(a.min_adjacency.map(Constraint::MinAdjacency));
            config.validate().map_err(core)?;
            let result = nsga2_run(
                &p,
                &config,
                RunOptions {
                    threads: a.threads,
                    observer: None,
                },
            )
            .map_err(core)?;
            write_run_dir(&a.output, &p, &config, &result).map_err(core)?;
            let best = result.history.last().and_then(|h| h.best_adjacency);
            eprintln!(
                "{} pareto solutions, best adjacency {}/{}",
                result.pareto.len(),
                best.map_or("-".into(), |b| b.to_string()),
                p.adjacency_count()
            );
            Ok(())
        }
        Command::Extend(a) => {
            let doc = load_layout(&a.layout)?;
            let p = doc.problem().map_err(core)?;
            let fp = doc.floorplan(p.requirements()).map_err(core)?;
            let ex = extend_layout(&fp, p.requirements(), parse_boundary(&a.boundary)?).map_err(core)?;
            emit(a.output.as_deref(), &ExtendedDoc::new(&p, &fp, &ex).to_json())
        }
        Command::Render(a) => {
            let doc = load_layout(&a.layout)?;
            let p = doc.problem().map_err(core)?;
            let fp = doc.floorplan(p.requirements()).map_err(core)?;
            let spec = RenderSpec {
                kind: a.kind,
                size: a.size,
                ..RenderSpec::default()
            };
            let svg = match a.kind {
                RenderKind::Floorplan => render_floorplan_svg(&fp, p.requirements(), &spec),
                RenderKind::Bubble => render_bubble_svg(&fp, p.requirements(), p.goal_pairs(), 0, &spec),
                RenderKind::Tree => render_tree_svg(&fp.tree, &spec),
            }
            .map_err(core)?;
            emit(a.output.as_deref(), &svg)
        }
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve(a.port, a.state))?;
            Ok(())
        }
    }
}

/// Rejects a layout whose blocks overlap; used by callers that accept
/// hand-written documents.
pub fn check_layout(doc: &FloorplanDoc, p: &Problem) -> anyhow::Result<()> {
    let fp = doc.floorplan(p.requirements()).map_err(core)?;
    if let Some((a, b)) = fp.first_overlap() {
        bail!(Invalid(format!("blocks {a} and {b} overlap")));
    }
    Ok(())
}
