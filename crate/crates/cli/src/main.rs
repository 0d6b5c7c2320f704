//! `grnn-lab`: simulate, check stability of, and classify with gene
//! regulatory neural networks.
//!
//! Exit status is 0 on success, 1 when the model or analysis is at fault and
//! 2 for usage and I/O problems.

mod args;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use grnn_core::classify::{DEFAULT_SAMPLES, DEFAULT_THRESHOLD};
use grnn_core::dynamics::IntegrationConfig;
use grnn_core::network::{preset, validate};
use grnn_core::stability::DEFAULT_EPSILON;
use grnn_core::Grnn;

use args::{parse_grid, parse_input, parse_override, parse_range, AxisRange, Override};
use run::{apply_overrides, AxisEcho, Integration, Mode, Output, Run, Source, Task};

/// Usage mistakes that clap cannot catch; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "grnn-lab", version, about = "Gene regulatory neural network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network spec and list every violation.
    Validate {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Steady state of every gene at fixed inputs.
    SteadyState {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        inputs: InputArgs,
        /// Also write `steady_state.csv` and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the coupled network from rest.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        integration: IntegrationArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues, Lyapunov derivative traces and stabilization times.
    Stability {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        integration: IntegrationArgs,
        #[arg(long, value_enum, default_value = "coupled")]
        mode: Mode,
        /// Band around zero, relative to each trace's peak |dV/dt|.
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep two inputs and classify every gene against a threshold.
    Classify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        inputs: InputArgs,
        /// Swept axes as `x:<lo>:<hi>,y:<lo>:<hi>`, naming inputs by id.
        #[arg(long, value_parser = parse_range)]
        range: Option<(AxisRange, AxisRange)>,
        /// Samples per axis as `<nx>x<ny>`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value = "normalized")]
        output: Output,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write here instead of the recorded directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Spec file; same as --spec.
    #[arg(value_name = "SPEC")]
    path: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Built-in network: multilayer, random_structured or ecoli.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Parameter set of a built-in network.
    #[arg(long, value_name = "N")]
    param_set: Option<u8>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "GENE.PARAM=VALUE", value_parser = parse_override)]
    overrides: Vec<Override>,
}

impl SourceArgs {
    fn source(&self) -> Result<Source> {
        let source = match (&self.path, &self.spec, &self.builtin) {
            (Some(p), None, None) | (None, Some(p), None) => {
                if self.param_set.is_some() {
                    bail!(UsageError("--param-set only applies to --builtin".into()));
                }
                Source::Spec { path: p.display().to_string() }
            }
            (None, None, Some(name)) => Source::Builtin { name: name.clone(), param_set: self.param_set.unwrap_or(1) },
            (None, None, None) => bail!(UsageError("give a spec file, --spec or --builtin".into())),
            _ => bail!(UsageError("give exactly one of a spec file, --spec or --builtin".into())),
        };
        Ok(source)
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input TF concentration as `id=value`, repeatable. Built-in networks
    /// supply defaults.
    #[arg(long = "input", value_name = "ID=VALUE", value_parser = parse_input)]
    inputs: Vec<(String, f64)>,
}

#[derive(Args)]
struct IntegrationArgs {
    /// Horizon in seconds; defaults to 40 over the slowest decay rate.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = IntegrationConfig::default().rel_tol)]
    rel_tol: f64,
    #[arg(long, default_value_t = IntegrationConfig::default().abs_tol)]
    abs_tol: f64,
    /// Output samples on [0, t_end].
    #[arg(long, default_value_t = IntegrationConfig::default().samples)]
    samples: usize,
}

impl IntegrationArgs {
    fn resolve(&self, net: &Grnn) -> Result<Integration> {
        let t_end = match self.t_end {
            Some(t) => t,
            None => IntegrationConfig::settling(net)?.t_end,
        };
        Ok(Integration { t_end, rel_tol: self.rel_tol, abs_tol: self.abs_tol, samples: self.samples })
    }
}

struct Prepared {
    source: Source,
    base: Grnn,
    overrides: Vec<Override>,
    net: Grnn,
}

fn prepare(args: &SourceArgs) -> Result<Prepared> {
    let source = args.source()?;
    let base = source.load()?;
    let net = apply_overrides(&base, &args.overrides)?;
    Ok(Prepared { source, base, overrides: args.overrides.clone(), net })
}

fn build_run(p: Prepared, inputs: &InputArgs, task: Task, out: Option<PathBuf>) -> Run {
    let mut assigned = p.source.default_inputs();
    for (id, v) in &inputs.inputs {
        assigned.set(id, *v);
    }
    Run { source: p.source, base: p.base, overrides: p.overrides, inputs: assigned, task, out }
}

/// Sweep axes from `--range`, the built-in preset, or the first two inputs
/// over [0, 1e-3].
fn axes(
    source: &Source,
    net: &Grnn,
    range: Option<(AxisRange, AxisRange)>,
    grid: (usize, usize),
) -> Result<(AxisEcho, AxisEcho)> {
    let preset_axes = match source {
        Source::Builtin { name, .. } => preset(name).ok().map(|p| p.sweep),
        Source::Spec { .. } => None,
    };
    let default_ids = match preset_axes {
        Some(s) => [s.x.to_string(), s.y.to_string()],
        None if net.inputs.len() >= 2 => [net.inputs[0].clone(), net.inputs[1].clone()],
        None => bail!("classification needs two inputs; the network declares {}", net.inputs.len()),
    };
    let (lo, hi) = preset_axes.map_or((0.0, 1e-3), |s| (s.lo, s.hi));
    let (rx, ry) = range.unwrap_or_else(|| {
        (AxisRange { id: default_ids[0].clone(), lo, hi }, AxisRange { id: default_ids[1].clone(), lo, hi })
    });
    // `x` and `y` name the default axes unless the network has inputs by those names.
    let id = |r: &AxisRange, alias: &str, fallback: &str| {
        if r.id == alias && !net.is_input(alias) {
            fallback.to_string()
        } else {
            r.id.clone()
        }
    };
    Ok((
        AxisEcho { input: id(&rx, "x", &default_ids[0]), lo: rx.lo, hi: rx.hi, samples: grid.0 },
        AxisEcho { input: id(&ry, "y", &default_ids[1]), lo: ry.lo, hi: ry.hi, samples: grid.1 },
    ))
}

fn finish(run: &Run) -> Result<ExitCode> {
    let outcome = run.execute()?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    run.write(&outcome)?;
    print!("{}", outcome.stdout);
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let run = match cli.command {
        Command::Validate { source } => {
            let base = source.source()?.load()?;
            let mut net = base;
            for o in &source.overrides {
                net.set_param(&o.gene, &o.param, o.value)?;
            }
            let report = validate(&net);
            if report.is_ok() {
                println!("ok: {} inputs, {} genes, {} edges", net.inputs.len(), net.genes.len(), net.edges.len());
                return Ok(ExitCode::SUCCESS);
            }
            for v in &report.violations {
                println!("{v}");
            }
            return Ok(ExitCode::from(1));
        }
        Command::SteadyState { source, inputs, out } => build_run(prepare(&source)?, &inputs, Task::SteadyState, out),
        Command::Simulate { source, inputs, integration, out } => {
            let p = prepare(&source)?;
            let task = Task::Simulate { integration: integration.resolve(&p.net)? };
            build_run(p, &inputs, task, Some(out))
        }
        Command::Stability { source, inputs, integration, mode, epsilon, out } => {
            let p = prepare(&source)?;
            let task = Task::Stability { mode, epsilon, integration: integration.resolve(&p.net)? };
            build_run(p, &inputs, task, Some(out))
        }
        Command::Classify { source, inputs, range, grid, threshold, output, out } => {
            let p = prepare(&source)?;
            let grid = grid.unwrap_or((DEFAULT_SAMPLES, DEFAULT_SAMPLES));
            let (x, y) = axes(&p.source, &p.net, range, grid)?;
            build_run(p, &inputs, Task::Classify { x, y, threshold, output }, Some(out))
        }
        Command::Replay { manifest, out } => Run::from_manifest(&manifest, out)?,
    };
    finish(&run)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(grnn_core::Error::Io(_)) = cause.downcast_ref::<grnn_core::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
