//! Resolved runs, their artifacts and the manifest that reproduces them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use grnn_core::classify::{extract_boundary, sweep, Axis, OutputMode, SweepConfig};
use grnn_core::dynamics::{simulate, stiffness_warning, InitialState, IntegrationConfig};
use grnn_core::network::{builtin, parse_spec, preset, propagate_steady_state, save_spec, validate, Plan};
use grnn_core::numfmt::real;
use grnn_core::stability::{analyze, StabilityConfig, StabilityMode};
use grnn_core::{Grnn, InputAssignment};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::args::{parse_override, Override};
use crate::UsageError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Builtin { name: String, param_set: u8 },
    Spec { path: String },
}

impl Source {
    /// The network document as loaded, before overrides.
    pub fn load(&self) -> Result<Grnn> {
        match self {
            Source::Builtin { name, param_set } => {
                let p = preset(name).map_err(|e| UsageError(e.to_string()))?;
                p.document(*param_set).map_err(|e| UsageError(e.to_string()))?;
                Ok(builtin(name, *param_set)?)
            }
            Source::Spec { path } => {
                let text = fs::read_to_string(path).with_context(|| format!("cannot read spec `{path}`"))?;
                Ok(parse_spec(&text).with_context(|| format!("in spec `{path}`"))?)
            }
        }
    }

    pub fn default_inputs(&self) -> InputAssignment {
        match self {
            Source::Builtin { name, .. } => preset(name).map(|p| p.inputs()).unwrap_or_default(),
            Source::Spec { .. } => InputAssignment::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Coupled,
    QuasiStatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Normalized,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub samples: usize,
}

impl Integration {
    fn config(&self) -> IntegrationConfig {
        IntegrationConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_end: self.t_end,
            max_step: None,
            samples: self.samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisEcho {
    pub input: String,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl AxisEcho {
    fn axis(&self) -> Axis {
        Axis::new(&self.input, self.lo, self.hi, self.samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    SteadyState,
    Simulate { integration: Integration },
    Stability { mode: Mode, epsilon: f64, integration: Integration },
    Classify { x: AxisEcho, y: AxisEcho, threshold: f64, output: Output },
}

/// Everything needed to produce one artifact set.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub source: Source,
    /// Network as loaded, before overrides.
    pub base: Grnn,
    pub overrides: Vec<Override>,
    pub inputs: InputAssignment,
    pub task: Task,
    pub out: Option<PathBuf>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub source: Source,
    pub network: serde_json::Value,
    pub overrides: Vec<String>,
    pub inputs: IndexMap<String, f64>,
    #[serde(flatten)]
    pub task: Task,
    pub out: String,
    pub artifacts: Vec<String>,
}

/// Computed results, not yet written anywhere.
pub struct Outcome {
    pub artifacts: Vec<(String, String)>,
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Run {
    /// The network with overrides applied and invariants checked.
    pub fn network(&self) -> Result<Grnn> {
        apply_overrides(&self.base, &self.overrides)
    }

    pub fn execute(&self) -> Result<Outcome> {
        let net = self.network()?;
        let mut artifacts = Vec::new();
        let mut stdout = String::new();
        let mut warnings = Vec::new();
        match &self.task {
            Task::SteadyState => {
                let states = propagate_steady_state(&net, &self.inputs)?;
                let mut csv = String::from("gene,rna,protein,normalized\n");
                for (id, s) in &states {
                    csv.push_str(&format!("{id},{},{},{}\n", real(s.rna), real(s.protein), real(s.normalized)));
                }
                stdout.push_str(&csv);
                artifacts.push(("steady_state.csv".to_string(), csv));
            }
            Task::Simulate { integration } => {
                let trace = simulate(&net, &self.inputs, &InitialState::new(), &integration.config())?;
                warnings.extend(trace.warnings.iter().cloned());
                stdout.push_str("gene,time,rna,protein\n");
                for id in trace.genes.keys() {
                    let s = trace.terminal(id)?;
                    stdout.push_str(&format!("{id},{},{},{}\n", real(s.time), real(s.rna), real(s.protein)));
                }
                artifacts.push(("trace.csv".to_string(), trace.to_csv()));
            }
            Task::Stability { mode, epsilon, integration } => {
                warnings.extend(stiffness_warning(&Plan::new(&net)?));
                let cfg = StabilityConfig {
                    mode: match mode {
                        Mode::Coupled => StabilityMode::Coupled,
                        Mode::QuasiStatic => StabilityMode::QuasiStatic,
                    },
                    epsilon: *epsilon,
                    integration: integration.config(),
                };
                let report = analyze(&net, &self.inputs, &cfg)?;
                for (id, g) in &report.genes {
                    artifacts.push((format!("{}.csv", file_stem(id)), g.trace.to_csv()));
                }
                let summary = report.summary_csv();
                stdout.push_str(&summary);
                stdout.push_str(&format!(
                    "network,stabilization_time,{}\n",
                    report.network_time.map_or("not_reached".to_string(), real)
                ));
                artifacts.push(("summary.csv".to_string(), summary));
            }
            Task::Classify { x, y, threshold, output } => {
                let cfg = SweepConfig {
                    threshold: *threshold,
                    mode: match output {
                        Output::Normalized => OutputMode::Normalized,
                        Output::Raw => OutputMode::Raw,
                    },
                    ..SweepConfig::default()
                };
                let grid = sweep(&net, &x.axis(), &y.axis(), &self.inputs, &cfg)?;
                artifacts.push(("grid.csv".to_string(), grid.to_csv()));
                let mut areas = IndexMap::new();
                for id in net.genes.keys() {
                    let metrics = extract_boundary(&grid, id)?;
                    areas.insert(id.clone(), metrics.area_fraction);
                    artifacts.push((format!("{}.pgm", file_stem(id)), grid.mask_pgm(id)?));
                    artifacts.push((format!("{}.json", file_stem(id)), metrics.to_json()));
                }
                stdout.push_str("gene,area_fraction\n");
                for id in &net.outputs {
                    stdout.push_str(&format!("{id},{}\n", real(areas[id])));
                }
            }
        }
        Ok(Outcome { artifacts, stdout, warnings })
    }

    pub fn manifest(&self, out: &Path, outcome: &Outcome) -> Manifest {
        let network = serde_json::from_str(&save_spec(&self.base)).expect("saved specs are valid JSON");
        Manifest {
            tool: format!("grnn-lab {}", env!("CARGO_PKG_VERSION")),
            source: self.source.clone(),
            network,
            overrides: self.overrides.iter().map(|o| o.to_string()).collect(),
            inputs: self.inputs.iter().map(|(k, v)| (k.to_string(), v)).collect(),
            task: self.task.clone(),
            out: out.display().to_string(),
            artifacts: outcome.artifacts.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// Writes every artifact and then the manifest. Nothing is written unless
    /// the whole run succeeded.
    pub fn write(&self, outcome: &Outcome) -> Result<()> {
        let Some(out) = &self.out else { return Ok(()) };
        fs::create_dir_all(out).with_context(|| format!("cannot create `{}`", out.display()))?;
        for (name, body) in &outcome.artifacts {
            let path = out.join(name);
            fs::write(&path, body).with_context(|| format!("cannot write `{}`", path.display()))?;
        }
        let mut text = serde_json::to_string_pretty(&self.manifest(out, outcome))?;
        text.push('\n');
        let path = out.join(MANIFEST);
        fs::write(&path, text).with_context(|| format!("cannot write `{}`", path.display()))?;
        Ok(())
    }

    /// Rebuilds a run from a manifest. `out` replaces the recorded directory.
    pub fn from_manifest(path: &Path, out: Option<PathBuf>) -> Result<Run> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read manifest `{}`", path.display()))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("`{}` is not a run manifest: {e}", path.display())))?;
        let base = parse_spec(&m.network.to_string()).context("manifest network")?;
        let overrides = m.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
        Ok(Run {
            source: m.source,
            base,
            overrides,
            inputs: m.inputs.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
            task: m.task,
            out: Some(out.unwrap_or_else(|| PathBuf::from(m.out))),
        })
    }
}

pub fn apply_overrides(base: &Grnn, overrides: &[Override]) -> Result<Grnn> {
    let mut net = base.clone();
    for o in overrides {
        net.set_param(&o.gene, &o.param, o.value).with_context(|| format!("override `{o}`"))?;
    }
    validate(&net).into_result()?;
    Ok(net)
}

/// Gene ids as file names: anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(file_stem("g1,1"), "g1_1");
        assert_eq!(file_stem("../b1891"), ".._b1891");
    }

    #[test]
    fn manifest_round_trip() {
        let source = Source::Builtin { name: "multilayer".into(), param_set: 2 };
        let run = Run {
            base: source.load().unwrap(),
            source,
            overrides: vec![parse_override("g12.k1=0.25").unwrap()],
            inputs: InputAssignment::new().with("x1", 1e-7).with("x2", 3.3e-8),
            task: Task::Stability {
                mode: Mode::QuasiStatic,
                epsilon: 1e-3,
                integration: Integration { t_end: 1.0 / 3.0, rel_tol: 1e-8, abs_tol: 1e-10, samples: 7 },
            },
            out: Some(PathBuf::from("unused")),
        };
        let outcome =
            Outcome { artifacts: vec![("a.csv".into(), String::new())], stdout: String::new(), warnings: vec![] };
        let m = run.manifest(Path::new("unused"), &outcome);
        let text = serde_json::to_string_pretty(&m).unwrap();
        let dir = std::env::temp_dir().join(format!("grnn-lab-manifest-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(MANIFEST);
        fs::write(&path, &text).unwrap();
        let back = Run::from_manifest(&path, None).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(back, run);
    }
}
