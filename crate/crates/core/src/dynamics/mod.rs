//! Time-domain simulation of whole networks.
//!
//! The state vector holds `(rna, protein)` for every gene in plan order and
//! is advanced with an adaptive Dormand–Prince 5(4) integrator. Samples come
//! from the integrator's dense output on a uniform grid.

mod ode;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetics::{ClosedForm, GeneState};
use crate::network::{Grnn, InputAssignment, Plan};
use crate::numfmt::real;

pub(crate) use ode::{integrate, Tolerances};

/// Ratio of fastest to slowest decay rate above which a warning is attached.
pub const STIFFNESS_WARN_RATIO: f64 = 1e4;

/// Settling horizon in units of the slowest decay time.
pub const SETTLE_DECAYS: f64 = 40.0;

const MAX_STEPS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Upper bound on the step size; unbounded when `None`.
    pub max_step: Option<f64>,
    /// Number of uniformly spaced samples on `[0, t_end]`, both ends included.
    pub samples: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig { rel_tol: 1e-8, abs_tol: 1e-10, t_end: 100.0, max_step: None, samples: 1000 }
    }
}

impl IntegrationConfig {
    pub fn new(t_end: f64) -> Self {
        IntegrationConfig { t_end, ..Default::default() }
    }

    /// Horizon long enough for every gene to settle: `40 / min(d1, d2)`.
    pub fn settling(net: &Grnn) -> Result<Self> {
        Ok(Self::new(settling_time(&Plan::new(net)?)))
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and non-negative, got {}", self.t_end));
        }
        if let Some(h) = self.max_step {
            if h.is_nan() || h <= 0.0 {
                return bad(format!("max_step must be positive, got {h}"));
            }
        }
        if self.t_end > 0.0 && self.samples < 2 {
            return bad(format!("need at least 2 samples for t_end > 0, got {}", self.samples));
        }
        if self.samples == 0 {
            return bad("need at least one sample".into());
        }
        Ok(())
    }

    /// Uniform sample grid. A zero horizon yields the single time 0.
    pub fn sample_times(&self) -> Vec<f64> {
        if self.t_end == 0.0 {
            return vec![0.0];
        }
        let last = self.samples - 1;
        (0..self.samples).map(|i| if i == last { self.t_end } else { self.t_end * i as f64 / last as f64 }).collect()
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            max_steps: MAX_STEPS,
            non_negative: true,
        }
    }
}

pub fn settling_time(plan: &Plan) -> f64 {
    let slowest = plan.genes().iter().flat_map(|g| [g.d1, g.d2]).fold(f64::INFINITY, f64::min);
    SETTLE_DECAYS / slowest
}

pub fn stiffness_warning(plan: &Plan) -> Option<String> {
    let rates = plan.genes().iter().flat_map(|g| [g.d1, g.d2]);
    let (lo, hi) = rates.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    (hi / lo > STIFFNESS_WARN_RATIO)
        .then(|| format!("decay rates span a ratio of {:.3e}; explicit integration may need many steps", hi / lo))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GeneSeries {
    pub rna: Vec<f64>,
    pub protein: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimTrace {
    pub times: Vec<f64>,
    /// Series per gene, in gene declaration order.
    pub genes: IndexMap<String, GeneSeries>,
    /// Accepted integrator steps.
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, gene: &str) -> Result<&GeneSeries> {
        self.genes.get(gene).ok_or_else(|| Error::UnknownGene(gene.to_string()))
    }

    pub fn terminal(&self, gene: &str) -> Result<GeneState> {
        let s = self.series(gene)?;
        let t = *self.times.last().expect("traces hold at least one sample");
        Ok(GeneState::new(*s.rna.last().unwrap(), *s.protein.last().unwrap(), t))
    }

    /// CSV with header `time,<gene>.rna,<gene>.protein,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for id in self.genes.keys() {
            out.push_str(&format!(",{id}.rna,{id}.protein"));
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&real(*t));
            for s in self.genes.values() {
                out.push(',');
                out.push_str(&real(s.rna[i]));
                out.push(',');
                out.push_str(&real(s.protein[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Initial state per gene id; genes not listed start at zero.
pub type InitialState = IndexMap<String, GeneState>;

/// States sampled in plan order: `states[k]` is `[r0, p0, r1, p1, ...]` at
/// `times[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub steps: usize,
}

impl PlanTrace {
    pub fn rna(&self, gene: usize, k: usize) -> f64 {
        self.states[k][2 * gene]
    }

    pub fn protein(&self, gene: usize, k: usize) -> f64 {
        self.states[k][2 * gene + 1]
    }
}

/// Right-hand side of the coupled system.
pub(crate) fn network_rhs(plan: &Plan, inputs: &[f64], y: &[f64], dy: &mut [f64]) {
    for (g, gene) in plan.genes().iter().enumerate() {
        let h = plan.hill(g, inputs, |j| y[2 * j + 1]);
        let (r, p) = (y[2 * g], y[2 * g + 1]);
        dy[2 * g] = gene.k1 * gene.copy_number * h - gene.d1 * r;
        dy[2 * g + 1] = gene.k2 * r - gene.d2 * p;
    }
}

/// Integrates a compiled plan at the given sample times. `init` holds one
/// state per gene in plan order.
pub fn simulate_plan_at(
    plan: &Plan,
    inputs: &[f64],
    init: &[GeneState],
    times: &[f64],
    cfg: &IntegrationConfig,
) -> Result<PlanTrace> {
    cfg.check()?;
    if inputs.len() != plan.n_inputs {
        return Err(Error::InvalidArgument(format!("expected {} input values, got {}", plan.n_inputs, inputs.len())));
    }
    if init.len() != plan.len() {
        return Err(Error::InvalidArgument(format!("expected {} initial states, got {}", plan.len(), init.len())));
    }
    if times.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        || times.first().is_some_and(|&t| t.is_nan() || t < 0.0)
    {
        return Err(Error::InvalidArgument("sample times must be non-negative and strictly increasing".into()));
    }
    let y0: Vec<f64> = init.iter().flat_map(|s| [s.rna, s.protein]).collect();
    let (states, steps) = integrate(|_, y, dy| network_rhs(plan, inputs, y, dy), &y0, times, &cfg.tolerances())?;
    Ok(PlanTrace { times: times.to_vec(), states, steps })
}

pub fn simulate_plan(plan: &Plan, inputs: &[f64], init: &[GeneState], cfg: &IntegrationConfig) -> Result<PlanTrace> {
    cfg.check()?;
    simulate_plan_at(plan, inputs, init, &cfg.sample_times(), cfg)
}

pub(crate) fn resolve_init(net: &Grnn, plan: &Plan, init: &InitialState) -> Result<Vec<GeneState>> {
    for (id, s) in init {
        if !net.genes.contains_key(id) {
            return Err(Error::UnknownGene(id.clone()));
        }
        for (name, v) in [("rna", s.rna), ("protein", s.protein)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "initial {name} of `{id}` must be finite and non-negative, got {v}"
                )));
            }
        }
    }
    Ok(plan
        .genes()
        .iter()
        .map(|g| {
            let s = init.get(&g.id).copied().unwrap_or_default();
            GeneState::new(s.rna, s.protein, 0.0)
        })
        .collect())
}

/// Integrates the coupled network from `init` (all-zero where unlisted).
pub fn simulate(
    net: &Grnn,
    inputs: &InputAssignment,
    init: &InitialState,
    cfg: &IntegrationConfig,
) -> Result<SimTrace> {
    let plan = Plan::new(net)?;
    let values = inputs.resolve(net)?;
    let start = resolve_init(net, &plan, init)?;
    let trace = simulate_plan(&plan, &values, &start, cfg)?;
    Ok(to_sim_trace(net, &plan, trace))
}

fn to_sim_trace(net: &Grnn, plan: &Plan, trace: PlanTrace) -> SimTrace {
    let per_plan: Vec<GeneSeries> = (0..plan.len())
        .map(|g| GeneSeries {
            rna: (0..trace.times.len()).map(|k| trace.rna(g, k)).collect(),
            protein: (0..trace.times.len()).map(|k| trace.protein(g, k)).collect(),
        })
        .collect();
    SimTrace {
        genes: plan.by_declaration(net, &per_plan),
        times: trace.times,
        steps: trace.steps,
        warnings: stiffness_warning(plan).into_iter().collect(),
    }
}

/// Closed-form agreement for one gene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClosedFormCheck {
    /// Sup-norm deviation over the samples, relative to the closed form's
    /// sup-norm, for each species.
    Compared { rna: f64, protein: f64 },
    /// The gene is regulated by other genes, so its regulators are not
    /// constant and the closed form does not describe it.
    Inapplicable,
}

impl ClosedFormCheck {
    pub fn max_deviation(&self) -> Option<f64> {
        match *self {
            ClosedFormCheck::Compared { rna, protein } => Some(rna.max(protein)),
            ClosedFormCheck::Inapplicable => None,
        }
    }
}

/// Relative sup-norm distance between two aligned series.
pub fn relative_sup_deviation(actual: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = actual.iter().zip(reference).fold(0.0f64, |m, (a, r)| m.max((a - r).abs()));
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Integrates the network and compares every gene driven only by external
/// inputs against its analytic trajectory.
pub fn compare_closed_form(
    net: &Grnn,
    inputs: &InputAssignment,
    init: &InitialState,
    cfg: &IntegrationConfig,
) -> Result<IndexMap<String, ClosedFormCheck>> {
    let plan = Plan::new(net)?;
    let values = inputs.resolve(net)?;
    let start = resolve_init(net, &plan, init)?;
    let trace = simulate_plan(&plan, &values, &start, cfg)?;
    let checks: Vec<ClosedFormCheck> = (0..plan.len())
        .map(|g| {
            if !plan.has_constant_regulators(g) {
                return ClosedFormCheck::Inapplicable;
            }
            let h = plan.hill(g, &values, |_| unreachable!("constant regulators only"));
            let cf = ClosedForm::from_hill(&plan.genes()[g], h, start[g]);
            let n = trace.times.len();
            let cf_rna: Vec<f64> = trace.times.iter().map(|&t| cf.rna(t)).collect();
            let cf_protein: Vec<f64> = trace.times.iter().map(|&t| cf.protein(t)).collect();
            let rna: Vec<f64> = (0..n).map(|k| trace.rna(g, k)).collect();
            let protein: Vec<f64> = (0..n).map(|k| trace.protein(g, k)).collect();
            ClosedFormCheck::Compared {
                rna: relative_sup_deviation(&rna, &cf_rna),
                protein: relative_sup_deviation(&protein, &cf_protein),
            }
        })
        .collect();
    Ok(plan.by_declaration(net, &checks))
}
