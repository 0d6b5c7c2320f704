//! Eigenvalue and Lyapunov stability of gene-perceptrons.
//!
//! Each gene is a linear system around its equilibrium, so the Jacobian is
//! lower triangular with eigenvalues `(-d1, -d2)`. Approach to equilibrium is
//! traced through `V = (R - R*)^2 + (P - P*)^2` and its time derivative.

use indexmap::IndexMap;
use serde::Serialize;

use crate::dynamics::{network_rhs, simulate_plan, IntegrationConfig};
use crate::error::{Error, Result};
use crate::kinetics::{decay_gap, hill_product, ClosedForm, GenePerceptron, GeneState, RegulationInput};
use crate::network::{Grnn, InputAssignment, Plan};
use crate::numfmt::real;

/// Default width of the stabilization band relative to the peak `|dV/dt|`.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Jacobian of `(dR/dt, dP/dt)` with respect to `(R, P)`.
pub fn jacobian(gene: &GenePerceptron) -> [[f64; 2]; 2] {
    [[-gene.d1, 0.0], [gene.k2, -gene.d2]]
}

pub fn eigenvalues(gene: &GenePerceptron) -> (f64, f64) {
    (-gene.d1, -gene.d2)
}

pub fn lyapunov_value(gene: &GenePerceptron, regs: &[RegulationInput], state: GeneState) -> Result<f64> {
    let h = hill_product(regs, gene.hill_n)?;
    let dr = state.rna - gene.max_rna() * h;
    let dp = state.protein - gene.max_protein() * h;
    Ok(dr * dr + dp * dp)
}

/// `dV/dt` at time `t` along the trajectory that starts from zero RNA and
/// protein, for a gene whose transcription drive is `drive = k1 * C_N * prod(H)`.
///
/// The expression is the product-over-regulators formula
/// `-2 A^2 / (d1 d2 D^2) * [(d2 D^2 + k2^2 d2) x^2 + k2^2 d1 y^2 - k2^2 (d1 + d2) x y]`
/// with `x = e^{-d1 t}`, `y = e^{-d2 t}`, `D = d1 - d2`, rearranged so the
/// bracket is factored through `(x - y) / D`, which stays finite as `D -> 0`.
pub fn lyapunov_rate_from_rest(drive: f64, k2: f64, d1: f64, d2: f64, t: f64) -> f64 {
    let x = (-d1 * t).exp();
    let y = (-d2 * t).exp();
    let g = decay_gap(d1, d2, t);
    -2.0 * drive * drive / (d1 * d2) * (d2 * x * x + k2 * k2 * g * (d2 * g + y))
}

/// `dV/dt` over `times` from the closed-form expression. Only defined for a
/// zero initial state; use [`lyapunov_derivative_chain`] otherwise.
pub fn lyapunov_derivative_trace(
    gene: &GenePerceptron,
    regs: &[RegulationInput],
    init: GeneState,
    times: &[f64],
) -> Result<Vec<f64>> {
    if !init.is_zero() {
        return Err(Error::Unsupported(
            "the closed-form dV/dt assumes zero initial RNA and protein; \
             use the chain-rule form for other initial states"
                .into(),
        ));
    }
    let drive = gene.k1 * gene.copy_number * hill_product(regs, gene.hill_n)?;
    check_times(times)?;
    Ok(times.iter().map(|&t| lyapunov_rate_from_rest(drive, gene.k2, gene.d1, gene.d2, t)).collect())
}

/// `dV/dt = 2 (R - R*) dR/dt + 2 (P - P*) dP/dt` along the analytic
/// trajectory from any initial state.
pub fn lyapunov_derivative_chain(
    gene: &GenePerceptron,
    regs: &[RegulationInput],
    init: GeneState,
    times: &[f64],
) -> Result<Vec<f64>> {
    let cf = ClosedForm::new(gene, regs, init)?;
    check_times(times)?;
    Ok(times
        .iter()
        .map(|&t| {
            let s = cf.state(t);
            chain_rule(s.rna - cf.rna_star, s.protein - cf.protein_star, cf.rna_rate(t), cf.protein_rate(t))
        })
        .collect())
}

#[inline]
fn chain_rule(dr: f64, dp: f64, rna_rate: f64, protein_rate: f64) -> f64 {
    2.0 * dr * rna_rate + 2.0 * dp * protein_rate
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(Error::InvalidArgument(format!("time {t} must be finite and non-negative"))),
        None => Ok(()),
    }
}

/// First sample time after which `|dV/dt|` stays within `epsilon` times its
/// peak magnitude, or `None` when the last sample is still outside the band.
pub fn stabilization_time(times: &[f64], dvdt: &[f64], epsilon: f64) -> Result<Option<f64>> {
    if times.is_empty() || times.len() != dvdt.len() {
        return Err(Error::InvalidArgument(format!(
            "trace needs matching non-empty times and values ({} vs {})",
            times.len(),
            dvdt.len()
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let peak = dvdt.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let band = epsilon * peak;
    match dvdt.iter().rposition(|v| v.abs() > band) {
        None => Ok(Some(times[0])),
        Some(k) if k + 1 == times.len() => Ok(None),
        Some(k) => Ok(Some(times[k + 1])),
    }
}

/// How regulator concentrations evolve while a gene's `dV/dt` is traced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// Integrate the coupled network; each gene sees its regulators' actual
    /// protein levels over time.
    #[default]
    Coupled,
    /// Hold each gene's regulators at their steady-state levels and use the
    /// closed-form trajectory from rest.
    QuasiStatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityConfig {
    pub mode: StabilityMode,
    pub epsilon: f64,
    pub integration: IntegrationConfig,
}

impl StabilityConfig {
    /// Settling horizon of `net` with default tolerances and sampling.
    pub fn for_network(net: &Grnn) -> Result<Self> {
        Ok(StabilityConfig {
            mode: StabilityMode::default(),
            epsilon: DEFAULT_EPSILON,
            integration: IntegrationConfig::settling(net)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovTrace {
    pub times: Vec<f64>,
    pub dvdt: Vec<f64>,
}

impl LyapunovTrace {
    /// CSV with header `time,dVdt`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,dVdt\n");
        for (t, v) in self.times.iter().zip(&self.dvdt) {
            out.push_str(&format!("{},{}\n", real(*t), real(*v)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneStability {
    pub eigenvalues: (f64, f64),
    pub stable: bool,
    pub trace: LyapunovTrace,
    pub stabilization_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    pub epsilon: f64,
    /// Per gene, in declaration order.
    pub genes: IndexMap<String, GeneStability>,
    /// Latest per-gene stabilization time; `None` if any gene has not
    /// stabilized within the horizon.
    pub network_time: Option<f64>,
}

impl StabilityReport {
    /// CSV with header `gene,lambda1,lambda2,stabilization_time`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("gene,lambda1,lambda2,stabilization_time\n");
        for (id, g) in &self.genes {
            out.push_str(&format!(
                "{id},{},{},{}\n",
                real(g.eigenvalues.0),
                real(g.eigenvalues.1),
                g.stabilization_time.map_or("not_reached".to_string(), real)
            ));
        }
        out
    }
}

/// Per-gene stability of the network at the given inputs, starting every
/// gene from rest.
pub fn analyze(net: &Grnn, inputs: &InputAssignment, cfg: &StabilityConfig) -> Result<StabilityReport> {
    let plan = Plan::new(net)?;
    let values = inputs.resolve(net)?;
    analyze_plan(net, &plan, &values, cfg)
}

pub(crate) fn analyze_plan(net: &Grnn, plan: &Plan, inputs: &[f64], cfg: &StabilityConfig) -> Result<StabilityReport> {
    cfg.integration.check()?;
    let steady = plan.steady_state(inputs);
    let traces: Vec<LyapunovTrace> = match cfg.mode {
        StabilityMode::Coupled => {
            let trace = simulate_plan(plan, inputs, &vec![GeneState::default(); plan.len()], &cfg.integration)?;
            let mut dy = vec![0.0; 2 * plan.len()];
            let mut per_gene = vec![Vec::with_capacity(trace.times.len()); plan.len()];
            for y in &trace.states {
                network_rhs(plan, inputs, y, &mut dy);
                for (g, out) in per_gene.iter_mut().enumerate() {
                    let dr = y[2 * g] - steady[g].rna;
                    let dp = y[2 * g + 1] - steady[g].protein;
                    out.push(chain_rule(dr, dp, dy[2 * g], dy[2 * g + 1]));
                }
            }
            per_gene.into_iter().map(|dvdt| LyapunovTrace { times: trace.times.clone(), dvdt }).collect()
        }
        StabilityMode::QuasiStatic => {
            let times = cfg.integration.sample_times();
            (0..plan.len())
                .map(|g| {
                    let regs = plan.regulation_inputs(g, inputs, |j| steady[j].protein);
                    let dvdt = lyapunov_derivative_trace(&plan.genes()[g], &regs, GeneState::default(), &times)?;
                    Ok(LyapunovTrace { times: times.clone(), dvdt })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let per_gene = traces
        .into_iter()
        .zip(plan.genes())
        .map(|(trace, gene)| {
            let (l1, l2) = eigenvalues(gene);
            Ok(GeneStability {
                eigenvalues: (l1, l2),
                stable: l1 < 0.0 && l2 < 0.0,
                stabilization_time: stabilization_time(&trace.times, &trace.dvdt, cfg.epsilon)?,
                trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let genes = plan.by_declaration(net, &per_gene);
    let network_time = genes.values().try_fold(f64::NEG_INFINITY, |m, g| g.stabilization_time.map(|t| m.max(t)));
    Ok(StabilityReport { mode: cfg.mode, epsilon: cfg.epsilon, genes, network_time })
}
