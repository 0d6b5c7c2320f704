//! GRNN graph model: genes, typed regulatory edges, validation and
//! topological steady-state propagation.

mod builtin;
mod plan;
mod spec;

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{GenePerceptron, RegulationMode};

pub use builtin::{builtin, builtin_names, preset, BuiltinPreset, SweepPreset};
pub use plan::{Plan, Source};
pub use spec::{load_spec, parse_spec, save_spec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    PerSecond,
    PerMinute,
    PerHour,
}

impl RateUnit {
    pub fn to_per_second(self, value: f64) -> f64 {
        match self {
            RateUnit::PerSecond => value,
            RateUnit::PerMinute => value / 60.0,
            RateUnit::PerHour => value / 3600.0,
        }
    }
}

/// Rate fields that accept a unit annotation.
pub const RATE_FIELDS: [&str; 4] = ["k1", "k2", "d1", "d2"];

#[derive(Clone, Debug, PartialEq)]
pub struct RegulatoryEdge {
    pub source: String,
    pub target: String,
    pub mode: RegulationMode,
    pub k_half: f64,
}

impl RegulatoryEdge {
    pub fn new(source: &str, target: &str, mode: RegulationMode, k_half: f64) -> Self {
        RegulatoryEdge { source: source.to_string(), target: target.to_string(), mode, k_half }
    }
}

/// A gene regulatory neural network.
///
/// Gene parameters are stored as written in the spec document; `units`
/// records per-field rate units and is applied when the network is compiled
/// into a [`Plan`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Grnn {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub genes: IndexMap<String, GenePerceptron>,
    pub edges: Vec<RegulatoryEdge>,
    pub units: IndexMap<String, RateUnit>,
}

impl Grnn {
    pub fn gene(&self, id: &str) -> Result<&GenePerceptron> {
        self.genes.get(id).ok_or_else(|| Error::UnknownGene(id.to_string()))
    }

    /// Gene parameters with unit annotations applied (all rates per second).
    pub fn kinetic_gene(&self, id: &str) -> Result<GenePerceptron> {
        let mut g = self.gene(id)?.clone();
        for (field, unit) in &self.units {
            let slot = match field.as_str() {
                "k1" => &mut g.k1,
                "k2" => &mut g.k2,
                "d1" => &mut g.d1,
                "d2" => &mut g.d2,
                other => {
                    return Err(Error::Schema(format!("unknown unit field `{other}`")));
                }
            };
            *slot = unit.to_per_second(*slot);
        }
        Ok(g)
    }

    pub fn incoming<'a>(&'a self, target: &'a str) -> impl Iterator<Item = &'a RegulatoryEdge> + 'a {
        self.edges.iter().filter(move |e| e.target == target)
    }

    pub fn is_input(&self, id: &str) -> bool {
        self.inputs.iter().any(|i| i == id)
    }

    /// Applies a `gene.param=value` style override.
    ///
    /// Accepted parameters are `k1`, `k2`, `d1`, `d2`, `copy_number`,
    /// `hill_n`, and `k_half` (every incoming edge) or `k_half@<source>`
    /// (a single edge).
    pub fn set_param(&mut self, gene: &str, param: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("override {gene}.{param} must be finite")));
        }
        if !self.genes.contains_key(gene) {
            return Err(Error::UnknownGene(gene.to_string()));
        }
        if let Some(rest) = param.strip_prefix("k_half") {
            let source = match rest {
                "" => None,
                s => Some(
                    s.strip_prefix('@')
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter `{param}`")))?,
                ),
            };
            let mut hit = false;
            for e in self.edges.iter_mut().filter(|e| e.target == gene) {
                if source.is_none_or(|s| s == e.source) {
                    e.k_half = value;
                    hit = true;
                }
            }
            if !hit {
                return Err(Error::InvalidArgument(format!("no incoming edge matches {gene}.{param}")));
            }
            return Ok(());
        }
        let g = self.genes.get_mut(gene).expect("checked above");
        let slot = match param {
            "k1" => &mut g.k1,
            "k2" => &mut g.k2,
            "d1" => &mut g.d1,
            "d2" => &mut g.d2,
            "copy_number" => &mut g.copy_number,
            "hill_n" => &mut g.hill_n,
            other => {
                return Err(Error::InvalidArgument(format!("unknown parameter `{other}`")));
            }
        };
        *slot = value;
        Ok(())
    }
}

/// One broken network invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Cycle { path: Vec<String> },
    DanglingEdge { source: String, target: String, missing: String },
    EdgeIntoInput { source: String, target: String },
    DuplicateEdge { source: String, target: String },
    OrphanGene { gene: String },
    NonPositiveRate { gene: String, field: &'static str, value: f64 },
    InvalidHill { gene: String, value: f64 },
    NonPositiveHalfMax { source: String, target: String, value: f64 },
    IdCollision { id: String },
    DuplicateInput { id: String },
    UnknownOutput { id: String },
    MissingOutputs,
    MissingInputs,
    UnknownUnitField { field: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { path } => write!(f, "cycle: {}", path.join(" -> ")),
            Violation::DanglingEdge { source, target, missing } => {
                write!(f, "dangling edge {source} -> {target}: `{missing}` is not declared")
            }
            Violation::EdgeIntoInput { source, target } => {
                write!(f, "edge {source} -> {target} targets an input node")
            }
            Violation::DuplicateEdge { source, target } => {
                write!(f, "duplicate edge {source} -> {target}")
            }
            Violation::OrphanGene { gene } => write!(f, "orphan gene `{gene}` has no incoming edge"),
            Violation::NonPositiveRate { gene, field, value } => {
                write!(f, "non-positive rate: {gene}.{field} = {value}")
            }
            Violation::InvalidHill { gene, value } => {
                write!(f, "invalid hill coefficient: {gene}.hill_n = {value} (must be >= 1)")
            }
            Violation::NonPositiveHalfMax { source, target, value } => {
                write!(f, "non-positive k_half on edge {source} -> {target}: {value}")
            }
            Violation::IdCollision { id } => write!(f, "id `{id}` is both an input and a gene"),
            Violation::DuplicateInput { id } => write!(f, "input `{id}` declared twice"),
            Violation::UnknownOutput { id } => write!(f, "output `{id}` is not a gene"),
            Violation::MissingOutputs => f.write_str("no output genes declared"),
            Violation::MissingInputs => f.write_str("no inputs declared"),
            Violation::UnknownUnitField { field } => {
                write!(f, "unit annotation on unknown field `{field}`")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(self.violations))
        }
    }
}

pub fn validate(net: &Grnn) -> ValidationReport {
    let mut out = Vec::new();

    if net.inputs.is_empty() {
        out.push(Violation::MissingInputs);
    }
    for (i, id) in net.inputs.iter().enumerate() {
        if net.inputs[..i].contains(id) {
            out.push(Violation::DuplicateInput { id: id.clone() });
        }
        if net.genes.contains_key(id) {
            out.push(Violation::IdCollision { id: id.clone() });
        }
    }
    if net.outputs.is_empty() {
        out.push(Violation::MissingOutputs);
    }
    for id in &net.outputs {
        if !net.genes.contains_key(id) {
            out.push(Violation::UnknownOutput { id: id.clone() });
        }
    }
    for field in net.units.keys() {
        if !RATE_FIELDS.contains(&field.as_str()) {
            out.push(Violation::UnknownUnitField { field: field.clone() });
        }
    }

    for (id, g) in &net.genes {
        for (field, value) in g.rate_fields() {
            if !(value > 0.0 && value.is_finite()) {
                out.push(Violation::NonPositiveRate { gene: id.clone(), field, value });
            }
        }
        if !(g.hill_n >= 1.0 && g.hill_n.is_finite()) {
            out.push(Violation::InvalidHill { gene: id.clone(), value: g.hill_n });
        }
    }

    for (i, e) in net.edges.iter().enumerate() {
        let source_known = net.genes.contains_key(&e.source) || net.is_input(&e.source);
        if !source_known {
            out.push(Violation::DanglingEdge {
                source: e.source.clone(),
                target: e.target.clone(),
                missing: e.source.clone(),
            });
        }
        if net.is_input(&e.target) {
            out.push(Violation::EdgeIntoInput { source: e.source.clone(), target: e.target.clone() });
        } else if !net.genes.contains_key(&e.target) {
            out.push(Violation::DanglingEdge {
                source: e.source.clone(),
                target: e.target.clone(),
                missing: e.target.clone(),
            });
        }
        if !(e.k_half > 0.0 && e.k_half.is_finite()) {
            out.push(Violation::NonPositiveHalfMax {
                source: e.source.clone(),
                target: e.target.clone(),
                value: e.k_half,
            });
        }
        if net.edges[..i].iter().any(|p| p.source == e.source && p.target == e.target) {
            out.push(Violation::DuplicateEdge { source: e.source.clone(), target: e.target.clone() });
        }
    }

    for id in net.genes.keys() {
        if net.is_input(id) {
            continue;
        }
        if net.incoming(id).next().is_none() {
            out.push(Violation::OrphanGene { gene: id.clone() });
        }
    }

    if let Some(path) = find_cycle(net) {
        out.push(Violation::Cycle { path });
    }

    ValidationReport { violations: out }
}

/// Depth-first search over gene-to-gene edges; returns the first cycle found
/// as a closed path (first node repeated at the end).
fn find_cycle(net: &Grnn) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let ids: Vec<&String> = net.genes.keys().collect();
    let index = |id: &str| net.genes.get_index_of(id);
    let succ: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| net.edges.iter().filter(|e| &e.source == *id).filter_map(|e| index(&e.target)).collect())
        .collect();

    let mut mark = vec![Mark::New; ids.len()];
    let mut stack_path: Vec<usize> = Vec::new();
    for root in 0..ids.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next successor position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        stack_path.push(root);
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if *pos < succ[node].len() {
                let next = succ[node][*pos];
                *pos += 1;
                match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::Active;
                        stack_path.push(next);
                        stack.push((next, 0));
                    }
                    Mark::Active => {
                        let start = stack_path.iter().position(|&n| n == next).unwrap();
                        let mut path: Vec<String> = stack_path[start..].iter().map(|&n| ids[n].clone()).collect();
                        path.push(ids[next].clone());
                        return Some(path);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack_path.pop();
                stack.pop();
            }
        }
    }
    None
}

/// External TF concentrations, one per declared input.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputAssignment(IndexMap<String, f64>);

impl InputAssignment {
    pub fn new() -> Self {
        InputAssignment(IndexMap::new())
    }

    pub fn with(mut self, id: &str, value: f64) -> Self {
        self.0.insert(id.to_string(), value);
        self
    }

    pub fn set(&mut self, id: &str, value: f64) {
        self.0.insert(id.to_string(), value);
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Values in the network's input declaration order, checking coverage.
    pub fn resolve(&self, net: &Grnn) -> Result<Vec<f64>> {
        for id in self.0.keys() {
            if !net.is_input(id) {
                return Err(Error::UnknownInput(id.clone()));
            }
        }
        net.inputs
            .iter()
            .map(|id| {
                let v = self
                    .get(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("input `{id}` has no assigned concentration")))?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "input `{id}` must be a finite non-negative concentration, got {v}"
                    )));
                }
                Ok(v)
            })
            .collect()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for InputAssignment {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        InputAssignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Steady RNA, protein and normalized protein of one gene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyState {
    pub rna: f64,
    pub protein: f64,
    pub normalized: f64,
}

/// Steady states of every gene, keyed in gene declaration order.
pub fn propagate_steady_state(net: &Grnn, inputs: &InputAssignment) -> Result<IndexMap<String, SteadyState>> {
    let plan = Plan::new(net)?;
    let values = inputs.resolve(net)?;
    let states = plan.steady_state(&values);
    Ok(plan.by_declaration(net, &states))
}
