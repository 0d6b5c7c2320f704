//! JSON network spec documents.
//!
//! ```json
//! {
//!   "inputs": ["x1", "x2"],
//!   "outputs": ["g21"],
//!   "genes": { "g11": { "k1": 0.1, "k2": 0.1, "d1": 0.3, "d2": 0.3, "copy_number": 100 } },
//!   "edges": [ { "from": "x1", "to": "g11", "mode": "activation", "k_half": 5e-5 } ],
//!   "units": { "d1": "per_minute" }
//! }
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use super::{validate, Grnn, RateUnit, RegulatoryEdge};
use crate::error::{Error, Result};
use crate::kinetics::{GenePerceptron, RegulationMode};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    inputs: Vec<String>,
    outputs: Vec<String>,
    genes: IndexMap<String, GeneDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    units: IndexMap<String, RateUnit>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneDoc {
    k1: f64,
    k2: f64,
    d1: f64,
    d2: f64,
    copy_number: f64,
    #[serde(default = "unit_hill", skip_serializing_if = "is_unit_hill")]
    hill_n: f64,
}

fn unit_hill() -> f64 {
    1.0
}

fn is_unit_hill(n: &f64) -> bool {
    *n == 1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: String,
    to: String,
    mode: RegulationMode,
    k_half: f64,
}

/// Parses a spec document without checking network invariants.
pub fn parse_spec(text: &str) -> Result<Grnn> {
    let doc: SpecDoc = serde_json::from_str(text).map_err(|e| match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => {
            Error::Syntax { line: e.line(), column: e.column(), message: strip_position(&e) }
        }
        Category::Data => Error::Schema(e.to_string()),
    })?;
    for field in doc.units.keys() {
        if !super::RATE_FIELDS.contains(&field.as_str()) {
            return Err(Error::Schema(format!(
                "units: `{field}` is not a rate field (expected one of k1, k2, d1, d2)"
            )));
        }
    }
    let genes = doc
        .genes
        .into_iter()
        .map(|(id, g)| {
            let gene = GenePerceptron {
                id: id.clone(),
                k1: g.k1,
                k2: g.k2,
                d1: g.d1,
                d2: g.d2,
                copy_number: g.copy_number,
                hill_n: g.hill_n,
            };
            (id, gene)
        })
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| RegulatoryEdge { source: e.from, target: e.to, mode: e.mode, k_half: e.k_half })
        .collect();
    Ok(Grnn { inputs: doc.inputs, outputs: doc.outputs, genes, edges, units: doc.units })
}

/// Parses a spec document and rejects networks that fail validation.
pub fn load_spec(text: &str) -> Result<Grnn> {
    let net = parse_spec(text)?;
    validate(&net).into_result()?;
    Ok(net)
}

pub fn save_spec(net: &Grnn) -> String {
    let doc = SpecDoc {
        inputs: net.inputs.clone(),
        outputs: net.outputs.clone(),
        genes: net
            .genes
            .iter()
            .map(|(id, g)| {
                let doc =
                    GeneDoc { k1: g.k1, k2: g.k2, d1: g.d1, d2: g.d2, copy_number: g.copy_number, hill_n: g.hill_n };
                (id.clone(), doc)
            })
            .collect(),
        edges: net
            .edges
            .iter()
            .map(|e| EdgeDoc { from: e.source.clone(), to: e.target.clone(), mode: e.mode, k_half: e.k_half })
            .collect(),
        units: net.units.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("spec documents always serialize");
    s.push('\n');
    s
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}
