//! Embedded reference networks.
//!
//! Half-maximal constants are stored as absolute concentrations (the
//! tabulated values scaled by 1e-7), and input TF concentrations use the same
//! unit. Rates are per second as loaded.

use super::{parse_spec, Grnn, InputAssignment};
use crate::error::{Error, Result};

/// Sweep axes and range used when a caller does not give its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPreset {
    pub x: &'static str,
    pub y: &'static str,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BuiltinPreset {
    pub name: &'static str,
    sets: &'static [(u8, &'static str)],
    /// Operating point for simulate/stability when no inputs are given.
    pub default_inputs: &'static [(&'static str, f64)],
    pub sweep: SweepPreset,
}

impl BuiltinPreset {
    pub fn param_sets(&self) -> impl Iterator<Item = u8> + '_ {
        self.sets.iter().map(|(n, _)| *n)
    }

    pub fn document(&self, param_set: u8) -> Result<&'static str> {
        self.sets
            .iter()
            .find(|(n, _)| *n == param_set)
            .map(|(_, doc)| *doc)
            .ok_or_else(|| Error::InvalidArgument(format!("builtin `{}` has no parameter set {param_set}", self.name)))
    }

    pub fn inputs(&self) -> InputAssignment {
        self.default_inputs.iter().map(|&(k, v)| (k, v)).collect()
    }
}

// The multi-layer and random-structured operating points sit near the output
// gene's decision boundary, where the output is not yet saturated by its
// upstream proteins.
const PRESETS: [BuiltinPreset; 3] = [
    BuiltinPreset {
        name: "multilayer",
        sets: &[
            (1, include_str!("../builtin/multilayer_set1.json")),
            (2, include_str!("../builtin/multilayer_set2.json")),
        ],
        default_inputs: &[("x1", 3e-8), ("x2", 3e-8)],
        sweep: SweepPreset { x: "x1", y: "x2", lo: 0.0, hi: 1e-3 },
    },
    BuiltinPreset {
        name: "random_structured",
        sets: &[
            (1, include_str!("../builtin/random_structured_set1.json")),
            (2, include_str!("../builtin/random_structured_set2.json")),
        ],
        default_inputs: &[("x1", 3e-8), ("x2", 3e-8)],
        sweep: SweepPreset { x: "x1", y: "x2", lo: 0.0, hi: 1e-3 },
    },
    BuiltinPreset {
        name: "ecoli",
        sets: &[(1, include_str!("../builtin/ecoli.json"))],
        default_inputs: &[("b3025", 5e-4), ("b3357", 5e-4)],
        sweep: SweepPreset { x: "b3025", y: "b3357", lo: 0.0, hi: 1e-3 },
    },
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn preset(name: &str) -> Result<&'static BuiltinPreset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown builtin `{name}` (available: {})",
            builtin_names().collect::<Vec<_>>().join(", ")
        ))
    })
}

pub fn builtin(name: &str, param_set: u8) -> Result<Grnn> {
    parse_spec(preset(name)?.document(param_set)?)
}
