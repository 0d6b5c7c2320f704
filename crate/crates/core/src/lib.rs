//! Gene regulatory neural network simulation.
//!
//! Genes are modeled as perceptrons: a Hill-function product over their
//! regulators drives transcription, and mRNA/protein follow linear
//! production-decay kinetics. The crate covers single-gene closed forms,
//! network validation and steady-state propagation, ODE simulation,
//! Lyapunov stability analysis and input-space classification sweeps.

pub mod classify;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod kinetics;
pub mod network;
pub mod numfmt;
pub mod stability;

pub use error::{Error, Result};
pub use exec::Execution;
pub use kinetics::{GenePerceptron, GeneState, RegulationInput, RegulationMode};
pub use network::{Grnn, InputAssignment, RegulatoryEdge};
