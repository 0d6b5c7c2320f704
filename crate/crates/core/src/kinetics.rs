//! Single-gene transcription/translation kinetics.
//!
//! A gene-perceptron transcribes RNA at a rate scaled by its copy number and
//! by the product of Hill regulation terms of its transcription factors, and
//! translates that RNA into protein:
//!
//! ```text
//! dR/dt = k1 * C_N * prod_j H_j(TF_j) - d1 * R
//! dP/dt = k2 * R - d2 * P
//! ```
//!
//! Both equations are linear in the state once the regulator concentrations
//! are fixed, so they admit closed-form solutions with decaying exponentials.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Relative gap below which `d1` and `d2` are treated as equal and the
/// analytic limit branch is evaluated instead of the `(d1 - d2)` quotient.
pub const SINGULAR_GAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegulationMode {
    Activation,
    Repression,
}

impl std::fmt::Display for RegulationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegulationMode::Activation => f.write_str("activation"),
            RegulationMode::Repression => f.write_str("repression"),
        }
    }
}

/// Kinetic parameters of one gene. All rates are per unit time.
#[derive(Clone, Debug, PartialEq)]
pub struct GenePerceptron {
    pub id: String,
    /// Transcription rate.
    pub k1: f64,
    /// Translation rate.
    pub k2: f64,
    /// RNA degradation rate.
    pub d1: f64,
    /// Protein degradation rate.
    pub d2: f64,
    pub copy_number: f64,
    pub hill_n: f64,
}

impl GenePerceptron {
    pub fn new(id: impl Into<String>, k1: f64, k2: f64, d1: f64, d2: f64, copy_number: f64) -> Self {
        GenePerceptron { id: id.into(), k1, k2, d1, d2, copy_number, hill_n: 1.0 }
    }

    pub fn with_hill(mut self, n: f64) -> Self {
        self.hill_n = n;
        self
    }

    /// Checks the parameter invariants: positive finite rates and copy
    /// number, Hill coefficient at least one.
    pub fn check(&self) -> Result<()> {
        for (name, v) in self.rate_fields() {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::InvalidArgument(format!("gene `{}`: {name} must be positive, got {v}", self.id)));
            }
        }
        ensure_finite("hill_n", self.hill_n)?;
        if self.hill_n < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "gene `{}`: hill_n must be >= 1, got {}",
                self.id, self.hill_n
            )));
        }
        Ok(())
    }

    pub(crate) fn rate_fields(&self) -> [(&'static str, f64); 5] {
        [("k1", self.k1), ("k2", self.k2), ("d1", self.d1), ("d2", self.d2), ("copy_number", self.copy_number)]
    }

    /// Supremum of the steady-state RNA level, reached when every Hill term is 1.
    pub fn max_rna(&self) -> f64 {
        self.k1 * self.copy_number / self.d1
    }

    /// Supremum of the steady-state protein level, `k1 k2 C_N / (d1 d2)`.
    pub fn max_protein(&self) -> f64 {
        self.k1 * self.k2 * self.copy_number / (self.d1 * self.d2)
    }
}

/// One transcription factor acting on a gene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegulationInput {
    pub tf_concentration: f64,
    /// TF concentration at half-maximal transcription (K_A).
    pub k_half: f64,
    pub mode: RegulationMode,
}

impl RegulationInput {
    pub fn activator(tf_concentration: f64, k_half: f64) -> Self {
        RegulationInput { tf_concentration, k_half, mode: RegulationMode::Activation }
    }

    pub fn repressor(tf_concentration: f64, k_half: f64) -> Self {
        RegulationInput { tf_concentration, k_half, mode: RegulationMode::Repression }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeneState {
    pub rna: f64,
    pub protein: f64,
    pub time: f64,
}

impl GeneState {
    pub fn new(rna: f64, protein: f64, time: f64) -> Self {
        GeneState { rna, protein, time }
    }

    pub fn is_zero(&self) -> bool {
        self.rna == 0.0 && self.protein == 0.0
    }
}

/// Hill regulation fraction in `[0, 1]`.
///
/// Evaluated through the ratio `r = (TF / K_A)^n` so that very large TF
/// concentrations saturate to exactly 1 (or 0) instead of overflowing.
pub fn hill_term(input: &RegulationInput, hill_n: f64) -> Result<f64> {
    ensure_finite("tf_concentration", input.tf_concentration)?;
    ensure_finite("k_half", input.k_half)?;
    ensure_finite("hill_n", hill_n)?;
    if input.tf_concentration < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tf_concentration must be non-negative, got {}",
            input.tf_concentration
        )));
    }
    if input.k_half <= 0.0 {
        return Err(Error::InvalidArgument(format!("k_half must be positive, got {}", input.k_half)));
    }
    Ok(hill_unchecked(input.tf_concentration, input.k_half, hill_n, input.mode))
}

#[inline]
pub(crate) fn hill_unchecked(tf: f64, k_half: f64, n: f64, mode: RegulationMode) -> f64 {
    let r = if n == 1.0 { tf / k_half } else { (tf / k_half).powf(n) };
    match mode {
        RegulationMode::Activation => {
            if r.is_infinite() {
                1.0
            } else {
                r / (1.0 + r)
            }
        }
        RegulationMode::Repression => 1.0 / (1.0 + r),
    }
}

/// Product of the Hill terms of all regulators.
pub fn hill_product(regs: &[RegulationInput], hill_n: f64) -> Result<f64> {
    if regs.is_empty() {
        return Err(Error::InvalidArgument("regulator list must not be empty".into()));
    }
    regs.iter().try_fold(1.0, |acc, r| Ok(acc * hill_term(r, hill_n)?))
}

pub fn rna_rhs(gene: &GenePerceptron, regs: &[RegulationInput], rna: f64) -> Result<f64> {
    ensure_finite("rna", rna)?;
    let h = hill_product(regs, gene.hill_n)?;
    Ok(gene.k1 * gene.copy_number * h - gene.d1 * rna)
}

pub fn protein_rhs(gene: &GenePerceptron, rna: f64, protein: f64) -> Result<f64> {
    ensure_finite("rna", rna)?;
    ensure_finite("protein", protein)?;
    Ok(gene.k2 * rna - gene.d2 * protein)
}

pub fn steady_state_rna(gene: &GenePerceptron, regs: &[RegulationInput]) -> Result<f64> {
    Ok(gene.max_rna() * hill_product(regs, gene.hill_n)?)
}

pub fn steady_state_protein(gene: &GenePerceptron, regs: &[RegulationInput]) -> Result<f64> {
    Ok(gene.max_protein() * hill_product(regs, gene.hill_n)?)
}

/// Steady-state protein divided by its supremum; equals the Hill product.
pub fn normalized_steady_state(gene: &GenePerceptron, regs: &[RegulationInput]) -> Result<f64> {
    hill_product(regs, gene.hill_n)
}

pub fn rna_closed_form(gene: &GenePerceptron, regs: &[RegulationInput], rna0: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let cf = ClosedForm::new(gene, regs, GeneState::new(rna0, 0.0, 0.0))?;
    Ok(cf.rna(t))
}

pub fn protein_closed_form(
    gene: &GenePerceptron,
    regs: &[RegulationInput],
    rna0: f64,
    protein0: f64,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    let cf = ClosedForm::new(gene, regs, GeneState::new(rna0, protein0, 0.0))?;
    Ok(cf.protein(t))
}

fn check_time(t: f64) -> Result<()> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("t must be non-negative, got {t}")));
    }
    Ok(())
}

/// True when `d1` and `d2` are close enough that the limit branch applies.
pub fn is_singular_gap(d1: f64, d2: f64) -> bool {
    (d1 - d2).abs() < SINGULAR_GAP * d1.max(d2)
}

/// `(exp(-d2 t) - exp(-d1 t)) / (d1 - d2)`, symmetric in the two rates.
///
/// Written as `exp(-lo t) * (1 - exp(-gap t)) / gap` with `expm1`, which stays
/// accurate for small gaps; inside the singular band it is replaced by its
/// limit `t * exp(-mid t)`.
pub fn decay_gap(d1: f64, d2: f64, t: f64) -> f64 {
    let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
    if is_singular_gap(d1, d2) {
        let mid = 0.5 * (lo + hi);
        t * (-mid * t).exp()
    } else {
        let gap = hi - lo;
        (-lo * t).exp() * (-(-gap * t).exp_m1()) / gap
    }
}

/// Analytic trajectory of one gene under constant regulator concentrations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm {
    pub k2: f64,
    pub d1: f64,
    pub d2: f64,
    pub rna_star: f64,
    pub protein_star: f64,
    pub rna0: f64,
    pub protein0: f64,
}

impl ClosedForm {
    pub fn new(gene: &GenePerceptron, regs: &[RegulationInput], init: GeneState) -> Result<Self> {
        ensure_finite("rna0", init.rna)?;
        ensure_finite("protein0", init.protein)?;
        let h = hill_product(regs, gene.hill_n)?;
        Ok(Self::from_hill(gene, h, init))
    }

    pub(crate) fn from_hill(gene: &GenePerceptron, hill: f64, init: GeneState) -> Self {
        ClosedForm {
            k2: gene.k2,
            d1: gene.d1,
            d2: gene.d2,
            rna_star: gene.max_rna() * hill,
            protein_star: gene.max_protein() * hill,
            rna0: init.rna,
            protein0: init.protein,
        }
    }

    pub fn rna(&self, t: f64) -> f64 {
        self.rna_star + (self.rna0 - self.rna_star) * (-self.d1 * t).exp()
    }

    pub fn protein(&self, t: f64) -> f64 {
        self.protein_star
            + (self.protein0 - self.protein_star) * (-self.d2 * t).exp()
            + self.k2 * (self.rna0 - self.rna_star) * decay_gap(self.d1, self.d2, t)
    }

    pub fn rna_rate(&self, t: f64) -> f64 {
        self.d1 * (self.rna_star - self.rna(t))
    }

    pub fn protein_rate(&self, t: f64) -> f64 {
        self.k2 * self.rna(t) - self.d2 * self.protein(t)
    }

    pub fn state(&self, t: f64) -> GeneState {
        GeneState::new(self.rna(t), self.protein(t), t)
    }
}
