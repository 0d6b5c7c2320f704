//! Parsers for the small value grammars used on the command line.

use anyhow::{anyhow, bail, Context, Result};

/// `gene.param=value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub gene: String,
    pub param: String,
    pub value: f64,
}

impl std::fmt::Display for Override {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}={}", self.gene, self.param, grnn_core::numfmt::real(self.value))
    }
}

pub fn parse_override(s: &str) -> Result<Override> {
    let (lhs, value) = s.split_once('=').ok_or_else(|| anyhow!("expected gene.param=value, got `{s}`"))?;
    let (gene, param) = lhs.split_once('.').ok_or_else(|| anyhow!("expected gene.param=value, got `{s}`"))?;
    if gene.is_empty() || param.is_empty() {
        bail!("expected gene.param=value, got `{s}`");
    }
    Ok(Override { gene: gene.to_string(), param: param.to_string(), value: parse_real(value)? })
}

/// `id=value`.
pub fn parse_input(s: &str) -> Result<(String, f64)> {
    let (id, value) = s.split_once('=').ok_or_else(|| anyhow!("expected id=value, got `{s}`"))?;
    if id.is_empty() {
        bail!("expected id=value, got `{s}`");
    }
    Ok((id.to_string(), parse_real(value)?))
}

/// `<nx>x<ny>`, or a single `<n>` for a square grid.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let count = |t: &str| t.trim().parse::<usize>().with_context(|| format!("bad grid size `{s}`"));
    let (nx, ny) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (count(a)?, count(b)?),
        None => {
            let n = count(s)?;
            (n, n)
        }
    };
    if nx < 2 || ny < 2 {
        bail!("grid needs at least 2 samples per axis, got {nx}x{ny}");
    }
    Ok((nx, ny))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisRange {
    pub id: String,
    pub lo: f64,
    pub hi: f64,
}

/// `id:lo:hi,id:lo:hi`, x axis first.
pub fn parse_range(s: &str) -> Result<(AxisRange, AxisRange)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("expected two axes `x:<lo>:<hi>,y:<lo>:<hi>`, got `{s}`");
    }
    let axis = |p: &str| -> Result<AxisRange> {
        let f: Vec<&str> = p.split(':').collect();
        if f.len() != 3 || f[0].is_empty() {
            bail!("expected id:lo:hi, got `{p}`");
        }
        Ok(AxisRange { id: f[0].to_string(), lo: parse_real(f[1])?, hi: parse_real(f[2])? })
    };
    Ok((axis(parts[0])?, axis(parts[1])?))
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(v)
}
