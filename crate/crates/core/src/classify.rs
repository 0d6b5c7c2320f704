//! Input-plane classification sweeps.
//!
//! Two inputs are swept over a uniform grid while the rest stay fixed; every
//! gene's steady-state output is recorded and compared against a threshold.
//! Grid values are stored row-major with `x` varying fastest.

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, with_thread_cap, Execution};
use crate::network::{Grnn, InputAssignment, Plan};
use crate::numfmt::real;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SAMPLES: usize = 200;

/// One swept input with an inclusive uniform range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub input: String,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Axis {
    pub fn new(input: &str, lo: f64, hi: f64, samples: usize) -> Self {
        Axis { input: input.to_string(), lo, hi, samples }
    }

    fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidArgument(format!(
                "axis `{}`: range [{}, {}] must be finite with lo < hi",
                self.input, self.lo, self.hi
            )));
        }
        if self.lo < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axis `{}`: concentrations cannot be negative (lo = {})",
                self.input, self.lo
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis `{}`: need at least 2 samples, got {}",
                self.input, self.samples
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.samples - 1;
        (0..self.samples)
            .map(|i| if i == last { self.hi } else { self.lo + (self.hi - self.lo) * (i as f64 / last as f64) })
            .collect()
    }
}

/// Quantity recorded at each grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    /// Steady protein divided by its supremum, in `[0, 1]`.
    #[default]
    Normalized,
    /// Steady protein concentration.
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub threshold: f64,
    pub mode: OutputMode,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { threshold: DEFAULT_THRESHOLD, mode: OutputMode::Normalized, execution: Execution::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationGrid {
    pub x: Axis,
    pub y: Axis,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub threshold: f64,
    pub mode: OutputMode,
    /// Row-major values per gene (declaration order), `x` fastest.
    pub values: IndexMap<String, Vec<f64>>,
}

impl ClassificationGrid {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn gene(&self, id: &str) -> Result<&[f64]> {
        self.values.get(id).map(Vec::as_slice).ok_or_else(|| Error::UnknownGene(id.to_string()))
    }

    pub fn value(&self, id: &str, i: usize, j: usize) -> Result<f64> {
        Ok(self.gene(id)?[j * self.nx() + i])
    }

    /// Points strictly above the threshold.
    pub fn mask(&self, id: &str) -> Result<Vec<bool>> {
        Ok(self.gene(id)?.iter().map(|&v| v > self.threshold).collect())
    }

    /// Long-format CSV: header `x,y,<gene>...`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y");
        for id in self.values.keys() {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                out.push_str(&real(*x));
                out.push(',');
                out.push_str(&real(*y));
                for v in self.values.values() {
                    out.push(',');
                    out.push_str(&real(v[j * self.nx() + i]));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Plain PGM (P2) of the mask with 1 above threshold; the top row is the
    /// largest `y`.
    pub fn mask_pgm(&self, id: &str) -> Result<String> {
        let mask = self.mask(id)?;
        let (nx, ny) = (self.nx(), self.ny());
        let mut out = format!("P2\n{nx} {ny}\n1\n");
        for j in (0..ny).rev() {
            let row: Vec<&str> = (0..nx).map(|i| if mask[j * nx + i] { "1" } else { "0" }).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Steady-state outputs of every gene over the `x` by `y` input plane.
/// Inputs other than the two axes take their values from `fixed`; values
/// `fixed` gives for the axis inputs are ignored.
pub fn sweep(net: &Grnn, x: &Axis, y: &Axis, fixed: &InputAssignment, cfg: &SweepConfig) -> Result<ClassificationGrid> {
    let plan = Plan::new(net)?;
    x.check()?;
    y.check()?;
    if x.input == y.input {
        return Err(Error::InvalidArgument(format!("both axes sweep `{}`", x.input)));
    }
    let ix = axis_index(net, &x.input)?;
    let iy = axis_index(net, &y.input)?;
    if !cfg.threshold.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold must be finite, got {}", cfg.threshold)));
    }
    let mut base = fixed.clone();
    base.set(&x.input, x.lo);
    base.set(&y.input, y.lo);
    let base = base.resolve(net)?;

    let (xs, ys) = (x.values(), y.values());
    let nx = xs.len();
    let eval = |k: usize| {
        let mut inputs = base.clone();
        inputs[ix] = xs[k % nx];
        inputs[iy] = ys[k / nx];
        plan.steady_state(&inputs)
            .into_iter()
            .map(|s| match cfg.mode {
                OutputMode::Normalized => s.normalized,
                OutputMode::Raw => s.protein,
            })
            .collect::<Vec<f64>>()
    };
    let points = match cfg.execution {
        Execution::Parallel => with_thread_cap(|| map_indexed(nx * ys.len(), Execution::Parallel, eval)),
        Execution::Sequential => map_indexed(nx * ys.len(), Execution::Sequential, eval),
    };

    let per_plan: Vec<Vec<f64>> = (0..plan.len()).map(|g| points.iter().map(|p| p[g]).collect()).collect();
    Ok(ClassificationGrid {
        x: x.clone(),
        y: y.clone(),
        xs,
        ys,
        threshold: cfg.threshold,
        mode: cfg.mode,
        values: plan.by_declaration(net, &per_plan),
    })
}

fn axis_index(net: &Grnn, id: &str) -> Result<usize> {
    net.inputs.iter().position(|i| i == id).ok_or_else(|| Error::UnknownInput(id.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionMetrics {
    pub gene: String,
    pub x: Axis,
    pub y: Axis,
    pub threshold: f64,
    /// Fraction of grid points strictly above the threshold.
    pub area_fraction: f64,
    /// `[min, max]` of the above-threshold points along each axis.
    pub x_extent: Option<[f64; 2]>,
    pub y_extent: Option<[f64; 2]>,
    /// Level-set polylines at the threshold.
    pub boundary: Vec<Vec<[f64; 2]>>,
}

impl RegionMetrics {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics always serialize");
        s.push('\n');
        s
    }
}

pub fn extract_boundary(grid: &ClassificationGrid, gene: &str) -> Result<RegionMetrics> {
    let values = grid.gene(gene)?;
    let mask = grid.mask(gene)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let above = mask.iter().filter(|m| **m).count();

    let mut x_extent: Option<[f64; 2]> = None;
    let mut y_extent: Option<[f64; 2]> = None;
    for j in 0..ny {
        for i in 0..nx {
            if mask[j * nx + i] {
                let (x, y) = (grid.xs[i], grid.ys[j]);
                x_extent = Some(x_extent.map_or([x, x], |[a, b]| [a.min(x), b.max(x)]));
                y_extent = Some(y_extent.map_or([y, y], |[a, b]| [a.min(y), b.max(y)]));
            }
        }
    }

    Ok(RegionMetrics {
        gene: gene.to_string(),
        x: grid.x.clone(),
        y: grid.y.clone(),
        threshold: grid.threshold,
        area_fraction: above as f64 / mask.len() as f64,
        x_extent,
        y_extent,
        boundary: marching_squares(values, &grid.xs, &grid.ys, grid.threshold),
    })
}

/// Identifies a grid edge: horizontal edges leave `(i, j)` towards `+x`,
/// vertical edges towards `+y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

fn marching_squares(values: &[f64], xs: &[f64], ys: &[f64], threshold: f64) -> Vec<Vec<[f64; 2]>> {
    let nx = xs.len();
    let at = |i: usize, j: usize| values[j * nx + i];
    let inside = |i: usize, j: usize| at(i, j) > threshold;
    let point = |e: EdgeId| -> [f64; 2] {
        let (a, b, (pa, pb)) = match e {
            EdgeId::H(i, j) => (at(i, j), at(i + 1, j), ([xs[i], ys[j]], [xs[i + 1], ys[j]])),
            EdgeId::V(i, j) => (at(i, j), at(i, j + 1), ([xs[i], ys[j]], [xs[i], ys[j + 1]])),
        };
        let t = (threshold - a) / (b - a);
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    };

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let bottom = EdgeId::H(i, j);
            let top = EdgeId::H(i, j + 1);
            let left = EdgeId::V(i, j);
            let right = EdgeId::V(i + 1, j);
            let case = (inside(i, j) as u8)
                | (inside(i + 1, j) as u8) << 1
                | (inside(i + 1, j + 1) as u8) << 2
                | (inside(i, j + 1) as u8) << 3;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 | 10 => {
                    let centre = 0.25 * (at(i, j) + at(i + 1, j) + at(i + 1, j + 1) + at(i, j + 1));
                    // Corners 0 and 2 are on one side, 1 and 3 on the other;
                    // the side the centre falls on stays connected.
                    let cut_corners_1_3 = (centre > threshold) == (case == 5);
                    if cut_corners_1_3 {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    chain(&segments).into_iter().map(|line| line.into_iter().map(point).collect()).collect()
}

/// Joins segments that share an edge crossing into polylines. Open chains
/// start at crossings used once; closed loops repeat their first point.
fn chain(segments: &[(EdgeId, EdgeId)]) -> Vec<Vec<EdgeId>> {
    let mut incident: IndexMap<EdgeId, Vec<usize>> = IndexMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(s);
        incident.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    let walk = |start: EdgeId, used: &mut Vec<bool>| -> Vec<EdgeId> {
        let mut line = vec![start];
        let mut at = start;
        while let Some(&s) = incident[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            at = if a == at { b } else { a };
            line.push(at);
        }
        line
    };

    let open_ends: Vec<EdgeId> = incident.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    for e in open_ends {
        if incident[&e].iter().any(|&s| !used[s]) {
            lines.push(walk(e, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            lines.push(walk(segments[s].0, &mut used));
        }
    }
    lines
}

/// Signed change from `a` to `b`. Extent deltas are absent when either
/// region is empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub area_delta: f64,
    pub x_min_delta: Option<f64>,
    pub x_max_delta: Option<f64>,
    pub y_min_delta: Option<f64>,
    pub y_max_delta: Option<f64>,
}

pub fn compare_regions(a: &RegionMetrics, b: &RegionMetrics) -> Result<ShiftReport> {
    if a.x != b.x || a.y != b.y {
        return Err(Error::MismatchedAxes(format!(
            "({} {}..{} x{}, {} {}..{} x{}) vs ({} {}..{} x{}, {} {}..{} x{})",
            a.x.input,
            a.x.lo,
            a.x.hi,
            a.x.samples,
            a.y.input,
            a.y.lo,
            a.y.hi,
            a.y.samples,
            b.x.input,
            b.x.lo,
            b.x.hi,
            b.x.samples,
            b.y.input,
            b.y.lo,
            b.y.hi,
            b.y.samples,
        )));
    }
    let delta = |ea: Option<[f64; 2]>, eb: Option<[f64; 2]>, k: usize| match (ea, eb) {
        (Some(p), Some(q)) => Some(q[k] - p[k]),
        _ => None,
    };
    Ok(ShiftReport {
        area_delta: b.area_fraction - a.area_fraction,
        x_min_delta: delta(a.x_extent, b.x_extent, 0),
        x_max_delta: delta(a.x_extent, b.x_extent, 1),
        y_min_delta: delta(a.y_extent, b.y_extent, 0),
        y_max_delta: delta(a.y_extent, b.y_extent, 1),
    })
}
