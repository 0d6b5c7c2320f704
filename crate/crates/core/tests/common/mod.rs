//! Shared generators and property bodies for the integration suites.
#![allow(dead_code)]

use grnn_core::classify::{extract_boundary, sweep, Axis, ClassificationGrid, SweepConfig};
use grnn_core::kinetics::{hill_term, GenePerceptron, RegulationInput, RegulationMode};
use grnn_core::network::{builtin, builtin_names, load_spec, preset, save_spec, Plan};
use grnn_core::{Grnn, InputAssignment, RegulatoryEdge};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 256;

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Random layered DAG with 1-3 inputs and 1-6 genes. Every gene has at
/// least one regulator drawn from the inputs and earlier genes.
pub fn random_network(seed: u64) -> Grnn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_inputs = rng.random_range(1..=3);
    let n_genes = rng.random_range(1..=6);
    let mut net = Grnn { inputs: (0..n_inputs).map(|i| format!("in{i}")).collect(), ..Default::default() };
    for g in 0..n_genes {
        let id = format!("gene{g}");
        let gene = GenePerceptron::new(
            &id,
            log_uniform(&mut rng, 1e-2, 2.0),
            log_uniform(&mut rng, 1e-2, 2.0),
            log_uniform(&mut rng, 0.05, 2.0),
            log_uniform(&mut rng, 0.05, 2.0),
            rng.random_range(1.0..500.0f64).round(),
        )
        .with_hill([1.0, 1.0, 2.0, 4.0][rng.random_range(0..4)]);
        let mut sources: Vec<String> = net.inputs.clone();
        sources.extend(net.genes.keys().cloned());
        sources.shuffle(&mut rng);
        let k = rng.random_range(1..=sources.len().min(3));
        for s in &sources[..k] {
            let mode = if rng.random_bool(0.7) { RegulationMode::Activation } else { RegulationMode::Repression };
            // Regulator scale: inputs sweep up to ~1e-3, proteins reach O(1-100).
            let k_half =
                if net.is_input(s) { log_uniform(&mut rng, 1e-6, 1e-3) } else { log_uniform(&mut rng, 1e-3, 10.0) };
            net.edges.push(RegulatoryEdge::new(s, &id, mode, k_half));
        }
        net.genes.insert(id, gene);
    }
    net.outputs = vec![net.genes.keys().last().unwrap().clone()];
    net
}

pub fn random_inputs(net: &Grnn, rng: &mut impl Rng) -> InputAssignment {
    net.inputs.iter().map(|i| (i.as_str(), log_uniform(rng, 1e-7, 1e-3))).collect()
}

/// Sign of the dependence of `gene` on `input`: +1, -1, 0 (no path) or
/// `None` when paths of both parities exist.
pub fn dependence_sign(net: &Grnn, input: &str, gene: &str) -> Option<i8> {
    fn signs(net: &Grnn, from: &str, to: &str) -> (bool, bool) {
        let mut pos = false;
        let mut neg = false;
        for e in net.incoming(to) {
            let flip = e.mode == RegulationMode::Repression;
            let (p, n) = if e.source == from {
                (true, false)
            } else if net.is_input(&e.source) {
                (false, false)
            } else {
                signs(net, from, &e.source)
            };
            if flip {
                pos |= n;
                neg |= p;
            } else {
                pos |= p;
                neg |= n;
            }
        }
        (pos, neg)
    }
    match signs(net, input, gene) {
        (false, false) => Some(0),
        (true, false) => Some(1),
        (false, true) => Some(-1),
        (true, true) => None,
    }
}

pub fn prop_hill_complementarity(tf: f64, k: f64, n: f64) -> Result<(), TestCaseError> {
    let a = hill_term(&RegulationInput::activator(tf, k), n).unwrap();
    let r = hill_term(&RegulationInput::repressor(tf, k), n).unwrap();
    prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&r));
    prop_assert!((a + r - 1.0).abs() <= 1e-12, "a={} r={} sum={}", a, r, a + r);
    Ok(())
}

/// Along each axis every gene's output moves in the direction fixed by the
/// parity of its regulatory paths from that input.
pub fn prop_sweep_monotonicity(seed: u64) -> Result<(), TestCaseError> {
    let net = random_network(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let fixed = random_inputs(&net, &mut rng);
    let x = net.inputs[0].clone();
    let y = if net.inputs.len() > 1 { net.inputs[1].clone() } else { return Ok(()) };
    let hi = log_uniform(&mut rng, 1e-5, 1e-2);
    let grid =
        sweep(&net, &Axis::new(&x, 0.0, hi, 9), &Axis::new(&y, 0.0, hi, 9), &fixed, &SweepConfig::default()).unwrap();
    for id in net.genes.keys() {
        let v = grid.gene(id).unwrap();
        for (axis, sign) in [(0, dependence_sign(&net, &x, id)), (1, dependence_sign(&net, &y, id))] {
            let Some(sign) = sign else { continue };
            for a in 0..9 {
                for b in 0..8 {
                    let (p, q) = if axis == 0 { (a * 9 + b, a * 9 + b + 1) } else { (b * 9 + a, (b + 1) * 9 + a) };
                    let (lo, hi) = (v[p], v[q]);
                    let tol = 1e-12 * lo.abs().max(hi.abs());
                    match sign {
                        1 => prop_assert!(hi >= lo - tol, "{id} not monotone along axis {axis}: {lo} -> {hi}"),
                        -1 => prop_assert!(hi <= lo + tol, "{id} not antitone along axis {axis}: {lo} -> {hi}"),
                        _ => prop_assert!(hi == lo, "{id} depends on an unconnected axis"),
                    }
                }
            }
        }
    }
    Ok(())
}

fn preset_grid(name: &str, set: u8, samples: usize, hi_scale: f64) -> ClassificationGrid {
    let p = preset(name).unwrap();
    let net = builtin(name, set).unwrap();
    let hi = p.sweep.hi * hi_scale;
    sweep(
        &net,
        &Axis::new(p.sweep.x, p.sweep.lo, hi, samples),
        &Axis::new(p.sweep.y, p.sweep.lo, hi, samples),
        &p.inputs(),
        &SweepConfig::default(),
    )
    .unwrap()
}

pub fn builtin_networks() -> Vec<(&'static str, u8)> {
    builtin_names().flat_map(|n| preset(n).unwrap().param_sets().map(move |s| (n, s))).collect()
}

pub fn prop_threshold_monotonicity(seed: u64, t1: f64, t2: f64) -> Result<(), TestCaseError> {
    let net = random_network(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed = random_inputs(&net, &mut rng);
    let x = net.inputs[0].clone();
    let (y, lo_y) = match net.inputs.get(1) {
        Some(y) => (y.clone(), 0.0),
        None => return Ok(()),
    };
    let hi = log_uniform(&mut rng, 1e-5, 1e-2);
    let (lo, hi_t) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let mut grid =
        sweep(&net, &Axis::new(&x, 0.0, hi, 12), &Axis::new(&y, lo_y, hi, 12), &fixed, &SweepConfig::default())
            .unwrap();
    for id in net.genes.keys().cloned().collect::<Vec<_>>() {
        grid.threshold = lo;
        let a = extract_boundary(&grid, &id).unwrap().area_fraction;
        grid.threshold = hi_t;
        let b = extract_boundary(&grid, &id).unwrap().area_fraction;
        prop_assert!(b <= a, "{id}: raising threshold {lo} -> {hi_t} grew area {a} -> {b}");
    }
    Ok(())
}

/// Refining an `n` by `n` grid to `2n - 1` (so the coarse points are kept)
/// moves each gene's area fraction by at most one coarse cell width per axis.
pub fn prop_grid_refinement(which: usize, samples: usize, hi_scale: f64) -> Result<(), TestCaseError> {
    let nets = builtin_networks();
    let (name, set) = nets[which % nets.len()];
    let coarse = preset_grid(name, set, samples, hi_scale);
    let fine = preset_grid(name, set, 2 * samples - 1, hi_scale);
    let tol = 2.0 / (samples - 1) as f64;
    for id in coarse.values.keys() {
        let a = extract_boundary(&coarse, id).unwrap().area_fraction;
        let b = extract_boundary(&fine, id).unwrap().area_fraction;
        prop_assert!((a - b).abs() <= tol, "{name} set {set} {id}: {a} vs {b} (tol {tol})");
    }
    Ok(())
}

/// Any topological order gives bitwise-identical steady states.
pub fn prop_topological_order_independence(seed: u64) -> Result<(), TestCaseError> {
    let net = random_network(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
    let inputs = random_inputs(&net, &mut rng);
    let values = inputs.resolve(&net).unwrap();

    // Kahn's algorithm with random tie-breaking.
    let mut remaining: Vec<String> = net.genes.keys().cloned().collect();
    let mut order: Vec<String> = Vec::new();
    while !remaining.is_empty() {
        let ready: Vec<usize> = (0..remaining.len())
            .filter(|&i| net.incoming(&remaining[i]).all(|e| net.is_input(&e.source) || order.contains(&e.source)))
            .collect();
        let pick = ready[rng.random_range(0..ready.len())];
        order.push(remaining.remove(pick));
    }
    let a = Plan::new(&net).unwrap();
    let b = Plan::with_order(&net, &order).unwrap();
    let sa = a.by_declaration(&net, &a.steady_state(&values));
    let sb = b.by_declaration(&net, &b.steady_state(&values));
    prop_assert_eq!(sa, sb);
    Ok(())
}

pub fn prop_spec_round_trip(seed: u64) -> Result<(), TestCaseError> {
    let net = random_network(seed);
    let text = save_spec(&net);
    let back = load_spec(&text).unwrap();
    prop_assert_eq!(&back, &net);
    prop_assert_eq!(save_spec(&back), text);
    Ok(())
}

pub fn hill_args() -> impl Strategy<Value = (f64, f64, f64)> {
    (
        prop_oneof![Just(0.0), 1e-12..1e3f64, (-30.0..30.0f64).prop_map(|e: f64| 10f64.powf(e))],
        (-9.0..3.0f64).prop_map(|e: f64| 10f64.powf(e)),
        prop_oneof![Just(1.0), Just(2.0), Just(4.0), 1.0..8.0f64],
    )
}

pub fn threshold_args() -> impl Strategy<Value = (u64, f64, f64)> {
    (any::<u64>(), 0.0..1.0f64, 0.0..1.0f64)
}

pub fn refinement_args() -> impl Strategy<Value = (usize, usize, f64)> {
    (0usize..5, 6usize..40, prop_oneof![Just(1.0), 0.01..1.0f64])
}

/// With every edge an activator, scaling all half-maximal constants down by
/// `scale` never lowers any gene's output at any grid point.
pub fn prop_activation_k_half_dominance(seed: u64, scale: f64) -> Result<(), TestCaseError> {
    let mut net = random_network(seed);
    for e in &mut net.edges {
        e.mode = RegulationMode::Activation;
    }
    let mut lowered = net.clone();
    for e in &mut lowered.edges {
        e.k_half *= scale;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xda7a);
    let fixed = random_inputs(&net, &mut rng);
    let x = net.inputs[0].clone();
    let Some(y) = net.inputs.get(1).cloned() else { return Ok(()) };
    let hi = log_uniform(&mut rng, 1e-5, 1e-2);
    let (ax, ay) = (Axis::new(&x, 0.0, hi, 11), Axis::new(&y, 0.0, hi, 11));
    let a = sweep(&net, &ax, &ay, &fixed, &SweepConfig::default()).unwrap();
    let b = sweep(&lowered, &ax, &ay, &fixed, &SweepConfig::default()).unwrap();
    for id in net.genes.keys() {
        for (k, (before, after)) in a.gene(id).unwrap().iter().zip(b.gene(id).unwrap()).enumerate() {
            prop_assert!(*after >= before * (1.0 - 1e-12), "{id} point {k}: {before} -> {after} (scale {scale})");
        }
    }
    Ok(())
}

pub fn k_half_scale_args() -> impl Strategy<Value = (u64, f64)> {
    (any::<u64>(), 0.01..1.0f64)
}
