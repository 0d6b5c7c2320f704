use indexmap::IndexMap;

use super::{validate, Grnn, SteadyState};
use crate::error::{Error, Result};
use crate::kinetics::{hill_unchecked, GenePerceptron, RegulationMode};

/// Where a regulator's TF concentration comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Index into the network's declared inputs.
    Input(usize),
    /// Position of the upstream gene in the plan's evaluation order.
    Gene(usize),
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PlanEdge {
    pub source: Source,
    pub k_half: f64,
    pub mode: RegulationMode,
}

/// A validated network compiled for repeated evaluation: genes in a
/// topological order, unit-converted rates, and index-based regulator lists.
#[derive(Clone, Debug)]
pub struct Plan {
    pub(crate) genes: Vec<GenePerceptron>,
    pub(crate) regulators: Vec<Vec<PlanEdge>>,
    pub(crate) n_inputs: usize,
}

impl Plan {
    /// Compiles `net` using Kahn's algorithm with ties broken by gene
    /// declaration order.
    pub fn new(net: &Grnn) -> Result<Self> {
        validate(net).into_result()?;
        let order = default_order(net);
        Self::build(net, &order)
    }

    /// Compiles `net` with an explicit evaluation order, which must be a
    /// topological order of the gene graph.
    pub fn with_order(net: &Grnn, order: &[String]) -> Result<Self> {
        validate(net).into_result()?;
        if order.len() != net.genes.len() {
            return Err(Error::InvalidArgument(format!(
                "order lists {} genes, network has {}",
                order.len(),
                net.genes.len()
            )));
        }
        let pos: IndexMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        if pos.len() != order.len() {
            return Err(Error::InvalidArgument("order repeats a gene".into()));
        }
        for id in order {
            if !net.genes.contains_key(id) {
                return Err(Error::UnknownGene(id.clone()));
            }
        }
        for e in &net.edges {
            if let (Some(&s), Some(&t)) = (pos.get(e.source.as_str()), pos.get(e.target.as_str())) {
                if s >= t {
                    return Err(Error::InvalidArgument(format!(
                        "order places `{}` before its regulator `{}`",
                        e.target, e.source
                    )));
                }
            }
        }
        let order: Vec<usize> = order.iter().map(|id| net.genes.get_index_of(id).expect("checked")).collect();
        Self::build(net, &order)
    }

    fn build(net: &Grnn, order: &[usize]) -> Result<Self> {
        let mut position = vec![usize::MAX; net.genes.len()];
        for (p, &g) in order.iter().enumerate() {
            position[g] = p;
        }
        let mut genes = Vec::with_capacity(order.len());
        let mut regulators = Vec::with_capacity(order.len());
        for &g in order {
            let (id, _) = net.genes.get_index(g).expect("index in range");
            genes.push(net.kinetic_gene(id)?);
            let regs = net
                .incoming(id)
                .map(|e| {
                    let source = match net.inputs.iter().position(|i| *i == e.source) {
                        Some(i) => Source::Input(i),
                        None => Source::Gene(position[net.genes.get_index_of(&e.source).expect("validated")]),
                    };
                    PlanEdge { source, k_half: e.k_half, mode: e.mode }
                })
                .collect();
            regulators.push(regs);
        }
        Ok(Plan { genes, regulators, n_inputs: net.inputs.len() })
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn genes(&self) -> &[GenePerceptron] {
        &self.genes
    }

    /// Plan position of a gene id.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.genes.iter().position(|g| g.id == id)
    }

    pub fn sources(&self, gene: usize) -> impl Iterator<Item = Source> + '_ {
        self.regulators[gene].iter().map(|e| e.source)
    }

    /// True when every regulator of the gene is an external input.
    pub fn has_constant_regulators(&self, gene: usize) -> bool {
        self.sources(gene).all(|s| matches!(s, Source::Input(_)))
    }

    /// Hill product of gene `g` given input values and the current protein
    /// level of every gene (indexed by plan position). Negative protein
    /// levels are read as zero.
    #[inline]
    pub(crate) fn hill(&self, g: usize, inputs: &[f64], protein: impl Fn(usize) -> f64) -> f64 {
        let n = self.genes[g].hill_n;
        self.regulators[g].iter().fold(1.0, |acc, e| {
            let tf = match e.source {
                Source::Input(i) => inputs[i],
                Source::Gene(j) => protein(j).max(0.0),
            };
            acc * hill_unchecked(tf, e.k_half, n, e.mode)
        })
    }

    /// Per-gene regulator inputs at a given state, in kinetics form.
    pub fn regulation_inputs(
        &self,
        g: usize,
        inputs: &[f64],
        protein: impl Fn(usize) -> f64,
    ) -> Vec<crate::kinetics::RegulationInput> {
        self.regulators[g]
            .iter()
            .map(|e| crate::kinetics::RegulationInput {
                tf_concentration: match e.source {
                    Source::Input(i) => inputs[i],
                    Source::Gene(j) => protein(j).max(0.0),
                },
                k_half: e.k_half,
                mode: e.mode,
            })
            .collect()
    }

    /// Steady states in plan order. `inputs` holds one value per declared
    /// input, in declaration order.
    pub fn steady_state(&self, inputs: &[f64]) -> Vec<SteadyState> {
        debug_assert_eq!(inputs.len(), self.n_inputs);
        let mut out: Vec<SteadyState> = Vec::with_capacity(self.genes.len());
        for (g, gene) in self.genes.iter().enumerate() {
            let h = self.hill(g, inputs, |j| out[j].protein);
            out.push(SteadyState { rna: gene.max_rna() * h, protein: gene.max_protein() * h, normalized: h });
        }
        out
    }

    /// Re-keys plan-ordered values by gene id in declaration order.
    pub fn by_declaration<T: Clone>(&self, net: &Grnn, values: &[T]) -> IndexMap<String, T> {
        net.genes
            .keys()
            .map(|id| {
                let p = self.position(id).expect("plan covers every gene");
                (id.clone(), values[p].clone())
            })
            .collect()
    }
}

fn default_order(net: &Grnn) -> Vec<usize> {
    let n = net.genes.len();
    let mut indegree = vec![0usize; n];
    for e in &net.edges {
        if net.genes.contains_key(&e.source) {
            indegree[net.genes.get_index_of(&e.target).expect("validated")] += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    while order.len() < n {
        let next = (0..n).find(|&g| !done[g] && indegree[g] == 0).expect("validated networks are acyclic");
        done[next] = true;
        order.push(next);
        let id = net.genes.get_index(next).unwrap().0;
        for e in net.edges.iter().filter(|e| &e.source == id) {
            indegree[net.genes.get_index_of(&e.target).unwrap()] -= 1;
        }
    }
    order
}
