//! Matching decoders for the rotated planar code.
//!
//! Each check family gives one subgraph: fired checks are the nodes, data
//! qubits are the edges between the (at most two) checks of that family they
//! touch, and qubits touching a single check lead to the family's boundary.
//! Edge weights are shortest-path lengths over per-qubit weights.
//!
//! [`Decoder::mwpm`] matches both subgraphs independently.
//! [`Decoder::recursive`] alternates between them, reweighting each qubit of
//! one subgraph by the probability that this family sees an error there given
//! what the other family recovered, until a subgraph returns the same recovery
//! twice or the computation budget runs out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CheckFlavor, CodeError, CodeLayout};
use crate::matching::{min_weight_perfect_matching, Matching, WeightedGraph};
use crate::noise::{NoiseModel, QubitChannel};
use crate::pauli::{Pauli, PauliString};

/// Largest per-qubit weight, about `-ln(1e-20)`.
pub const W_MAX: f64 = 46.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("syndrome has {got} bits, layout has {expected} stabilizers")]
    SyndromeLength { expected: usize, got: usize },
    #[error("noise model covers {got} qubits, layout has {expected}")]
    ModelSize { expected: usize, got: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// How one check family relates to the other in terms of detected Paulis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSpec {
    pub flavor: CheckFlavor,
    pub other: CheckFlavor,
    /// Detected by both families.
    pub shared: Pauli,
    /// Detected by this family only.
    pub own_exclusive: Pauli,
    /// Detected by the other family only.
    pub other_exclusive: Pauli,
}

impl SubgraphSpec {
    pub fn new(flavor: CheckFlavor, other: CheckFlavor) -> Self {
        let mut shared = Pauli::I;
        let mut own_exclusive = Pauli::I;
        let mut other_exclusive = Pauli::I;
        for p in Pauli::NON_TRIVIAL {
            match (flavor.detects(p), other.detects(p)) {
                (true, true) => shared = p,
                (true, false) => own_exclusive = p,
                (false, true) => other_exclusive = p,
                (false, false) => {}
            }
        }
        assert!(shared != Pauli::I && own_exclusive != Pauli::I, "{flavor:?} and {other:?} must be distinct check flavors");
        Self { flavor, other, shared, own_exclusive, other_exclusive }
    }

    /// The two Paulis this family detects.
    pub fn detected(&self) -> [Pauli; 2] {
        [self.shared, self.own_exclusive]
    }
}

/// Probability that this family sees an error on a qubit, ignoring the other family.
pub fn marginal_probability(ch: &QubitChannel, spec: &SubgraphSpec) -> f64 {
    ch.prob(spec.shared) + ch.prob(spec.own_exclusive)
}

/// `p(this family flips | other family's recovery bit)`.
///
/// A recovered qubit on the other side carries either the shared Pauli or the
/// other family's exclusive one, so this side flips with probability
/// `p_shared / (p_shared + p_other_exclusive)`; `0/0` is taken as 0. An
/// unrecovered qubit keeps the unnormalised `p_own_exclusive`.
pub fn conditional_probability(ch: &QubitChannel, spec: &SubgraphSpec, other_recovered: bool) -> f64 {
    if other_recovered {
        let shared = ch.prob(spec.shared);
        let denom = shared + ch.prob(spec.other_exclusive);
        if denom > 0.0 {
            shared / denom
        } else {
            0.0
        }
    } else {
        ch.prob(spec.own_exclusive)
    }
}

fn log_weight(p: f64) -> f64 {
    if p > 0.0 {
        (-p.ln()).clamp(0.0, W_MAX)
    } else {
        W_MAX
    }
}

/// Per-qubit traversal costs for one subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitWeights(pub Vec<f64>);

impl QubitWeights {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    /// `-ln` of the marginal detection probability.
    pub fn marginal(model: &NoiseModel, spec: &SubgraphSpec) -> Self {
        Self(model.channels().iter().map(|ch| log_weight(marginal_probability(ch, spec))).collect())
    }

    /// `-ln p(this family flips | other recovery)`, clamped to `[0, W_MAX]`.
    pub fn reweight(model: &NoiseModel, spec: &SubgraphSpec, other_recovery: &[bool]) -> Self {
        assert_eq!(model.n(), other_recovery.len());
        Self(
            model
                .channels()
                .iter()
                .zip(other_recovery)
                .map(|(ch, &r)| log_weight(conditional_probability(ch, spec, r)))
                .collect(),
        )
    }
}

const BOUNDARY: usize = usize::MAX;

/// Static adjacency of one check family.
#[derive(Debug, Clone)]
struct FamilyGraph {
    spec: SubgraphSpec,
    /// Layout stabilizer index of each local check.
    checks: Vec<usize>,
    /// Per local check, `(neighbour, qubit)`; neighbour `checks.len()` is the boundary.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl FamilyGraph {
    fn new(layout: &CodeLayout, spec: SubgraphSpec) -> Self {
        let checks = layout.checks_of(spec.flavor);
        let mut local = vec![BOUNDARY; layout.num_stabilizers()];
        for (i, &k) in checks.iter().enumerate() {
            local[k] = i;
        }
        let boundary_node = checks.len();
        let mut adjacency = vec![Vec::new(); checks.len()];
        for q in 0..layout.n() {
            let ends: Vec<usize> = layout.qubit_checks(q).iter().map(|&k| local[k]).filter(|&i| i != BOUNDARY).collect();
            let (a, b) = match ends.as_slice() {
                [a] => (*a, BOUNDARY),
                [a, b] => (*a, *b),
                other => unreachable!("qubit {q} touches {} checks of one family", other.len()),
            };
            if b == BOUNDARY {
                adjacency[a].push((boundary_node, q));
            } else {
                adjacency[a].push((b, q));
                adjacency[b].push((a, q));
            }
        }
        Self { spec, checks, adjacency }
    }

    fn defects(&self, syndrome: &[bool]) -> Vec<usize> {
        (0..self.checks.len()).filter(|&i| syndrome[self.checks[i]]).collect()
    }
}

/// Shortest-path graph over the fired checks of one family.
///
/// Matching nodes `0..k` are the defects and `k..2k` their virtual boundary
/// partners. A defect costs its boundary distance to reach any boundary node,
/// and boundary nodes pair with each other for free.
#[derive(Debug, Clone)]
pub struct SyndromeGraph {
    flavor: CheckFlavor,
    /// Layout stabilizer indices of the fired checks.
    defects: Vec<usize>,
    /// `k × k` defect-to-defect distances.
    distances: Vec<f64>,
    boundary_distances: Vec<f64>,
    /// Per defect, the Dijkstra predecessor `(node, qubit)` of every local node.
    predecessors: Vec<Vec<(usize, usize)>>,
    /// Local node index of each defect.
    defect_nodes: Vec<usize>,
    boundary_node: usize,
}

impl SyndromeGraph {
    pub fn flavor(&self) -> CheckFlavor {
        self.flavor
    }

    pub fn defects(&self) -> &[usize] {
        &self.defects
    }

    pub fn node_count(&self) -> usize {
        2 * self.defects.len()
    }

    fn k(&self) -> usize {
        self.defects.len()
    }

    /// Weight between matching nodes `u` and `v`.
    pub fn edge_weight(&self, u: usize, v: usize) -> f64 {
        let k = self.k();
        match (u < k, v < k) {
            (true, true) => self.distances[u * k + v],
            (true, false) => self.boundary_distances[u],
            (false, true) => self.boundary_distances[v],
            (false, false) => 0.0,
        }
    }

    /// Data qubits along the shortest path realising edge `(u, v)`.
    pub fn edge_path(&self, u: usize, v: usize) -> Vec<usize> {
        let k = self.k();
        let (src, target) = match (u < k, v < k) {
            (true, true) => (u, self.defect_nodes[v]),
            (true, false) => (u, self.boundary_node),
            (false, true) => (v, self.boundary_node),
            (false, false) => return Vec::new(),
        };
        let pred = &self.predecessors[src];
        let start = self.defect_nodes[src];
        let mut path = Vec::new();
        let mut node = target;
        while node != start {
            let (prev, qubit) = pred[node];
            path.push(qubit);
            node = prev;
        }
        path.reverse();
        path
    }

    pub fn matching_graph(&self) -> WeightedGraph {
        let nodes = self.node_count();
        let mut g = WeightedGraph::new(nodes);
        for u in 0..nodes {
            for v in u + 1..nodes {
                g.set_weight(u, v, self.edge_weight(u, v));
            }
        }
        g
    }
}

/// One end of a matched pair, for traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchEnd {
    /// Layout stabilizer index.
    Check(usize),
    Boundary,
}

/// One subgraph computation, as recorded in a decode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iteration: usize,
    pub subgraph: CheckFlavor,
    pub defects: Vec<usize>,
    pub matched_pairs: Vec<(MatchEnd, MatchEnd)>,
    pub matching_weight: f64,
    pub recovery: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub correction: PauliString,
    pub subgraph_computations: usize,
    pub converged: bool,
    pub fallback_used: bool,
}

/// Edge weights for conventional matching.
#[derive(Debug, Clone, Copy)]
pub enum WeightMode<'a> {
    Uniform,
    /// `-ln` of each family's marginal detection probability.
    Weighted(&'a NoiseModel),
}

/// Decoder selection used by experiments and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DecoderConfig {
    /// Conventional matching with equal weights.
    Mwpm,
    /// Conventional matching with marginal log-likelihood weights.
    Wmwpm,
    /// Recursive matching with at most `n_max` subgraph computations.
    Recmwpm { n_max: usize },
}

impl DecoderConfig {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderConfig::Mwpm => "mwpm",
            DecoderConfig::Wmwpm => "wmwpm",
            DecoderConfig::Recmwpm { .. } => "recmwpm",
        }
    }
}

struct SubgraphResult {
    recovery: Vec<bool>,
    matching: Matching,
    weight: f64,
    graph: SyndromeGraph,
}

/// Decoder bound to one layout; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    layout: &'a CodeLayout,
    families: [FamilyGraph; 2],
    /// `combine[b0][b1]`: Pauli flipping family 0 iff `b0` and family 1 iff `b1`.
    combine: [[Pauli; 2]; 2],
}

impl<'a> Decoder<'a> {
    pub fn new(layout: &'a CodeLayout) -> Self {
        let [f0, f1] = layout.flavors().families();
        let families = [FamilyGraph::new(layout, SubgraphSpec::new(f0, f1)), FamilyGraph::new(layout, SubgraphSpec::new(f1, f0))];
        let mut combine = [[Pauli::I; 2]; 2];
        for p in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            combine[f0.detects(p) as usize][f1.detects(p) as usize] = p;
        }
        Self { layout, families, combine }
    }

    pub fn layout(&self) -> &CodeLayout {
        self.layout
    }

    /// Subgraph specs, X-detecting family first.
    pub fn specs(&self) -> [SubgraphSpec; 2] {
        [self.families[0].spec, self.families[1].spec]
    }

    fn family_index(&self, flavor: CheckFlavor) -> usize {
        self.families.iter().position(|f| f.spec.flavor == flavor).expect("flavor not used by this layout")
    }

    fn check_syndrome(&self, syndrome: &[bool]) -> Result<(), DecodeError> {
        if syndrome.len() == self.layout.num_stabilizers() {
            Ok(())
        } else {
            Err(DecodeError::SyndromeLength { expected: self.layout.num_stabilizers(), got: syndrome.len() })
        }
    }

    fn check_model(&self, model: &NoiseModel) -> Result<(), DecodeError> {
        if model.n() == self.layout.n() {
            Ok(())
        } else {
            Err(DecodeError::ModelSize { expected: self.layout.n(), got: model.n() })
        }
    }

    /// Builds the subgraph of the family with the given flavor.
    pub fn build_subgraph(&self, flavor: CheckFlavor, syndrome: &[bool], weights: &QubitWeights) -> Result<SyndromeGraph, DecodeError> {
        self.check_syndrome(syndrome)?;
        Ok(self.build(self.family_index(flavor), syndrome, weights))
    }

    fn build(&self, family: usize, syndrome: &[bool], weights: &QubitWeights) -> SyndromeGraph {
        let fam = &self.families[family];
        let defect_nodes = fam.defects(syndrome);
        let k = defect_nodes.len();
        let m = fam.checks.len();
        let boundary_node = m;
        let mut distances = vec![0.0; k * k];
        let mut boundary_distances = vec![0.0; k];
        let mut predecessors = Vec::with_capacity(k);

        let mut dist = vec![f64::INFINITY; m + 1];
        let mut done = vec![false; m + 1];
        for (i, &src) in defect_nodes.iter().enumerate() {
            dist.fill(f64::INFINITY);
            done.fill(false);
            let mut pred = vec![(BOUNDARY, BOUNDARY); m + 1];
            dist[src] = 0.0;
            // Dense Dijkstra; ties go to the lowest node index. The boundary
            // is a sink and never relays paths.
            loop {
                let mut best = BOUNDARY;
                for node in 0..=m {
                    if !done[node] && dist[node].is_finite() && (best == BOUNDARY || dist[node] < dist[best]) {
                        best = node;
                    }
                }
                if best == BOUNDARY {
                    break;
                }
                done[best] = true;
                if best == boundary_node {
                    continue;
                }
                for &(next, qubit) in &fam.adjacency[best] {
                    let cand = dist[best] + weights.0[qubit];
                    if cand < dist[next] {
                        dist[next] = cand;
                        pred[next] = (best, qubit);
                    }
                }
            }
            for (j, &dst) in defect_nodes.iter().enumerate() {
                distances[i * k + j] = dist[dst];
            }
            boundary_distances[i] = dist[boundary_node];
            predecessors.push(pred);
        }

        SyndromeGraph {
            flavor: fam.spec.flavor,
            defects: defect_nodes.iter().map(|&i| fam.checks[i]).collect(),
            distances,
            boundary_distances,
            predecessors,
            defect_nodes,
            boundary_node,
        }
    }

    fn solve(&self, family: usize, syndrome: &[bool], weights: &QubitWeights) -> SubgraphResult {
        let graph = self.build(family, syndrome, weights);
        let matching = min_weight_perfect_matching(&graph.matching_graph()).expect("syndrome graphs are complete with an even node count");
        let mut recovery = vec![false; self.layout.n()];
        let mut weight = 0.0;
        for &(u, v) in &matching.pairs {
            weight += graph.edge_weight(u, v);
            for q in graph.edge_path(u, v) {
                recovery[q] ^= true;
            }
        }
        SubgraphResult { recovery, matching, weight, graph }
    }

    fn trace_event(&self, iteration: usize, result: &SubgraphResult, weights: &QubitWeights) -> TraceEvent {
        let k = result.graph.k();
        let end = |u: usize| if u < k { MatchEnd::Check(result.graph.defects[u]) } else { MatchEnd::Boundary };
        TraceEvent {
            iteration,
            subgraph: result.graph.flavor,
            defects: result.graph.defects.clone(),
            matched_pairs: result.matching.pairs.iter().filter(|&&(u, v)| u < k || v < k).map(|&(u, v)| (end(u), end(v))).collect(),
            matching_weight: result.weight,
            recovery: result.recovery.iter().enumerate().filter(|(_, &b)| b).map(|(q, _)| q).collect(),
            weights: weights.0.clone(),
        }
    }

    fn assemble(&self, recoveries: [&[bool]; 2]) -> PauliString {
        let paulis: Vec<Pauli> = recoveries[0].iter().zip(recoveries[1]).map(|(&a, &b)| self.combine[a as usize][b as usize]).collect();
        PauliString::from_paulis(&paulis)
    }

    /// Conventional matching: both subgraphs decoded independently.
    pub fn mwpm(&self, syndrome: &[bool], mode: WeightMode<'_>, mut trace: Option<&mut Vec<TraceEvent>>) -> Result<DecodeOutcome, DecodeError> {
        self.check_syndrome(syndrome)?;
        let n = self.layout.n();
        let weights = match mode {
            WeightMode::Uniform => [QubitWeights::uniform(n), QubitWeights::uniform(n)],
            WeightMode::Weighted(model) => {
                self.check_model(model)?;
                [QubitWeights::marginal(model, &self.families[0].spec), QubitWeights::marginal(model, &self.families[1].spec)]
            }
        };
        let results = [self.solve(0, syndrome, &weights[0]), self.solve(1, syndrome, &weights[1])];
        if let Some(events) = trace.as_deref_mut() {
            for (i, (r, w)) in results.iter().zip(&weights).enumerate() {
                events.push(self.trace_event(i + 1, r, w));
            }
        }
        Ok(DecodeOutcome {
            correction: self.assemble([&results[0].recovery, &results[1].recovery]),
            subgraph_computations: 2,
            converged: true,
            fallback_used: false,
        })
    }

    /// Recursive matching with at most `n_max` subgraph computations before
    /// falling back to uniform conventional matching.
    pub fn recursive(&self, syndrome: &[bool], model: &NoiseModel, n_max: usize, mut trace: Option<&mut Vec<TraceEvent>>) -> Result<DecodeOutcome, DecodeError> {
        self.check_syndrome(syndrome)?;
        self.check_model(model)?;
        let defect_counts = [self.families[0].defects(syndrome).len(), self.families[1].defects(syndrome).len()];
        let mut current = if defect_counts[1] < defect_counts[0] { 1 } else { 0 };
        let mut weights = QubitWeights::marginal(model, &self.families[current].spec);
        let mut recoveries: [Option<Vec<bool>>; 2] = [None, None];
        let mut computations = 0;

        loop {
            if computations + 1 > n_max {
                let mut outcome = self.mwpm(syndrome, WeightMode::Uniform, None)?;
                outcome.subgraph_computations = computations + 2;
                outcome.converged = false;
                outcome.fallback_used = true;
                return Ok(outcome);
            }
            let result = self.solve(current, syndrome, &weights);
            computations += 1;
            if let Some(events) = trace.as_deref_mut() {
                events.push(self.trace_event(computations, &result, &weights));
            }
            let previous = recoveries[current].replace(result.recovery);
            let other = 1 - current;
            let repeated = previous.as_ref() == recoveries[current].as_ref();
            // A defect-free subgraph always recovers nothing, so recomputing it cannot change anything.
            let other_fixed = recoveries[other].is_some() && defect_counts[other] == 0;
            if repeated || other_fixed {
                break;
            }
            weights = QubitWeights::reweight(model, &self.families[other].spec, recoveries[current].as_ref().expect("just set"));
            current = other;
        }

        let [r0, r1] = recoveries;
        Ok(DecodeOutcome {
            correction: self.assemble([r0.as_deref().expect("both computed"), r1.as_deref().expect("both computed")]),
            subgraph_computations: computations,
            converged: true,
            fallback_used: false,
        })
    }

    pub fn decode(&self, syndrome: &[bool], config: DecoderConfig, model: &NoiseModel, trace: Option<&mut Vec<TraceEvent>>) -> Result<DecodeOutcome, DecodeError> {
        match config {
            DecoderConfig::Mwpm => self.mwpm(syndrome, WeightMode::Uniform, trace),
            DecoderConfig::Wmwpm => self.mwpm(syndrome, WeightMode::Weighted(model), trace),
            DecoderConfig::Recmwpm { n_max } => self.recursive(syndrome, model, n_max, trace),
        }
    }
}

pub fn build_subgraph(layout: &CodeLayout, flavor: CheckFlavor, syndrome: &[bool], weights: &QubitWeights) -> Result<SyndromeGraph, DecodeError> {
    Decoder::new(layout).build_subgraph(flavor, syndrome, weights)
}

pub fn mwpm_decode(layout: &CodeLayout, syndrome: &[bool], mode: WeightMode<'_>) -> Result<DecodeOutcome, DecodeError> {
    Decoder::new(layout).mwpm(syndrome, mode, None)
}

pub fn recursive_mwpm_decode(layout: &CodeLayout, syndrome: &[bool], model: &NoiseModel, n_max: usize) -> Result<DecodeOutcome, DecodeError> {
    Decoder::new(layout).recursive(syndrome, model, n_max, None)
}
