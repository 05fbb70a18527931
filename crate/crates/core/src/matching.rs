//! Exact minimum-weight perfect matching on small complete graphs.
//!
//! The solver is Edmonds' primal-dual blossom algorithm in the O(V³) form of
//! Galil's survey, run as a maximum-cardinality maximum-weight matching on
//! the transformed weights `c − w`. Every perfect matching has the same number
//! of edges, so that maximum is exactly the minimum-weight perfect matching.
//! Weights stay real-valued; a small epsilon absorbs rounding in the slack
//! and dual tests.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchingError {
    #[error("perfect matching needs an even node count, got {0}")]
    OddNodeCount(usize),
    #[error("no weight given for edge ({0}, {1})")]
    MissingEdge(usize, usize),
    #[error("edge ({0}, {1}) has invalid weight {2}")]
    InvalidWeight(usize, usize, f64),
    #[error("brute force is limited to {max} nodes, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("solver did not find a perfect matching")]
    NotPerfect,
}

/// Dense symmetric weight table over `node_count` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    weights: Vec<Option<f64>>,
}

impl WeightedGraph {
    pub fn new(node_count: usize) -> Self {
        Self { node_count, weights: vec![None; node_count * node_count] }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = Self::new(node_count);
        for &(u, v, w) in edges {
            g.set_weight(u, v, w);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: f64) {
        assert!(u != v, "self loop on {u}");
        self.weights[u * self.node_count + v] = Some(w);
        self.weights[v * self.node_count + u] = Some(w);
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.weights[u * self.node_count + v]
    }

    fn validate(&self) -> Result<(), MatchingError> {
        if self.node_count % 2 == 1 {
            return Err(MatchingError::OddNodeCount(self.node_count));
        }
        for u in 0..self.node_count {
            for v in u + 1..self.node_count {
                match self.weight(u, v) {
                    None => return Err(MatchingError::MissingEdge(u, v)),
                    Some(w) if !(w.is_finite() && w >= 0.0) => return Err(MatchingError::InvalidWeight(u, v, w)),
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Edge list in lexicographic node order.
    fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::with_capacity(self.node_count * self.node_count.saturating_sub(1) / 2);
        for u in 0..self.node_count {
            for v in u + 1..self.node_count {
                edges.push((u, v, self.weight(u, v).expect("validated")));
            }
        }
        edges
    }
}

/// A set of disjoint node pairs, each stored as `(low, high)` and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    fn from_mate(mate: &[Option<usize>]) -> Result<Self, MatchingError> {
        let mut pairs = Vec::with_capacity(mate.len() / 2);
        for (u, m) in mate.iter().enumerate() {
            match m {
                Some(v) if *v > u => pairs.push((u, *v)),
                Some(_) => {}
                None => return Err(MatchingError::NotPerfect),
            }
        }
        Ok(Self { pairs })
    }

    pub fn total_weight(&self, g: &WeightedGraph) -> f64 {
        self.pairs.iter().map(|&(u, v)| g.weight(u, v).unwrap_or(f64::NAN)).sum()
    }

    /// Whether the pairs cover every node exactly once.
    pub fn is_perfect(&self, node_count: usize) -> bool {
        let mut seen = vec![false; node_count];
        for &(u, v) in &self.pairs {
            for x in [u, v] {
                if x >= node_count || seen[x] {
                    return false;
                }
                seen[x] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn min_weight_perfect_matching(g: &WeightedGraph) -> Result<Matching, MatchingError> {
    g.validate()?;
    if g.node_count == 0 {
        return Ok(Matching { pairs: Vec::new() });
    }
    let edges = g.edge_list();
    let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    // Shift keeps every transformed weight strictly positive.
    let shift = max_w + 1.0;
    let flipped: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v, w)| (u, v, shift - w)).collect();
    let mate = max_weight_matching(g.node_count, &flipped, true);
    let m = Matching::from_mate(&mate)?;
    debug_assert!(m.is_perfect(g.node_count));
    Ok(m)
}

/// Largest node count accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Exhaustive minimum over all perfect matchings; a test oracle.
pub fn brute_force_matching(g: &WeightedGraph) -> Result<Matching, MatchingError> {
    if g.node_count > BRUTE_FORCE_MAX_NODES {
        return Err(MatchingError::TooLarge { max: BRUTE_FORCE_MAX_NODES, got: g.node_count });
    }
    g.validate()?;

    fn recurse(g: &WeightedGraph, used: &mut [bool], current: &mut Vec<(usize, usize)>, acc: f64, best: &mut (f64, Vec<(usize, usize)>)) {
        let Some(u) = used.iter().position(|&b| !b) else {
            if acc < best.0 {
                *best = (acc, current.clone());
            }
            return;
        };
        used[u] = true;
        for v in u + 1..used.len() {
            if used[v] {
                continue;
            }
            used[v] = true;
            current.push((u, v));
            recurse(g, used, current, acc + g.weight(u, v).expect("validated"), best);
            current.pop();
            used[v] = false;
        }
        used[u] = false;
    }

    let mut best = (f64::INFINITY, Vec::new());
    recurse(g, &mut vec![false; g.node_count], &mut Vec::new(), 0.0, &mut best);
    Ok(Matching { pairs: best.1 })
}

const NONE: usize = usize::MAX;
const EPS: f64 = 1e-12;

/// Maximum-weight matching over an explicit edge list; `mate[v]` is the
/// partner of `v`. With `max_cardinality` only maximum-cardinality
/// matchings are considered.
pub fn max_weight_matching(node_count: usize, edges: &[(usize, usize, f64)], max_cardinality: bool) -> Vec<Option<usize>> {
    if edges.is_empty() {
        return vec![None; node_count];
    }
    let mut state = Blossom::new(node_count, edges);
    state.solve(max_cardinality);
    state.mate.iter().map(|&p| if p == NONE { None } else { Some(state.endpoint[p]) }).collect()
}

/// Working state of the blossom algorithm. Edge `k` has endpoints `2k` and
/// `2k + 1`; vertices are `0..nv` and blossoms `nv..2nv`.
struct Blossom<'a> {
    nv: usize,
    edges: &'a [(usize, usize, f64)],
    /// Scale for the rounding tolerance.
    eps: f64,
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn wrap(len: usize, j: isize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'a> Blossom<'a> {
    fn new(nv: usize, edges: &'a [(usize, usize, f64)]) -> Self {
        let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut neighbend = vec![Vec::new(); nv];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![max_w; nv];
        dualvar.extend(std::iter::repeat_n(0.0, nv));
        Self {
            nv,
            edges,
            eps: EPS * max_w.max(1.0),
            endpoint,
            neighbend,
            mate: vec![NONE; nv],
            label: vec![0; 2 * nv],
            labelend: vec![NONE; 2 * nv],
            inblossom: (0..nv).collect(),
            blossomparent: vec![NONE; 2 * nv],
            blossomchilds: vec![Vec::new(); 2 * nv],
            blossombase: (0..nv).chain(std::iter::repeat_n(NONE, nv)).collect(),
            blossomendps: vec![Vec::new(); 2 * nv],
            bestedge: vec![NONE; 2 * nv],
            blossombestedges: vec![None; 2 * nv],
            unusedblossoms: (nv..2 * nv).collect(),
            dualvar,
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> f64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * w
    }

    fn leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nv {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.leaves(t, out);
            }
        }
    }

    fn leaves_of(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.leaves(b, &mut out);
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.leaves_of(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            let m = self.mate[base];
            debug_assert!(m != NONE);
            self.assign_label(self.endpoint[m], 1, m ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find either a new blossom base or an
    /// augmenting path (`NONE`).
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slots exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for leaf in self.leaves_of(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        let mut bestedgeto = vec![NONE; 2 * self.nv];
        for &sub in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[sub].take() {
                Some(list) => vec![list],
                None => self.leaves_of(sub).into_iter().map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect()).collect(),
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b && self.label[bj] == 1 && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj])) {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[sub] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &list {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(list);
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nv {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].abs() <= self.eps {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves_of(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }

        if !endstage && self.label[b] == 2 {
            let len = childs.len();
            let endps = self.blossomendps[b].clone();
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs.iter().position(|&c| c == entrychild).expect("entry child") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = endps[wrap(len, j - endptrick as isize)];
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[wrap(len, j - endptrick as isize)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[wrap(len, j)];
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while childs[wrap(len, j)] != entrychild {
                let bv = childs[wrap(len, j)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let reached = self.leaves_of(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = reached {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let m = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[m]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }

        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    /// Swaps matched and unmatched edges inside blossom `b` so that `v`
    /// becomes its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nv {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b].iter().position(|&c| c == t).expect("child");
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][wrap(len, j)];
            let p = self.blossomendps[b][wrap(len, j - endptrick as isize)] ^ endptrick;
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][wrap(len, j)];
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.nv {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                if bt >= self.nv {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self, max_cardinality: bool) {
        let nv = self.nv;
        for _stage in 0..nv {
            self.label.fill(0);
            self.bestedge.fill(NONE);
            for b in nv..2 * nv {
                self.blossombestedges[b] = None;
            }
            self.allowedge.fill(false);
            self.queue.clear();
            for v in 0..nv {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                while !augmented {
                    let Some(v) = self.queue.pop() else { break };
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0.0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= self.eps {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0 && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w])) {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // No augmenting path with the current duals; pick the dual step.
                let mut deltatype = 0u8;
                let mut delta = 0.0;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !max_cardinality {
                    deltatype = 1;
                    delta = self.dualvar[..nv].iter().copied().fold(f64::INFINITY, f64::min);
                }
                for v in 0..nv {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * nv {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let d = self.slack(self.bestedge[b]) / 2.0;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in nv..2 * nv {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    debug_assert!(max_cardinality);
                    deltatype = 1;
                    delta = self.dualvar[..nv].iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
                }
                let delta = delta.max(0.0);

                for v in 0..nv {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in nv..2 * nv {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }

            if !augmented {
                break;
            }
            for b in nv..2 * nv {
                if self.blossomparent[b] == NONE && self.blossombase[b] != NONE && self.label[b] == 1 && self.dualvar[b].abs() <= self.eps {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complete(n: usize, rng: &mut impl Rng) -> WeightedGraph {
        let mut g = WeightedGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_weight(u, v, rng.gen::<f64>());
            }
        }
        g
    }

    #[test]
    fn tiny_graphs() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 3.5)]);
        let m = min_weight_perfect_matching(&g).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total_weight(&g), 3.5);

        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0), (0, 2, 10.0), (0, 3, 10.0), (1, 2, 10.0), (1, 3, 10.0)]);
        for m in [min_weight_perfect_matching(&g).unwrap(), brute_force_matching(&g).unwrap()] {
            assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
            assert_eq!(m.total_weight(&g), 2.0);
        }
        assert!(min_weight_perfect_matching(&WeightedGraph::new(0)).unwrap().pairs.is_empty());
    }

    #[test]
    fn input_errors() {
        assert_eq!(min_weight_perfect_matching(&WeightedGraph::new(3)), Err(MatchingError::OddNodeCount(3)));
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        assert_eq!(min_weight_perfect_matching(&g), Err(MatchingError::MissingEdge(0, 2)));
        let g = WeightedGraph::from_edges(2, &[(0, 1, -1.0)]);
        assert!(matches!(min_weight_perfect_matching(&g), Err(MatchingError::InvalidWeight(..))));
        assert!(matches!(brute_force_matching(&WeightedGraph::new(14)), Err(MatchingError::TooLarge { .. })));
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = 2 * rng.gen_range(1..=6);
            let g = random_complete(n, &mut rng);
            let m = min_weight_perfect_matching(&g).unwrap();
            assert!(m.is_perfect(n));
            let oracle = brute_force_matching(&g).unwrap().total_weight(&g);
            assert!((m.total_weight(&g) - oracle).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn integer_and_tied_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let n = 2 * rng.gen_range(1..=6);
            let mut g = WeightedGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    g.set_weight(u, v, rng.gen_range(0..4) as f64);
                }
            }
            let m = min_weight_perfect_matching(&g).unwrap();
            assert_eq!(m.total_weight(&g), brute_force_matching(&g).unwrap().total_weight(&g));
            assert_eq!(m, min_weight_perfect_matching(&g).unwrap());
        }
    }

    #[test]
    fn scaling_and_shifting_keep_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = 2 * rng.gen_range(2..=5);
            let g = random_complete(n, &mut rng);
            let base = brute_force_matching(&g).unwrap().total_weight(&g);
            let c = rng.gen_range(0.1..50.0);
            let shift = rng.gen_range(0.0..20.0);
            let mut scaled = WeightedGraph::new(n);
            let mut shifted = WeightedGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    let w = g.weight(u, v).unwrap();
                    scaled.set_weight(u, v, c * w);
                    shifted.set_weight(u, v, w + shift);
                }
            }
            let ms = min_weight_perfect_matching(&scaled).unwrap();
            assert!((ms.total_weight(&scaled) / c - base).abs() < 1e-9);
            let mh = min_weight_perfect_matching(&shifted).unwrap();
            assert!((mh.total_weight(&shifted) - (base + shift * (n / 2) as f64)).abs() < 1e-9);
            // The shifted optimum is also optimal for the original weights.
            assert!((mh.total_weight(&g) - base).abs() < 1e-9);
        }
    }

    #[test]
    fn larger_graphs_match_on_structured_instances() {
        // Points on a line: the optimum pairs neighbours after sorting.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = 2 * rng.gen_range(5..30);
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
            let mut g = WeightedGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    g.set_weight(u, v, (xs[u] - xs[v]).abs());
                }
            }
            let m = min_weight_perfect_matching(&g).unwrap();
            xs.sort_by(f64::total_cmp);
            let expected: f64 = xs.chunks(2).map(|c| c[1] - c[0]).sum();
            assert!((m.total_weight(&g) - expected).abs() < 1e-9);
        }
    }
}
