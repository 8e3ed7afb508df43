//! Mason's gain formula on the line graph of a knot.
//!
//! Symbols entering a knot through a predecessor `p` travel along the line
//! graph with one unit of delay per arc; the node where they entered drops
//! them when they come back, which removes every arc leaving an edge that
//! ends at `end(p)`. The transfer function from `p` to a knot edge is then
//! `sum F_i * Delta_i / Delta` on that pruned graph. Over GF(2) every sign in
//! the formula is `+`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::flow_graph::{EdgeId, FlowNetwork, FlowStructure, KnotComponent, LineGraph};
use crate::gf2::{AlgebraError, Gf2Poly, Gf2Rational};

pub const DEFAULT_CYCLE_CAP: usize = 100_000;
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MasonError {
    #[error("more than {cap} simple cycles in the line graph")]
    CycleCap { cap: usize },
    #[error("more than {cap} forward paths from {from} to {to}")]
    PathCap { cap: usize, from: String, to: String },
    #[error("more than {cap} sets of disjoint cycles while expanding the determinant")]
    TermCap { cap: usize },
    #[error("edge {0} is not a predecessor of the knot")]
    NotPredecessor(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MasonLimits {
    pub cycle_cap: usize,
    pub path_cap: usize,
}

impl Default for MasonLimits {
    fn default() -> Self {
        Self {
            cycle_cap: DEFAULT_CYCLE_CAP,
            path_cap: DEFAULT_PATH_CAP,
        }
    }
}

/// A simple directed cycle of a line graph, listed from its smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub gain: Gf2Poly,
}

impl Cycle {
    fn mask(&self, n: usize) -> FixedBitSet {
        let mut m = FixedBitSet::with_capacity(n);
        for &v in &self.vertices {
            m.insert(v);
        }
        m
    }
}

/// Copy of `line` as followed by the symbols entering through `p`: arcs
/// leaving any edge that ends where `p` ends are removed.
pub fn prune_for_symbol(
    line: &LineGraph,
    knot: &KnotComponent,
    net: &FlowNetwork,
    p: EdgeId,
) -> Result<LineGraph, MasonError> {
    if !knot.predecessors.contains(&p) {
        return Err(MasonError::NotPredecessor(net.edge_name(p).to_string()));
    }
    let entry_node = net.edge(p).to;
    Ok(line.filter_arcs(|from, _| net.edge(from).to != entry_node))
}

fn gain_lookup(line: &LineGraph) -> HashMap<(usize, usize), &Gf2Poly> {
    line.arcs.iter().map(|(a, b, g)| ((*a, *b), g)).collect()
}

/// Every simple cycle of `line` exactly once, by Johnson's algorithm.
pub fn enumerate_cycles(line: &LineGraph, cap: usize) -> Result<Vec<Cycle>, MasonError> {
    let n = line.len();
    let adj: Vec<Vec<usize>> = line
        .adjacency()
        .into_iter()
        .map(|out| out.into_iter().map(|(w, _)| w).collect())
        .collect();
    let mut radj = vec![Vec::new(); n];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            radj[w].push(v);
        }
    }
    let gains = gain_lookup(line);
    let mut found: Vec<Vec<usize>> = Vec::new();

    for s in 0..n {
        // Strongly connected component of s among vertices >= s.
        let fwd = reach(s, &adj, s);
        let bwd = reach(s, &radj, s);
        let mut scc = fwd;
        scc.intersect_with(&bwd);
        if !adj[s].iter().any(|&w| scc.contains(w)) {
            continue;
        }
        let mut search = Johnson {
            adj: &adj,
            scc: &scc,
            start: s,
            blocked: FixedBitSet::with_capacity(n),
            b: vec![Vec::new(); n],
            stack: Vec::new(),
            out: &mut found,
            cap,
        };
        search.circuit(s)?;
    }

    Ok(found
        .into_iter()
        .map(|vertices| {
            let mut gain = Gf2Poly::one();
            for i in 0..vertices.len() {
                let arc = (vertices[i], vertices[(i + 1) % vertices.len()]);
                gain = &gain * gains[&arc];
            }
            Cycle { vertices, gain }
        })
        .collect())
}

fn reach(s: usize, adj: &[Vec<usize>], floor: usize) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(adj.len());
    let mut stack = vec![s];
    seen.insert(s);
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if w >= floor && !seen.contains(w) {
                seen.insert(w);
                stack.push(w);
            }
        }
    }
    seen
}

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    scc: &'a FixedBitSet,
    start: usize,
    blocked: FixedBitSet,
    b: Vec<Vec<usize>>,
    stack: Vec<usize>,
    out: &'a mut Vec<Vec<usize>>,
    cap: usize,
}

impl Johnson<'_> {
    fn circuit(&mut self, v: usize) -> Result<bool, MasonError> {
        let mut closed = false;
        self.stack.push(v);
        self.blocked.insert(v);
        for &w in self.adj[v].iter().filter(|&&w| self.scc.contains(w)) {
            if w == self.start {
                if self.out.len() == self.cap {
                    return Err(MasonError::CycleCap { cap: self.cap });
                }
                self.out.push(self.stack.clone());
                closed = true;
            } else if !self.blocked.contains(w) && self.circuit(w)? {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in self.adj[v].iter().filter(|&&w| self.scc.contains(w)) {
                if !self.b[w].contains(&v) {
                    self.b[w].push(v);
                }
            }
        }
        self.stack.pop();
        Ok(closed)
    }

    fn unblock(&mut self, u: usize) {
        self.blocked.set(u, false);
        for w in std::mem::take(&mut self.b[u]) {
            if self.blocked.contains(w) {
                self.unblock(w);
            }
        }
    }
}

/// Calls `visit(gain, size)` for every set of pairwise vertex-disjoint cycles
/// avoiding `excluded`, the empty set included.
fn for_each_disjoint_set(
    cycles: &[Cycle],
    n: usize,
    excluded: &FixedBitSet,
    cap: usize,
    visit: &mut dyn FnMut(&Gf2Poly, usize),
) -> Result<(), MasonError> {
    let masks: Vec<FixedBitSet> = cycles.iter().map(|c| c.mask(n)).collect();
    let usable: Vec<usize> = (0..cycles.len())
        .filter(|&i| masks[i].is_disjoint(excluded))
        .collect();
    let mut count = 0usize;
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        usable: &[usize],
        cycles: &[Cycle],
        masks: &[FixedBitSet],
        used: &mut FixedBitSet,
        gain: &Gf2Poly,
        size: usize,
        count: &mut usize,
        cap: usize,
        visit: &mut dyn FnMut(&Gf2Poly, usize),
    ) -> Result<(), MasonError> {
        *count += 1;
        if *count > cap {
            return Err(MasonError::TermCap { cap });
        }
        visit(gain, size);
        for j in k..usable.len() {
            let c = usable[j];
            if masks[c].is_disjoint(used) {
                used.union_with(&masks[c]);
                let g = gain * &cycles[c].gain;
                go(j + 1, usable, cycles, masks, used, &g, size + 1, count, cap, visit)?;
                used.difference_with(&masks[c]);
            }
        }
        Ok(())
    }
    let mut used = FixedBitSet::with_capacity(n);
    go(
        0,
        &usable,
        cycles,
        &masks,
        &mut used,
        &Gf2Poly::one(),
        0,
        &mut count,
        cap,
        visit,
    )
}

/// Mason's determinant: the XOR over all sets of pairwise vertex-disjoint
/// cycles of their gain products.
pub fn compute_delta(cycles: &[Cycle], n: usize, cap: usize) -> Result<Gf2Poly, MasonError> {
    cofactor(cycles, n, &FixedBitSet::with_capacity(n), cap)
}

fn cofactor(
    cycles: &[Cycle],
    n: usize,
    excluded: &FixedBitSet,
    cap: usize,
) -> Result<Gf2Poly, MasonError> {
    let mut acc = Gf2Poly::zero();
    for_each_disjoint_set(cycles, n, excluded, cap, &mut |g, _| acc += g)?;
    Ok(acc)
}

/// The determinant expanded over the integers, ignoring signs: the number
/// of disjoint-cycle sets contributing to each power of `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermCounts(pub BTreeMap<usize, u64>);

impl TermCounts {
    /// Parity reduction, which is the determinant over GF(2).
    pub fn reduce(&self) -> Gf2Poly {
        Gf2Poly::from_exponents(
            self.0
                .iter()
                .filter(|(_, c)| *c % 2 == 1)
                .map(|(k, _)| *k),
        )
    }
}

impl fmt::Display for TermCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&k, &c) in &self.0 {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (k, 1) => write_power(f, k)?,
                (k, c) => {
                    write!(f, "{c}")?;
                    write_power(f, k)?;
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, k: usize) -> fmt::Result {
    if k == 1 {
        f.write_str("D")
    } else {
        write!(f, "D^{k}")
    }
}

/// Unsigned term counts of the determinant; only meaningful when every gain
/// is a monomial.
pub fn delta_term_counts(cycles: &[Cycle], n: usize, cap: usize) -> Result<TermCounts, MasonError> {
    let mut counts = BTreeMap::new();
    for_each_disjoint_set(cycles, n, &FixedBitSet::with_capacity(n), cap, &mut |g, _| {
        if let Some(k) = g.degree() {
            *counts.entry(k).or_insert(0) += 1;
        }
    })?;
    Ok(TermCounts(counts))
}

/// One forward path of Mason's formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardPath {
    /// Line-graph vertices from the entry to the target.
    pub vertices: Vec<usize>,
    /// Injection delay times the arc gains along the path.
    pub gain: Gf2Poly,
    /// Determinant of the cycles not touching the path.
    pub cofactor: Gf2Poly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferDetail {
    pub target: usize,
    pub paths: Vec<ForwardPath>,
    pub value: Gf2Rational,
}

/// The pruned line graph followed by one entering symbol, with its cycles
/// and determinant.
#[derive(Clone, Debug)]
pub struct MasonInstance {
    pub predecessor: EdgeId,
    pub graph: LineGraph,
    /// Knot edges fed directly by the predecessor, as line-graph vertices.
    pub entries: Vec<usize>,
    pub cycles: Vec<Cycle>,
    pub delta: Gf2Poly,
    limits: MasonLimits,
}

impl MasonInstance {
    pub fn new(
        line: &LineGraph,
        knot: &KnotComponent,
        net: &FlowNetwork,
        structure: &FlowStructure,
        p: EdgeId,
        limits: MasonLimits,
    ) -> Result<Self, MasonError> {
        let graph = prune_for_symbol(line, knot, net, p)?;
        let entries = graph
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, &e)| structure.preds_of(e).contains(&p))
            .map(|(i, _)| i)
            .collect();
        let cycles = enumerate_cycles(&graph, limits.cycle_cap)?;
        let delta = compute_delta(&cycles, graph.len(), limits.cycle_cap)?;
        Ok(Self {
            predecessor: p,
            graph,
            entries,
            cycles,
            delta,
            limits,
        })
    }

    pub fn term_counts(&self) -> Result<TermCounts, MasonError> {
        delta_term_counts(&self.cycles, self.graph.len(), self.limits.cycle_cap)
    }

    /// Transfer function to line-graph vertex `target`, summed over entries.
    pub fn transfer_detail(&self, target: usize) -> Result<TransferDetail, MasonError> {
        let n = self.graph.len();
        let adj = self.graph.adjacency();
        let mut paths = Vec::new();
        for &entry in &self.entries {
            let mut raw = Vec::new();
            simple_paths(
                &adj,
                entry,
                target,
                self.limits.path_cap,
                &mut raw,
            )
            .map_err(|cap| MasonError::PathCap {
                cap,
                from: self.graph.vertices[entry].to_string(),
                to: self.graph.vertices[target].to_string(),
            })?;
            for (vertices, arc_gain) in raw {
                let mut on_path = FixedBitSet::with_capacity(n);
                for &v in &vertices {
                    on_path.insert(v);
                }
                let cofactor = cofactor(&self.cycles, n, &on_path, self.limits.cycle_cap)?;
                paths.push(ForwardPath {
                    vertices,
                    gain: arc_gain.shl(1),
                    cofactor,
                });
            }
        }
        let mut num = Gf2Poly::zero();
        for p in &paths {
            num += &(&p.gain * &p.cofactor);
        }
        let value = Gf2Rational::new(num, self.delta.clone())?;
        Ok(TransferDetail {
            target,
            paths,
            value,
        })
    }

    pub fn transfer(&self, target: usize) -> Result<Gf2Rational, MasonError> {
        Ok(self.transfer_detail(target)?.value)
    }
}

fn simple_paths(
    adj: &[Vec<(usize, &Gf2Poly)>],
    from: usize,
    to: usize,
    cap: usize,
    out: &mut Vec<(Vec<usize>, Gf2Poly)>,
) -> Result<(), usize> {
    fn go(
        adj: &[Vec<(usize, &Gf2Poly)>],
        v: usize,
        to: usize,
        cap: usize,
        path: &mut Vec<usize>,
        on: &mut FixedBitSet,
        gain: &Gf2Poly,
        out: &mut Vec<(Vec<usize>, Gf2Poly)>,
    ) -> Result<(), usize> {
        if v == to {
            if out.len() == cap {
                return Err(cap);
            }
            out.push((path.clone(), gain.clone()));
            return Ok(());
        }
        for &(w, g) in &adj[v] {
            if !on.contains(w) {
                on.insert(w);
                path.push(w);
                go(adj, w, to, cap, path, on, &(gain * g), out)?;
                path.pop();
                on.set(w, false);
            }
        }
        Ok(())
    }
    let mut on = FixedBitSet::with_capacity(adj.len());
    on.insert(from);
    go(adj, from, to, cap, &mut vec![from], &mut on, &Gf2Poly::one(), out)
}

/// Transfer functions `tau(p, e)` for every knot predecessor `p` and knot
/// edge `e`.
#[derive(Clone, Debug)]
pub struct TransferTable {
    pub predecessors: Vec<EdgeId>,
    pub edges: Vec<EdgeId>,
    pub instances: Vec<MasonInstance>,
    values: Vec<Vec<Gf2Rational>>,
}

impl TransferTable {
    pub fn get(&self, p: EdgeId, e: EdgeId) -> &Gf2Rational {
        let i = self
            .predecessors
            .iter()
            .position(|&x| x == p)
            .expect("not a knot predecessor");
        let j = self.edges.binary_search(&e).expect("not a knot edge");
        &self.values[i][j]
    }

    /// Row of `p` over the knot edges in ascending order.
    pub fn row(&self, p: EdgeId) -> &[Gf2Rational] {
        let i = self
            .predecessors
            .iter()
            .position(|&x| x == p)
            .expect("not a knot predecessor");
        &self.values[i]
    }

    pub fn instance(&self, p: EdgeId) -> &MasonInstance {
        let i = self
            .predecessors
            .iter()
            .position(|&x| x == p)
            .expect("not a knot predecessor");
        &self.instances[i]
    }

    /// Lines of the form `tau(e2,e17) = D^2/(1+D^3)`.
    pub fn render(&self, net: &FlowNetwork) -> String {
        let mut out = String::new();
        for (i, &p) in self.predecessors.iter().enumerate() {
            for (j, &e) in self.edges.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "tau({},{}) = {}",
                    net.edge_name(p),
                    net.edge_name(e),
                    self.values[i][j]
                );
            }
        }
        out
    }
}

pub fn transfer_table(
    knot: &KnotComponent,
    line: &LineGraph,
    net: &FlowNetwork,
    structure: &FlowStructure,
    limits: MasonLimits,
) -> Result<TransferTable, MasonError> {
    let mut instances = Vec::new();
    let mut values = Vec::new();
    for &p in &knot.predecessors {
        let inst = MasonInstance::new(line, knot, net, structure, p, limits)?;
        let row = (0..line.len())
            .map(|v| inst.transfer(v))
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
        instances.push(inst);
    }
    Ok(TransferTable {
        predecessors: knot.predecessors.clone(),
        edges: line.vertices.clone(),
        instances,
        values,
    })
}

/// DOT rendering of a (possibly pruned) line graph.
pub fn line_graph_dot(line: &LineGraph, net: &FlowNetwork, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{title}\" {{");
    let _ = writeln!(out, "  node [shape=circle];");
    for &e in &line.vertices {
        let _ = writeln!(out, "  \"{}\";", net.edge_name(e));
    }
    for (a, b) in line.edge_arcs() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"D\"];",
            net.edge_name(a),
            net.edge_name(b)
        );
    }
    out.push_str("}\n");
    out
}

/// Human-readable dump of one instance: pruned arcs, cycles, determinant
/// and the forward-path decomposition of every transfer function.
pub fn debug_dump(inst: &MasonInstance, net: &FlowNetwork) -> Result<String, MasonError> {
    let name = |v: usize| net.edge_name(inst.graph.vertices[v]).to_string();
    let mut out = String::new();
    let _ = writeln!(out, "symbol entering through {}", net.edge_name(inst.predecessor));
    let arcs: Vec<String> = inst
        .graph
        .edge_arcs()
        .iter()
        .map(|(a, b)| format!("{}->{}", net.edge_name(*a), net.edge_name(*b)))
        .collect();
    let _ = writeln!(out, "  arcs: {}", arcs.join(" "));
    for c in &inst.cycles {
        let vs: Vec<String> = c.vertices.iter().map(|&v| name(v)).collect();
        let _ = writeln!(out, "  cycle {{{}}} gain {}", vs.join(","), c.gain);
    }
    let _ = writeln!(
        out,
        "  Delta = {} = {}",
        inst.term_counts()?,
        inst.delta
    );
    for t in 0..inst.graph.len() {
        let d = inst.transfer_detail(t)?;
        let _ = writeln!(out, "  tau({},{}) = {}", net.edge_name(inst.predecessor), name(t), d.value);
        for p in &d.paths {
            let vs: Vec<String> = p.vertices.iter().map(|&v| name(v)).collect();
            let _ = writeln!(out, "    F = {} via {} with Delta_i = {}", p.gain, vs.join(","), p.cofactor);
        }
    }
    Ok(out)
}
