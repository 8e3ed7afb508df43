use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{EdgeId, FlowNetwork, FlowStructure, NodeId};
use crate::gf2::Gf2Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnotKind {
    SimpleCycle,
    Knot,
}

/// A strongly connected component of the flow-precedence digraph with at
/// least one arc: a simple flow cycle or a knot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnotComponent {
    /// `C_E`, ascending.
    pub edges: Vec<EdgeId>,
    /// `C_V`: every endpoint of an edge in `C_E`, ascending.
    pub nodes: Vec<NodeId>,
    /// `P(C)`: flow predecessors of knot edges lying outside the knot.
    pub predecessors: Vec<EdgeId>,
    pub kind: KnotKind,
}

impl KnotComponent {
    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Sinks whose flow paths use some edge of the knot.
    pub fn sinks(&self, structure: &FlowStructure) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .edges
            .iter()
            .flat_map(|&e| structure.sinks_using(e).iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Edges where a flow path leaves the knot: `e` in the knot whose
    /// successor towards `sink` is outside it. Returned as `(sink, source, e)`.
    pub fn exits(&self, structure: &FlowStructure) -> Vec<(usize, usize, EdgeId)> {
        let mut out = Vec::new();
        for &e in &self.edges {
            for u in structure.uses(e) {
                if u.succ.is_none_or(|s| !self.contains(s)) {
                    out.push((u.sink, u.source, e));
                }
            }
        }
        out.sort();
        out
    }
}

/// Finds every flow cycle and knot, ordered by smallest contained edge.
pub fn find_knots(net: &FlowNetwork, structure: &FlowStructure) -> Vec<KnotComponent> {
    let live: Vec<EdgeId> = structure.live_edges().collect();
    let mut graph = DiGraph::<EdgeId, ()>::new();
    let mut index = BTreeMap::new();
    for &e in &live {
        index.insert(e, graph.add_node(e));
    }
    for (p, e) in structure.precedence_arcs() {
        graph.add_edge(index[&p], index[&e], ());
    }
    let mut knots: Vec<KnotComponent> = tarjan_scc(&graph)
        .into_iter()
        .filter(|comp| comp.len() >= 2)
        .map(|comp| {
            let mut edges: Vec<EdgeId> = comp.iter().map(|&n| graph[n]).collect();
            edges.sort_unstable();
            let inside = |e: EdgeId| edges.binary_search(&e).is_ok();
            let nodes: BTreeSet<NodeId> = edges
                .iter()
                .flat_map(|&e| [net.edge(e).from, net.edge(e).to])
                .collect();
            let predecessors: BTreeSet<EdgeId> = edges
                .iter()
                .flat_map(|&e| structure.preds_of(e).iter().copied())
                .filter(|&p| !inside(p))
                .collect();
            // A single directed cycle has exactly one in-knot predecessor per edge.
            let simple = edges.iter().all(|&e| {
                structure.preds_of(e).iter().filter(|&&p| inside(p)).count() == 1
            }) && edges.iter().all(|&e| {
                edges
                    .iter()
                    .filter(|&&x| structure.preds_of(x).contains(&e))
                    .count()
                    == 1
            });
            KnotComponent {
                nodes: nodes.into_iter().collect(),
                predecessors: predecessors.into_iter().collect(),
                kind: if simple {
                    KnotKind::SimpleCycle
                } else {
                    KnotKind::Knot
                },
                edges,
            }
        })
        .collect();
    knots.sort_by_key(|k| k.edges[0]);
    knots
}

/// One step of the encoder's visitation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VisitStep {
    /// Edge leaving a source, encoded at initialization.
    Initial(EdgeId),
    /// Edge whose predecessors are all encoded.
    Edge(EdgeId),
    /// No edge is eligible: the whole knot (index into `find_knots`) is
    /// encoded at once.
    Knot(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitPlan {
    pub steps: Vec<VisitStep>,
}

impl VisitPlan {
    /// Edges visited one at a time, in order; knot edges are not included.
    pub fn edges(&self) -> Vec<EdgeId> {
        self.steps
            .iter()
            .filter_map(|s| match *s {
                VisitStep::Initial(e) | VisitStep::Edge(e) => Some(e),
                VisitStep::Knot(_) => None,
            })
            .collect()
    }

    /// Edges emitted before the first knot step.
    pub fn before_first_knot(&self) -> Vec<EdgeId> {
        self.steps
            .iter()
            .take_while(|s| !matches!(s, VisitStep::Knot(_)))
            .filter_map(|s| match *s {
                VisitStep::Initial(e) | VisitStep::Edge(e) => Some(e),
                VisitStep::Knot(_) => None,
            })
            .collect()
    }
}

/// Orders the live edges along the flow precedence relation.
///
/// Among eligible edges the one with the lowest `priority` goes first
/// (`priority[e] = e` when `None`). When no single edge is eligible, the
/// eligible knot with the smallest edge is emitted as one step.
pub fn topo_layers(
    structure: &FlowStructure,
    knots: &[KnotComponent],
    priority: Option<&[usize]>,
) -> VisitPlan {
    let m = structure.num_edges();
    let rank = |e: EdgeId| priority.map_or(e, |p| p[e]);
    let mut in_knot = vec![None; m];
    for (k, knot) in knots.iter().enumerate() {
        for &e in &knot.edges {
            in_knot[e] = Some(k);
        }
    }
    let mut done = vec![false; m];
    let mut steps = Vec::new();
    let mut initial: Vec<EdgeId> = structure
        .live_edges()
        .filter(|&e| structure.preds_of(e).is_empty())
        .collect();
    initial.sort_by_key(|&e| (rank(e), e));
    for e in initial {
        done[e] = true;
        steps.push(VisitStep::Initial(e));
    }
    let mut knot_done = vec![false; knots.len()];
    loop {
        let next = structure
            .live_edges()
            .filter(|&e| !done[e] && in_knot[e].is_none())
            .filter(|&e| structure.preds_of(e).iter().all(|&p| done[p]))
            .min_by_key(|&e| (rank(e), e));
        if let Some(e) = next {
            done[e] = true;
            steps.push(VisitStep::Edge(e));
            continue;
        }
        let knot = (0..knots.len())
            .filter(|&k| !knot_done[k])
            .find(|&k| knots[k].predecessors.iter().all(|&p| done[p]));
        match knot {
            Some(k) => {
                knot_done[k] = true;
                for &e in &knots[k].edges {
                    done[e] = true;
                }
                steps.push(VisitStep::Knot(k));
            }
            None => break,
        }
    }
    debug_assert!(structure.live_edges().all(|e| done[e]), "visitation stalled");
    VisitPlan { steps }
}

/// Directed line graph of a knot: one vertex per knot edge, an arc `e' -> e`
/// whenever some flow path goes from `e'` straight to `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineGraph {
    /// Knot edges, ascending; vertex `i` stands for `vertices[i]`.
    pub vertices: Vec<EdgeId>,
    /// `(from, to, branch gain)` over vertex indices, sorted.
    pub arcs: Vec<(usize, usize, Gf2Poly)>,
}

impl LineGraph {
    pub fn vertex_of(&self, e: EdgeId) -> Option<usize> {
        self.vertices.binary_search(&e).ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Outgoing arcs of every vertex, as `(target, gain)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, &Gf2Poly)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (a, b, g) in &self.arcs {
            adj[*a].push((*b, g));
        }
        adj
    }

    /// Arcs as pairs of edge ids.
    pub fn edge_arcs(&self) -> Vec<(EdgeId, EdgeId)> {
        self.arcs
            .iter()
            .map(|(a, b, _)| (self.vertices[*a], self.vertices[*b]))
            .collect()
    }

    /// Copy of the graph keeping only the arcs accepted by `keep`.
    pub fn filter_arcs(&self, mut keep: impl FnMut(EdgeId, EdgeId) -> bool) -> LineGraph {
        LineGraph {
            vertices: self.vertices.clone(),
            arcs: self
                .arcs
                .iter()
                .filter(|(a, b, _)| keep(self.vertices[*a], self.vertices[*b]))
                .cloned()
                .collect(),
        }
    }
}

/// Builds the line graph of `knot` with every branch gain equal to `D`.
pub fn build_line_graph(knot: &KnotComponent, structure: &FlowStructure) -> LineGraph {
    let vertices = knot.edges.clone();
    let mut arcs = BTreeSet::new();
    for (i, &e) in vertices.iter().enumerate() {
        for &p in structure.preds_of(e) {
            if let Ok(j) = vertices.binary_search(&p) {
                arcs.insert((j, i));
            }
        }
    }
    LineGraph {
        vertices,
        arcs: arcs
            .into_iter()
            .map(|(a, b)| (a, b, Gf2Poly::monomial(1)))
            .collect(),
    }
}
