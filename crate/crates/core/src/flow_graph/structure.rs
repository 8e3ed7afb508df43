use std::collections::{BTreeSet, HashMap};

use super::{EdgeId, FlowError, FlowNetwork};

/// One flow path passing through an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeUse {
    pub sink: usize,
    pub source: usize,
    pub pred: Option<EdgeId>,
    pub succ: Option<EdgeId>,
}

/// Predecessor/successor structure derived from the flow paths.
#[derive(Clone, Debug)]
pub struct FlowStructure {
    h: usize,
    uses: Vec<Vec<EdgeUse>>,
    preds: Vec<Vec<EdgeId>>,
    phys_preds: Vec<Vec<EdgeId>>,
    sinks_using: Vec<Vec<usize>>,
    /// `path[sink][source]` is the edge list of that flow path.
    paths: Vec<Vec<Vec<EdgeId>>>,
    dead: Vec<EdgeId>,
    warnings: Vec<String>,
}

impl FlowStructure {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn num_edges(&self) -> usize {
        self.uses.len()
    }

    pub fn sink_count(&self) -> usize {
        self.paths.len()
    }

    /// Flow paths through `e`, ordered by sink.
    pub fn uses(&self, e: EdgeId) -> &[EdgeUse] {
        &self.uses[e]
    }

    /// `P(e)`: flow predecessors of `e`, ascending.
    pub fn preds_of(&self, e: EdgeId) -> &[EdgeId] {
        &self.preds[e]
    }

    /// `P'(e)`: live edges ending where `e` starts, ascending.
    pub fn phys_preds_of(&self, e: EdgeId) -> &[EdgeId] {
        &self.phys_preds[e]
    }

    /// `T(e)`: sinks whose flow uses `e`, ascending.
    pub fn sinks_using(&self, e: EdgeId) -> &[usize] {
        &self.sinks_using[e]
    }

    pub fn use_for(&self, e: EdgeId, sink: usize) -> Option<&EdgeUse> {
        self.uses[e].iter().find(|u| u.sink == sink)
    }

    /// Predecessor of `e` in the flow to `sink`.
    pub fn pred(&self, e: EdgeId, sink: usize) -> Option<EdgeId> {
        self.use_for(e, sink).and_then(|u| u.pred)
    }

    /// Successor of `e` in the flow to `sink`.
    pub fn succ(&self, e: EdgeId, sink: usize) -> Option<EdgeId> {
        self.use_for(e, sink).and_then(|u| u.succ)
    }

    pub fn path(&self, sink: usize, source: usize) -> &[EdgeId] {
        &self.paths[sink][source]
    }

    pub fn is_live(&self, e: EdgeId) -> bool {
        !self.uses[e].is_empty()
    }

    pub fn live_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.uses.len()).filter(|&e| self.is_live(e))
    }

    /// Edges on no flow path; they are excluded from encoding.
    pub fn dead_edges(&self) -> &[EdgeId] {
        &self.dead
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Arcs `e' -> e` of the flow-precedence digraph, deduplicated.
    pub fn precedence_arcs(&self) -> Vec<(EdgeId, EdgeId)> {
        let mut arcs = BTreeSet::new();
        for (e, preds) in self.preds.iter().enumerate() {
            for &p in preds {
                arcs.insert((p, e));
            }
        }
        arcs.into_iter().collect()
    }
}

/// Checks every flow-path invariant and derives the flow structure.
pub fn validate(net: &FlowNetwork) -> Result<FlowStructure, FlowError> {
    if net.sources().is_empty() {
        return Err(FlowError::NoSources);
    }
    if net.sinks().is_empty() {
        return Err(FlowError::NoSinks);
    }
    let h = net.h();
    let m = net.edges().len();
    let mut paths: Vec<Vec<Option<Vec<EdgeId>>>> = vec![vec![None; h]; net.sinks().len()];
    let mut uses: Vec<Vec<EdgeUse>> = vec![Vec::new(); m];
    let mut owner: HashMap<(usize, EdgeId), usize> = HashMap::new();
    let mut warnings = Vec::new();

    for flow in net.flows() {
        let label = format!(
            "{} -> {}",
            net.sources()[flow.source].symbol,
            net.sinks()[flow.sink].name
        );
        let edges = &flow.edges;
        let Some((&first, &last)) = edges.first().zip(edges.last()) else {
            return Err(FlowError::EmptyPath(label));
        };
        let src_node = net.sources()[flow.source].node;
        if net.edge(first).from != src_node {
            return Err(FlowError::BadStart {
                flow: label,
                edge: net.edge_name(first).to_string(),
                expected: net.node_name(src_node).to_string(),
            });
        }
        let sink_node = net.sinks()[flow.sink].node;
        if net.edge(last).to != sink_node {
            return Err(FlowError::BadEnd {
                flow: label,
                edge: net.edge_name(last).to_string(),
                expected: net.node_name(sink_node).to_string(),
            });
        }
        let mut seen = BTreeSet::new();
        for (i, &e) in edges.iter().enumerate() {
            if !seen.insert(e) {
                return Err(FlowError::RevisitedEdge {
                    flow: label,
                    edge: net.edge_name(e).to_string(),
                });
            }
            if i > 0 && net.edge(edges[i - 1]).to != net.edge(e).from {
                return Err(FlowError::Discontinuity {
                    flow: label,
                    from: net.edge_name(edges[i - 1]).to_string(),
                    to: net.edge_name(e).to_string(),
                });
            }
            if let Some(&other) = owner.get(&(flow.sink, e)) {
                return Err(FlowError::NotDisjoint {
                    sink: net.sinks()[flow.sink].name.clone(),
                    edge: net.edge_name(e).to_string(),
                    first: net.sources()[other].symbol.clone(),
                    second: net.sources()[flow.source].symbol.clone(),
                });
            }
            owner.insert((flow.sink, e), flow.source);
            uses[e].push(EdgeUse {
                sink: flow.sink,
                source: flow.source,
                pred: i.checked_sub(1).map(|j| edges[j]),
                succ: edges.get(i + 1).copied(),
            });
        }
        let mut nodes = BTreeSet::from([src_node]);
        if let Some(&e) = edges.iter().find(|&&e| !nodes.insert(net.edge(e).to)) {
            warnings.push(format!(
                "flow {label} passes node {} twice; a knot may not reach full rank on it",
                net.node_name(net.edge(e).to)
            ));
        }
        paths[flow.sink][flow.source] = Some(edges.clone());
    }

    let paths = paths
        .into_iter()
        .enumerate()
        .map(|(t, per_source)| {
            per_source
                .into_iter()
                .enumerate()
                .map(|(s, p)| {
                    p.ok_or_else(|| FlowError::MissingFlow {
                        sink: net.sinks()[t].name.clone(),
                        symbol: net.sources()[s].symbol.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    for u in &mut uses {
        u.sort_by_key(|x| x.sink);
    }
    let preds: Vec<Vec<EdgeId>> = uses
        .iter()
        .map(|u| {
            let set: BTreeSet<EdgeId> = u.iter().filter_map(|x| x.pred).collect();
            set.into_iter().collect()
        })
        .collect();
    let sinks_using: Vec<Vec<usize>> = uses.iter().map(|u| u.iter().map(|x| x.sink).collect()).collect();
    let live = |e: EdgeId| !uses[e].is_empty();
    let phys_preds: Vec<Vec<EdgeId>> = (0..m)
        .map(|e| {
            (0..m)
                .filter(|&p| live(p) && net.edge(p).to == net.edge(e).from)
                .collect()
        })
        .collect();
    let dead: Vec<EdgeId> = (0..m).filter(|&e| !live(e)).collect();
    warnings.extend(
        dead.iter()
            .map(|&e| format!("edge {} lies on no flow path and is not encoded", net.edge_name(e))),
    );

    Ok(FlowStructure {
        h,
        uses,
        preds,
        phys_preds,
        sinks_using,
        paths,
        dead,
        warnings,
    })
}
