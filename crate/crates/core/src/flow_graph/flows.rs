use std::collections::VecDeque;

use super::{EdgeId, FlowError, FlowNetwork, FlowPath, NodeId};

#[derive(Clone, Copy)]
enum Step {
    FromSuper(usize),
    Forward(EdgeId),
    Backward(EdgeId),
}

/// Replaces the flows of `net` with `h` edge-disjoint paths per sink, one
/// from every source, found by BFS augmenting paths on unit capacities.
pub fn compute_flows(net: &FlowNetwork) -> Result<FlowNetwork, FlowError> {
    if net.sources().is_empty() {
        return Err(FlowError::NoSources);
    }
    if net.sinks().is_empty() {
        return Err(FlowError::NoSinks);
    }
    let mut out = net.clone();
    out.clear_flows();
    for (t, sink) in net.sinks().iter().enumerate() {
        for path in sink_paths(net, sink.node).map_err(|found| FlowError::InsufficientCapacity {
            sink: sink.name.clone(),
            found,
            needed: net.h(),
        })? {
            out.push_flow(FlowPath {
                sink: t,
                source: path.0,
                edges: path.1,
            });
        }
    }
    Ok(out)
}

fn sink_paths(net: &FlowNetwork, target: NodeId) -> Result<Vec<(usize, Vec<EdgeId>)>, usize> {
    let n = net.nodes().len();
    let m = net.edges().len();
    let h = net.h();
    let mut out_edges = vec![Vec::new(); n];
    let mut in_edges = vec![Vec::new(); n];
    for (e, edge) in net.edges().iter().enumerate() {
        out_edges[edge.from].push(e);
        in_edges[edge.to].push(e);
    }
    let mut used = vec![false; m];
    let mut source_used = vec![false; h];
    let mut found = 0;
    while found < h {
        let mut parent: Vec<Option<Step>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for (i, s) in net.sources().iter().enumerate() {
            if !source_used[i] && !seen[s.node] {
                seen[s.node] = true;
                parent[s.node] = Some(Step::FromSuper(i));
                queue.push_back(s.node);
            }
        }
        while let Some(u) = queue.pop_front() {
            if u == target {
                break;
            }
            for &e in &out_edges[u] {
                let v = net.edge(e).to;
                if !used[e] && !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(Step::Forward(e));
                    queue.push_back(v);
                }
            }
            for &e in &in_edges[u] {
                let v = net.edge(e).from;
                if used[e] && !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(Step::Backward(e));
                    queue.push_back(v);
                }
            }
        }
        if !seen[target] {
            return Err(found);
        }
        let mut v = target;
        loop {
            match parent[v].expect("augmenting path is connected") {
                Step::FromSuper(i) => {
                    source_used[i] = true;
                    break;
                }
                Step::Forward(e) => {
                    used[e] = true;
                    v = net.edge(e).from;
                }
                Step::Backward(e) => {
                    used[e] = false;
                    v = net.edge(e).to;
                }
            }
        }
        found += 1;
    }

    // Walk each unit of flow from its source; loops met on the way carry no
    // net flow and are dropped.
    let mut paths = Vec::with_capacity(h);
    for (i, s) in net.sources().iter().enumerate() {
        let mut walk: Vec<EdgeId> = Vec::new();
        let mut nodes = vec![s.node];
        let mut u = s.node;
        while u != target {
            let e = *out_edges[u]
                .iter()
                .find(|&&e| used[e])
                .expect("flow conservation");
            used[e] = false;
            u = net.edge(e).to;
            if let Some(pos) = nodes.iter().position(|&x| x == u) {
                walk.truncate(pos);
                nodes.truncate(pos + 1);
            } else {
                walk.push(e);
                nodes.push(u);
            }
        }
        paths.push((i, walk));
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_graph::{parse_network, validate};

    #[test]
    fn butterfly_flows_validate() {
        let net = parse_network(
            "edge e1 A U\nedge e2 B V\nedge e3 A t1\nedge e4 B t2\nedge e5 U W\nedge e6 V W\n\
             edge e7 U t2\nedge e8 V t1\nedge e9 W X\nedge e10 X t1\nedge e11 X t2\n\
             source A a\nsource B b\nsink t1 t1\nsink t2 t2\n",
        )
        .unwrap();
        let net = compute_flows(&net).unwrap();
        assert_eq!(net.flows().len(), 4);
        validate(&net).unwrap();
    }

    #[test]
    fn single_path() {
        let net = parse_network("edge e1 s m\nedge e2 m t\nsource s a\nsink t t\n").unwrap();
        let net = compute_flows(&net).unwrap();
        assert_eq!(net.flows()[0].edges, vec![0, 1]);
    }

    #[test]
    fn insufficient_capacity_names_sink() {
        let net = parse_network(
            "edge e1 A M\nedge e2 B M\nedge e3 M t\nsource A a\nsource B b\nsink t sink_t\n",
        )
        .unwrap();
        let err = compute_flows(&net).unwrap_err();
        assert!(err.to_string().contains("sink_t"), "{err}");
        assert!(matches!(err, FlowError::InsufficientCapacity { found: 1, .. }));
    }
}
