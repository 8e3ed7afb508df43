use std::collections::HashMap;
use std::fmt::Write as _;

use super::FlowError;

/// Position of an edge in declaration order. Lower ids win every tie.
pub type EdgeId = usize;
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub node: NodeId,
    pub symbol: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sink {
    pub node: NodeId,
    pub name: String,
}

/// The path carrying one source's symbols to one sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowPath {
    pub sink: usize,
    pub source: usize,
    pub edges: Vec<EdgeId>,
}

/// A directed multigraph with unit-rate sources, sinks, and the flow paths
/// connecting every source to every sink.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    sources: Vec<Source>,
    sinks: Vec<Sink>,
    flows: Vec<FlowPath>,
    node_index: HashMap<String, NodeId>,
    edge_index: HashMap<String, EdgeId>,
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, declaring the node if needed.
    pub fn add_node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.node_index.get(name) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(name.to_string());
        self.node_index.insert(name.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, name: &str, from: &str, to: &str) -> Result<EdgeId, FlowError> {
        if self.edge_index.contains_key(name) {
            return Err(FlowError::Duplicate(format!("edge {name}")));
        }
        let from = self.add_node(from);
        let to = self.add_node(to);
        let id = self.edges.len();
        self.edges.push(Edge {
            name: name.to_string(),
            from,
            to,
        });
        self.edge_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_source(&mut self, node: &str, symbol: &str) -> Result<usize, FlowError> {
        if self.sources.iter().any(|s| s.symbol == symbol) {
            return Err(FlowError::Duplicate(format!("source symbol {symbol}")));
        }
        let node = self.add_node(node);
        if self.sources.iter().any(|s| s.node == node) {
            return Err(FlowError::Duplicate(format!("source node {}", self.nodes[node])));
        }
        self.sources.push(Source {
            node,
            symbol: symbol.to_string(),
        });
        Ok(self.sources.len() - 1)
    }

    pub fn add_sink(&mut self, node: &str, name: &str) -> Result<usize, FlowError> {
        if self.sinks.iter().any(|s| s.name == name) {
            return Err(FlowError::Duplicate(format!("sink {name}")));
        }
        let node = self.add_node(node);
        self.sinks.push(Sink {
            node,
            name: name.to_string(),
        });
        Ok(self.sinks.len() - 1)
    }

    /// Declares the flow path from `source` (symbol or node name) to `sink`.
    pub fn add_flow(&mut self, sink: &str, source: &str, edges: &[&str]) -> Result<(), FlowError> {
        let sink_idx = self
            .sink_by_name(sink)
            .ok_or_else(|| FlowError::Unknown(format!("sink {sink}")))?;
        let source_idx = self
            .source_by_name(source)
            .ok_or_else(|| FlowError::Unknown(format!("source {source}")))?;
        if self
            .flows
            .iter()
            .any(|f| f.sink == sink_idx && f.source == source_idx)
        {
            return Err(FlowError::Duplicate(format!("flow {sink} {source}")));
        }
        let edges = edges
            .iter()
            .map(|e| self.edge_by_name(e).ok_or_else(|| FlowError::Unknown(format!("edge {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        self.flows.push(FlowPath {
            sink: sink_idx,
            source: source_idx,
            edges,
        });
        Ok(())
    }

    pub(crate) fn push_flow(&mut self, flow: FlowPath) {
        self.flows.push(flow);
    }

    pub fn clear_flows(&mut self) {
        self.flows.clear();
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e].name
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n]
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn sinks(&self) -> &[Sink] {
        &self.sinks
    }

    pub fn flows(&self) -> &[FlowPath] {
        &self.flows
    }

    /// Number of sources (the multicast rate).
    pub fn h(&self) -> usize {
        self.sources.len()
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn sink_by_name(&self, name: &str) -> Option<usize> {
        self.sinks.iter().position(|s| s.name == name)
    }

    /// Looks a source up by symbol first, then by node name.
    pub fn source_by_name(&self, name: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.symbol == name).or_else(|| {
            let node = self.node_by_name(name)?;
            self.sources.iter().position(|s| s.node == node)
        })
    }

    /// Renders the network in the line-oriented file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(out, "node {n}");
        }
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", e.name, self.nodes[e.from], self.nodes[e.to]);
        }
        for s in &self.sources {
            let _ = writeln!(out, "source {} {}", self.nodes[s.node], s.symbol);
        }
        for t in &self.sinks {
            let _ = writeln!(out, "sink {} {}", self.nodes[t.node], t.name);
        }
        for f in &self.flows {
            let names: Vec<&str> = f.edges.iter().map(|&e| self.edge_name(e)).collect();
            let _ = writeln!(
                out,
                "flow {} {} : {}",
                self.sinks[f.sink].name,
                self.sources[f.source].symbol,
                names.join(" ")
            );
        }
        out
    }
}
