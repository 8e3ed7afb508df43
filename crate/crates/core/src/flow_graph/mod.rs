//! Network model: multigraph, sources, sinks, flow paths and the structure
//! derived from them.

mod flows;
mod knots;
mod network;
mod parse;
mod structure;

pub use flows::compute_flows;
pub use knots::{
    build_line_graph, find_knots, topo_layers, KnotComponent, KnotKind, LineGraph, VisitPlan,
    VisitStep,
};
pub use network::{Edge, EdgeId, FlowNetwork, FlowPath, NodeId, Sink, Source};
pub use parse::{parse_network, ParseError};
pub use structure::{validate, EdgeUse, FlowStructure};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("unknown {0}")]
    Unknown(String),
    #[error("network has no sources")]
    NoSources,
    #[error("network has no sinks")]
    NoSinks,
    #[error("flow {0} has no edges")]
    EmptyPath(String),
    #[error("flow {flow} starts with {edge}, which does not leave {expected}")]
    BadStart {
        flow: String,
        edge: String,
        expected: String,
    },
    #[error("flow {flow} ends with {edge}, which does not enter {expected}")]
    BadEnd {
        flow: String,
        edge: String,
        expected: String,
    },
    #[error("flow {flow} uses edge {edge} twice")]
    RevisitedEdge { flow: String, edge: String },
    #[error("flow {flow} is broken between {from} and {to}")]
    Discontinuity {
        flow: String,
        from: String,
        to: String,
    },
    #[error("flows of {first} and {second} to sink {sink} share edge {edge}")]
    NotDisjoint {
        sink: String,
        edge: String,
        first: String,
        second: String,
    },
    #[error("no flow from {symbol} to sink {sink}")]
    MissingFlow { sink: String, symbol: String },
    #[error("sink {sink} admits only {found} edge-disjoint paths from the {needed} sources")]
    InsufficientCapacity {
        sink: String,
        found: usize,
        needed: usize,
    },
}
