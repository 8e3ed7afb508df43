//! Text, JSON and DOT renderings of a compiled network code.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::flow_graph::{FlowNetwork, KnotKind};
use crate::life_star::{Input, LocalKind, NetworkCode};
use crate::linalg::RatMatrix;

/// Human-readable report; byte-stable for identical inputs.
pub fn render_text(net: &FlowNetwork, code: &NetworkCode) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "network: {} edges, {} sources, {} sinks",
        net.edges().len(),
        net.sources().len(),
        net.sinks().len()
    );
    for w in &code.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out.push_str("\nlocal encodings\n");
    for e in 0..net.edges().len() {
        if let Some(l) = code.local(e) {
            let _ = writeln!(out, "{}", l.render(net, e));
        }
    }
    out.push_str("\nglobal encodings\n");
    for e in 0..net.edges().len() {
        if let Some(g) = code.global(e) {
            let _ = writeln!(out, "{}", g.render(net, e));
        }
    }
    for k in &code.knots {
        let names: Vec<&str> = k.component.edges.iter().map(|&e| net.edge_name(e)).collect();
        let kind = match k.component.kind {
            KnotKind::SimpleCycle => "flow cycle",
            KnotKind::Knot => "knot",
        };
        let _ = writeln!(out, "\n{kind} {{{}}}", names.join(","));
        let exps: Vec<String> = k
            .component
            .predecessors
            .iter()
            .zip(&k.exponents)
            .map(|(&p, i)| format!("i_C({})={i}", net.edge_name(p)))
            .collect();
        let _ = writeln!(out, "{}", exps.join(" "));
        out.push_str(&k.table.render(net));
    }
    for d in &code.decoders {
        let sink = &net.sinks()[d.sink].name;
        let cols: Vec<&str> = d.columns.iter().map(|&e| net.edge_name(e)).collect();
        let _ = writeln!(out, "\nsink {sink}");
        let _ = writeln!(out, "E = {}", cols.join(" "));
        let _ = writeln!(out, "M = {}", d.matrix);
        let _ = writeln!(out, "M^-1 = {}", d.inverse);
        let upper = d
            .upper_bound
            .map_or_else(|| "n/a".to_string(), |u| u.to_string());
        let _ = writeln!(
            out,
            "delay {} (lower bound {}, upper bound {upper})",
            d.delay, d.lower_bound
        );
        for line in d.render_decode(net) {
            let _ = writeln!(out, "{line}");
        }
    }
    let _ = writeln!(out, "\nprecode {}", code.precode);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDump {
    pub input: String,
    pub exponent: usize,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalDump {
    pub via: String,
    pub input: String,
    pub exponent: usize,
    pub tau: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDump {
    pub edge: String,
    pub kind: String,
    pub terms: Vec<TermDump>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removals: Vec<RemovalDump>,
    /// One coefficient per source, in source order.
    pub global: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotDump {
    pub kind: KnotKind,
    pub edges: Vec<String>,
    pub predecessors: Vec<String>,
    pub exponents: Vec<usize>,
    /// `tau[i][j]` for predecessor `i` and knot edge `j`.
    pub tau: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinkDump {
    pub sink: String,
    pub columns: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    pub inverse: Vec<Vec<String>>,
    pub delay: usize,
    pub lower_bound: usize,
    pub upper_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDump {
    pub sources: Vec<String>,
    pub edges: Vec<EdgeDump>,
    pub knots: Vec<KnotDump>,
    pub sinks: Vec<SinkDump>,
    pub precode: String,
    pub warnings: Vec<String>,
}

fn strings(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect()
}

pub fn dump(net: &FlowNetwork, code: &NetworkCode) -> CodeDump {
    let name = |i: Input| match i {
        Input::Edge(p) => net.edge_name(p).to_string(),
        Input::Source(s) => net.sources()[s].symbol.clone(),
    };
    let edges = (0..net.edges().len())
        .filter_map(|e| {
            let l = code.local(e)?;
            let g = code.global(e)?;
            Some(EdgeDump {
                edge: net.edge_name(e).to_string(),
                kind: l.kind.to_string(),
                terms: l
                    .terms
                    .iter()
                    .map(|t| TermDump {
                        input: name(t.input),
                        exponent: t.exponent,
                        coefficient: t.coefficient.to_string(),
                    })
                    .collect(),
                removals: l
                    .removals
                    .iter()
                    .map(|r| RemovalDump {
                        via: net.edge_name(r.via).to_string(),
                        input: net.edge_name(r.input).to_string(),
                        exponent: r.exponent,
                        tau: r.tau.to_string(),
                    })
                    .collect(),
                global: g.coeffs.iter().map(ToString::to_string).collect(),
            })
        })
        .collect();
    let knots = code
        .knots
        .iter()
        .map(|k| KnotDump {
            kind: k.component.kind,
            edges: k.component.edges.iter().map(|&e| net.edge_name(e).to_string()).collect(),
            predecessors: k
                .component
                .predecessors
                .iter()
                .map(|&e| net.edge_name(e).to_string())
                .collect(),
            exponents: k.exponents.clone(),
            tau: k
                .component
                .predecessors
                .iter()
                .map(|&p| k.table.row(p).iter().map(ToString::to_string).collect())
                .collect(),
        })
        .collect();
    let sinks = code
        .decoders
        .iter()
        .map(|d| SinkDump {
            sink: net.sinks()[d.sink].name.clone(),
            columns: d.columns.iter().map(|&e| net.edge_name(e).to_string()).collect(),
            matrix: strings(&d.matrix),
            inverse: strings(&d.inverse),
            delay: d.delay,
            lower_bound: d.lower_bound,
            upper_bound: d.upper_bound,
        })
        .collect();
    CodeDump {
        sources: net.sources().iter().map(|s| s.symbol.clone()).collect(),
        edges,
        knots,
        sinks,
        precode: code.precode.to_string(),
        warnings: code.warnings.clone(),
    }
}

pub fn render_json(net: &FlowNetwork, code: &NetworkCode) -> String {
    let mut s = serde_json::to_string_pretty(&dump(net, code)).expect("serializable");
    s.push('\n');
    s
}

const PALETTE: [&str; 8] = [
    "red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan",
];
const STYLES: [&str; 4] = ["solid", "dashed", "dotted", "bold"];

/// The network with every flow path drawn: one color per sink, one line
/// style per source.
pub fn network_dot(net: &FlowNetwork) -> String {
    let mut out = String::from("digraph network {\n  rankdir=LR;\n");
    for s in net.sources() {
        let _ = writeln!(
            out,
            "  \"{}\" [shape=box, label=\"{} ({})\"];",
            net.node_name(s.node),
            net.node_name(s.node),
            s.symbol
        );
    }
    for t in net.sinks() {
        let _ = writeln!(out, "  \"{}\" [shape=doublecircle];", net.node_name(t.node));
    }
    for (e, edge) in net.edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\", color=gray];",
            net.node_name(edge.from),
            net.node_name(edge.to),
            net.edge_name(e)
        );
    }
    for f in net.flows() {
        let color = PALETTE[f.sink % PALETTE.len()];
        let style = STYLES[f.source % STYLES.len()];
        for &e in &f.edges {
            let edge = net.edge(e);
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [color={color}, style={style}, tooltip=\"{} to {}\"];",
                net.node_name(edge.from),
                net.node_name(edge.to),
                net.sources()[f.source].symbol,
                net.sinks()[f.sink].name
            );
        }
    }
    out.push_str("}\n");
    out
}

impl LocalKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "source" => Some(Self::Source),
            "acyclic" => Some(Self::Acyclic),
            "shortcut" => Some(Self::Shortcut),
            "knot" => Some(Self::Knot),
            _ => None,
        }
    }
}
