//! Line-oriented network files.
//!
//! ```text
//! # comment
//! node <id>
//! edge <id> <from> <to>
//! source <node> <symbol>
//! sink <node> <name>
//! flow <sink> <source> : <edge> <edge> ...
//! ```
//!
//! Nodes referenced by an `edge` line are declared implicitly. Edge lists may
//! be separated by spaces or commas.

use super::{FlowError, FlowNetwork};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_network(text: &str) -> Result<FlowNetwork, ParseError> {
    let mut net = FlowNetwork::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fail = |message: String| ParseError { line, message };
        let wrap = |e: FlowError| ParseError {
            line,
            message: e.to_string(),
        };
        let (head, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let args: Vec<&str> = rest.split_whitespace().collect();
        match head {
            "node" => match args.as_slice() {
                [id] => {
                    net.add_node(id);
                }
                _ => return Err(fail(format!("expected `node <id>`, got {content:?}"))),
            },
            "edge" => match args.as_slice() {
                [id, from, to] => {
                    net.add_edge(id, from, to).map_err(wrap)?;
                }
                _ => return Err(fail(format!("expected `edge <id> <from> <to>`, got {content:?}"))),
            },
            "source" => match args.as_slice() {
                [node, symbol] => {
                    net.add_source(node, symbol).map_err(wrap)?;
                }
                _ => return Err(fail(format!("expected `source <node> <symbol>`, got {content:?}"))),
            },
            "sink" => match args.as_slice() {
                [node, name] => {
                    net.add_sink(node, name).map_err(wrap)?;
                }
                _ => return Err(fail(format!("expected `sink <node> <name>`, got {content:?}"))),
            },
            "flow" => {
                let Some((left, right)) = rest.split_once(':') else {
                    return Err(fail(format!(
                        "expected `flow <sink> <source> : <edges>`, got {content:?}"
                    )));
                };
                let ends: Vec<&str> = left.split_whitespace().collect();
                let [sink, source] = ends.as_slice() else {
                    return Err(fail(format!(
                        "expected `flow <sink> <source> : <edges>`, got {content:?}"
                    )));
                };
                let edges: Vec<&str> = right
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .collect();
                if edges.is_empty() {
                    return Err(fail(format!("flow {sink} {source} has no edges")));
                }
                net.add_flow(sink, source, &edges).map_err(wrap)?;
            }
            other => return Err(fail(format!("unknown directive {other:?}"))),
        }
    }
    Ok(net)
}
