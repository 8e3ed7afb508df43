#![allow(dead_code)]

use std::path::PathBuf;

use delaycode::flow_graph::{
    build_line_graph, find_knots, parse_network, validate, FlowNetwork, FlowStructure,
    KnotComponent, LineGraph,
};
use delaycode::gf2::Gf2Rational;
use delaycode::life_star::{compile, EncoderConfig, Input, NetworkCode};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../networks")
        .join(name)
}

pub fn load(name: &str) -> FlowNetwork {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture");
    parse_network(&text).expect("fixture parses")
}

pub struct Knotted {
    pub net: FlowNetwork,
    pub structure: FlowStructure,
    pub knots: Vec<KnotComponent>,
    pub lines: Vec<LineGraph>,
}

pub fn knotted(net: FlowNetwork) -> Knotted {
    let structure = validate(&net).expect("valid");
    let knots = find_knots(&net, &structure);
    let lines = knots.iter().map(|k| build_line_graph(k, &structure)).collect();
    Knotted {
        net,
        structure,
        knots,
        lines,
    }
}

pub fn r(s: &str) -> Gf2Rational {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn e(net: &FlowNetwork, name: &str) -> usize {
    net.edge_by_name(name).unwrap_or_else(|| panic!("no edge {name}"))
}

/// Independent oracle for a transfer function: a unit pulse enters the
/// pruned line graph at every entry vertex at time 1 and moves one arc per
/// time step; bit `k` is the parity of walks reaching `target` at time `k`.
pub fn walk_parity(
    vertices: usize,
    arcs: &[(usize, usize)],
    entries: &[usize],
    target: usize,
    horizon: usize,
) -> Vec<bool> {
    let mut state = vec![false; vertices];
    for &s in entries {
        state[s] ^= true;
    }
    let mut bits = vec![false; horizon + 1];
    for bit in bits.iter_mut().skip(1) {
        *bit = state[target];
        let mut next = vec![false; vertices];
        for &(a, b) in arcs {
            next[b] ^= state[a];
        }
        state = next;
    }
    bits
}

pub fn compile_fixture(name: &str, config: &EncoderConfig) -> (FlowNetwork, NetworkCode) {
    let net = load(name);
    let code = compile(&net, config).unwrap_or_else(|e| panic!("{name}: {e}"));
    (net, code)
}

pub fn global_text(net: &FlowNetwork, code: &NetworkCode, name: &str) -> String {
    code.global(e(net, name)).expect("encoded").render(net, e(net, name))
}

/// Expands every local equation over the global equations of its inputs and
/// returns the edges whose result differs from the stored global equation.
pub fn local_mismatches(net: &FlowNetwork, code: &NetworkCode) -> Vec<String> {
    let h = code.h;
    let unit = |s: usize| -> Vec<Gf2Rational> {
        (0..h)
            .map(|i| if i == s { Gf2Rational::one() } else { Gf2Rational::zero() })
            .collect()
    };
    let mut bad = Vec::new();
    for edge in 0..net.edges().len() {
        let (Some(local), Some(global)) = (code.local(edge), code.global(edge)) else {
            continue;
        };
        let mut acc = vec![Gf2Rational::zero(); h];
        let mut add = |coef: &Gf2Rational, g: Vec<Gf2Rational>| {
            for (a, v) in acc.iter_mut().zip(g) {
                *a = &*a + &(coef * &v);
            }
        };
        for t in &local.terms {
            let g = match t.input {
                Input::Source(s) => unit(s),
                Input::Edge(p) => code.global(p).expect("input encoded").coeffs.clone(),
            };
            add(&t.coefficient, g);
        }
        for r in &local.removals {
            add(&r.coefficient, code.global(r.input).expect("input encoded").coeffs.clone());
        }
        if acc != global.coeffs {
            bad.push(net.edge_name(edge).to_string());
        }
    }
    bad
}
