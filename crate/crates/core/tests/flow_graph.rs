mod common;

use std::collections::BTreeSet;

use common::{e, fixture_path, knotted, load};
use delaycode::flow_graph::{
    compute_flows, find_knots, parse_network, topo_layers, validate, FlowError, FlowNetwork,
    KnotKind, VisitStep,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn names(net: &FlowNetwork, edges: &[usize]) -> Vec<String> {
    edges.iter().map(|&x| net.edge_name(x).to_string()).collect()
}

fn sink_names(net: &FlowNetwork, sinks: &[usize]) -> Vec<String> {
    sinks.iter().map(|&t| net.sinks()[t].name.clone()).collect()
}

#[test]
fn ex1_predecessors_and_sinks_of_e4() {
    let net = load("ex1.net");
    let s = validate(&net).unwrap();
    let e4 = e(&net, "e4");
    assert_eq!(names(&net, s.preds_of(e4)), ["e1", "e2"]);
    assert_eq!(sink_names(&net, s.sinks_using(e4)), ["t1", "t4", "t5"]);
}

#[test]
fn ex4_logical_and_physical_predecessors_of_e13() {
    let net = load("ex4.net");
    let s = validate(&net).unwrap();
    let e13 = e(&net, "e13");
    assert_eq!(names(&net, s.preds_of(e13)), ["e5", "e17"]);
    assert_eq!(names(&net, s.phys_preds_of(e13)), ["e5", "e8", "e17"]);
}

#[test]
fn predecessors_are_a_subset_of_physical_predecessors() {
    for name in ["ex1.net", "ex2.net", "ex3.net", "ex4.net", "ex5.net"] {
        let net = load(name);
        let s = validate(&net).unwrap();
        for edge in s.live_edges() {
            let phys: BTreeSet<_> = s.phys_preds_of(edge).iter().collect();
            assert!(s.preds_of(edge).iter().all(|p| phys.contains(p)), "{name}");
        }
    }
}

#[test]
fn single_edge_network() {
    let net = parse_network("source s a\nsink t t\nedge e s t\nflow t a : e\n").unwrap();
    let s = validate(&net).unwrap();
    assert!(s.preds_of(0).is_empty());
    assert_eq!(s.sinks_using(0), [0]);
}

#[test]
fn knots_of_examples() {
    assert!(knotted(load("ex1.net")).knots.is_empty());
    assert!(knotted(load("ex2.net")).knots.is_empty());

    let k3 = knotted(load("ex3.net"));
    assert_eq!(k3.knots.len(), 1);
    assert_eq!(k3.knots[0].kind, KnotKind::SimpleCycle);
    assert_eq!(names(&k3.net, &k3.knots[0].edges), ["e10", "e11", "e12"]);
    assert_eq!(names(&k3.net, &k3.knots[0].predecessors), ["e1", "e5", "e9"]);

    let k4 = knotted(load("ex4.net"));
    assert_eq!(k4.knots.len(), 1);
    assert_eq!(k4.knots[0].kind, KnotKind::Knot);
    assert_eq!(names(&k4.net, &k4.knots[0].edges), ["e13", "e14", "e15", "e16", "e17"]);
    assert_eq!(names(&k4.net, &k4.knots[0].predecessors), ["e2", "e5", "e8", "e11"]);

    let k5 = knotted(load("ex5.net"));
    assert_eq!(k5.knots.len(), 1);
    assert_eq!(k5.knots[0].kind, KnotKind::Knot);
    assert_eq!(k5.knots[0].edges.len(), 12);
}

#[test]
fn ex4_line_graph_arcs() {
    let k = knotted(load("ex4.net"));
    let arcs: BTreeSet<(String, String)> = k.lines[0]
        .edge_arcs()
        .into_iter()
        .map(|(a, b)| (k.net.edge_name(a).to_string(), k.net.edge_name(b).to_string()))
        .collect();
    let expected: BTreeSet<(String, String)> = [
        ("e13", "e15"),
        ("e15", "e17"),
        ("e17", "e13"),
        ("e14", "e16"),
        ("e16", "e17"),
        ("e17", "e14"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(arcs, expected);
}

#[test]
fn ex1_plan_is_index_order() {
    let net = load("ex1.net");
    let s = validate(&net).unwrap();
    let plan = topo_layers(&s, &[], None);
    let order = names(&net, &plan.edges());
    let expected: Vec<String> = (1..=18).map(|i| format!("e{i}")).collect();
    assert_eq!(order, expected);
}

#[test]
fn ex3_plan_stalls_at_the_cycle() {
    let k = knotted(load("ex3.net"));
    let plan = topo_layers(&k.structure, &k.knots, None);
    let before = names(&k.net, &plan.before_first_knot());
    let expected: Vec<String> = (1..=9).map(|i| format!("e{i}")).collect();
    assert_eq!(before, expected);
    assert!(plan.steps.contains(&VisitStep::Knot(0)));
}

#[test]
fn chain_plan() {
    let net = parse_network(
        "source s a\nsink t t\nedge x s u\nedge y u v\nedge z v t\nflow t a : x y z\n",
    )
    .unwrap();
    let s = validate(&net).unwrap();
    assert_eq!(names(&net, &topo_layers(&s, &[], None).edges()), ["x", "y", "z"]);
}

#[test]
fn computed_flows_for_ex1_topology_validate() {
    let mut net = load("ex1.net");
    net.clear_flows();
    let with_flows = compute_flows(&net).unwrap();
    let s = validate(&with_flows).unwrap();
    assert_eq!(s.h(), 2);
    assert_eq!(with_flows.flows().len(), 12);
}

#[test]
fn insufficient_capacity_names_the_sink() {
    let net = parse_network(
        "source A a\nsource B b\nsink t t\nedge x A m\nedge y B m\nedge z m t\n",
    )
    .unwrap();
    match compute_flows(&net) {
        Err(FlowError::InsufficientCapacity { sink, found, needed }) => {
            assert_eq!((sink.as_str(), found, needed), ("t", 1, 2));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_errors() {
    let base = "source A a\nsource B b\nsink t t\nedge x A t\nedge y B t\nedge w A t\n";
    let broken = format!("{base}flow t a : y\nflow t b : x\n");
    assert!(matches!(
        validate(&parse_network(&broken).unwrap()),
        Err(FlowError::BadStart { .. })
    ));
    let missing = format!("{base}flow t a : x\n");
    assert!(matches!(
        validate(&parse_network(&missing).unwrap()),
        Err(FlowError::MissingFlow { .. })
    ));
    let dead = format!("{base}flow t a : x\nflow t b : y\n");
    let s = validate(&parse_network(&dead).unwrap()).unwrap();
    assert_eq!(s.dead_edges().len(), 1);
    assert_eq!(s.warnings().len(), 1);
}

#[test]
fn shared_edge_is_rejected() {
    let text = "source A a\nsource B b\nsink t t\nedge x A m\nedge y B m\nedge z m t\n\
                flow t a : x z\nflow t b : y z\n";
    assert!(matches!(
        validate(&parse_network(text).unwrap()),
        Err(FlowError::NotDisjoint { .. })
    ));
}

#[test]
fn parse_error_names_the_line() {
    let err = parse_network("source A a\nflow t a x\n").unwrap_err();
    assert_eq!(err.line, 2);
}

#[test]
fn text_round_trip() {
    for name in ["ex1.net", "ex4.net", "ex5.net"] {
        let net = load(name);
        let again = parse_network(&net.to_text()).unwrap();
        assert_eq!(again.to_text(), net.to_text());
    }
}

fn structure_by_name(net: &FlowNetwork) -> Vec<(String, Vec<String>, Vec<String>)> {
    let s = validate(net).unwrap();
    let mut rows: Vec<_> = (0..net.edges().len())
        .map(|x| {
            let mut p = names(net, s.preds_of(x));
            p.sort();
            (
                net.edge_name(x).to_string(),
                p,
                sink_names(net, s.sinks_using(x)),
            )
        })
        .collect();
    rows.sort();
    rows
}

fn knots_by_name(net: &FlowNetwork) -> BTreeSet<BTreeSet<String>> {
    let s = validate(net).unwrap();
    find_knots(net, &s)
        .iter()
        .map(|k| names(net, &k.edges).into_iter().collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn edge_declaration_order_does_not_change_structure(seed in any::<u64>()) {
        for name in ["ex4.net", "ex5.net"] {
            let text = std::fs::read_to_string(fixture_path(name)).unwrap();
            let (mut edges, rest): (Vec<&str>, Vec<&str>) =
                text.lines().partition(|l| l.starts_with("edge "));
            edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let shuffled = edges.iter().chain(rest.iter()).copied().collect::<Vec<_>>().join("\n");
            let a = parse_network(&text).unwrap();
            let b = parse_network(&shuffled).unwrap();
            prop_assert_eq!(structure_by_name(&a), structure_by_name(&b));
            prop_assert_eq!(knots_by_name(&a), knots_by_name(&b));
        }
    }
}
