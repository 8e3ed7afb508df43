//! Seeded random networks with valid flow paths.
//!
//! Every flow enters a small core graph through an edge owned by its source,
//! walks the core on a node-simple path avoiding edges of the same sink, and
//! leaves on an exit edge of its own. The core's shape decides what the flows can form:
//! a DAG gives flow-acyclic networks, a ring simple flow cycles, and a ring
//! with chords knots.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow_graph::{find_knots, validate, FlowNetwork, KnotKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Acyclic,
    SimpleCycle,
    Knotted,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Acyclic, Topology::SimpleCycle, Topology::Knotted];
}

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub topology: Topology,
    pub max_sources: usize,
    pub max_sinks: usize,
    pub max_edges: usize,
    /// Upper bound on core nodes; the core holds all cycles.
    pub max_core: usize,
    /// Upper bound on edges of any knot or flow cycle.
    pub max_knot_edges: usize,
}

impl RandomSpec {
    pub fn new(topology: Topology) -> Self {
        Self {
            topology,
            max_sources: 4,
            max_sinks: 4,
            max_edges: 40,
            max_core: 6,
            max_knot_edges: usize::MAX,
        }
    }
}

/// How many attempts [`random_network`] makes before giving up.
pub const ATTEMPTS: usize = 10_000;

/// A valid network of the requested topology, deterministic in `seed`.
pub fn random_network(spec: &RandomSpec, seed: u64) -> Option<FlowNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ATTEMPTS).find_map(|_| attempt(spec, &mut rng))
}

fn attempt(spec: &RandomSpec, rng: &mut ChaCha8Rng) -> Option<FlowNetwork> {
    let h = rng.gen_range(1..=spec.max_sources);
    let sinks = rng.gen_range(1..=spec.max_sinks);
    let core_min = if spec.topology == Topology::Acyclic { 2 } else { 3 };
    let n = rng.gen_range(core_min..=spec.max_core.max(core_min));
    let core = core_edges(spec.topology, n, rng);

    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut flows: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut used_core = vec![false; core.len()];
    let mut core_id = vec![usize::MAX; core.len()];
    // (source, node) -> edge index
    let mut entries: Vec<(usize, usize, usize)> = Vec::new();
    let new_edge = |edges: &mut Vec<(String, String, String)>, from: String, to: String| {
        edges.push((format!("e{}", edges.len() + 1), from, to));
        edges.len() - 1
    };
    for t in 0..sinks {
        let mut taken = vec![false; core.len()];
        for s in 0..h {
            let src = format!("S{s}");
            let sink = format!("T{t}");
            if rng.gen_bool(0.15) {
                let e = new_edge(&mut edges, src, sink);
                flows.push((t, s, vec![e]));
                continue;
            }
            let start = rng.gen_range(0..n);
            let entry = match entries.iter().find(|&&(es, en, _)| es == s && en == start) {
                Some(&(_, _, e)) if rng.gen_bool(0.7) => e,
                _ => {
                    let e = new_edge(&mut edges, src, format!("c{start}"));
                    entries.push((s, start, e));
                    e
                }
            };
            let mut path = vec![entry];
            let mut at = start;
            let mut visited = vec![false; n];
            visited[start] = true;
            let len = rng.gen_range(0..=core.len().min(8));
            for _ in 0..len {
                let options: Vec<usize> = (0..core.len())
                    .filter(|&k| core[k].0 == at && !taken[k] && !visited[core[k].1])
                    .collect();
                let Some(&k) = options.choose(rng) else { break };
                taken[k] = true;
                if !used_core[k] {
                    used_core[k] = true;
                    core_id[k] = new_edge(&mut edges, format!("c{}", core[k].0), format!("c{}", core[k].1));
                }
                path.push(core_id[k]);
                at = core[k].1;
                visited[at] = true;
            }
            let exit = new_edge(&mut edges, format!("c{at}"), sink);
            path.push(exit);
            flows.push((t, s, path));
        }
    }
    if edges.len() > spec.max_edges {
        return None;
    }
    let mut net = FlowNetwork::new();
    for s in 0..h {
        net.add_source(&format!("S{s}"), &symbol(s)).ok()?;
    }
    for t in 0..sinks {
        net.add_sink(&format!("T{t}"), &format!("t{}", t + 1)).ok()?;
    }
    for (name, from, to) in &edges {
        net.add_edge(name, from, to).ok()?;
    }
    for (t, s, path) in &flows {
        let names: Vec<&str> = path.iter().map(|&e| edges[e].0.as_str()).collect();
        net.add_flow(&format!("t{}", t + 1), &symbol(*s), &names).ok()?;
    }
    let structure = validate(&net).ok()?;
    let knots = find_knots(&net, &structure);
    if knots.iter().any(|k| k.edges.len() > spec.max_knot_edges) {
        return None;
    }
    let fits = match spec.topology {
        Topology::Acyclic => knots.is_empty(),
        Topology::SimpleCycle => {
            !knots.is_empty() && knots.iter().all(|k| k.kind == KnotKind::SimpleCycle)
        }
        Topology::Knotted => knots.iter().any(|k| k.kind == KnotKind::Knot),
    };
    fits.then_some(net)
}

fn symbol(s: usize) -> String {
    ((b'a' + s as u8) as char).to_string()
}

/// Core arcs over nodes `0..n`.
fn core_edges(topology: Topology, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    match topology {
        Topology::Acyclic => {
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.6) {
                        arcs.push((a, b));
                    }
                }
            }
            if arcs.is_empty() {
                arcs.push((0, 1));
            }
        }
        Topology::SimpleCycle => {
            arcs.extend((0..n).map(|a| (a, (a + 1) % n)));
        }
        Topology::Knotted => {
            arcs.extend((0..n).map(|a| (a, (a + 1) % n)));
            let chords = rng.gen_range(1..=2);
            for _ in 0..chords {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && (a + 1) % n != b {
                    arcs.push((a, b));
                }
            }
        }
    }
    arcs
}
