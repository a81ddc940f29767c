//! Synthetic relational workloads for the benchmarks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relprop::parse::parse_dataset;
use relprop::{Bias, Dataset};

pub const GRAPH_BIAS: &str = "decl(node(key,obj)).\ndecl(edge(key,obj,obj)).\ndecl(red(key,obj)).\n";

/// `n` random small graphs; positive when some red node has a two-step
/// cycle back to itself.
pub fn graph_facts(n: usize, nodes: usize, edges: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for g in 0..n {
        let id = format!("g{g}");
        let mut arcs: Vec<(usize, usize)> =
            (0..edges).map(|_| (rng.gen_range(0..nodes), rng.gen_range(0..nodes))).collect();
        arcs.sort();
        arcs.dedup();
        let red: Vec<bool> = (0..nodes).map(|_| rng.gen_bool(0.3)).collect();
        let positive = arcs.iter().any(|&(a, b)| a != b && red[a] && arcs.contains(&(b, a)));
        writeln!(out, "example({id}, {}).", if positive { "pos" } else { "neg" }).unwrap();
        for v in 0..nodes {
            writeln!(out, "node({id}, n{v}).").unwrap();
            if red[v] {
                writeln!(out, "red({id}, n{v}).").unwrap();
            }
        }
        for (a, b) in arcs {
            writeln!(out, "edge({id}, n{a}, n{b}).").unwrap();
        }
    }
    out
}

pub fn graph_dataset(n: usize, nodes: usize, edges: usize, seed: u64) -> (Dataset, Bias) {
    parse_dataset(&graph_facts(n, nodes, edges, seed), GRAPH_BIAS).expect("generated data parses")
}
