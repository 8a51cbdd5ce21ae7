//! Cross-checks graph queries of the space builder against petgraph on
//! randomly built spaces.

use std::collections::BTreeSet;

use petgraph::algo::{dijkstra, has_path_connecting};
use petgraph::graph::{DiGraph, NodeIndex, UnGraph};
use petgraph::visit::NodeFiltered;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pseudospace::alphabet::all_letters;
use pseudospace::oracle::random_script;
use pseudospace::{flags, Anchor, ColoredSpace, Flag};

fn space(seed: u64, n: usize) -> ColoredSpace {
    random_script(&mut ChaCha8Rng::seed_from_u64(seed), n, 8).1
}

fn undirected(m: &ColoredSpace) -> UnGraph<usize, ()> {
    let mut g = UnGraph::new_undirected();
    for v in m.vertices() {
        g.add_node(m.level(v));
    }
    for (x, y) in m.edges() {
        g.add_edge(NodeIndex::new(x), NodeIndex::new(y), ());
    }
    g
}

/// Edges pointing from the lower level to the upper one.
fn upward(m: &ColoredSpace) -> DiGraph<usize, ()> {
    let mut g = DiGraph::new();
    for v in m.vertices() {
        g.add_node(m.level(v));
    }
    for (x, y) in m.edges() {
        let (lo, hi) = if m.level(x) < m.level(y) {
            (x, y)
        } else {
            (y, x)
        };
        g.add_edge(NodeIndex::new(lo), NodeIndex::new(hi), ());
    }
    g
}

/// Flags by brute force: every choice of one vertex per level that forms a
/// path.
fn brute_flags(m: &ColoredSpace) -> BTreeSet<Vec<usize>> {
    let mut partial: Vec<Vec<usize>> = vec![vec![]];
    for l in 0..=m.dim() {
        let mut next = Vec::new();
        for p in &partial {
            for v in m.vertices().filter(|&v| m.level(v) == l) {
                if p.last().is_none_or(|&u| m.has_edge(u, v)) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        partial = next;
    }
    partial.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_match_dijkstra(seed in any::<u64>(), n in 1usize..=3) {
        let m = space(seed, n);
        let g = undirected(&m);
        for t in all_letters(n) {
            let inside = NodeFiltered::from_fn(&g, |v: NodeIndex| t.is_level_in(m.level(v.index())));
            for x in m.vertices().filter(|&v| t.is_level_in(m.level(v))) {
                let d = dijkstra(&inside, NodeIndex::new(x), None, |_| 1usize);
                for y in m.vertices().filter(|&v| t.is_level_in(m.level(v))) {
                    let ours = m.distance(x, y, t).unwrap();
                    prop_assert_eq!(ours, d.get(&NodeIndex::new(y)).copied(), "{} {} {}", t, x, y);
                }
            }
        }
    }

    #[test]
    fn between_sets_match_reachability(seed in any::<u64>(), n in 1usize..=3) {
        let m = space(seed, n);
        let g = upward(&m);
        for (a, b) in m.anchor_pairs() {
            let between = m.between(a, b).unwrap();
            for v in m.vertices() {
                let over_a = match a {
                    Anchor::Bottom => true,
                    Anchor::Top => false,
                    Anchor::Real(x) => x != v && has_path_connecting(&g, NodeIndex::new(x), NodeIndex::new(v), None),
                };
                let under_b = match b {
                    Anchor::Top => true,
                    Anchor::Bottom => false,
                    Anchor::Real(y) => y != v && has_path_connecting(&g, NodeIndex::new(v), NodeIndex::new(y), None),
                };
                prop_assert_eq!(between.contains(&v), over_a && under_b, "{} {} {}", a, b, v);
            }
        }
    }

    #[test]
    fn flag_enumeration_matches_brute_force(seed in any::<u64>(), n in 1usize..=3) {
        let m = space(seed, n);
        let ours: BTreeSet<Vec<usize>> = flags::enumerate_flags(&m, None)
            .iter()
            .map(|f: &Flag| f.vertices().to_vec())
            .collect();
        prop_assert_eq!(ours, brute_flags(&m));
    }

    #[test]
    fn built_spaces_are_bipartite_by_level(seed in any::<u64>(), n in 1usize..=3) {
        let m = space(seed, n);
        for (x, y) in m.edges() {
            prop_assert_eq!(m.level(x).abs_diff(m.level(y)), 1);
        }
        prop_assert!(m.is_simply_connected());
    }
}
