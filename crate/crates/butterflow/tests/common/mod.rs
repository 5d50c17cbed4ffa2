//! Shared fixtures for the integration suites: random instances and an
//! independent min-cut oracle that enumerates edge subsets.

// Each integration target compiles its own copy and uses a subset.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, RngExt};

use butterflow::netgraph::{Capacity, Network, NodeId, TemplateCaps, Variant};
use butterflow::rational::{rat, Rational};
use butterflow::regions::RatePair;

/// Uniform rational in [0, max_value] with denominator up to max_denom.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, max_value: i128, max_denom: i128) -> Rational {
    let denom = rng.random_range(1..=max_denom);
    let numer = rng.random_range(0..=max_value * denom);
    rat(numer, denom)
}

pub fn random_caps<R: Rng + ?Sized>(
    rng: &mut R,
    variant: Variant,
    max_value: i128,
    max_denom: i128,
) -> TemplateCaps {
    let caps: BTreeMap<_, _> = variant
        .edge_labels()
        .into_iter()
        .map(|label| {
            let value = random_rational(rng, max_value, max_denom);
            (label, Capacity::new(value).unwrap())
        })
        .collect();
    TemplateCaps::new(variant, caps).unwrap()
}

pub fn random_rate<R: Rng + ?Sized>(rng: &mut R, max_value: i128, max_denom: i128) -> RatePair {
    RatePair::new(
        random_rational(rng, max_value, max_denom),
        random_rational(rng, max_value, max_denom),
    )
    .unwrap()
}

/// Minimum total capacity over all edge subsets whose removal disconnects
/// every `from` node from every `to` node. Exponential in the edge count,
/// which is at most seven here; used as the oracle for the max-flow code.
pub fn brute_force_min_cut(net: &Network, from: &[NodeId], to: &[NodeId]) -> Rational {
    let edges = net.edges();
    assert!(edges.len() <= 20, "oracle is exponential in edges");
    let mut best: Option<Rational> = None;
    for removed in 0u32..(1 << edges.len()) {
        if !disconnects(net, from, to, removed) {
            continue;
        }
        let total: Rational = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| removed >> i & 1 == 1)
            .map(|(_, e)| e.capacity.value())
            .sum();
        best = Some(match best {
            None => total,
            Some(b) => b.min(total),
        });
    }
    best.expect("removing every edge always disconnects")
}

fn disconnects(net: &Network, from: &[NodeId], to: &[NodeId], removed: u32) -> bool {
    let node_count = net.nodes().len();
    let mut reached = vec![false; node_count];
    let mut queue: Vec<usize> = from.iter().map(|n| n.0).collect();
    for &n in &queue {
        reached[n] = true;
    }
    while let Some(n) = queue.pop() {
        for (i, edge) in net.edges().iter().enumerate() {
            if removed >> i & 1 == 1 || edge.tail.0 != n || reached[edge.head.0] {
                continue;
            }
            reached[edge.head.0] = true;
            queue.push(edge.head.0);
        }
    }
    to.iter().all(|n| !reached[n.0])
}
