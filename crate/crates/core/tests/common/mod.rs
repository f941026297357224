//! Shared helpers for integration tests: deterministic random instances and
//! a primal brute-force assignment oracle independent of the flow module.
#![allow(dead_code)] // each test target uses its own subset

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use propalloc::instance::{Instance, LeftNode, RightNode};
use propalloc::structure;

/// Unit instance on n+n nodes containing the identity matching plus random
/// extra edges, resampled until connected.
pub fn random_connected_pm_instance(rng: &mut ChaCha8Rng, n: usize, extra_prob: f64) -> Instance {
    loop {
        let mut edges = Vec::new();
        for i in 1..=n {
            edges.push((format!("i{i}"), format!("j{i}")));
        }
        for i in 1..=n {
            for j in 1..=n {
                if i != j && rng.gen_bool(extra_prob) {
                    edges.push((format!("i{i}"), format!("j{j}")));
                }
            }
        }
        edges.sort();
        let inst = Instance::from_parts(
            (1..=n)
                .map(|i| LeftNode {
                    id: format!("i{i}"),
                    supply: 1,
                })
                .collect(),
            (1..=n)
                .map(|j| RightNode {
                    id: format!("j{j}"),
                    capacity: 1,
                })
                .collect(),
            edges,
        )
        .expect("constructed instance is valid");
        if structure::is_connected(&inst) {
            return inst;
        }
    }
}

/// Chain matching-covered blocks with forward edges from each later block's
/// left side to the previous block's right side. The result is connected,
/// has a perfect matching, and is not matching covered when blocks > 1.
pub fn chained_instance(rng: &mut ChaCha8Rng, block_sizes: &[usize], seed_base: u64) -> Instance {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut edges = Vec::new();
    for (b, &n) in block_sizes.iter().enumerate() {
        let extra = rng.gen_range(0..=n);
        let block =
            propalloc::instance::gen_random_mc(n, extra, seed_base + b as u64).expect("n >= 2");
        let tag = |id: &str| format!("b{b}{id}");
        for node in block.left() {
            left.push(LeftNode {
                id: tag(&node.id),
                supply: node.supply,
            });
        }
        for node in block.right() {
            right.push(RightNode {
                id: tag(&node.id),
                capacity: node.capacity,
            });
        }
        for (l, r) in block.edges() {
            edges.push((tag(l), tag(r)));
        }
        if b > 0 {
            // Forward edges into the previous block; at least one.
            let prev = b - 1;
            let links = rng.gen_range(1..=n.min(2));
            for _ in 0..links {
                let i = rng.gen_range(1..=n);
                let j = rng.gen_range(1..=block_sizes[prev]);
                let e = (format!("b{b}i{i}"), format!("b{prev}j{j}"));
                if !edges.contains(&e) {
                    edges.push(e);
                }
            }
        }
    }
    Instance::from_parts(left, right, edges).expect("chained instance is valid")
}

/// Exhaustive maximum-assignment oracle: places supply units one at a time
/// over each left node's neighbors (or drops them), memoized on remaining
/// capacities. Independent of the max-flow implementation.
pub fn brute_force_opt(inst: &Instance) -> i64 {
    assert!(inst.total_supply() <= 8, "oracle is exponential");
    let mut units = Vec::new();
    for i in 0..inst.n_left() {
        for _ in 0..inst.supply(i) {
            units.push(i);
        }
    }
    let mut caps: Vec<i64> = inst.right().iter().map(|r| r.capacity).collect();
    let mut memo = HashMap::new();
    fn rec(
        inst: &Instance,
        units: &[usize],
        k: usize,
        caps: &mut Vec<i64>,
        memo: &mut HashMap<(usize, Vec<i64>), i64>,
    ) -> i64 {
        if k == units.len() {
            return 0;
        }
        let key = (k, caps.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        // Drop the unit.
        let mut best = rec(inst, units, k + 1, caps, memo);
        let i = units[k];
        for &e in inst.edges_of_left(i) {
            let j = inst.edge_endpoints()[e].1;
            if caps[j] > 0 {
                caps[j] -= 1;
                best = best.max(1 + rec(inst, units, k + 1, caps, memo));
                caps[j] += 1;
            }
        }
        memo.insert(key, best);
        best
    }
    rec(inst, &units, 0, &mut caps, &mut memo)
}

/// Log-uniform weight vector in [1e-6, 1e6].
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> propalloc::WeightVector {
    propalloc::WeightVector::new((0..n).map(|_| 10f64.powf(rng.gen_range(-6.0..6.0))).collect())
        .expect("positive by construction")
}
