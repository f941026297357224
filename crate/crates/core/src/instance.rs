//! Data model, validation, serialization, and generators for single-capacity
//! allocation instances.
//!
//! An [`Instance`] is a bipartite graph: left nodes carry an integer supply,
//! right nodes carry an integer capacity, and edges mark compatible
//! assignments. Instances are immutable once validated; adjacency indexes are
//! precomputed so downstream algorithms can work with plain `usize` indices
//! in document order.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure;

/// Left node: a unit of demand with integer supply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftNode {
    pub id: String,
    pub supply: i64,
}

/// Right node: a sink with integer capacity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RightNode {
    pub id: String,
    pub capacity: i64,
}

/// Raw instance document, exactly the on-disk JSON shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub left: Vec<LeftNode>,
    pub right: Vec<RightNode>,
    pub edges: Vec<(String, String)>,
}

/// A single violated invariant found during validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("non-positive supply on left node {id:?} ({supply})")]
    NonPositiveSupply { id: String, supply: i64 },
    #[error("non-positive capacity on right node {id:?} ({capacity})")]
    NonPositiveCapacity { id: String, capacity: i64 },
    #[error("duplicate id {id:?} on the left side")]
    DuplicateLeftId { id: String },
    #[error("duplicate id {id:?} on the right side")]
    DuplicateRightId { id: String },
    #[error("dangling endpoint: edge ({left:?}, {right:?}) references unknown {side} id")]
    DanglingEndpoint {
        left: String,
        right: String,
        side: &'static str,
    },
    #[error("duplicate edge ({left:?}, {right:?})")]
    DuplicateEdge { left: String, right: String },
    #[error("total supply overflows 64-bit arithmetic")]
    SupplyOverflow,
    #[error("total capacity overflows 64-bit arithmetic")]
    CapacityOverflow,
    #[error("invalid generator parameter: {0}")]
    BadGeneratorParameter(String),
}

impl ValidationError {
    fn parameter(msg: &str) -> Self {
        ValidationError {
            violations: vec![Violation::BadGeneratorParameter(msg.to_string())],
        }
    }
}

/// Structured rejection listing every violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid instance: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

/// A validated bipartite allocation instance.
///
/// Node and edge order from the source document is preserved and used for
/// all deterministic iteration. Derived adjacency is index-based: edge `e`
/// connects left index `edge_endpoints()[e].0` to right index
/// `edge_endpoints()[e].1`.
#[derive(Debug, Clone, Serialize)]
#[serde(into = "InstanceDoc")]
pub struct Instance {
    left: Vec<LeftNode>,
    right: Vec<RightNode>,
    edges: Vec<(String, String)>,
    edge_endpoints: Vec<(usize, usize)>,
    adj_left: Vec<Vec<usize>>,
    adj_right: Vec<Vec<usize>>,
    left_index: HashMap<String, usize>,
    right_index: HashMap<String, usize>,
    total_supply: i64,
    total_capacity: i64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left && self.right == other.right && self.edges == other.edges
    }
}

impl Eq for Instance {}

impl From<Instance> for InstanceDoc {
    fn from(inst: Instance) -> Self {
        InstanceDoc {
            left: inst.left,
            right: inst.right,
            edges: inst.edges,
        }
    }
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = ValidationError;

    fn try_from(doc: InstanceDoc) -> Result<Self, Self::Error> {
        validate(doc)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let doc = InstanceDoc::deserialize(deserializer)?;
        validate(doc).map_err(serde::de::Error::custom)
    }
}

/// Validate a raw document, returning either an [`Instance`] or a rejection
/// listing every violated invariant.
pub fn validate(doc: InstanceDoc) -> Result<Instance, ValidationError> {
    let mut violations = Vec::new();

    let mut left_index = HashMap::new();
    for (i, node) in doc.left.iter().enumerate() {
        if node.supply <= 0 {
            violations.push(Violation::NonPositiveSupply {
                id: node.id.clone(),
                supply: node.supply,
            });
        }
        if left_index.insert(node.id.clone(), i).is_some() {
            violations.push(Violation::DuplicateLeftId {
                id: node.id.clone(),
            });
        }
    }

    let mut right_index = HashMap::new();
    for (j, node) in doc.right.iter().enumerate() {
        if node.capacity <= 0 {
            violations.push(Violation::NonPositiveCapacity {
                id: node.id.clone(),
                capacity: node.capacity,
            });
        }
        if right_index.insert(node.id.clone(), j).is_some() {
            violations.push(Violation::DuplicateRightId {
                id: node.id.clone(),
            });
        }
    }

    let mut seen_edges = HashMap::new();
    let mut edge_endpoints = Vec::with_capacity(doc.edges.len());
    for (l, r) in &doc.edges {
        let li = left_index.get(l);
        let ri = right_index.get(r);
        if li.is_none() {
            violations.push(Violation::DanglingEndpoint {
                left: l.clone(),
                right: r.clone(),
                side: "left",
            });
        }
        if ri.is_none() {
            violations.push(Violation::DanglingEndpoint {
                left: l.clone(),
                right: r.clone(),
                side: "right",
            });
        }
        if let (Some(&li), Some(&ri)) = (li, ri) {
            if seen_edges.insert((li, ri), ()).is_some() {
                violations.push(Violation::DuplicateEdge {
                    left: l.clone(),
                    right: r.clone(),
                });
            }
            edge_endpoints.push((li, ri));
        }
    }

    let mut total_supply: i64 = 0;
    for node in &doc.left {
        match total_supply.checked_add(node.supply.max(0)) {
            Some(t) => total_supply = t,
            None => {
                violations.push(Violation::SupplyOverflow);
                break;
            }
        }
    }
    let mut total_capacity: i64 = 0;
    for node in &doc.right {
        match total_capacity.checked_add(node.capacity.max(0)) {
            Some(t) => total_capacity = t,
            None => {
                violations.push(Violation::CapacityOverflow);
                break;
            }
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    let mut adj_left = vec![Vec::new(); doc.left.len()];
    let mut adj_right = vec![Vec::new(); doc.right.len()];
    for (e, &(li, ri)) in edge_endpoints.iter().enumerate() {
        adj_left[li].push(e);
        adj_right[ri].push(e);
    }

    Ok(Instance {
        left: doc.left,
        right: doc.right,
        edges: doc.edges,
        edge_endpoints,
        adj_left,
        adj_right,
        left_index,
        right_index,
        total_supply,
        total_capacity,
    })
}

impl Instance {
    /// Build and validate an instance from its parts.
    pub fn from_parts(
        left: Vec<LeftNode>,
        right: Vec<RightNode>,
        edges: Vec<(String, String)>,
    ) -> Result<Self, ValidationError> {
        validate(InstanceDoc { left, right, edges })
    }

    pub fn left(&self) -> &[LeftNode] {
        &self.left
    }

    pub fn right(&self) -> &[RightNode] {
        &self.right
    }

    /// Edges as (left-id, right-id) pairs in document order.
    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    /// Edge endpoints as (left index, right index), parallel to [`edges`](Self::edges).
    pub fn edge_endpoints(&self) -> &[(usize, usize)] {
        &self.edge_endpoints
    }

    pub fn n_left(&self) -> usize {
        self.left.len()
    }

    pub fn n_right(&self) -> usize {
        self.right.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn supply(&self, i: usize) -> i64 {
        self.left[i].supply
    }

    pub fn capacity(&self, j: usize) -> i64 {
        self.right[j].capacity
    }

    pub fn total_supply(&self) -> i64 {
        self.total_supply
    }

    pub fn total_capacity(&self) -> i64 {
        self.total_capacity
    }

    /// Edge indices incident to left node `i`, in document order.
    pub fn edges_of_left(&self, i: usize) -> &[usize] {
        &self.adj_left[i]
    }

    /// Edge indices incident to right node `j`, in document order.
    pub fn edges_of_right(&self, j: usize) -> &[usize] {
        &self.adj_right[j]
    }

    pub fn left_index_of(&self, id: &str) -> Option<usize> {
        self.left_index.get(id).copied()
    }

    pub fn right_index_of(&self, id: &str) -> Option<usize> {
        self.right_index.get(id).copied()
    }

    /// Index of the edge (left-id, right-id), if present.
    pub fn edge_index_of(&self, left: &str, right: &str) -> Option<usize> {
        let li = self.left_index_of(left)?;
        let ri = self.right_index_of(right)?;
        self.adj_left[li]
            .iter()
            .copied()
            .find(|&e| self.edge_endpoints[e].1 == ri)
    }

    /// Serialize to the canonical JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }
}

/// Parse an instance from its JSON document, validating all invariants.
pub fn parse(text: &str) -> Result<Instance, serde_json::Error> {
    serde_json::from_str(text)
}

fn unit_left(ids: impl IntoIterator<Item = String>) -> Vec<LeftNode> {
    ids.into_iter().map(|id| LeftNode { id, supply: 1 }).collect()
}

fn unit_right(ids: impl IntoIterator<Item = String>) -> Vec<RightNode> {
    ids.into_iter()
        .map(|id| RightNode { id, capacity: 1 })
        .collect()
}

/// The path on 3 edges with unit supplies and capacities:
/// i1 - j1, i1 - j2, i2 - j2.
///
/// Smallest instance with a perfect matching that no proportional
/// allocation can fully serve.
pub fn gen_path3() -> Instance {
    Instance::from_parts(
        unit_left(["i1".into(), "i2".into()]),
        unit_right(["j1".into(), "j2".into()]),
        vec![
            ("i1".into(), "j1".into()),
            ("i1".into(), "j2".into()),
            ("i2".into(), "j2".into()),
        ],
    )
    .expect("generator output is valid")
}

/// Complete bipartite graph K_{n,n} with unit supplies and capacities.
pub fn gen_complete(n: usize) -> Result<Instance, ValidationError> {
    if n == 0 {
        return Err(ValidationError::parameter("n must be at least 1"));
    }
    let mut edges = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            edges.push((format!("i{i}"), format!("j{j}")));
        }
    }
    Instance::from_parts(
        unit_left((1..=n).map(|i| format!("i{i}"))),
        unit_right((1..=n).map(|j| format!("j{j}"))),
        edges,
    )
}

/// Even cycle i1 - j1 - i2 - j2 - ... - in - jn - i1 with unit supplies and
/// capacities. Every node has degree 2 and there are exactly 2n edges.
pub fn gen_even_cycle(n: usize) -> Result<Instance, ValidationError> {
    if n < 2 {
        return Err(ValidationError::parameter("n must be at least 2"));
    }
    // Left node i_k neighbors j_k and j_{k-1} (wrapping); emit edges sorted
    // by (left index, right index) so gen_even_cycle(2) == gen_complete(2).
    let mut edges = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let prev = if i == 1 { n } else { i - 1 };
        let (a, b) = if prev < i { (prev, i) } else { (i, prev) };
        edges.push((format!("i{i}"), format!("j{a}")));
        edges.push((format!("i{i}"), format!("j{b}")));
    }
    Instance::from_parts(
        unit_left((1..=n).map(|i| format!("i{i}"))),
        unit_right((1..=n).map(|j| format!("j{j}"))),
        edges,
    )
}

/// Connected matching-covered unit instance: an even 2n-cycle plus
/// `extra_edges` random chords, redrawn until the matching-covered check
/// accepts. Deterministic for a fixed `(n, extra_edges, seed)`.
///
/// The chord count is capped at the number of available non-cycle slots
/// (n^2 - 2n); the cycle alone already satisfies the predicate.
pub fn gen_random_mc(n: usize, extra_edges: usize, seed: u64) -> Result<Instance, ValidationError> {
    let cycle = gen_even_cycle(n)?;
    let cycle_pairs: Vec<(usize, usize)> = cycle.edge_endpoints().to_vec();
    let mut chords: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !cycle_pairs.contains(&(i, j)) {
                chords.push((i, j));
            }
        }
    }
    let k = extra_edges.min(chords.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut picked: Vec<(usize, usize)> = chords
            .choose_multiple(&mut rng, k)
            .copied()
            .collect();
        let mut pairs = cycle_pairs.clone();
        pairs.append(&mut picked);
        pairs.sort_unstable();
        let edges = pairs
            .iter()
            .map(|&(i, j)| (format!("i{}", i + 1), format!("j{}", j + 1)))
            .collect();
        let candidate = Instance::from_parts(
            unit_left((1..=n).map(|i| format!("i{i}"))),
            unit_right((1..=n).map(|j| format!("j{j}"))),
            edges,
        )?;
        let verdict = structure::is_matching_covered(&candidate)
            .expect("cycle plus chords always has a perfect matching");
        if verdict.covered {
            return Ok(candidate);
        }
    }
}
