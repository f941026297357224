//! Two-capacity-constraint instances: items carry weight and volume, bins
//! carry a capacity for each, and proportional splitting is measured by how
//! badly it overloads the tightest constraint.
//!
//! The power-of-two family on the complete bipartite graph is the stress
//! case: the diagonal assignment fits exactly, yet every choice of weights
//! forces a violation factor of at least 2^(n/2 - 1) / n somewhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scaling::WeightVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCapItem {
    pub id: String,
    /// Weight the item contributes when stored.
    pub c: f64,
    /// Volume the item takes up.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCapBin {
    pub id: String,
    /// Weight capacity.
    #[serde(rename = "C")]
    pub weight_cap: f64,
    /// Volume capacity.
    #[serde(rename = "V")]
    pub volume_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoCapError {
    #[error("invalid two-capacity instance: {0}")]
    Invalid(String),
    #[error("n must be an even integer in [2, 60], got {0}")]
    BadSize(usize),
    #[error("instance is not square and complete")]
    NotSquareComplete,
    #[error("item {id:?} has no neighbors to allocate to")]
    IsolatedItem { id: String },
    #[error("weights length {got} does not match bin count {expected}")]
    WeightLengthMismatch { got: usize, expected: usize },
}

/// Validated two-capacity instance. Node and edge order is preserved from
/// the source document.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "TwoCapDoc")]
pub struct TwoCapInstance {
    items: Vec<TwoCapItem>,
    bins: Vec<TwoCapBin>,
    edges: Vec<(String, String)>,
    edge_endpoints: Vec<(usize, usize)>,
    adj_items: Vec<Vec<usize>>,
    adj_bins: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCapDoc {
    pub items: Vec<TwoCapItem>,
    pub bins: Vec<TwoCapBin>,
    pub edges: Vec<(String, String)>,
}

impl From<TwoCapInstance> for TwoCapDoc {
    fn from(inst: TwoCapInstance) -> Self {
        TwoCapDoc {
            items: inst.items,
            bins: inst.bins,
            edges: inst.edges,
        }
    }
}

impl TryFrom<TwoCapDoc> for TwoCapInstance {
    type Error = TwoCapError;

    fn try_from(doc: TwoCapDoc) -> Result<Self, Self::Error> {
        TwoCapInstance::validate(doc)
    }
}

impl<'de> Deserialize<'de> for TwoCapInstance {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let doc = TwoCapDoc::deserialize(deserializer)?;
        TwoCapInstance::validate(doc).map_err(serde::de::Error::custom)
    }
}

impl TwoCapInstance {
    pub fn validate(doc: TwoCapDoc) -> Result<Self, TwoCapError> {
        let mut problems = Vec::new();
        let mut item_index = std::collections::HashMap::new();
        for (i, item) in doc.items.iter().enumerate() {
            if !(item.c.is_finite() && item.c > 0.0) || !(item.v.is_finite() && item.v > 0.0) {
                problems.push(format!("non-positive quantity on item {:?}", item.id));
            }
            if item_index.insert(item.id.clone(), i).is_some() {
                problems.push(format!("duplicate item id {:?}", item.id));
            }
        }
        let mut bin_index = std::collections::HashMap::new();
        for (j, bin) in doc.bins.iter().enumerate() {
            if !(bin.weight_cap.is_finite() && bin.weight_cap > 0.0)
                || !(bin.volume_cap.is_finite() && bin.volume_cap > 0.0)
            {
                problems.push(format!("non-positive capacity on bin {:?}", bin.id));
            }
            if bin_index.insert(bin.id.clone(), j).is_some() {
                problems.push(format!("duplicate bin id {:?}", bin.id));
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut edge_endpoints = Vec::with_capacity(doc.edges.len());
        for (a, b) in &doc.edges {
            match (item_index.get(a), bin_index.get(b)) {
                (Some(&i), Some(&j)) => {
                    if !seen.insert((i, j)) {
                        problems.push(format!("duplicate edge ({a:?}, {b:?})"));
                    }
                    edge_endpoints.push((i, j));
                }
                _ => problems.push(format!("dangling endpoint on edge ({a:?}, {b:?})")),
            }
        }
        if !problems.is_empty() {
            return Err(TwoCapError::Invalid(problems.join("; ")));
        }
        let mut adj_items = vec![Vec::new(); doc.items.len()];
        let mut adj_bins = vec![Vec::new(); doc.bins.len()];
        for (e, &(i, j)) in edge_endpoints.iter().enumerate() {
            adj_items[i].push(e);
            adj_bins[j].push(e);
        }
        Ok(TwoCapInstance {
            items: doc.items,
            bins: doc.bins,
            edges: doc.edges,
            edge_endpoints,
            adj_items,
            adj_bins,
        })
    }

    pub fn items(&self) -> &[TwoCapItem] {
        &self.items
    }

    pub fn bins(&self) -> &[TwoCapBin] {
        &self.bins
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("two-cap serialization cannot fail")
    }

    fn is_square_complete(&self) -> bool {
        let n = self.items.len();
        self.bins.len() == n && self.edge_endpoints.len() == n * n && {
            let mut present = vec![false; n * n];
            for &(i, j) in &self.edge_endpoints {
                present[i * n + j] = true;
            }
            present.into_iter().all(|p| p)
        }
    }
}

/// Parse a two-capacity instance from JSON, validating all invariants.
pub fn parse(text: &str) -> Result<TwoCapInstance, serde_json::Error> {
    serde_json::from_str(text)
}

/// The power-of-two instance on K_{n,n}: item k has weight 2^(k-1) and
/// volume 2^(n-k); bin k has the same pair as capacities. Requires even n
/// in [2, 60] so every power is exact in double precision.
pub fn gen_powers(n: usize) -> Result<TwoCapInstance, TwoCapError> {
    if n < 2 || n > 60 || n % 2 != 0 {
        return Err(TwoCapError::BadSize(n));
    }
    let items = (1..=n)
        .map(|k| TwoCapItem {
            id: format!("i{k}"),
            c: (2.0f64).powi(k as i32 - 1),
            v: (2.0f64).powi((n - k) as i32),
        })
        .collect();
    let bins = (1..=n)
        .map(|k| TwoCapBin {
            id: format!("j{k}"),
            weight_cap: (2.0f64).powi(k as i32 - 1),
            volume_cap: (2.0f64).powi((n - k) as i32),
        })
        .collect();
    let mut edges = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            edges.push((format!("i{i}"), format!("j{j}")));
        }
    }
    TwoCapInstance::validate(TwoCapDoc { items, bins, edges })
        .map_err(|e| unreachable!("generator output is valid: {e}"))
}

/// True iff assigning item k wholly to bin k satisfies both constraints for
/// every k. The instance must be square and complete.
pub fn diagonal_feasible(inst: &TwoCapInstance) -> Result<bool, TwoCapError> {
    if !inst.is_square_complete() {
        return Err(TwoCapError::NotSquareComplete);
    }
    Ok(inst
        .items
        .iter()
        .zip(&inst.bins)
        .all(|(item, bin)| item.c <= bin.weight_cap && item.v <= bin.volume_cap))
}

/// Proportional split of every item's weight and volume across its
/// neighboring bins; returns (weight-alloc, volume-alloc) per bin.
pub fn proportional_twocap(
    inst: &TwoCapInstance,
    weights: &WeightVector,
) -> Result<(Vec<f64>, Vec<f64>), TwoCapError> {
    if weights.len() != inst.n_bins() {
        return Err(TwoCapError::WeightLengthMismatch {
            got: weights.len(),
            expected: inst.n_bins(),
        });
    }
    let alpha = weights.values();
    let mut weight_alloc = vec![0.0; inst.n_bins()];
    let mut volume_alloc = vec![0.0; inst.n_bins()];
    for (i, item) in inst.items.iter().enumerate() {
        let incident = &inst.adj_items[i];
        if incident.is_empty() {
            return Err(TwoCapError::IsolatedItem {
                id: item.id.clone(),
            });
        }
        let denom: f64 = incident
            .iter()
            .map(|&e| alpha[inst.edge_endpoints[e].1])
            .sum();
        for &e in incident {
            let j = inst.edge_endpoints[e].1;
            let share = alpha[j] / denom;
            weight_alloc[j] += item.c * share;
            volume_alloc[j] += item.v * share;
        }
    }
    Ok((weight_alloc, volume_alloc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Weight,
    Volume,
}

/// Worst load-to-capacity ratio over all bins and both constraint kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub factor: f64,
    pub argmax_bin: String,
    pub argmax_kind: ConstraintKind,
}

/// Measure the proportional allocation against both capacities of every
/// bin. Ties are broken by bin document order, weight before volume.
pub fn violation_factor(
    inst: &TwoCapInstance,
    weights: &WeightVector,
) -> Result<ViolationReport, TwoCapError> {
    let (weight_alloc, volume_alloc) = proportional_twocap(inst, weights)?;
    let mut factor = -1.0;
    let mut argmax_bin = String::new();
    let mut argmax_kind = ConstraintKind::Weight;
    for (j, bin) in inst.bins.iter().enumerate() {
        for (kind, ratio) in [
            (ConstraintKind::Weight, weight_alloc[j] / bin.weight_cap),
            (ConstraintKind::Volume, volume_alloc[j] / bin.volume_cap),
        ] {
            if ratio > factor {
                factor = ratio;
                argmax_bin = bin.id.clone();
                argmax_kind = kind;
            }
        }
    }
    Ok(ViolationReport {
        factor: factor.max(0.0),
        argmax_bin,
        argmax_kind,
    })
}

/// The guaranteed violation factor 2^(n/2 - 1) / n for the power-of-two
/// instance; defined for even n >= 2.
pub fn lower_bound(n: usize) -> Result<f64, TwoCapError> {
    if n < 2 || n % 2 != 0 {
        return Err(TwoCapError::BadSize(n));
    }
    Ok((2.0f64).powi(n as i32 / 2 - 1) / n as f64)
}

/// Seeded batch of random weight vectors with log-uniform entries in
/// [1e-6, 1e6], one per sample.
pub fn seeded_weight_vectors(n_bins: usize, samples: u64, seed: u64) -> Vec<WeightVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let alpha: Vec<f64> = (0..n_bins)
                .map(|_| 10f64.powf(rng.gen_range(-6.0..6.0)))
                .collect();
            WeightVector::new(alpha).expect("positive by construction")
        })
        .collect()
}
