//! Proportional and rank-based allocators, allocation value, and the
//! end-to-end perfect strategy pipeline.

use thiserror::Error;

use crate::instance::Instance;
use crate::scaling::{self, ScalingError, WeightVector};
use crate::structure::{self, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("left node {id:?} has no neighbors to allocate to")]
    IsolatedLeftNode { id: String },
    #[error("unknown right id {id:?}")]
    UnknownRightId { id: String },
    #[error("weights length {got} does not match right side {expected}")]
    WeightLengthMismatch { got: usize, expected: usize },
    #[error("ranks length {got} does not match right side {expected}")]
    RankLengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("per-part scaling failed: {0} (internal invariant)")]
    PartScaling(ScalingError),
}

/// Sparse fractional assignment: one amount per instance edge, in document
/// order. Entries are units of supply.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x: Vec<f64>,
}

/// Per-right-node rank and weight driving the rank-based allocator. Ranks
/// are 1-based part indices; weights are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedStrategy {
    pub ranks: Vec<usize>,
    pub weights: WeightVector,
}

fn check_weights(inst: &Instance, weights: &WeightVector) -> Result<(), AllocationError> {
    if weights.len() != inst.n_right() {
        return Err(AllocationError::WeightLengthMismatch {
            got: weights.len(),
            expected: inst.n_right(),
        });
    }
    Ok(())
}

/// Proportional allocation: each left node splits its supply among its
/// neighbors in proportion to their weights,
/// x_ij = S_i * alpha_j / sum of alpha over i's neighbors.
pub fn proportional(inst: &Instance, weights: &WeightVector) -> Result<Allocation, AllocationError> {
    check_weights(inst, weights)?;
    let alpha = weights.values();
    let mut x = vec![0.0; inst.n_edges()];
    for i in 0..inst.n_left() {
        let incident = inst.edges_of_left(i);
        if incident.is_empty() {
            return Err(AllocationError::IsolatedLeftNode {
                id: inst.left()[i].id.clone(),
            });
        }
        let denom: f64 = incident
            .iter()
            .map(|&e| alpha[inst.edge_endpoints()[e].1])
            .sum();
        for &e in incident {
            x[e] = inst.supply(i) as f64 * alpha[inst.edge_endpoints()[e].1] / denom;
        }
    }
    Ok(Allocation { x })
}

/// Total amount allocated to right node `id`: the sum over incident edges.
pub fn alloc_of(inst: &Instance, allocation: &Allocation, id: &str) -> Result<f64, AllocationError> {
    let j = inst
        .right_index_of(id)
        .ok_or_else(|| AllocationError::UnknownRightId { id: id.to_string() })?;
    Ok(inst
        .edges_of_right(j)
        .iter()
        .map(|&e| allocation.x[e])
        .sum())
}

/// Allocation value: the sum over right nodes of the allocated amount
/// capped at capacity.
pub fn value(inst: &Instance, allocation: &Allocation) -> f64 {
    (0..inst.n_right())
        .map(|j| {
            let alloc: f64 = inst
                .edges_of_right(j)
                .iter()
                .map(|&e| allocation.x[e])
                .sum();
            alloc.min(inst.capacity(j) as f64)
        })
        .sum()
}

/// Rank-based allocation: each left node allocates proportionally among its
/// neighbors of highest rank only; ties keep all maximizers.
pub fn ranked(inst: &Instance, strategy: &RankedStrategy) -> Result<Allocation, AllocationError> {
    check_weights(inst, &strategy.weights)?;
    if strategy.ranks.len() != inst.n_right() {
        return Err(AllocationError::RankLengthMismatch {
            got: strategy.ranks.len(),
            expected: inst.n_right(),
        });
    }
    let alpha = strategy.weights.values();
    let mut x = vec![0.0; inst.n_edges()];
    for i in 0..inst.n_left() {
        let incident = inst.edges_of_left(i);
        if incident.is_empty() {
            return Err(AllocationError::IsolatedLeftNode {
                id: inst.left()[i].id.clone(),
            });
        }
        let top_rank = incident
            .iter()
            .map(|&e| strategy.ranks[inst.edge_endpoints()[e].1])
            .max()
            .expect("nonempty neighborhood");
        let denom: f64 = incident
            .iter()
            .filter(|&&e| strategy.ranks[inst.edge_endpoints()[e].1] == top_rank)
            .map(|&e| alpha[inst.edge_endpoints()[e].1])
            .sum();
        for &e in incident {
            let j = inst.edge_endpoints()[e].1;
            if strategy.ranks[j] == top_rank {
                x[e] = inst.supply(i) as f64 * alpha[j] / denom;
            }
        }
    }
    Ok(Allocation { x })
}

/// Build the perfect strategy for a connected instance with a perfect
/// matching: decompose, rank each right node by its part index, and give it
/// the scaling weight of its part's induced sub-instance. The resulting
/// ranked allocation fills every capacity exactly.
pub fn perfect_strategy(inst: &Instance) -> Result<RankedStrategy, AllocationError> {
    let dm = structure::dm_decomposition(inst)?;
    let ranks = dm.rank_of_right(inst);
    let mut alpha = vec![0.0; inst.n_right()];
    for k in 0..dm.parts.len() {
        let sub = dm.induced_instance(inst, k);
        let scaled = scaling::sinkhorn(
            &sub,
            scaling::DEFAULT_TOLERANCE,
            scaling::DEFAULT_MAX_ITERATIONS,
        )
        .map_err(AllocationError::PartScaling)?;
        let weights =
            scaling::weights_from_scaling(&scaled).map_err(AllocationError::PartScaling)?;
        for (local_j, id) in dm.parts[k].right.iter().enumerate() {
            let j = inst.right_index_of(id).expect("part id from instance");
            debug_assert_eq!(sub.right()[local_j].id, *id);
            alpha[j] = weights.values()[local_j];
        }
    }
    let weights = WeightVector::new(alpha).expect("per-part weights are positive");
    Ok(RankedStrategy { ranks, weights })
}
