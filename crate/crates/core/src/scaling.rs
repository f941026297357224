//! Iterative (S, C)-scaling of the 0/1 incidence matrix and weight
//! extraction.
//!
//! Alternating normalization: the row step sets x_i = S_i / sum of y over
//! i's neighbors (row sums become exact), then the residual is the largest
//! column-sum error divided by n = total supply. On inputs admitting an
//! exact scaling the iteration converges; on inputs that do not, the scaling
//! vectors blow up, which the ratio guard reports as divergence.

use thiserror::Error;

use crate::flow;
use crate::instance::Instance;
use crate::structure;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;
/// Declare divergence when max/min of a scaling vector exceeds this.
pub const DIVERGENCE_RATIO: f64 = 1e15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalingError {
    #[error("no perfect matching")]
    NoPerfectMatching,
    #[error("instance is not connected")]
    Disconnected,
    #[error("tolerance must be positive and finite")]
    BadTolerance,
    #[error("max_iterations must be at least 1")]
    BadIterationCap,
    #[error("scaling did not converge (status {0:?})")]
    NotConverged(ScalingStatus),
    #[error("weights must be strictly positive and finite")]
    BadWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingStatus {
    Converged,
    Diverged,
    IterationCap,
}

/// Scaling vectors with convergence diagnostics. `x` is indexed by left
/// node, `y` by right node, both in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Largest row/column sum error at the last measurement, divided by n.
    pub residual: f64,
    pub iterations: u64,
    pub status: ScalingStatus,
}

/// Positive weights per right node, normalized so the minimum entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    alpha: Vec<f64>,
}

impl WeightVector {
    /// Wrap raw weights; entries must be strictly positive and finite.
    pub fn new(alpha: Vec<f64>) -> Result<Self, ScalingError> {
        if alpha.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
            return Err(ScalingError::BadWeights);
        }
        Ok(WeightVector { alpha })
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector {
            alpha: vec![1.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

fn ratio_blown(v: &[f64]) -> bool {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for &e in v {
        min = min.min(e);
        max = max.max(e);
    }
    !(min > 0.0) || !max.is_finite() || max / min > DIVERGENCE_RATIO
}

/// Alternating row/column rescaling of the incidence matrix toward row sums
/// S and column sums C, starting from x = y = 1.
///
/// On return the row step has just run, so x_i = S_i / sum of y over i's
/// neighbors holds exactly and the residual is the column-sum error alone.
pub fn sinkhorn(
    inst: &Instance,
    tolerance: f64,
    max_iterations: u64,
) -> Result<ScalingResult, ScalingError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(ScalingError::BadTolerance);
    }
    if max_iterations == 0 {
        return Err(ScalingError::BadIterationCap);
    }
    if !structure::is_connected(inst) {
        return Err(ScalingError::Disconnected);
    }
    if !flow::has_perfect_matching(inst) {
        return Err(ScalingError::NoPerfectMatching);
    }

    let nl = inst.n_left();
    let nr = inst.n_right();
    let n = inst.total_supply() as f64;
    let mut x = vec![1.0f64; nl];
    let mut y = vec![1.0f64; nr];
    let mut residual = f64::INFINITY;

    for it in 1..=max_iterations {
        // Row step: make every row sum exactly S_i.
        for i in 0..nl {
            let denom: f64 = inst
                .edges_of_left(i)
                .iter()
                .map(|&e| y[inst.edge_endpoints()[e].1])
                .sum();
            x[i] = inst.supply(i) as f64 / denom;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(ScalingResult {
                x: vec![1.0; nl],
                y,
                residual,
                iterations: it,
                status: ScalingStatus::Diverged,
            });
        }

        let mut err = 0.0f64;
        for j in 0..nr {
            let sum: f64 = inst
                .edges_of_right(j)
                .iter()
                .map(|&e| x[inst.edge_endpoints()[e].0] * y[j])
                .sum();
            err = err.max((sum - inst.capacity(j) as f64).abs());
        }
        residual = err / n;
        if residual <= tolerance {
            return Ok(ScalingResult {
                x,
                y,
                residual,
                iterations: it,
                status: ScalingStatus::Converged,
            });
        }

        // Column step: make every column sum exactly C_j.
        let prev_y = y.clone();
        for j in 0..nr {
            let denom: f64 = inst
                .edges_of_right(j)
                .iter()
                .map(|&e| x[inst.edge_endpoints()[e].0])
                .sum();
            y[j] = inst.capacity(j) as f64 / denom;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(ScalingResult {
                x,
                y: prev_y,
                residual,
                iterations: it,
                status: ScalingStatus::Diverged,
            });
        }
        if ratio_blown(&x) || ratio_blown(&y) {
            return Ok(ScalingResult {
                x,
                y,
                residual,
                iterations: it,
                status: ScalingStatus::Diverged,
            });
        }
    }

    Ok(ScalingResult {
        x,
        y,
        residual,
        iterations: max_iterations,
        status: ScalingStatus::IterationCap,
    })
}

/// Extract allocation weights from a converged scaling: alpha = y, rescaled
/// so the minimum entry equals 1.
pub fn weights_from_scaling(result: &ScalingResult) -> Result<WeightVector, ScalingError> {
    if result.status != ScalingStatus::Converged {
        return Err(ScalingError::NotConverged(result.status));
    }
    let min = result
        .y
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    WeightVector::new(result.y.iter().map(|&v| v / min).collect())
}

/// Check both scaled sum identities: every row sum within `tolerance` of
/// S_i and every column sum within `tolerance` of C_j.
pub fn verify_scaling(inst: &Instance, result: &ScalingResult, tolerance: f64) -> bool {
    if result.x.len() != inst.n_left() || result.y.len() != inst.n_right() {
        return false;
    }
    for i in 0..inst.n_left() {
        let sum: f64 = inst
            .edges_of_left(i)
            .iter()
            .map(|&e| result.x[i] * result.y[inst.edge_endpoints()[e].1])
            .sum();
        if (sum - inst.supply(i) as f64).abs() > tolerance {
            return false;
        }
    }
    for j in 0..inst.n_right() {
        let sum: f64 = inst
            .edges_of_right(j)
            .iter()
            .map(|&e| result.x[inst.edge_endpoints()[e].0] * result.y[j])
            .sum();
        if (sum - inst.capacity(j) as f64).abs() > tolerance {
            return false;
        }
    }
    true
}
