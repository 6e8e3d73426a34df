//! Collaborative GPS-spoofing detection and position reconstruction.
//!
//! Pipeline per suspected UAV: ranging residual -> spoof probability ->
//! anchor selection -> linearized multilateration -> weighted fusion.
//! Ranges are physical line-of-sight measurements and unaffected by GPS
//! spoofing; only reported positions are spoofable.

use crate::Vec3;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PerceptionError {
    #[error("UAV has no line-of-sight neighbors; falling back to own GPS")]
    IsolatedNode,
    #[error("only {have} qualifying anchors (need at least 4)")]
    InsufficientAnchors { have: usize },
    #[error("anchor geometry is degenerate (rank-deficient linear system)")]
    DegenerateGeometry,
}

/// One neighbor observation used for the residual: what the neighbor
/// reported as its position, and the measured LoS range to it.
#[derive(Debug, Clone, Copy)]
pub struct NeighborObs {
    pub reported_pos: Vec3,
    pub measured_range: f64,
}

/// Mean absolute discrepancy between measured inter-UAV distances and the
/// distances implied by reported positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeResidual {
    pub uav: usize,
    /// Residual metric k, meters.
    pub k: f64,
    pub n_neighbors: usize,
}

/// k = (1/N) * sum_j | ||own_pos - reported_j|| - range_j |.
pub fn compute_residual(
    uav: usize,
    own_pos: Vec3,
    neighbors: &[NeighborObs],
) -> Result<EdgeResidual, PerceptionError> {
    if neighbors.is_empty() {
        return Err(PerceptionError::IsolatedNode);
    }
    let sum: f64 = neighbors
        .iter()
        .map(|n| ((own_pos - n.reported_pos).norm() - n.measured_range).abs())
        .sum();
    Ok(EdgeResidual {
        uav,
        k: sum / neighbors.len() as f64,
        n_neighbors: neighbors.len(),
    })
}

/// Logistic map from residual to spoofing probability; prob(kappa0) = 0.5,
/// strictly increasing in k.
pub fn residual_to_probability(k: f64, kappa0: f64, sigma_k: f64) -> f64 {
    debug_assert!(sigma_k > 0.0);
    1.0 / (1.0 + (-(k - kappa0) / sigma_k).exp())
}

/// An anchor candidate offered to `select_anchors`.
#[derive(Debug, Clone, Copy)]
pub struct AnchorCandidate {
    pub id: usize,
    /// Spoof probability of the candidate itself.
    pub prob: f64,
    /// Joint trust score of the candidate.
    pub trust: f64,
    /// Anchor's advertised position.
    pub pos: Vec3,
    /// Measured range from the victim to this anchor.
    pub range: f64,
}

/// Selected anchors with their advertised positions and measured ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchors: Vec<usize>,
    pub positions: Vec<Vec3>,
    pub ranges: Vec<f64>,
}

/// Pick up to `cap` lowest-probability candidates below the probability
/// cutoff and at or above the trust floor, ordered by (prob asc, id asc),
/// and verify the resulting linear system is well conditioned.
pub fn select_anchors(
    candidates: &[AnchorCandidate],
    cutoff: f64,
    trust_floor: f64,
    cap: usize,
    cond_threshold: f64,
) -> Result<AnchorSet, PerceptionError> {
    let mut pool: Vec<&AnchorCandidate> = candidates
        .iter()
        .filter(|c| c.prob < cutoff && c.trust >= trust_floor)
        .collect();
    pool.sort_by(|a, b| a.prob.total_cmp(&b.prob).then(a.id.cmp(&b.id)));
    pool.truncate(cap);
    if pool.len() < 4 {
        return Err(PerceptionError::InsufficientAnchors { have: pool.len() });
    }
    let set = AnchorSet {
        anchors: pool.iter().map(|c| c.id).collect(),
        positions: pool.iter().map(|c| c.pos).collect(),
        ranges: pool.iter().map(|c| c.range).collect(),
    };
    if linearized_condition(&set.positions) > cond_threshold {
        return Err(PerceptionError::DegenerateGeometry);
    }
    Ok(set)
}

/// Condition number of the anchor-difference matrix; infinite for coplanar
/// anchors.
fn linearized_condition(positions: &[Vec3]) -> f64 {
    let a = difference_matrix(positions);
    let svd = a.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-15 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

fn difference_matrix(positions: &[Vec3]) -> DMatrix<f64> {
    let n = positions.len();
    let a0 = positions[0];
    let mut a = DMatrix::zeros(n - 1, 3);
    for j in 1..n {
        let d = 2.0 * (positions[j] - a0);
        a[(j - 1, 0)] = d.x;
        a[(j - 1, 1)] = d.y;
        a[(j - 1, 2)] = d.z;
    }
    a
}

/// Result of the linearized multilateration.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub estimate: Vec3,
    /// RMS range-equation residual at the estimate, meters; the feasibility
    /// diagnostic of the reconstruction.
    pub residual_norm: f64,
    /// Per-anchor absolute range residuals, aligned with the anchor set.
    pub per_anchor: Vec<f64>,
}

/// Subtract the first anchor's range equation from the others to obtain
/// A x = b with rows 2 (a_j - a_1)^T x = |a_j|^2 - |a_1|^2 - r_j^2 + r_1^2,
/// and return the least-squares solution.
pub fn reconstruct_position(anchors: &AnchorSet) -> Result<Reconstruction, PerceptionError> {
    let pos = &anchors.positions;
    let r = &anchors.ranges;
    if pos.len() < 4 {
        return Err(PerceptionError::InsufficientAnchors { have: pos.len() });
    }
    let a = difference_matrix(pos);
    let mut b = DVector::zeros(pos.len() - 1);
    let a0 = pos[0];
    for j in 1..pos.len() {
        b[j - 1] = pos[j].norm_squared() - a0.norm_squared() - r[j] * r[j] + r[0] * r[0];
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-12 {
        return Err(PerceptionError::DegenerateGeometry);
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|_| PerceptionError::DegenerateGeometry)?;
    let estimate = Vec3::new(x[0], x[1], x[2]);
    let per_anchor: Vec<f64> = pos
        .iter()
        .zip(r.iter())
        .map(|(p, &ri)| ((estimate - p).norm() - ri).abs())
        .collect();
    let residual_norm =
        (per_anchor.iter().map(|e| e * e).sum::<f64>() / per_anchor.len() as f64).sqrt();
    Ok(Reconstruction {
        estimate,
        residual_norm,
        per_anchor,
    })
}

/// corrected = (1 - prob) * pos_gps + prob * pos_recon.
pub fn fuse_position(pos_gps: Vec3, pos_recon: Vec3, prob: f64) -> Vec3 {
    debug_assert!((0.0..=1.0).contains(&prob));
    (1.0 - prob) * pos_gps + prob * pos_recon
}
