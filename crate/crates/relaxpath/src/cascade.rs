//! Chained relaxed-maxent solves: each stage's solution becomes the next
//! stage's prior, and only the sparse dual tilts and normalizers are kept.
//!
//! Because the dual tilt vanishes on the interior set, a stage is stored as
//! a handful of `(index, alpha)` pairs plus one normalizer, and the final
//! distribution is recovered from the base prior as
//! `p_j = u_j · exp(Σ_k alpha^{(k)}_j) / Π_k Z^{(k)}` without re-solving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, TOL_SIMPLEX};
use crate::solve::PrimalDualPoint;

/// Compact record of one solve in a chain: the nonzero dual tilts, the
/// normalizer, and the relaxation value that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeStage {
    /// Nonzero dual entries as `(coordinate, value)` pairs, ascending by
    /// coordinate.
    pub alpha: Vec<(usize, f64)>,
    /// Stage normalizer `Z = nu/mu`.
    pub z: f64,
    /// Relaxation value the stage was solved at.
    pub nu: f64,
    /// Number of capped coordinates, always `alpha.len()`.
    pub support: usize,
}

/// Solves one stage with the given prior and returns both the stage primal
/// (the next stage's prior) and its compact record.
pub fn cascade_step(
    prior: &[f64],
    q_i: &[f64],
    m: &[f64],
    nu_i: f64,
) -> Result<(Vec<f64>, CascadeStage)> {
    let inst = ProblemInstance::new(prior.to_vec(), q_i.to_vec(), m.to_vec())?;
    let point = PrimalDualPoint::solve(&inst, nu_i, TOL_SIMPLEX)?;
    let alpha: Vec<(usize, f64)> = point
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &aj)| aj != 0.0)
        .map(|(j, &aj)| (j, aj))
        .collect();
    let support = alpha.len();
    let stage = CascadeStage { alpha, z: point.z, nu: nu_i, support };
    Ok((point.p, stage))
}

/// Reconstructs the final distribution of a chain from the base prior and
/// the stored stage records alone.
pub fn cascade_eval(u: &[f64], m: &[f64], stages: &[CascadeStage]) -> Result<Vec<f64>> {
    let mut log_tilt = vec![0.0; u.len()];
    let mut log_norm = 0.0;
    for stage in stages {
        for &(j, aj) in &stage.alpha {
            if j >= u.len() {
                return Err(Error::InvalidPath("cascade stage indexes out of range"));
            }
            log_tilt[j] += aj;
        }
        log_norm += stage.z.ln();
    }
    let p: Vec<f64> = u
        .iter()
        .zip(&log_tilt)
        .map(|(&uj, &tj)| uj * (tj - log_norm).exp())
        .collect();
    let total: f64 = p.iter().zip(m).map(|(&pj, &mj)| mj * pj).sum();
    let residual = total - 1.0;
    if residual.abs() > TOL_SIMPLEX * 10.0 {
        return Err(Error::InconsistentChain(residual));
    }
    Ok(p)
}
