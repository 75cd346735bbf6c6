//! Path-based model selection against held-out counts.
//!
//! In `lambda = 1/nu` the primal is piecewise analytic along the path:
//! `p_j = q_j ± lambda` on the capped sets and `p_j = u_j (Q - M·lambda)/U`
//! on the interior. The validation negative log-likelihood is piecewise
//! convex in `lambda`, so each segment is minimized by bisecting its
//! monotone derivative, and the per-support winners are culled into a short
//! admissible table.

use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, SignVector};
use crate::path::{RelaxationPath, SegmentSums};

/// Held-out counts, one per coordinate.
#[derive(Debug, Clone)]
pub struct ValidationCounts {
    r: Vec<f64>,
}

impl ValidationCounts {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some(index) = r.iter().position(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::NegativeObserved { index, value: r[index] });
        }
        if r.is_empty() || r.iter().sum::<f64>() <= 0.0 {
            return Err(Error::EmptyValidationCounts);
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }
}

/// One path segment mapped to the `lambda` axis and intersected with the
/// search window.
#[derive(Debug, Clone)]
pub struct LambdaSegment {
    pub sums: SegmentSums,
    pub signs: SignVector,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// True when the true lower end (`lambda -> 0`) was cut off at the
    /// configured minimum, so a minimizer at `lambda_lo` is an open infimum.
    pub clamped_lo: bool,
}

/// Minimizer of the validation loss on one segment.
#[derive(Debug, Clone, Copy)]
pub struct SegmentMin {
    pub lambda_star: f64,
    pub loss_star: f64,
    pub open_infimum: bool,
}

/// One row of the admissible-model table.
#[derive(Debug, Clone, Copy)]
pub struct ModelOption {
    pub support: usize,
    pub nu_star: f64,
    pub loss_star: f64,
    pub open_infimum: bool,
}

/// Primal value of coordinate `j` at `lambda` on a segment with the given
/// partition and sums.
fn primal_at(
    inst: &ProblemInstance,
    signs: &SignVector,
    sums: &SegmentSums,
    lambda: f64,
    j: usize,
) -> f64 {
    match signs[j] {
        1 => inst.q()[j] + lambda,
        -1 => inst.q()[j] - lambda,
        _ => {
            inst.u()[j] * (sums.observed_mass - sums.signed_mass * lambda) / sums.prior_mass
        }
    }
}

fn loss_at(
    inst: &ProblemInstance,
    signs: &SignVector,
    sums: &SegmentSums,
    r: &ValidationCounts,
    lambda: f64,
) -> Result<f64> {
    let mut loss = 0.0;
    for (j, &rj) in r.r().iter().enumerate() {
        if rj == 0.0 {
            continue;
        }
        let pj = primal_at(inst, signs, sums, lambda, j);
        if pj <= 0.0 {
            return Err(Error::ZeroProbability { index: j });
        }
        loss -= rj * pj.ln();
    }
    Ok(loss)
}

/// Analytic derivative of the loss in `lambda` on a segment.
fn deriv_at(
    inst: &ProblemInstance,
    signs: &SignVector,
    sums: &SegmentSums,
    r: &ValidationCounts,
    lambda: f64,
) -> f64 {
    let mut d = 0.0;
    let mut interior_counts = 0.0;
    for (j, &rj) in r.r().iter().enumerate() {
        if rj == 0.0 {
            continue;
        }
        match signs[j] {
            1 => d -= rj / (inst.q()[j] + lambda),
            -1 => d += rj / (inst.q()[j] - lambda),
            _ => interior_counts += rj,
        }
    }
    if interior_counts > 0.0 {
        d += sums.signed_mass / (sums.observed_mass - sums.signed_mass * lambda)
            * interior_counts;
    }
    d
}

/// Validation negative log-likelihood of the path model at `lambda`.
pub fn validation_loss(
    inst: &ProblemInstance,
    path: &RelaxationPath,
    r: &ValidationCounts,
    lambda: f64,
) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidNu(lambda));
    }
    let nu = 1.0 / lambda;
    let (_, signs, _) = path.eval(nu);
    let idx = path.segment_index(nu);
    let sums = path.segments()[idx];
    loss_at(inst, &signs, &sums, r, lambda)
}

/// Splits the path into `lambda` intervals intersected with
/// `(lambda_min, 1]`, smallest support first.
pub fn lambda_segments(path: &RelaxationPath, lambda_min: f64) -> Vec<LambdaSegment> {
    let bps = path.breakpoints();
    let kappa = bps.len();
    let mut out = Vec::new();
    for i in 0..=kappa {
        let lo_raw = if i == kappa { 0.0 } else { 1.0 / bps[i].nu };
        let hi_raw = if i == 0 { f64::INFINITY } else { 1.0 / bps[i - 1].nu };
        let lo = lo_raw.max(lambda_min);
        let hi = hi_raw.min(1.0);
        if lo >= hi {
            continue;
        }
        out.push(LambdaSegment {
            sums: path.segments()[i],
            signs: path.signs_at_segment(i),
            lambda_lo: lo,
            lambda_hi: hi,
            clamped_lo: lo_raw < lambda_min,
        });
    }
    out
}

/// Minimizes the (convex) validation loss on one segment by bisecting the
/// monotone derivative, clamping to the endpoints when it does not change
/// sign.
pub fn segment_minimize(
    inst: &ProblemInstance,
    segment: &LambdaSegment,
    r: &ValidationCounts,
) -> Result<SegmentMin> {
    // Keep the capped-below coordinates strictly positive.
    let min_q_minus = (0..inst.n())
        .filter(|&j| segment.signs[j] == -1)
        .map(|j| inst.q()[j])
        .fold(f64::INFINITY, f64::min);
    let mut lo = segment.lambda_lo;
    let mut hi = segment.lambda_hi.min(min_q_minus * (1.0 - 1e-12)).max(lo);
    let d_lo = deriv_at(inst, &segment.signs, &segment.sums, r, lo);
    let d_hi = deriv_at(inst, &segment.signs, &segment.sums, r, hi);
    let lambda_star = if d_lo >= 0.0 {
        lo
    } else if d_hi <= 0.0 {
        hi
    } else {
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if deriv_at(inst, &segment.signs, &segment.sums, r, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let loss_star = loss_at(inst, &segment.signs, &segment.sums, r, lambda_star)?;
    // When the segment really extends to lambda -> 0 but was cut at the
    // configured minimum, a positive derivative at the cut means the true
    // infimum is approached (never attained) as lambda -> 0.
    let open_infimum = segment.clamped_lo && lambda_star <= segment.lambda_lo && d_lo > 0.0;
    Ok(SegmentMin { lambda_star, loss_star, open_infimum })
}

/// Builds the culled admissible-model table. Row 0 is the unconstrained
/// model `p = u` (support 0) anchored at `nu* = min(1, nu_1)`; subsequent
/// rows keep, per support size, the best segment minimizer, retained only
/// while the loss strictly improves, so the last row is the global
/// minimizer.
pub fn select_models(
    inst: &ProblemInstance,
    path: &RelaxationPath,
    r: &ValidationCounts,
    lambda_min: f64,
) -> Result<Vec<ModelOption>> {
    let loss0 = {
        let mut loss = 0.0;
        for (j, &rj) in r.r().iter().enumerate() {
            if rj > 0.0 {
                loss -= rj * inst.u()[j].ln();
            }
        }
        loss
    };
    let nu0 = path.breakpoints().first().map_or(1.0, |bp| bp.nu.min(1.0));
    let row0 = ModelOption { support: 0, nu_star: nu0, loss_star: loss0, open_infimum: false };

    // Best option per support size over all segments.
    let mut best: Vec<Option<(SegmentMin, usize)>> = vec![None; inst.n() + 1];
    for segment in lambda_segments(path, lambda_min) {
        let support = segment.signs.support();
        if support == 0 {
            continue; // covered by row 0
        }
        let min = segment_minimize(inst, &segment, r)?;
        let slot = &mut best[support];
        if slot.as_ref().map_or(true, |(old, _)| min.loss_star < old.loss_star) {
            *slot = Some((min, support));
        }
    }

    // Keep rows whose loss strictly improves on everything kept so far (the
    // last row is then the global minimizer). A better row at a smaller
    // nu_star supersedes earlier rows rather than being discarded, so the
    // table stays strictly increasing in nu_star and decreasing in loss.
    let mut rows = vec![row0];
    for entry in best.into_iter().flatten() {
        let (min, support) = entry;
        if min.loss_star >= rows.last().expect("row 0 present").loss_star {
            continue;
        }
        let nu_star = 1.0 / min.lambda_star;
        while rows.len() > 1 && rows.last().expect("nonempty").nu_star >= nu_star {
            rows.pop();
        }
        if nu_star > rows.last().expect("row 0 present").nu_star {
            rows.push(ModelOption {
                support,
                nu_star,
                loss_star: min.loss_star,
                open_infimum: min.open_infimum,
            });
        }
    }
    Ok(rows)
}
