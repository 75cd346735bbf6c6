//! Pointwise solves of the master equation and primal/dual reconstruction.
//!
//! For the entropy objective the optimality system collapses to a single
//! scalar equation `G(nu, mu) = Σ m_j θ(mu·u_j - nu·q_j) = 0`, nondecreasing
//! in `mu`. Everything here is independent of the path trackers and serves
//! as their cross-check.

use crate::error::{Error, Result};
use crate::instance::{theta, ProblemInstance, SignVector};

/// Iteration cap for the scalar bisection.
pub const BISECT_MAX_ITERS: usize = 200;

/// Evaluates `G(nu, mu) = Σ m_j θ(mu·u_j - nu·q_j)`.
pub fn evaluate_g(inst: &ProblemInstance, nu: f64, mu: f64) -> f64 {
    inst.m()
        .iter()
        .zip(inst.u())
        .zip(inst.q())
        .map(|((&mj, &uj), &qj)| mj * theta(mu * uj - nu * qj))
        .sum()
}

/// Solves `G(nu, ·) = 0` by bisection on `mu` over `[0, max_j (1 + nu q_j)/u_j]`.
///
/// When the zero set is an interval (the interior set is empty) any point of
/// it is returned; the primal is unchanged across the interval. The sign
/// vector is classified from the returned point with tolerance `tol`.
pub fn solve_mu_at(inst: &ProblemInstance, nu: f64, tol: f64) -> Result<(f64, SignVector)> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidNu(nu));
    }
    if !(tol > 0.0) {
        return Err(Error::NoConvergence);
    }
    let mut lo = 0.0_f64;
    let mut hi = inst
        .u()
        .iter()
        .zip(inst.q())
        .map(|(&uj, &qj)| (1.0 + nu * qj) / uj)
        .fold(0.0_f64, f64::max);
    // G(nu, 0) <= 0 and G(nu, hi) = Σ m_j > 0 by construction of hi.
    let mut converged = false;
    for _ in 0..BISECT_MAX_ITERS {
        if hi - lo <= tol * hi.abs().max(1.0) {
            converged = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if evaluate_g(inst, nu, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged && hi - lo > tol * hi.abs().max(1.0) {
        return Err(Error::NoConvergence);
    }
    let mu = 0.5 * (lo + hi);
    let s = SignVector::classify(inst, nu, mu, tol.max(1e-12));
    Ok((mu, s))
}

/// Reconstructs the primal from a point `(nu, mu)` on the path:
/// `p_j = q_j + θ(mu·u_j - nu·q_j)/nu`.
pub fn primal_from(inst: &ProblemInstance, nu: f64, mu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return Err(Error::InvalidNu(nu));
    }
    let residual = evaluate_g(inst, nu, mu);
    let scale: f64 = inst.m().iter().sum();
    if residual.abs() > 1e-7 * scale.max(1.0) {
        return Err(Error::InfeasiblePoint { nu, mu, residual });
    }
    Ok(inst
        .u()
        .iter()
        .zip(inst.q())
        .map(|(&uj, &qj)| qj + theta(mu * uj - nu * qj) / nu)
        .collect())
}

/// Reconstructs the sparse dual tilt: `Z = nu/mu`, `alpha_j = log(p_j Z / u_j)`
/// with `alpha_j = 0` set exactly on the interior set, and the informational
/// multiplier `eta = log(mu/nu) - 1`.
pub fn dual_from(inst: &ProblemInstance, nu: f64, mu: f64) -> Result<(Vec<f64>, f64, f64)> {
    let p = primal_from(inst, nu, mu)?;
    if !(mu > 0.0) {
        return Err(Error::InfeasiblePoint { nu, mu, residual: f64::NAN });
    }
    let z = nu / mu;
    let s = SignVector::classify(inst, nu, mu, 1e-9 * nu.abs().max(1.0));
    let mut alpha = vec![0.0; inst.n()];
    for j in 0..inst.n() {
        if s[j] == 0 {
            continue;
        }
        if p[j] <= 0.0 {
            return Err(Error::ZeroPrimal { index: j, value: p[j] });
        }
        alpha[j] = (p[j] * z / inst.u()[j]).ln();
    }
    let eta = (mu / nu).ln() - 1.0;
    Ok((alpha, z, eta))
}

/// A primal/dual pair at a fixed relaxation value.
#[derive(Debug, Clone)]
pub struct PrimalDualPoint {
    pub nu: f64,
    pub mu: f64,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    pub z: f64,
    pub eta: f64,
}

impl PrimalDualPoint {
    /// Solves at `nu` and assembles the full point.
    pub fn solve(inst: &ProblemInstance, nu: f64, tol: f64) -> Result<Self> {
        let (mu, _) = solve_mu_at(inst, nu, tol)?;
        Self::reconstruct(inst, nu, mu)
    }

    /// Assembles the point from a known on-path `(nu, mu)`.
    pub fn reconstruct(inst: &ProblemInstance, nu: f64, mu: f64) -> Result<Self> {
        let p = primal_from(inst, nu, mu)?;
        let (alpha, z, eta) = dual_from(inst, nu, mu)?;
        Ok(Self { nu, mu, p, alpha, z, eta })
    }
}

/// Per-coordinate outcome of the optimality check.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// Which of the three optimality cases each coordinate fell into:
    /// -1 lower bound binding, 0 interior, +1 upper bound binding.
    pub cases: Vec<i8>,
    pub passes: Vec<bool>,
    pub worst_violation: f64,
}

impl KktReport {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|&b| b)
    }
}

/// Checks the stationarity conditions of the entropy objective against the
/// single multiplier implied by the point's `(nu, mu)`.
///
/// With `g_j = log(p_j/u_j) + 1` the conditions are `g_j >= eta` on the lower
/// bound, `g_j = eta` inside the box, and `g_j <= eta` on the upper bound,
/// each within `tol`.
pub fn kkt_check(inst: &ProblemInstance, point: &PrimalDualPoint, tol: f64) -> Result<KktReport> {
    let n = inst.n();
    let nu = point.nu;
    let eta = (point.mu / nu).ln() + 1.0;
    let box_tol = tol * (1.0 / nu).max(1.0);
    let mut cases = vec![0i8; n];
    let mut passes = vec![true; n];
    let mut worst = 0.0f64;
    for j in 0..n {
        let pj = point.p[j];
        if pj <= 0.0 {
            return Err(Error::ZeroPrimal { index: j, value: pj });
        }
        let dev = pj - inst.q()[j];
        let case = if dev >= 1.0 / nu - box_tol {
            1
        } else if dev <= -1.0 / nu + box_tol {
            -1
        } else {
            0
        };
        cases[j] = case;
        let g = (pj / inst.u()[j]).ln() + 1.0;
        let violation = match case {
            0 => (g - eta).abs(),
            -1 => (eta - g).max(0.0),
            _ => (g - eta).max(0.0),
        };
        // Box feasibility itself.
        let box_violation = (dev.abs() - 1.0 / nu).max(0.0);
        let v = violation.max(box_violation);
        worst = worst.max(v);
        if v > tol {
            passes[j] = false;
        }
    }
    Ok(KktReport { cases, passes, worst_violation: worst })
}
