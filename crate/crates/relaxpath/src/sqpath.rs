//! Squared-loss relaxation path: projection of the prior onto the simplex
//! intersected with the sup-norm box around the observation.
//!
//! The capped primal is `p_j = q_j + θ(nu·(u_j - q_j) + mu)/nu` and the
//! segment line is `nu·R + mu·B + M = 0` with `R = Σ_{I_0} m_j (u_j - q_j)`
//! and `B = Σ_{I_0} m_j`. The tracker kernel in [`crate::path`] handles this
//! through the coefficient map `(a_j, b_j) = (1, q_j - u_j)`, under which the
//! segment sums stored on the path are `(M, B, -R)`. Unlike the entropy
//! path, `mu` may be negative here.

use crate::error::{Error, Result};
use crate::instance::{theta, ProblemInstance};
use crate::path::{track_generic, Objective, RelaxationPath};

/// Tracks the full squared-loss path from `nu = 0`.
pub fn sq_track_local(inst: &ProblemInstance) -> Result<RelaxationPath> {
    track_generic(inst, Objective::Squared)
}

/// Master equation of the squared objective:
/// `Σ m_j θ(nu·(u_j - q_j) + mu)`, zero exactly on the path.
pub fn sq_evaluate_g(inst: &ProblemInstance, nu: f64, mu: f64) -> f64 {
    inst.m()
        .iter()
        .zip(inst.u())
        .zip(inst.q())
        .map(|((&mj, &uj), &qj)| mj * theta(nu * (uj - qj) + mu))
        .sum()
}

/// Primal reconstruction from a point `(nu, mu)` on the squared-loss path.
pub fn sq_primal_from(inst: &ProblemInstance, nu: f64, mu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return Err(Error::InvalidNu(nu));
    }
    let residual = sq_evaluate_g(inst, nu, mu);
    let scale: f64 = inst.m().iter().sum();
    if residual.abs() > 1e-7 * scale.max(1.0) {
        return Err(Error::InfeasiblePoint { nu, mu, residual });
    }
    Ok(inst
        .u()
        .iter()
        .zip(inst.q())
        .map(|(&uj, &qj)| qj + theta(nu * (uj - qj) + mu) / nu)
        .collect())
}

/// Independent oracle: solves `min ½ Σ m_j (p_j - u_j)²` over the simplex
/// intersected with the box `|p_j - q_j| ≤ 1/nu` by bisection on the
/// hyperplane multiplier, each coordinate clamping independently.
pub fn sq_projection_oracle(inst: &ProblemInstance, nu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidNu(nu));
    }
    let clamp_at = |eta: f64, j: usize| -> f64 {
        let qj = inst.q()[j];
        (inst.u()[j] + eta).clamp(qj - 1.0 / nu, qj + 1.0 / nu)
    };
    let mass = |eta: f64| -> f64 {
        (0..inst.n()).map(|j| inst.m()[j] * clamp_at(eta, j)).sum::<f64>()
    };
    let lo_bound = inst
        .q()
        .iter()
        .map(|&qj| qj - 1.0 / nu)
        .fold(f64::INFINITY, f64::min);
    let hi_bound = inst
        .q()
        .iter()
        .map(|&qj| qj + 1.0 / nu)
        .fold(f64::NEG_INFINITY, f64::max);
    let u_max = inst.u().iter().fold(0.0f64, |a, &b| a.max(b));
    let u_min = inst.u().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    // Wide bracket: all coordinates clamp low/high at the ends, so the mass
    // straddles 1 there.
    let mut lo = lo_bound - u_max - 1.0;
    let mut hi = hi_bound - u_min + 1.0;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eta = 0.5 * (lo + hi);
    Ok((0..inst.n()).map(|j| clamp_at(eta, j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform3() -> ProblemInstance {
        ProblemInstance::plain(vec![1.0 / 3.0; 3], vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn worked_path() {
        let path = sq_track_local(&uniform3()).unwrap();
        assert_eq!(path.kappa(), 2);
        let bps = path.breakpoints();
        assert!((bps[0].nu - 6.0).abs() < 1e-9 && bps[0].mu.abs() < 1e-9);
        assert!((bps[1].nu - 10.0).abs() < 1e-9 && (bps[1].mu + 1.0 / 3.0).abs() < 1e-9);
        assert!(path.nu_inf().is_infinite());
        // Terminal segment mu = -nu/30.
        let (mu, s, _) = path.eval(60.0);
        assert!((mu + 2.0).abs() < 1e-9);
        assert_eq!(s.0, vec![-1, 0, 1]);
        // Initial segment is flat: the interior difference sum starts at zero.
        let first = path.segments()[0];
        assert!(first.observed_mass.abs() < 1e-12);
        let (mu0, _, _) = path.eval(3.0);
        assert!(mu0.abs() < 1e-12);
    }

    #[test]
    fn identical_distributions_stay_flat() {
        let inst = ProblemInstance::plain(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        let path = sq_track_local(&inst).unwrap();
        assert_eq!(path.kappa(), 0);
        let (mu, _, _) = path.eval(17.0);
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn paired_exit_for_two_coordinates() {
        let inst = ProblemInstance::plain(vec![0.5, 0.5], vec![0.7, 0.3]).unwrap();
        let path = sq_track_local(&inst).unwrap();
        assert_eq!(path.kappa(), 1);
        let bp = &path.breakpoints()[0];
        assert!((bp.nu - 5.0).abs() < 1e-9 && bp.mu.abs() < 1e-9);
        assert_eq!(bp.transitions.len(), 2);
        assert!((path.nu_inf() - 5.0).abs() < 1e-9);
        let (mu, _, _) = path.eval(3.0);
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn primal_on_the_worked_path() {
        let inst = uniform3();
        let path = sq_track_local(&inst).unwrap();
        let (mu, _, _) = path.eval(8.0);
        assert!((mu + 1.0 / 6.0).abs() < 1e-12);
        let p = sq_primal_from(&inst, 8.0, mu).unwrap();
        assert!((p[0] - 0.375).abs() < 1e-12);
        assert!((p[1] - 0.3125).abs() < 1e-12);
        assert!((p[2] - 0.3125).abs() < 1e-12);
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn primal_below_first_breakpoint_is_the_prior() {
        let inst = uniform3();
        let p = sq_primal_from(&inst, 2.0, 0.0).unwrap();
        for &pj in &p {
            assert!((pj - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn primal_rejects_off_path_points() {
        let inst = uniform3();
        assert!(matches!(
            sq_primal_from(&inst, 8.0, 1.0),
            Err(Error::InfeasiblePoint { .. })
        ));
    }

    #[test]
    fn oracle_matches_path_reconstruction() {
        let inst = uniform3();
        let path = sq_track_local(&inst).unwrap();
        for nu in [0.5, 2.0, 6.0, 7.3, 9.9, 10.0, 25.0, 400.0] {
            let (mu, _, _) = path.eval(nu);
            let p = sq_primal_from(&inst, nu, mu).unwrap();
            let oracle = sq_projection_oracle(&inst, nu).unwrap();
            for (a, b) in p.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "nu={}: {} vs {}", nu, a, b);
            }
        }
    }

    #[test]
    fn oracle_trivia() {
        let inst = ProblemInstance::plain(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        let p = sq_projection_oracle(&inst, 12.0).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-10 && (p[1] - 0.7).abs() < 1e-10);
        let single = ProblemInstance::new(vec![1.0], vec![1.0], vec![1.0]).unwrap();
        assert!((sq_projection_oracle(&single, 3.0).unwrap()[0] - 1.0).abs() < 1e-10);
        assert!(matches!(sq_projection_oracle(&single, 0.0), Err(Error::InvalidNu(_))));
    }

    #[test]
    fn objective_is_nondecreasing_in_nu() {
        let inst = uniform3();
        let path = sq_track_local(&inst).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=60 {
            let nu = i as f64 * 0.5;
            let (mu, _, _) = path.eval(nu);
            let p = sq_primal_from(&inst, nu, mu).unwrap();
            let obj: f64 = p
                .iter()
                .zip(inst.u())
                .zip(inst.m())
                .map(|((&pj, &uj), &mj)| 0.5 * mj * (pj - uj) * (pj - uj))
                .sum();
            assert!(obj >= prev - 1e-12, "objective dropped at nu={}", nu);
            prev = obj;
        }
    }
}
