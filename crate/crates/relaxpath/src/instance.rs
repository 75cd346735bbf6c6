//! Problem instances, sign vectors and shared tolerances.
//!
//! An instance is a triple `(u, q, m)` of prior masses, observed masses and
//! strictly positive multiplicities with `m·u = m·q = 1`. The generalized
//! simplex `Δ(m) = {p : m·p = 1, p ≥ 0}` reduces to the ordinary simplex for
//! `m ≡ 1`.

use crate::error::{Error, Result};

/// Relative tolerance for the two simplex sums at validation time.
pub const TOL_SIMPLEX: f64 = 1e-9;

/// Base tolerance for geometric comparisons (line membership, breakpoint
/// merging). Scaled by `max(1, |nu|)` via [`geom_tol`].
pub const TOL_GEOM: f64 = 1e-12;

/// Tolerance for feasibility residuals of reconstructed primal points.
pub const TOL_FEAS: f64 = 1e-9;

/// Geometric tolerance at a given scan position.
pub fn geom_tol(nu: f64) -> f64 {
    TOL_GEOM * nu.abs().max(1.0)
}

/// Clamp of a real to `[-1, 1]`; encodes which box constraints are active.
pub fn theta(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// A validated relaxed-maxent problem instance.
///
/// Immutable after construction; all invariants are checked by
/// [`ProblemInstance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    u: Vec<f64>,
    q: Vec<f64>,
    m: Vec<f64>,
}

impl ProblemInstance {
    /// Validates `(u, q, m)` and builds an instance.
    pub fn new(u: Vec<f64>, q: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if u.len() != q.len() {
            return Err(Error::DimensionMismatch(u.len(), q.len()));
        }
        if u.len() != m.len() {
            return Err(Error::DimensionMismatch(u.len(), m.len()));
        }
        if u.is_empty() {
            return Err(Error::DimensionMismatch(0, 1));
        }
        for (j, (&uj, &mj)) in u.iter().zip(&m).enumerate() {
            if !(uj > 0.0) || !uj.is_finite() {
                return Err(Error::NonPositivePrior { index: j, value: uj });
            }
            if !(mj > 0.0) || !mj.is_finite() {
                return Err(Error::NonPositivePrior { index: j, value: mj });
            }
        }
        for (j, &qj) in q.iter().enumerate() {
            if qj < 0.0 || !qj.is_finite() {
                return Err(Error::NegativeObserved { index: j, value: qj });
            }
        }
        let mu: f64 = m.iter().zip(&u).map(|(a, b)| a * b).sum();
        if (mu - 1.0).abs() > TOL_SIMPLEX * mu.abs().max(1.0) {
            return Err(Error::NotNormalized { which: "m·u", sum: mu });
        }
        let mq: f64 = m.iter().zip(&q).map(|(a, b)| a * b).sum();
        if (mq - 1.0).abs() > TOL_SIMPLEX * mq.abs().max(1.0) {
            return Err(Error::NotNormalized { which: "m·q", sum: mq });
        }
        Ok(Self { u, q, m })
    }

    /// Plain-simplex instance with `m ≡ 1`.
    pub fn plain(u: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let n = u.len();
        Self::new(u, q, vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    /// True when every prior mass equals `1 / Σ m_j` within tolerance.
    pub fn has_uniform_prior(&self) -> bool {
        let u0 = 1.0 / self.m.iter().sum::<f64>();
        self.u.iter().all(|&uj| (uj - u0).abs() <= TOL_GEOM.max(1e-12 * u0))
    }

    /// Number of nonzero observed coordinates.
    pub fn observed_support(&self) -> usize {
        self.q.iter().filter(|&&qj| qj != 0.0).count()
    }
}

/// Builds an instance from vectors on the plain simplex together with
/// per-coordinate accuracy weights `delta`.
///
/// The returned instance has `m = delta`, `u~ = u/delta`, `q~ = q/delta`, so
/// that solving it at `nu` enforces `|p_j - q_j| <= delta_j / nu` on the
/// original variables, recovered as `p_j = delta_j * p~_j`.
pub fn weighted_transform(u: &[f64], q: &[f64], delta: &[f64]) -> Result<ProblemInstance> {
    if u.len() != q.len() {
        return Err(Error::DimensionMismatch(u.len(), q.len()));
    }
    if u.len() != delta.len() {
        return Err(Error::DimensionMismatch(u.len(), delta.len()));
    }
    for (j, &dj) in delta.iter().enumerate() {
        if !(dj > 0.0) || !dj.is_finite() {
            return Err(Error::NonPositivePrior { index: j, value: dj });
        }
    }
    // The original vectors must live on the plain simplex.
    let su: f64 = u.iter().sum();
    if (su - 1.0).abs() > TOL_SIMPLEX * su.abs().max(1.0) {
        return Err(Error::NotNormalized { which: "Σu", sum: su });
    }
    let sq: f64 = q.iter().sum();
    if (sq - 1.0).abs() > TOL_SIMPLEX * sq.abs().max(1.0) {
        return Err(Error::NotNormalized { which: "Σq", sum: sq });
    }
    let ut: Vec<f64> = u.iter().zip(delta).map(|(a, d)| a / d).collect();
    let qt: Vec<f64> = q.iter().zip(delta).map(|(a, d)| a / d).collect();
    ProblemInstance::new(ut, qt, delta.to_vec())
}

/// The partition `(I_-, I_0, I_+)` encoded as a vector over `{-1, 0, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector(pub Vec<i8>);

impl SignVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Size of `I_+ ∪ I_-`, the dual support.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    /// True when `I_0` is empty.
    pub fn interior_empty(&self) -> bool {
        self.0.iter().all(|&s| s != 0)
    }

    /// Classifies each coordinate from a point `(nu, mu)` by comparing
    /// `mu*u_j - nu*q_j` against the caps `±1` with tolerance `tol`.
    pub fn classify(inst: &ProblemInstance, nu: f64, mu: f64, tol: f64) -> Self {
        let s = inst
            .u()
            .iter()
            .zip(inst.q())
            .map(|(&uj, &qj)| {
                let t = mu * uj - nu * qj;
                if t >= 1.0 - tol {
                    1
                } else if t <= -1.0 + tol {
                    -1
                } else {
                    0
                }
            })
            .collect();
        Self(s)
    }
}

impl std::ops::Index<usize> for SignVector {
    type Output = i8;
    fn index(&self, j: usize) -> &i8 {
        &self.0[j]
    }
}
