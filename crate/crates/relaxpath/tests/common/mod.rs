//! Shared helpers for the integration suites: the worked three-coordinate
//! instance, seeded random instance families, and an independent
//! brute-force solver used as an oracle.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use relaxpath::ProblemInstance;

/// The worked example: u=(1/2,1/8,1/12), q=(1/4,1/3,1/36), m=(1,2,3).
pub fn toy() -> ProblemInstance {
    ProblemInstance::new(
        vec![0.5, 1.0 / 8.0, 1.0 / 12.0],
        vec![0.25, 1.0 / 3.0, 1.0 / 36.0],
        vec![1.0, 2.0, 3.0],
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn positive_simplex(n: usize, rng: &mut ChaCha20Rng, m: &[f64]) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().zip(m).map(|(&x, &mj)| mj * x).sum();
        let v: Vec<f64> = raw.iter().map(|&x| x / total).collect();
        if v.iter().all(|&x| x > 1e-9) {
            return v;
        }
    }
}

/// Dense family: strictly positive u and q, random multiplicities in [1, 4].
pub fn dense_instance(n: usize, rng: &mut ChaCha20Rng) -> ProblemInstance {
    let m: Vec<f64> = (0..n).map(|_| 1.0 + 3.0 * rng.gen::<f64>()).collect();
    let u = positive_simplex(n, rng, &m);
    let q = positive_simplex(n, rng, &m);
    ProblemInstance::new(u, q, m).unwrap()
}

/// Sparse family: unit multiplicities, observation supported on a few
/// coordinates (including possibly none of the large-prior ones).
pub fn sparse_instance(n: usize, rng: &mut ChaCha20Rng) -> ProblemInstance {
    let m = vec![1.0; n];
    let u = positive_simplex(n, rng, &m);
    let support = 1 + rng.gen_range(0..(n / 2).max(1));
    let mut q = vec![0.0; n];
    let mut total = 0.0;
    for _ in 0..support {
        let j = rng.gen_range(0..n);
        let w = rng.gen::<f64>() + 0.1;
        q[j] += w;
        total += w;
    }
    for x in &mut q {
        *x /= total;
    }
    ProblemInstance::new(u, q, m).unwrap()
}

/// Uniform-prior family: u = 1/n, strictly positive random q.
pub fn uniform_instance(n: usize, rng: &mut ChaCha20Rng) -> ProblemInstance {
    let m = vec![1.0; n];
    let u = vec![1.0 / n as f64; n];
    let q = positive_simplex(n, rng, &m);
    ProblemInstance::new(u, q, m).unwrap()
}

/// Independent brute-force solver for the entropy objective: the primal is
/// `p_j = clamp(u_j t, q_j - 1/nu, q_j + 1/nu)` for the scalar `t = mu/nu`
/// fixed by the simplex constraint, found here by 300 bisection steps on
/// the monotone weighted mass.
pub fn entropy_oracle(inst: &ProblemInstance, nu: f64) -> Vec<f64> {
    let clamp_at = |t: f64, j: usize| -> f64 {
        let qj = inst.q()[j];
        (inst.u()[j] * t).clamp(qj - 1.0 / nu, qj + 1.0 / nu)
    };
    let mass = |t: f64| -> f64 { (0..inst.n()).map(|j| inst.m()[j] * clamp_at(t, j)).sum() };
    let mut lo = 0.0f64;
    let mut hi = (0..inst.n())
        .map(|j| (inst.q()[j] + 1.0 / nu) / inst.u()[j])
        .fold(0.0f64, f64::max)
        + 1.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (0..inst.n()).map(|j| clamp_at(t, j)).collect()
}
