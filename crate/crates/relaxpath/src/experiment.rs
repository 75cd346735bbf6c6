//! Seeded path-complexity experiment on Zipf-like distributions: the prior
//! and base observation follow power-law weights, finite samples are drawn
//! multinomially, and the number of path breakpoints is averaged over
//! repeats for each sample size.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::path::track_local;

/// Generator family used for sampling, recorded in report headers so runs
/// are reproducible across implementations.
pub const GENERATOR_ID: &str = "chacha20";

/// One report row: breakpoint counts averaged over the repeats at a fixed
/// sample size.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub sample_size: usize,
    pub mean_kappa: f64,
    pub kappa_over_n: f64,
}

/// Prior with weights `1/(2+j)`, `j = 1..=n`, normalized.
pub fn zipf_prior(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|j| 1.0 / (2.0 + j as f64)).collect();
    normalize(raw)
}

/// Base observation with weights `1/j`, `j = 1..=n`, normalized.
pub fn zipf_base(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|j| 1.0 / (j as f64)).collect();
    normalize(raw)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Draws `samples` multinomial counts from `base` and normalizes them into
/// an empirical distribution. Zero samples cannot be normalized.
pub fn multinomial_draw(
    base: &[f64],
    samples: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive"));
    }
    let mut cdf = Vec::with_capacity(base.len());
    let mut acc = 0.0;
    for &w in base {
        acc += w;
        cdf.push(acc);
    }
    let top = *cdf.last().expect("nonempty base");
    let mut counts = vec![0u64; base.len()];
    for _ in 0..samples {
        let x: f64 = rng.gen::<f64>() * top;
        let j = cdf.partition_point(|&c| c < x).min(base.len() - 1);
        counts[j] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}

/// Runs the sweep: for each sample size, draws `repeats` empirical
/// observations from the Zipf base, tracks each path against the Zipf
/// prior, and averages the breakpoint counts. Deterministic given the seed.
pub fn zipf_sweep(
    n: usize,
    sample_sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if n < 2 {
        return Err(Error::InvalidParameter("dimension must be at least 2"));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be positive"));
    }
    let u = zipf_prior(n);
    let base = zipf_base(n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sample_sizes.len());
    for &samples in sample_sizes {
        let mut total_kappa = 0usize;
        for _ in 0..repeats {
            let q = multinomial_draw(&base, samples, &mut rng)?;
            let inst = ProblemInstance::plain(u.clone(), q)?;
            total_kappa += track_local(&inst)?.kappa();
        }
        let mean_kappa = total_kappa as f64 / repeats as f64;
        rows.push(SweepRow {
            sample_size: samples,
            mean_kappa,
            kappa_over_n: mean_kappa / n as f64,
        });
    }
    Ok(rows)
}

/// Builds a sparse-observation instance: Zipf prior over all coordinates,
/// empirical observation supported on `s` coordinates drawn from the Zipf
/// base. Used for large-scale tracker benchmarks.
pub fn sparse_zipf_instance(n: usize, s: usize, seed: u64) -> Result<ProblemInstance> {
    let u = zipf_prior(n);
    let base = zipf_base(n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut q = vec![0.0; n];
    let mut chosen = Vec::with_capacity(s);
    while chosen.len() < s {
        let probe = multinomial_draw(&base, 1, &mut rng)?;
        let j = probe.iter().position(|&x| x > 0.0).expect("one draw lands");
        if !chosen.contains(&j) {
            chosen.push(j);
        }
    }
    for (rank, &j) in chosen.iter().enumerate() {
        q[j] = (s - rank) as f64;
    }
    let total: f64 = q.iter().sum();
    for x in &mut q {
        *x /= total;
    }
    ProblemInstance::plain(u, q)
}
