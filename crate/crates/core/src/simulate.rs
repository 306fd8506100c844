//! Seeded Monte Carlo estimates of `e_nu(S_{n,n0}, f)^2`.
//!
//! Replication `i` draws from ChaCha8 seeded with `seed` on stream `i`, so a
//! report depends only on `(seed, R, spec)` and not on the thread count or the
//! order in which replications finish.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CertifyError, Result};
use crate::exact::EstimatorSpec;
use crate::numeric::pairwise_sum;
use crate::spectral::{Distribution, ErgodicChain, StateFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub replications: u64,
    pub seed: u64,
    pub spec: EstimatorSpec,
}

impl SimulationConfig {
    pub fn new(replications: u64, seed: u64, spec: EstimatorSpec) -> Result<Self> {
        if replications < 2 {
            return Err(CertifyError::InvalidArgument(format!(
                "need at least 2 replications, got {replications}"
            )));
        }
        Ok(Self {
            replications,
            seed,
            spec,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalErrorReport {
    pub mse_hat: f64,
    pub std_error: f64,
    pub replications: u64,
    pub seed: u64,
}

/// Cumulative sums with the tail pinned to exactly 1 from the last state
/// that carries mass, so a uniform draw in `[0, 1)` always lands on a state
/// with positive probability.
fn cdf(weights: &[f64]) -> Vec<f64> {
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    let mut acc = 0.0;
    weights
        .iter()
        .enumerate()
        .map(|(x, w)| {
            acc += w;
            if x >= last {
                1.0
            } else {
                acc
            }
        })
        .collect()
}

/// Inverse-CDF sampler with every row of `P` and the start law cached.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    start: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl ChainSampler {
    pub fn new(chain: &ErgodicChain, nu: &Distribution) -> Result<Self> {
        if nu.dim() != chain.dim() {
            return Err(CertifyError::LengthMismatch {
                what: "nu",
                len: nu.dim(),
                expected: chain.dim(),
            });
        }
        let p = chain.chain().transition();
        Ok(Self {
            start: cdf(nu.weights()),
            rows: (0..chain.dim()).map(|x| cdf(p.row(x))).collect(),
        })
    }

    fn draw(table: &[f64], rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        table.partition_point(|&c| c <= u)
    }

    pub fn initial(&self, rng: &mut impl Rng) -> usize {
        Self::draw(&self.start, rng)
    }

    pub fn step(&self, x: usize, rng: &mut impl Rng) -> usize {
        Self::draw(&self.rows[x], rng)
    }
}

/// The random stream of replication `index` under `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `length` states `X_0, X_1, ...` with `X_0 ~ nu`.
pub fn sample_trajectory(
    chain: &ErgodicChain,
    nu: &Distribution,
    length: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if length == 0 {
        return Err(CertifyError::InvalidArgument(
            "trajectory length must be at least 1".into(),
        ));
    }
    let sampler = ChainSampler::new(chain, nu)?;
    let mut path = Vec::with_capacity(length);
    let mut x = sampler.initial(rng);
    path.push(x);
    for _ in 1..length {
        x = sampler.step(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// Mean over `R` replications of `(S_{n,n0}(f) - S(f))^2`, with the standard
/// error taken from the sample variance of the squared errors.
pub fn estimate_error(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    config: SimulationConfig,
) -> Result<EmpiricalErrorReport> {
    if f.dim() != chain.dim() {
        return Err(CertifyError::LengthMismatch {
            what: "f",
            len: f.dim(),
            expected: chain.dim(),
        });
    }
    let sampler = ChainSampler::new(chain, nu)?;
    // Shift by f(0) so constant functions give exactly zero error.
    let h: Vec<f64> = f.values().iter().map(|v| v - f[0]).collect();
    let pi = chain.pi().weights();
    let target = pairwise_sum(&h.iter().zip(pi).map(|(a, b)| a * b).collect::<Vec<_>>());
    let (n, n0) = (config.spec.n(), config.spec.n0());

    let squared: Vec<f64> = (0..config.replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(config.seed, i);
            let mut x = sampler.initial(&mut rng);
            for _ in 0..n0 {
                x = sampler.step(x, &mut rng);
            }
            let mut sum = 0.0;
            for _ in 0..n {
                x = sampler.step(x, &mut rng);
                sum += h[x];
            }
            let e = sum / n as f64 - target;
            e * e
        })
        .collect();

    let r = config.replications as f64;
    let mse_hat = pairwise_sum(&squared) / r;
    let dev: Vec<f64> = squared
        .iter()
        .map(|s| (s - mse_hat) * (s - mse_hat))
        .collect();
    let variance = pairwise_sum(&dev) / (r - 1.0);
    Ok(EmpiricalErrorReport {
        mse_hat,
        std_error: (variance / r).sqrt(),
        replications: config.replications,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> ErgodicChain {
        ErgodicChain::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]]).unwrap()
    }

    #[test]
    fn cdf_pins_tail() {
        assert_eq!(cdf(&[0.2, 0.8, 0.0]), vec![0.2, 1.0, 1.0]);
        assert_eq!(cdf(&[0.0, 1.0]), vec![0.0, 1.0]);
        let mut rng = replication_rng(1, 0);
        for _ in 0..1000 {
            assert_eq!(ChainSampler::draw(&cdf(&[0.0, 1.0, 0.0]), &mut rng), 1);
        }
    }

    #[test]
    fn forced_moves() {
        let cycle = ErgodicChain::from_rows(&[
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let mut rng = replication_rng(3, 0);
        let path =
            sample_trajectory(&cycle, &Distribution::point_mass(3, 2), 500, &mut rng).unwrap();
        assert_eq!(path[0], 2);
        assert!(path.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn constant_function_has_zero_error() {
        let chain = two_state();
        let spec = EstimatorSpec::new(5, 3).unwrap();
        let cfg = SimulationConfig::new(100, 9, spec).unwrap();
        let f = StateFunction::constant(2, 0.3);
        let r = estimate_error(&chain, &Distribution::point_mass(2, 0), &f, cfg).unwrap();
        assert_eq!(r.mse_hat, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let chain = two_state();
        let spec = EstimatorSpec::new(4, 2).unwrap();
        let cfg = SimulationConfig::new(1000, 42, spec).unwrap();
        let f = StateFunction::new(vec![1.0, -1.0]).unwrap();
        let nu = Distribution::point_mass(2, 0);
        let a = estimate_error(&chain, &nu, &f, cfg).unwrap();
        let b = estimate_error(&chain, &nu, &f, cfg).unwrap();
        assert_eq!(a, b);
        let c = estimate_error(&chain, &nu, &f, SimulationConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.mse_hat, c.mse_hat);
    }

    #[test]
    fn rejects_single_replication() {
        let spec = EstimatorSpec::new(1, 0).unwrap();
        assert!(SimulationConfig::new(1, 0, spec).is_err());
    }
}
