//! Small reversible chains with known structure, used by the test suites and
//! by the CLI's `simulate-check`.

use crate::error::Result;
use crate::exact::EstimatorSpec;
use crate::spectral::{Distribution, ErgodicChain, StateFunction};

/// Metropolis chain for a target on `0..weights.len()` with a uniform
/// neighbour proposal on a path (moves to `x +- 1` with probability 1/2 each,
/// rejected at the ends).
pub fn metropolis_path(weights: &[f64]) -> Result<ErgodicChain> {
    let d = weights.len();
    let mut rows = vec![vec![0.0; d]; d];
    for x in 0..d {
        let mut stay = 1.0;
        for y in [x.wrapping_sub(1), x + 1] {
            if y < d {
                let p = 0.5 * (weights[y] / weights[x]).min(1.0);
                rows[x][y] = p;
                stay -= p;
            }
        }
        rows[x][x] = stay.max(0.0);
    }
    ErgodicChain::from_rows(&rows)
}

/// Metropolis chain with a uniform proposal over the other states.
pub fn metropolis_complete(target: &[f64]) -> Result<ErgodicChain> {
    let d = target.len();
    let q = 1.0 / (d - 1) as f64;
    let mut rows = vec![vec![0.0; d]; d];
    for x in 0..d {
        let mut stay = 1.0;
        for y in 0..d {
            if y != x {
                let p = q * (target[y] / target[x]).min(1.0);
                rows[x][y] = p;
                stay -= p;
            }
        }
        rows[x][x] = stay.max(0.0);
    }
    ErgodicChain::from_rows(&rows)
}

pub fn two_state() -> ErgodicChain {
    ErgodicChain::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]]).expect("valid chain")
}

pub fn metropolis3() -> ErgodicChain {
    metropolis_complete(&[0.5, 0.3, 0.2]).expect("valid chain")
}

/// Random walk on the triangle that never stays put; `beta_1 = -1/2`.
pub fn antithetic3() -> ErgodicChain {
    ErgodicChain::from_rows(&[
        vec![0.0, 0.5, 0.5],
        vec![0.5, 0.0, 0.5],
        vec![0.5, 0.5, 0.0],
    ])
    .expect("valid chain")
}

/// Lazy simple random walk on a path of 5 states.
pub fn lazy_path5() -> ErgodicChain {
    metropolis_path(&[1.0; 5]).expect("valid chain")
}

/// Birth-death chain on 6 states with a skewed stationary law.
pub fn birth_death6() -> ErgodicChain {
    let up = [0.4, 0.35, 0.3, 0.25, 0.2];
    let down = [0.1, 0.2, 0.3, 0.4, 0.5];
    let mut rows = vec![vec![0.0; 6]; 6];
    for x in 0..6 {
        if x < 5 {
            rows[x][x + 1] = up[x];
        }
        if x > 0 {
            rows[x][x - 1] = down[x - 1];
        }
        rows[x][x] = 1.0 - rows[x].iter().sum::<f64>();
    }
    ErgodicChain::from_rows(&rows).expect("valid chain")
}

/// Metropolis on 10 states for an uneven, deterministic target.
pub fn metropolis10() -> ErgodicChain {
    let w: Vec<f64> = (0..10).map(|i| 1.0 + ((i * 7) % 10) as f64).collect();
    let total: f64 = w.iter().sum();
    let target: Vec<f64> = w.iter().map(|x| x / total).collect();
    metropolis_complete(&target).expect("valid chain")
}

/// The six reference chains with display names.
pub fn reference_chains() -> Vec<(&'static str, ErgodicChain)> {
    vec![
        ("two_state", two_state()),
        ("metropolis3", metropolis3()),
        ("antithetic3", antithetic3()),
        ("lazy_path5", lazy_path5()),
        ("birth_death6", birth_death6()),
        ("metropolis10", metropolis10()),
    ]
}

/// One Monte Carlo comparison: a reference chain, start law, function and
/// estimator shape.
#[derive(Debug, Clone)]
pub struct SimulationCase {
    pub chain_name: &'static str,
    pub chain: ErgodicChain,
    pub nu: Distribution,
    pub f: StateFunction,
    pub spec: EstimatorSpec,
}

/// `(n, n0)` shapes used by [`simulation_cases`], paired with the start law:
/// the first state, `pi`, and the last state respectively.
pub const SIMULATION_SHAPES: [(usize, usize); 3] = [(4, 2), (16, 0), (32, 8)];

/// Every reference chain crossed with [`SIMULATION_SHAPES`].
pub fn simulation_cases() -> Vec<SimulationCase> {
    let mut cases = Vec::new();
    for (chain_name, chain) in reference_chains() {
        let d = chain.dim();
        let f = StateFunction::new((0..d).map(|x| ((x * 3) % 5) as f64 - 1.0).collect())
            .expect("finite values");
        let starts = [
            Distribution::point_mass(d, 0),
            chain.pi().clone(),
            Distribution::point_mass(d, d - 1),
        ];
        for (nu, &(n, n0)) in starts.into_iter().zip(&SIMULATION_SHAPES) {
            cases.push(SimulationCase {
                chain_name,
                chain: chain.clone(),
                nu,
                f: f.clone(),
                spec: EstimatorSpec::new(n, n0).expect("n >= 1"),
            });
        }
    }
    cases
}
