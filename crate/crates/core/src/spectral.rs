//! Finite-state reversible Markov chains and their spectral structure.
//!
//! A chain `P` that satisfies detailed balance `pi(x) p(x,y) = pi(y) p(y,x)` is
//! self-adjoint in the `pi`-weighted inner product `<f, g>_pi = sum f g pi`.
//! The decomposition is computed on the symmetric similarity transform
//! `A = D^{1/2} P D^{-1/2}` with `D = diag(pi)`, whose orthonormal eigenvectors
//! `v` map back to `pi`-orthonormal eigenfunctions `u = D^{-1/2} v`.

use std::collections::VecDeque;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CertifyError, Result};
use crate::tol::{MIN_MASS, REV_TOL, ROW_TOL, SPEC_TOL, STAT_TOL};

/// The finite state space `D`, optionally labelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    size: usize,
    labels: Option<Vec<String>>,
}

impl StateSpace {
    pub fn new(size: usize, labels: Option<Vec<String>>) -> Result<Self> {
        if size < 2 {
            return Err(CertifyError::TooFewStates(size));
        }
        if let Some(labels) = &labels {
            if labels.len() != size {
                return Err(CertifyError::LengthMismatch {
                    what: "labels",
                    len: labels.len(),
                    expected: size,
                });
            }
            for (i, label) in labels.iter().enumerate() {
                if labels[..i].contains(label) {
                    return Err(CertifyError::InvalidArgument(format!(
                        "duplicate state label {label:?} at index {i}"
                    )));
                }
            }
        }
        Ok(Self { size, labels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of state `x`, falling back to its index.
    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(labels) => labels[x].clone(),
            None => x.to_string(),
        }
    }
}

/// Row-stochastic matrix `p(x, y)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates squareness, entry range and row sums (within `ROW_TOL`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(CertifyError::TooFewStates(dim));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != dim {
                return Err(CertifyError::DimensionMismatch {
                    row,
                    len: values.len(),
                    expected: dim,
                });
            }
            for (col, &value) in values.iter().enumerate() {
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(CertifyError::InvalidProbability { row, col, value });
                }
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(CertifyError::NotStochastic { row, sum });
            }
            entries.extend_from_slice(values);
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.dim + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.dim..(x + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `(P f)(x) = sum_y p(x,y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.dim);
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(f).map(|(p, v)| p * v).sum())
            .collect()
    }

    /// `(nu P)(y) = sum_x nu(x) p(x,y)`.
    pub fn apply_left(&self, nu: &[f64]) -> Vec<f64> {
        debug_assert_eq!(nu.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (row, &mass) in self.entries.chunks(self.dim).zip(nu) {
            if mass == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += mass * p;
            }
        }
        out
    }

    /// True when every state reaches every other state through positive entries.
    fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.dim];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(x) = queue.pop_front() {
                for (y, seen_y) in seen.iter_mut().enumerate() {
                    let p = if forward {
                        self.get(x, y)
                    } else {
                        self.get(y, x)
                    };
                    if p > 0.0 && !*seen_y {
                        *seen_y = true;
                        queue.push_back(y);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// A probability vector on `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(CertifyError::TooFewStates(weights.len()));
        }
        for (x, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(CertifyError::InvalidDistribution(format!(
                    "weight {w} at state {x} is not a nonnegative number"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_TOL {
            return Err(CertifyError::InvalidDistribution(format!(
                "weights sum to {sum:.17}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn point_mass(dim: usize, state: usize) -> Self {
        assert!(state < dim, "state {state} out of range for |D| = {dim}");
        let mut w = vec![0.0; dim];
        w[state] = 1.0;
        Self(w)
    }

    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0 / dim as f64; dim])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = CertifyError;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

/// A real function `f: D -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateFunction(Vec<f64>);

impl StateFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(CertifyError::InvalidArgument(format!(
                "function value at state {x} is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self(vec![c; dim])
    }

    pub fn indicator(dim: usize, state: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[state] = 1.0;
        Self(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// `f - S(f)`, the centred function `g`.
    pub fn centered(&self, pi: &Distribution) -> StateFunction {
        let s = mean(self, pi);
        Self(self.0.iter().map(|v| v - s).collect())
    }
}

impl From<Vec<f64>> for StateFunction {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Index<usize> for StateFunction {
    type Output = f64;

    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

/// The weighted `l_p(D, pi)` norms used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpNorm {
    L1,
    L2,
    L4,
    #[serde(rename = "linf")]
    Inf,
}

/// `(sum |f|^p pi)^{1/p}`, or `max |f|` for `p = inf`.
pub fn weighted_norm(f: &[f64], pi: &Distribution, p: LpNorm) -> f64 {
    let w = pi.weights();
    match p {
        LpNorm::L1 => f.iter().zip(w).map(|(v, m)| v.abs() * m).sum(),
        LpNorm::L2 => f.iter().zip(w).map(|(v, m)| v * v * m).sum::<f64>().sqrt(),
        LpNorm::L4 => f
            .iter()
            .zip(w)
            .map(|(v, m)| {
                let sq = v * v;
                sq * sq * m
            })
            .sum::<f64>()
            .sqrt()
            .sqrt(),
        LpNorm::Inf => f.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
    }
}

/// `<f, g>_pi = sum_x f(x) g(x) pi(x)`.
pub fn weighted_inner(f: &[f64], g: &[f64], pi: &Distribution) -> f64 {
    f.iter()
        .zip(g)
        .zip(pi.weights())
        .map(|((a, b), m)| a * b * m)
        .sum()
}

/// `S(f) = <f, 1>_pi`, accumulated around `f(0)` so constant functions are
/// reproduced exactly.
pub fn mean(f: &StateFunction, pi: &Distribution) -> f64 {
    let shift = f.0[0];
    shift
        + f.0
            .iter()
            .zip(pi.weights())
            .map(|(v, m)| (v - shift) * m)
            .sum::<f64>()
}

/// A validated reversible chain: transition matrix, stationary distribution
/// with full support and the detailed-balance residual.
#[derive(Debug, Clone)]
pub struct ReversibleChain {
    space: StateSpace,
    p: TransitionMatrix,
    pi: Distribution,
    reversibility_residual: f64,
    stationarity_residual: f64,
}

impl ReversibleChain {
    /// Validates `P` against `pi`, computing `pi` from `nu P = nu` when absent.
    pub fn build(p: TransitionMatrix, pi: Option<Distribution>) -> Result<Self> {
        let space = StateSpace::new(p.dim(), None)?;
        Self::build_labelled(space, p, pi)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::build(TransitionMatrix::from_rows(rows)?, None)
    }

    pub fn build_labelled(
        space: StateSpace,
        p: TransitionMatrix,
        pi: Option<Distribution>,
    ) -> Result<Self> {
        let dim = p.dim();
        if space.size() != dim {
            return Err(CertifyError::LengthMismatch {
                what: "labels",
                len: space.size(),
                expected: dim,
            });
        }
        if !p.is_irreducible() {
            return Err(CertifyError::NotErgodic(
                "support graph of P is reducible (some state cannot reach another)".into(),
            ));
        }
        let pi = match pi {
            Some(pi) => {
                if pi.dim() != dim {
                    return Err(CertifyError::LengthMismatch {
                        what: "pi",
                        len: pi.dim(),
                        expected: dim,
                    });
                }
                pi
            }
            None => stationary_distribution(&p)?,
        };
        if let Some((state, &value)) = pi.weights().iter().enumerate().find(|(_, &w)| w < MIN_MASS)
        {
            return Err(CertifyError::ZeroMass { state, value });
        }

        let pi_p = p.apply_left(pi.weights());
        let (state, stationarity_residual) = pi_p
            .iter()
            .zip(pi.weights())
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if stationarity_residual > STAT_TOL {
            return Err(CertifyError::NotStationary {
                state,
                residual: stationarity_residual,
            });
        }

        let mut worst = (0, 0, 0.0_f64);
        for x in 0..dim {
            for y in (x + 1)..dim {
                let r = (pi[x] * p.get(x, y) - pi[y] * p.get(y, x)).abs();
                if r > worst.2 {
                    worst = (x, y, r);
                }
            }
        }
        if worst.2 > REV_TOL {
            return Err(CertifyError::NotReversible {
                x: worst.0,
                y: worst.1,
                residual: worst.2,
            });
        }

        Ok(Self {
            space,
            p,
            pi,
            reversibility_residual: worst.2,
            stationarity_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.p
    }

    pub fn pi(&self) -> &Distribution {
        &self.pi
    }

    pub fn reversibility_residual(&self) -> f64 {
        self.reversibility_residual
    }

    pub fn stationarity_residual(&self) -> f64 {
        self.stationarity_residual
    }

    /// `P^k f` by `k` matrix-vector products.
    pub fn apply_to_function(&self, f: &StateFunction, k: usize) -> StateFunction {
        let mut v = f.0.clone();
        for _ in 0..k {
            v = self.p.apply(&v);
        }
        StateFunction(v)
    }

    /// `nu P^k` by `k` vector-matrix products.
    pub fn apply_to_distribution(&self, nu: &Distribution, k: usize) -> Distribution {
        let mut v = nu.0.clone();
        for _ in 0..k {
            v = self.p.apply_left(&v);
        }
        Distribution(v)
    }

    /// The lazy version `(I + P) / 2`.
    pub fn lazy(&self) -> Result<Self> {
        let dim = self.dim();
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|x| {
                (0..dim)
                    .map(|y| {
                        let id = if x == y { 1.0 } else { 0.0 };
                        0.5 * (id + self.p.get(x, y))
                    })
                    .collect()
            })
            .collect();
        Self::build_labelled(
            self.space.clone(),
            TransitionMatrix::from_rows(&rows)?,
            Some(self.pi.clone()),
        )
    }
}

/// Least-squares solve of `[P^T - I; 1^T] nu = [0; 1]`.
fn stationary_distribution(p: &TransitionMatrix) -> Result<Distribution> {
    let dim = p.dim();
    let mut a = DMatrix::<f64>::zeros(dim + 1, dim);
    for x in 0..dim {
        for y in 0..dim {
            a[(y, x)] = p.get(x, y) - if x == y { 1.0 } else { 0.0 };
        }
        a[(dim, x)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(dim + 1);
    b[dim] = 1.0;
    let solution = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| CertifyError::SpectralFailure(format!("stationary solve: {e}")))?;

    if let Some((state, &value)) = solution
        .iter()
        .enumerate()
        .find(|(_, &w)| w.is_nan() || w < MIN_MASS)
    {
        return Err(CertifyError::ZeroMass { state, value });
    }
    let total: f64 = solution.iter().sum();
    let weights: Vec<f64> = solution.iter().map(|w| w / total).collect();

    let residual = p
        .apply_left(&weights)
        .iter()
        .zip(&weights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > STAT_TOL {
        return Err(CertifyError::NotErgodic(format!(
            "no unique stationary distribution (solve residual {residual:e})"
        )));
    }
    Ok(Distribution(weights))
}

/// Eigenvalues in descending order with `pi`-orthonormal eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<StateFunction>,
    beta1: f64,
    beta: f64,
    orthonormality_residual: f64,
    eigen_residual: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[StateFunction] {
        &self.eigenfunctions
    }

    pub fn eigenfunction(&self, k: usize) -> &StateFunction {
        &self.eigenfunctions[k]
    }

    /// Second largest eigenvalue.
    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// `max(beta_1, |beta_min|)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectral_gap(&self) -> f64 {
        1.0 - self.beta1
    }

    /// `max_{i,j} |<u_i, u_j>_pi - delta_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        self.orthonormality_residual
    }

    /// `max_k ||P u_k - beta_k u_k||_2`.
    pub fn eigen_residual(&self) -> f64 {
        self.eigen_residual
    }

    /// `a_k = <f, u_k>_pi` for every `k`.
    pub fn coefficients(&self, f: &[f64], pi: &Distribution) -> Vec<f64> {
        self.eigenfunctions
            .iter()
            .map(|u| weighted_inner(f, u.values(), pi))
            .collect()
    }

    /// `sum_k beta_k^m <u_k, v>_pi u_k`, i.e. `P^m v` through the spectrum.
    pub fn reconstruct_power(&self, v: &[f64], pi: &Distribution, m: i32) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (beta_k, u) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            let c = beta_k.powi(m) * weighted_inner(v, u.values(), pi);
            for (o, uk) in out.iter_mut().zip(u.values()) {
                *o += c * uk;
            }
        }
        out
    }
}

/// Decomposes `P` through `A = D^{1/2} P D^{-1/2}`.
pub fn spectral_decompose(chain: &ReversibleChain) -> Result<SpectralDecomposition> {
    let dim = chain.dim();
    let sqrt_pi: Vec<f64> = chain.pi().weights().iter().map(|w| w.sqrt()).collect();
    let p = chain.transition();

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        for y in x..dim {
            let forward = sqrt_pi[x] * p.get(x, y) / sqrt_pi[y];
            let backward = sqrt_pi[y] * p.get(y, x) / sqrt_pi[x];
            let v = 0.5 * (forward + backward);
            a[(x, y)] = v;
            a[(y, x)] = v;
        }
    }

    let eig = a
        .try_symmetric_eigen(f64::EPSILON, 1000 * dim.max(10))
        .ok_or_else(|| CertifyError::SpectralFailure("no convergence".into()))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenfunctions: Vec<StateFunction> = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvectors.column(i);
            StateFunction((0..dim).map(|x| v[x] / sqrt_pi[x]).collect())
        })
        .collect();

    if (eigenvalues[0] - 1.0).abs() > SPEC_TOL {
        return Err(CertifyError::SpectralFailure(format!(
            "leading eigenvalue {} differs from 1",
            eigenvalues[0]
        )));
    }
    let u0 = &mut eigenfunctions[0];
    if u0.0.iter().sum::<f64>() < 0.0 {
        u0.0.iter_mut().for_each(|v| *v = -*v);
    }
    if let Some(x) = u0.0.iter().position(|v| (v - 1.0).abs() > SPEC_TOL) {
        return Err(CertifyError::SpectralFailure(format!(
            "u_0({x}) = {} is not the constant one function",
            u0.0[x]
        )));
    }

    let pi = chain.pi();
    let mut orthonormality_residual = 0.0_f64;
    for i in 0..dim {
        for j in i..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            let ip = weighted_inner(eigenfunctions[i].values(), eigenfunctions[j].values(), pi);
            orthonormality_residual = orthonormality_residual.max((ip - target).abs());
        }
    }
    let mut eigen_residual = 0.0_f64;
    for (beta_k, u) in eigenvalues.iter().zip(&eigenfunctions) {
        let pu = p.apply(u.values());
        let diff: Vec<f64> = pu
            .iter()
            .zip(u.values())
            .map(|(a, b)| a - beta_k * b)
            .collect();
        eigen_residual = eigen_residual.max(weighted_norm(&diff, pi, LpNorm::L2));
    }
    if orthonormality_residual > SPEC_TOL || eigen_residual > SPEC_TOL {
        return Err(CertifyError::SpectralFailure(format!(
            "residuals too large (orthonormality {orthonormality_residual:e}, eigen {eigen_residual:e})"
        )));
    }

    let beta1 = eigenvalues[1];
    let beta = beta1.max(eigenvalues[dim - 1].abs());
    if beta >= 1.0 - SPEC_TOL {
        return Err(CertifyError::NotErgodic(format!(
            "absolute spectral bound beta = {beta} is not below 1 (periodic or nearly decomposable chain)"
        )));
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
        beta1,
        beta,
        orthonormality_residual,
        eigen_residual,
    })
}

/// A reversible chain together with its spectral decomposition; the input of
/// every error and bound computation.
#[derive(Debug, Clone)]
pub struct ErgodicChain {
    chain: ReversibleChain,
    spectrum: SpectralDecomposition,
}

impl ErgodicChain {
    pub fn new(chain: ReversibleChain) -> Result<Self> {
        let spectrum = spectral_decompose(&chain)?;
        Ok(Self { chain, spectrum })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ReversibleChain::from_rows(rows)?)
    }

    pub fn chain(&self) -> &ReversibleChain {
        &self.chain
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    pub fn pi(&self) -> &Distribution {
        self.chain.pi()
    }

    pub fn beta1(&self) -> f64 {
        self.spectrum.beta1
    }

    pub fn beta(&self) -> f64 {
        self.spectrum.beta
    }

    pub fn apply_to_function(&self, f: &StateFunction, k: usize) -> StateFunction {
        self.chain.apply_to_function(f, k)
    }

    pub fn apply_to_distribution(&self, nu: &Distribution, k: usize) -> Distribution {
        self.chain.apply_to_distribution(nu, k)
    }
}

const RANDOM_TRIALS: usize = 64;
const TRIAL_SEED: u64 = 0x005e_ed0f_7e57;
const MAX_PAIR_STATES: usize = 64;

/// Mean-zero trial directions for the operator-norm estimate: eigenfunctions
/// `u_1..`, coordinate differences `e_x - e_y` and a seeded Gaussian batch,
/// each centred and normalised in `p`.
pub fn mean_zero_trial_set(chain: &ErgodicChain, p: LpNorm) -> Vec<Vec<f64>> {
    let dim = chain.dim();
    let pi = chain.pi();
    let mut raw: Vec<Vec<f64>> = chain.spectrum.eigenfunctions[1..]
        .iter()
        .map(|u| u.values().to_vec())
        .collect();
    let paired = dim.min(MAX_PAIR_STATES);
    for x in 0..paired {
        for y in (x + 1)..paired {
            let mut v = vec![0.0; dim];
            v[x] = 1.0;
            v[y] = -1.0;
            raw.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(TRIAL_SEED);
    for _ in 0..RANDOM_TRIALS {
        // Box-Muller keeps us free of a distributions dependency.
        let v = (0..dim)
            .map(|_| {
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        raw.push(v);
    }

    raw.into_iter()
        .filter_map(|v| {
            let s = mean(&StateFunction(v.clone()), pi);
            let centred: Vec<f64> = v.iter().map(|x| x - s).collect();
            let norm = weighted_norm(&centred, pi, p);
            (norm > 1e-12).then(|| centred.iter().map(|x| x / norm).collect())
        })
        .collect()
}

/// Lower estimate of `||P^n||` on mean-zero `l_p`, `p` in {2, 4}: the largest
/// `||P^n g||_p` over [`mean_zero_trial_set`].
pub fn operator_norm_on_mean_zero(chain: &ErgodicChain, n: usize, p: LpNorm) -> Result<f64> {
    if !matches!(p, LpNorm::L2 | LpNorm::L4) {
        return Err(CertifyError::InvalidArgument(
            "operator norm estimate supports only l2 and l4".into(),
        ));
    }
    if n == 0 {
        return Err(CertifyError::InvalidArgument("n must be positive".into()));
    }
    let pi = chain.pi();
    let best = mean_zero_trial_set(chain, p)
        .into_iter()
        .map(|g| {
            let image = chain.apply_to_function(&StateFunction(g), n);
            weighted_norm(image.values(), pi, p)
        })
        .fold(0.0, f64::max);
    Ok(best)
}
