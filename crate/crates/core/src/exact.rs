//! Exact mean-square error of the time average `S_{n,n0}(f)`.
//!
//! For a stationary start the error is diagonal in the eigenbasis:
//! `e_pi(S_n, f)^2 = n^-2 sum_{k>=1} a_k^2 W(n, beta_k)`. A general start
//! `nu` adds two correction sums built from `L_i(h) = <d_i, h>_pi`:
//!
//! ```text
//! e_nu^2 = e_pi^2 + n^-2 sum_{j=1..n} L_{j+n0}(g^2)
//!                 + 2 n^-2 sum_{j<k<=n} L_{j+n0}(g P^{k-j} g),    g = f - S(f)
//! ```

use serde::Serialize;

use crate::convergence::deviation_from_law;
use crate::error::{CertifyError, Result};
use crate::numeric::pairwise_sum;
use crate::spectral::{mean, weighted_inner, Distribution, ErgodicChain, StateFunction};

/// Default cap on `(n + n0) |D|^2` for [`exact_error`].
pub const DEFAULT_WORK_CAP: f64 = 1e9;

/// Largest number of stored `f64` entries (`n |D|`) in the streamed evaluation.
pub const STORAGE_CAP: f64 = 1.5e8;

/// Cap on the number of enumerated paths in [`path_enumeration_oracle`].
pub const ORACLE_PATH_CAP: f64 = 1e7;

/// Gap below which the asymptotic constant is reported as unbounded.
const GAP_FLOOR: f64 = 1e-12;

/// The averaged steps `n >= 1` and burn-in `n0 >= 0`; the budget is `n + n0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimatorSpec {
    n: usize,
    n0: usize,
}

impl EstimatorSpec {
    pub fn new(n: usize, n0: usize) -> Result<Self> {
        if n == 0 {
            return Err(CertifyError::InvalidArgument(
                "the number of averaged steps n must be at least 1".into(),
            ));
        }
        Ok(Self { n, n0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn total(&self) -> usize {
        self.n + self.n0
    }
}

/// `W(n, b) = (n (1 - b^2) - 2 b (1 - b^n)) / (1 - b)^2`, the variance
/// aggregate of one eigen-direction (`W(n, b) = sum_{i,j<=n} b^{|i-j|}`).
///
/// For `b` close to 1 the closed form cancels catastrophically, so when
/// `n (1 - b) < 1/2` the numerator is expanded as an alternating binomial
/// series instead.
pub fn w_factor(n: usize, b: f64) -> f64 {
    assert!(n >= 1, "w_factor needs n >= 1");
    assert!(
        (-1.0..1.0).contains(&b),
        "w_factor needs b in [-1, 1), got {b}"
    );
    let nf = n as f64;
    let c = 1.0 - b;
    if b > 0.0 && nf * c < 0.5 && n >= 2 {
        // n c - (1 - (1 - c)^n) = sum_{k=2}^n C(n,k) (-c)^k; divided by c^2.
        let mut term = nf * (nf - 1.0) / 2.0;
        let mut sum = term;
        let mut k = 2usize;
        while k < n {
            term *= -((n - k) as f64) / ((k + 1) as f64) * c;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            k += 1;
        }
        return nf + 2.0 * b * sum;
    }
    let bn = match i32::try_from(n) {
        Ok(k) => b.powi(k),
        Err(_) => b.powf(nf),
    };
    nf + 2.0 * b * (nf * c - (1.0 - bn)) / (c * c)
}

/// `sup_{||f||_2 <= 1} e_pi(S_n, f)^2 = W(n, beta_1) / n^2`.
pub fn stationary_worst_case(beta1: f64, n: usize) -> f64 {
    let nf = n as f64;
    w_factor(n, beta1) / (nf * nf)
}

/// `e_pi(S_n, f)^2` from the spectral coefficients.
pub fn stationary_error(chain: &ErgodicChain, f: &StateFunction, n: usize) -> Result<f64> {
    check_len(chain, f.dim(), "f")?;
    if n == 0 {
        return Err(CertifyError::InvalidArgument("n must be at least 1".into()));
    }
    let spectrum = chain.spectrum();
    let coeffs = spectrum.coefficients(f.centered(chain.pi()).values(), chain.pi());
    let nf = n as f64;
    let terms: Vec<f64> = coeffs[1..]
        .iter()
        .zip(&spectrum.eigenvalues()[1..])
        .map(|(a, &b)| a * a * w_factor(n, b))
        .collect();
    Ok(pairwise_sum(&terms) / (nf * nf))
}

/// Closed-form worst case over the unit `l_2` ball, attained at `u_1`.
pub fn worst_case_stationary(chain: &ErgodicChain, n: usize) -> f64 {
    stationary_worst_case(chain.beta1(), n)
}

/// `sum_{k>=1} a_k^2 (1 + beta_k) / (1 - beta_k)`, the limit of `n e^2`.
/// `None` when the spectral gap is numerically zero.
pub fn asymptotic_constant(chain: &ErgodicChain, f: &StateFunction) -> Option<f64> {
    let spectrum = chain.spectrum();
    if spectrum.spectral_gap() < GAP_FLOOR {
        return None;
    }
    let coeffs = spectrum.coefficients(f.centered(chain.pi()).values(), chain.pi());
    Some(
        coeffs[1..]
            .iter()
            .zip(&spectrum.eigenvalues()[1..])
            .map(|(a, b)| a * a * (1.0 + b) / (1.0 - b))
            .sum(),
    )
}

/// Exact error of one `(nu, f, n, n0)` query, with the three terms of the
/// error-transfer identity reported separately.
#[derive(Debug, Clone, Serialize)]
pub struct ExactErrorReport {
    /// `e_nu(S_{n,n0}, f)^2`.
    pub mse: f64,
    /// `e_pi(S_n, f)^2`.
    pub stationary_mse: f64,
    /// `n^-2 sum_j L_{j+n0}(g^2)`.
    pub diagonal_correction: f64,
    /// `2 n^-2 sum_{j<k} L_{j+n0}(g P^{k-j} g)`.
    pub cross_correction: f64,
    /// Sum of the two correction terms.
    pub correction: f64,
    /// `None` flags an unbounded constant (spectral gap below 1e-12).
    pub asymptotic_constant: Option<f64>,
}

fn check_len(chain: &ErgodicChain, len: usize, what: &'static str) -> Result<()> {
    if len != chain.dim() {
        return Err(CertifyError::LengthMismatch {
            what,
            len,
            expected: chain.dim(),
        });
    }
    Ok(())
}

pub fn exact_error(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
) -> Result<ExactErrorReport> {
    exact_error_capped(chain, nu, f, spec, DEFAULT_WORK_CAP)
}

/// [`exact_error`] with an explicit cap on `(n + n0) |D|^2`.
///
/// Precomputes the prefix sums `H_M = sum_{m=1..M} P^m g` once, then streams
/// `d_{j+n0}` forward, so the double sum costs `O((n + n0) |D|^2)`:
/// `sum_{j<k} L_{j+n0}(g P^{k-j} g) = sum_j <d_{j+n0}, g H_{n-j}>_pi`.
pub fn exact_error_capped(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
    work_cap: f64,
) -> Result<ExactErrorReport> {
    let dim = chain.dim();
    check_len(chain, nu.dim(), "nu")?;
    check_len(chain, f.dim(), "f")?;
    let (n, n0) = (spec.n(), spec.n0());
    let work = spec.total() as f64 * (dim * dim) as f64;
    if work > work_cap {
        return Err(CertifyError::BudgetOverflow {
            work,
            cap: work_cap,
        });
    }
    let stored = (n * dim) as f64;
    if stored > STORAGE_CAP {
        return Err(CertifyError::BudgetOverflow {
            work: stored,
            cap: STORAGE_CAP,
        });
    }

    let pi = chain.pi();
    let p = chain.chain().transition();
    let g = f.centered(pi).into_values();
    let g_sq: Vec<f64> = g.iter().map(|v| v * v).collect();

    // prefix[M * dim ..] holds H_M for M = 0..n-1.
    let mut prefix = vec![0.0; n * dim];
    let mut h = g.clone();
    for m in 1..n {
        h = p.apply(&h);
        let (before, after) = prefix.split_at_mut(m * dim);
        let prev = &before[(m - 1) * dim..];
        for ((out, a), b) in after[..dim].iter_mut().zip(prev).zip(&h) {
            *out = a + b;
        }
    }

    let mut law = chain.apply_to_distribution(nu, n0).weights().to_vec();
    let mut diagonal = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n.saturating_sub(1));
    let mut weighted = vec![0.0; dim];
    for j in 1..=n {
        law = p.apply_left(&law);
        let d = deviation_from_law(&law, pi);
        diagonal.push(weighted_inner(&d, &g_sq, pi));
        if j < n {
            let tail = &prefix[(n - j) * dim..(n - j + 1) * dim];
            for ((w, gx), hx) in weighted.iter_mut().zip(&g).zip(tail) {
                *w = gx * hx;
            }
            cross.push(weighted_inner(&d, &weighted, pi));
        }
    }

    let nf = n as f64;
    let stationary_mse = stationary_error(chain, f, n)?;
    let diagonal_correction = pairwise_sum(&diagonal) / (nf * nf);
    let cross_correction = 2.0 * pairwise_sum(&cross) / (nf * nf);
    let correction = diagonal_correction + cross_correction;
    Ok(ExactErrorReport {
        mse: (stationary_mse + correction).max(0.0),
        stationary_mse,
        diagonal_correction,
        cross_correction,
        correction,
        asymptotic_constant: asymptotic_constant(chain, f),
    })
}

/// Term-by-term evaluation of the error-transfer identity, recomputing every
/// `d_i` and `P^m g` from scratch: `O(n^2 (n + n0) |D|^2)`. Cross-check only.
pub fn exact_error_naive(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
) -> Result<f64> {
    if spec.n() > 50 {
        return Err(CertifyError::InvalidArgument(
            "naive evaluation is limited to n <= 50".into(),
        ));
    }
    let pi = chain.pi();
    let g = StateFunction::from_raw(f.centered(pi).into_values());
    let l = |i: usize, h: &[f64]| -> f64 {
        let law = chain.apply_to_distribution(nu, i);
        weighted_inner(&deviation_from_law(law.weights(), pi), h, pi)
    };
    let (n, n0) = (spec.n(), spec.n0());
    let nf = n as f64;
    let g_sq: Vec<f64> = g.values().iter().map(|v| v * v).collect();
    let mut diagonal = 0.0;
    for j in 1..=n {
        diagonal += l(j + n0, &g_sq);
    }
    let mut cross = 0.0;
    for j in 1..n {
        for k in (j + 1)..=n {
            let pg = chain.apply_to_function(&g, k - j);
            let prod: Vec<f64> = g
                .values()
                .iter()
                .zip(pg.values())
                .map(|(a, b)| a * b)
                .collect();
            cross += l(j + n0, &prod);
        }
    }
    Ok(stationary_error(chain, f, n)? + diagonal / (nf * nf) + 2.0 * cross / (nf * nf))
}

/// Ground truth by brute force: `E |S_{n,n0}(f) - S(f)|^2` summed over every
/// path `(x_0, ..., x_{n+n0})` with weight `nu(x_0) p(x_0,x_1) ... `.
pub fn path_enumeration_oracle(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
) -> Result<f64> {
    let dim = chain.dim();
    check_len(chain, nu.dim(), "nu")?;
    check_len(chain, f.dim(), "f")?;
    let paths = (dim as f64).powi(spec.total() as i32 + 1);
    if paths > ORACLE_PATH_CAP {
        return Err(CertifyError::TooLarge {
            paths,
            cap: ORACLE_PATH_CAP,
        });
    }

    struct Walk<'a> {
        p: &'a crate::spectral::TransitionMatrix,
        f: &'a [f64],
        target: f64,
        n: usize,
        n0: usize,
        last: usize,
    }

    impl Walk<'_> {
        fn visit(&self, state: usize, depth: usize, weight: f64, sum: f64) -> f64 {
            let sum = if depth > self.n0 {
                sum + self.f[state]
            } else {
                sum
            };
            if depth == self.last {
                let err = sum / self.n as f64 - self.target;
                return weight * err * err;
            }
            (0..self.f.len())
                .filter_map(|next| {
                    let p = self.p.get(state, next);
                    (p > 0.0).then(|| self.visit(next, depth + 1, weight * p, sum))
                })
                .sum()
        }
    }

    let walk = Walk {
        p: chain.chain().transition(),
        f: f.values(),
        target: mean(f, chain.pi()),
        n: spec.n(),
        n0: spec.n0(),
        last: spec.total(),
    };
    Ok((0..dim)
        .filter(|&x| nu[x] > 0.0)
        .map(|x| walk.visit(x, 0, nu[x], 0.0))
        .sum())
}
