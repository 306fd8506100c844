//! Explicit upper bounds on `e_nu(S_{n,n0}, f)^2`.
//!
//! Two tightness levels are exposed. [`bound_general_start`] keeps the exact
//! stationary error and bounds only the burn-in correction through the
//! aggregates [`v_aggregate`] / [`u_aggregate`]. [`bound_theorem`] replaces
//! every piece by its closed form: `2 ||f||^2 / (n (1 - beta_1))` plus a
//! `beta^{n0}`-damped correction that is `O(n^-2)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::convergence::{density_deviation_sup, inverse_pi_sup};
use crate::error::{CertifyError, Result};
use crate::exact::{stationary_error, EstimatorSpec};
use crate::numeric::beta_power;
use crate::spectral::{weighted_norm, Distribution, ErgodicChain, LpNorm, StateFunction};

/// Function class of the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L2,
    L4,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L2, NormKind::L4, NormKind::Linf];

    pub fn lp(self) -> LpNorm {
        match self {
            NormKind::L2 => LpNorm::L2,
            NormKind::L4 => LpNorm::L4,
            NormKind::Linf => LpNorm::Inf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L2 => "l2",
            NormKind::L4 => "l4",
            NormKind::Linf => "linf",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(NormKind::L2),
            "l4" => Ok(NormKind::L4),
            "linf" => Ok(NormKind::Linf),
            other => Err(CertifyError::InvalidArgument(format!(
                "unknown norm kind {other:?} (expected l2, l4 or linf)"
            ))),
        }
    }
}

/// Chain and start-distribution constants a bound depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub beta1: f64,
    pub beta: f64,
    /// `||nu/pi - 1||_inf`.
    pub c_density: f64,
    /// `||1/pi||_inf`.
    pub c_pi: f64,
}

impl BoundConstants {
    pub fn compute(chain: &ErgodicChain, nu: &Distribution) -> Result<Self> {
        Ok(Self {
            beta1: chain.beta1(),
            beta: chain.beta(),
            c_density: density_deviation_sup(nu, chain.pi())?,
            c_pi: inverse_pi_sup(chain.pi())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub norm_kind: NormKind,
    pub leading_term: f64,
    pub correction_term: f64,
    pub total: f64,
    pub constants: BoundConstants,
}

impl BoundReport {
    fn new(norm_kind: NormKind, leading: f64, correction: f64, constants: BoundConstants) -> Self {
        Self {
            norm_kind,
            leading_term: leading,
            correction_term: correction,
            total: leading + correction,
            constants,
        }
    }
}

fn check_aggregate_args(b: f64, n: usize) {
    assert!(
        (0.0..1.0).contains(&b),
        "aggregate needs b in [0, 1), got {b}"
    );
    assert!(n >= 1, "aggregate needs n >= 1");
}

/// `V(b, n) = sum_{j=1}^n b^j + 2 sum_{j=1}^{n-1} sum_{k=j+1}^n b^k`.
///
/// The inner tail sums are carried backwards in `j`, so every addition is of
/// nonnegative terms and the cost is `O(n)`.
pub fn v_aggregate(b: f64, n: usize) -> f64 {
    check_aggregate_args(b, n);
    let powers = powers(b, n);
    let single: f64 = powers[1..].iter().sum();
    // tail = sum_{k=j+1}^n b^k, for j from n-1 down to 1
    let mut tail = 0.0;
    let mut double = 0.0;
    for j in (1..n).rev() {
        tail += powers[j + 1];
        double += tail;
    }
    single + 2.0 * double
}

/// `U(b, n) = sum_{j=1}^n b^j + 4 sqrt(2) sum_{j=1}^{n-1} sum_{k=j+1}^n b^{(k+j)/2}`.
pub fn u_aggregate(b: f64, n: usize) -> f64 {
    check_aggregate_args(b, n);
    let powers = powers(b, n);
    let half = powers_of(b.sqrt(), n);
    let single: f64 = powers[1..].iter().sum();
    let mut tail = 0.0;
    let mut double = 0.0;
    for j in (1..n).rev() {
        tail += half[j + 1];
        double += half[j] * tail;
    }
    single + 4.0 * SQRT_2 * double
}

fn powers(b: f64, n: usize) -> Vec<f64> {
    powers_of(b, n)
}

/// `[x^0, x^1, ..., x^n]`, each by `powi` to avoid accumulated drift.
fn powers_of(x: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| match i32::try_from(k) {
            Ok(k) => x.powi(k),
            Err(_) => x.powf(k as f64),
        })
        .collect()
}

/// Closed-form cap `V(b, n) <= 2 / (1 - b)^2`.
pub fn v_cap(b: f64) -> f64 {
    2.0 / ((1.0 - b) * (1.0 - b))
}

/// Closed-form cap `U(b, n) <= 4 sqrt(2) / ((1 - b)(1 - sqrt(b)))`.
/// At `b = 0` the denominator is 1.
pub fn u_cap(b: f64) -> f64 {
    4.0 * SQRT_2 / ((1.0 - b) * (1.0 - b.sqrt()))
}

fn validate(chain: &ErgodicChain, nu: &Distribution, f: &StateFunction) -> Result<()> {
    for (what, len) in [("nu", nu.dim()), ("f", f.dim())] {
        if len != chain.dim() {
            return Err(CertifyError::LengthMismatch {
                what,
                len,
                expected: chain.dim(),
            });
        }
    }
    Ok(())
}

/// Exact stationary error plus the aggregate-controlled correction:
///
/// * l2:   `V/n^2 beta^{n0} sqrt(||1/pi||) sqrt(||nu/pi - 1||) ||g||_2^2`
/// * l4:   `U/n^2 beta^{n0} sqrt(||nu/pi - 1||) ||g||_4^2`
/// * linf: `V/n^2 beta^{n0} sqrt(||nu/pi - 1||) ||g||_inf^2`
pub fn bound_general_start(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
    kind: NormKind,
) -> Result<BoundReport> {
    validate(chain, nu, f)?;
    let constants = BoundConstants::compute(chain, nu)?;
    let pi = chain.pi();
    let n = spec.n();
    let nf = n as f64;
    let g = f.centered(pi);
    let g_norm = weighted_norm(g.values(), pi, kind.lp());
    let damping = beta_power(constants.beta, spec.n0() as u64);
    let density = constants.c_density.sqrt();

    let (aggregate, scale) = match kind {
        NormKind::L2 => (
            v_aggregate(constants.beta, n),
            constants.c_pi.sqrt() * density,
        ),
        NormKind::L4 => (u_aggregate(constants.beta, n), density),
        NormKind::Linf => (v_aggregate(constants.beta, n), density),
    };
    let leading = stationary_error(chain, f, n)?;
    let correction = aggregate / (nf * nf) * damping * scale * g_norm * g_norm;
    Ok(BoundReport::new(kind, leading, correction, constants))
}

/// Fully closed-form bounds:
///
/// * l2:   `2||f||_2^2/(n(1-b1)) + 2 sqrt(||1/pi||) sqrt(||nu/pi-1||) beta^{n0} ||f||_2^2 / (n^2 (1-beta)^2)`
/// * l4:   `2||f||_4^2/(n(1-b1)) + 16 sqrt(2) sqrt(||nu/pi-1||) beta^{n0} ||f||_4^2 / (n^2 (1-beta)(1-sqrt(beta)))`
/// * linf: `2||f||_inf^2/(n(1-b1)) + 4 sqrt(||nu/pi-1||) beta^{n0} ||f||_inf^2 / (n^2 (1-beta)^2)`
///
/// The l4 and linf constants absorb `||f - S(f)||_p <= 2 ||f||_p`.
pub fn bound_theorem(
    chain: &ErgodicChain,
    nu: &Distribution,
    f: &StateFunction,
    spec: EstimatorSpec,
    kind: NormKind,
) -> Result<BoundReport> {
    validate(chain, nu, f)?;
    let constants = BoundConstants::compute(chain, nu)?;
    let nf = spec.n() as f64;
    let f_norm = weighted_norm(f.values(), chain.pi(), kind.lp());
    let f_sq = f_norm * f_norm;
    let beta = constants.beta;
    let damping = beta_power(beta, spec.n0() as u64);
    let density = constants.c_density.sqrt();

    let leading = 2.0 * f_sq / (nf * (1.0 - constants.beta1));
    let gap_sq = (1.0 - beta) * (1.0 - beta);
    let correction = match kind {
        NormKind::L2 => 2.0 * constants.c_pi.sqrt() * density * damping * f_sq / (nf * nf * gap_sq),
        NormKind::L4 => {
            16.0 * SQRT_2 * density * damping * f_sq
                / (nf * nf * (1.0 - beta) * (1.0 - beta.sqrt()))
        }
        NormKind::Linf => 4.0 * density * damping * f_sq / (nf * nf * gap_sq),
    };
    Ok(BoundReport::new(kind, leading, correction, constants))
}
