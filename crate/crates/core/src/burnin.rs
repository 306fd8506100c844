//! Burn-in selection for a fixed budget of `N` transitions.
//!
//! The bound functions
//!
//! ```text
//! b_inf(n, n0)^2 = 2/(n(1-beta)) + 2 C beta^{n0} / (n^2 (1-beta)^2)
//! b_4(n, n0)^2   = 2/(n(1-beta)) +   C beta^{n0} / (n^2 (1-beta)(1-sqrt(beta)))
//! ```
//!
//! are evaluated in log space so that constants up to `C = 1e300` work. The
//! variant with `1/n` in the correction term is available as
//! [`Correction::Linear`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CertifyError, Result};
use crate::exact::stationary_worst_case;

/// Integers closer than this to `ln C / ln(1/beta)` are flagged as borderline.
pub const BORDERLINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetQuery {
    pub total: u64,
    pub beta: f64,
    /// `ln C`; kept in log form so huge constants do not overflow.
    pub ln_c: f64,
}

impl BudgetQuery {
    pub fn new(total: u64, beta: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(CertifyError::InvalidArgument(format!(
                "C must be positive and finite, got {c}"
            )));
        }
        Self::from_ln_c(total, beta, c.ln())
    }

    pub fn from_ln_c(total: u64, beta: f64, ln_c: f64) -> Result<Self> {
        if total < 2 {
            return Err(CertifyError::InvalidArgument(format!(
                "budget N must be at least 2, got {total}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(CertifyError::InvalidArgument(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        if !ln_c.is_finite() {
            return Err(CertifyError::InvalidArgument("ln C must be finite".into()));
        }
        Ok(Self { total, beta, ln_c })
    }

    pub fn with_total(self, total: u64) -> Result<Self> {
        Self::from_ln_c(total, self.beta, self.ln_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    B4,
    Binf,
}

impl BoundKind {
    pub const ALL: [BoundKind; 2] = [BoundKind::B4, BoundKind::Binf];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::B4 => "b4",
            BoundKind::Binf => "binf",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b4" => Ok(BoundKind::B4),
            "binf" => Ok(BoundKind::Binf),
            other => Err(CertifyError::InvalidArgument(format!(
                "unknown bound kind {other:?} (expected b4 or binf)"
            ))),
        }
    }
}

/// Power of `n` in the denominator of the correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    /// `1/n^2`, matching the main error theorem.
    #[default]
    Quadratic,
    /// `1/n`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Suggested,
    Optimized,
    HalfBudget,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Suggested => "suggested",
            Strategy::Optimized => "optimized",
            Strategy::HalfBudget => "half_budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurninPlan {
    pub n0: u64,
    pub n: u64,
    pub total: u64,
    pub bound_value: f64,
    pub strategy: Strategy,
    pub kind: BoundKind,
    /// Set when the requested burn-in did not fit in the budget and was cut
    /// to `N - 1`.
    pub clamped: bool,
    /// `bound_value / sqrt(2/(N(1-beta)))`: the price paid against a run of
    /// length `N` started in equilibrium.
    pub penalty_ratio: f64,
}

/// Squared bound in log space. `n >= 1`.
fn ln_bound_sq(q: &BudgetQuery, n: u64, n0: u64, kind: BoundKind, corr: Correction) -> f64 {
    let nf = n as f64;
    let ln_gap = (-q.beta).ln_1p();
    let ln_lead = std::f64::consts::LN_2 - nf.ln() - ln_gap;

    let ln_damp = if n0 == 0 {
        0.0
    } else if q.beta == 0.0 {
        return ln_lead;
    } else {
        n0 as f64 * q.beta.ln()
    };
    let ln_den = match kind {
        BoundKind::Binf => 2.0 * ln_gap - std::f64::consts::LN_2,
        BoundKind::B4 => ln_gap + (-q.beta.sqrt()).ln_1p(),
    };
    let ln_n_pow = match corr {
        Correction::Quadratic => 2.0 * nf.ln(),
        Correction::Linear => nf.ln(),
    };
    let ln_corr = q.ln_c + ln_damp - ln_n_pow - ln_den;
    log_add_exp(ln_lead, ln_corr)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `b_kind(n, n0)` with the default quadratic correction.
pub fn bound_function(q: &BudgetQuery, n: u64, n0: u64, kind: BoundKind) -> f64 {
    bound_function_with(q, n, n0, kind, Correction::Quadratic)
}

pub fn bound_function_with(
    q: &BudgetQuery,
    n: u64,
    n0: u64,
    kind: BoundKind,
    corr: Correction,
) -> f64 {
    assert!(n >= 1, "bound function needs n >= 1");
    (0.5 * ln_bound_sq(q, n, n0, kind, corr)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuggestedBurnin {
    pub n0: u64,
    /// `ln C / ln(1/beta)` before rounding.
    pub ratio: f64,
    /// The ratio is within [`BORDERLINE_TOL`] of an integer, so the ceiling
    /// depends on the last bits of the inputs.
    pub borderline: bool,
}

/// `max(ceil(ln C / ln(1/beta)), 0)`; at this burn-in `C beta^{n0} <= 1`.
pub fn suggested_burnin(beta: f64, ln_c: f64) -> SuggestedBurnin {
    assert!((0.0..1.0).contains(&beta), "beta must lie in [0, 1)");
    if ln_c <= 0.0 || beta == 0.0 {
        return SuggestedBurnin {
            n0: 0,
            ratio: if beta == 0.0 { 0.0 } else { ln_c / -beta.ln() },
            borderline: false,
        };
    }
    // ln(1/beta) = -ln(1 - (1 - beta)); 1 - beta is exact for beta >= 1/2.
    let rate = -(-(1.0 - beta)).ln_1p();
    let ratio = ln_c / rate;
    let nearest = ratio.round();
    SuggestedBurnin {
        n0: ratio.ceil() as u64,
        ratio,
        borderline: (ratio - nearest).abs() < BORDERLINE_TOL,
    }
}

fn stationary_scale(q: &BudgetQuery) -> f64 {
    (2.0 / (q.total as f64 * (1.0 - q.beta))).sqrt()
}

fn make_plan(
    q: &BudgetQuery,
    n0: u64,
    kind: BoundKind,
    strategy: Strategy,
    clamped: bool,
) -> BurninPlan {
    let n = q.total - n0;
    let bound_value = bound_function(q, n, n0, kind);
    BurninPlan {
        n0,
        n,
        total: q.total,
        bound_value,
        strategy,
        kind,
        clamped,
        penalty_ratio: bound_value / stationary_scale(q),
    }
}

pub fn suggested_plan(q: &BudgetQuery, kind: BoundKind) -> BurninPlan {
    let s = suggested_burnin(q.beta, q.ln_c).n0;
    let clamped = s >= q.total;
    make_plan(q, s.min(q.total - 1), kind, Strategy::Suggested, clamped)
}

/// Exact minimiser over `n0 in 0..N` of `b_kind(N - n0, n0)`, ties to the
/// smaller `n0`. The scan is parallel but the reduction is order independent.
pub fn optimize_burnin(q: &BudgetQuery, kind: BoundKind) -> BurninPlan {
    let n0 = argmin_burnin(q, kind, Correction::Quadratic);
    make_plan(q, n0, kind, Strategy::Optimized, false)
}

pub fn argmin_burnin(q: &BudgetQuery, kind: BoundKind, corr: Correction) -> u64 {
    let total = q.total;
    let (_, n0) = (0..total)
        .into_par_iter()
        .map(|n0| (ln_bound_sq(q, total - n0, n0, kind, corr), n0))
        .reduce(|| (f64::INFINITY, u64::MAX), better);
    n0
}

fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => a,
        Some(std::cmp::Ordering::Greater) => b,
        _ => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// `n0 = floor(N/2)`.
pub fn half_budget_plan(q: &BudgetQuery, kind: BoundKind) -> BurninPlan {
    make_plan(q, q.total / 2, kind, Strategy::HalfBudget, false)
}

pub fn plan(q: &BudgetQuery, kind: BoundKind, strategy: Strategy) -> BurninPlan {
    match strategy {
        Strategy::Suggested => suggested_plan(q, kind),
        Strategy::Optimized => optimize_burnin(q, kind),
        Strategy::HalfBudget => half_budget_plan(q, kind),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub total: u64,
    pub beta: f64,
    pub n_opt_b4: u64,
    pub n_opt_binf: u64,
    pub n0_suggested: u64,
}

pub const TABLE1_SETTINGS: [(u64, f64); 6] = [
    (10_000, 0.9),
    (100_000, 0.9),
    (10_000, 0.99),
    (100_000, 0.99),
    (10_000, 0.999),
    (100_000, 0.999),
];

/// Optimal and suggested burn-in for the six reference budgets at `C = 1e30`.
pub fn table1() -> Vec<Table1Row> {
    let ln_c = 30.0 * std::f64::consts::LN_10;
    TABLE1_SETTINGS
        .iter()
        .map(|&(total, beta)| {
            let q = BudgetQuery::from_ln_c(total, beta, ln_c).expect("fixed settings are valid");
            Table1Row {
                total,
                beta,
                n_opt_b4: optimize_burnin(&q, BoundKind::B4).n0,
                n_opt_binf: optimize_burnin(&q, BoundKind::Binf).n0,
                n0_suggested: suggested_burnin(beta, ln_c).n0,
            }
        })
        .collect()
}

/// How the burn-in of a figure curve is chosen at each budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum N0Rule {
    Fixed(u64),
    Suggested,
    Optimized,
    HalfBudget,
}

impl N0Rule {
    fn label(self, kind: BoundKind) -> String {
        let k = kind.name();
        match self {
            N0Rule::Fixed(n0) => format!("{k}_fixed_{n0}"),
            N0Rule::Suggested => format!("{k}_suggested"),
            N0Rule::Optimized => format!("{k}_optimized"),
            N0Rule::HalfBudget => format!("{k}_half"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePoint {
    pub total: u64,
    pub n0: u64,
    pub curve: String,
    pub value: f64,
}

/// Reference curve `e_pi(S_N, u_1) = sqrt(W(N, beta_1)) / N`.
pub fn stationary_reference(beta1: f64, total: u64) -> f64 {
    stationary_worst_case(beta1, total as usize).sqrt()
}

/// `points_per_decade` log-spaced budgets from `10^lo` to `10^hi`, deduplicated.
pub fn log_grid(lo: u32, hi: u32, points_per_decade: u32) -> Vec<u64> {
    assert!(lo <= hi && points_per_decade >= 1);
    let steps = (hi - lo) * points_per_decade;
    let mut grid: Vec<u64> = (0..=steps)
        .map(|i| {
            let e = lo as f64 + i as f64 / points_per_decade as f64;
            10f64.powf(e).round() as u64
        })
        .collect();
    grid.dedup();
    grid
}

/// Bound curves over a budget grid, one [`FigurePoint`] per defined value, plus
/// the stationary reference with `beta_1 = beta`. Fixed burn-ins that do not
/// fit in a budget are skipped at that budget.
pub fn figure_series(
    beta: f64,
    ln_c: f64,
    grid: &[u64],
    rules: &[N0Rule],
    kind: BoundKind,
) -> Result<Vec<FigurePoint>> {
    let mut out = Vec::new();
    for &total in grid {
        let q = BudgetQuery::from_ln_c(total, beta, ln_c)?;
        for &rule in rules {
            let n0 = match rule {
                N0Rule::Fixed(n0) if n0 >= total => continue,
                N0Rule::Fixed(n0) => n0,
                N0Rule::Suggested => {
                    let s = suggested_burnin(beta, ln_c).n0;
                    if s >= total {
                        continue;
                    }
                    s
                }
                N0Rule::Optimized => argmin_burnin(&q, kind, Correction::Quadratic),
                N0Rule::HalfBudget => total / 2,
            };
            out.push(FigurePoint {
                total,
                n0,
                curve: rule.label(kind),
                value: bound_function(&q, total - n0, n0, kind),
            });
        }
        out.push(FigurePoint {
            total,
            n0: 0,
            curve: "stationary".into(),
            value: stationary_reference(beta, total),
        });
    }
    Ok(out)
}

/// Several fixed burn-ins around the suggested one, plus the adaptive rules.
pub fn figure1_rules() -> Vec<N0Rule> {
    vec![
        N0Rule::Fixed(6000),
        N0Rule::Fixed(6500),
        N0Rule::Fixed(8000),
        N0Rule::Fixed(10000),
        N0Rule::Fixed(20000),
        N0Rule::Suggested,
        N0Rule::Optimized,
    ]
}

/// Half budget against the suggested burn-in.
pub fn figure2_rules() -> Vec<N0Rule> {
    vec![N0Rule::HalfBudget, N0Rule::Suggested]
}

/// CSV with header `N,n0,kind,value`; values carry 17 significant digits.
pub fn write_csv<W: std::io::Write>(mut w: W, points: &[FigurePoint]) -> std::io::Result<()> {
    writeln!(w, "N,n0,kind,value")?;
    for p in points {
        writeln!(w, "{},{},{},{:.16e}", p.total, p.n0, p.curve, p.value)?;
    }
    Ok(())
}
