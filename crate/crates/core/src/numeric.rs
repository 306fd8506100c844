//! Small numeric helpers shared across modules.

/// Pairwise (cascade) summation with a fixed split, so the result depends only
/// on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Smallest value `beta^k` is clamped to for `beta > 0`. Underflow to zero
/// would certify a vanishing correction that is not actually zero.
pub const MIN_BETA_POWER: f64 = 1e-320;

/// `beta^k` for `beta` in `[0, 1)`, evaluated in log space and clamped at
/// [`MIN_BETA_POWER`]. `beta = 0` is exact: `0^0 = 1`, `0^k = 0`.
pub fn beta_power(beta: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if beta == 0.0 {
        return 0.0;
    }
    let log = k as f64 * beta.ln();
    if log > -700.0 {
        beta.powf(k as f64)
    } else {
        log.exp().max(MIN_BETA_POWER)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn beta_power_edges() {
        assert_eq!(beta_power(0.0, 0), 1.0);
        assert_eq!(beta_power(0.0, 3), 0.0);
        assert!((beta_power(0.5, 3) - 0.125).abs() < 1e-16);
        assert_eq!(beta_power(0.5, 10_000), MIN_BETA_POWER);
        assert!(beta_power(0.9, 7000) > 0.0);
    }
}
