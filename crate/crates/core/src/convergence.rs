//! Distances to stationarity: chi-square contrast, total variation, the
//! density deviation `d_k` of `nu P^k` against `pi`, and the functional
//! `L_k(h) = <d_k, h>_pi`.

use serde::Serialize;

use crate::error::{CertifyError, Result};
use crate::spectral::{
    mean, weighted_inner, weighted_norm, Distribution, ErgodicChain, LpNorm, StateFunction,
};
use crate::tol::MIN_MASS;

fn check_positive(mu: &Distribution) -> Result<()> {
    match mu.weights().iter().position(|&w| w < MIN_MASS) {
        Some(state) => Err(CertifyError::ZeroMass {
            state,
            value: mu[state],
        }),
        None => Ok(()),
    }
}

fn check_dims(nu: &Distribution, mu: &Distribution) -> Result<()> {
    if nu.dim() != mu.dim() {
        return Err(CertifyError::LengthMismatch {
            what: "distribution",
            len: nu.dim(),
            expected: mu.dim(),
        });
    }
    Ok(())
}

/// `chi^2(nu, mu) = sum (nu - mu)^2 / mu`.
pub fn chi2_contrast(nu: &Distribution, mu: &Distribution) -> Result<f64> {
    check_dims(nu, mu)?;
    check_positive(mu)?;
    Ok(nu
        .weights()
        .iter()
        .zip(mu.weights())
        .map(|(a, b)| (a - b) * (a - b) / b)
        .sum())
}

/// `||nu - mu||_tv = (1/2) sum |nu - mu|`.
pub fn total_variation(nu: &Distribution, mu: &Distribution) -> Result<f64> {
    check_dims(nu, mu)?;
    Ok(0.5
        * nu.weights()
            .iter()
            .zip(mu.weights())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// `||nu/pi - 1||_inf`.
pub fn density_deviation_sup(nu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_dims(nu, pi)?;
    check_positive(pi)?;
    Ok(nu
        .weights()
        .iter()
        .zip(pi.weights())
        .map(|(a, b)| (a / b - 1.0).abs())
        .fold(0.0, f64::max))
}

/// `||1/pi||_inf = 1 / min pi`.
pub fn inverse_pi_sup(pi: &Distribution) -> Result<f64> {
    check_positive(pi)?;
    Ok(1.0 / pi.weights().iter().copied().fold(f64::INFINITY, f64::min))
}

/// `d_k = nu P^k / pi - 1`, equivalently
/// `d_k(x) = sum_y nu(y)/pi(y) (p^k(x,y) - pi(y))` for reversible `P`.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationFunction {
    pub k: usize,
    pub values: StateFunction,
}

impl DeviationFunction {
    /// `||d_k||_2`, which equals `sqrt(chi^2(nu P^k, pi))`.
    pub fn l2_norm(&self, pi: &Distribution) -> f64 {
        weighted_norm(self.values.values(), pi, LpNorm::L2)
    }

    /// `||d_k||_inf = ||nu P^k / pi - 1||_inf`.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .values()
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `||d_k||_1 = 2 ||nu P^k - pi||_tv`.
    pub fn l1_norm(&self, pi: &Distribution) -> f64 {
        weighted_norm(self.values.values(), pi, LpNorm::L1)
    }

    pub fn mean(&self, pi: &Distribution) -> f64 {
        mean(&self.values, pi)
    }

    /// `L_k(h) = <d_k, h>_pi`.
    pub fn pair(&self, h: &[f64], pi: &Distribution) -> f64 {
        weighted_inner(self.values.values(), h, pi)
    }
}

pub(crate) fn deviation_from_law(law: &[f64], pi: &Distribution) -> Vec<f64> {
    law.iter()
        .zip(pi.weights())
        .map(|(m, p)| m / p - 1.0)
        .collect()
}

pub fn deviation_function(
    chain: &ErgodicChain,
    nu: &Distribution,
    k: usize,
) -> Result<DeviationFunction> {
    check_dims(nu, chain.pi())?;
    check_positive(chain.pi())?;
    let law = chain.apply_to_distribution(nu, k);
    Ok(DeviationFunction {
        k,
        values: StateFunction::from_raw(deviation_from_law(law.weights(), chain.pi())),
    })
}

/// `L_k(h)`, evaluated exactly through `d_k`.
pub fn l_functional(
    chain: &ErgodicChain,
    nu: &Distribution,
    k: usize,
    h: &StateFunction,
) -> Result<f64> {
    if k == 0 {
        return Err(CertifyError::InvalidArgument("L_k needs k >= 1".into()));
    }
    Ok(deviation_function(chain, nu, k)?.pair(h.values(), chain.pi()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi2() -> Distribution {
        Distribution::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap()
    }

    fn two_state() -> ErgodicChain {
        ErgodicChain::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]]).unwrap()
    }

    #[test]
    fn chi2_examples() {
        let pi = pi2();
        assert_eq!(chi2_contrast(&pi, &pi).unwrap(), 0.0);
        let delta = Distribution::point_mass(2, 0);
        assert!((chi2_contrast(&delta, &pi).unwrap() - 0.5).abs() < 1e-15);
        let half = Distribution::uniform(2);
        assert!((chi2_contrast(&half, &pi).unwrap() - 0.125).abs() < 1e-15);
        let err = chi2_contrast(&pi, &Distribution::point_mass(2, 0)).unwrap_err();
        assert!(matches!(err, CertifyError::ZeroMass { state: 1, .. }));
    }

    #[test]
    fn total_variation_examples() {
        let pi = pi2();
        assert_eq!(total_variation(&pi, &pi).unwrap(), 0.0);
        let a = Distribution::point_mass(2, 0);
        let b = Distribution::point_mass(2, 1);
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        let half = Distribution::uniform(2);
        assert!((total_variation(&half, &pi).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn deviation_of_stationary_start_vanishes() {
        let chain = two_state();
        for k in [0, 1, 5] {
            let d = deviation_function(&chain, chain.pi(), k).unwrap();
            assert!(d.values.values().iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn deviation_norms_match_distances() {
        let chain = two_state();
        let pi = chain.pi();
        let nu = Distribution::point_mass(2, 0);
        let d0 = deviation_function(&chain, &nu, 0).unwrap();
        assert!((d0.l2_norm(pi).powi(2) - chi2_contrast(&nu, pi).unwrap()).abs() < 1e-12);

        let d1 = deviation_function(&chain, &nu, 1).unwrap();
        // ||nu/pi - 1||_inf = max(1/(2/3) - 1, 1) = 1
        let bound = 0.1 * density_deviation_sup(&nu, pi).unwrap().sqrt();
        assert!((bound - 0.1).abs() < 1e-15);
        assert!(d1.l2_norm(pi) <= bound + 1e-15);

        let law = chain.apply_to_distribution(&nu, 1);
        assert!((d1.l1_norm(pi) - 2.0 * total_variation(&law, pi).unwrap()).abs() < 1e-14);
        assert!((d1.sup_norm() - density_deviation_sup(&law, pi).unwrap()).abs() < 1e-14);
        assert!(d1.mean(pi).abs() < 1e-14);
    }

    #[test]
    fn l_functional_trivial_cases() {
        let chain = two_state();
        let h = StateFunction::new(vec![1.5, -4.0]).unwrap();
        assert!(l_functional(&chain, chain.pi(), 3, &h).unwrap().abs() < 1e-14);
        let c = StateFunction::constant(2, 7.0);
        let nu = Distribution::point_mass(2, 1);
        assert!(l_functional(&chain, &nu, 2, &c).unwrap().abs() < 1e-13);
        assert!(l_functional(&chain, &nu, 0, &c).is_err());
    }

    #[test]
    fn l_functional_dual_path() {
        // d_k = P^k (nu/pi - 1) by reversibility; pair it with u_1 through the
        // spectrum: <d_2, u_1> = beta_1^2 <nu/pi - 1, u_1>.
        let chain = two_state();
        let pi = chain.pi();
        let nu = Distribution::point_mass(2, 0);
        let u1 = chain.spectrum().eigenfunction(1).clone();
        let direct = l_functional(&chain, &nu, 2, &u1).unwrap();
        let r: Vec<f64> = deviation_from_law(nu.weights(), pi);
        let spectral = chain.beta1().powi(2) * weighted_inner(&r, u1.values(), pi);
        assert!((direct - spectral).abs() < 1e-12);
    }

    #[test]
    fn inverse_pi_and_density() {
        let pi = pi2();
        assert!((inverse_pi_sup(&pi).unwrap() - 3.0).abs() < 1e-14);
        let nu = Distribution::point_mass(2, 1);
        assert!((density_deviation_sup(&nu, &pi).unwrap() - 2.0).abs() < 1e-14);
        let bad = Distribution::new(vec![1.0, 0.0]).unwrap();
        assert!(inverse_pi_sup(&bad).is_err());
    }
}
