//! Least-squares drift and variance-rate estimators for increments on an
//! irregular time grid, and the Kolmogorov bound for the variance-rate
//! estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bounds::{BoundReport, TheoremId};
use crate::error::{Error, Result};
use crate::model::DiscreteLaw;
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilitySpec {
    /// t_0 = 0 < t_1 < … < t_n
    pub times: Vec<f64>,
    pub delta: f64,
    /// maximal degree of the dependency graph of the increments
    pub m: usize,
    /// V[ν̂_n] ≥ k²/n
    pub k: f64,
    /// E|X_i/κ_i|^δ for i = 1..n
    pub moments: Vec<f64>,
}

impl VolatilitySpec {
    pub fn new(times: Vec<f64>, delta: f64, m: usize, k: f64, moments: Vec<f64>) -> Result<Self> {
        kappas(&times)?;
        if moments.len() + 1 != times.len() {
            return Err(Error::InvalidInput(format!(
                "{} moments for {} increments",
                moments.len(),
                times.len() - 1
            )));
        }
        if moments.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidInput("moments must be finite and non-negative".into()));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput("K must be positive".into()));
        }
        Ok(Self { times, delta, m, k, moments })
    }

    pub fn n(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_n(&self) -> f64 {
        self.times[self.n()]
    }
}

/// κ_k = t_k − t_{k−1}; checks t_0 = 0 and strict increase.
pub fn kappas(times: &[f64]) -> Result<Vec<f64>> {
    if times.len() < 2 {
        return Err(Error::InvalidInput("need at least t_0 and t_1".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidInput(format!("t_0 must be 0, got {}", times[0])));
    }
    let k: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if k.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput("times must be finite and strictly increasing".into()));
    }
    Ok(k)
}

/// Time grid 0, 1, …, n.
pub fn unit_times(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolatilityEstimates {
    pub e_hat: f64,
    pub nu_hat: f64,
    pub unbiased: bool,
}

/// ê_n = (1/t_n)ΣX_k and ν̂_n = (1/n)Σ X_k²/κ_k − (t_n/n)ê_n². With
/// `unbiased`, the outer 1/n becomes 1/(n−1).
pub fn volatility_estimators(times: &[f64], increments: &[f64], unbiased: bool) -> Result<VolatilityEstimates> {
    let kap = kappas(times)?;
    let n = kap.len();
    if increments.len() != n {
        return Err(Error::InvalidInput(format!("{} increments for {} intervals", increments.len(), n)));
    }
    if n < 2 {
        return Err(Error::Insufficient("need at least two increments".into()));
    }
    let t_n = times[n];
    let e_hat = compensated_sum(increments.iter().copied()) / t_n;
    let quad = compensated_sum(increments.iter().zip(&kap).map(|(x, k)| x * x / k));
    let denom = if unbiased { (n - 1) as f64 } else { n as f64 };
    Ok(VolatilityEstimates { e_hat, nu_hat: (quad - t_n * e_hat * e_hat) / denom, unbiased })
}

/// 𝒯 = (2^{(δ−1)/2}/n) Σ (κ_i^δ + ½(t_n/n)^δ) E|X_i/κ_i|^δ
pub fn t_constant(times: &[f64], moments: &[f64], delta: f64) -> Result<f64> {
    let kap = kappas(times)?;
    let n = kap.len();
    if moments.len() != n {
        return Err(Error::InvalidInput(format!("{} moments for {} intervals", moments.len(), n)));
    }
    let tn_n = times[n] / n as f64;
    let s = compensated_sum(kap.iter().zip(moments).map(|(k, m)| (k.powf(delta) + 0.5 * tn_n.powf(delta)) * m));
    Ok(2f64.powf((delta - 1.0) / 2.0) / n as f64 * s)
}

pub fn volatility_bound(spec: &VolatilitySpec) -> Result<BoundReport> {
    let delta = spec.delta;
    if !(delta > 4.0) || !delta.is_finite() {
        return Err(Error::WrongRegime(format!("delta = {delta} must exceed 4")));
    }
    let t = t_constant(&spec.times, &spec.moments, delta)?;
    if !(t > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let n = spec.n() as f64;
    let dt = delta / 2.0;
    let scale = n / (spec.k * spec.t_n());
    let m4 = 4.0 * (spec.m as f64 + 1.0);
    let common = scale.powf(dt / (dt + 1.0))
        * t.powf(1.0 / (dt + 1.0))
        * m4.powf((dt - 1.0) / (dt + 1.0))
        * n.powf(-(dt - 2.0) / (2.0 * (dt + 1.0)));
    let r = if delta < 6.0 {
        BoundReport::new(TheoremId::Delta2To3, 8.015 * common, "single").note(format!(
            "normal limit as n grows when T and n/t_n stay bounded and m+1 = o(n^{:.6})",
            (dt - 2.0) / (2.0 * dt - 2.0)
        ))
    } else {
        let second = 227.5 * scale.powi(3) * t.powf(3.0 / dt) * m4 * m4 / n.sqrt();
        BoundReport::max_of(TheoremId::DeltaGe3, &[("first", 18.96 * common), ("second", second)])
            .note("normal limit as n grows when T and n/t_n stay bounded and m+1 = o(n^0.25)")
    };
    Ok(r.extra("T", t).extra("delta_tilde", dt))
}

/// Σ_{i,j} E|Y_{i,j}|^{δ/2} for independent increments with the given laws,
/// where Y_{i,j} = (X_i/κ_i)((t_n/n)X_i − κ_i X_j). Returns the sum and
/// n²𝒯.
pub fn y_moment_check(times: &[f64], laws: &[DiscreteLaw], delta: f64) -> Result<(f64, f64)> {
    let kap = kappas(times)?;
    let n = kap.len();
    if laws.len() != n {
        return Err(Error::InvalidInput(format!("{} laws for {} intervals", laws.len(), n)));
    }
    let tn_n = times[n] / n as f64;
    let h = delta / 2.0;
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = 0.0;
            for a in laws[i].atoms() {
                if i == j {
                    e += a.p * (a.x / kap[i] * (tn_n * a.x - kap[i] * a.x)).abs().powf(h);
                } else {
                    for b in laws[j].atoms() {
                        e += a.p * b.p * (a.x / kap[i] * (tn_n * a.x - kap[i] * b.x)).abs().powf(h);
                    }
                }
            }
            terms.push(e);
        }
    }
    let moments: Vec<f64> = laws.iter().zip(&kap).map(|(l, k)| l.abs_moment(0.0, delta) / k.powf(delta)).collect();
    let t = t_constant(times, &moments, delta)?;
    Ok((compensated_sum(terms), (n * n) as f64 * t))
}

/// Independent centered Gaussian increments with V[X_k] = ν κ_k.
pub fn gaussian_increments<R: Rng + ?Sized>(times: &[f64], nu: f64, rng: &mut R) -> Result<Vec<f64>> {
    let kap = kappas(times)?;
    Ok(kap
        .iter()
        .map(|k| {
            let z: f64 = StandardNormal.sample(rng);
            z * (nu * k).sqrt()
        })
        .collect())
}

/// E|Z|^δ for Z ~ N(0, 1).
pub fn gaussian_abs_moment(delta: f64) -> f64 {
    2f64.powf(delta / 2.0) * libm::tgamma((delta + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}

/// Pilot-simulation estimate of K = sqrt(n V[ν̂_n]) under independent
/// Gaussian increments. An estimate, not a bound.
pub fn pilot_k_gaussian(times: &[f64], nu: f64, reps: usize, seed: u64) -> Result<f64> {
    if reps < 2 {
        return Err(Error::Insufficient("need at least two replications".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = Vec::with_capacity(reps);
    for _ in 0..reps {
        let x = gaussian_increments(times, nu, &mut rng)?;
        est.push(volatility_estimators(times, &x, false)?.nu_hat);
    }
    let mean = compensated_sum(est.iter().copied()) / reps as f64;
    let var = compensated_sum(est.iter().map(|e| (e - mean).powi(2))) / (reps - 1) as f64;
    Ok(((times.len() - 1) as f64 * var).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_data_gives_zero() {
        let t = unit_times(5);
        let r = volatility_estimators(&t, &[0.0; 5], false).unwrap();
        assert_eq!((r.e_hat, r.nu_hat), (0.0, 0.0));
    }

    #[test]
    fn unit_grid_is_biased_sample_variance() {
        let x = [0.3, -1.2, 2.0, 0.7, -0.4, 1.1];
        let t = unit_times(x.len());
        let r = volatility_estimators(&t, &x, false).unwrap();
        let mean = x.iter().sum::<f64>() / 6.0;
        let biased = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0;
        assert_relative_eq!(r.nu_hat, biased, max_relative = 1e-12);
        let u = volatility_estimators(&t, &x, true).unwrap();
        assert_relative_eq!(u.nu_hat, biased * 6.0 / 5.0, max_relative = 1e-12);
    }

    #[test]
    fn expectation_matches_closed_form() {
        // E ν̂ = ν(1 − 1/n) on the unit grid; exact over Rademacher outcomes
        let n = 6;
        let t = unit_times(n);
        let mut e = 0.0;
        for mask in 0..(1u32 << n) {
            let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            e += volatility_estimators(&t, &x, false).unwrap().nu_hat / 64.0;
        }
        assert_relative_eq!(e, 1.0 - 1.0 / n as f64, max_relative = 1e-12);
    }

    #[test]
    fn irregular_grid_unbiased() {
        let t = vec![0.0, 0.5, 2.0, 2.25, 4.0];
        let kap = kappas(&t).unwrap();
        // X_k = ±sqrt(κ_k) equally likely: ν = 1
        let mut e = 0.0;
        for mask in 0..16u32 {
            let x: Vec<f64> = (0..4).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 } * kap[i].sqrt()).collect();
            e += volatility_estimators(&t, &x, true).unwrap().nu_hat / 16.0;
        }
        assert_relative_eq!(e, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn t_on_unit_grid() {
        let t = unit_times(4);
        let m = [1.0, 2.0, 3.0, 4.0];
        let delta = 5.0;
        let expected = 2f64.powf(2.0) * 1.5 * 2.5;
        assert_relative_eq!(t_constant(&t, &m, delta).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn bound_formulas_by_hand() {
        let n = 1000;
        let times = unit_times(n);
        let moments = vec![2.0; n];
        let spec = VolatilitySpec::new(times.clone(), 5.0, 1, 0.8, moments.clone()).unwrap();
        let r = volatility_bound(&spec).unwrap();
        let t = 2f64.powi(2) * 1.5 * 2.0;
        let nf = n as f64;
        let hand = 8.015
            * (1.0 / 0.8f64).powf(2.5 / 3.5)
            * t.powf(1.0 / 3.5)
            * 8f64.powf(1.5 / 3.5)
            * nf.powf(-1.0 / 14.0);
        assert_relative_eq!(r.raw, hand, max_relative = 1e-10);
        assert_eq!(r.theorem_id, TheoremId::Delta2To3);

        let spec = VolatilitySpec::new(times, 7.0, 1, 0.8, moments).unwrap();
        let r = volatility_bound(&spec).unwrap();
        let t = 2f64.powi(3) * 1.5 * 2.0;
        let dt = 3.5;
        let first = 18.96
            * (1.0 / 0.8f64).powf(dt / (dt + 1.0))
            * t.powf(1.0 / (dt + 1.0))
            * 8f64.powf((dt - 1.0) / (dt + 1.0))
            * nf.powf(-(dt - 2.0) / (2.0 * (dt + 1.0)));
        let second = 227.5 * (1.0 / 0.8f64).powi(3) * t.powf(3.0 / dt) * 64.0 / nf.sqrt();
        assert_relative_eq!(r.raw, first.max(second), max_relative = 1e-10);
    }

    #[test]
    fn wrong_regime_below_four() {
        let spec = VolatilitySpec::new(unit_times(3), 4.0, 0, 1.0, vec![1.0; 3]).unwrap();
        assert!(matches!(volatility_bound(&spec), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn y_moments_dominated() {
        let laws = vec![
            DiscreteLaw::rademacher(),
            DiscreteLaw::from_pairs(&[(-2.0, 0.2), (0.5, 0.8)]).unwrap(),
            DiscreteLaw::from_pairs(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap(),
        ];
        for times in [unit_times(3), vec![0.0, 0.3, 1.7, 2.0]] {
            for delta in [4.5, 5.0, 8.0] {
                let (lhs, rhs) = y_moment_check(&times, &laws, delta).unwrap();
                assert!(lhs <= rhs, "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn gaussian_moment_values() {
        assert_relative_eq!(gaussian_abs_moment(2.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gaussian_abs_moment(4.0), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(kappas(&[0.0, 1.0, 1.0]).is_err());
        assert!(kappas(&[0.5, 1.0]).is_err());
    }
}
