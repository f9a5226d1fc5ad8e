//! Seeded sampling of W, empirical Kolmogorov distance with a DKW band, and
//! empirical certification of the theorem bounds.
//!
//! Sample i is drawn from its own ChaCha8 stream (stream id i under the key
//! derived from the seed), so the sample vector does not depend on how the
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    best_bound, bound_delta_2_3, bound_delta_ge3, bound_linfty, bound_linfty_refined, BoundReport,
};
use crate::error::{Error, Result};
use crate::fourier::normal_cdf;
use crate::generators::FamilySpec;
use crate::par::{map_indexed, Exec};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// n realizations of S.
pub fn sample_sums(spec: &FamilySpec, seed: u64, n_samples: usize, exec: Exec) -> Result<Vec<f64>> {
    let sampler = spec.sampler()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok(map_indexed(n_samples, exec, |i| {
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        sampler.sample(&mut rng)
    }))
}

/// n realizations of W = (S − E S)/v with the exact mean and variance.
pub fn sample_standardized_sum(spec: &FamilySpec, seed: u64, n_samples: usize, exec: Exec) -> Result<Vec<f64>> {
    let (mean, var) = spec.exact_mean_var()?;
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let sd = var.sqrt();
    let mut xs = sample_sums(spec, seed, n_samples, exec)?;
    for x in &mut xs {
        *x = (*x - mean) / sd;
    }
    Ok(xs)
}

/// Standardizes with the sample mean and variance instead of the exact
/// ones. The theorems concern exact standardization, so results from this
/// mode are diagnostic only.
pub fn standardize_estimated(xs: &mut [f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::Insufficient("need at least two samples".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let sd = var.sqrt();
    for x in xs.iter_mut() {
        *x = (*x - mean) / sd;
    }
    Ok(())
}

/// sup_t |F_n(t) − Φ(t)| for the empirical CDF of `samples`.
pub fn empirical_dkol(samples: &[f64]) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    empirical_dkol_sorted(&sorted)
}

pub fn empirical_dkol_sorted(sorted: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Insufficient("no samples".into()));
    }
    let n = sorted.len() as f64;
    let mut best: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf(x);
        best = best.max(((i + 1) as f64 / n - phi).abs()).max((i as f64 / n - phi).abs());
    }
    Ok(best)
}

/// Half-width of the DKW band: sqrt(ln(2/(1−confidence))/(2n)).
pub fn dkw_margin(n_samples: usize, confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidInput(format!("confidence {confidence} not in (0, 1)")));
    }
    if n_samples == 0 {
        return Err(Error::Insufficient("no samples".into()));
    }
    Ok(((2.0 / (1.0 - confidence)).ln() / (2.0 * n_samples as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum TheoremSelector {
    Linfty,
    LinftyRefined,
    DeltaGe3 { delta: f64 },
    Delta2To3 { delta: f64 },
    Best,
}

impl TheoremSelector {
    fn deltas(self) -> Vec<f64> {
        match self {
            TheoremSelector::Linfty => vec![3.0],
            TheoremSelector::LinftyRefined => vec![3.0, 4.0],
            TheoremSelector::DeltaGe3 { delta } | TheoremSelector::Delta2To3 { delta } => vec![delta],
            TheoremSelector::Best => vec![2.5, 3.0, 4.0],
        }
    }

    pub fn evaluate(self, spec: &FamilySpec) -> Result<BoundReport> {
        let profile = spec.profile(&self.deltas())?;
        match self {
            TheoremSelector::Linfty => bound_linfty(&profile),
            TheoremSelector::LinftyRefined => bound_linfty_refined(&profile),
            TheoremSelector::DeltaGe3 { delta } => bound_delta_ge3(&profile, delta),
            TheoremSelector::Delta2To3 { delta } => bound_delta_2_3(&profile, delta),
            TheoremSelector::Best => best_bound(&profile),
        }
    }
}

impl std::str::FromStr for TheoremSelector {
    type Err = Error;

    /// `linfty`, `linfty_refined`, `delta_ge3[:δ]`, `delta_2_3[:δ]`, `best`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let delta = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |a| {
                a.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad delta '{a}'")))
            })
        };
        match name {
            "linfty" => Ok(TheoremSelector::Linfty),
            "linfty_refined" => Ok(TheoremSelector::LinftyRefined),
            "delta_ge3" => Ok(TheoremSelector::DeltaGe3 { delta: delta(3.0)? }),
            "delta_2_3" => Ok(TheoremSelector::Delta2To3 { delta: delta(2.5)? }),
            "best" => Ok(TheoremSelector::Best),
            _ => Err(Error::InvalidInput(format!("unknown theorem '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub spec_id: String,
    pub theorem: TheoremSelector,
    pub n_samples: usize,
    pub confidence: f64,
    pub empirical_dkol: f64,
    pub dkw_margin: f64,
    /// clamped bound
    pub theoretical_bound: f64,
    pub raw_bound: f64,
    /// empirical_dkol − dkw_margin ≤ theoretical_bound
    pub pass: bool,
    /// the bound is ≥ 1, so the check cannot fail
    pub trivial: bool,
    pub seed: u64,
}

pub fn verify_bound(
    spec: &FamilySpec,
    theorem: TheoremSelector,
    n_samples: usize,
    confidence: f64,
    seed: u64,
    exec: Exec,
) -> Result<VerificationReport> {
    let bound = theorem.evaluate(spec)?;
    let margin = dkw_margin(n_samples, confidence)?;
    let mut xs = sample_standardized_sum(spec, seed, n_samples, exec)?;
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
    let emp = empirical_dkol_sorted(&xs)?;
    Ok(VerificationReport {
        spec_id: spec.id(),
        theorem,
        n_samples,
        confidence,
        empirical_dkol: emp,
        dkw_margin: margin,
        theoretical_bound: bound.clamped,
        raw_bound: bound.raw,
        pass: emp - margin <= bound.clamped,
        trivial: bound.clamped >= 1.0,
        seed,
    })
}
