//! Exact cumulants of S on small families, the cumulant bound for truncated
//! sums, truncation-shift estimates and the series constants C and C″.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CenteringChoice, DiscreteFamily, MomentProfile};
use crate::numeric::{binomial, compensated_sum, CompensatedSum};

/// Highest cumulant order computed exactly; beyond this the recursion loses
/// too many digits to cancellation.
pub const MAX_CUMULANT_ORDER: usize = 12;

/// Raw moments `m[0..=r]` (with `m[0] = 1`) to cumulants `k[1..=r]`
/// (`k[0]` is unused and set to 0).
pub fn moments_to_cumulants(m: &[f64]) -> Vec<f64> {
    let r = m.len().saturating_sub(1);
    let mut k = vec![0.0; r + 1];
    for n in 1..=r {
        let mut acc = CompensatedSum::new();
        acc.add(m[n]);
        for j in 1..n {
            acc.add(-binomial((n - 1) as u64, (j - 1) as u64) * k[j] * m[n - j]);
        }
        k[n] = acc.value();
    }
    k
}

/// Inverse of [`moments_to_cumulants`].
pub fn cumulants_to_moments(k: &[f64]) -> Vec<f64> {
    let r = k.len().saturating_sub(1);
    let mut m = vec![0.0; r + 1];
    m[0] = 1.0;
    for n in 1..=r {
        let mut acc = CompensatedSum::new();
        for j in 1..=n {
            acc.add(binomial((n - 1) as u64, (j - 1) as u64) * k[j] * m[n - j]);
        }
        m[n] = acc.value();
    }
    m
}

/// Cumulants 1..=rmax of a finite law given as (value, probability) pairs.
pub fn law_cumulants(atoms: &[(f64, f64)], rmax: usize) -> Vec<f64> {
    let mu = compensated_sum(atoms.iter().map(|&(x, p)| p * x));
    let central: Vec<f64> = (0..=rmax)
        .map(|j| compensated_sum(atoms.iter().map(|&(x, p)| p * (x - mu).powi(j as i32))))
        .collect();
    let mut k = moments_to_cumulants(&central);
    if rmax >= 1 {
        k[1] = mu;
    }
    k
}

/// κ₁..κ_rmax of S; index 0 is unused. Components are independent, so their
/// cumulants add.
pub fn cumulants_of_sum(family: &DiscreteFamily, rmax: usize) -> Result<Vec<f64>> {
    if rmax == 0 || rmax > MAX_CUMULANT_ORDER {
        return Err(Error::WrongRegime(format!(
            "cumulant order must be in 1..={MAX_CUMULANT_ORDER}, got {rmax}"
        )));
    }
    let mut total: Vec<CompensatedSum> = vec![CompensatedSum::new(); rmax + 1];
    for c in 0..family.components().len() {
        let mut mean = CompensatedSum::new();
        family.for_each_component_sum(c, |x, p| mean.add(p * x))?;
        let mu = mean.value();
        let mut central = vec![CompensatedSum::new(); rmax + 1];
        family.for_each_component_sum(c, |x, p| {
            let d = x - mu;
            let mut pow = p;
            for slot in central.iter_mut() {
                slot.add(pow);
                pow *= d;
            }
        })?;
        let m: Vec<f64> = central.iter().map(|s| s.value()).collect();
        let k = moments_to_cumulants(&m);
        total[1].add(mu);
        for r in 2..=rmax {
            total[r].add(k[r]);
        }
    }
    Ok(total.iter().map(|s| s.value()).collect())
}

/// κ^{(r)}(S) exactly.
pub fn cumulant_of_sum(family: &DiscreteFamily, r: usize) -> Result<f64> {
    Ok(cumulants_of_sum(family, r)?[r])
}

/// r^{r−2} (2(D+1))^{r−1} L^r 𝒜_δ / L^δ, a bound on |κ^{(r)}(S^{(L)})|.
pub fn lemma_cumulant_bound(profile: &MomentProfile, r: usize, delta: f64, l: f64) -> Result<f64> {
    let rf = r as f64;
    if !(delta >= 1.0) || r < 2 || rf < delta || !(l > 0.0) {
        return Err(Error::WrongRegime(format!(
            "cumulant bound needs delta >= 1, r >= max(delta, 1), r > 1, L > 0 (got r={r}, delta={delta}, L={l})"
        )));
    }
    let a = profile.a(delta)?;
    let d1 = profile.d as f64 + 1.0;
    Ok(rf.powf(rf - 2.0) * (2.0 * d1).powf(rf - 1.0) * l.powf(rf - delta) * a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantCheckRow {
    pub r: usize,
    pub delta: f64,
    pub exact_abs_cumulant: f64,
    pub bound: f64,
    /// exact / bound
    pub ratio: f64,
    pub pass: bool,
}

/// Compares |κ^{(r)}(S)| with the cumulant bound at L = max_k ‖Y_k − c_k‖_∞
/// (no truncation takes place) for r = 2..=rmax and each δ in `deltas`
/// with δ ≤ r, plus δ = r.
pub fn cumulant_check(family: &DiscreteFamily, rmax: usize, deltas: &[f64]) -> Result<Vec<CumulantCheckRow>> {
    let mut all: Vec<f64> = deltas.to_vec();
    all.extend((2..=rmax).map(|r| r as f64));
    all.sort_by(f64::total_cmp);
    all.dedup();
    let profile = crate::model::derive_profile(family, &all)?;
    let l = profile.l()?;
    let k = cumulants_of_sum(family, rmax)?;
    let mut rows = Vec::new();
    for (r, kr) in k.iter().enumerate().skip(2) {
        let mut ds: Vec<f64> = deltas.iter().copied().filter(|&d| d <= r as f64).collect();
        ds.push(r as f64);
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        for delta in ds {
            let exact = kr.abs();
            let bound = lemma_cumulant_bound(&profile, r, delta, l)?;
            // slack for the rounding in the exact enumeration
            let pass = exact <= bound * (1.0 + 1e-12) + 1e-12;
            rows.push(CumulantCheckRow { r, delta, exact_abs_cumulant: exact, bound, ratio: exact / bound, pass });
        }
    }
    Ok(rows)
}

/// Truncation of a family at level L: Y^{(L)} = (Y − c)·1{|Y − c| ≤ L}.
pub struct TruncationContext<'a> {
    pub level: f64,
    pub family: &'a DiscreteFamily,
}

impl<'a> TruncationContext<'a> {
    pub fn new(family: &'a DiscreteFamily, level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::InvalidInput(format!("truncation level {level} must be positive")));
        }
        Ok(Self { level, family })
    }

    /// The family of Y^{(L)}_k; centering is zero since the values are
    /// already centered.
    pub fn truncated_family(&self) -> Result<DiscreteFamily> {
        let c = self.family.centers();
        let l = self.level;
        self.family.map_values(
            |k, x| {
                let y = x - c[k];
                if y.abs() <= l {
                    y
                } else {
                    0.0
                }
            },
            CenteringChoice::Zero,
        )
    }

    /// v_L = sqrt(V[S^{(L)}])
    pub fn v_l(&self) -> Result<f64> {
        Ok(self.truncated_family()?.variance_of_sum()?.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationShifts {
    pub mean_shift_bound: f64,
    pub variance_shift_bound: f64,
    /// Only for δ > 3.
    pub third_cumulant_shift_bound: Option<f64>,
    /// |E[S] − Σc_k − E[S^{(L)}]|
    pub true_mean_shift: f64,
    /// |v² − v_L²|
    pub true_variance_shift: f64,
    /// |κ³(S) − κ³(S^{(L)})|, when enumerable.
    pub true_third_cumulant_shift: Option<f64>,
    pub notes: Vec<String>,
}

/// Explicit truncation-shift bounds next to the exact shifts of the family.
pub fn truncation_shifts(ctx: &TruncationContext, delta: f64) -> Result<TruncationShifts> {
    if !(delta > 2.0) {
        return Err(Error::WrongRegime(format!("truncation shifts need delta > 2, got {delta}")));
    }
    let fam = ctx.family;
    let l = ctx.level;
    let c = fam.centers();
    let a = compensated_sum(fam.laws().iter().zip(&c).map(|(law, &ck)| law.abs_moment(ck, delta)));
    let d1 = fam.graph().max_degree() as f64 + 1.0;
    let mut notes = Vec::new();

    let mean_shift_bound = l.powf(1.0 - delta) * a;
    let variance_shift_bound = 3.0 * l.powf(2.0 - delta) * d1 * a;
    let third_cumulant_shift_bound = if delta > 3.0 {
        Some(21.0 * d1 * d1 * l.powf(3.0 - delta) * a)
    } else {
        notes.push("third-cumulant shift bound needs delta > 3".to_string());
        None
    };

    let trunc = ctx.truncated_family()?;
    let true_mean_shift = (fam.mean_of_sum() - compensated_sum(c.iter().copied()) - trunc.mean_of_sum()).abs();
    let true_variance_shift = (fam.variance_of_sum()? - trunc.variance_of_sum()?).abs();
    let true_third_cumulant_shift = match (cumulant_of_sum(fam, 3), cumulant_of_sum(&trunc, 3)) {
        (Ok(k), Ok(kl)) => Some((k - kl).abs()),
        (Err(e), _) | (_, Err(e)) => {
            notes.push(format!("third cumulant not enumerated: {e}"));
            None
        }
    };
    Ok(TruncationShifts {
        mean_shift_bound,
        variance_shift_bound,
        third_cumulant_shift_bound,
        true_mean_shift,
        true_variance_shift,
        true_third_cumulant_shift,
        notes,
    })
}

/// Closed interval known to contain a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn map_monotone(self, f: impl Fn(f64) -> f64) -> Enclosure {
        let (a, b) = (f(self.lo), f(self.hi));
        Enclosure { lo: a.min(b), hi: a.max(b) }
    }
}

const SERIES_CUTOFF: u64 = 200_000;

/// Σ_{r≥3} r^{r−2}/(r! e^r), enclosed.
///
/// Terms below the cutoff are summed by the ratio recursion
/// t_{r+1}/t_r = (1 + 1/r)^{r−2}/e. The tail uses Stirling's bounds
/// sqrt(2πr)(r/e)^r ≤ r! ≤ sqrt(2πr)(r/e)^r e^{1/(12r)}, which sandwich
/// each term between r^{−5/2}e^{−1/(12r)}/sqrt(2π) and r^{−5/2}/sqrt(2π);
/// the sums of r^{−5/2} are bracketed by integrals.
fn series_enclosure() -> Enclosure {
    let mut t = 3.0 / (6.0 * std::f64::consts::E.powi(3));
    let mut acc = CompensatedSum::new();
    for r in 3..SERIES_CUTOFF {
        acc.add(t);
        let rf = r as f64;
        t *= ((rf - 2.0) * (1.0 / rf).ln_1p() - 1.0).exp();
    }
    let partial = acc.value();
    let big_r = SERIES_CUTOFF as f64;
    let s2pi = (2.0 * std::f64::consts::PI).sqrt();
    // ∫_R^∞ x^{-5/2} ≤ Σ_{r≥R} r^{-5/2} ≤ R^{-5/2} + ∫_R^∞ x^{-5/2}
    let integral = (2.0 / 3.0) * big_r.powf(-1.5);
    let tail_hi = (big_r.powf(-2.5) + integral) / s2pi;
    let tail_lo = integral * (-1.0 / (12.0 * big_r)).exp() / s2pi;
    // rounding in ~2e5 recursive multiplications and additions
    let rounding = 1e-13 * partial;
    Enclosure {
        lo: partial + tail_lo - rounding,
        hi: partial + tail_hi + rounding,
    }
}

/// C = 4e³ Σ_{r≥3} r^{r−2}/(r! e^r).
pub fn constant_c() -> Enclosure {
    let e3 = 4.0 * std::f64::consts::E.powi(3);
    series_enclosure().map_monotone(|s| e3 * s)
}

/// C″ = 8e⁴ Σ_{r≥4} r^{r−2}/(r! e^r) = 2e(C − 2).
pub fn constant_c_second() -> Enclosure {
    constant_c().map_monotone(|c| 2.0 * std::f64::consts::E * (c - 2.0))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProofConstants {
    pub b: Enclosure,
    pub chi: Enclosure,
    pub alpha0: f64,
    pub i: f64,
}

/// (1−α)^{−3/2} + 24/(πα)
pub fn smoothing_objective(alpha: f64) -> f64 {
    (1.0 - alpha).powf(-1.5) + 24.0 / (std::f64::consts::PI * alpha)
}

fn smoothing_objective_derivative(alpha: f64) -> f64 {
    1.5 * (1.0 - alpha).powf(-2.5) - 24.0 / (std::f64::consts::PI * alpha * alpha)
}

pub fn smoothing_objective_second_derivative(alpha: f64) -> f64 {
    3.75 * (1.0 - alpha).powf(-3.5) + 48.0 / (std::f64::consts::PI * alpha.powi(3))
}

/// B, χ, α₀ and I from their closed forms.
pub fn proof_constants() -> ProofConstants {
    use std::f64::consts::{E, PI};
    // derivative bisection for the minimiser on (0,1)
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if smoothing_objective_derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha0 = 0.5 * (lo + hi);
    let i = smoothing_objective(alpha0);

    let c = constant_c();
    let s2pi = (2.0 * PI).sqrt();
    let b = c.map_monotone(|c| {
        2.0 * E * (4.0 * PI * E * E / (8.0 * E + 3.0))
            * (c * (6.0 * PI).sqrt() / (6.0 * E * PI) + 24.0 / (PI * s2pi))
    });
    // χ involves B' = 96e³/((C + 3e + 8e²)√(2π)); the map δ ↦ χ(δ) is
    // increasing on (2,3), so the supremum is the limit at δ = 3.
    let chi = c.map_monotone(|c| {
        let b_prime = 96.0 * E.powi(3) / ((c + 3.0 * E + 8.0 * E * E) * s2pi);
        chi_at(3.0, b_prime)
    });
    ProofConstants { b, chi, alpha0, i }
}

/// ((δ+1)/δ)·(48e/(π√(2π)))·(2eB')^{−1/(δ+1)}
pub fn chi_at(delta: f64, b_prime: f64) -> f64 {
    use std::f64::consts::{E, PI};
    (delta + 1.0) / delta * (48.0 * E / (PI * (2.0 * PI).sqrt())) * (2.0 * E * b_prime).powf(-1.0 / (delta + 1.0))
}
