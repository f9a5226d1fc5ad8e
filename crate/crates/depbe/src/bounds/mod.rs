//! Kolmogorov-distance bounds for sums with a dependency graph, the
//! literature baselines they are compared against, and the exponent map.

mod baselines;
pub mod regimes;

pub use baselines::{baseline, chen_shao, fmn_condition_trend, fmn_thm39, Baseline, ConditionTrend};
pub use regimes::{
    boundary_points, crossover_curves, exponents, ExponentTable, RegimeMap, RegimePoint, Winner,
};

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{xi, CenteringChoice, MomentProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    Linfty,
    LinftyRefined,
    DeltaGe3,
    Delta2To3,
    ClassicalBe,
    FmnCorollary30,
    Rinott,
    Penrose,
    ChenShao,
    FmnThm39,
    SteinW1,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Linfty => "linfty",
            TheoremId::LinftyRefined => "linfty_refined",
            TheoremId::DeltaGe3 => "delta_ge3",
            TheoremId::Delta2To3 => "delta_2_3",
            TheoremId::ClassicalBe => "classical_be",
            TheoremId::FmnCorollary30 => "fmn_corollary30",
            TheoremId::Rinott => "rinott",
            TheoremId::Penrose => "penrose",
            TheoremId::ChenShao => "chen_shao",
            TheoremId::FmnThm39 => "fmn_thm39",
            TheoremId::SteinW1 => "stein_w1",
        }
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub raw: f64,
    /// min(raw, 1)
    pub clamped: f64,
    pub branch: String,
    pub valid: bool,
    pub notes: Vec<String>,
    /// Secondary quantities (comparison factors, W1 value, ...).
    pub extras: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<BoundReport>,
}

impl BoundReport {
    pub(crate) fn new(theorem_id: TheoremId, raw: f64, branch: impl Into<String>) -> Self {
        let raw = if raw.is_nan() { f64::INFINITY } else { raw.max(0.0) };
        Self {
            theorem_id,
            raw,
            clamped: raw.min(1.0),
            branch: branch.into(),
            valid: true,
            notes: Vec::new(),
            extras: BTreeMap::new(),
            sub_reports: Vec::new(),
        }
    }

    /// Picks the larger of labelled branches.
    pub(crate) fn max_of(theorem_id: TheoremId, branches: &[(&str, f64)]) -> Self {
        let (label, value) = branches
            .iter()
            .copied()
            .fold(("", f64::NEG_INFINITY), |best, b| if b.1 > best.1 { b } else { best });
        let mut r = Self::new(theorem_id, value, label);
        for (l, v) in branches {
            r.extras.insert(format!("branch_{l}"), *v);
        }
        r
    }

    pub(crate) fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub(crate) fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }
}

fn d1(profile: &MomentProfile) -> f64 {
    profile.d as f64 + 1.0
}

/// Bounded-summand bound: max{68.5 (D+1)²𝒜₃/v³, 22.88 L(D+1)/v}.
pub fn bound_linfty(profile: &MomentProfile) -> Result<BoundReport> {
    profile.require_positive_v()?;
    let l = profile.l()?;
    let a3 = profile.a(3.0)?;
    let (v, d1) = (profile.v, d1(profile));
    Ok(BoundReport::max_of(
        TheoremId::Linfty,
        &[("cumulant", 68.5 * d1 * d1 * a3 / v.powi(3)), ("sup", 22.88 * l * d1 / v)],
    ))
}

/// Multiplier relating the refined bound to `bound_linfty` when the latter is
/// below 1.
pub fn refined_comparison_factor(centering: &CenteringChoice) -> f64 {
    match centering {
        CenteringChoice::Mean => 0.85771,
        _ => 1.06164,
    }
}

/// Bounded-summand bound with the third central moment of S.
pub fn bound_linfty_refined(profile: &MomentProfile) -> Result<BoundReport> {
    profile.require_positive_v()?;
    let l = profile.l()?;
    let a4 = profile.a(4.0)?;
    let rho = profile.rho()?;
    let (v, d1) = (profile.v, d1(profile));
    let q4 = d1.powi(3) * a4 / v.powi(4);
    let r3 = rho / v.powi(3);
    let head = 0.607148 * r3 + 116.84 * q4;
    let sup = 16.57 * l * d1 / v;
    let moment = 22.47 * q4.sqrt() + 1.596 * r3;
    let (branch, tail) = if sup >= moment { ("sup", sup) } else { ("fourth_moment", moment) };
    let mut r = BoundReport::new(TheoremId::LinftyRefined, head + tail, branch)
        .extra("branch_sup", sup)
        .extra("branch_fourth_moment", moment)
        .extra("comparison_factor", refined_comparison_factor(&profile.centering));
    if let Ok(base) = bound_linfty(profile) {
        r = r.extra("linfty_raw", base.raw);
    }
    Ok(r)
}

/// Bound under a finite δ-th moment, δ ≥ 3.
pub fn bound_delta_ge3(profile: &MomentProfile, delta: f64) -> Result<BoundReport> {
    if !(delta >= 3.0) || !delta.is_finite() {
        return Err(Error::WrongRegime(format!("delta = {delta} is not in [3, inf)")));
    }
    profile.require_positive_v()?;
    let x = xi(profile, delta)?;
    let ratio = d1(profile) / profile.n as f64;
    let first = 18.96 * x.powf(-delta / (delta + 1.0)) * ratio.powf((delta - 2.0) / (2.0 * (delta + 1.0)));
    let second = 227.5 / x.powi(3) * ratio.sqrt();
    Ok(BoundReport::max_of(TheoremId::DeltaGe3, &[("first", first), ("second", second)])
        .extra("delta", delta)
        .extra("xi", x))
}

/// Bound under a finite δ-th moment, δ ∈ (2,3).
pub fn bound_delta_2_3(profile: &MomentProfile, delta: f64) -> Result<BoundReport> {
    if !(delta > 2.0 && delta < 3.0) {
        return Err(Error::WrongRegime(format!("delta = {delta} is not in (2, 3)")));
    }
    profile.require_positive_v()?;
    let x = xi(profile, delta)?;
    let ratio = d1(profile) / profile.n as f64;
    let raw = 8.015 * x.powf(-delta / (delta + 1.0)) * ratio.powf((delta - 2.0) / (2.0 * (delta + 1.0)));
    Ok(BoundReport::new(TheoremId::Delta2To3, raw, "single").extra("delta", delta).extra("xi", x))
}

/// Every theorem bound the stored moments allow.
pub fn applicable_bounds(profile: &MomentProfile) -> Result<Vec<BoundReport>> {
    profile.require_positive_v()?;
    let mut out = Vec::new();
    let mut push = |r: Result<BoundReport>| -> Result<()> {
        match r {
            Ok(r) => out.push(r),
            Err(Error::MissingMoment(_)) | Err(Error::WrongRegime(_)) | Err(Error::InvalidProfile(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    };
    push(bound_linfty(profile))?;
    push(bound_linfty_refined(profile))?;
    for delta in profile.deltas() {
        if delta >= 3.0 {
            push(bound_delta_ge3(profile, delta))?;
        } else if delta > 2.0 {
            push(bound_delta_2_3(profile, delta))?;
        }
    }
    Ok(out)
}

/// Smallest clamped bound over all applicable theorems; ties go to the
/// smaller raw value.
pub fn best_bound(profile: &MomentProfile) -> Result<BoundReport> {
    let all = applicable_bounds(profile)?;
    let best = all
        .iter()
        .min_by(|a, b| a.clamped.total_cmp(&b.clamped).then(a.raw.total_cmp(&b.raw)))
        .ok_or(Error::NoApplicableBound)?;
    let mut r = best.clone();
    r.notes.push(format!("selected among {} applicable bounds", all.len()));
    r.sub_reports = all;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bounded(n: usize, d: usize, v: f64, a3: f64, l: f64) -> MomentProfile {
        MomentProfile::new(n, d, v).with_moment(3.0, a3).with_l(l)
    }

    #[test]
    fn linfty_examples() {
        let r = bound_linfty(&bounded(1_000_000, 0, 1e3, 1e6, 1.0)).unwrap();
        assert_relative_eq!(r.raw, 0.0685, max_relative = 1e-12);
        assert_eq!(r.branch, "cumulant");
        assert_relative_eq!(r.extras["branch_sup"], 0.02288, max_relative = 1e-12);
        let r = bound_linfty(&bounded(1_000_000, 3, 2000.0, 1e6, 1.0)).unwrap();
        assert_relative_eq!(r.raw, 0.137, max_relative = 1e-12);
        assert_relative_eq!(r.extras["branch_sup"], 0.04576, max_relative = 1e-12);
        assert_eq!(bound_linfty(&bounded(10, 0, 0.0, 1.0, 1.0)), Err(Error::DegenerateVariance));
        let no_l = MomentProfile::new(10, 0, 1.0).with_moment(3.0, 1.0);
        assert!(matches!(bound_linfty(&no_l), Err(Error::MissingMoment(_))));
    }

    #[test]
    fn refined_examples() {
        let p = MomentProfile::new(1_000_000, 0, 1e3).with_moment(4.0, 1e6).with_l(1.0).with_rho(0.0);
        let r = bound_linfty_refined(&p).unwrap();
        assert_relative_eq!(r.raw, 116.84e-6 + 22.47e-3, max_relative = 1e-12);
        assert!((r.raw - 0.022587).abs() < 1e-6);
        assert_eq!(r.branch, "fourth_moment");
        assert_eq!(r.extras["comparison_factor"], 0.85771);
        let z = p.clone().with_centering(CenteringChoice::Zero);
        assert_eq!(bound_linfty_refined(&z).unwrap().extras["comparison_factor"], 1.06164);
        let tiny = MomentProfile::new(1_000_000, 0, 1e3).with_moment(4.0, 1e-30).with_l(1.0).with_rho(0.0);
        let r = bound_linfty_refined(&tiny).unwrap();
        assert_eq!(r.branch, "sup");
        assert_relative_eq!(r.raw, 0.01657, max_relative = 1e-9);
    }

    #[test]
    fn delta_ge3_examples() {
        // ξ₃ = 1 when 𝒜₃ = N and v² = N(D+1)
        let p = MomentProfile::new(10_000, 0, 100.0).with_moment(3.0, 10_000.0);
        let r = bound_delta_ge3(&p, 3.0).unwrap();
        assert_relative_eq!(r.raw, 18.96 * 1e-4f64.powf(0.125), max_relative = 1e-12);
        assert!((r.raw - 5.995).abs() < 1e-3);
        assert_eq!(r.branch, "first");
        assert_eq!(r.clamped, 1.0);
        assert!(matches!(bound_delta_ge3(&p, 2.5), Err(Error::WrongRegime(_))));
        let big = MomentProfile::new(1 << 48, 0, 2f64.powi(24)).with_moment(3.0, 2f64.powi(48));
        assert!(bound_delta_ge3(&big, 3.0).unwrap().raw < 0.5);
    }

    #[test]
    fn delta_2_3_examples() {
        let p = MomentProfile::new(10_000, 0, 100.0).with_moment(2.5, 10_000.0);
        let r = bound_delta_2_3(&p, 2.5).unwrap();
        assert_relative_eq!(r.raw, 8.015 * 1e-4f64.powf(1.0 / 14.0), max_relative = 1e-12);
        assert!((r.raw - 4.152).abs() < 1e-3);
        let q = MomentProfile::new(1, 0, 1.0).with_moment(2.5, 1.0);
        assert_relative_eq!(bound_delta_2_3(&q, 2.5).unwrap().raw, 8.015, max_relative = 1e-12);
        assert!(matches!(bound_delta_2_3(&p, 3.0), Err(Error::WrongRegime(_))));
        // (D+1)/N = 1e-28 with ξ = 1
        let n: f64 = 1e28;
        let r = 8.015 * (1.0 / n).powf(1.0 / 14.0);
        assert_relative_eq!(r, 0.08015, max_relative = 1e-12);
    }

    #[test]
    fn delta_limits_share_first_branch_shape() {
        let p = MomentProfile::new(10_000, 0, 100.0).with_moment(3.0, 10_000.0).with_moment(2.999999, 10_000.0);
        let a = bound_delta_ge3(&p, 3.0).unwrap().extras["branch_first"];
        let b = bound_delta_2_3(&p, 2.999999).unwrap().raw;
        assert_relative_eq!(a / 18.96, b / 8.015, max_relative = 1e-5);
    }

    #[test]
    fn best_bound_selection() {
        let p = MomentProfile::new(10_000, 0, 100.0).with_moment(2.5, 10_000.0);
        assert_eq!(best_bound(&p).unwrap().theorem_id, TheoremId::Delta2To3);
        let empty = MomentProfile::new(10, 0, 1.0);
        assert_eq!(best_bound(&empty), Err(Error::NoApplicableBound));
        let full = bounded(1_000_000, 0, 1e3, 1e6, 1.0).with_moment(4.0, 1e6).with_rho(0.0);
        let b = best_bound(&full).unwrap();
        assert!(b.clamped <= bound_linfty(&full).unwrap().clamped);
        assert_eq!(b.sub_reports.len(), 4);
    }

    #[test]
    fn branch_switch_happens_once() {
        // identically distributed, ξ fixed: scan N/(D+1) upward
        let mut switched = false;
        for k in 0..80 {
            let n = 2f64.powf(k as f64 * 0.5).round().max(1.0) as usize;
            let p = MomentProfile::new(n, 0, (n as f64 * 0.25).sqrt()).with_moment(3.0, n as f64 * 0.5);
            let r = bound_delta_ge3(&p, 3.0).unwrap();
            if r.branch == "first" {
                switched = true;
            } else {
                assert!(!switched, "switched back at N = {n}");
            }
        }
        assert!(switched);
    }
}
