//! Earlier bounds from the literature, evaluated as stated.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{BoundReport, TheoremId};
use crate::error::{Error, Result};
use crate::model::{CenteringChoice, MomentProfile};
use crate::numeric::log_log_slope;

const UP_TO_CONSTANT: &str = "up to absolute constant: evaluated with constant 1, comparative only";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    ClassicalBe,
    FmnCorollary30,
    Rinott,
    Penrose,
    ChenShao,
    FmnThm39,
    SteinW1,
}

impl Baseline {
    pub const ALL: [Baseline; 7] = [
        Baseline::ClassicalBe,
        Baseline::FmnCorollary30,
        Baseline::Rinott,
        Baseline::Penrose,
        Baseline::ChenShao,
        Baseline::FmnThm39,
        Baseline::SteinW1,
    ];

    pub fn theorem_id(self) -> TheoremId {
        match self {
            Baseline::ClassicalBe => TheoremId::ClassicalBe,
            Baseline::FmnCorollary30 => TheoremId::FmnCorollary30,
            Baseline::Rinott => TheoremId::Rinott,
            Baseline::Penrose => TheoremId::Penrose,
            Baseline::ChenShao => TheoremId::ChenShao,
            Baseline::FmnThm39 => TheoremId::FmnThm39,
            Baseline::SteinW1 => TheoremId::SteinW1,
        }
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.theorem_id().as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown baseline '{s}'")))
    }
}

fn require_mean(profile: &MomentProfile, what: &str) -> Result<()> {
    match profile.centering {
        CenteringChoice::Mean => Ok(()),
        _ => Err(Error::WrongRegime(format!("{what} is stated for mean-centered moments"))),
    }
}

/// Mean or zero centering; zero centering is taken to mean E[Y_k] = 0.
fn centered_note(profile: &MomentProfile, what: &str) -> Result<Option<String>> {
    match profile.centering {
        CenteringChoice::Mean => Ok(None),
        CenteringChoice::Zero => Ok(Some(format!("{what}: zero centering assumes E[Y_k] = 0"))),
        CenteringChoice::Custom { .. } => {
            Err(Error::WrongRegime(format!("{what} needs centered summands (mean or zero centering)")))
        }
    }
}

pub fn baseline(profile: &MomentProfile, which: Baseline) -> Result<BoundReport> {
    profile.require_positive_v()?;
    let n = profile.n as f64;
    let d1 = profile.d as f64 + 1.0;
    let v = profile.v;
    match which {
        Baseline::ClassicalBe => {
            if profile.d != 0 {
                return Err(Error::WrongRegime("classical Berry-Esseen needs D = 0".into()));
            }
            let note = centered_note(profile, "classical_be")?;
            let mut r = BoundReport::new(TheoremId::ClassicalBe, 0.5583 * profile.a(3.0)? / v.powi(3), "single");
            r.notes.extend(note);
            Ok(r)
        }
        Baseline::FmnCorollary30 => {
            let l = profile.l()?;
            Ok(BoundReport::new(TheoremId::FmnCorollary30, 76.36 * l.powi(3) * n * d1 * d1 / v.powi(3), "single"))
        }
        Baseline::Rinott => {
            require_mean(profile, "rinott")?;
            let l = profile.l()?;
            let terms = [
                ("first", d1 * l / v),
                ("second", (n / (v * v)).sqrt() * d1.powf(1.5) * l * l / v),
                ("third", n / (v * v) * d1 * d1 * l.powi(3) / v),
            ];
            let mut r = BoundReport::max_of(TheoremId::Rinott, &terms);
            r.raw = terms.iter().map(|t| t.1).sum();
            r.clamped = r.raw.min(1.0);
            r.valid = false;
            Ok(r.note(UP_TO_CONSTANT).note("the undefined lowercase n is read as N"))
        }
        Baseline::Penrose => {
            require_mean(profile, "penrose")?;
            let third = 6.0 * d1 / v.powf(1.5) * profile.a(3.0)?.sqrt();
            let fourth = 6.0 * d1.powf(1.5) / (v * v) * profile.a(4.0)?.sqrt();
            let mut r = BoundReport::max_of(TheoremId::Penrose, &[("third", third), ("fourth", fourth)]);
            r.raw = third + fourth;
            r.clamped = r.raw.min(1.0);
            Ok(r)
        }
        Baseline::ChenShao => {
            let best = profile
                .moments
                .iter()
                .filter(|e| e.m.is_some())
                .map(|e| e.delta)
                .filter(|&d| d > 2.0 && d <= 3.0)
                .filter_map(|d| chen_shao(profile, d).ok())
                .min_by(|a, b| a.raw.total_cmp(&b.raw));
            match best {
                Some(r) => Ok(r),
                None => {
                    centered_note(profile, "chen_shao")?;
                    Err(Error::MissingMoment("M_delta for some delta in (2, 3]".into()))
                }
            }
        }
        Baseline::FmnThm39 => profile
            .moments
            .iter()
            .filter(|e| e.m.is_some())
            .map(|e| e.delta)
            .filter(|&d| d > 6.0)
            .filter_map(|d| fmn_thm39(profile, d).ok())
            .min_by(|a, b| a.raw.total_cmp(&b.raw))
            .ok_or_else(|| Error::MissingMoment("M_delta for some delta > 6".into())),
        Baseline::SteinW1 => {
            let note = centered_note(profile, "stein_w1")?;
            // neighbourhood size D+1 (closed neighbourhoods)
            let w1 = d1 * d1 / v.powi(3) * profile.a(3.0)?
                + (26.0 / PI).sqrt() * d1.powf(1.5) / (v * v) * profile.a(4.0)?.sqrt();
            let dkol = 2.0 * (w1 / (2.0 * PI).sqrt()).sqrt();
            let mut r = BoundReport::new(TheoremId::SteinW1, dkol, "from_w1").extra("w1", w1);
            r.notes.extend(note);
            Ok(r.note("dkol <= 2 sqrt(W1 / sqrt(2 pi)); degree factor uses D+1"))
        }
    }
}

/// 75 N (D+1)^{5(δ−1)} θ^δ / v^δ with θ = M_δ, δ ∈ (2,3].
pub fn chen_shao(profile: &MomentProfile, delta: f64) -> Result<BoundReport> {
    if !(delta > 2.0 && delta <= 3.0) {
        return Err(Error::WrongRegime(format!("delta = {delta} is not in (2, 3]")));
    }
    profile.require_positive_v()?;
    let note = centered_note(profile, "chen_shao")?;
    let theta = profile.m(delta)?;
    let n = profile.n as f64;
    let d1 = profile.d as f64 + 1.0;
    let raw = 75.0 * n * d1.powf(5.0 * (delta - 1.0)) * (theta / profile.v).powf(delta);
    let mut r = BoundReport::new(TheoremId::ChenShao, raw, "single").extra("delta", delta);
    r.notes.extend(note);
    Ok(r)
}

/// N^{(3+δ)/(3δ)}(D+1)^{2/3}/v, which must tend to 0 along the sequence.
fn fmn_condition(profile: &MomentProfile, delta: f64) -> f64 {
    (profile.n as f64).powf((3.0 + delta) / (3.0 * delta)) * (profile.d as f64 + 1.0).powf(2.0 / 3.0) / profile.v
}

/// (M_δ N^{(3+δ)/(3δ)}(D+1)^{2/3}/v)^{3δ/(δ+3)}, δ > 6, constant 1.
pub fn fmn_thm39(profile: &MomentProfile, delta: f64) -> Result<BoundReport> {
    if !(delta > 6.0) || !delta.is_finite() {
        return Err(Error::WrongRegime(format!("delta = {delta} must exceed 6")));
    }
    profile.require_positive_v()?;
    let a = profile.m(delta)?;
    let cond = fmn_condition(profile, delta);
    let raw = (a * cond).powf(3.0 * delta / (delta + 3.0));
    let mut r = BoundReport::new(TheoremId::FmnThm39, raw, "single")
        .extra("delta", delta)
        .extra("condition", cond)
        .note(UP_TO_CONSTANT)
        .note("asymptotic: needs the condition quantity to tend to 0 along the sequence");
    r.valid = false;
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionTrend {
    pub values: Vec<f64>,
    /// slope of ln(condition) against ln N
    pub slope: Option<f64>,
    pub trends_to_zero: bool,
}

/// Whether the FMN condition quantity decreases to 0 along a sequence of
/// profiles ordered by N.
pub fn fmn_condition_trend(profiles: &[MomentProfile], delta: f64) -> Result<ConditionTrend> {
    if profiles.len() < 2 {
        return Err(Error::Insufficient("need at least two profiles".into()));
    }
    let mut values = Vec::with_capacity(profiles.len());
    for p in profiles {
        p.require_positive_v()?;
        values.push(fmn_condition(p, delta));
    }
    let ns: Vec<f64> = profiles.iter().map(|p| p.n as f64).collect();
    let slope = log_log_slope(&ns, &values);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    Ok(ConditionTrend { trends_to_zero: decreasing && slope.is_some_and(|s| s < 0.0), values, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classical_be_rademacher() {
        let p = MomentProfile::new(100, 0, 10.0).with_moment(3.0, 100.0);
        assert_relative_eq!(baseline(&p, Baseline::ClassicalBe).unwrap().raw, 0.05583, max_relative = 1e-12);
        let dep = MomentProfile::new(100, 1, 10.0).with_moment(3.0, 100.0);
        assert!(matches!(baseline(&dep, Baseline::ClassicalBe), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn penrose_example() {
        let p = MomentProfile::new(1_000_000, 0, 1e3).with_moment(3.0, 1e6).with_moment(4.0, 1e6);
        let r = baseline(&p, Baseline::Penrose).unwrap();
        let expect = 6.0 * 1e3 / 1e3f64.powf(1.5) + 6.0 * 1e3 / 1e6;
        assert_relative_eq!(r.raw, expect, max_relative = 1e-12);
        assert!((r.raw - 0.195737).abs() < 1e-6);
        let z = p.clone().with_centering(CenteringChoice::Zero);
        assert!(matches!(baseline(&z, Baseline::Penrose), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn chen_shao_example() {
        for n in [100usize, 10_000] {
            let p = MomentProfile::new(n, 0, (n as f64).sqrt()).with_max_moment(3.0, 1.0);
            let r = baseline(&p, Baseline::ChenShao).unwrap();
            assert_relative_eq!(r.raw, 75.0 / (n as f64).sqrt(), max_relative = 1e-12);
        }
        let custom = MomentProfile::new(2, 0, 1.0)
            .with_max_moment(3.0, 1.0)
            .with_centering(CenteringChoice::Custom { custom_values: vec![0.1, 0.2] });
        assert!(matches!(baseline(&custom, Baseline::ChenShao), Err(Error::WrongRegime(_))));
        let p = MomentProfile::new(100, 0, 10.0).with_max_moment(3.5, 1.0);
        assert!(matches!(chen_shao(&p, 3.5), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn comparative_baselines_flagged() {
        let p = MomentProfile::new(1000, 1, 40.0).with_l(1.0).with_max_moment(8.0, 1.0);
        let r = baseline(&p, Baseline::Rinott).unwrap();
        assert!(!r.valid && r.notes.iter().any(|n| n.contains("absolute constant")));
        let expect = 2.0 / 40.0 + (1000.0f64 / 1600.0).sqrt() * 2f64.powf(1.5) / 40.0 + 1000.0 / 1600.0 * 4.0 / 40.0;
        assert_relative_eq!(r.raw, expect, max_relative = 1e-12);
        let f = baseline(&p, Baseline::FmnThm39).unwrap();
        assert!(!f.valid);
        let cond = 1000f64.powf(11.0 / 24.0) * 2f64.powf(2.0 / 3.0) / 40.0;
        assert_relative_eq!(f.extras["condition"], cond, max_relative = 1e-12);
        assert_relative_eq!(f.raw, cond.powf(24.0 / 11.0), max_relative = 1e-12);
    }

    #[test]
    fn fmn_trend() {
        let seq: Vec<_> = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&n: &f64| MomentProfile::new(n as usize, 0, n.sqrt()).with_max_moment(8.0, 1.0))
            .collect();
        let t = fmn_condition_trend(&seq, 8.0).unwrap();
        // exponent (3+δ)/(3δ) − 1/2 = 11/24 − 12/24
        assert_relative_eq!(t.slope.unwrap(), -1.0 / 24.0, max_relative = 1e-9);
        assert!(t.trends_to_zero);
        let flat: Vec<_> = [1e3, 1e4]
            .iter()
            .map(|&n: &f64| MomentProfile::new(n as usize, 0, n.powf(0.3)).with_max_moment(8.0, 1.0))
            .collect();
        assert!(!fmn_condition_trend(&flat, 8.0).unwrap().trends_to_zero);
    }

    #[test]
    fn stein_w1_reports_both() {
        let p = MomentProfile::new(1_000_000, 0, 1e3).with_moment(3.0, 1e6).with_moment(4.0, 1e6);
        let r = baseline(&p, Baseline::SteinW1).unwrap();
        let w1 = 1e6 / 1e9 + (26.0 / PI).sqrt() * 1e3 / 1e6;
        assert_relative_eq!(r.extras["w1"], w1, max_relative = 1e-12);
        assert_relative_eq!(r.raw, 2.0 * (w1 / (2.0 * PI).sqrt()).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn parse_names() {
        for b in Baseline::ALL {
            assert_eq!(b.theorem_id().as_str().parse::<Baseline>().unwrap(), b);
        }
        assert!("nope".parse::<Baseline>().is_err());
    }
}
