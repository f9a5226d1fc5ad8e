//! Finite-sequence diagnostics for the CLT and WLLN conditions of a
//! triangular array with dependency graphs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{xi, MomentProfile};
use crate::numeric::log_log_slope;

/// Fitted log-log slope below which a quantity is reported as tending to 0.
pub const TREND_THRESHOLD: f64 = -0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSeries {
    pub label: String,
    pub values: Vec<f64>,
    /// least-squares slope of ln(value) against ln(N)
    pub slope: Option<f64>,
    /// whether the quantity trends to 0
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub delta: f64,
    pub ns: Vec<usize>,
    pub conditions: Vec<ConditionSeries>,
    /// 𝒜_δ(N), for the WLLN requirement liminf 𝒜_δ > 0
    pub a_delta: Vec<f64>,
    /// slope of ln 𝒜_δ against ln N; a non-negative slope is consistent
    /// with 𝒜_δ bounded away from 0
    pub a_delta_slope: Option<f64>,
    pub wlln_lower_bound_plausible: Verdict,
}

fn series(label: &str, ns: &[f64], values: Vec<f64>) -> ConditionSeries {
    let slope = log_log_slope(ns, &values);
    let verdict = match slope {
        None => Verdict::Inconclusive,
        Some(s) if s < TREND_THRESHOLD => Verdict::Yes,
        Some(_) => Verdict::No,
    };
    ConditionSeries { label: label.into(), values, slope, verdict }
}

/// Evaluates the displayed condition quantities along a profile sequence.
/// δ-conditions use 𝒜_δ; the bounded condition is included when every
/// profile carries L.
pub fn clt_condition_check(profiles: &[MomentProfile], delta: f64) -> Result<CltReport> {
    if profiles.len() < 3 {
        return Err(Error::Insufficient(format!("need at least 3 profiles, got {}", profiles.len())));
    }
    if !(delta > 2.0) {
        return Err(Error::WrongRegime(format!("delta = {delta} must exceed 2")));
    }
    for p in profiles {
        p.require_positive_v()?;
    }
    let ns: Vec<f64> = profiles.iter().map(|p| p.n as f64).collect();
    let ratio = |p: &MomentProfile| (p.d as f64 + 1.0) / p.n as f64;
    let mut conditions = Vec::new();

    let has_a = profiles.iter().all(|p| p.a(delta).is_ok());
    if has_a {
        let xis = profiles.iter().map(|p| xi(p, delta)).collect::<Result<Vec<_>>>()?;
        let q1: Vec<f64> = profiles
            .iter()
            .zip(&xis)
            .map(|(p, x)| ratio(p).powf(0.5 - 1.0 / delta) / x)
            .collect();
        conditions.push(series("xi^-1 ((D+1)/N)^(1/2-1/delta)", &ns, q1));
        if delta >= 3.0 {
            let q2: Vec<f64> = profiles.iter().zip(&xis).map(|(p, x)| ratio(p).sqrt() / x.powi(3)).collect();
            conditions.push(series("xi^-3 ((D+1)/N)^(1/2)", &ns, q2));
        }
    }
    if profiles.iter().all(|p| p.l().is_ok()) {
        let q3 = profiles.iter().map(|p| (p.d as f64 + 1.0) / p.v).collect();
        conditions.push(series("(D+1)/v", &ns, q3));
        let q4 = profiles
            .iter()
            .map(|p| p.n as f64 * (p.d as f64 + 1.0).powi(2) / p.v.powi(3))
            .collect();
        conditions.push(series("N(D+1)^2/v^3", &ns, q4));
    }
    if conditions.is_empty() {
        return Err(Error::MissingMoment(format!("profiles carry neither A_{delta} nor L")));
    }

    let a_delta: Vec<f64> = if has_a {
        profiles.iter().map(|p| p.a(delta)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let a_delta_slope = log_log_slope(&ns, &a_delta);
    let wlln = match a_delta_slope {
        None => Verdict::Inconclusive,
        Some(s) if s >= TREND_THRESHOLD => Verdict::Yes,
        Some(_) => Verdict::No,
    };
    Ok(CltReport {
        delta,
        ns: profiles.iter().map(|p| p.n).collect(),
        conditions,
        a_delta,
        a_delta_slope,
        wlln_lower_bound_plausible: wlln,
    })
}
