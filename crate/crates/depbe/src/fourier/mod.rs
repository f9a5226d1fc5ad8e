//! Exact characteristic functions and Kolmogorov distances of standardized
//! discrete sums, the smoothing inequality, and numerical checks of the
//! zone-of-control estimates.

mod normal;
pub mod quad;

pub use normal::normal_cdf;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{E, PI};

use crate::cumulants::{constant_c, TruncationContext};
use crate::error::{Error, Result};
use crate::model::{xi, Atom, DiscreteFamily, MomentProfile};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Law of W = (S − E S)/v as sorted atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedLaw {
    atoms: Vec<Atom>,
}

impl StandardizedLaw {
    /// Standardizes an arbitrary finite law.
    pub fn from_atoms(atoms: &[Atom]) -> Result<Self> {
        let total = compensated_sum(atoms.iter().map(|a| a.p));
        if (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| !(a.p >= 0.0) || !a.x.is_finite()) {
            return Err(Error::InvalidInput("atoms do not form a probability law".into()));
        }
        let mu = compensated_sum(atoms.iter().map(|a| a.p * a.x));
        let var = compensated_sum(atoms.iter().map(|a| a.p * (a.x - mu).powi(2)));
        if !(var > 0.0) {
            return Err(Error::DegenerateVariance);
        }
        let sd = var.sqrt();
        let mut out: Vec<Atom> = atoms
            .iter()
            .map(|a| Atom { x: (a.x - mu) / sd, p: a.p })
            .collect();
        out.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(Self { atoms: out })
    }

    /// Law of the standardized sum of a family, by exact convolution.
    pub fn from_family(family: &DiscreteFamily) -> Result<Self> {
        Self::from_atoms(&family.sum_law()?)
    }

    /// Atoms taken as already standardized (only sorted); used to model a
    /// degenerate W such as a point mass at 0.
    pub fn from_standardized_atoms(atoms: &[Atom]) -> Self {
        let mut out = atoms.to_vec();
        out.sort_by(|a, b| a.x.total_cmp(&b.x));
        Self { atoms: out }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn abs_moment(&self, k: f64) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.p * a.x.abs().powf(k)))
    }
}

/// E[e^{isW}]
pub fn exact_cf(law: &StandardizedLaw, s: f64) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for a in law.atoms() {
        let (sn, cs) = (s * a.x).sin_cos();
        re.add(a.p * cs);
        im.add(a.p * sn);
    }
    Complex64::new(re.value(), im.value())
}

/// E[e^{isW}] for the standardized sum of a family, as a product over its
/// independent components (no convolution needed).
pub fn standardized_sum_cf(family: &DiscreteFamily, s: f64) -> Result<Complex64> {
    let v = family.variance_of_sum()?;
    if !(v > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    centered_sum_cf(family, s / v.sqrt())
}

/// E[e^{it(S − E S)}]
fn centered_sum_cf(family: &DiscreteFamily, t: f64) -> Result<Complex64> {
    let mut prod = Complex64::new(1.0, 0.0);
    for c in 0..family.components().len() {
        let mut mean = CompensatedSum::new();
        family.for_each_component_sum(c, |x, p| mean.add(p * x))?;
        let mu = mean.value();
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        family.for_each_component_sum(c, |x, p| {
            let (sn, cs) = (t * (x - mu)).sin_cos();
            re.add(p * cs);
            im.add(p * sn);
        })?;
        prod *= Complex64::new(re.value(), im.value());
    }
    Ok(prod)
}

/// sup_t |P(W ≤ t) − Φ(t)|, attained at an atom from the left or right.
pub fn exact_dkol(law: &StandardizedLaw) -> f64 {
    let mut below = CompensatedSum::new();
    let mut best: f64 = 0.0;
    for a in law.atoms() {
        let phi = normal_cdf(a.x);
        let left = below.value();
        below.add(a.p);
        let right = below.value().min(1.0);
        best = best.max((left - phi).abs()).max((right - phi).abs());
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct FellerOptions {
    pub tol: f64,
    pub max_panels: usize,
    pub small_s: f64,
}

impl Default for FellerOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_panels: 10_000, small_s: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FellerEvaluation {
    pub rhs: f64,
    pub integral: f64,
    pub small_s_majorant: f64,
    pub tail_term: f64,
    pub quadrature_error: f64,
    pub panels: usize,
}

/// (1/π)∫_{−T}^{T} |cf(s) − e^{−s²/2}|/|s| ds + 24/(Tπ√(2π))
pub fn feller_rhs(law: &StandardizedLaw, t: f64) -> Result<f64> {
    Ok(feller_rhs_with(law, t, FellerOptions::default())?.rhs)
}

pub fn feller_rhs_with(law: &StandardizedLaw, t: f64, opts: FellerOptions) -> Result<FellerEvaluation> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("T = {t} must be positive")));
    }
    let integrand = |s: f64| (exact_cf(law, s) - Complex64::new((-0.5 * s * s).exp(), 0.0)).norm() / s;
    // Near 0 the integrand is at most (E|W|³/6 + 1/6)s², so the piece on
    // [0, ε] is bounded by that constant times ε³/3.
    let eps = opts.small_s.min(t);
    let small = (law.abs_moment(3.0) / 6.0 + 1.0 / 6.0) * eps.powi(3) / 3.0;
    // the integrand is even in s
    let q = quad::integrate(integrand, eps, t, 0.5 * opts.tol, opts.max_panels)?;
    let integral = 2.0 * (q.value + small) / PI;
    let tail_term = 24.0 / (t * PI * (2.0 * PI).sqrt());
    Ok(FellerEvaluation {
        rhs: integral + tail_term,
        integral,
        small_s_majorant: 2.0 * small / PI,
        tail_term,
        quadrature_error: 2.0 * q.error / PI,
        panels: q.panels,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZonePoint {
    pub xi: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneReport {
    pub zone_radius: f64,
    pub k_l: f64,
    pub v_l: f64,
    pub points: Vec<ZonePoint>,
    /// max over points of lhs − rhs (≤ 0 when the estimate holds)
    pub max_violation: f64,
}

/// Compares |E[e^{iξ(S^{(L)}−E S^{(L)})/v_L}] e^{ξ²/2} − 1| with
/// K_L|ξ|³e^{K_L|ξ|³} on a grid inside |ξ| ≤ v_L/(2eL(D+1)).
pub fn zone_check_bounded(family: &DiscreteFamily, l: f64, delta: f64, xi_grid: &[f64]) -> Result<ZoneReport> {
    let ctx = TruncationContext::new(family, l)?;
    let trunc = ctx.truncated_family()?;
    let v_l = trunc.variance_of_sum()?.max(0.0).sqrt();
    if !(v_l > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let d1 = family.graph().max_degree() as f64 + 1.0;
    let radius = v_l / (2.0 * E * l * d1);
    let dp = delta.min(3.0);
    let c = family.centers();
    let a = compensated_sum(family.laws().iter().zip(&c).map(|(law, &ck)| law.abs_moment(ck, dp)));
    let k_l = constant_c().hi * d1 * d1 * (l / v_l).powi(3) * a / l.powf(dp);
    let mut points = Vec::with_capacity(xi_grid.len());
    let mut max_violation = f64::NEG_INFINITY;
    for &x in xi_grid {
        if x.abs() > radius * (1.0 + 1e-12) {
            return Err(Error::WrongRegime(format!(
                "|xi| = {} outside the zone radius {radius}",
                x.abs()
            )));
        }
        let cf = centered_sum_cf(&trunc, x / v_l)?;
        let lhs = (cf * (0.5 * x * x).exp() - Complex64::new(1.0, 0.0)).norm();
        let k = k_l * x.abs().powi(3);
        let rhs = k * k.exp();
        max_violation = max_violation.max(lhs - rhs);
        points.push(ZonePoint { xi: x, lhs, rhs });
    }
    Ok(ZoneReport { zone_radius: radius, k_l, v_l, points, max_violation })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneCondition {
    pub label: &'static str,
    pub limit: f64,
    pub holds: bool,
}

/// Admissible-|s| conditions of the unbounded Fourier estimates.
pub fn fourier_zone_conditions(profile: &MomentProfile, s: f64, delta: f64) -> Result<Vec<ZoneCondition>> {
    let ratio = (profile.n as f64 / (profile.d as f64 + 1.0)).sqrt();
    let c = constant_c().hi;
    let xd = xi(profile, delta)?;
    if delta >= 3.0 {
        let x3 = xi(profile, 3.0)?;
        let l1 = ratio * x3.powi(3) / (6.0 * c);
        let l2 = ratio * (xd.powf(delta) / 9.0).powf(1.0 / (delta - 2.0)) / (2.0 * E);
        Ok(vec![
            ZoneCondition { label: "third-moment zone", limit: l1, holds: s.abs() <= l1 },
            ZoneCondition { label: "delta-moment zone", limit: l2, holds: s.abs() <= l2 },
        ])
    } else if delta > 2.0 {
        let lim = (xd / (2.0 * E)).powf(delta / (delta - 2.0))
            * (4.0 * E * E / (3.0 + c / E)).powf(1.0 / (delta - 2.0))
            * ratio;
        Ok(vec![ZoneCondition { label: "delta-moment zone", limit: lim, holds: s.abs() <= lim }])
    } else {
        Err(Error::WrongRegime(format!("delta = {delta} must exceed 2")))
    }
}

/// Bound on |E[e^{isW}] − e^{−s²/2}| for in-zone s.
pub fn fourier_bound_unbounded(profile: &MomentProfile, s: f64, delta: f64) -> Result<f64> {
    profile.require_positive_v()?;
    for cond in fourier_zone_conditions(profile, s, delta)? {
        if !cond.holds {
            return Err(Error::WrongRegime(format!(
                "{} violated: |s| = {} > {}",
                cond.label,
                s.abs(),
                cond.limit
            )));
        }
    }
    let d1n = (profile.d as f64 + 1.0) / profile.n as f64;
    let c = constant_c().hi;
    let xd = xi(profile, delta)?;
    if delta >= 3.0 {
        let x3 = xi(profile, 3.0)?;
        Ok((1.0 / E + 3.0 / (8.0 * E * E)) * (2.0 * E * s.abs() / xd).powf(delta) * d1n.powf((delta - 2.0) / 2.0)
            + c * (s.abs() / x3).powi(3) * d1n.sqrt() * (-s * s / 6.0).exp())
    } else {
        Ok(d1n.powf(delta / 2.0 - 1.0) * (c + 3.0 * E + 8.0 * E * E) / (8.0 * E.powi(3))
            * (2.0 * E * s.abs() / xd).powf(delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_profile, CenteringChoice, DiscreteLaw};

    fn rademacher_law() -> StandardizedLaw {
        StandardizedLaw::from_atoms(DiscreteLaw::rademacher().atoms()).unwrap()
    }

    #[test]
    fn rademacher_cf_is_cosine() {
        let law = rademacher_law();
        for i in 0..50 {
            let s = i as f64 * 0.37;
            let cf = exact_cf(&law, s);
            assert!((cf.re - s.cos()).abs() < 1e-15 && cf.im.abs() < 1e-15);
            assert!(cf.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn dkol_examples() {
        assert!((exact_dkol(&rademacher_law()) - (0.5 - normal_cdf(-1.0))).abs() < 1e-15);
        let point = StandardizedLaw::from_standardized_atoms(&[Atom { x: 0.0, p: 1.0 }]);
        assert_eq!(exact_dkol(&point), 0.5);
        assert!((exact_cf(&point, 3.0).re - 1.0).abs() < 1e-15);
        let two = DiscreteFamily::independent(vec![DiscreteLaw::rademacher(); 2], CenteringChoice::Mean).unwrap();
        let w = StandardizedLaw::from_family(&two).unwrap();
        assert!((exact_dkol(&w) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dkol_ignores_zero_atoms_and_order() {
        let atoms = [Atom { x: 1.0, p: 0.3 }, Atom { x: -0.5, p: 0.7 }, Atom { x: 4.0, p: 0.0 }];
        let a = StandardizedLaw::from_atoms(&atoms).unwrap();
        let b = StandardizedLaw::from_atoms(&[atoms[1], atoms[0]]).unwrap();
        assert!((exact_dkol(&a) - exact_dkol(&b)).abs() < 1e-15);
    }

    #[test]
    fn feller_tail_term_and_rademacher() {
        let tail = 24.0 / (10.0 * PI * (2.0 * PI).sqrt());
        assert!((tail - 0.304_769_452_484_356_6).abs() < 1e-12);
        let law = rademacher_law();
        assert!(feller_rhs(&law, 10.0).unwrap() >= exact_dkol(&law));
    }

    #[test]
    fn zone_at_origin_and_outside() {
        let f = DiscreteFamily::independent(vec![DiscreteLaw::rademacher(); 6], CenteringChoice::Mean).unwrap();
        let r = zone_check_bounded(&f, 1.0, 3.0, &[0.0, 0.3]).unwrap();
        assert_eq!(r.points[0].lhs, 0.0);
        assert_eq!(r.points[0].rhs, 0.0);
        assert!(r.points[1].lhs <= r.points[1].rhs);
        assert!(matches!(zone_check_bounded(&f, 1.0, 3.0, &[10.0]), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn unbounded_fourier_example_and_origin() {
        use approx::assert_relative_eq;
        // ξ₃ = 1, N/(D+1) = 10⁴
        let p = MomentProfile::new(10_000, 0, 100.0).with_moment(3.0, 10_000.0);
        let c = constant_c().hi;
        let expect = (1.0 / E + 3.0 / (8.0 * E * E)) * (2.0 * E).powi(3) * 1e-2 + c * 1e-2 * (-1.0f64 / 6.0).exp();
        assert_relative_eq!(fourier_bound_unbounded(&p, 1.0, 3.0).unwrap(), expect, max_relative = 1e-14);
        assert_eq!(fourier_bound_unbounded(&p, 0.0, 3.0).unwrap(), 0.0);
        assert!(matches!(fourier_bound_unbounded(&p, 50.0, 3.0), Err(Error::WrongRegime(_))));
        let q = MomentProfile::new(10_000, 0, 100.0).with_moment(2.5, 10_000.0);
        assert_eq!(fourier_bound_unbounded(&q, 0.0, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn exact_family_within_fourier_bound() {
        let laws = vec![DiscreteLaw::from_pairs(&[(-1.0, 0.3), (0.5, 0.5), (2.0, 0.2)]).unwrap(); 8];
        let f = DiscreteFamily::independent(laws, CenteringChoice::Mean).unwrap();
        let p = derive_profile(&f, &[3.0, 4.0]).unwrap();
        for delta in [3.0, 4.0] {
            let lim = fourier_zone_conditions(&p, 0.0, delta)
                .unwrap()
                .iter()
                .map(|c| c.limit)
                .fold(f64::INFINITY, f64::min);
            for j in 1..=10 {
                let s = lim * j as f64 / 10.0;
                let exact = (standardized_sum_cf(&f, s).unwrap() - Complex64::new((-0.5 * s * s).exp(), 0.0)).norm();
                assert!(exact <= fourier_bound_unbounded(&p, s, delta).unwrap());
            }
        }
    }
}
