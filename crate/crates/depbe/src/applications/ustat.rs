//! U-statistics over ordered tuples of distinct indices, viewed as sums
//! with an explicit dependency graph on the tuples.

use serde::Serialize;
use std::fmt;
use std::sync::Arc;

use crate::bounds::{BoundReport, TheoremId};
use crate::error::{Error, Result};
use crate::model::{DependencyGraph, DiscreteFamily};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::par::{map_indexed, Exec};

/// Largest number of kernel evaluations the enumerator accepts.
pub const MAX_KERNEL_EVALS: u64 = 2_000_000_000;

type KernelFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    /// x (ℓ = 1)
    Mean,
    /// (x − y)²/2
    Variance,
    /// |x − y|
    AbsDiff,
    /// x·y
    Product,
    Custom { ell: usize, symmetric: bool, f: KernelFn },
}

impl Kernel {
    pub fn custom(ell: usize, symmetric: bool, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::Custom { ell, symmetric, f: Arc::new(f) }
    }

    pub fn ell(&self) -> usize {
        match self {
            Kernel::Mean => 1,
            Kernel::Variance | Kernel::AbsDiff | Kernel::Product => 2,
            Kernel::Custom { ell, .. } => *ell,
        }
    }

    pub fn symmetric(&self) -> bool {
        match self {
            Kernel::Custom { symmetric, .. } => *symmetric,
            _ => true,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Kernel::Mean => x[0],
            Kernel::Variance => 0.5 * (x[0] - x[1]).powi(2),
            Kernel::AbsDiff => (x[0] - x[1]).abs(),
            Kernel::Product => x[0] * x[1],
            Kernel::Custom { f, .. } => f(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Mean => "mean",
            Kernel::Variance => "var",
            Kernel::AbsDiff => "absdiff",
            Kernel::Product => "product",
            Kernel::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({}, ell={})", self.name(), self.ell())
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Kernel::Mean),
            "var" | "variance" => Ok(Kernel::Variance),
            "absdiff" | "gini" => Ok(Kernel::AbsDiff),
            "product" => Ok(Kernel::Product),
            _ => Err(Error::InvalidInput(format!("unknown kernel '{s}' (mean, var, absdiff, product)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UStatSpec {
    pub kernel: Kernel,
    pub n: usize,
    /// maximal degree of the dependency graph of the data
    pub m: usize,
}

impl UStatSpec {
    pub fn new(kernel: Kernel, n: usize, m: usize) -> Result<Self> {
        if kernel.ell() == 0 {
            return Err(Error::InvalidInput("kernel order must be at least 1".into()));
        }
        if n < kernel.ell() {
            return Err(Error::Insufficient(format!("n = {n} < ell = {}", kernel.ell())));
        }
        Ok(Self { kernel, n, m })
    }

    pub fn ell(&self) -> usize {
        self.kernel.ell()
    }
}

/// n!/(n−k)! as f64.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Visits every ordered tuple of `ell` distinct indices below n whose
/// first entry is `first`.
fn for_each_tuple_from(n: usize, ell: usize, first: usize, mut f: impl FnMut(&[usize])) {
    fn rec(n: usize, ell: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == ell {
            f(cur);
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, ell, used, cur, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut used = vec![false; n];
    used[first] = true;
    let mut cur = vec![first];
    rec(n, ell, &mut used, &mut cur, &mut f);
}

/// Visits every increasing `ell`-subset of 0..n whose smallest entry is `first`.
fn for_each_combination_from(n: usize, ell: usize, first: usize, mut f: impl FnMut(&[usize])) {
    fn rec(n: usize, ell: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == ell {
            f(cur);
            return;
        }
        let start = cur.last().map_or(0, |&x| x + 1);
        for i in start..n {
            cur.push(i);
            rec(n, ell, cur, f);
            cur.pop();
        }
    }
    let mut cur = vec![first];
    rec(n, ell, &mut cur, &mut f);
}

/// Σ over ordered tuples α of f(X_α). Work is split by first index and
/// reduced in index order.
pub fn kernel_sum(kernel: &Kernel, data: &[f64], exec: Exec) -> Result<f64> {
    let (n, ell) = (data.len(), kernel.ell());
    if n < ell {
        return Err(Error::Insufficient(format!("n = {n} < ell = {ell}")));
    }
    let evals = falling_factorial(n, ell);
    if evals > MAX_KERNEL_EVALS as f64 {
        return Err(Error::OracleTooLarge { outcomes: evals as u128, cap: MAX_KERNEL_EVALS });
    }
    let symmetric = kernel.symmetric();
    let weight = falling_factorial(ell, ell);
    let partials = map_indexed(n, exec, |first| {
        let mut acc = CompensatedSum::new();
        let mut buf = vec![0.0; ell];
        if symmetric {
            for_each_combination_from(n, ell, first, |idx| {
                for (b, &i) in buf.iter_mut().zip(idx) {
                    *b = data[i];
                }
                acc.add(weight * kernel.eval(&buf));
            });
        } else {
            for_each_tuple_from(n, ell, first, |idx| {
                for (b, &i) in buf.iter_mut().zip(idx) {
                    *b = data[i];
                }
                acc.add(kernel.eval(&buf));
            });
        }
        acc.value()
    });
    Ok(compensated_sum(partials))
}

/// U_n: the kernel averaged over the n!/(n−ℓ)! ordered tuples.
pub fn u_statistic(spec: &UStatSpec, data: &[f64]) -> Result<f64> {
    if data.len() != spec.n {
        return Err(Error::InvalidInput(format!("expected {} data points, got {}", spec.n, data.len())));
    }
    if data.len() < spec.ell() {
        return Err(Error::Insufficient(format!("n = {} < ell = {}", data.len(), spec.ell())));
    }
    match spec.kernel {
        Kernel::Mean => Ok(compensated_sum(data.iter().copied()) / data.len() as f64),
        Kernel::Variance => sample_variance_centered(data),
        _ => Ok(kernel_sum(&spec.kernel, data, Exec::default())? / falling_factorial(data.len(), spec.ell())),
    }
}

/// (1/(n−1)) Σ (X_k − X̄)².
pub fn sample_variance_centered(data: &[f64]) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Insufficient("sample variance needs n >= 2".into()));
    }
    let mean = compensated_sum(data.iter().copied()) / n as f64;
    Ok(compensated_sum(data.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64)
}

/// (1/(4·C(n,2))) Σ_{i,j} (X_i − X_j)².
pub fn sample_variance_pairwise(data: &[f64]) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Insufficient("sample variance needs n >= 2".into()));
    }
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            acc.add((data[i] - data[j]).powi(2));
        }
    }
    Ok(acc.value() / (2.0 * (n * (n - 1)) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UStatGraph {
    /// |Λ_{n,ℓ}| = n!/(n−ℓ)!
    pub n_vertices: f64,
    /// ℓ²(m+1)·(n−1)!/(n−ℓ)! − 1
    pub d_upper: f64,
    /// ℓ²(m+1)·n^{2ℓ−1}, an upper bound on N(D+1)
    pub nd1_upper: f64,
}

pub fn ustat_graph_bounds(n: usize, ell: usize, m: usize) -> Result<UStatGraph> {
    if ell == 0 || n < ell {
        return Err(Error::InvalidInput(format!("need n >= ell >= 1 (n = {n}, ell = {ell})")));
    }
    let l2m = (ell * ell * (m + 1)) as f64;
    Ok(UStatGraph {
        n_vertices: falling_factorial(n, ell),
        d_upper: l2m * falling_factorial(n - 1, ell - 1) - 1.0,
        nd1_upper: l2m * (n as f64).powi(2 * ell as i32 - 1),
    })
}

/// All ordered ℓ-tuples of distinct indices below n, lexicographic.
pub fn ordered_tuples(n: usize, ell: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for first in 0..n {
        for_each_tuple_from(n, ell, first, |t| out.push(t.to_vec()));
    }
    out
}

/// Maximum degree of the graph on ordered tuples in which α ~ β when some
/// coordinates coincide or are adjacent in `base`.
pub fn tuple_graph_max_degree(base: &DependencyGraph, ell: usize) -> usize {
    let tuples = ordered_tuples(base.vertex_count(), ell);
    let linked = |a: &[usize], b: &[usize]| a.iter().any(|&i| b.iter().any(|&j| i == j || base.adjacent(i, j)));
    tuples
        .iter()
        .map(|a| tuples.iter().filter(|b| b.as_slice() != a.as_slice() && linked(a, b)).count())
        .max()
        .unwrap_or(0)
}

/// Moment inputs for the U-statistic bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum UStatInputs {
    /// max_α ‖f(X_α) − c_α‖_∞ = l
    Bounded { l: f64, var_vn: f64 },
    /// Σ_α ‖f(X_α) − c_α‖_δ^δ = a_delta
    Moment { delta: f64, a_delta: f64, var_vn: f64 },
    /// stationary m-dependent data with V[V_n]/n^{2ℓ−1} → k²
    Stationary { delta: f64, a_delta: f64, var_vn: f64, k: f64 },
}

impl UStatInputs {
    fn var_vn(&self) -> f64 {
        match *self {
            UStatInputs::Bounded { var_vn, .. }
            | UStatInputs::Moment { var_vn, .. }
            | UStatInputs::Stationary { var_vn, .. } => var_vn,
        }
    }
}

/// 𝐚_δ = (𝒜_δ (n−ℓ)!/n!)^{1/δ}
pub fn a_bold(a_delta: f64, n: usize, ell: usize, delta: f64) -> f64 {
    (a_delta / falling_factorial(n, ell)).powf(1.0 / delta)
}

/// Ξ for a scale `a` (𝐚_δ, or L in the bounded case).
pub fn big_xi(scale: f64, var_vn: f64, n: usize, ell: usize, m: usize) -> f64 {
    let denom = (ell * ell * (m + 1)) as f64 * (n as f64).powi(2 * ell as i32 - 1);
    (var_vn / denom).sqrt() / scale
}

fn check_xi(x: f64) -> Result<f64> {
    if x > 0.0 && x <= 1.0 + 1e-12 {
        Ok(x)
    } else {
        Err(Error::InvalidProfile(format!("Xi = {x} is not in (0, 1]; inputs are inconsistent")))
    }
}

pub fn ustat_bound(spec: &UStatSpec, inputs: &UStatInputs) -> Result<BoundReport> {
    let (n, ell, m) = (spec.n, spec.ell(), spec.m);
    let var_vn = inputs.var_vn();
    if !(var_vn > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let l2m = (ell * ell * (m + 1)) as f64;
    let ratio = l2m / n as f64;
    match *inputs {
        UStatInputs::Bounded { l, .. } => {
            if !(l > 0.0) {
                return Err(Error::InvalidInput("L must be positive".into()));
            }
            let x = check_xi(big_xi(l, var_vn, n, ell, m))?;
            Ok(BoundReport::new(TheoremId::Linfty, 227.5 * ratio.sqrt() / x.powi(3), "bounded").extra("Xi", x))
        }
        UStatInputs::Moment { delta, a_delta, .. } => {
            if !(delta > 2.0) {
                return Err(Error::WrongRegime(format!("delta = {delta} must exceed 2")));
            }
            let a = a_bold(a_delta, n, ell, delta);
            let x = check_xi(big_xi(a, var_vn, n, ell, m))?;
            let e = (delta - 2.0) / (2.0 * (delta + 1.0));
            let first = ratio.powf(e) * x.powf(-delta / (delta + 1.0));
            let r = if delta < 3.0 {
                BoundReport::new(TheoremId::Delta2To3, 8.015 * first, "single")
            } else {
                BoundReport::max_of(
                    TheoremId::DeltaGe3,
                    &[("first", 18.96 * first), ("second", 227.5 * ratio.sqrt() / x.powi(3))],
                )
            };
            Ok(r.extra("Xi", x).extra("a_delta_bold", a).extra("delta", delta))
        }
        UStatInputs::Stationary { delta, a_delta, k, .. } => {
            if !(delta > 2.0) {
                return Err(Error::WrongRegime(format!("delta = {delta} must exceed 2")));
            }
            if !(k > 0.0) {
                return Err(Error::InvalidInput("K must be positive".into()));
            }
            let a = a_bold(a_delta, n, ell, delta);
            let nf = n as f64;
            let e = (delta - 2.0) / (2.0 * (delta + 1.0));
            let core = l2m.powf((delta - 1.0) / (delta + 1.0)) * a.powf(delta / (delta + 1.0)) * nf.powf(-e);
            let mut r = if delta < 3.0 {
                BoundReport::new(TheoremId::Delta2To3, 11.335 * k * core, "single")
            } else {
                BoundReport::max_of(
                    TheoremId::DeltaGe3,
                    &[("first", 26.672 * core), ("second", 643.5 * l2m * l2m * a.powi(3) / nf.sqrt())],
                )
            };
            // The large-n condition is on V[V_n].
            let threshold = nf.powi(2 * ell as i32 - 1) * k * k / 2.0;
            r.valid = var_vn >= threshold;
            if !r.valid {
                r = r.note("V[V_n] < n^(2l-1) K^2 / 2: n is not yet large enough");
            }
            if delta < 3.0 {
                r = r
                    .note("the K factor is applied as stated; substituting Xi >= 1/(a sqrt(2 l^2 (m+1))) gives the value without K")
                    .extra("value_without_k", 11.335 * core);
            }
            Ok(r.extra("a_delta_bold", a).extra("delta", delta).extra("variance_threshold", threshold))
        }
    }
}

/// Exact ingredients for a U-statistic of data drawn from a finite family
/// (c_α = E f(X_α)). Enumerates the joint law of the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactUStat {
    pub mean_u: f64,
    pub var_u: f64,
    pub var_vn: f64,
    pub a_delta: f64,
    pub l: f64,
    /// maximal degree of the data's dependency graph
    pub m: usize,
}

pub fn exact_ustat(family: &DiscreteFamily, kernel: &Kernel, delta: f64) -> Result<ExactUStat> {
    let n = family.n();
    let ell = kernel.ell();
    if n < ell {
        return Err(Error::Insufficient(format!("n = {n} < ell = {ell}")));
    }
    let tuples = ordered_tuples(n, ell);
    let nt = tuples.len();
    let mut buf = vec![0.0; ell];
    let mut eval = |values: &[f64], t: &[usize]| {
        for (b, &i) in buf.iter_mut().zip(t) {
            *b = values[i];
        }
        kernel.eval(&buf)
    };
    let mut c = vec![0.0; nt];
    let (mut ev, mut ev2) = (0.0, 0.0);
    family.for_each_outcome(|values, p| {
        let mut v = 0.0;
        for (k, t) in tuples.iter().enumerate() {
            let f = eval(values, t);
            c[k] += p * f;
            v += f;
        }
        ev += p * v;
        ev2 += p * v * v;
    })?;
    let mut a = vec![0.0; nt];
    let mut l: f64 = 0.0;
    family.for_each_outcome(|values, p| {
        for (k, t) in tuples.iter().enumerate() {
            let dev = (eval(values, t) - c[k]).abs();
            a[k] += p * dev.powf(delta);
            if p > 0.0 {
                l = l.max(dev);
            }
        }
    })?;
    let var_vn = (ev2 - ev * ev).max(0.0);
    let nf = nt as f64;
    Ok(ExactUStat {
        mean_u: ev / nf,
        var_u: var_vn / (nf * nf),
        var_vn,
        a_delta: compensated_sum(a),
        l,
        m: family.graph().max_degree(),
    })
}

/// Plug-in estimates of 𝒜_δ and V[V_n] from a single data set, for when no
/// model is available. 𝒜_δ uses c_α = U_n; V[V_n] uses the first Hoeffding
/// projection with autocovariances up to lag m. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PluginEstimate {
    pub u: f64,
    pub a_delta: f64,
    pub var_vn: f64,
    pub l: f64,
}

pub fn plugin_estimate(spec: &UStatSpec, data: &[f64], delta: f64) -> Result<PluginEstimate> {
    let (n, ell) = (data.len(), spec.ell());
    if n != spec.n {
        return Err(Error::InvalidInput(format!("expected {} data points, got {}", spec.n, n)));
    }
    if n < ell.max(2) {
        return Err(Error::Insufficient(format!("n = {n} too small")));
    }
    let nt = falling_factorial(n, ell);
    if nt > MAX_KERNEL_EVALS as f64 {
        return Err(Error::OracleTooLarge { outcomes: nt as u128, cap: MAX_KERNEL_EVALS });
    }
    let u = kernel_sum(&spec.kernel, data, Exec::default())? / nt;
    let mut h = vec![CompensatedSum::new(); n];
    let mut a = CompensatedSum::new();
    let mut l: f64 = 0.0;
    let mut buf = vec![0.0; ell];
    for first in 0..n {
        for_each_tuple_from(n, ell, first, |t| {
            for (b, &i) in buf.iter_mut().zip(t) {
                *b = data[i];
            }
            let dev = spec.kernel.eval(&buf) - u;
            a.add(dev.abs().powf(delta));
            l = l.max(dev.abs());
            for &i in t {
                h[i].add(dev);
            }
        });
    }
    // each index appears in ℓ·(n−1)!/(n−ℓ)! tuples
    let per = ell as f64 * falling_factorial(n - 1, ell - 1);
    let h: Vec<f64> = h.iter().map(|s| s.value() / per).collect();
    let hm = compensated_sum(h.iter().copied()) / n as f64;
    let gamma = |lag: usize| -> f64 {
        compensated_sum((lag..n).map(|i| (h[i] - hm) * (h[i - lag] - hm))) / n as f64
    };
    let mut lrv = gamma(0);
    for lag in 1..=spec.m.min(n - 1) {
        lrv += 2.0 * gamma(lag);
    }
    let var_u = (ell * ell) as f64 * lrv.max(0.0) / n as f64;
    Ok(PluginEstimate { u, a_delta: a.value(), var_vn: var_u * nt * nt, l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CenteringChoice, DiscreteLaw};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_examples() {
        let mean = UStatSpec::new(Kernel::Mean, 3, 0).unwrap();
        assert_eq!(u_statistic(&mean, &[1.0, 2.0, 3.0]).unwrap(), 2.0);
        let var = UStatSpec::new(Kernel::Variance, 3, 0).unwrap();
        assert_relative_eq!(u_statistic(&var, &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!(matches!(UStatSpec::new(Kernel::Variance, 1, 0), Err(Error::Insufficient(_))));
    }

    #[test]
    fn enumeration_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 4.0 - 1.0).collect();
        let asym = Kernel::custom(2, false, |x| 0.5 * (x[0] - x[1]).powi(2));
        let sym = Kernel::custom(2, true, |x| 0.5 * (x[0] - x[1]).powi(2));
        let target = sample_variance_centered(&data).unwrap();
        for k in [asym, sym] {
            let spec = UStatSpec::new(k, data.len(), 0).unwrap();
            assert_relative_eq!(u_statistic(&spec, &data).unwrap(), target, max_relative = 1e-12);
        }
        let id = Kernel::custom(1, false, |x| x[0]);
        let spec = UStatSpec::new(id, data.len(), 0).unwrap();
        assert_relative_eq!(
            u_statistic(&spec, &data).unwrap(),
            data.iter().sum::<f64>() / 12.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sample_variance_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.random_range(2..40);
            let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let a = sample_variance_centered(&data).unwrap();
            let b = sample_variance_pairwise(&data).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn graph_bound_examples() {
        let g = ustat_graph_bounds(10, 2, 0).unwrap();
        assert_eq!(g.n_vertices, 90.0);
        assert_eq!(g.d_upper, 35.0);
        let g = ustat_graph_bounds(7, 1, 0).unwrap();
        assert_eq!((g.n_vertices, g.d_upper), (7.0, 0.0));
        let brute = tuple_graph_max_degree(&DependencyGraph::empty(6).unwrap(), 2);
        assert_eq!(brute, 17);
        assert!(brute as f64 <= ustat_graph_bounds(6, 2, 0).unwrap().d_upper);
    }

    #[test]
    fn three_point_ordered_tuples() {
        assert_eq!(ordered_tuples(3, 2).len(), 6);
        assert_eq!(ordered_tuples(5, 3).len(), 60);
    }

    #[test]
    fn exact_instance_identity_and_xi_range() {
        let fam = DiscreteFamily::independent(
            vec![DiscreteLaw::from_pairs(&[(0.0, 0.3), (1.0, 0.5), (3.0, 0.2)]).unwrap(); 5],
            CenteringChoice::Mean,
        )
        .unwrap();
        let e = exact_ustat(&fam, &Kernel::Variance, 3.0).unwrap();
        let nt = falling_factorial(5, 2);
        assert_relative_eq!(e.var_vn / e.var_u, nt * nt, max_relative = 1e-12);
        let spec = UStatSpec::new(Kernel::Variance, 5, 0).unwrap();
        let x = big_xi(a_bold(e.a_delta, 5, 2, 3.0), e.var_vn, 5, 2, 0);
        assert!(x > 0.0 && x <= 1.0);
        assert!(ustat_bound(&spec, &UStatInputs::Moment { delta: 3.0, a_delta: e.a_delta, var_vn: e.var_vn }).is_ok());
        let xl = big_xi(e.l, e.var_vn, 5, 2, 0);
        assert!(xl > 0.0 && xl <= 1.0);
    }

    #[test]
    fn bound_formulas() {
        // δ = 2.5, ℓ = 2, m = 0, n = 10⁴, Ξ = 1/2
        let (n, ell, m, delta) = (10_000usize, 2usize, 0usize, 2.5);
        let a = 1.0;
        let denom = (ell * ell * (m + 1)) as f64 * (n as f64).powi(3);
        let var_vn = 0.25 * denom;
        let a_delta = falling_factorial(n, ell) * a;
        let spec = UStatSpec::new(Kernel::Variance, n, m).unwrap();
        let r = ustat_bound(&spec, &UStatInputs::Moment { delta, a_delta, var_vn }).unwrap();
        assert_relative_eq!(r.extras["Xi"], 0.5, max_relative = 1e-12);
        let expected = 8.015 * (4e-4f64).powf(1.0 / 14.0) * 2f64.powf(5.0 / 7.0);
        assert_relative_eq!(r.raw, expected, max_relative = 1e-12);

        let r = ustat_bound(&spec, &UStatInputs::Bounded { l: 1.0, var_vn }).unwrap();
        assert_relative_eq!(r.raw, 227.5 * (4e-4f64).sqrt() * 8.0, max_relative = 1e-12);

        let bad = UStatInputs::Bounded { l: 1.0, var_vn: 4.0 * denom };
        assert!(matches!(ustat_bound(&spec, &bad), Err(Error::InvalidProfile(_))));
        let zero = UStatInputs::Bounded { l: 1.0, var_vn: 0.0 };
        assert!(matches!(ustat_bound(&spec, &zero), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn stationary_variant_validity() {
        let spec = UStatSpec::new(Kernel::Variance, 1000, 1).unwrap();
        let nf = 1000f64;
        let ok = UStatInputs::Stationary { delta: 2.5, a_delta: 1e6, var_vn: nf.powi(3), k: 1.0 };
        assert!(ustat_bound(&spec, &ok).unwrap().valid);
        let early = UStatInputs::Stationary { delta: 3.5, a_delta: 1e6, var_vn: 0.1 * nf.powi(3), k: 1.0 };
        assert!(!ustat_bound(&spec, &early).unwrap().valid);
    }

    #[test]
    fn parallel_reduction_is_deterministic() {
        let data: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let a = kernel_sum(&Kernel::AbsDiff, &data, Exec::Parallel).unwrap();
        let b = kernel_sum(&Kernel::AbsDiff, &data, Exec::Sequential).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn plugin_on_iid_data_is_sane() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..200).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let spec = UStatSpec::new(Kernel::Mean, 200, 0).unwrap();
        let p = plugin_estimate(&spec, &data, 3.0).unwrap();
        // V[V_n] for the mean kernel is n·Var X ≈ 200
        assert!((p.var_vn / 200.0 - 1.0).abs() < 0.1);
    }
}
