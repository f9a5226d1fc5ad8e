//! Named families: clique blocks, m-dependent windows, the three-point
//! counterexample, Bernoulli(1/k) and user-supplied families. Each spec
//! yields an exact `DiscreteFamily` (small N), a closed-form moment profile
//! and a sampler for S.

mod sampler;

pub use sampler::Sampler;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    derive_profile, Atom, CenteringChoice, DependencyGraph, DiscreteFamily, DiscreteLaw, FamilyJson, MomentProfile,
    Vertex,
};
use crate::numeric::CompensatedSum;

/// Symmetric function applied to each window of m+1 consecutive inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFn {
    Product,
    Sum,
    Mean,
}

impl WindowFn {
    pub fn apply(self, xs: &[f64]) -> f64 {
        match self {
            WindowFn::Product => xs.iter().product(),
            WindowFn::Sum => xs.iter().sum(),
            WindowFn::Mean => xs.iter().sum::<f64>() / xs.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `n_blocks` independent draws of `law`, each copied `block_size` times.
    CliqueBlocks { n_blocks: usize, block_size: usize, law: DiscreteLaw },
    /// Y_k = window(X_k, ..., X_{k+m}) on `n` i.i.d. inputs, so N = n − m.
    MDependentWindow { n: usize, m: usize, law: DiscreteLaw, window: WindowFn },
    /// Independent Y_k ∈ {−k^{1/δ}, 0, k^{1/δ}}, k = 1..n.
    ThreePoint { delta: f64, n: usize },
    /// Independent Ber(1/k), k = 1..n.
    BernoulliDecay { n: usize },
    Custom { family: FamilyJson },
}

pub fn clique_blocks(n_blocks: usize, block_size: usize, law: DiscreteLaw) -> Result<FamilySpec> {
    FamilySpec::CliqueBlocks { n_blocks, block_size, law }.validated()
}

pub fn m_dependent_window(n: usize, m: usize, law: DiscreteLaw, window: WindowFn) -> Result<FamilySpec> {
    FamilySpec::MDependentWindow { n, m, law, window }.validated()
}

pub fn three_point_family(delta: f64, n: usize) -> Result<FamilySpec> {
    FamilySpec::ThreePoint { delta, n }.validated()
}

pub fn bernoulli_decay(n: usize) -> Result<FamilySpec> {
    FamilySpec::BernoulliDecay { n }.validated()
}

/// Law of the k-th three-point variable (k ≥ 1).
pub fn three_point_law(delta: f64, k: usize) -> DiscreteLaw {
    let x = (k as f64).powf(1.0 / delta);
    let q = three_point_nonzero_prob(delta, k as u64);
    let mut atoms = vec![Atom { x: -x, p: 0.5 * q }, Atom { x, p: 0.5 * q }];
    if q < 1.0 {
        atoms.insert(1, Atom { x: 0.0, p: 1.0 - q });
    }
    DiscreteLaw::new(atoms).expect("three-point law is valid")
}

/// P[Y_k ≠ 0] = 1 − ((k−1)/k)^{2/δ}
pub(crate) fn three_point_nonzero_prob(delta: f64, k: u64) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    -((2.0 / delta) * (-1.0 / k as f64).ln_1p()).exp_m1()
}

impl FamilySpec {
    pub fn validated(self) -> Result<Self> {
        match &self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, .. } => {
                if *n_blocks == 0 || *block_size == 0 {
                    return Err(Error::InvalidInput("n_blocks and block_size must be >= 1".into()));
                }
            }
            FamilySpec::MDependentWindow { n, m, .. } => {
                if *n < m + 1 {
                    return Err(Error::InvalidInput(format!("window needs n >= m+1, got n={n}, m={m}")));
                }
            }
            FamilySpec::ThreePoint { delta, n } => {
                if !(*delta >= 3.0) || !delta.is_finite() {
                    return Err(Error::WrongRegime(format!("three-point family needs delta >= 3, got {delta}")));
                }
                if *n < 2 {
                    return Err(Error::InvalidInput("three-point family needs n >= 2".into()));
                }
            }
            FamilySpec::BernoulliDecay { n } => {
                if *n < 2 {
                    return Err(Error::InvalidInput("bernoulli_decay needs n >= 2".into()));
                }
            }
            FamilySpec::Custom { family } => {
                family.to_family()?;
            }
        }
        Ok(self)
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Short human-readable identifier.
    pub fn id(&self) -> String {
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, .. } => {
                format!("clique_blocks(n_blocks={n_blocks},block_size={block_size})")
            }
            FamilySpec::MDependentWindow { n, m, window, .. } => {
                format!("m_dependent_window(n={n},m={m},window={window:?})").to_lowercase()
            }
            FamilySpec::ThreePoint { delta, n } => format!("three_point(delta={delta},n={n})"),
            FamilySpec::BernoulliDecay { n } => format!("bernoulli_decay(n={n})"),
            FamilySpec::Custom { family } => format!("custom(n={})", family.laws.len()),
        }
    }

    /// Number of summands N.
    pub fn n(&self) -> usize {
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, .. } => n_blocks * block_size,
            FamilySpec::MDependentWindow { n, m, .. } => n - m,
            FamilySpec::ThreePoint { n, .. } | FamilySpec::BernoulliDecay { n } => *n,
            FamilySpec::Custom { family } => family.laws.len(),
        }
    }

    /// Whether the summands are mutually independent (D = 0 by construction).
    pub fn is_independent(&self) -> bool {
        match self {
            FamilySpec::CliqueBlocks { block_size, .. } => *block_size == 1,
            FamilySpec::MDependentWindow { m, .. } => *m == 0,
            FamilySpec::ThreePoint { .. } | FamilySpec::BernoulliDecay { .. } => true,
            // without shared sources the summands are independent whatever the edges say
            FamilySpec::Custom { family } => family.blocks.iter().all(|b| b.len() <= 1),
        }
    }

    /// Exact `DiscreteFamily` (mean centering unless the custom JSON says
    /// otherwise).
    pub fn exact_family(&self) -> Result<DiscreteFamily> {
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, law } => {
                let n = n_blocks * block_size;
                let blocks: Vec<Vec<usize>> =
                    (0..*n_blocks).map(|b| (b * block_size..(b + 1) * block_size).collect()).collect();
                DiscreteFamily::from_blocks(vec![law.clone(); n], &blocks, None, CenteringChoice::Mean)
            }
            FamilySpec::MDependentWindow { n, m, law, window } => {
                let probs: Vec<f64> = law.atoms().iter().map(|a| a.p).collect();
                let xs: Vec<f64> = law.atoms().iter().map(|a| a.x).collect();
                let width = m + 1;
                let size = xs
                    .len()
                    .checked_pow(width as u32)
                    .filter(|&s| s <= 1 << 24)
                    .ok_or_else(|| Error::OracleTooLarge {
                        outcomes: (xs.len() as u128).saturating_pow(width as u32),
                        cap: 1 << 24,
                    })?;
                let mut table = Vec::with_capacity(size);
                let mut buf = vec![0.0; width];
                for idx in 0..size {
                    let mut r = idx;
                    for slot in buf.iter_mut() {
                        *slot = xs[r % xs.len()];
                        r /= xs.len();
                    }
                    table.push(window.apply(&buf));
                }
                let count = n - m;
                let vertices = (0..count)
                    .map(|k| Vertex { inputs: (k..k + width).collect(), table: table.clone() })
                    .collect();
                DiscreteFamily::new(
                    vec![probs; *n],
                    vertices,
                    DependencyGraph::window(count, *m)?,
                    CenteringChoice::Mean,
                )
            }
            FamilySpec::ThreePoint { delta, n } => DiscreteFamily::independent(
                (1..=*n).map(|k| three_point_law(*delta, k)).collect(),
                CenteringChoice::Mean,
            ),
            FamilySpec::BernoulliDecay { n } => DiscreteFamily::independent(
                (1..=*n).map(bernoulli_law).collect(),
                CenteringChoice::Mean,
            ),
            FamilySpec::Custom { family } => family.to_family(),
        }
    }

    /// Core-model JSON when the family is a pure block coupling.
    pub fn to_family_json(&self) -> Option<FamilyJson> {
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, law } => Some(FamilyJson {
                laws: vec![law.clone(); n_blocks * block_size],
                blocks: if *block_size > 1 {
                    (0..*n_blocks).map(|b| (b * block_size..(b + 1) * block_size).collect()).collect()
                } else {
                    Vec::new()
                },
                edges: None,
                centering: CenteringChoice::Mean,
            }),
            FamilySpec::ThreePoint { delta, n } => Some(FamilyJson {
                laws: (1..=*n).map(|k| three_point_law(*delta, k)).collect(),
                blocks: Vec::new(),
                edges: None,
                centering: CenteringChoice::Mean,
            }),
            FamilySpec::BernoulliDecay { n } => Some(FamilyJson {
                laws: (1..=*n).map(bernoulli_law).collect(),
                blocks: Vec::new(),
                edges: None,
                centering: CenteringChoice::Mean,
            }),
            FamilySpec::Custom { family } => Some(family.clone()),
            FamilySpec::MDependentWindow { .. } => None,
        }
    }

    /// Exact (E[S], V[S]) without enumerating the joint law.
    pub fn exact_mean_var(&self) -> Result<(f64, f64)> {
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, law } => {
                let (nb, b) = (*n_blocks as f64, *block_size as f64);
                Ok((nb * b * law.mean(), nb * b * b * law.variance()))
            }
            FamilySpec::MDependentWindow { n, m, law, window } => Ok(window_mean_var(*n, *m, law, *window)),
            FamilySpec::ThreePoint { delta, n } => Ok((0.0, (*n as f64).powf(2.0 / delta))),
            FamilySpec::BernoulliDecay { n } => {
                let mut mean = CompensatedSum::new();
                let mut var = CompensatedSum::new();
                for k in 1..=*n {
                    let p = 1.0 / k as f64;
                    mean.add(p);
                    var.add(p * (1.0 - p));
                }
                Ok((mean.value(), var.value()))
            }
            FamilySpec::Custom { family } => {
                let f = family.to_family()?;
                Ok((f.mean_of_sum(), f.variance_of_sum()?))
            }
        }
    }

    /// Mean-centered moment profile. Closed form for the independent and
    /// clique kinds; windows and custom families go through the exact model.
    pub fn profile(&self, deltas: &[f64]) -> Result<MomentProfile> {
        for &d in deltas {
            if !(d >= 1.0) || !d.is_finite() {
                return Err(Error::InvalidInput(format!("moment order {d} must be finite and >= 1")));
            }
        }
        match self {
            FamilySpec::CliqueBlocks { n_blocks, block_size, law } => {
                let (nb, b) = (*n_blocks as f64, *block_size as f64);
                let mu = law.mean();
                let var = law.variance();
                if !(var > 0.0) {
                    return Err(Error::DegenerateVariance);
                }
                let mut p = MomentProfile::new(n_blocks * block_size, block_size - 1, (nb * b * b * var).sqrt());
                for &d in deltas {
                    let e = law.abs_moment(mu, d);
                    p = p.with_moment(d, nb * b * e).with_max_moment(d, e.powf(1.0 / d));
                }
                let k3: f64 = law.atoms().iter().map(|a| a.p * (a.x - mu).powi(3)).sum();
                Ok(p.with_l(law.sup_abs(mu)).with_rho((nb * b.powi(3) * k3).abs()))
            }
            FamilySpec::ThreePoint { delta, n } => {
                independent_profile((1..=*n).map(|k| three_point_law(*delta, k)), deltas)
            }
            FamilySpec::BernoulliDecay { n } => independent_profile((1..=*n).map(bernoulli_law), deltas),
            FamilySpec::MDependentWindow { .. } | FamilySpec::Custom { .. } => {
                derive_profile(&self.exact_family()?, deltas)
            }
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        Sampler::for_spec(self)
    }
}

fn bernoulli_law(k: usize) -> DiscreteLaw {
    if k == 1 {
        DiscreteLaw::point_mass(1.0)
    } else {
        DiscreteLaw::bernoulli(1.0 / k as f64).expect("valid probability")
    }
}

fn window_mean_var(n: usize, m: usize, law: &DiscreteLaw, window: WindowFn) -> (f64, f64) {
    let count = n - m;
    let w = (m + 1) as f64;
    let mu = law.mean();
    let var = law.variance();
    match window {
        WindowFn::Product => {
            let m2 = law.atoms().iter().map(|a| a.p * a.x * a.x).sum::<f64>();
            let mu_w = mu.powi(m as i32 + 1);
            let mut v = CompensatedSum::new();
            v.add(count as f64 * (m2.powi(m as i32 + 1) - mu_w * mu_w));
            for h in 1..=m.min(count.saturating_sub(1)) {
                let cov = m2.powi((m + 1 - h) as i32) * mu.powi(2 * h as i32) - mu_w * mu_w;
                v.add(2.0 * (count - h) as f64 * cov);
            }
            (count as f64 * mu_w, v.value())
        }
        WindowFn::Sum | WindowFn::Mean => {
            let scale = if window == WindowFn::Mean { 1.0 / w } else { 1.0 };
            // input i appears in windows max(0, i−m)..=min(i, count−1)
            let mut c2 = CompensatedSum::new();
            for i in 0..n {
                let lo = i.saturating_sub(m);
                let hi = i.min(count - 1);
                let c = (hi + 1 - lo) as f64;
                c2.add(c * c);
            }
            (count as f64 * w * mu * scale, scale * scale * var * c2.value())
        }
    }
}

/// Mean-centered profile of independent summands.
pub fn independent_profile(laws: impl Iterator<Item = DiscreteLaw>, deltas: &[f64]) -> Result<MomentProfile> {
    let mut n = 0usize;
    let mut var = CompensatedSum::new();
    let mut k3 = CompensatedSum::new();
    let mut a: Vec<CompensatedSum> = deltas.iter().map(|_| CompensatedSum::new()).collect();
    let mut m = vec![0.0f64; deltas.len()];
    let mut l = 0.0f64;
    let mut var_scale = 0.0;
    for law in laws {
        n += 1;
        let mu = law.mean();
        let v = law.variance();
        var.add(v);
        var_scale += v;
        k3.add(law.atoms().iter().map(|x| x.p * (x.x - mu).powi(3)).sum::<f64>());
        for (i, &d) in deltas.iter().enumerate() {
            let e = law.abs_moment(mu, d);
            a[i].add(e);
            m[i] = m[i].max(e);
        }
        l = l.max(law.sup_abs(mu));
    }
    let v2 = var.value();
    if n == 0 || !(v2 > 1e-12 * var_scale) || var_scale == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mut p = MomentProfile::new(n, 0, v2.sqrt());
    for (i, &d) in deltas.iter().enumerate() {
        p = p.with_moment(d, a[i].value()).with_max_moment(d, m[i].powf(1.0 / d));
    }
    if l > 0.0 {
        p = p.with_l(l);
    }
    Ok(p.with_rho(k3.value().abs()))
}

#[derive(Debug, Clone, Serialize)]
pub struct LindebergReport {
    pub epsilon: f64,
    pub variance: f64,
    /// max_k V[Y_k] / V[S]
    pub feller_ratio: f64,
    /// (1/V[S]) Σ E[(Y_k − E Y_k)² 1{(Y_k − E Y_k)² > ε² V[S]}]
    pub lindeberg_sum: f64,
    /// Closed form 1 − (N†/N)^{2/δ} for the three-point family.
    pub remark_value: Option<f64>,
}

/// Feller ratio and Lindeberg sum of an independent family, both exact.
pub fn lindeberg_feller_report(spec: &FamilySpec, epsilon: f64) -> Result<LindebergReport> {
    if !spec.is_independent() {
        return Err(Error::WrongRegime("Lindeberg/Feller report needs an independent family".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let laws: Box<dyn Iterator<Item = DiscreteLaw>> = match spec {
        FamilySpec::ThreePoint { delta, n } => Box::new((1..=*n).map(move |k| three_point_law(*delta, k))),
        FamilySpec::BernoulliDecay { n } => Box::new((1..=*n).map(bernoulli_law)),
        _ => Box::new(spec.exact_family()?.laws().to_vec().into_iter()),
    };
    let laws: Vec<DiscreteLaw> = laws.collect();
    let v2 = match spec {
        FamilySpec::ThreePoint { .. } => spec.exact_mean_var()?.1,
        _ => {
            let mut acc = CompensatedSum::new();
            laws.iter().for_each(|l| acc.add(l.variance()));
            acc.value()
        }
    };
    if !(v2 > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let threshold = epsilon * epsilon * v2;
    let mut max_var = 0.0f64;
    let mut tail = CompensatedSum::new();
    for law in &laws {
        let mu = law.mean();
        max_var = max_var.max(law.variance());
        for a in law.atoms() {
            let sq = (a.x - mu).powi(2);
            if sq > threshold {
                tail.add(a.p * sq);
            }
        }
    }
    let remark_value = match spec {
        FamilySpec::ThreePoint { delta, n } => Some(remark_lindeberg_value(*n, *delta)),
        _ => None,
    };
    Ok(LindebergReport {
        epsilon,
        variance: v2,
        feller_ratio: max_var / v2,
        lindeberg_sum: tail.value() / v2,
        remark_value,
    })
}

/// Smallest integer strictly greater than N·2^{−δ/2}.
pub fn n_dagger(n: usize, delta: f64) -> usize {
    (n as f64 * 2f64.powf(-delta / 2.0)).floor() as usize + 1
}

/// 1 − (N†/N)^{2/δ}
pub fn remark_lindeberg_value(n: usize, delta: f64) -> f64 {
    1.0 - (n_dagger(n, delta) as f64 / n as f64).powf(2.0 / delta)
}

/// Random bounded family with N ≤ `max_n`: small integer-valued laws,
/// random block couplings, mean or zero centering.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> DiscreteFamily {
    random_family_json(rng, max_n).to_family().expect("random family is valid")
}

/// As `random_family`, in document form.
pub fn random_family_json<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> FamilyJson {
    loop {
        let n = rng.random_range(1..=max_n.max(1));
        let laws: Vec<DiscreteLaw> = (0..n).map(|_| random_law(rng)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            let len = rng.random_range(1..=(n - i).min(4));
            if len > 1 {
                blocks.push(order[i..i + len].to_vec());
            }
            i += len;
        }
        let centering = if rng.random_bool(0.5) { CenteringChoice::Mean } else { CenteringChoice::Zero };
        let doc = FamilyJson { laws, blocks, edges: None, centering };
        if let Ok(f) = doc.to_family() {
            if f.variance_of_sum().is_ok_and(|v| v > 1e-9) {
                return doc;
            }
        }
    }
}

/// `count` random families drawn in sequence from one seeded stream.
pub fn random_families(seed: u64, count: usize, max_n: usize) -> Vec<FamilyJson> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_family_json(&mut rng, max_n)).collect()
}

fn random_law<R: Rng + ?Sized>(rng: &mut R) -> DiscreteLaw {
    let k = rng.random_range(2..=3);
    let mut xs: Vec<f64> = Vec::new();
    while xs.len() < k {
        let x = rng.random_range(-4i32..=4) as f64 * 0.5;
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut atoms: Vec<Atom> = xs.iter().zip(&w).map(|(&x, &p)| Atom { x, p: p / total }).collect();
    let drift: f64 = 1.0 - atoms.iter().map(|a| a.p).sum::<f64>();
    atoms[0].p += drift;
    DiscreteLaw::new(atoms).expect("normalized random law")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::cumulant_of_sum;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clique_example() {
        let spec = clique_blocks(4, 2, DiscreteLaw::rademacher()).unwrap();
        let f = spec.exact_family().unwrap();
        assert_eq!(f.n(), 8);
        assert_eq!(f.graph().max_degree(), 1);
        assert_relative_eq!(f.variance_of_sum().unwrap(), 16.0, max_relative = 1e-14);
        assert_eq!(spec.exact_mean_var().unwrap(), (0.0, 16.0));
        let single = clique_blocks(5, 1, DiscreteLaw::rademacher()).unwrap();
        assert_eq!(single.exact_family().unwrap().graph().max_degree(), 0);
        assert!(single.is_independent());
    }

    #[test]
    fn clique_third_cumulant_identity() {
        let law = DiscreteLaw::bernoulli(0.25).unwrap();
        let spec = clique_blocks(3, 2, law.clone()).unwrap();
        let k3 = cumulant_of_sum(&spec.exact_family().unwrap(), 3).unwrap();
        // N(D+1)²κ³(Z)
        assert_relative_eq!(k3, 6.0 * 4.0 * 0.09375, max_relative = 1e-12);
    }

    #[test]
    fn generator_profiles_match_exact_model() {
        let specs = [
            clique_blocks(3, 3, DiscreteLaw::from_pairs(&[(-1.0, 0.2), (0.5, 0.5), (2.0, 0.3)]).unwrap()).unwrap(),
            three_point_family(3.5, 7).unwrap(),
            bernoulli_decay(9).unwrap(),
        ];
        let deltas = [2.0, 2.5, 3.0, 4.0];
        for spec in &specs {
            let a = spec.profile(&deltas).unwrap();
            let b = derive_profile(&spec.exact_family().unwrap(), &deltas).unwrap();
            assert_eq!((a.n, a.d), (b.n, b.d));
            assert_relative_eq!(a.v, b.v, max_relative = 1e-12);
            for &d in &deltas {
                assert_relative_eq!(a.a(d).unwrap(), b.a(d).unwrap(), max_relative = 1e-12);
                assert_relative_eq!(a.m(d).unwrap(), b.m(d).unwrap(), max_relative = 1e-12);
            }
            assert_relative_eq!(a.l().unwrap(), b.l().unwrap(), max_relative = 1e-12);
            assert!((a.rho().unwrap() - b.rho().unwrap()).abs() < 1e-12 * (1.0 + b.rho().unwrap()));
        }
    }

    #[test]
    fn window_product_is_uncorrelated_but_dependent() {
        let spec = m_dependent_window(6, 1, DiscreteLaw::rademacher(), WindowFn::Product).unwrap();
        let f = spec.exact_family().unwrap();
        assert_eq!(f.n(), 5);
        assert_eq!(f.graph().max_degree(), 2);
        for k in 0..5 {
            assert!(f.laws()[k].mean().abs() < 1e-15);
        }
        assert!(f.covariance(0, 1).unwrap().abs() < 1e-15);
        assert_relative_eq!(f.variance_of_sum().unwrap(), 5.0);
        // uncorrelated neighbours still share an input, so they stay adjacent
        assert!(f.graph().adjacent(0, 1) && !f.graph().adjacent(0, 2));
        let m0 = m_dependent_window(4, 0, DiscreteLaw::rademacher(), WindowFn::Sum).unwrap();
        assert!(m0.is_independent());
        assert_eq!(m0.exact_family().unwrap().graph().max_degree(), 0);
    }

    #[test]
    fn window_independence_factorizes() {
        // (Y₀) and (Y₂, Y₃) share no input when m = 1
        let law = DiscreteLaw::from_pairs(&[(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let spec = m_dependent_window(5, 1, law, WindowFn::Sum).unwrap();
        let f = spec.exact_family().unwrap();
        let mut joint = std::collections::BTreeMap::new();
        f.for_each_outcome(|y, p| {
            let key = ((y[0] * 2.0) as i64, (y[2] * 2.0) as i64, (y[3] * 2.0) as i64);
            *joint.entry(key).or_insert(0.0) += p;
        })
        .unwrap();
        let mut left = std::collections::BTreeMap::new();
        let mut right = std::collections::BTreeMap::new();
        for (&(a, b, c), &p) in &joint {
            *left.entry(a).or_insert(0.0) += p;
            *right.entry((b, c)).or_insert(0.0) += p;
        }
        for (&(a, b, c), &p) in &joint {
            assert!((p - left[&a] * right[&(b, c)]).abs() < 1e-14);
        }
    }

    #[test]
    fn window_closed_forms_match_enumeration() {
        let law = DiscreteLaw::from_pairs(&[(-1.0, 0.3), (0.5, 0.2), (2.0, 0.5)]).unwrap();
        for window in [WindowFn::Product, WindowFn::Sum, WindowFn::Mean] {
            for (n, m) in [(5, 0), (6, 1), (7, 2), (3, 2)] {
                let spec = m_dependent_window(n, m, law.clone(), window).unwrap();
                let f = spec.exact_family().unwrap();
                let (mean, var) = spec.exact_mean_var().unwrap();
                assert_relative_eq!(mean, f.mean_of_sum(), max_relative = 1e-12, epsilon = 1e-12);
                assert_relative_eq!(var, f.variance_of_sum().unwrap(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn three_point_examples() {
        let law = three_point_law(3.0, 2);
        let p = law.atoms().iter().find(|a| a.x > 0.0).unwrap().p;
        assert_relative_eq!(p, (2f64.powf(2.0 / 3.0) - 1.0) / (2.0 * 2f64.powf(2.0 / 3.0)), max_relative = 1e-14);
        assert!((p - 0.185020).abs() < 1e-6);
        for delta in [3.0, 4.5] {
            for n in 2..=50 {
                let spec = three_point_family(delta, n).unwrap();
                let f = spec.exact_family().unwrap();
                assert!(f.mean_of_sum().abs() < 1e-12);
                assert_relative_eq!(f.variance_of_sum().unwrap(), (n as f64).powf(2.0 / delta), max_relative = 1e-12);
                assert!(f.laws().iter().all(|l| l.abs_moment(0.0, delta) <= 1.0 + 1e-12));
            }
        }
        assert!(matches!(three_point_family(2.5, 10), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn lindeberg_three_point() {
        let delta = 3.0;
        let n = 10_000;
        let spec = three_point_family(delta, n).unwrap();
        // threshold k^{2/δ} > N^{2/δ}/2 corresponds to ε² = 1/2
        let r = lindeberg_feller_report(&spec, 0.5f64.sqrt()).unwrap();
        let nd = n_dagger(n, delta);
        let exact = 1.0 - ((nd - 1) as f64 / n as f64).powf(2.0 / delta);
        assert_relative_eq!(r.lindeberg_sum, exact, max_relative = 1e-9);
        let remark = r.remark_value.unwrap();
        assert_relative_eq!(remark, 1.0 - (nd as f64 / n as f64).powf(2.0 / delta));
        assert!((remark - r.lindeberg_sum).abs() < 1e-3);
        assert!((remark - 0.5).abs() < 1e-3);
        // the literal ε = 1/2 threshold is k > N 2^{−δ} (N chosen off the tie)
        let n2 = n + 1;
        let lit = lindeberg_feller_report(&three_point_family(delta, n2).unwrap(), 0.5).unwrap();
        let nd4 = (n2 as f64 * 2f64.powf(-delta)).floor() as usize + 1;
        assert_relative_eq!(lit.lindeberg_sum, 1.0 - ((nd4 - 1) as f64 / n2 as f64).powf(2.0 / delta), max_relative = 1e-9);
        let small = lindeberg_feller_report(&three_point_family(3.0, 100).unwrap(), 0.5).unwrap();
        assert!(r.feller_ratio < small.feller_ratio);
    }

    #[test]
    fn lindeberg_rademacher_and_dependent() {
        let spec = clique_blocks(100, 1, DiscreteLaw::rademacher()).unwrap();
        let r = lindeberg_feller_report(&spec, 0.5).unwrap();
        assert_eq!(r.lindeberg_sum, 0.0);
        assert_relative_eq!(r.feller_ratio, 0.01);
        let dep = clique_blocks(10, 2, DiscreteLaw::rademacher()).unwrap();
        assert!(matches!(lindeberg_feller_report(&dep, 0.5), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn bernoulli_decay_examples() {
        let law = bernoulli_law(2);
        for d in [2.5, 3.0, 4.0] {
            assert_relative_eq!(law.abs_moment(0.5, d), 2f64.powf(-d), max_relative = 1e-14);
        }
        let spec = bernoulli_decay(1000).unwrap();
        let expect: f64 = (1..=1000).map(|k| (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sum();
        assert_relative_eq!(spec.exact_mean_var().unwrap().1, expect, max_relative = 1e-12);
        for e in 10..=20 {
            let n = 1usize << e;
            let p = bernoulli_decay(n).unwrap().profile(&[3.0]).unwrap();
            let x = crate::model::xi(&p, 3.0).unwrap();
            let ln = (n as f64).ln();
            let trend = (ln / n as f64).powf(0.5 - 1.0 / 3.0);
            assert!(x / trend > 0.5 && x / trend < 2.0, "N = 2^{e}: ratio {}", x / trend);
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = m_dependent_window(10, 2, DiscreteLaw::rademacher(), WindowFn::Product).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"m_dependent_window\""));
        assert_eq!(FamilySpec::from_json_str(&text).unwrap(), spec);
        assert!(spec.to_family_json().is_none());
        let c = clique_blocks(2, 3, DiscreteLaw::rademacher()).unwrap();
        let fam = c.to_family_json().unwrap().to_family().unwrap();
        assert_relative_eq!(fam.variance_of_sum().unwrap(), 18.0);
    }

    #[test]
    fn random_families_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_family(&mut rng, 8);
            assert!(f.n() <= 8);
            assert!(derive_profile(&f, &[2.0, 3.0]).is_ok());
        }
    }
}
