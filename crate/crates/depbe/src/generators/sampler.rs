//! Samplers for the raw sum S of each family kind.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{three_point_nonzero_prob, FamilySpec, WindowFn};
use crate::error::Result;
use crate::model::DiscreteLaw;

#[derive(Debug, Clone)]
pub enum Sampler {
    /// Block counts per atom are multinomial; S = Σ_a value_a · count_a.
    Multinomial { values: Vec<f64>, probs: Vec<f64>, n_blocks: u64 },
    /// Independent three-point variables; nonzero positions by thinning.
    ThreePoint { delta: f64, n: u64 },
    /// Independent Ber(1/k); successes by thinning.
    BernoulliDecay { n: u64 },
    Window { n: usize, m: usize, table: Table, window: WindowFn },
    /// Independent sources driving vertex tables.
    Family { sources: Vec<Table>, vertices: Vec<(Vec<usize>, Vec<f64>)> },
}

/// Inverse-CDF table for a finite law.
#[derive(Debug, Clone)]
pub struct Table {
    cum: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    fn new(values: Vec<f64>, probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cum = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cum, values }
    }

    fn from_law(law: &DiscreteLaw) -> Self {
        let probs: Vec<f64> = law.atoms().iter().map(|a| a.p).collect();
        Self::new(law.atoms().iter().map(|a| a.x).collect(), &probs)
    }

    #[inline]
    fn index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cum[self.cum.len() - 1];
        self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1)
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.values[self.index(rng)]
    }
}

/// Number of failures before the first success of a Bernoulli(p) stream.
#[inline]
fn geometric_skip<R: Rng + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u = 1.0 - rng.random::<f64>();
    let g = (u.ln() / (-p).ln_1p()).floor();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}

/// Visits every k ∈ 1..=n that succeeds, for independent Bernoulli(p(k))
/// indicators with p non-increasing. Candidates are drawn at the current
/// maximal rate and accepted with probability p(j)/bound.
fn thinned<R: Rng + ?Sized>(rng: &mut R, n: u64, p: impl Fn(u64) -> f64, mut hit: impl FnMut(&mut R, u64)) {
    let mut k = 1u64;
    while k <= n {
        let bound = p(k);
        if !(bound > 0.0) {
            break;
        }
        let j = k.saturating_add(geometric_skip(rng, bound));
        if j > n {
            break;
        }
        if bound >= 1.0 || rng.random::<f64>() * bound < p(j) {
            hit(rng, j);
        }
        k = j + 1;
    }
}

impl Sampler {
    pub fn for_spec(spec: &FamilySpec) -> Result<Self> {
        Ok(match spec {
            FamilySpec::CliqueBlocks { n_blocks, block_size, law } => Sampler::Multinomial {
                values: law.atoms().iter().map(|a| a.x * *block_size as f64).collect(),
                probs: law.atoms().iter().map(|a| a.p).collect(),
                n_blocks: *n_blocks as u64,
            },
            FamilySpec::ThreePoint { delta, n } => Sampler::ThreePoint { delta: *delta, n: *n as u64 },
            FamilySpec::BernoulliDecay { n } => Sampler::BernoulliDecay { n: *n as u64 },
            FamilySpec::MDependentWindow { n, m, law, window } => {
                Sampler::Window { n: *n, m: *m, table: Table::from_law(law), window: *window }
            }
            FamilySpec::Custom { .. } => {
                let f = spec.exact_family()?;
                let sources = f
                    .sources()
                    .iter()
                    .map(|probs| Table::new((0..probs.len()).map(|i| i as f64).collect(), probs))
                    .collect();
                let vertices = f.vertices().iter().map(|v| (v.inputs.clone(), v.table.clone())).collect();
                Sampler::Family { sources, vertices }
            }
        })
    }

    /// One realization of S.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Multinomial { values, probs, n_blocks } => {
                let mut remaining = *n_blocks;
                let mut mass = 1.0;
                let mut s = 0.0;
                let last = values.len() - 1;
                for a in 0..last {
                    if remaining == 0 {
                        break;
                    }
                    let p = if mass > 0.0 { (probs[a] / mass).clamp(0.0, 1.0) } else { 1.0 };
                    let c = Binomial::new(remaining, p).map(|b| b.sample(rng)).unwrap_or(0);
                    s += values[a] * c as f64;
                    remaining -= c;
                    mass -= probs[a];
                }
                s + values[last] * remaining as f64
            }
            Sampler::ThreePoint { delta, n } => {
                let mut s = 0.0;
                thinned(rng, *n, |k| three_point_nonzero_prob(*delta, k), |rng, k| {
                    let x = (k as f64).powf(1.0 / delta);
                    s += if rng.random::<bool>() { x } else { -x };
                });
                s
            }
            Sampler::BernoulliDecay { n } => {
                let mut count = 0u64;
                thinned(rng, *n, |k| 1.0 / k as f64, |_, _| count += 1);
                count as f64
            }
            Sampler::Window { n, m, table, window } => {
                let w = m + 1;
                let mut buf = vec![0.0; w];
                for slot in buf.iter_mut().take(*m) {
                    *slot = table.draw(rng);
                }
                let mut s = 0.0;
                for i in *m..*n {
                    buf[i % w] = table.draw(rng);
                    s += window.apply(&buf);
                }
                s
            }
            Sampler::Family { sources, vertices } => {
                let idx: Vec<usize> = sources.iter().map(|t| t.index(rng)).collect();
                let mut s = 0.0;
                for (inputs, table) in vertices {
                    let mut pos = 0;
                    let mut radix = 1;
                    for &src in inputs {
                        pos += idx[src] * radix;
                        radix *= sources[src].values.len();
                    }
                    s += table[pos];
                }
                s
            }
        }
    }
}
