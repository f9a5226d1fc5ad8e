//! Shared data model: discrete laws, dependency graphs, exactly enumerable
//! families and the moment profile consumed by every bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, merge_atoms, CompensatedSum};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;
const PROB_TOL: f64 = 1e-12;
const DELTA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub p: f64,
}

/// Finite discrete law. Probabilities are validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct DiscreteLaw {
    atoms: Vec<Atom>,
}

impl TryFrom<Vec<Atom>> for DiscreteLaw {
    type Error = Error;
    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        DiscreteLaw::new(atoms)
    }
}

impl From<DiscreteLaw> for Vec<Atom> {
    fn from(law: DiscreteLaw) -> Self {
        law.atoms
    }
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidFamily("law has no atoms".into()));
        }
        for a in &atoms {
            if !a.x.is_finite() || !a.p.is_finite() || a.p < 0.0 {
                return Err(Error::InvalidFamily(format!(
                    "atom ({}, {}) is not a finite value with non-negative probability",
                    a.x, a.p
                )));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.p));
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidFamily(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, p)| Atom { x, p }).collect())
    }

    pub fn rademacher() -> Self {
        Self::from_pairs(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("Bernoulli parameter {p}")));
        }
        Self::from_pairs(&[(0.0, 1.0 - p), (1.0, p)])
    }

    pub fn point_mass(x: f64) -> Self {
        Self::from_pairs(&[(x, 1.0)]).unwrap()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.p * a.x))
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        compensated_sum(self.atoms.iter().map(|a| a.p * (a.x - mu).powi(2)))
    }

    /// E|X - c|^delta
    pub fn abs_moment(&self, c: f64, delta: f64) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .filter(|a| a.p > 0.0)
                .map(|a| a.p * (a.x - c).abs().powf(delta)),
        )
    }

    /// Essential sup of |X - c|.
    pub fn sup_abs(&self, c: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.p > 0.0)
            .map(|a| (a.x - c).abs())
            .fold(0.0, f64::max)
    }
}

/// Undirected multigraph on `0..vertex_count`. Loops and repeated edges are
/// allowed; each incidence counts once towards the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    max_degree: usize,
}

impl DependencyGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidFamily("graph needs at least one vertex".into()));
        }
        let mut degrees = vec![0usize; vertex_count];
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(i, j) in &edges {
            if i >= vertex_count || j >= vertex_count {
                return Err(Error::InvalidFamily(format!(
                    "edge ({i}, {j}) outside 0..{vertex_count}"
                )));
            }
            degrees[i] += 1;
            if i != j {
                degrees[j] += 1;
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        Ok(Self {
            vertex_count,
            edges,
            degrees,
            neighbors,
            max_degree,
        })
    }

    pub fn empty(vertex_count: usize) -> Result<Self> {
        Self::new(vertex_count, Vec::new())
    }

    /// Disjoint complete graphs on the given groups.
    pub fn cliques(vertex_count: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut edges = Vec::new();
        for g in groups {
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    edges.push((i, j));
                }
            }
        }
        Self::new(vertex_count, edges)
    }

    /// Path-power graph joining i and j when 1 <= |i-j| <= m.
    pub fn window(vertex_count: usize, m: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..vertex_count {
            for j in i + 1..vertex_count.min(i + m + 1) {
                edges.push((i, j));
            }
        }
        Self::new(vertex_count, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, k: usize) -> usize {
        self.degrees[k]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }
}

/// Centering constants c_k, fixed once per family or profile.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CenteringChoice {
    Zero,
    #[default]
    Mean,
    Custom { custom_values: Vec<f64> },
}

impl CenteringChoice {
    pub fn label(&self) -> &'static str {
        match self {
            CenteringChoice::Zero => "zero",
            CenteringChoice::Mean => "mean",
            CenteringChoice::Custom { .. } => "custom",
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if let CenteringChoice::Custom { custom_values } = self {
            if custom_values.len() != n {
                return Err(Error::InvalidFamily(format!(
                    "custom centering has {} values for {n} vertices",
                    custom_values.len()
                )));
            }
            if custom_values.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidFamily("non-finite centering value".into()));
            }
        }
        Ok(())
    }
}

/// A vertex is a deterministic function of some independent sources, given
/// as a value table in mixed radix (first input varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub inputs: Vec<usize>,
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub sources: Vec<usize>,
    pub vertices: Vec<usize>,
}

/// Finite family of discrete variables built from independent discrete
/// sources. Two vertices sharing a source must be adjacent in the graph, so
/// the graph is a dependency graph by construction.
#[derive(Debug, Clone)]
pub struct DiscreteFamily {
    sources: Vec<Vec<f64>>,
    vertices: Vec<Vertex>,
    graph: DependencyGraph,
    centering: CenteringChoice,
    cap: u64,
    marginals: Vec<DiscreteLaw>,
    components: Vec<Component>,
    users: Vec<Vec<usize>>,
}

impl DiscreteFamily {
    pub fn new(
        sources: Vec<Vec<f64>>,
        vertices: Vec<Vertex>,
        graph: DependencyGraph,
        centering: CenteringChoice,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidFamily("family has no vertices".into()));
        }
        if graph.vertex_count() != vertices.len() {
            return Err(Error::InvalidFamily(format!(
                "graph has {} vertices, family has {}",
                graph.vertex_count(),
                vertices.len()
            )));
        }
        centering.check_len(vertices.len())?;
        for (s, probs) in sources.iter().enumerate() {
            if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidFamily(format!("source {s} has invalid probabilities")));
            }
            let total = compensated_sum(probs.iter().copied());
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidFamily(format!(
                    "source {s} probabilities sum to {total}"
                )));
            }
        }
        let mut users = vec![Vec::new(); sources.len()];
        for (k, v) in vertices.iter().enumerate() {
            if v.inputs.is_empty() {
                return Err(Error::InvalidFamily(format!("vertex {k} has no inputs")));
            }
            let mut seen = v.inputs.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != v.inputs.len() {
                return Err(Error::InvalidFamily(format!("vertex {k} repeats an input")));
            }
            let mut size = 1usize;
            for &s in &v.inputs {
                let len = sources
                    .get(s)
                    .ok_or_else(|| Error::InvalidFamily(format!("vertex {k} uses unknown source {s}")))?
                    .len();
                size = size.checked_mul(len).ok_or_else(|| {
                    Error::InvalidFamily(format!("vertex {k} table too large"))
                })?;
                users[s].push(k);
            }
            if v.table.len() != size {
                return Err(Error::InvalidFamily(format!(
                    "vertex {k} table has {} entries, expected {size}",
                    v.table.len()
                )));
            }
            if v.table.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidFamily(format!("vertex {k} has a non-finite value")));
            }
        }
        for (s, us) in users.iter().enumerate() {
            for (a, &i) in us.iter().enumerate() {
                for &j in &us[a + 1..] {
                    if !graph.adjacent(i, j) {
                        return Err(Error::InvalidFamily(format!(
                            "vertices {i} and {j} share source {s} but are not adjacent"
                        )));
                    }
                }
            }
        }
        let components = build_components(sources.len(), &vertices);
        let mut fam = Self {
            sources,
            vertices,
            graph,
            centering,
            cap: DEFAULT_ENUMERATION_CAP,
            marginals: Vec::new(),
            components,
            users,
        };
        fam.marginals = (0..fam.vertices.len())
            .map(|k| fam.compute_marginal(k))
            .collect::<Result<_>>()?;
        Ok(fam)
    }

    /// Independent family, one source per law.
    pub fn independent(laws: Vec<DiscreteLaw>, centering: CenteringChoice) -> Result<Self> {
        let n = laws.len();
        let mut sources = Vec::with_capacity(n);
        let mut vertices = Vec::with_capacity(n);
        for (k, law) in laws.iter().enumerate() {
            sources.push(law.atoms().iter().map(|a| a.p).collect());
            vertices.push(Vertex {
                inputs: vec![k],
                table: law.atoms().iter().map(|a| a.x).collect(),
            });
        }
        Self::new(sources, vertices, DependencyGraph::empty(n)?, centering)
    }

    /// Vertices in the same block are coupled comonotonically (all driven by
    /// one common uniform through their quantile functions); identical laws
    /// in a block therefore become identical copies. Without explicit edges
    /// each block is a clique.
    pub fn from_blocks(
        laws: Vec<DiscreteLaw>,
        blocks: &[Vec<usize>],
        edges: Option<Vec<(usize, usize)>>,
        centering: CenteringChoice,
    ) -> Result<Self> {
        let n = laws.len();
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidFamily(format!("block {b} is empty")));
            }
            for &k in block {
                if k >= n {
                    return Err(Error::InvalidFamily(format!("block {b} names vertex {k} >= {n}")));
                }
                if owner[k] != usize::MAX {
                    return Err(Error::InvalidFamily(format!("vertex {k} is in two blocks")));
                }
                owner[k] = b;
            }
        }
        let mut groups: Vec<Vec<usize>> = blocks.to_vec();
        for (k, &o) in owner.iter().enumerate() {
            if o == usize::MAX {
                groups.push(vec![k]);
            }
        }
        let mut sources = Vec::with_capacity(groups.len());
        let mut vertices: Vec<Option<Vertex>> = vec![None; n];
        for (s, group) in groups.iter().enumerate() {
            let (probs, tables) = comonotone_coupling(group.iter().map(|&k| &laws[k]));
            sources.push(probs);
            for (&k, table) in group.iter().zip(tables) {
                vertices[k] = Some(Vertex { inputs: vec![s], table });
            }
        }
        let graph = match edges {
            Some(e) => DependencyGraph::new(n, e)?,
            None => DependencyGraph::cliques(n, blocks)?,
        };
        Self::new(
            sources,
            vertices.into_iter().map(|v| v.unwrap()).collect(),
            graph,
            centering,
        )
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_centering(mut self, centering: CenteringChoice) -> Result<Self> {
        centering.check_len(self.n())?;
        self.centering = centering;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn centering(&self) -> &CenteringChoice {
        &self.centering
    }

    pub fn sources(&self) -> &[Vec<f64>] {
        &self.sources
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Marginal law of every vertex.
    pub fn laws(&self) -> &[DiscreteLaw] {
        &self.marginals
    }

    /// Vertices that read source `s`.
    pub fn users_of(&self, s: usize) -> &[usize] {
        &self.users[s]
    }

    pub fn centers(&self) -> Vec<f64> {
        match &self.centering {
            CenteringChoice::Zero => vec![0.0; self.n()],
            CenteringChoice::Mean => self.marginals.iter().map(|l| l.mean()).collect(),
            CenteringChoice::Custom { custom_values } => custom_values.clone(),
        }
    }

    pub fn mean_of_sum(&self) -> f64 {
        compensated_sum(self.marginals.iter().map(|l| l.mean()))
    }

    /// Number of joint outcomes over a set of sources (saturating).
    pub fn outcome_count(&self, sources: &[usize]) -> u128 {
        sources
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(self.sources[s].len() as u128))
    }

    fn check_cap(&self, sources: &[usize]) -> Result<()> {
        let outcomes = self.outcome_count(sources);
        if outcomes > self.cap as u128 {
            return Err(Error::OracleTooLarge {
                outcomes,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Calls `f(assignment, p)` for each joint outcome of `sources`;
    /// `assignment[i]` is the atom index of `sources[i]`.
    fn enumerate(&self, sources: &[usize], mut f: impl FnMut(&[usize], f64)) {
        let mut idx = vec![0usize; sources.len()];
        loop {
            let p: f64 = sources
                .iter()
                .zip(&idx)
                .map(|(&s, &a)| self.sources[s][a])
                .product();
            if p > 0.0 {
                f(&idx, p);
            }
            let mut pos = 0;
            loop {
                if pos == sources.len() {
                    return;
                }
                idx[pos] += 1;
                if idx[pos] < self.sources[sources[pos]].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Positions of a vertex's inputs inside a source list.
    fn input_positions(&self, k: usize, sources: &[usize]) -> Vec<usize> {
        self.vertices[k]
            .inputs
            .iter()
            .map(|s| sources.iter().position(|t| t == s).expect("input in source list"))
            .collect()
    }

    fn value_at(&self, k: usize, positions: &[usize], assignment: &[usize]) -> f64 {
        let v = &self.vertices[k];
        let mut index = 0usize;
        let mut stride = 1usize;
        for (&s, &pos) in v.inputs.iter().zip(positions) {
            index += assignment[pos] * stride;
            stride *= self.sources[s].len();
        }
        v.table[index]
    }

    fn compute_marginal(&self, k: usize) -> Result<DiscreteLaw> {
        let inputs = self.vertices[k].inputs.clone();
        self.check_cap(&inputs)?;
        let pos: Vec<usize> = (0..inputs.len()).collect();
        let mut atoms = Vec::new();
        self.enumerate(&inputs, |a, p| atoms.push((self.value_at(k, &pos, a), p)));
        let merged = merge_atoms(atoms);
        let total = compensated_sum(merged.iter().map(|a| a.1));
        DiscreteLaw::new(
            merged
                .into_iter()
                .map(|(x, p)| Atom { x, p: p / total })
                .collect(),
        )
    }

    /// Full joint enumeration over all sources: `f(values_of_all_vertices, p)`.
    pub fn for_each_outcome(&self, mut f: impl FnMut(&[f64], f64)) -> Result<()> {
        let all: Vec<usize> = (0..self.sources.len()).collect();
        self.check_cap(&all)?;
        let positions: Vec<Vec<usize>> = (0..self.n()).map(|k| self.vertices[k].inputs.clone()).collect();
        let mut values = vec![0.0; self.n()];
        self.enumerate(&all, |a, p| {
            for k in 0..values.len() {
                values[k] = self.value_at(k, &positions[k], a);
            }
            f(&values, p);
        });
        Ok(())
    }

    /// Enumerates the outcomes of the sum over one connected component:
    /// `f(component_sum, p)`.
    pub fn for_each_component_sum(&self, c: usize, mut f: impl FnMut(f64, f64)) -> Result<()> {
        let comp = &self.components[c];
        self.check_cap(&comp.sources)?;
        let positions: Vec<Vec<usize>> = comp
            .vertices
            .iter()
            .map(|&k| self.input_positions(k, &comp.sources))
            .collect();
        self.enumerate(&comp.sources, |a, p| {
            let mut s = CompensatedSum::new();
            for (&k, pos) in comp.vertices.iter().zip(&positions) {
                s.add(self.value_at(k, pos, a));
            }
            f(s.value(), p);
        });
        Ok(())
    }

    /// Exact law of S as merged atoms sorted by value.
    pub fn sum_law(&self) -> Result<Vec<Atom>> {
        let mut law: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for c in 0..self.components.len() {
            let mut atoms = Vec::new();
            self.for_each_component_sum(c, |x, p| atoms.push((x, p)))?;
            let part = merge_atoms(atoms);
            let outcomes = (law.len() as u128) * (part.len() as u128);
            if outcomes > self.cap as u128 {
                return Err(Error::OracleTooLarge {
                    outcomes,
                    cap: self.cap,
                });
            }
            let mut next = Vec::with_capacity(law.len() * part.len());
            for &(x, p) in &law {
                for &(y, q) in &part {
                    next.push((x + y, p * q));
                }
            }
            law = merge_atoms(next);
        }
        Ok(law.into_iter().map(|(x, p)| Atom { x, p }).collect())
    }

    /// E[(Y_i - E Y_i)(Y_j - E Y_j)] by enumerating the union of inputs.
    pub fn covariance(&self, i: usize, j: usize) -> Result<f64> {
        let mut srcs: Vec<usize> = self.vertices[i].inputs.clone();
        srcs.extend(&self.vertices[j].inputs);
        srcs.sort_unstable();
        srcs.dedup();
        let shares = self.vertices[i]
            .inputs
            .iter()
            .any(|s| self.vertices[j].inputs.contains(s));
        if !shares && i != j {
            return Ok(0.0);
        }
        self.check_cap(&srcs)?;
        let (mi, mj) = (self.marginals[i].mean(), self.marginals[j].mean());
        let pi = self.input_positions(i, &srcs);
        let pj = self.input_positions(j, &srcs);
        let mut acc = CompensatedSum::new();
        self.enumerate(&srcs, |a, p| {
            acc.add(p * (self.value_at(i, &pi, a) - mi) * (self.value_at(j, &pj, a) - mj));
        });
        Ok(acc.value())
    }

    /// Pairs i < j that share at least one source.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.n() {
            let mut js: Vec<usize> = self.vertices[i]
                .inputs
                .iter()
                .flat_map(|&s| self.users[s].iter().copied())
                .filter(|&j| j > i)
                .collect();
            js.sort_unstable();
            js.dedup();
            pairs.extend(js.into_iter().map(|j| (i, j)));
        }
        pairs
    }

    /// V[S] from marginal variances plus covariances of coupled pairs.
    pub fn variance_of_sum(&self) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for law in &self.marginals {
            acc.add(law.variance());
        }
        for (i, j) in self.coupled_pairs() {
            acc.add(2.0 * self.covariance(i, j)?);
        }
        Ok(acc.value())
    }

    /// Same sources and graph, values replaced by `f(k, x)`.
    pub fn map_values(&self, f: impl Fn(usize, f64) -> f64, centering: CenteringChoice) -> Result<Self> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, v)| Vertex {
                inputs: v.inputs.clone(),
                table: v.table.iter().map(|&x| f(k, x)).collect(),
            })
            .collect();
        Ok(Self::new(self.sources.clone(), vertices, self.graph.clone(), centering)?.with_cap(self.cap))
    }
}

fn build_components(n_sources: usize, vertices: &[Vertex]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..n_sources).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for v in vertices {
        let first = find(&mut parent, v.inputs[0]);
        for &s in &v.inputs[1..] {
            let r = find(&mut parent, s);
            if r != first {
                parent[r] = first;
            }
        }
    }
    let mut index_of_root = vec![usize::MAX; n_sources];
    let mut comps: Vec<Component> = Vec::new();
    for (k, v) in vertices.iter().enumerate() {
        let r = find(&mut parent, v.inputs[0]);
        if index_of_root[r] == usize::MAX {
            index_of_root[r] = comps.len();
            comps.push(Component {
                sources: Vec::new(),
                vertices: Vec::new(),
            });
        }
        comps[index_of_root[r]].vertices.push(k);
    }
    for s in 0..n_sources {
        let r = find(&mut parent, s);
        if index_of_root[r] != usize::MAX {
            comps[index_of_root[r]].sources.push(s);
        }
    }
    comps
}

/// Common-quantile coupling: returns the probabilities of the shared uniform
/// cells and, per law, the value taken on each cell.
fn comonotone_coupling<'a>(laws: impl Iterator<Item = &'a DiscreteLaw> + Clone) -> (Vec<f64>, Vec<Vec<f64>>) {
    let sorted: Vec<Vec<(f64, f64)>> = laws
        .clone()
        .map(|l| {
            let mut a: Vec<(f64, f64)> = l.atoms().iter().filter(|a| a.p > 0.0).map(|a| (a.x, a.p)).collect();
            a.sort_by(|x, y| x.0.total_cmp(&y.0));
            a
        })
        .collect();
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for atoms in &sorted {
        let mut acc = 0.0;
        for &(_, p) in atoms {
            acc += p;
            cuts.push(acc.min(1.0));
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    let mut probs = Vec::new();
    let mut mids = Vec::new();
    for w in cuts.windows(2) {
        if w[1] - w[0] > 0.0 {
            probs.push(w[1] - w[0]);
            mids.push(0.5 * (w[0] + w[1]));
        }
    }
    let total: f64 = compensated_sum(probs.iter().copied());
    for p in &mut probs {
        *p /= total;
    }
    let tables = sorted
        .iter()
        .map(|atoms| {
            mids.iter()
                .map(|&u| {
                    let mut acc = 0.0;
                    for &(x, p) in atoms {
                        acc += p;
                        if u <= acc {
                            return x;
                        }
                    }
                    atoms.last().unwrap().0
                })
                .collect()
        })
        .collect();
    (probs, tables)
}

/// JSON document format of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub laws: Vec<DiscreteLaw>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub centering: CenteringChoice,
}

impl FamilyJson {
    pub fn to_family(&self) -> Result<DiscreteFamily> {
        DiscreteFamily::from_blocks(
            self.laws.clone(),
            &self.blocks,
            self.edges.clone(),
            self.centering.clone(),
        )
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub delta: f64,
    /// 𝒜_δ = Σ E|Y_k - c_k|^δ
    pub a: f64,
    /// M_δ = max_k ‖Y_k - c_k‖_δ
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

/// Moment summary consumed by the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub n: usize,
    pub d: usize,
    pub v: f64,
    #[serde(default)]
    pub moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub centering: CenteringChoice,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MomentProfile {
    pub fn new(n: usize, d: usize, v: f64) -> Self {
        Self {
            n,
            d,
            v,
            moments: Vec::new(),
            l: None,
            rho: None,
            centering: CenteringChoice::Mean,
            notes: Vec::new(),
        }
    }

    pub fn with_moment(mut self, delta: f64, a: f64) -> Self {
        self.set_moment(delta, a, None);
        self
    }

    pub fn with_max_moment(mut self, delta: f64, m: f64) -> Self {
        match self.entry_mut(delta) {
            Some(e) => e.m = Some(m),
            None => self.set_moment(delta, f64::NAN, Some(m)),
        }
        self
    }

    pub fn with_l(mut self, l: f64) -> Self {
        self.l = Some(l);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_centering(mut self, c: CenteringChoice) -> Self {
        self.centering = c;
        self
    }

    fn set_moment(&mut self, delta: f64, a: f64, m: Option<f64>) {
        if let Some(e) = self.entry_mut(delta) {
            e.a = a;
            if m.is_some() {
                e.m = m;
            }
            return;
        }
        self.moments.push(MomentEntry { delta, a, m });
        self.moments.sort_by(|x, y| x.delta.total_cmp(&y.delta));
    }

    fn entry_mut(&mut self, delta: f64) -> Option<&mut MomentEntry> {
        self.moments.iter_mut().find(|e| (e.delta - delta).abs() <= DELTA_TOL)
    }

    fn entry(&self, delta: f64) -> Option<&MomentEntry> {
        self.moments.iter().find(|e| (e.delta - delta).abs() <= DELTA_TOL)
    }

    /// 𝒜_δ, if stored.
    pub fn a(&self, delta: f64) -> Result<f64> {
        self.entry(delta)
            .map(|e| e.a)
            .filter(|a| a.is_finite())
            .ok_or_else(|| Error::MissingMoment(format!("A_{delta}")))
    }

    /// M_δ, if stored.
    pub fn m(&self, delta: f64) -> Result<f64> {
        self.entry(delta)
            .and_then(|e| e.m)
            .ok_or_else(|| Error::MissingMoment(format!("M_{delta}")))
    }

    pub fn l(&self) -> Result<f64> {
        self.l.ok_or_else(|| Error::MissingMoment("L".into()))
    }

    pub fn rho(&self) -> Result<f64> {
        self.rho.ok_or_else(|| Error::MissingMoment("rho".into()))
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.moments.iter().filter(|e| e.a.is_finite()).map(|e| e.delta).collect()
    }

    pub fn require_positive_v(&self) -> Result<()> {
        if !(self.v > 0.0) {
            return Err(Error::DegenerateVariance);
        }
        Ok(())
    }

    /// Structural checks on a profile loaded from outside.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidProfile("N must be positive".into()));
        }
        if !self.v.is_finite() || self.v < 0.0 {
            return Err(Error::InvalidProfile(format!("v = {} is not a finite non-negative real", self.v)));
        }
        for e in &self.moments {
            if !(e.delta > 0.0) || !e.delta.is_finite() {
                return Err(Error::InvalidProfile(format!("moment order {}", e.delta)));
            }
            if e.a.is_finite() && e.a < 0.0 {
                return Err(Error::InvalidProfile(format!("A_{} is negative", e.delta)));
            }
            if let Some(m) = e.m {
                if !(m >= 0.0) {
                    return Err(Error::InvalidProfile(format!("M_{} is negative", e.delta)));
                }
            }
        }
        if let Some(l) = self.l {
            if !(l > 0.0) {
                return Err(Error::InvalidProfile("L must be positive".into()));
            }
        }
        if let Some(r) = self.rho {
            if !(r >= 0.0) {
                return Err(Error::InvalidProfile("rho must be non-negative".into()));
            }
        }
        self.centering.check_len(self.n).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        Ok(())
    }

    /// Invariants that hold for every profile of a real family; returns a
    /// description of each violation, empty when consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let slack = 1e-12;
        let mut out = Vec::new();
        let stored: Vec<&MomentEntry> = self.moments.iter().filter(|e| e.a.is_finite()).collect();
        let n = self.n as f64;
        for w in stored.windows(2) {
            let lo = (w[0].a / n).powf(1.0 / w[0].delta);
            let hi = (w[1].a / n).powf(1.0 / w[1].delta);
            if lo > hi * (1.0 + slack) {
                out.push(format!(
                    "(A_d/N)^(1/d) decreases from d={} to d={}",
                    w[0].delta, w[1].delta
                ));
            }
        }
        if let Some(l) = self.l {
            for e in &stored {
                if e.a > n * l.powf(e.delta) * (1.0 + slack) {
                    out.push(format!("A_{} exceeds N L^d", e.delta));
                }
            }
        }
        if let Ok(a2) = self.a(2.0) {
            if self.v * self.v > a2 * (self.d as f64 + 1.0) * (1.0 + slack) {
                out.push("v^2 exceeds A_2 (D+1)".into());
            }
        }
        out
    }
}

/// Moment profile of a family. Every δ must be at least 1. When the third
/// cumulant cannot be enumerated within the cap, ρ is left empty and a note
/// records the reason.
pub fn derive_profile(family: &DiscreteFamily, deltas: &[f64]) -> Result<MomentProfile> {
    for &d in deltas {
        if !(d >= 1.0) || !d.is_finite() {
            return Err(Error::InvalidInput(format!("moment order {d} must be finite and >= 1")));
        }
    }
    let c = family.centers();
    let laws = family.laws();
    let v2 = family.variance_of_sum()?;
    let var_scale = compensated_sum(laws.iter().map(|l| l.variance()));
    if !(v2 > 1e-12 * var_scale) || var_scale == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mut profile = MomentProfile::new(family.n(), family.graph().max_degree(), v2.sqrt())
        .with_centering(family.centering().clone());
    for &delta in deltas {
        let per: Vec<f64> = laws.iter().zip(&c).map(|(l, &ck)| l.abs_moment(ck, delta)).collect();
        let a = compensated_sum(per.iter().copied());
        let m = per.iter().copied().fold(0.0, f64::max).powf(1.0 / delta);
        profile.set_moment(delta, a, Some(m));
    }
    let l = laws.iter().zip(&c).map(|(law, &ck)| law.sup_abs(ck)).fold(0.0, f64::max);
    if l > 0.0 {
        profile.l = Some(l);
    }
    match third_cumulant(family) {
        Ok(k3) => profile.rho = Some(k3.abs()),
        Err(e) => profile.notes.push(format!("rho omitted: {e}")),
    }
    Ok(profile)
}

/// κ₃(S) summed over independent components.
fn third_cumulant(family: &DiscreteFamily) -> Result<f64> {
    let mut total = CompensatedSum::new();
    for c in 0..family.components().len() {
        let mut mean = CompensatedSum::new();
        family.for_each_component_sum(c, |x, p| mean.add(p * x))?;
        let mu = mean.value();
        let mut m3 = CompensatedSum::new();
        family.for_each_component_sum(c, |x, p| m3.add(p * (x - mu).powi(3)))?;
        total.add(m3.value());
    }
    Ok(total.value())
}

/// ξ_δ = (N/𝒜_δ)^{1/δ} · sqrt(v²/(N(D+1))).
pub fn xi(profile: &MomentProfile, delta: f64) -> Result<f64> {
    let a = profile.a(delta)?;
    profile.require_positive_v()?;
    if !(a > 0.0) {
        return Err(Error::InvalidProfile(format!("A_{delta} must be positive")));
    }
    let n = profile.n as f64;
    Ok((n / a).powf(1.0 / delta) * renormalized_sd(profile))
}

/// σ_δ = (1/M_δ) · sqrt(v²/(N(D+1))).
pub fn sigma(profile: &MomentProfile, delta: f64) -> Result<f64> {
    let m = profile.m(delta)?;
    profile.require_positive_v()?;
    if !(m > 0.0) {
        return Err(Error::InvalidProfile(format!("M_{delta} must be positive")));
    }
    Ok(renormalized_sd(profile) / m)
}

/// sqrt(v² / (N (D+1)))
pub fn renormalized_sd(profile: &MomentProfile) -> f64 {
    profile.v / ((profile.n as f64) * (profile.d as f64 + 1.0)).sqrt()
}
