//! The four planted models: parameters, instances and seeded samplers.
//!
//! Conventions:
//! - PSP vertices are 1-indexed; the planted path runs from vertex 1 to
//!   vertex 2. Unordered pairs are stored as `(min, max)`.
//! - GSS and TPCA subsets are 0-indexed and sorted.
//! - Every sampler is a pure function of `(params, seed)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, F2Vector};
use crate::rng::{self, WorkbenchRng};

/// Default cap on the number of tensor entries `n^d`.
pub const DEFAULT_TENSOR_BUDGET: u128 = 1_000_000;

/// An unordered vertex pair `(i, j)` with `i < j`, 1-indexed.
pub type Edge = (usize, usize);

/// Simple undirected graph on vertices `1..=n`, one flag per unordered pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![false; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn complete(n: usize) -> Self {
        Graph {
            n,
            adj: vec![true; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.set_edge(i, j, true);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_pairs(&self) -> usize {
        self.adj.len()
    }

    /// Position of the pair `{i, j}` in the canonical pair order
    /// `(1,2), (1,3), ..., (1,n), (2,3), ...`.
    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        pair_index(self.n, i, j)
    }

    pub fn pair_at(&self, index: usize) -> Edge {
        pair_at(self.n, index)
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adj[self.pair_index(i, j)]
    }

    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        let idx = self.pair_index(i, j);
        self.adj[idx] = present;
    }

    pub fn pair_flags(&self) -> &[bool] {
        &self.adj
    }

    pub fn pair_flags_mut(&mut self) -> &mut [bool] {
        &mut self.adj
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    /// Present edges in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(idx, _)| self.pair_at(idx))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(move |&u| u != v && self.has_edge(u, v))
    }

    /// The graph with vertex `v` renamed to `perm[v]` (`perm` is 1-indexed;
    /// `perm[0]` is ignored).
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::empty(self.n);
        for (idx, &b) in self.adj.iter().enumerate() {
            if b {
                let (i, j) = self.pair_at(idx);
                g.set_edge(perm[i], perm[j], true);
            }
        }
        g
    }

    /// Edge indicator vector in pair order.
    pub fn to_f64(&self) -> Vec<f64> {
        self.adj.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

#[inline]
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(a >= 1 && b <= n && a < b);
    // pairs (a, *) for rows before `a` occupy sum_{r<a} (n - r) slots
    let a0 = a - 1;
    a0 * (2 * n - a0 - 1) / 2 + (b - a - 1)
}

pub(crate) fn pair_at(n: usize, mut index: usize) -> Edge {
    let mut a = 1;
    while index >= n - a {
        index -= n - a;
        a += 1;
    }
    (a, a + 1 + index)
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: usize,
            edges: Vec<Edge>,
        }
        Repr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            edges: Vec<Edge>,
        }
        let r = Repr::deserialize(d)?;
        for &(i, j) in &r.edges {
            if i == j || i == 0 || j == 0 || i > r.n || j > r.n {
                return Err(serde::de::Error::custom(format!("invalid edge ({i}, {j})")));
            }
        }
        Ok(Graph::from_edges(r.n, &r.edges))
    }
}

// ---------------------------------------------------------------------------
// Parameters

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PspParams {
    pub n: usize,
    /// Planted path length in edges.
    #[serde(rename = "L")]
    pub path_len: usize,
    pub q: f64,
}

impl PspParams {
    pub fn new(n: usize, path_len: usize, q: f64) -> Result<Self> {
        let p = PspParams { n, path_len, q };
        p.validate()?;
        Ok(p)
    }

    /// `L = round(C log n / log log n)`, `q = c log n / n`.
    pub fn from_constants(n: usize, big_c: f64, small_c: f64) -> Result<Self> {
        if n < 16 {
            // log log n must be comfortably positive
            return Err(Error::param("n", "the (C, c) form needs n >= 16"));
        }
        let ln = (n as f64).ln();
        let path_len = (big_c * ln / ln.ln()).round() as usize;
        Self::new(n, path_len, (small_c * ln / n as f64).min(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::param("n", format!("need n >= 3, got {}", self.n)));
        }
        if self.path_len < 2 || self.path_len > self.n - 1 {
            return Err(Error::param(
                "L",
                format!("need 2 <= L <= n - 1 = {}, got {}", self.n - 1, self.path_len),
            ));
        }
        check_probability("q", self.q)
    }

    pub fn num_pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RlcParams {
    pub m: usize,
    pub n: usize,
}

impl RlcParams {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        let p = RlcParams { m, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::param("n", "need n >= 1"));
        }
        if self.m < self.n {
            return Err(Error::param("m", format!("need m >= n = {}, got {}", self.n, self.m)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GssParams {
    #[serde(rename = "N")]
    pub n_items: usize,
    pub k: usize,
}

impl GssParams {
    pub fn new(n_items: usize, k: usize) -> Result<Self> {
        let p = GssParams { n_items, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n_items {
            return Err(Error::param(
                "k",
                format!("need 1 <= k <= N = {}, got {}", self.n_items, self.k),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpcaParams {
    pub n: usize,
    pub k: usize,
    pub d: u32,
    pub lambda: f64,
}

impl TpcaParams {
    pub fn new(n: usize, k: usize, d: u32, lambda: f64) -> Result<Self> {
        let p = TpcaParams { n, k, d, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n {
            return Err(Error::param(
                "k",
                format!("need 1 <= k <= n = {}, got {}", self.n, self.k),
            ));
        }
        if self.d < 2 {
            return Err(Error::param("d", format!("need d >= 2, got {}", self.d)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("need lambda >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// Same model at a different signal-to-noise ratio.
    pub fn with_lambda(self, lambda: f64) -> Self {
        TpcaParams { lambda, ..self }
    }

    /// Number of tensor entries `n^d`, saturating.
    pub fn entries(&self) -> u128 {
        (self.n as u128).checked_pow(self.d).unwrap_or(u128::MAX)
    }

    /// Value `1/sqrt(k)` of `x` on its support.
    pub fn spike_value(&self) -> f64 {
        1.0 / (self.k as f64).sqrt()
    }
}

fn check_probability(field: &'static str, q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::param(field, format!("need a value in [0, 1], got {q}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Psp,
    Rlc,
    Gss,
    Tpca,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Psp => "psp",
            ModelKind::Rlc => "rlc",
            ModelKind::Gss => "gss",
            ModelKind::Tpca => "tpca",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of any of the four models, tagged by `"model"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Psp(PspParams),
    Rlc(RlcParams),
    Gss(GssParams),
    Tpca(TpcaParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Psp(_) => ModelKind::Psp,
            ModelParams::Rlc(_) => ModelKind::Rlc,
            ModelParams::Gss(_) => ModelKind::Gss,
            ModelParams::Tpca(_) => ModelKind::Tpca,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Psp(p) => p.validate(),
            ModelParams::Rlc(p) => p.validate(),
            ModelParams::Gss(p) => p.validate(),
            ModelParams::Tpca(p) => p.validate(),
        }
    }

    /// Exact `E ||x||^2` of the planted signal.
    pub fn signal_norm(&self) -> f64 {
        match self {
            ModelParams::Psp(p) => p.path_len as f64,
            ModelParams::Rlc(p) => p.n as f64 / 2.0,
            ModelParams::Gss(p) => p.k as f64,
            ModelParams::Tpca(_) => 1.0,
        }
    }

    /// Dimension of the signal space.
    pub fn signal_dim(&self) -> usize {
        match self {
            ModelParams::Psp(p) => p.num_pairs(),
            ModelParams::Rlc(p) => p.n,
            ModelParams::Gss(p) => p.n_items,
            ModelParams::Tpca(p) => p.n,
        }
    }

    /// Parameters as a compact JSON object (without the model tag).
    pub fn params_json(&self) -> String {
        match self {
            ModelParams::Psp(p) => serde_json::to_string(p),
            ModelParams::Rlc(p) => serde_json::to_string(p),
            ModelParams::Gss(p) => serde_json::to_string(p),
            ModelParams::Tpca(p) => serde_json::to_string(p),
        }
        .expect("parameter structs always serialize")
    }

    pub fn sample(&self, seed: u64) -> Result<ModelInstance> {
        Ok(match self {
            ModelParams::Psp(p) => ModelInstance::Psp(sample_psp(p, seed)?),
            ModelParams::Rlc(p) => ModelInstance::Rlc(sample_rlc(p, seed)?),
            ModelParams::Gss(p) => ModelInstance::Gss(sample_gss(p, seed)?),
            ModelParams::Tpca(p) => ModelInstance::Tpca(sample_tpca(p, seed)?),
        })
    }
}

/// `E ||x||^2` for the given model parameters.
pub fn signal_norm(params: &ModelParams) -> f64 {
    params.signal_norm()
}

// ---------------------------------------------------------------------------
// Instances

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PspInstance {
    pub params: PspParams,
    /// `1 = v_0, v_1, ..., v_L = 2`.
    pub planted_path: Vec<usize>,
    pub graph: Graph,
}

impl PspInstance {
    pub fn path_edges(&self) -> Vec<Edge> {
        path_edges(&self.planted_path)
    }

    /// Edge-indicator vector of the planted path.
    pub fn signal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.params.num_pairs()];
        for (i, j) in self.path_edges() {
            x[pair_index(self.params.n, i, j)] = 1.0;
        }
        x
    }
}

/// Consecutive pairs of a vertex sequence, canonicalised.
pub fn path_edges(path: &[usize]) -> Vec<Edge> {
    path.windows(2)
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlcInstance {
    pub params: RlcParams,
    pub a: F2Matrix,
    pub x: F2Vector,
    pub y: F2Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GssInstance {
    pub params: GssParams,
    pub x: Vec<f64>,
    /// Sorted, 0-indexed.
    pub support: Vec<usize>,
    pub y: f64,
}

impl GssInstance {
    pub fn signal(&self) -> Vec<f64> {
        indicator(self.params.n_items, &self.support, 1.0)
    }
}

/// Left-to-right sum of `x` over the (sorted) index set. This is the exact
/// summation order used to build `GssInstance::y`.
pub fn subset_sum(x: &[f64], subset: &[usize]) -> f64 {
    subset.iter().fold(0.0, |acc, &i| acc + x[i])
}

/// Dense order-`d` tensor over `[n]^d`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub n: usize,
    pub d: u32,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(n: usize, d: u32) -> Self {
        Tensor {
            n,
            d,
            data: vec![0.0; n.pow(d)],
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.d as usize);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    /// `<T, 1_S^{(x) d}>`: the sum of entries over `S^d`.
    pub fn sum_over_cube(&self, subset: &[usize]) -> f64 {
        let d = self.d as usize;
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let mut digits = vec![0usize; d];
        let mut total = 0.0;
        loop {
            let flat = digits.iter().fold(0, |acc, &t| acc * self.n + subset[t]);
            total += self.data[flat];
            // odometer over subset^d
            let mut pos = d;
            loop {
                if pos == 0 {
                    return total;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < k {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Flat indices of every entry in `S^d`.
    pub fn cube_indices(&self, subset: &[usize]) -> Vec<usize> {
        let d = self.d as usize;
        let mut out = vec![0usize];
        for _ in 0..d {
            out = out
                .iter()
                .flat_map(|&base| subset.iter().map(move |&i| base * self.n + i))
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpcaInstance {
    pub params: TpcaParams,
    /// Sorted, 0-indexed support of `x`.
    pub support: Vec<usize>,
    pub y: Tensor,
}

impl TpcaInstance {
    pub fn signal(&self) -> Vec<f64> {
        indicator(self.params.n, &self.support, self.params.spike_value())
    }
}

pub(crate) fn indicator(len: usize, support: &[usize], value: f64) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for &i in support {
        v[i] = value;
    }
    v
}

/// A sampled instance of any model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelInstance {
    Psp(PspInstance),
    Rlc(RlcInstance),
    Gss(GssInstance),
    Tpca(TpcaInstance),
}

/// What an estimator is allowed to see.
#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Psp { params: PspParams, graph: Graph },
    Rlc { params: RlcParams, a: F2Matrix, y: F2Vector },
    Gss { params: GssParams, x: Vec<f64>, y: f64 },
    Tpca { params: TpcaParams, y: Tensor },
}

impl Observation {
    pub fn kind(&self) -> ModelKind {
        match self {
            Observation::Psp { .. } => ModelKind::Psp,
            Observation::Rlc { .. } => ModelKind::Rlc,
            Observation::Gss { .. } => ModelKind::Gss,
            Observation::Tpca { .. } => ModelKind::Tpca,
        }
    }
}

impl ModelInstance {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelInstance::Psp(_) => ModelKind::Psp,
            ModelInstance::Rlc(_) => ModelKind::Rlc,
            ModelInstance::Gss(_) => ModelKind::Gss,
            ModelInstance::Tpca(_) => ModelKind::Tpca,
        }
    }

    /// The planted signal as a real vector.
    pub fn signal(&self) -> Vec<f64> {
        match self {
            ModelInstance::Psp(i) => i.signal(),
            ModelInstance::Rlc(i) => i.x.to_f64(),
            ModelInstance::Gss(i) => i.signal(),
            ModelInstance::Tpca(i) => i.signal(),
        }
    }

    pub fn observation(&self) -> Observation {
        match self {
            ModelInstance::Psp(i) => Observation::Psp {
                params: i.params,
                graph: i.graph.clone(),
            },
            ModelInstance::Rlc(i) => Observation::Rlc {
                params: i.params,
                a: i.a.clone(),
                y: i.y.clone(),
            },
            ModelInstance::Gss(i) => Observation::Gss {
                params: i.params,
                x: i.x.clone(),
                y: i.y,
            },
            ModelInstance::Tpca(i) => Observation::Tpca {
                params: i.params,
                y: i.y.clone(),
            },
        }
    }
}

/// Number of length-`len` paths from 1 to 2 in `K_n`.
pub fn path_count(n: usize, len: usize) -> u128 {
    if len == 0 || n < 2 {
        return 0;
    }
    crate::stats::falling_factorial(n as u64 - 2, len as u64 - 1)
}

/// Calls `f` on every vertex sequence `1, v_1, ..., v_{len-1}, 2` with
/// distinct intermediates from `3..=n`, in lexicographic order.
pub fn for_each_path<F: FnMut(&[usize])>(n: usize, len: usize, mut f: F) {
    if len == 0 || n < 2 || len - 1 > n - 2 {
        return;
    }
    let mut path = Vec::with_capacity(len + 1);
    path.push(1);
    let mut used = vec![false; n + 1];
    fn rec<F: FnMut(&[usize])>(
        n: usize,
        remaining: usize,
        path: &mut Vec<usize>,
        used: &mut [bool],
        f: &mut F,
    ) {
        if remaining == 0 {
            path.push(2);
            f(path);
            path.pop();
            return;
        }
        for v in 3..=n {
            if !used[v] {
                used[v] = true;
                path.push(v);
                rec(n, remaining - 1, path, used, f);
                path.pop();
                used[v] = false;
            }
        }
    }
    rec(n, len - 1, &mut path, &mut used, &mut f);
}

// ---------------------------------------------------------------------------
// Samplers

/// Uniform `k`-subset of `0..n`, sorted.
pub(crate) fn uniform_subset(rng: &mut WorkbenchRng, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    let mut s = chosen.to_vec();
    s.sort_unstable();
    s
}

/// Uniform ordered sequence of `len` distinct vertices from `3..=n`.
pub(crate) fn uniform_intermediates(rng: &mut WorkbenchRng, n: usize, len: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (3..=n).collect();
    let (chosen, _) = pool.partial_shuffle(rng, len);
    chosen.to_vec()
}

pub fn sample_psp(params: &PspParams, seed: u64) -> Result<PspInstance> {
    params.validate()?;
    let mut rng = rng::from_seed(seed);
    let mut path = Vec::with_capacity(params.path_len + 1);
    path.push(1);
    path.extend(uniform_intermediates(&mut rng, params.n, params.path_len - 1));
    path.push(2);

    let mut graph = Graph::empty(params.n);
    for flag in graph.pair_flags_mut() {
        *flag = rng.random::<f64>() < params.q;
    }
    for (i, j) in path_edges(&path) {
        graph.set_edge(i, j, true);
    }
    Ok(PspInstance {
        params: *params,
        planted_path: path,
        graph,
    })
}

/// An Erdos-Renyi graph `G(n, q)` without a planted path.
pub fn sample_erdos_renyi(n: usize, q: f64, seed: u64) -> Result<Graph> {
    check_probability("q", q)?;
    let mut rng = rng::from_seed(seed);
    let mut graph = Graph::empty(n);
    for flag in graph.pair_flags_mut() {
        *flag = rng.random::<f64>() < q;
    }
    Ok(graph)
}

pub fn sample_rlc(params: &RlcParams, seed: u64) -> Result<RlcInstance> {
    params.validate()?;
    let mut rng = rng::from_seed(seed);
    Ok(sample_rlc_with(params, &mut rng))
}

pub(crate) fn sample_rlc_with(params: &RlcParams, rng: &mut WorkbenchRng) -> RlcInstance {
    let mut a = F2Matrix::zeros(params.m, params.n);
    for i in 0..params.m {
        for j in 0..params.n {
            a.set(i, j, rng.random::<bool>());
        }
    }
    let mut x = F2Vector::zeros(params.n);
    for j in 0..params.n {
        x.set(j, rng.random::<bool>());
    }
    let y = a.mul_vec(&x);
    RlcInstance {
        params: *params,
        a,
        x,
        y,
    }
}

pub fn sample_gss(params: &GssParams, seed: u64) -> Result<GssInstance> {
    params.validate()?;
    let mut rng = rng::from_seed(seed);
    let x: Vec<f64> = (0..params.n_items)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let support = uniform_subset(&mut rng, params.n_items, params.k);
    let y = subset_sum(&x, &support);
    Ok(GssInstance {
        params: *params,
        x,
        support,
        y,
    })
}

pub fn sample_tpca(params: &TpcaParams, seed: u64) -> Result<TpcaInstance> {
    sample_tpca_with_budget(params, seed, DEFAULT_TENSOR_BUDGET)
}

pub fn sample_tpca_with_budget(
    params: &TpcaParams,
    seed: u64,
    max_entries: u128,
) -> Result<TpcaInstance> {
    params.validate()?;
    let entries = params.entries();
    if entries > max_entries {
        return Err(Error::budget("tensor entries", entries, max_entries));
    }
    let mut rng = rng::from_seed(seed);
    let support = uniform_subset(&mut rng, params.n, params.k);
    let mut y = Tensor::zeros(params.n, params.d);
    for v in y.data.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let spike = params.lambda.sqrt() * params.spike_value().powi(params.d as i32);
    for idx in y.cube_indices(&support) {
        y.data[idx] += spike;
    }
    Ok(TpcaInstance {
        params: *params,
        support,
        y,
    })
}
