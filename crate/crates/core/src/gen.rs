//! Random network models: ER, uniform fixed size, configuration model,
//! Chung-Lu, and degree-preserving rewiring.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteNet;
use crate::rng;

/// Default truncation for Poisson tails.
pub const POISSON_TAIL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistKind {
    Poisson { lambda: f64 },
    Empirical,
}

/// Probability mass function on `0..=N` with its mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeDist {
    pmf: Vec<f64>,
    mean: f64,
    kind: DistKind,
}

impl DegreeDist {
    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::poisson_with_tail(lambda, POISSON_TAIL)
    }

    /// Poisson(λ) cut at the smallest `N` whose tail mass is below `tail`, renormalised.
    pub fn poisson_with_tail(lambda: f64, tail: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("Poisson rate must be finite and >= 0, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(DegreeDist { pmf: vec![1.0], mean: 0.0, kind: DistKind::Poisson { lambda } });
        }
        let mut terms = Vec::new();
        let mut log_fact = 0.0;
        let mut k = 0usize;
        loop {
            if k > 0 {
                log_fact += (k as f64).ln();
            }
            let p = (-lambda + k as f64 * lambda.ln() - log_fact).exp();
            terms.push(p);
            if k as f64 > lambda && p < tail * 1e-4 {
                break;
            }
            k += 1;
        }
        let mut above = 0.0;
        let mut cut = terms.len() - 1;
        for i in (0..terms.len()).rev() {
            if above >= tail {
                break;
            }
            cut = i;
            above += terms[i];
        }
        terms.truncate(cut + 1);
        Ok(Self::normalised(terms, DistKind::Poisson { lambda }))
    }

    pub fn point_mass(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        DegreeDist { pmf, mean: k as f64, kind: DistKind::Empirical }
    }

    /// Takes nonnegative weights indexed by degree and normalises them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Input("degree weights must be finite and nonnegative".into()));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Input("degree weights sum to zero".into()));
        }
        Ok(Self::normalised(weights, DistKind::Empirical))
    }

    /// Empirical distribution of a degree sequence.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Input("empty degree sequence".into()));
        }
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0.0; max + 1];
        for &d in degrees {
            counts[d] += 1.0;
        }
        Ok(Self::normalised(counts, DistKind::Empirical))
    }

    fn normalised(mut pmf: Vec<f64>, kind: DistKind) -> Self {
        while pmf.len() > 1 && pmf[pmf.len() - 1] == 0.0 {
            pmf.pop();
        }
        let s: f64 = pmf.iter().sum();
        for p in &mut pmf {
            *p /= s;
        }
        let mean = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        DegreeDist { pmf, mean, kind }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    /// Largest degree with positive mass.
    pub fn max_degree(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn sample_degrees<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        if self.pmf.len() == 1 {
            return vec![0; n];
        }
        let alias = WeightedAliasIndex::new(self.pmf.clone()).expect("pmf is a valid weight vector");
        (0..n).map(|_| alias.sample(rng)).collect()
    }
}

/// Total variation distance between two pmfs on the nonnegative integers.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ErDirected,
    ErUndirected,
    UfsDirected,
    UfsUndirected,
    DdUndirected,
    DdDirected,
    ChungLu,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Input(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    pub lambda: f64,
    pub dist_in: Option<DegreeDist>,
    pub dist_out: Option<DegreeDist>,
    pub weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(model: Model, n: usize, lambda: f64, seed: u64) -> Self {
        GenSpec { model, n, lambda, dist_in: None, dist_out: None, weights: None, seed }
    }

    /// Configuration model with the same law for in- and out-degrees.
    pub fn dd(model: Model, n: usize, dist: DegreeDist, seed: u64) -> Self {
        GenSpec {
            lambda: dist.mean(),
            dist_in: Some(dist.clone()),
            dist_out: Some(dist),
            ..GenSpec::new(model, n, 0.0, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Input("n must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Input(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        match self.model {
            Model::DdUndirected | Model::DdDirected if self.dist_in.is_none() => {
                Err(Error::Input("configuration model needs a degree distribution".into()))
            }
            Model::ChungLu => match &self.weights {
                None => Err(Error::Input("Chung-Lu model needs weights".into())),
                Some(w) if w.len() != self.n => Err(Error::Input(format!(
                    "expected {} weights, got {}",
                    self.n,
                    w.len()
                ))),
                Some(_) => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// Generates the network described by `spec` from its own seed.
pub fn generate(spec: &GenSpec) -> Result<BipartiteNet> {
    generate_with(spec, &mut rng::seeded(spec.seed))
}

/// Generates the network described by `spec`, drawing from `rng`.
pub fn generate_with<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<BipartiteNet> {
    spec.validate()?;
    match spec.model {
        Model::ErDirected | Model::ErUndirected => gen_er(spec, rng),
        Model::UfsDirected | Model::UfsUndirected => gen_ufs(spec, rng),
        Model::DdDirected | Model::DdUndirected => gen_dd(spec, rng),
        Model::ChungLu => gen_chung_lu(spec, rng).map(|(net, _)| net),
    }
}

fn candidate_count(n: usize, directed: bool) -> u64 {
    let n = n as u64;
    if directed {
        n * n
    } else {
        n * (n + 1) / 2
    }
}

/// Decodes increasing indices of the `i <= j` pair space in row-major order.
struct TriangleDecoder {
    n: u64,
    row: u64,
    row_start: u64,
}

impl TriangleDecoder {
    fn new(n: usize) -> Self {
        TriangleDecoder { n: n as u64, row: 0, row_start: 0 }
    }

    fn decode(&mut self, idx: u64) -> (usize, usize) {
        while idx >= self.row_start + (self.n - self.row) {
            self.row_start += self.n - self.row;
            self.row += 1;
        }
        (self.row as usize, (self.row + idx - self.row_start) as usize)
    }
}

fn build(n: usize, directed: bool, sorted_idx: impl Iterator<Item = u64>) -> BipartiteNet {
    if directed {
        let edges = sorted_idx
            .map(|i| ((i / n as u64) as usize, (i % n as u64) as usize))
            .collect();
        BipartiteNet::from_pairs_unchecked(n, edges)
    } else {
        let mut dec = TriangleDecoder::new(n);
        let pairs: Vec<_> = sorted_idx.map(|i| dec.decode(i)).collect();
        BipartiteNet::from_undirected_edges(n, &pairs).expect("decoded ids are in range")
    }
}

pub fn gen_er<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<BipartiteNet> {
    let directed = match spec.model {
        Model::ErDirected => true,
        Model::ErUndirected => false,
        m => return Err(Error::Input(format!("gen_er called with model {m:?}"))),
    };
    let n = spec.n;
    let p = (spec.lambda / n as f64).min(1.0);
    let total = candidate_count(n, directed);
    if p <= 0.0 {
        return Ok(BipartiteNet::empty(n));
    }
    if p >= 1.0 {
        return Ok(build(n, directed, 0..total));
    }
    // floor(Exp(1) / -ln(1 - p)) is Geometric(p).
    let scale = -1.0 / (-p).ln_1p();
    let mut idx = Vec::with_capacity((total as f64 * p * 1.1) as usize + 16);
    let mut pos: u64 = 0;
    loop {
        let x: f64 = Exp1.sample(rng);
        let skip = (x * scale).floor();
        if skip >= total as f64 {
            break;
        }
        pos = match pos.checked_add(skip as u64) {
            Some(x) if x < total => x,
            _ => break,
        };
        idx.push(pos);
        pos += 1;
    }
    Ok(build(n, directed, idx.into_iter()))
}

pub fn gen_ufs<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<BipartiteNet> {
    let (directed, k) = match spec.model {
        Model::UfsDirected => (true, (spec.lambda * spec.n as f64).round()),
        Model::UfsUndirected => (false, (spec.lambda * spec.n as f64 / 2.0).round()),
        m => return Err(Error::Input(format!("gen_ufs called with model {m:?}"))),
    };
    let total = candidate_count(spec.n, directed);
    if k > total as f64 {
        return Err(Error::Input(format!("{k} edges requested but only {total} candidates exist")));
    }
    let mut idx: Vec<u64> = rand::seq::index::sample(rng, total as usize, k as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    idx.sort_unstable();
    Ok(build(spec.n, directed, idx.into_iter()))
}

fn stubs(degrees: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(degrees.iter().sum());
    for (v, &d) in degrees.iter().enumerate() {
        out.extend(std::iter::repeat_n(v, d));
    }
    out
}

/// Uniform pairing of out-stubs (left) with in-stubs (right); excess stubs are dropped.
fn pair_directed<R: Rng + ?Sized>(n: usize, mut outs: Vec<usize>, mut ins: Vec<usize>, rng: &mut R) -> BipartiteNet {
    outs.shuffle(rng);
    ins.shuffle(rng);
    let edges = outs.into_iter().zip(ins).collect();
    BipartiteNet::from_pairs_unchecked(n, edges)
}

pub fn gen_dd<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<BipartiteNet> {
    let n = spec.n;
    let dist_in = spec
        .dist_in
        .as_ref()
        .ok_or_else(|| Error::Input("configuration model needs a degree distribution".into()))?;
    match spec.model {
        Model::DdUndirected => {
            let mut s = stubs(&dist_in.sample_degrees(n, rng));
            s.shuffle(rng);
            let pairs: Vec<_> = s.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            BipartiteNet::from_undirected_edges(n, &pairs)
        }
        Model::DdDirected => {
            let dist_out = spec.dist_out.as_ref().unwrap_or(dist_in);
            let ins = stubs(&dist_in.sample_degrees(n, rng));
            let outs = stubs(&dist_out.sample_degrees(n, rng));
            Ok(pair_directed(n, outs, ins, rng))
        }
        m => Err(Error::Input(format!("gen_dd called with model {m:?}"))),
    }
}

/// Undirected Chung-Lu graph on pairs `i <= j`.
///
/// Returns the net and the number of pairs whose probability was clamped to 1.
pub fn gen_chung_lu<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<(BipartiteNet, usize)> {
    let w = spec
        .weights
        .as_deref()
        .ok_or_else(|| Error::Input("Chung-Lu model needs weights".into()))?;
    chung_lu(w, rng)
}

pub fn chung_lu<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> Result<(BipartiteNet, usize)> {
    if w.is_empty() {
        return Err(Error::Input("empty weight vector".into()));
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Input("weights must be finite and nonnegative".into()));
    }
    let n = w.len();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return Ok((BipartiteNet::empty(n), 0));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let ws: Vec<f64> = order.iter().map(|&i| w[i]).collect();

    let mut clamped = 0usize;
    let mut reach = n;
    for i in 0..n {
        while reach > 0 && ws[i] * ws[reach - 1] <= total {
            reach -= 1;
        }
        clamped += reach.saturating_sub(i);
    }

    let mut pairs = Vec::new();
    for u in 0..n {
        let mut v = u;
        let mut p = (ws[u] * ws[v] / total).min(1.0);
        while v < n && p > 0.0 {
            if p < 1.0 {
                let r: f64 = rng.random();
                v += ((1.0 - r).ln() / (1.0 - p).ln()).floor() as usize;
            }
            if v >= n {
                break;
            }
            let q = (ws[u] * ws[v] / total).min(1.0);
            let r: f64 = rng.random();
            if r < q / p {
                pairs.push((order[u], order[v]));
            }
            p = q;
            v += 1;
        }
    }
    Ok((BipartiteNet::from_undirected_edges(n, &pairs)?, clamped))
}

/// Fresh uniform stub pairing with every in- and out-degree kept.
pub fn rewire_preserving_degrees(net: &BipartiteNet, seed: u64) -> BipartiteNet {
    rewire_with(net, &mut rng::seeded(seed))
}

pub fn rewire_with<R: Rng + ?Sized>(net: &BipartiteNet, rng: &mut R) -> BipartiteNet {
    let (outs, mut ins): (Vec<usize>, Vec<usize>) = net.edges().unzip();
    ins.shuffle(rng);
    BipartiteNet::from_pairs_unchecked(net.n(), outs.into_iter().zip(ins).collect())
}
