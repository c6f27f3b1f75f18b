//! Exact samplers for the uniform simplex measure, the microcanonical
//! measure `nu_n(m, rho)` and the grand-canonical product measure
//! `eta(beta, mu)`, plus Monte Carlo estimation of local observables.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelPoint, PartitionTable};
use crate::numerics::log_sum_exp;
use crate::thermo::FieldParams;

/// Seed plus stream selector; equal states reproduce equal draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent sub-state for parallel chunk `index`.
    pub fn split(&self, index: u64) -> RngState {
        RngState { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))) }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A spin configuration `phi in R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinConfig {
    pub phi: Vec<f64>,
}

impl SpinConfig {
    pub fn magnetization(&self) -> f64 {
        self.phi.iter().sum()
    }

    pub fn particles(&self) -> f64 {
        self.phi.iter().map(|x| x.abs()).sum()
    }
}

/// Uniform draw from `{x in [0,inf)^k : Σ x = r}`; normalized exponentials.
pub fn sample_simplex<R: Rng + ?Sized>(k: usize, r: f64, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; k];
    fill_simplex(&mut out, r, rng);
    out
}

fn fill_simplex<R: Rng + ?Sized>(out: &mut [f64], r: f64, rng: &mut R) {
    let k = out.len();
    if k == 0 {
        return;
    }
    if k == 1 {
        out[0] = r;
        return;
    }
    let mut total = 0.0;
    for x in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *x = e;
        total += e;
    }
    let scale = r / total;
    let mut partial = 0.0;
    for x in out[..k - 1].iter_mut() {
        *x *= scale;
        partial += *x;
    }
    out[k - 1] = (r - partial).max(0.0);
}

/// Normalized probabilities of the number `k = 1..n-1` of positive spins.
/// Index `i` holds the weight of `k = i + 1`.
pub fn sign_count_weights(n: usize, point: &ModelPoint) -> Result<Vec<f64>> {
    point.require_interior()?;
    let table = PartitionTable::new(n)?;
    let t = point.totals(n);
    Ok(normalize_log_weights(&table.log_terms(t.magnetization, t.particles)))
}

fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log_w);
    log_w.iter().map(|w| (w - z).exp()).collect()
}

/// Anything that draws configurations of a fixed size.
pub trait SpinSampler: Send + Sync {
    fn n(&self) -> usize;
    fn sample_into(&self, rng: &mut ChaCha20Rng, phi: &mut [f64]);

    fn sample(&self, rng: &mut ChaCha20Rng) -> SpinConfig {
        let mut phi = vec![0.0; self.n()];
        self.sample_into(rng, &mut phi);
        SpinConfig { phi }
    }
}

/// Exact sampler for `nu_n(m, rho)`: choose the sign count from its
/// weights, a uniform subset of positive sites, then uniform simplex
/// magnitudes for each sign class.
#[derive(Debug, Clone)]
pub struct MicrocanonicalSampler {
    n: usize,
    cumulative: Vec<f64>,
    positive_total: f64,
    negative_total: f64,
}

impl MicrocanonicalSampler {
    pub fn new(n: usize, point: &ModelPoint) -> Result<Self> {
        let weights = sign_count_weights(n, point)?;
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let nf = n as f64;
        Ok(Self {
            n,
            cumulative,
            positive_total: 0.5 * (point.rho() + point.m()) * nf,
            negative_total: 0.5 * (point.rho() - point.m()) * nf,
        })
    }

    fn draw_sign_count(&self, u: f64) -> usize {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let idx = self.cumulative.partition_point(|c| *c <= target);
        idx.min(self.cumulative.len() - 1) + 1
    }
}

impl SpinSampler for MicrocanonicalSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn sample_into(&self, rng: &mut ChaCha20Rng, phi: &mut [f64]) {
        let n = self.n;
        assert_eq!(phi.len(), n);
        let k = self.draw_sign_count(rng.random::<f64>());
        let mut sites: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            sites.swap(i, j);
        }
        let mut pos = vec![0.0; k];
        let mut neg = vec![0.0; n - k];
        fill_simplex(&mut pos, self.positive_total, rng);
        fill_simplex(&mut neg, self.negative_total, rng);
        for (i, &site) in sites[..k].iter().enumerate() {
            phi[site] = pos[i];
        }
        for (i, &site) in sites[k..].iter().enumerate() {
            phi[site] = -neg[i];
        }
    }
}

/// Draws one configuration from `nu_n(m, rho)`.
pub fn sample_microcanonical(n: usize, point: &ModelPoint, rng: &mut ChaCha20Rng) -> Result<SpinConfig> {
    Ok(MicrocanonicalSampler::new(n, point)?.sample(rng))
}

/// Product measure with single-site density proportional to `exp(-beta phi - mu |phi|)`.
#[derive(Debug, Clone, Copy)]
pub struct GrandCanonicalSampler {
    params: FieldParams,
    n: usize,
}

impl GrandCanonicalSampler {
    pub fn new(params: FieldParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::SystemTooSmall { n, min: 1 });
        }
        Ok(Self { params, n })
    }

    pub fn draw_site(&self, rng: &mut ChaCha20Rng) -> f64 {
        let (b, mu) = (self.params.beta(), self.params.mu());
        let e: f64 = rng.sample(Exp1);
        if rng.random::<f64>() < self.params.positive_mass() {
            e / (mu + b)
        } else {
            -e / (mu - b)
        }
    }
}

impl SpinSampler for GrandCanonicalSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn sample_into(&self, rng: &mut ChaCha20Rng, phi: &mut [f64]) {
        for x in phi.iter_mut() {
            *x = self.draw_site(rng);
        }
    }
}

pub fn sample_grand_canonical(params: &FieldParams, n: usize, rng: &mut ChaCha20Rng) -> Result<SpinConfig> {
    Ok(GrandCanonicalSampler::new(*params, n)?.sample(rng))
}

/// Which measure to sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "ensemble", rename_all = "snake_case")]
pub enum SamplerSpec {
    Microcanonical { n: usize, m: f64, rho: f64 },
    GrandCanonical { n: usize, beta: f64, mu: f64 },
}

impl SamplerSpec {
    pub fn n(&self) -> usize {
        match *self {
            SamplerSpec::Microcanonical { n, .. } | SamplerSpec::GrandCanonical { n, .. } => n,
        }
    }

    pub fn build(&self) -> Result<Box<dyn SpinSampler>> {
        Ok(match *self {
            SamplerSpec::Microcanonical { n, m, rho } => {
                Box::new(MicrocanonicalSampler::new(n, &ModelPoint::interior(m, rho)?)?)
            }
            SamplerSpec::GrandCanonical { n, beta, mu } => {
                Box::new(GrandCanonicalSampler::new(FieldParams::new(beta, mu)?, n)?)
            }
        })
    }
}

type LocalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded local function of the leading `arity` coordinates.
#[derive(Clone)]
pub struct Observable {
    name: String,
    arity: usize,
    sup_norm: f64,
    eval: LocalFn,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl Observable {
    /// `sup_norm` is the declared bound on `|f|`; use `f64::INFINITY` for
    /// unbounded diagnostics such as `phi_1`.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        sup_norm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidArgument("observable arity must be positive".into()));
        }
        if !(sup_norm >= 0.0) {
            return Err(Error::InvalidArgument(format!("sup norm {sup_norm} must be >= 0")));
        }
        Ok(Self { name: name.into(), arity, sup_norm, eval: Arc::new(eval) })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), 1, c.abs(), move |_| c).unwrap()
    }

    /// `phi_1`; unbounded, for moment diagnostics.
    pub fn first_coordinate() -> Self {
        Self::new("phi_1", 1, f64::INFINITY, |x| x[0]).unwrap()
    }

    pub fn abs_first_coordinate() -> Self {
        Self::new("|phi_1|", 1, f64::INFINITY, |x| x[0].abs()).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(&x[..self.arity])
    }
}

/// `count` observables bounded by 1, each a smooth or step function of a
/// random linear form in at most `max_arity` leading coordinates. The suite
/// is a pure function of `seed`.
pub fn random_bounded_suite(count: usize, max_arity: usize, seed: u64) -> Result<Vec<Observable>> {
    if max_arity == 0 {
        return Err(Error::InvalidArgument("max arity must be positive".into()));
    }
    let mut rng = RngState::new(seed, u64::MAX).rng();
    (0..count)
        .map(|i| {
            let arity = rng.random_range(1..=max_arity);
            let w: Vec<f64> = (0..arity).map(|_| rng.random_range(-1.5..1.5)).collect();
            let c: f64 = rng.random_range(-1.0..1.0);
            let kind = rng.random_range(0..4u8);
            let lin = move |x: &[f64]| c + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            let (label, f): (&str, Box<dyn Fn(f64) -> f64 + Send + Sync>) = match kind {
                0 => ("tanh", Box::new(f64::tanh)),
                1 => ("cos", Box::new(f64::cos)),
                2 => ("sign", Box::new(|t: f64| if t > 0.0 { 1.0 } else { -1.0 })),
                _ => ("bump", Box::new(|t: f64| (-t * t).exp())),
            };
            Observable::new(format!("{label}#{i}/{arity}"), arity, 1.0, move |x| f(lin(x)))
        })
        .collect()
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }

    fn estimate(&self) -> Estimate {
        let var = if self.count > 1.0 { self.m2 / (self.count - 1.0) } else { 0.0 };
        Estimate { mean: self.mean, stderr: (var / self.count).sqrt(), samples: self.count as usize }
    }
}

/// Samples per parallel chunk; fixed so results do not depend on thread count.
pub const CHUNK_SIZE: usize = 4096;

/// Monte Carlo estimates of several observables from the same draws.
/// Chunk `c` uses `rng.split(c)`, and chunk statistics are merged in order.
pub fn estimate_observables(
    spec: &SamplerSpec,
    observables: &[Observable],
    n_samples: usize,
    rng: RngState,
) -> Result<Vec<Estimate>> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    let n = spec.n();
    if let Some(o) = observables.iter().find(|o| o.arity() > n) {
        return Err(Error::ArityTooLarge { arity: o.arity(), limit: n });
    }
    let sampler = spec.build()?;
    let chunks = n_samples.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.split(c as u64).rng();
            let count = CHUNK_SIZE.min(n_samples - c * CHUNK_SIZE);
            let mut phi = vec![0.0; n];
            let mut acc = vec![Moments::default(); observables.len()];
            for _ in 0..count {
                sampler.sample_into(&mut r, &mut phi);
                for (a, o) in acc.iter_mut().zip(observables) {
                    a.push(o.eval(&phi));
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); observables.len()];
    for chunk in per_chunk {
        for (t, c) in total.iter_mut().zip(chunk) {
            *t = t.merge(c);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Monte Carlo estimate of `E[obs]` under the given sampler.
pub fn estimate_observable(spec: &SamplerSpec, obs: &Observable, n_samples: usize, rng: RngState) -> Result<Estimate> {
    Ok(estimate_observables(spec, std::slice::from_ref(obs), n_samples, rng)?[0])
}
