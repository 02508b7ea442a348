//! Sampling estimates of powers, estimation costs and entropies.
//!
//! Sample index `i` is drawn by stream `i mod streams`; each stream owns a
//! ChaCha8 generator seeded with `seed` and positioned on its own stream
//! number. Streams run in parallel and their running moments are merged in
//! stream order, so estimates are bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mathcore::{ComponentKind, Density, Side};
use crate::strategies::{cell_masses, estimator_with_masses, quantize, QuantizerSpec, SystemParams};
use crate::zec::{zecf_y_density, ZecFScheme, ZecKScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub streams: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0, streams: 16 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(domain("at least two samples are needed for a standard error"));
        }
        if self.streams < 1 {
            return Err(domain("streams must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }

    /// `(mean − value) / std_error`; zero when both the spread and the
    /// discrepancy vanish.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = self.mean - value;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate { mean: self.mean, std_error: (var / self.n as f64).sqrt(), samples: self.n }
    }
}

/// Runs `draw` once per sample and estimates the mean of each of its `K`
/// outputs.
fn run_streams<const K: usize, F>(cfg: &McConfig, draw: F) -> Result<[McEstimate; K]>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    cfg.validate()?;
    let per_stream: Vec<[Moments; K]> = (0..cfg.streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            let count = cfg.samples / cfg.streams + usize::from(s < cfg.samples % cfg.streams);
            let mut acc = [Moments::default(); K];
            for _ in 0..count {
                let values = draw(&mut rng);
                for (m, v) in acc.iter_mut().zip(values) {
                    m.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Moments::default(); K];
    for stream in per_stream {
        for (t, m) in total.iter_mut().zip(stream) {
            *t = t.merge(m);
        }
    }
    Ok(total.map(|m| m.estimate()))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// First-stage control law `x₀ ↦ u₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    /// `u₁ = gain·x₀`.
    Linear { gain: f64 },
    /// `u₁ = a·sign(x₀) − x₀`.
    TwoPoint { a: f64 },
    /// `u₁ = Q_k(x₀) − x₀`.
    KPoint(QuantizerSpec),
}

/// Second-stage estimator `y ↦ u₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Decoder {
    Zero,
    /// `u₂ = coef·y`.
    Linear {
        coef: f64,
    },
    /// `u₂ = a·tanh(a·y/N)`.
    TwoPoint {
        a: f64,
    },
    /// Posterior mean of the k-point output.
    KPoint(QuantizerSpec),
}

/// Gain and linear-MMSE decoder coefficient of the best linear policy at
/// power `p ≤ Q`.
pub fn linear_policy(p: f64, sys: &SystemParams) -> (Strategy, Decoder) {
    let scale = 1.0 - (p / sys.q).sqrt();
    let var_x1 = scale * scale * sys.q;
    (Strategy::Linear { gain: scale - 1.0 }, Decoder::Linear { coef: var_x1 / (var_x1 + sys.n) })
}

/// Estimates `E[U₁²]` and `E[(X₁ − U₂)²]` for a strategy/decoder pair.
pub fn mc_strategy_costs(
    strategy: &Strategy,
    decoder: &Decoder,
    sys: &SystemParams,
    cfg: &McConfig,
) -> Result<(McEstimate, McEstimate)> {
    sys.validate()?;
    let (sq, sn, n) = (sys.q.sqrt(), sys.n.sqrt(), sys.n);
    let kpoint_masses = match decoder {
        Decoder::KPoint(spec) => cell_masses(spec, sys.q),
        _ => Vec::new(),
    };
    let [p, s] = run_streams(cfg, |rng| {
        let x0 = sq * normal(rng);
        let z1 = sn * normal(rng);
        let u1 = match strategy {
            Strategy::Linear { gain } => gain * x0,
            Strategy::TwoPoint { a } => a * sign(x0) - x0,
            Strategy::KPoint(spec) => quantize(x0, spec) - x0,
        };
        let x1 = x0 + u1;
        let y1 = x1 + z1;
        let u2 = match decoder {
            Decoder::Zero => 0.0,
            Decoder::Linear { coef } => coef * y1,
            Decoder::TwoPoint { a } => a * (a * y1 / n).tanh(),
            Decoder::KPoint(spec) => estimator_with_masses(y1, spec.levels(), &kpoint_masses, n),
        };
        [u1 * u1, (x1 - u2).powi(2)]
    })?;
    Ok((p, s))
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A coordination scheme whose power is to be sampled.
#[derive(Debug, Clone, Copy)]
pub enum ZecScheme<'a> {
    K(&'a ZecKScheme),
    F(&'a ZecFScheme),
}

/// Estimates `E[U₁²]` by drawing `W₁ ~ N(0, V₁)` and `X₀ ~ N(0, Q)`.
pub fn mc_power_zec(scheme: ZecScheme<'_>, q: f64, cfg: &McConfig) -> Result<McEstimate> {
    if !(q > 0.0) {
        return Err(domain("Q must be positive"));
    }
    let sq = q.sqrt();
    let [p] = match scheme {
        ZecScheme::K(s) => {
            let sv = s.v1.sqrt();
            run_streams(cfg, |rng| {
                let w1 = sv * normal(rng);
                let x0 = sq * normal(rng);
                let u1 = w1 + quantize(x0, &s.quantizer) - x0;
                [u1 * u1]
            })?
        }
        ZecScheme::F(s) => {
            let sv = s.v1.sqrt();
            run_streams(cfg, |rng| {
                let w1 = sv * normal(rng);
                let x0 = sq * normal(rng);
                let u1 = w1 + s.a * sign(x0) + s.b * x0;
                [u1 * u1]
            })?
        }
    };
    Ok(p)
}

/// Draws one sample from a density component.
pub fn sample_component(kind: &ComponentKind, rng: &mut ChaCha8Rng) -> f64 {
    match *kind {
        ComponentKind::Gaussian { mean, variance } => mean + variance.sqrt() * normal(rng),
        ComponentKind::SkewNormal { location, scale, shape } => {
            let d = shape / (1.0 + shape * shape).sqrt();
            let (z0, z1) = (normal(rng), normal(rng));
            location + scale * (d * z0.abs() + (1.0 - d * d).sqrt() * z1)
        }
        ComponentKind::HalfGaussian { center, variance, side } => {
            let sd = variance.sqrt();
            loop {
                let x = center + sd * normal(rng);
                let inside = match side {
                    Side::Upper => x >= center,
                    Side::Lower => x <= center,
                };
                if inside {
                    return x;
                }
            }
        }
    }
}

/// Draws one sample from a mixture density.
pub fn sample_density(d: &Density, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let comps = d.components();
    let mut acc = 0.0;
    for c in comps {
        acc += c.weight;
        if u < acc {
            return sample_component(&c.kind, rng);
        }
    }
    // Rounding left `u` above the accumulated weight.
    let last = comps.iter().rev().find(|c| c.weight > 0.0).unwrap_or(&comps[comps.len() - 1]);
    sample_component(&last.kind, rng)
}

/// Resubstitution estimate of the differential entropy in bits: the sample
/// mean of `−log₂ f(Y)` with `Y ~ f`.
pub fn mc_entropy(d: &Density, cfg: &McConfig) -> Result<McEstimate> {
    let [h] = run_streams(cfg, |rng| {
        let y = sample_density(d, rng);
        [-d.pdf(y).log2()]
    })?;
    Ok(h)
}

/// Entropy of `Y₁` under a ZEC-f scheme, sampling `Y₁` by pushing `X₀`,
/// `W₁` and `Z₁` through the scheme and scoring it with the closed-form
/// density. Agreement with the quadrature entropy validates that density.
pub fn mc_zecf_y_entropy(s: &ZecFScheme, sys: &SystemParams, cfg: &McConfig) -> Result<McEstimate> {
    let density = zecf_y_density(s, sys)?;
    let (sq, sv, sn) = (sys.q.sqrt(), s.v1.sqrt(), sys.n.sqrt());
    let delta = s.delta();
    let [h] = run_streams(cfg, |rng| {
        let x0 = sq * normal(rng);
        let w1 = sv * normal(rng);
        let z1 = sn * normal(rng);
        let y1 = w1 + s.a * sign(x0) + delta * x0 + z1;
        [-density.pdf(y1).log2()]
    })?;
    Ok(h)
}

/// Sample correlation of the ends of a Gaussian Markov chain `X → Y → Z`
/// built by composition with `corr(X,Y) = r_xy` and `corr(Y,Z) = r_yz`.
/// Returns the estimate of `E[XZ]` (unit variances).
pub fn mc_markov_end_correlation(r_xy: f64, r_yz: f64, cfg: &McConfig) -> Result<McEstimate> {
    if !(r_xy.abs() <= 1.0 && r_yz.abs() <= 1.0) {
        return Err(domain("correlations must lie in [-1, 1]"));
    }
    let (c1, c2) = ((1.0 - r_xy * r_xy).sqrt(), (1.0 - r_yz * r_yz).sqrt());
    let [r] = run_streams(cfg, |rng| {
        let x = normal(rng);
        let y = r_xy * x + c1 * normal(rng);
        let z = r_yz * y + c2 * normal(rng);
        [x * z]
    })?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{linear_cost, twopoint_costs, twopoint_power};
    use crate::zec::{zecf_power, zeck_power};
    use crate::QuadConfig;

    fn cfg(samples: usize) -> McConfig {
        McConfig { samples, seed: 7, streams: 8 }
    }

    fn sys() -> SystemParams {
        SystemParams::new(1.0, 0.15).unwrap()
    }

    #[test]
    fn full_cancellation() {
        let (p, s) =
            mc_strategy_costs(&Strategy::Linear { gain: -1.0 }, &Decoder::Zero, &sys(), &cfg(200_000)).unwrap();
        assert!(p.agrees_with(1.0, 3.0));
        assert_eq!((s.mean, s.std_error), (0.0, 0.0));
    }

    #[test]
    fn linear_policy_cost() {
        let (st, dec) = linear_policy(0.3, &sys());
        let (p, s) = mc_strategy_costs(&st, &dec, &sys(), &cfg(200_000)).unwrap();
        assert!(p.agrees_with(0.3, 3.0), "{p:?}");
        assert!(s.agrees_with(linear_cost(0.3, &sys()).unwrap(), 3.0), "{s:?}");
    }

    #[test]
    fn two_point_cost() {
        let a = 0.8;
        let exact = twopoint_costs(a, &sys(), &QuadConfig::default()).unwrap();
        let (p, s) =
            mc_strategy_costs(&Strategy::TwoPoint { a }, &Decoder::TwoPoint { a }, &sys(), &cfg(200_000)).unwrap();
        assert!(p.agrees_with(exact.p, 3.0) && s.agrees_with(exact.s, 3.0), "{p:?} {s:?} {exact:?}");
    }

    #[test]
    fn zec_powers() {
        let k = ZecKScheme::new(0.1, QuantizerSpec::two_point(0.9).unwrap()).unwrap();
        let est = mc_power_zec(ZecScheme::K(&k), 1.0, &cfg(200_000)).unwrap();
        assert!(est.agrees_with(0.1 + twopoint_power(0.9, 1.0), 3.0));
        assert!((zeck_power(&k, &sys()) - (0.1 + twopoint_power(0.9, 1.0))).abs() < 1e-15);

        let zero = ZecFScheme::zero();
        let est = mc_power_zec(ZecScheme::F(&zero), 1.0, &cfg(10_000)).unwrap();
        assert_eq!((est.mean, est.std_error), (0.0, 0.0));

        let f = ZecFScheme::new(0.1, 0.5, -0.5).unwrap();
        let est = mc_power_zec(ZecScheme::F(&f), 1.0, &cfg(200_000)).unwrap();
        assert!(est.agrees_with(zecf_power(&f, &sys()), 3.0));
    }

    #[test]
    fn entropy_of_known_densities() {
        let g = Density::gaussian(0.0, 1.0).unwrap();
        assert!(mc_entropy(&g, &cfg(200_000)).unwrap().agrees_with(2.047_095_585_180_641, 3.0));
        let mix = Density::gaussian_mixture(&[0.5, 0.5], &[-10.0, 10.0], 1.0).unwrap();
        assert!(mc_entropy(&mix, &cfg(200_000)).unwrap().agrees_with(3.047_095_585_180_641, 3.0));
    }

    #[test]
    fn markov_chain_correlation() {
        let est = mc_markov_end_correlation(0.6, -0.7, &cfg(200_000)).unwrap();
        assert!(est.agrees_with(crate::gaussian::markov_rho_identity(0.6, -0.7), 3.0));
    }

    #[test]
    fn independent_of_worker_count() {
        let c = McConfig { samples: 50_001, seed: 3, streams: 7 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                mc_strategy_costs(&Strategy::TwoPoint { a: 0.8 }, &Decoder::TwoPoint { a: 0.8 }, &sys(), &c).unwrap()
            })
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.0.mean.to_bits(), b.0.mean.to_bits());
        assert_eq!(a.1.mean.to_bits(), b.1.mean.to_bits());
        assert_eq!(a.1.std_error.to_bits(), b.1.std_error.to_bits());
        assert_eq!(a.0.samples, 50_001);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_config() {
        let g = Density::gaussian(0.0, 1.0).unwrap();
        assert!(mc_entropy(&g, &McConfig { samples: 1, seed: 0, streams: 1 }).is_err());
        assert!(mc_entropy(&g, &McConfig { samples: 10, seed: 0, streams: 0 }).is_err());
    }
}
