use super::twopoint::symmetric_edges;
use super::{CostPoint, QuantizerSpec, SchemeTag, SystemParams};
use crate::error::Result;
use crate::mathcore::{integrate_panels, std_normal_cdf, std_normal_pdf, QuadConfig};

/// Probability that `X₀ ~ N(0, q)` falls in each positive-half cell.
/// The masses sum to ½.
pub fn cell_masses(spec: &QuantizerSpec, q: f64) -> Vec<f64> {
    let sd = q.sqrt();
    let b = spec.boundaries();
    (0..spec.m())
        .map(|i| {
            let upper = b.get(i + 1).map_or(1.0, |u| std_normal_cdf(u / sd));
            upper - std_normal_cdf(b[i] / sd)
        })
        .collect()
}

/// Power of the k-point strategy `U₁ = Q_k(X₀) − X₀`.
pub fn kpoint_power(spec: &QuantizerSpec, q: f64) -> f64 {
    let sd = q.sqrt();
    let b = spec.boundaries();
    let p = cell_masses(spec, q);
    let mut cross = 0.0;
    let mut energy = 0.0;
    for (i, &a) in spec.levels().iter().enumerate() {
        let upper = b.get(i + 1).map_or(0.0, |u| std_normal_pdf(u / sd));
        cross += a * (std_normal_pdf(b[i] / sd) - upper);
        energy += a * a * p[i];
    }
    q - 4.0 * sd * cross + 2.0 * energy
}

/// Posterior-mean estimate of `X₁ = Q_k(X₀)` from `y`.
pub fn kpoint_estimator(y: f64, spec: &QuantizerSpec, sys: &SystemParams) -> f64 {
    let p = cell_masses(spec, sys.q);
    estimator_with_masses(y, spec.levels(), &p, sys.n)
}

pub(crate) fn estimator_with_masses(y: f64, levels: &[f64], p: &[f64], n: f64) -> f64 {
    // Exponents of the Gaussian kernels, shifted by their maximum so that
    // the ratio stays finite far out in the tails.
    let shift = levels.iter().map(|a| -(y.abs() - a).powi(2) / (2.0 * n)).fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &pi) in levels.iter().zip(p) {
        let plus = (-(y - a).powi(2) / (2.0 * n) - shift).exp();
        let minus = (-(y + a).powi(2) / (2.0 * n) - shift).exp();
        num += a * pi * (plus - minus);
        den += pi * (plus + minus);
    }
    num / den
}

/// Power and MMSE estimation cost of the k-point strategy.
///
/// The subtracted integral is evaluated as `∫ f_Y(y)·x̂(y)² dy`, which is
/// algebraically the same quantity but never divides two underflowed
/// numbers.
pub fn kpoint_costs(spec: &QuantizerSpec, sys: &SystemParams, cfg: &QuadConfig) -> Result<CostPoint> {
    let p_cells = cell_masses(spec, sys.q);
    let levels = spec.levels();
    let second_moment: f64 = 2.0 * levels.iter().zip(&p_cells).map(|(a, p)| a * a * p).sum::<f64>();
    let power = kpoint_power(spec, sys.q);
    let scheme = SchemeTag::KPoint { k: spec.k() };
    if second_moment == 0.0 {
        return Ok(CostPoint { p: power, s: 0.0, scheme });
    }

    let n = sys.n;
    let sd = n.sqrt();
    let density = |y: f64| {
        levels
            .iter()
            .zip(&p_cells)
            .map(|(&a, &pi)| pi * (std_normal_pdf((y - a) / sd) + std_normal_pdf((y + a) / sd)) / sd)
            .sum::<f64>()
    };
    let integrand = |y: f64| {
        let f = density(y);
        if f == 0.0 {
            return 0.0;
        }
        let e = estimator_with_masses(y, levels, &p_cells, n);
        f * e * e
    };
    let a_max = levels[levels.len() - 1];
    let half = a_max + cfg.truncation_sigmas * sd;
    let edges = symmetric_edges(levels, half, sd);
    let explained = 2.0 * integrate_panels(integrand, &edges, cfg)?;
    let s = (second_moment - explained).max(0.0);
    Ok(CostPoint { p: power, s, scheme })
}

/// Entropy in bits of the discrete output `Q_k(X₀)`, evaluated on the
/// [canonical](QuantizerSpec::canonical) form of the quantizer.
///
/// Even `k`: `−2 Σ pᵢ log₂ pᵢ`. Odd `k`: the central cell carries mass
/// `2p₁`, giving `−2(p₁ log₂ 2p₁ + Σ_{i≥2} pᵢ log₂ pᵢ)`.
pub fn quantizer_entropy_bits(spec: &QuantizerSpec, q: f64) -> f64 {
    let spec = spec.canonical();
    let p = cell_masses(&spec, q);
    let plogp = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    let tail: f64 = p.iter().skip(1).map(|&x| plogp(x)).sum();
    if spec.is_odd() {
        plogp(2.0 * p[0]) + 2.0 * tail
    } else {
        2.0 * (plogp(p[0]) + tail)
    }
}
