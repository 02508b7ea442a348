//! Zero-estimation-cost coordination schemes.
//!
//! In ZEC-k the first controller applies `U₁ = W₁ + Q_k(X₀) − X₀`, so the
//! interim state `X₁ = W₁ + Q_k(X₀)` is a function of the codeword `W₁ ~
//! N(0, V₁)` and the quantizer index, both of which the decoder recovers.
//! ZEC-f uses channel feedback and applies `U₁ = W₁ + a·sign(X₀) + b·X₀`.
//!
//! Every scheme here has estimation cost zero by construction; what varies
//! is the power and whether the information gap is nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mathcore::{
    bracketed_root, diff_entropy_bits, gaussian_entropy_bits, Component, ComponentKind, Density, QuadConfig, Side,
    SQRT_2_OVER_PI,
};
use crate::optimize::{minimize_constrained, Bound, OptimizerConfig};
use crate::strategies::{cell_masses, kpoint_power, quantizer_entropy_bits, QuantizerSpec, SystemParams};

/// Largest codebook variance searched, in units of `Q`.
const V1_MAX_FACTOR: f64 = 2.0;
/// Tolerance of the codebook-variance root solve.
const V1_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZecKScheme {
    pub v1: f64,
    pub quantizer: QuantizerSpec,
}

impl ZecKScheme {
    pub fn new(v1: f64, quantizer: QuantizerSpec) -> Result<Self> {
        if !(v1 >= 0.0 && v1.is_finite()) {
            return Err(domain(format!("V1 must be nonnegative, got {v1}")));
        }
        Ok(Self { v1, quantizer })
    }

    /// The decoder reconstructs `X₁` exactly; the estimation cost is 0.
    pub fn estimation_cost(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZecFScheme {
    pub v1: f64,
    pub a: f64,
    pub b: f64,
}

impl ZecFScheme {
    pub fn new(v1: f64, a: f64, b: f64) -> Result<Self> {
        if !(v1 >= 0.0 && v1.is_finite()) {
            return Err(domain(format!("V1 must be nonnegative, got {v1}")));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(domain("a and b must be finite"));
        }
        Ok(Self { v1, a, b })
    }

    /// The idle scheme `U₁ = 0`.
    pub fn zero() -> Self {
        Self { v1: 0.0, a: 0.0, b: 0.0 }
    }

    /// `δ = b + 1`, the gain of `X₀` in the interim state.
    pub fn delta(&self) -> f64 {
        self.b + 1.0
    }

    /// Scale `σ` of the skew-normal components of `Y₁`.
    pub fn sigma(&self, sys: &SystemParams) -> f64 {
        (self.v1 + self.delta().powi(2) * sys.q + sys.n).sqrt()
    }

    /// Shape `α` of the skew-normal components of `Y₁`.
    pub fn alpha(&self, sys: &SystemParams) -> f64 {
        sys.q.sqrt() * self.delta() / (self.v1 + sys.n).sqrt()
    }

    /// The decoder reconstructs `X₁` exactly; the estimation cost is 0.
    pub fn estimation_cost(&self) -> f64 {
        0.0
    }
}

/// Outcome of checking a scheme's information constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Information gap in bits.
    pub gap: f64,
    /// `gap ≥ −slack`.
    pub feasible: bool,
    pub achieved_p: f64,
}

/// Result of a minimum-power search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZecOptimum<S> {
    pub power: f64,
    pub scheme: S,
    /// Information gap of the returned scheme, in bits.
    pub gap: f64,
    pub evaluations: usize,
}

pub fn zeck_power(s: &ZecKScheme, sys: &SystemParams) -> f64 {
    s.v1 + kpoint_power(&s.quantizer, sys.q)
}

/// Density of `Y₁ = W₁ + Q_k(X₀) + Z₁`: a Gaussian mixture with components
/// at `±aᵢ`, weights `pᵢ`, common variance `V₁ + N`.
pub fn zeck_y_density(s: &ZecKScheme, sys: &SystemParams) -> Result<Density> {
    let p = cell_masses(&s.quantizer, sys.q);
    let variance = s.v1 + sys.n;
    let levels = s.quantizer.levels();
    let mut weights = Vec::with_capacity(2 * levels.len());
    let mut means = Vec::with_capacity(2 * levels.len());
    for (&a, &pi) in levels.iter().zip(&p) {
        weights.extend([pi, pi]);
        means.extend([a, -a]);
    }
    Density::gaussian_mixture(&weights, &means, variance)
}

/// `h(Y₁) − ½log₂(2πeN) − H(Q_k(X₀))`.
pub fn zeck_info_gap(s: &ZecKScheme, sys: &SystemParams, cfg: &QuadConfig) -> Result<f64> {
    let h_y = diff_entropy_bits(&zeck_y_density(s, sys)?, cfg)?;
    Ok(h_y - gaussian_entropy_bits(sys.n) - quantizer_entropy_bits(&s.quantizer, sys.q))
}

pub fn zeck_feasibility(s: &ZecKScheme, sys: &SystemParams, cfg: &QuadConfig, slack: f64) -> Result<FeasibilityReport> {
    let gap = zeck_info_gap(s, sys, cfg)?;
    Ok(FeasibilityReport { gap, feasible: gap >= -slack, achieved_p: zeck_power(s, sys) })
}

pub fn zecf_power(s: &ZecFScheme, sys: &SystemParams) -> f64 {
    s.v1 + s.a * s.a + s.b * s.b * sys.q + 2.0 * s.a * s.b * SQRT_2_OVER_PI * sys.q.sqrt()
}

/// Density of `Y₁ = W₁ + a·sign(X₀) + δX₀ + Z₁`, an equal mixture of the
/// skew-normals `SN(a, σ, α)` and `SN(−a, σ, −α)`.
pub fn zecf_y_density(s: &ZecFScheme, sys: &SystemParams) -> Result<Density> {
    let (sigma, alpha) = (s.sigma(sys), s.alpha(sys));
    Density::new(vec![
        Component { weight: 0.5, kind: ComponentKind::SkewNormal { location: s.a, scale: sigma, shape: alpha } },
        Component { weight: 0.5, kind: ComponentKind::SkewNormal { location: -s.a, scale: sigma, shape: -alpha } },
    ])
}

/// Density of `X = a·sign(X₀) + δX₀`: two half-Gaussians of variance `δ²Q`
/// starting at `±a`, pointing away from the origin when `δ > 0` and towards
/// it when `δ < 0`. Requires `δ ≠ 0`.
pub fn zecf_x_density(s: &ZecFScheme, sys: &SystemParams) -> Result<Density> {
    let delta = s.delta();
    if delta == 0.0 {
        return Err(domain("X has no density when b = -1"));
    }
    let variance = delta * delta * sys.q;
    let (right, left) = if delta > 0.0 { (Side::Upper, Side::Lower) } else { (Side::Lower, Side::Upper) };
    Density::new(vec![
        Component { weight: 0.5, kind: ComponentKind::HalfGaussian { center: s.a, variance, side: right } },
        Component { weight: 0.5, kind: ComponentKind::HalfGaussian { center: -s.a, variance, side: left } },
    ])
}

/// `h(Y₁) − h(X) − ½log₂(2πeN)`. At `b = −1` the state part is the discrete
/// `a·sign(X₀)` and the two-point expression `h(Y₁) − ½log₂(2πeN) − 1`
/// is used instead.
pub fn zecf_info_gap(s: &ZecFScheme, sys: &SystemParams, cfg: &QuadConfig) -> Result<f64> {
    if s.delta() == 0.0 {
        let two_point = ZecKScheme::new(s.v1, QuantizerSpec::two_point(s.a.abs())?)?;
        return zeck_info_gap(&two_point, sys, cfg);
    }
    let h_y = diff_entropy_bits(&zecf_y_density(s, sys)?, cfg)?;
    let h_x = diff_entropy_bits(&zecf_x_density(s, sys)?, cfg)?;
    Ok(h_y - h_x - gaussian_entropy_bits(sys.n))
}

pub fn zecf_feasibility(s: &ZecFScheme, sys: &SystemParams, cfg: &QuadConfig, slack: f64) -> Result<FeasibilityReport> {
    let gap = zecf_info_gap(s, sys, cfg)?;
    Ok(FeasibilityReport { gap, feasible: gap >= -slack, achieved_p: zecf_power(s, sys) })
}

/// Whether the idle scheme already satisfies the feedback information
/// constraint, i.e. `2πe·QN/(Q+N) ≤ 1`.
pub fn zeczep_feasible(sys: &SystemParams) -> bool {
    2.0 * std::f64::consts::PI * std::f64::consts::E * sys.q * sys.n / (sys.q + sys.n) <= 1.0
}

/// Smallest `V₁ ∈ [0, v_max]` with a nonnegative gap, given that the gap is
/// increasing in `V₁`. `None` when even `v_max` is infeasible.
fn min_codebook_variance<F>(gap: F, v_max: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    if gap(0.0) >= 0.0 {
        return Some(0.0);
    }
    if !(gap(v_max) >= 0.0) {
        return None;
    }
    let guarded = |v: f64| {
        let g = gap(v);
        if g.is_nan() {
            -1.0
        } else {
            g
        }
    };
    Some(bracketed_root(guarded, 0.0, v_max, V1_TOL, 200))
}

fn zeck_spec(k: usize, x: &[f64]) -> Result<QuantizerSpec> {
    let (nl, _) = QuantizerSpec::increment_dims(k);
    QuantizerSpec::from_increments(k, &x[..nl], &x[nl..])
}

/// Minimum power of ZEC-k at `sys`, over `V₁ ∈ [0, 2Q]` and quantizers
/// with levels and boundary increments in `[0, 6√Q]`.
pub fn zeck_min_power(
    k: usize,
    sys: &SystemParams,
    opt: &OptimizerConfig,
    quad: &QuadConfig,
) -> Result<ZecOptimum<ZecKScheme>> {
    if k < 2 {
        return Err(domain("k must be at least 2"));
    }
    sys.validate()?;
    let v_max = V1_MAX_FACTOR * sys.q;
    let gap_at = |spec: &QuantizerSpec, v1: f64| {
        zeck_info_gap(&ZecKScheme { v1, quantizer: spec.clone() }, sys, quad).unwrap_or(f64::NAN)
    };
    let objective = |x: &[f64]| {
        let Ok(spec) = zeck_spec(k, x) else { return f64::INFINITY };
        match min_codebook_variance(|v| gap_at(&spec, v), v_max) {
            Some(v1) => v1 + kpoint_power(&spec, sys.q),
            None => f64::INFINITY,
        }
    };
    let constraint = |x: &[f64]| match zeck_spec(k, x) {
        Ok(spec) => {
            let g = gap_at(&spec, v_max);
            if g.is_nan() {
                f64::NEG_INFINITY
            } else {
                g
            }
        }
        Err(_) => f64::NEG_INFINITY,
    };
    let (nl, nb) = QuantizerSpec::increment_dims(k);
    let bounds: Vec<Bound> = vec![(0.0, 6.0 * sys.q.sqrt()); nl + nb];
    let r = minimize_constrained(objective, constraint, &bounds, opt)?;
    if !r.feasible || !r.value.is_finite() {
        return Err(Error::NoFeasiblePoint { best_gap: r.constraint_value });
    }
    let spec = zeck_spec(k, &r.minimizer)?;
    let v1 = min_codebook_variance(|v| gap_at(&spec, v), v_max).expect("minimizer is feasible");
    let scheme = ZecKScheme::new(v1, spec)?;
    let gap = zeck_info_gap(&scheme, sys, quad)?;
    Ok(ZecOptimum { power: zeck_power(&scheme, sys), scheme, gap, evaluations: r.evaluations })
}

/// Minimum power of ZEC-f at `sys`, over `V₁ ∈ [0, 2Q]`, `a ∈ [0, 6√Q]`
/// and `b ∈ [−2, 1]`. Returns the idle scheme at zero power whenever
/// [`zeczep_feasible`] holds.
pub fn zecf_min_power(sys: &SystemParams, opt: &OptimizerConfig, quad: &QuadConfig) -> Result<ZecOptimum<ZecFScheme>> {
    sys.validate()?;
    if zeczep_feasible(sys) {
        let scheme = ZecFScheme::zero();
        let gap = zecf_info_gap(&scheme, sys, quad)?;
        return Ok(ZecOptimum { power: 0.0, scheme, gap, evaluations: 0 });
    }
    zecf_search(sys, opt, quad, None)
}

/// ZEC-f minimum power with `b` held fixed.
pub fn zecf_min_power_with_b(
    b: f64,
    sys: &SystemParams,
    opt: &OptimizerConfig,
    quad: &QuadConfig,
) -> Result<ZecOptimum<ZecFScheme>> {
    sys.validate()?;
    zecf_search(sys, opt, quad, Some(b))
}

fn zecf_search(
    sys: &SystemParams,
    opt: &OptimizerConfig,
    quad: &QuadConfig,
    fixed_b: Option<f64>,
) -> Result<ZecOptimum<ZecFScheme>> {
    let v_max = V1_MAX_FACTOR * sys.q;
    let unpack = |x: &[f64]| (x[0], fixed_b.unwrap_or_else(|| x[1]));
    let gap_at = |a: f64, b: f64, v1: f64| zecf_info_gap(&ZecFScheme { v1, a, b }, sys, quad).unwrap_or(f64::NAN);
    let objective = |x: &[f64]| {
        let (a, b) = unpack(x);
        match min_codebook_variance(|v| gap_at(a, b, v), v_max) {
            Some(v1) => zecf_power(&ZecFScheme { v1, a, b }, sys),
            None => f64::INFINITY,
        }
    };
    let constraint = |x: &[f64]| {
        let (a, b) = unpack(x);
        let g = gap_at(a, b, v_max);
        if g.is_nan() {
            f64::NEG_INFINITY
        } else {
            g
        }
    };
    let mut bounds: Vec<Bound> = vec![(0.0, 6.0 * sys.q.sqrt())];
    if fixed_b.is_none() {
        bounds.push((-2.0, 1.0));
    }
    let r = minimize_constrained(objective, constraint, &bounds, opt)?;
    if !r.feasible || !r.value.is_finite() {
        return Err(Error::NoFeasiblePoint { best_gap: r.constraint_value });
    }
    let (a, b) = unpack(&r.minimizer);
    let v1 = min_codebook_variance(|v| gap_at(a, b, v), v_max).expect("minimizer is feasible");
    let scheme = ZecFScheme::new(v1, a, b)?;
    let gap = zecf_info_gap(&scheme, sys, quad)?;
    Ok(ZecOptimum { power: zecf_power(&scheme, sys), scheme, gap, evaluations: r.evaluations })
}
