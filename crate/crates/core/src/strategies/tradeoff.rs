use serde::{Deserialize, Serialize};

use super::{kpoint_costs, kpoint_power, CostPoint, QuantizerSpec, SystemParams};
use crate::error::{domain, Error, Result};
use crate::mathcore::QuadConfig;
use crate::optimize::{minimize_constrained, Bound, OptimizerConfig};

/// Weight `ω ∈ [0, 1]` on power in the scalarized objective `ω·P + (1−ω)·S`.
/// It relates to the Lagrangian multiplier by `ω = λ²/(λ²+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffWeight(f64);

impl TradeoffWeight {
    pub fn new(omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(domain(format!("trade-off weight must lie in [0, 1], got {omega}")));
        }
        Ok(Self(omega))
    }

    pub fn from_lambda_sq(lambda_sq: f64) -> Result<Self> {
        if !(lambda_sq >= 0.0) {
            return Err(domain("λ² must be nonnegative"));
        }
        if lambda_sq.is_infinite() {
            return Ok(Self(1.0));
        }
        Self::new(lambda_sq / (lambda_sq + 1.0))
    }

    pub fn omega(&self) -> f64 {
        self.0
    }
}

/// Search box (in increment coordinates) for a k-point quantizer.
pub(crate) fn quantizer_box(k: usize, q: f64) -> Vec<Bound> {
    let (nl, nb) = QuantizerSpec::increment_dims(k);
    vec![(0.0, 6.0 * q.sqrt()); nl + nb]
}

pub(crate) fn spec_from_coords(k: usize, x: &[f64]) -> Result<QuantizerSpec> {
    let (nl, _) = QuantizerSpec::increment_dims(k);
    QuantizerSpec::from_increments(k, &x[..nl], &x[nl..])
}

/// Minimizes `ω·P_k + (1−ω)·S_k` over k-point quantizers.
pub fn tradeoff_optimize(
    k: usize,
    w: TradeoffWeight,
    sys: &SystemParams,
    opt: &OptimizerConfig,
    quad: &QuadConfig,
) -> Result<(QuantizerSpec, CostPoint)> {
    if k < 2 {
        return Err(domain("k must be at least 2"));
    }
    sys.validate()?;
    let omega = w.omega();
    let objective = |x: &[f64]| {
        let Ok(spec) = spec_from_coords(k, x) else {
            return f64::INFINITY;
        };
        if omega == 1.0 {
            return kpoint_power(&spec, sys.q);
        }
        match kpoint_costs(&spec, sys, quad) {
            Ok(c) => omega * c.p + (1.0 - omega) * c.s,
            Err(_) => f64::INFINITY,
        }
    };
    let r = minimize_constrained(objective, |_| 1.0, &quantizer_box(k, sys.q), opt)?;
    if !r.value.is_finite() {
        return Err(Error::NoFeasiblePoint { best_gap: r.constraint_value });
    }
    let spec = spec_from_coords(k, &r.minimizer)?;
    let cost = kpoint_costs(&spec, sys, quad)?;
    Ok((spec, cost))
}

/// Smallest power any k-point strategy can use, `min P_k`.
pub fn min_kpoint_power(k: usize, q: f64, opt: &OptimizerConfig) -> Result<(f64, QuantizerSpec)> {
    if k < 2 {
        return Err(domain("k must be at least 2"));
    }
    if !(q > 0.0) {
        return Err(domain("Q must be positive"));
    }
    let objective = |x: &[f64]| match spec_from_coords(k, x) {
        Ok(spec) => kpoint_power(&spec, q),
        Err(_) => f64::INFINITY,
    };
    let r = minimize_constrained(objective, |_| 1.0, &quantizer_box(k, q), opt)?;
    let spec = spec_from_coords(k, &r.minimizer)?;
    Ok((r.value, spec))
}
