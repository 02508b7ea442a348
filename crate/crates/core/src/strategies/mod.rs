//! Single-shot strategies and their exact costs.
//!
//! The first controller sees `X₀ ~ N(0, Q)` and applies `U₁`, producing
//! `X₁ = X₀ + U₁`. The second controller sees `Y₁ = X₁ + Z₁` with
//! `Z₁ ~ N(0, N)` and outputs `U₂`. The power is `P = E[U₁²]` and the
//! estimation cost is `S = E[(X₁ − U₂)²]`.

mod kpoint;
mod linear;
mod quantizer;
mod tradeoff;
mod twopoint;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub(crate) use kpoint::estimator_with_masses;
pub use kpoint::{cell_masses, kpoint_costs, kpoint_estimator, kpoint_power, quantizer_entropy_bits};
pub use linear::linear_cost;
pub use quantizer::{quantize, QuantizerSpec};
pub use tradeoff::{min_kpoint_power, tradeoff_optimize, TradeoffWeight};
pub use twopoint::{twopoint_costs, twopoint_estimator, twopoint_power};

/// Source and channel-noise variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "N")]
    pub n: f64,
}

impl SystemParams {
    pub fn new(q: f64, n: f64) -> Result<Self> {
        let s = Self { q, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(domain(format!("source variance Q must be positive and finite, got {}", self.q)));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(domain(format!("noise variance N must be positive and finite, got {}", self.n)));
        }
        Ok(())
    }
}

/// Which scheme produced a [`CostPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    Linear,
    TwoPoint,
    KPoint { k: usize },
    JointGaussian,
    ZecK { k: usize },
    ZecF,
    LinDpc,
}

/// A (power, estimation cost) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub scheme: SchemeTag,
}
