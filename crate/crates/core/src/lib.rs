//! Power/estimation cost trade-offs for the Witsenhausen counterexample.
//!
//! The crate evaluates single-shot strategies (linear, two-point, k-point
//! quantization), the jointly Gaussian coordination region, the
//! zero-estimation-cost coordination schemes ZEC-k and ZEC-f, and the
//! noncausal linear + dirty-paper-coding benchmark. An independent
//! Monte-Carlo layer re-derives every closed form by simulation.
//!
//! ```
//! use witsenhausen::{strategies::linear_cost, SystemParams};
//!
//! let sys = SystemParams::new(1.0, 0.15).unwrap();
//! let s = linear_cost(0.0, &sys).unwrap();
//! assert!((s - 0.15 / 1.15).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod gaussian;
pub mod mathcore;
pub mod montecarlo;
pub mod optimize;
pub mod strategies;
pub mod zec;

pub use error::{Error, Result};
pub use mathcore::QuadConfig;
pub use optimize::{OptResult, OptimizerConfig};
pub use strategies::{CostPoint, QuantizerSpec, SchemeTag, SystemParams, TradeoffWeight};

// The guide's code listings are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/single_shot.md")]
    mod single_shot {}
    #[doc = include_str!("../../../book/src/gaussian.md")]
    mod gaussian {}
    #[doc = include_str!("../../../book/src/zec.md")]
    mod zec {}
    #[doc = include_str!("../../../book/src/feedback.md")]
    mod feedback {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
}
