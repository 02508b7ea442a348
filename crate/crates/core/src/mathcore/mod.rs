//! Numerical substrate: Gaussian special functions, adaptive quadrature,
//! one-dimensional mixture densities and their differential entropies.
//!
//! All entropies are in bits.

mod density;
mod quad;
mod roots;
mod special;

pub use density::{diff_entropy_bits, total_mass, Component, ComponentKind, Density, Side};
pub use quad::{integrate, integrate_panels, QuadConfig};
pub use roots::bracketed_root;
pub use special::{gauss_cdf, gauss_pdf, skew_normal_pdf, std_normal_cdf, std_normal_pdf, SQRT_2_OVER_PI};

/// `½·log₂(2πe·variance)`, the entropy in bits of a Gaussian.
pub fn gaussian_entropy_bits(variance: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * variance).log2()
}
