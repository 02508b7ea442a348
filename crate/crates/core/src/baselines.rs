//! Noncausal linear control combined with dirty-paper coding, used as a
//! benchmark against the coordination schemes.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::strategies::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcConfig {
    /// Points of the uniform ρ grid over `[−1, 1]`, endpoints included.
    pub rho_grid_points: usize,
    /// Width at which the golden-section polish stops.
    pub polish_tolerance: f64,
}

impl Default for DpcConfig {
    fn default() -> Self {
        Self { rho_grid_points: 1001, polish_tolerance: 1e-12 }
    }
}

impl DpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho_grid_points < 101 {
            return Err(domain("rho_grid_points must be at least 101"));
        }
        if !(self.polish_tolerance > 0.0) {
            return Err(domain("polish_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Estimation cost of the linear + DPC scheme for a fixed correlation `ρ`
/// between the control and the source.
pub fn lindpc_objective(rho: f64, p: f64, sys: &SystemParams) -> f64 {
    let (q, n) = (sys.q, sys.n);
    let total = p + q + 2.0 * rho * (p * q).sqrt() + n;
    let spread = p * (1.0 - rho * rho);
    let residual = spread * total.sqrt() - n * (q.sqrt() + rho * p.sqrt());
    n * residual * residual / ((spread + n).powi(2) * total)
}

/// `min_ρ` of [`lindpc_objective`], by grid search plus golden-section
/// refinement around the best grid cell.
pub fn lindpc_cost(p: f64, sys: &SystemParams, cfg: &DpcConfig) -> Result<f64> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(domain(format!("power must be nonnegative, got {p}")));
    }
    cfg.validate()?;
    let g = cfg.rho_grid_points;
    let rho_at = |i: usize| -1.0 + 2.0 * i as f64 / (g - 1) as f64;
    let f = |rho: f64| lindpc_objective(rho, p, sys);
    let (best_i, best_v) =
        (0..g).map(|i| (i, f(rho_at(i)))).fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let lo = rho_at(best_i.saturating_sub(1));
    let hi = rho_at((best_i + 1).min(g - 1));
    let polished = golden_section(f, lo, hi, cfg.polish_tolerance);
    Ok(polished.min(best_v))
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Smallest power at which linear + DPC reaches zero estimation cost: the
/// positive root of `P²(P + Q + N) = QN²`, by bisection.
pub fn lindpc_zero_cost_power(sys: &SystemParams) -> f64 {
    let (q, n) = (sys.q, sys.n);
    let cubic = |p: f64| p * p * (p + q + n) - q * n * n;
    let (mut lo, mut hi) = (0.0, (q * n * n).sqrt() + q);
    while hi - lo > 1e-12 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cubic(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Whichever end has the smaller residual.
    if cubic(lo).abs() < cubic(hi).abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: f64) -> SystemParams {
        SystemParams::new(1.0, n).unwrap()
    }

    #[test]
    fn zero_power_is_no_control_mmse() {
        let c = lindpc_cost(0.0, &sys(0.15), &DpcConfig::default()).unwrap();
        assert!((c - 0.15 / 1.15).abs() < 1e-9);
    }

    #[test]
    fn root_values() {
        let r = lindpc_zero_cost_power(&sys(0.15));
        assert!((r - 0.13248).abs() < 1e-4, "{r}");
        assert!((r * r * (r + 1.15) - 0.0225).abs() <= 1e-12 * 0.0225);
        let r = lindpc_zero_cost_power(&sys(0.3));
        assert!((r * r * (r + 1.3) - 0.09).abs() <= 1e-12 * 0.09);
        assert!(lindpc_zero_cost_power(&sys(1e-8)) < 1e-7);
    }

    #[test]
    fn zero_at_root() {
        let s = sys(0.15);
        let r = lindpc_zero_cost_power(&s);
        assert!(lindpc_cost(r, &s, &DpcConfig::default()).unwrap() <= 1e-6);
    }

    #[test]
    fn zero_beyond_root() {
        let s = sys(0.15);
        let r = lindpc_zero_cost_power(&s);
        for i in 0..50 {
            let p = r + 0.05 * i as f64;
            assert!(lindpc_cost(p, &s, &DpcConfig::default()).unwrap() <= 1e-9, "{p}");
        }
    }

    #[test]
    fn continuous_and_decreasing_near_zero() {
        let s = sys(0.15);
        let cfg = DpcConfig::default();
        let mut prev = lindpc_cost(0.0, &s, &cfg).unwrap();
        for i in 1..=40 {
            let c = lindpc_cost(i as f64 * 1e-3, &s, &cfg).unwrap();
            assert!(c <= prev + 1e-12 && prev - c < 0.01);
            prev = c;
        }
    }

    #[test]
    fn matches_dense_scan() {
        let s = sys(0.15);
        let brute = (0..=100_000)
            .map(|i| lindpc_objective(-1.0 + 2.0 * i as f64 / 100_000.0, 0.05, &s))
            .fold(f64::INFINITY, f64::min);
        let c = lindpc_cost(0.05, &s, &DpcConfig::default()).unwrap();
        assert!(c <= brute + 1e-12 && brute - c < 1e-8, "{c} vs {brute}");
    }

    #[test]
    fn validation() {
        assert!(lindpc_cost(-1.0, &sys(0.15), &DpcConfig::default()).is_err());
        let bad = DpcConfig { rho_grid_points: 50, ..DpcConfig::default() };
        assert!(lindpc_cost(0.1, &sys(0.15), &bad).is_err());
    }
}
