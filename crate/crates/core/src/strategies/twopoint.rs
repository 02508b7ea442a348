use super::{CostPoint, SchemeTag, SystemParams};
use crate::error::{domain, Result};
use crate::mathcore::{integrate_panels, QuadConfig, SQRT_2_OVER_PI};

/// Power of the two-point strategy `U₁ = a·sign(X₀) − X₀`.
pub fn twopoint_power(a: f64, q: f64) -> f64 {
    q + a * (a - 2.0 * SQRT_2_OVER_PI * q.sqrt())
}

/// MMSE estimate of `X₁ = ±a` from `y`.
pub fn twopoint_estimator(y: f64, a: f64, n: f64) -> f64 {
    a * (a * y / n).tanh()
}

/// Power and estimation cost of the two-point strategy with level `a`.
pub fn twopoint_costs(a: f64, sys: &SystemParams, cfg: &QuadConfig) -> Result<CostPoint> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(domain(format!("two-point level must be nonnegative, got {a}")));
    }
    let p = twopoint_power(a, sys.q);
    if a == 0.0 {
        return Ok(CostPoint { p, s: 0.0, scheme: SchemeTag::TwoPoint });
    }
    let n = sys.n;
    // φ(a/√N)·φ(y/√N)/cosh(ay/N) = 1/π · 1/(e^{(y+a)²/2N} + e^{(y−a)²/2N}),
    // written with the larger exponent factored out.
    let integrand = |y: f64| {
        let u = (y + a).powi(2) / (2.0 * n);
        let v = (y - a).powi(2) / (2.0 * n);
        (-u.max(v)).exp() / (1.0 + (-(u - v).abs()).exp())
    };
    let sd = n.sqrt();
    let half = a + cfg.truncation_sigmas * sd;
    let edges = symmetric_edges(&[a], half, sd);
    // The integrand is even.
    let integral = 2.0 * integrate_panels(integrand, &edges, cfg)?;
    let s = a * a * (2.0 * std::f64::consts::PI / n).sqrt() * integral / std::f64::consts::PI;
    Ok(CostPoint { p, s, scheme: SchemeTag::TwoPoint })
}

/// Panel edges on `[0, half]` no wider than `step`, with breakpoints at the
/// given centers.
pub(super) fn symmetric_edges(centers: &[f64], half: f64, step: f64) -> Vec<f64> {
    let panels = (half / step).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..=panels).map(|i| half * i as f64 / panels as f64).collect();
    edges.extend(centers.iter().copied().filter(|c| *c > 0.0 && *c < half));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * half);
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys() -> SystemParams {
        SystemParams::new(1.0, 0.15).unwrap()
    }

    #[test]
    fn zero_level() {
        let c = twopoint_costs(0.0, &sys(), &QuadConfig::default()).unwrap();
        assert_eq!((c.p, c.s), (1.0, 0.0));
    }

    #[test]
    fn minimum_power() {
        let a = (2.0 / std::f64::consts::PI).sqrt();
        assert!((twopoint_power(a, 1.0) - 0.363380).abs() < 1e-6);
        assert!((twopoint_power(a, 1.0) - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn estimator_limits() {
        assert_eq!(twopoint_estimator(0.0, 0.8, 0.15), 0.0);
        let a = 0.8;
        assert!((twopoint_estimator(50.0 * 0.15 / a, a, 0.15) - a).abs() < 1e-9);
        assert!((twopoint_estimator(0.15 / a, a, 0.15) - 0.761594 * a).abs() < 1e-6);
    }

    #[test]
    fn cost_bounded_by_level_energy() {
        for a in [0.1, 0.5, 1.0, 3.0] {
            let c = twopoint_costs(a, &sys(), &QuadConfig::default()).unwrap();
            assert!(c.s >= 0.0 && c.s <= a * a);
        }
        // Widely separated levels are almost never confused.
        let c = twopoint_costs(5.0, &sys(), &QuadConfig::default()).unwrap();
        assert!(c.s < 1e-9);
    }

    #[test]
    fn rejects_negative_level() {
        assert!(twopoint_costs(-1.0, &sys(), &QuadConfig::default()).is_err());
    }
}
