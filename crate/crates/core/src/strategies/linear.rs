use super::SystemParams;
use crate::error::{domain, Result};

/// Estimation cost of the best linear policy at power `p`.
///
/// The controller scales the source down to `(√Q − √P)·X₀/√Q` and the
/// decoder applies the linear MMSE estimate; above `P = Q` the state can be
/// cancelled outright.
pub fn linear_cost(p: f64, sys: &SystemParams) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(domain(format!("power must be nonnegative, got {p}")));
    }
    if p >= sys.q {
        return Ok(0.0);
    }
    let d2 = (sys.q.sqrt() - p.sqrt()).powi(2);
    Ok(d2 * sys.n / (d2 + sys.n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys() -> SystemParams {
        SystemParams::new(1.0, 0.15).unwrap()
    }

    #[test]
    fn values() {
        assert_eq!(linear_cost(1.0, &sys()).unwrap(), 0.0);
        assert!((linear_cost(0.0, &sys()).unwrap() - 0.130435).abs() < 5e-7);
        assert_eq!(linear_cost(2.0, &sys()).unwrap(), 0.0);
        assert!(linear_cost(-0.1, &sys()).is_err());
    }

    #[test]
    fn continuous_at_q() {
        let below = linear_cost(1.0 - 1e-12, &sys()).unwrap();
        assert!(below < 1e-12);
    }

    #[test]
    fn decreasing_on_segment() {
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let s = linear_cost(i as f64 / 100.0, &sys()).unwrap();
            assert!(s <= prev);
            prev = s;
        }
    }
}
