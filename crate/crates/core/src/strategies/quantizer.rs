use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Symmetric k-point quantizer described by its nonnegative half.
///
/// With `m = ⌈k/2⌉`, the positive half-line is cut at boundaries
/// `0 = B₁ ≤ B₂ ≤ … ≤ B_m` (and `B_{m+1} = +∞`); cell `i` maps to `a_i`.
/// The negative half mirrors this. For odd `k` the central level `a₁` is 0,
/// so the cells `[−B₂, B₂]` form a single output.
///
/// Ties between consecutive levels or boundaries are accepted; they arise as
/// boundary points of the optimization. A 4-point quantizer with `a₁ = 0`
/// is the 3-point quantizer with the same parameters, see
/// [`QuantizerSpec::canonical`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    k: usize,
    levels: Vec<f64>,
    boundaries: Vec<f64>,
}

impl QuantizerSpec {
    pub fn new(k: usize, levels: Vec<f64>, boundaries: Vec<f64>) -> Result<Self> {
        if k < 1 {
            return Err(domain("k must be at least 1"));
        }
        let m = k.div_ceil(2);
        if levels.len() != m || boundaries.len() != m {
            return Err(domain(format!(
                "k = {k} needs {m} levels and {m} boundaries, got {} and {}",
                levels.len(),
                boundaries.len()
            )));
        }
        if levels.iter().chain(&boundaries).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain("levels and boundaries must be finite and nonnegative"));
        }
        if boundaries[0] != 0.0 {
            return Err(domain("the first boundary must be 0"));
        }
        if k % 2 == 1 && levels[0] != 0.0 {
            return Err(domain("odd k requires the central level to be 0"));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) || boundaries.windows(2).any(|w| w[1] < w[0]) {
            return Err(domain("levels and boundaries must be nondecreasing"));
        }
        Ok(Self { k, levels, boundaries })
    }

    /// The two-point quantizer `x ↦ a·sign(x)`.
    pub fn two_point(a: f64) -> Result<Self> {
        Self::new(2, vec![a], vec![0.0])
    }

    /// Builds a spec from nonnegative increments, which is how the optimizers
    /// walk the ordered parameter space.
    ///
    /// `level_steps` holds `a₁, a₂−a₁, …` for even `k` and `a₂, a₃−a₂, …`
    /// for odd `k`; `boundary_steps` holds `B₂, B₃−B₂, …`.
    pub fn from_increments(k: usize, level_steps: &[f64], boundary_steps: &[f64]) -> Result<Self> {
        let m = k.div_ceil(2);
        let odd = k % 2 == 1;
        let mut levels = Vec::with_capacity(m);
        let mut acc = 0.0;
        if odd {
            levels.push(0.0);
        }
        for d in level_steps {
            acc += d;
            levels.push(acc);
        }
        let mut boundaries = Vec::with_capacity(m);
        boundaries.push(0.0);
        let mut acc = 0.0;
        for e in boundary_steps {
            acc += e;
            boundaries.push(acc);
        }
        Self::new(k, levels, boundaries)
    }

    /// Number of free coordinates used by [`QuantizerSpec::from_increments`].
    pub fn increment_dims(k: usize) -> (usize, usize) {
        let m = k.div_ceil(2);
        (m - k % 2, m - 1)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn is_odd(&self) -> bool {
        self.k % 2 == 1
    }

    /// The same map written with the fewest levels the family allows: an
    /// even quantizer with `k ≥ 4` whose innermost level is 0 is the odd
    /// quantizer of order `k − 1` with identical levels and boundaries.
    /// Two-point quantizers are left unchanged.
    pub fn canonical(&self) -> QuantizerSpec {
        if self.k >= 4 && self.k.is_multiple_of(2) && self.levels[0] == 0.0 {
            QuantizerSpec { k: self.k - 1, levels: self.levels.clone(), boundaries: self.boundaries.clone() }
        } else {
            self.clone()
        }
    }

    /// Index of the cell holding `x ≥ 0`. A point exactly on a boundary
    /// belongs to the inner cell.
    pub(crate) fn cell_of(&self, x: f64) -> usize {
        self.boundaries[1..].iter().filter(|b| **b < x).count()
    }
}

/// Applies the quantizer. Positive inputs map to `a_i` of their cell,
/// negative inputs to `−a_i`; zero maps to `a₁`.
pub fn quantize(x: f64, spec: &QuantizerSpec) -> f64 {
    let level = spec.levels[spec.cell_of(x.abs())];
    if x < 0.0 {
        -level
    } else {
        level
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_point() {
        let s = QuantizerSpec::new(3, vec![0.0, 1.0], vec![0.0, 1.5]).unwrap();
        assert_eq!(quantize(0.5, &s), 0.0);
        assert_eq!(quantize(2.0, &s), 1.0);
        assert_eq!(quantize(-2.0, &s), -1.0);
        assert_eq!(quantize(1.5, &s), 0.0);
    }

    #[test]
    fn four_point() {
        let s = QuantizerSpec::new(4, vec![0.5, 2.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(quantize(1.0, &s), 0.5);
        assert_eq!(quantize(-3.0, &s), -2.0);
    }

    #[test]
    fn validation() {
        assert!(QuantizerSpec::new(3, vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(QuantizerSpec::new(4, vec![1.0, 0.5], vec![0.0, 1.0]).is_err());
        assert!(QuantizerSpec::new(4, vec![0.5, 1.0], vec![0.1, 1.0]).is_err());
        assert!(QuantizerSpec::new(4, vec![0.5], vec![0.0]).is_err());
        assert!(QuantizerSpec::new(0, vec![], vec![]).is_err());
        assert!(QuantizerSpec::new(2, vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn canonical_form() {
        let s = QuantizerSpec::new(4, vec![0.0, 2.0], vec![0.0, 1.1]).unwrap();
        assert_eq!(s.canonical().k(), 3);
        let s = QuantizerSpec::two_point(0.0).unwrap();
        assert_eq!(s.canonical().k(), 2);
        let s = QuantizerSpec::new(4, vec![0.1, 2.0], vec![0.0, 1.1]).unwrap();
        assert_eq!(s.canonical(), s);
    }

    #[test]
    fn increments() {
        let s = QuantizerSpec::from_increments(5, &[1.0, 0.5], &[0.7, 0.2]).unwrap();
        assert_eq!(s.levels(), &[0.0, 1.0, 1.5]);
        assert_eq!(s.boundaries()[1], 0.7);
        assert!((s.boundaries()[2] - 0.9).abs() < 1e-15);
        assert_eq!(QuantizerSpec::increment_dims(5), (2, 2));
        assert_eq!(QuantizerSpec::increment_dims(4), (2, 1));
        assert_eq!(QuantizerSpec::increment_dims(2), (1, 0));
    }

    proptest! {
        #[test]
        fn two_point_is_sign(c in 0.01f64..5.0, x in -10.0f64..10.0) {
            prop_assume!(x != 0.0);
            let s = QuantizerSpec::two_point(c).unwrap();
            prop_assert_eq!(quantize(x, &s), c * x.signum());
        }

        #[test]
        fn odd_symmetry(steps in proptest::collection::vec(0.0f64..2.0, 4), x in -10.0f64..10.0) {
            let s = QuantizerSpec::from_increments(5, &steps[..2], &steps[2..]).unwrap();
            prop_assert_eq!(quantize(-x, &s), -quantize(x, &s));
        }
    }
}
