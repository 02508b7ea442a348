//! The jointly Gaussian coordination region.
//!
//! Auxiliary variables `W₁` (independent of the source) and `W₂` are jointly
//! Gaussian with `X₀` and `U₁`; with unit variances for `W₁` and `W₂` the
//! joint covariance of `(X₀, W₁, W₂, U₁)` is
//!
//! ```text
//! ⎡ Q        0     ρ₂√Q   ρ₃√(QP) ⎤
//! ⎢ 0        1     ρ₄     ρ₅√P    ⎥
//! ⎢ ρ₂√Q     ρ₄    1      ρ₆√P    ⎥
//! ⎣ ρ₃√(QP)  ρ₅√P  ρ₆√P   P       ⎦
//! ```
//!
//! with `ρ₆ = ρ₂ρ₃ + ρ₄ρ₅` forced by the Markov chain `U₁ – (X₀, W₁) – W₂`.
//! The variances of the auxiliaries do not affect any cost or information
//! quantity, so they are fixed to one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optimize::{minimize_constrained, OptimizerConfig};
use crate::strategies::{linear_cost, SystemParams};

/// Correlation coefficients of the Gaussian family at power `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussCorr {
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
    pub rho5: f64,
    pub p: f64,
}

impl GaussCorr {
    /// Checks ranges and the sign condition `(ρ₂²+ρ₄²−1)(ρ₃²+ρ₅²−1) ≥ 0`
    /// under which the determinant of the covariance is nonnegative.
    pub fn new(rho2: f64, rho3: f64, rho4: f64, rho5: f64, p: f64) -> Result<Self> {
        let c = Self { rho2, rho3, rho4, rho5, p };
        for r in [rho2, rho3, rho4, rho5] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(domain(format!("correlation coefficient {r} outside [-1, 1]")));
            }
        }
        if !(p >= 0.0 && p.is_finite()) {
            return Err(domain(format!("power must be nonnegative, got {p}")));
        }
        if c.det_factor_w() * c.det_factor_u() < 0.0 {
            return Err(Error::Infeasible("covariance determinant is negative".into()));
        }
        Ok(c)
    }

    /// `ρ₂ρ₃ + ρ₄ρ₅`.
    pub fn rho6(&self) -> f64 {
        self.rho2 * self.rho3 + self.rho4 * self.rho5
    }

    fn det_factor_w(&self) -> f64 {
        -1.0 + self.rho2 * self.rho2 + self.rho4 * self.rho4
    }

    fn det_factor_u(&self) -> f64 {
        -1.0 + self.rho3 * self.rho3 + self.rho5 * self.rho5
    }

    /// Whether the covariance matrix is positive semidefinite, i.e. whether
    /// the coefficients describe actual random variables. This requires both
    /// determinant factors to be nonpositive, which is stricter than the sign
    /// condition checked by [`GaussCorr::new`]. Boundary points computed in
    /// floating point may overshoot by rounding; `1e-12` is allowed.
    pub fn is_realizable(&self) -> bool {
        const ROUNDING: f64 = 1e-12;
        self.det_factor_w() <= ROUNDING && self.det_factor_u() <= ROUNDING
    }

    /// Covariance of `(X₀, W₁, W₂, U₁, Z₁)`.
    fn base_covariance(&self, sys: &SystemParams) -> DMatrix<f64> {
        let (sq, sp) = (sys.q.sqrt(), self.p.sqrt());
        let r6 = self.rho6();
        DMatrix::from_row_slice(
            5,
            5,
            &[
                sys.q,
                0.0,
                self.rho2 * sq,
                self.rho3 * sq * sp,
                0.0,
                0.0,
                1.0,
                self.rho4,
                self.rho5 * sp,
                0.0,
                self.rho2 * sq,
                self.rho4,
                1.0,
                r6 * sp,
                0.0,
                self.rho3 * sq * sp,
                self.rho5 * sp,
                r6 * sp,
                self.p,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                sys.n,
            ],
        )
    }
}

/// Powers bounding the time-sharing segment of the Gaussian region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussEndpoints {
    pub p1: f64,
    pub p2: f64,
}

/// Endpoints `P₁ ≤ P₂` of the segment on which the Gaussian region improves
/// on the linear cost. Requires `Q ≥ 4N`.
pub fn gauss_endpoints(sys: &SystemParams) -> Result<GaussEndpoints> {
    let (q, n) = (sys.q, sys.n);
    let disc = q * q - 4.0 * q * n;
    if disc < 0.0 {
        return Err(domain(format!("no time-sharing segment: Q = {q} < 4N = {}", 4.0 * n)));
    }
    let r = disc.sqrt();
    Ok(GaussEndpoints { p1: 0.5 * (q - 2.0 * n - r), p2: 0.5 * (q - 2.0 * n + r) })
}

/// Best estimation cost of the jointly Gaussian family at power `p`.
///
/// When `Q > 4N` the cost is affine, `N(Q−N−P)/Q`, between the endpoints and
/// coincides with the linear cost elsewhere.
pub fn sg_cost(p: f64, sys: &SystemParams) -> Result<f64> {
    let linear = linear_cost(p, sys)?;
    if sys.q > 4.0 * sys.n {
        let e = gauss_endpoints(sys)?;
        if p >= e.p1 && p <= e.p2 {
            return Ok(sys.n * (sys.q - sys.n - p) / sys.q);
        }
    }
    Ok(linear)
}

/// Information gap `I(W₁,W₂;Y₁) − I(W₂;X₀|W₁)` in bits, in closed form.
pub fn gauss_info_gap(c: &GaussCorr, sys: &SystemParams) -> Result<f64> {
    let (t1, t2) = gap_terms(c, sys);
    if (t1 - t2).abs() < 1e-12 {
        // Boundary case: treated as just feasible.
        return Ok(0.0);
    }
    let ratio = t1 / (t1 - t2);
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Infeasible(format!("information ratio {ratio} is not positive")));
    }
    Ok(0.5 * ratio.log2())
}

fn gap_terms(c: &GaussCorr, sys: &SystemParams) -> (f64, f64) {
    let (q, n, p) = (sys.q, sys.n, c.p);
    let (r2, r3, r4, r5) = (c.rho2, c.rho3, c.rho4, c.rho5);
    let t1 = (p + q + n + 2.0 * r3 * (q * p).sqrt()) * (-1.0 + r2 * r2 + r4 * r4);
    let t2 = n * r2 * r2 + p * r2 * r2 * (1.0 - r3 * r3) - p * r5 * r5 * (1.0 - r4 * r4);
    (t1, t2)
}

/// `E[(X₁ − E[X₁|W₁,W₂,Y₁])²]` in closed form.
pub fn gauss_mmse(c: &GaussCorr, sys: &SystemParams) -> f64 {
    let (q, n, p) = (sys.q, sys.n, c.p);
    let (r2, r3, r4, r5) = (c.rho2, c.rho3, c.rho4, c.rho5);
    let w = 1.0 - r4 * r4;
    if w == 0.0 {
        return n;
    }
    let f1 =
        -p * r2 * r2 * r3 * r3 - (q + 2.0 * r3 * (p * q).sqrt()) * (-1.0 + r2 * r2 + r4 * r4) + p * w * (1.0 - r5 * r5);
    n * f1 / (w * n + f1)
}

/// Correlation between the ends of a Gaussian Markov chain `X – Y – Z`,
/// given `corr(X,Y) = ρ₁` and `corr(Y,Z) = ρ₃`.
pub fn markov_rho_identity(rho1: f64, rho3: f64) -> f64 {
    rho1 * rho3
}

/// Linear decoder `U₂ = α·W₁ + β·W₂ + γ·Y₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDecoder {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Jointly Gaussian variables given as linear maps of `(X₀, W₁, W₂, U₁, Z₁)`.
pub(crate) mod var {
    pub const X0: [f64; 5] = [1.0, 0.0, 0.0, 0.0, 0.0];
    pub const W1: [f64; 5] = [0.0, 1.0, 0.0, 0.0, 0.0];
    pub const W2: [f64; 5] = [0.0, 0.0, 1.0, 0.0, 0.0];
    pub const X1: [f64; 5] = [1.0, 0.0, 0.0, 1.0, 0.0];
    pub const Y1: [f64; 5] = [1.0, 0.0, 0.0, 1.0, 1.0];
}

/// Covariance of a list of linear combinations of the base vector.
fn combo_covariance(base: &DMatrix<f64>, vars: &[[f64; 5]]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(vars.len(), 5, |i, j| vars[i][j]);
    &a * base * a.transpose()
}

/// Covariance of `targets` conditioned on `given`, by Schur complement.
fn conditional_covariance(base: &DMatrix<f64>, targets: &[[f64; 5]], given: &[[f64; 5]]) -> Result<DMatrix<f64>> {
    let tt = combo_covariance(base, targets);
    if given.is_empty() {
        return Ok(tt);
    }
    let all: Vec<[f64; 5]> = targets.iter().chain(given).copied().collect();
    let full = combo_covariance(base, &all);
    let k = targets.len();
    let gg = full.view((k, k), (given.len(), given.len())).into_owned();
    let tg = full.view((0, k), (k, given.len())).into_owned();
    let chol = gg.cholesky().ok_or_else(|| Error::Infeasible("conditioning covariance is singular".into()))?;
    Ok(tt - &tg * chol.solve(&tg.transpose()))
}

fn log2_det(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::Infeasible("covariance is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.log2()).sum::<f64>())
}

/// `I(A;B|C)` in bits for scalar Gaussian `A`, `B`. Returns 0 when `A` is a
/// deterministic function of `C`.
fn conditional_mi(base: &DMatrix<f64>, a: [f64; 5], b: &[[f64; 5]], c: &[[f64; 5]]) -> Result<f64> {
    let var_a = combo_covariance(base, &[a])[(0, 0)];
    let cond_a = conditional_covariance(base, &[a], c)?[(0, 0)];
    if cond_a <= 1e-12 * var_a.max(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    let mut ab = vec![a];
    ab.extend_from_slice(b);
    let joint = conditional_covariance(base, &ab, c)?;
    let cond_b = conditional_covariance(base, b, c)?;
    Ok(0.5 * (cond_a.log2() + log2_det(&cond_b)? - log2_det(&joint)?))
}

fn require_realizable(c: &GaussCorr) -> Result<()> {
    if c.is_realizable() {
        Ok(())
    } else {
        Err(Error::Infeasible("correlations do not form a covariance matrix".into()))
    }
}

/// `I(W₁;Y₁) − I(W₂;X₀|W₁,Y₁)` in bits, evaluated from covariance
/// log-determinants rather than the closed form.
pub fn gauss_info_gap_from_covariance(c: &GaussCorr, sys: &SystemParams) -> Result<f64> {
    require_realizable(c)?;
    let base = c.base_covariance(sys);
    let i1 = conditional_mi(&base, var::W1, &[var::Y1], &[])?;
    let i2 = conditional_mi(&base, var::W2, &[var::X0], &[var::W1, var::Y1])?;
    Ok(i1 - i2)
}

/// `E[(X₁ − E[X₁|W₁,W₂,Y₁])²]` from the covariance matrix.
pub fn gauss_mmse_from_covariance(c: &GaussCorr, sys: &SystemParams) -> Result<f64> {
    require_realizable(c)?;
    let base = c.base_covariance(sys);
    Ok(conditional_covariance(&base, &[var::X1], &[var::W1, var::W2, var::Y1])?[(0, 0)])
}

/// The two information expressions of the feedback setting with a linear
/// decoder:
///
/// * `I(W₁;Y₁) − I(U₂;X₀|W₁,Y₁)`
/// * `I(W₁,W₂;Y₁) − I(W₂;X₀|W₁)`
///
/// Both in bits. They coincide whenever `β ≠ 0`, since `U₂` then carries
/// `W₂` once `W₁` and `Y₁` are known.
pub fn feedback_equivalence(c: &GaussCorr, sys: &SystemParams, decoder: &LinearDecoder) -> Result<(f64, f64)> {
    require_realizable(c)?;
    let base = c.base_covariance(sys);
    let u2: [f64; 5] =
        std::array::from_fn(|j| decoder.alpha * var::W1[j] + decoder.beta * var::W2[j] + decoder.gamma * var::Y1[j]);
    let first =
        conditional_mi(&base, var::W1, &[var::Y1], &[])? - conditional_mi(&base, u2, &[var::X0], &[var::W1, var::Y1])?;

    // I(W₁,W₂;Y₁) = h(Y₁) − h(Y₁|W₁,W₂)
    let var_y = combo_covariance(&base, &[var::Y1])[(0, 0)];
    let cond_y = conditional_covariance(&base, &[var::Y1], &[var::W1, var::W2])?[(0, 0)];
    let second = 0.5 * (var_y / cond_y).log2() - conditional_mi(&base, var::W2, &[var::X0], &[var::W1])?;
    Ok((first, second))
}

/// Draws coefficients uniformly over the realizable set, strictly inside it.
pub fn sample_realizable<R: rand::Rng + ?Sized>(rng: &mut R, p: f64) -> GaussCorr {
    let mut open = || rng.random_range(-0.999..0.999);
    let rho3: f64 = open();
    let s: f64 = open();
    let rho4: f64 = open();
    let t: f64 = open();
    GaussCorr { rho2: t * (1.0 - rho4 * rho4).sqrt(), rho3, rho4, rho5: s * (1.0 - rho3 * rho3).sqrt(), p }
}

/// Maps the box `[−1,1]⁴` onto realizable coefficients whose image
/// contains every configuration with a nonnegative information gap.
///
/// Coordinates are `(ρ₃, s, ρ₄, u)` with `ρ₅ = s·√(1−ρ₃²)` and `ρ₂` equal
/// to `u` times the largest magnitude compatible with `T₂ ≤ 0`, so the
/// boundary of the information constraint becomes a face of the box.
pub fn corr_from_search_coords(x: &[f64], p: f64, sys: &SystemParams) -> GaussCorr {
    let (rho3, s, rho4, u) = (x[0], x[1], x[2], x[3]);
    let rho5 = s * (1.0 - rho3 * rho3).max(0.0).sqrt();
    let w = (1.0 - rho4 * rho4).max(0.0);
    let rho2_max = (p * rho5 * rho5 * w / (sys.n + p * (1.0 - rho3 * rho3))).min(w).sqrt();
    GaussCorr { rho2: u * rho2_max, rho3, rho4, rho5, p }
}

/// Minimizes [`gauss_mmse`] subject to a nonnegative [`gauss_info_gap`] by
/// direct numerical search, independently of the closed form
/// [`sg_cost`]. Returns the minimal cost and the minimizing coefficients.
pub fn gauss_min_mmse_search(p: f64, sys: &SystemParams, opt: &OptimizerConfig) -> Result<(f64, GaussCorr)> {
    let r = minimize_constrained(
        |x| gauss_mmse(&corr_from_search_coords(x, p, sys), sys),
        |x| gauss_info_gap(&corr_from_search_coords(x, p, sys), sys).unwrap_or(f64::NEG_INFINITY),
        &[(-1.0, 1.0); 4],
        opt,
    )?;
    if !r.feasible {
        return Err(Error::NoFeasiblePoint { best_gap: r.constraint_value });
    }
    Ok((r.value, corr_from_search_coords(&r.minimizer, p, sys)))
}
