use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Half-width of the integration window around each density component,
    /// in standard deviations.
    pub truncation_sigmas: f64,
    /// Total number of interval bisections allowed per call.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, truncation_sigmas: 12.0, max_subdivisions: 200_000 }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(domain("quadrature tolerances must be positive"));
        }
        if !(self.truncation_sigmas >= 8.0) {
            return Err(domain("truncation_sigmas must be at least 8"));
        }
        if self.max_subdivisions < 1 {
            return Err(domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

/// Number of equal panels the window is cut into before adaptation starts.
const INITIAL_PANELS: usize = 8;
/// Bisection depth below which an interval is accepted regardless.
const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of `f` over `[lo, hi]`.
///
/// The window is first cut into a few equal panels so that a narrow peak
/// cannot hide between the initial sample points.
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let edges: Vec<f64> = (0..=INITIAL_PANELS).map(|i| lo + (hi - lo) * i as f64 / INITIAL_PANELS as f64).collect();
    integrate_panels(f, &edges, cfg)
}

/// Adaptive Simpson quadrature over consecutive panels `edges[i]..edges[i+1]`.
///
/// The absolute tolerance is shared between panels in proportion to their
/// width. `edges` must be sorted ascending.
pub fn integrate_panels<F>(f: F, edges: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if edges.len() < 2 {
        return Ok(0.0);
    }
    let total_width = edges[edges.len() - 1] - edges[0];
    if !(total_width > 0.0) {
        return Ok(0.0);
    }

    let mut budget = cfg.max_subdivisions;
    let mut exhausted = false;
    let mut sum = 0.0;
    let mut stack: Vec<Segment> = Vec::with_capacity(64);

    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        stack.push(Segment {
            a,
            b,
            fa,
            fm,
            fb,
            whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
            tol: cfg.abs_tol * (b - a) / total_width,
            depth: 0,
        });
        while let Some(seg) = stack.pop() {
            let Segment { a, b, fa, fm, fb, whole, tol, depth } = seg;
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let refined = left + right;
            let diff = refined - whole;
            let accept = diff.abs() <= 15.0 * tol.max(cfg.rel_tol * refined.abs());
            if accept || depth >= MAX_DEPTH || exhausted {
                sum += refined + diff / 15.0;
                continue;
            }
            if budget == 0 {
                exhausted = true;
                sum += refined + diff / 15.0;
                continue;
            }
            budget -= 1;
            // Right half pushed first so the left half is processed first.
            stack.push(Segment { a: m, b, fa: fm, fm: frm, fb, whole: right, tol: 0.5 * tol, depth: depth + 1 });
            stack.push(Segment { a, b: m, fa, fm: flm, fb: fm, whole: left, tol: 0.5 * tol, depth: depth + 1 });
        }
    }

    if exhausted {
        Err(Error::Convergence { estimate: sum })
    } else {
        Ok(sum)
    }
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}
