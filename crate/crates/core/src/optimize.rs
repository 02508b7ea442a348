//! Deterministic multi-start minimization under box bounds and a single
//! inequality constraint.
//!
//! A full tensor grid is evaluated first; the best feasible grid points seed
//! Nelder–Mead polishes whose iterates are clamped to the box. Infeasible or
//! non-finite evaluations count as `+∞`, so the constraint acts as a filter
//! rather than a penalty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_points_per_dim: usize,
    pub polish_iterations: usize,
    pub polish_tolerance: f64,
    /// A point is feasible when `constraint >= -constraint_slack`.
    pub constraint_slack: f64,
    /// Seeds the orientation of each polish's initial simplex.
    pub seed: u64,
    pub top_starts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points_per_dim: 11,
            polish_iterations: 400,
            polish_tolerance: 1e-7,
            constraint_slack: 1e-9,
            seed: 0,
            top_starts: 5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_dim < 3 {
            return Err(domain("grid_points_per_dim must be at least 3"));
        }
        if !(self.polish_tolerance > 0.0) {
            return Err(domain("polish_tolerance must be positive"));
        }
        if self.top_starts < 1 {
            return Err(domain("top_starts must be at least 1"));
        }
        if !(self.constraint_slack >= 0.0) {
            return Err(domain("constraint_slack must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub minimizer: Vec<f64>,
    pub value: f64,
    pub constraint_value: f64,
    pub feasible: bool,
    pub evaluations: usize,
}

/// Closed interval `[lo, hi]` for one coordinate.
pub type Bound = (f64, f64);

/// Minimizes `objective` over `bounds` subject to `constraint >= 0`.
///
/// Deterministic for a fixed configuration: grid points and polishes are
/// evaluated in parallel but reduced in index order. If no grid point is
/// feasible the result has `feasible == false` and carries the grid point
/// with the largest constraint value.
pub fn minimize_constrained<F, G>(
    objective: F,
    constraint: G,
    bounds: &[Bound],
    cfg: &OptimizerConfig,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(domain("at least one coordinate is required"));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(domain(format!("invalid bound [{lo}, {hi}]")));
        }
    }

    let dim = bounds.len();
    let g = cfg.grid_points_per_dim;
    let total = g.checked_pow(dim as u32).ok_or_else(|| domain("grid too large"))?;

    let grid: Vec<GridEval> = (0..total)
        .into_par_iter()
        .map(|index| {
            let x = grid_point(index, bounds, g);
            let c = constraint(&x);
            let feasible = c >= -cfg.constraint_slack;
            let f = if feasible { objective(&x) } else { f64::INFINITY };
            GridEval { x, f, c, feasible: feasible && f.is_finite() }
        })
        .collect();
    let mut evaluations = total;

    let mut feasible: Vec<usize> = (0..total).filter(|&i| grid[i].feasible).collect();
    if feasible.is_empty() {
        let best =
            (0..total).max_by(|&a, &b| grid[a].c.total_cmp(&grid[b].c).then(b.cmp(&a))).expect("grid is nonempty");
        return Ok(OptResult {
            minimizer: grid[best].x.clone(),
            value: f64::INFINITY,
            constraint_value: grid[best].c,
            feasible: false,
            evaluations,
        });
    }
    feasible.sort_by(|&a, &b| grid[a].f.total_cmp(&grid[b].f).then(a.cmp(&b)));
    feasible.truncate(cfg.top_starts);

    let steps: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (hi - lo) / (g - 1) as f64).collect();

    let polished: Vec<(Vec<f64>, f64, usize)> = feasible
        .par_iter()
        .enumerate()
        .map(|(rank, &start)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(rank as u64);
            let signed: Vec<f64> = steps.iter().map(|s| if rng.random::<bool>() { *s } else { -*s }).collect();
            let penalized = |x: &[f64]| {
                let c = constraint(x);
                if c >= -cfg.constraint_slack {
                    let f = objective(x);
                    if f.is_finite() {
                        return f;
                    }
                }
                f64::INFINITY
            };
            nelder_mead(&penalized, &grid[start].x, grid[start].f, &signed, bounds, cfg)
        })
        .collect();

    let mut best_x = grid[feasible[0]].x.clone();
    let mut best_f = grid[feasible[0]].f;
    for (x, f, evals) in polished {
        evaluations += evals;
        if f < best_f {
            best_f = f;
            best_x = x;
        }
    }
    let c = constraint(&best_x);
    evaluations += 1;
    Ok(OptResult { minimizer: best_x, value: best_f, constraint_value: c, feasible: true, evaluations })
}

struct GridEval {
    x: Vec<f64>,
    f: f64,
    c: f64,
    feasible: bool,
}

fn grid_point(mut index: usize, bounds: &[Bound], g: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(bounds.len());
    for &(lo, hi) in bounds {
        let j = index % g;
        index /= g;
        x.push(if j == g - 1 { hi } else { lo + (hi - lo) * j as f64 / (g - 1) as f64 });
    }
    x
}

fn clamp_to(x: &mut [f64], bounds: &[Bound]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

/// Box-projected Nelder–Mead started at a known point. Restarts once from
/// the best vertex with a smaller simplex after the first convergence.
fn nelder_mead<F>(
    f: &F,
    x0: &[f64],
    f0: f64,
    steps: &[f64],
    bounds: &[Bound],
    cfg: &OptimizerConfig,
) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut best = (x0.to_vec(), f0);
    let mut scale = 1.0;

    for _round in 0..2 {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push(best.clone());
        for i in 0..n {
            let mut x = best.0.clone();
            x[i] += scale * steps[i];
            clamp_to(&mut x, bounds);
            if x[i] == best.0[i] {
                // Clamped onto the start; step the other way.
                x[i] -= 2.0 * scale * steps[i];
                clamp_to(&mut x, bounds);
            }
            let fx = f(&x);
            evals += 1;
            simplex.push((x, fx));
        }

        let mut iterations = 0;
        while iterations < cfg.polish_iterations {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= cfg.polish_tolerance {
                break;
            }

            let worst = simplex[n].clone();
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |t: f64| {
                let mut x: Vec<f64> = centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect();
                clamp_to(&mut x, bounds);
                x
            };

            let xr = along(1.0);
            let fr = f(&xr);
            evals += 1;
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = f(&xe);
                evals += 1;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // Shrink toward the best vertex.
            let x_best = simplex[0].0.clone();
            for (x, fx) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&x_best) {
                    *xi = bi + 0.5 * (*xi - bi);
                }
                *fx = f(x);
                evals += 1;
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best.1 {
            best = simplex[0].clone();
        }
        scale *= 0.1;
    }
    (best.0, best.1, evals)
}
