//! Box-constrained first-order minimizer: projected gradient with a
//! safeguarded Barzilai-Borwein step and monotone Armijo backtracking along
//! the projection arc.
//!
//! Termination uses the projected-gradient criterion
//! `||x - proj(x - g)||_inf <= tol * max(1, initial criterion)`; accepted
//! iterates never increase the objective. No randomness is involved, so a
//! given configuration always produces the same iterates.

use crate::error::{ModelError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Relative projected-gradient tolerance.
    pub tol: f64,
    /// Iteration cap; hitting it returns the best iterate flagged
    /// non-converged.
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Step shrink factor during backtracking.
    pub backtrack_factor: f64,
    /// Backtracking cap per iteration.
    pub max_backtracks: usize,
    /// First trial step before any curvature information exists.
    pub step_init: f64,
    /// Lower safeguard of the Barzilai-Borwein step.
    pub step_min: f64,
    /// Upper safeguard of the Barzilai-Borwein step.
    pub step_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 2000,
            armijo_c1: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 40,
            step_init: 1.0,
            step_min: 1e-10,
            step_max: 1e10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0)
            || self.max_iters == 0
            || !(self.armijo_c1 > 0.0 && self.armijo_c1 < 1.0)
            || !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0)
            || self.max_backtracks == 0
            || !(self.step_init > 0.0)
            || !(0.0 < self.step_min && self.step_min <= self.step_max)
        {
            return Err(ModelError::Parameter(
                "invalid solver configuration".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one [`minimize_box`] run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final projected-gradient criterion (inf norm).
    pub criterion: f64,
    pub objective_evals: usize,
    pub gradient_evals: usize,
    /// Objective value of every accepted iterate, starting at x0.
    pub history: Vec<f64>,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lower[i], upper[i]);
    }
}

fn projected_criterion(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut crit = 0.0_f64;
    for i in 0..x.len() {
        let stepped = (x[i] - g[i]).clamp(lower[i], upper[i]);
        crit = crit.max((x[i] - stepped).abs());
    }
    crit
}

/// Minimize `obj` over the box `[lower, upper]` starting from `x0`.
pub fn minimize_box<F, G>(
    mut obj: F,
    mut grad: G,
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let n = x0.len();
    if lower.len() != n || upper.len() != n {
        return Err(ModelError::Shape {
            expected: n,
            got: lower.len().min(upper.len()),
        });
    }
    for i in 0..n {
        if !(lower[i] <= upper[i]) {
            return Err(ModelError::Parameter(format!(
                "bound {i} is empty: [{}, {}]",
                lower[i], upper[i]
            )));
        }
    }

    let mut x = x0.to_vec();
    project(&mut x, lower, upper);

    let mut f = obj(&x)?;
    let mut g = grad(&x)?;
    let mut obj_evals = 1;
    let mut grad_evals = 1;
    let mut history = vec![f];

    let crit0 = projected_criterion(&x, &g, lower, upper);
    let tol_abs = cfg.tol * crit0.max(1.0);

    let mut alpha = cfg.step_init;
    let mut iterations = 0;
    let mut converged = crit0 <= tol_abs;
    let mut criterion = crit0;

    while !converged && iterations < cfg.max_iters {
        // backtracking along the projection arc
        let mut a = alpha;
        let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
        for _ in 0..cfg.max_backtracks {
            let mut trial: Vec<f64> = (0..n).map(|i| x[i] - a * g[i]).collect();
            project(&mut trial, lower, upper);
            let gdx: f64 = (0..n).map(|i| g[i] * (trial[i] - x[i])).sum();
            if gdx >= 0.0 {
                // no descent direction left at this resolution
                a *= cfg.backtrack_factor;
                continue;
            }
            let f_trial = obj(&trial)?;
            obj_evals += 1;
            if f_trial <= f + cfg.armijo_c1 * gdx {
                accepted = Some((trial, f_trial, gdx));
                break;
            }
            a *= cfg.backtrack_factor;
        }

        let Some((x_new, f_new, _)) = accepted else {
            // stationary within line-search resolution; stop on the best
            // iterate without accepting an increase
            break;
        };

        let g_new = grad(&x_new)?;
        grad_evals += 1;

        // Barzilai-Borwein step for the next iteration
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..n {
            let s = x_new[i] - x[i];
            let y = g_new[i] - g[i];
            sy += s * y;
            ss += s * s;
        }
        alpha = if sy > 0.0 {
            (ss / sy).clamp(cfg.step_min, cfg.step_max)
        } else {
            cfg.step_max.min(alpha / cfg.backtrack_factor)
        };

        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        history.push(f);

        criterion = projected_criterion(&x, &g, lower, upper);
        converged = criterion <= tol_abs;
    }

    Ok(SolveReport {
        x,
        objective: f,
        iterations,
        converged,
        criterion,
        objective_evals: obj_evals,
        gradient_evals: grad_evals,
        history,
    })
}
