//! Norm-regularized empirical risk minimization:
//! minimize (1/n) sum_i f_i(x) + lambda ||x||_p.
//!
//! Two solvers are available. `Exact1d` enumerates the breakpoints of
//! one-dimensional piecewise-linear empirical objectives and is exact.
//! `Generic` is a projected subgradient method with a Polyak-style target
//! level: the optimality-gap bracket starts coarse and is halved whenever a
//! patience window passes without sufficient decrease. The final bracket is
//! reported as the solver residual; on the sharp (piecewise-linear)
//! objectives used here the scheme contracts geometrically.

use crate::problems::{EmpiricalView, ProblemSpec, Sample};
use crate::{norm, Error, Norm, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErmSolverChoice {
    /// Breakpoint enumeration when the instance supports it, otherwise the
    /// generic solver.
    Auto,
    Exact1d,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErmSolverKind {
    Exact1d,
    Generic,
}

#[derive(Debug, Clone)]
pub struct ErmConfig {
    /// Relative tolerance; the absolute target is tol_rel * (1 + |objective at 0|).
    pub tol_rel: f64,
    pub max_iters: usize,
    pub solver: ErmSolverChoice,
}

impl Default for ErmConfig {
    fn default() -> Self {
        ErmConfig { tol_rel: 1e-6, max_iters: 4000, solver: ErmSolverChoice::Auto }
    }
}

#[derive(Debug, Clone)]
pub struct ErmSolution {
    pub lambda: f64,
    pub norm: Norm,
    pub minimizer: Vec<f64>,
    pub objective_value: f64,
    /// Reported bound on the optimality gap (0 for the exact solver).
    pub solver_residual: f64,
    /// Budget ran out before the residual met the tolerance.
    pub residual_above_tolerance: bool,
    pub solver: ErmSolverKind,
    /// Absolute tolerance the run was held to.
    pub tolerance: f64,
}

/// Approximately minimize the regularized empirical objective.
pub fn regularized_erm(
    spec: &ProblemSpec,
    samples: &[Sample],
    lambda: f64,
    reg_norm: Norm,
    cfg: &ErmConfig,
) -> Result<ErmSolution> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let view = EmpiricalView::build(spec, samples);
    let exact_possible = spec.dimension() == 1 && spec.loss_breakpoints_1d(samples).is_some();
    let use_exact = match cfg.solver {
        ErmSolverChoice::Auto => exact_possible,
        ErmSolverChoice::Exact1d => {
            if !exact_possible {
                return Err(Error::Unsupported(
                    "exact solver needs a one-dimensional piecewise-linear instance".into(),
                ));
            }
            true
        }
        ErmSolverChoice::Generic => false,
    };
    if use_exact {
        solve_exact_1d(spec, samples, &view, lambda, reg_norm, cfg)
    } else {
        solve_generic(spec, &view, lambda, reg_norm, cfg)
    }
}

fn objective(view: &EmpiricalView<'_>, lambda: f64, p: Norm, x: &[f64]) -> f64 {
    view.mean_loss(x) + lambda * norm(x, p)
}

fn solve_exact_1d(
    spec: &ProblemSpec,
    samples: &[Sample],
    view: &EmpiricalView<'_>,
    lambda: f64,
    reg_norm: Norm,
    cfg: &ErmConfig,
) -> Result<ErmSolution> {
    let mut pts = spec.loss_breakpoints_1d(samples).expect("checked by caller");
    pts.push(0.0); // kink of lambda |x|
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    // Coercivity: the asymptotic slopes of the piecewise-linear objective
    // must point inward, otherwise the regularized ERM is unbounded.
    let lo = pts[0] - 1.0;
    let hi = pts[pts.len() - 1] + 1.0;
    let f = |u: f64| objective(view, lambda, reg_norm, &[u]);
    let right_slope = f(hi + 1.0) - f(hi);
    let left_slope = f(lo - 1.0) - f(lo);
    if right_slope <= 0.0 || left_slope <= 0.0 {
        return Err(Error::UnboundedErm);
    }
    let mut best = pts[0];
    let mut best_val = f(pts[0]);
    for &u in &pts[1..] {
        let v = f(u);
        if v < best_val {
            best = u;
            best_val = v;
        }
    }
    let tolerance = cfg.tol_rel * (1.0 + f(0.0).abs());
    Ok(ErmSolution {
        lambda,
        norm: reg_norm,
        minimizer: vec![best],
        objective_value: best_val,
        solver_residual: 0.0,
        residual_above_tolerance: false,
        solver: ErmSolverKind::Exact1d,
        tolerance,
    })
}

/// Minimum-norm subgradient of ||x||_p.
fn norm_subgradient(x: &[f64], p: Norm, out: &mut [f64]) {
    match p {
        Norm::L2 => {
            let n = norm(x, Norm::L2);
            for j in 0..x.len() {
                out[j] = if n == 0.0 { 0.0 } else { x[j] / n };
            }
        }
        Norm::L1 => {
            for j in 0..x.len() {
                out[j] = crate::problems::signum_min_norm(x[j]);
            }
        }
        Norm::Linf => {
            let m = norm(x, Norm::Linf);
            out.fill(0.0);
            if m == 0.0 {
                return;
            }
            let arg: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() == m).collect();
            let share = 1.0 / arg.len() as f64;
            for j in arg {
                out[j] = x[j].signum() * share;
            }
        }
    }
}

fn solve_generic(
    spec: &ProblemSpec,
    view: &EmpiricalView<'_>,
    lambda: f64,
    reg_norm: Norm,
    cfg: &ErmConfig,
) -> Result<ErmSolution> {
    let d = spec.dimension();
    let domain = spec.domain();
    let f0 = objective(view, lambda, reg_norm, &vec![0.0; d]);
    let tolerance = cfg.tol_rel * (1.0 + f0.abs());

    let mut x = vec![0.0; d];
    let mut best_x = x.clone();
    let mut best_f = f0;
    let mut bracket = 0.5 * (1.0 + f0.abs());
    let mut search_radius = 2.0f64;
    let mut stall = 0usize;
    const PATIENCE: usize = 25;

    let mut g = vec![0.0; d];
    let mut gn = vec![0.0; d];
    let mut fx = f0;
    for _ in 0..cfg.max_iters {
        view.mean_subgradient(&x, &mut g);
        norm_subgradient(&x, reg_norm, &mut gn);
        for j in 0..d {
            g[j] += lambda * gn[j];
        }
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg == 0.0 {
            // Exact stationary point of the sampled objective.
            best_x = x.clone();
            best_f = fx;
            bracket = 0.0;
            break;
        }
        let step = (fx - (best_f - bracket)) / gg;
        for j in 0..d {
            x[j] = domain.clamp1d(x[j] - step * g[j]);
        }
        let xn = norm(&x, Norm::L2);
        if xn > search_radius {
            let s = search_radius / xn;
            for v in x.iter_mut() {
                *v *= s;
            }
        }
        fx = objective(view, lambda, reg_norm, &x);
        if fx < best_f - 0.25 * bracket {
            stall = 0;
        } else {
            stall += 1;
        }
        if fx < best_f {
            best_f = fx;
            best_x.copy_from_slice(&x);
        }
        if norm(&best_x, Norm::L2) > 0.9 * search_radius {
            // The minimizer may sit outside the current search region.
            search_radius *= 2.0;
            stall = 0;
        } else if stall >= PATIENCE {
            bracket *= 0.5;
            stall = 0;
            x.copy_from_slice(&best_x);
            fx = best_f;
            if bracket <= 0.25 * tolerance {
                break;
            }
        }
    }
    let residual = 2.0 * bracket;
    Ok(ErmSolution {
        lambda,
        norm: reg_norm,
        minimizer: best_x,
        objective_value: best_f,
        solver_residual: residual,
        residual_above_tolerance: residual > tolerance,
        solver: ErmSolverKind::Generic,
        tolerance,
    })
}
