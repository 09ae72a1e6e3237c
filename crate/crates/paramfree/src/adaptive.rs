//! Two-stage distance-adaptive optimization.
//!
//! Stage 1 solves a norm-regularized ERM on the first half of the sample
//! and sets R = 3 ||x_hat||; stage 2 runs the geometry's ball-constrained
//! optimizer on the fresh second half. The regularization weight comes from
//! empirical per-coordinate gradient variances
//! D_j(x) = (1/n) sum_i (grad_j f_i(x) - grad_j Fbar(x))^2, aggregated per
//! geometry (q abbreviates the failure probability):
//!
//! * p = 2: 4 sqrt(ln(6/q)) sup_x sqrt(sum_j D_j(x)) / sqrt(n)
//!   + 20 Lhat ln(6/q) / (n-1), paired with AdaSGD;
//! * p = 1: 4 sqrt(2 ln(4d/q)) sup_{j,x} sqrt(D_j(x)) / sqrt(n-1)
//!   + 28 ||lhat||_inf ln(4d/q) / (3(n-1)), paired with AdaEMD;
//! * p = inf: (9/2) sqrt(2 ln(30/q)) sup_x sum_j sqrt(D_j(x)) / sqrt(n-1)
//!   + 50 ||lhat||_1 ln(30/q) / (n-1), paired with AdaGrad.
//!
//! The suprema over x are intractable in general; three explicit strategies
//! are offered (uniform Lipschitz envelope, probe-grid maximization, exact
//! one-dimensional breakpoint enumeration) and the chosen one is recorded in
//! the result.

use crate::optimizers::{ada_emd, ada_grad, ada_sgd, regularized_erm, ErmConfig, ErmSolution};
use crate::problems::{EmpiricalView, ProblemSpec, Sample};
use crate::selection::{
    reliable_select, widths_theory, ConfidenceWidths, LossMatrix, SelectionOutcome,
};
use crate::{norm, Error, Norm, Result};

/// How the sup_x D_j(x) terms of the lambda table are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaStrategy {
    /// D_j(x) <= (2 lhat_j)^2 uniformly. Total but conservative; the
    /// variance adaptivity of the table is given up.
    LipschitzEnvelope,
    /// Maximize the empirical D over a finite probe grid. Synthetic /
    /// low-dimensional use only: the grid is not a certified supremum.
    GridSup(ProbeGrid),
    /// Enumerate gradient breakpoints of one-dimensional piecewise-linear
    /// instances; exact there.
    Exact1d,
}

/// Probe pattern for [`LambdaStrategy::GridSup`]: the origin, axis segments
/// t e_j, and the diagonal t (1, ..., 1) for t on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub include_axes: bool,
    pub include_diagonal: bool,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid { lo: -2.0, hi: 2.0, steps: 9, include_axes: true, include_diagonal: true }
    }
}

/// Which optimizer a geometry row dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgKind {
    AdaSgd,
    AdaEmd,
    AdaGrad,
}

impl AlgKind {
    pub fn for_norm(p: Norm) -> AlgKind {
        match p {
            Norm::L2 => AlgKind::AdaSgd,
            Norm::L1 => AlgKind::AdaEmd,
            Norm::Linf => AlgKind::AdaGrad,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AlgKind::AdaSgd => "ada_sgd",
            AlgKind::AdaEmd => "ada_emd",
            AlgKind::AdaGrad => "ada_grad",
        }
    }
}

/// One row of the geometry table: norm, regularization weight, matching
/// algorithm, and the scalar Lipschitz input the weight was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRow {
    pub norm: Norm,
    pub lambda: f64,
    pub algorithm: AlgKind,
    pub lipschitz_input: f64,
}

/// Output of the two-stage method.
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub output: Vec<f64>,
    /// R = 3 ||x_hat_lambda||_p.
    pub stage1_radius: f64,
    pub erm: ErmSolution,
    pub row: GeometryRow,
    /// Sizes of the (disjoint) localization and optimization halves.
    pub sample_split: (usize, usize),
    /// Nominal failure probability of the run's guarantees (3 delta).
    pub nominal_failure: f64,
}

/// Aggregated empirical gradient-variance suprema.
#[derive(Debug, Clone, Copy)]
struct SupDeltas {
    /// sup_x sqrt(sum_j D_j(x)).
    root_sum: f64,
    /// sup_{j,x} sqrt(D_j(x)).
    coord_max: f64,
    /// sup_x sum_j sqrt(D_j(x)).
    sum_root: f64,
}

fn sup_deltas(
    spec: &ProblemSpec,
    view: &EmpiricalView<'_>,
    strategy: &LambdaStrategy,
) -> Result<SupDeltas> {
    match strategy {
        LambdaStrategy::LipschitzEnvelope => {
            let lc = spec.lipschitz_coord().ok_or(Error::MissingLipschitz)?;
            let root_sum = 2.0 * lc.iter().map(|l| l * l).sum::<f64>().sqrt();
            let coord_max = 2.0 * lc.iter().cloned().fold(0.0f64, f64::max);
            let sum_root = 2.0 * lc.iter().sum::<f64>();
            Ok(SupDeltas { root_sum, coord_max, sum_root })
        }
        LambdaStrategy::GridSup(grid) => {
            if grid.steps < 2 || !(grid.hi > grid.lo) {
                return Err(Error::InvalidParameter("probe grid needs hi > lo and >= 2 steps".into()));
            }
            let d = spec.dimension();
            let mut sups = SupDeltas { root_sum: 0.0, coord_max: 0.0, sum_root: 0.0 };
            let mut deltas = vec![0.0; d];
            let mut x = vec![0.0; d];
            let probe = |x: &[f64], deltas: &mut [f64], sups: &mut SupDeltas| {
                view.gradient_variances(x, deltas);
                accumulate_sups(deltas, sups);
            };
            probe(&x, &mut deltas, &mut sups);
            for s in 0..grid.steps {
                let t = grid.lo + (grid.hi - grid.lo) * s as f64 / (grid.steps - 1) as f64;
                if grid.include_diagonal {
                    x.fill(t);
                    probe(&x, &mut deltas, &mut sups);
                }
                if grid.include_axes && d > 1 {
                    x.fill(0.0);
                    for j in 0..d {
                        x[j] = t;
                        probe(&x, &mut deltas, &mut sups);
                        x[j] = 0.0;
                    }
                }
            }
            Ok(sups)
        }
        LambdaStrategy::Exact1d => {
            if spec.dimension() != 1 {
                return Err(Error::Unsupported("exact lambda strategy needs dimension 1".into()));
            }
            let samples = match view {
                EmpiricalView::General { samples, .. } => *samples,
                EmpiricalView::Atoms { .. } => {
                    return Err(Error::Unsupported(
                        "exact lambda strategy is wired for the general sample view".into(),
                    ))
                }
            };
            let kinks = spec
                .loss_breakpoints_1d(samples)
                .ok_or_else(|| Error::Unsupported("instance is not piecewise linear".into()))?;
            // D is piecewise constant between gradient kinks: probing the
            // kinks, segment midpoints and one point beyond each end is an
            // exact supremum.
            let mut pts = Vec::new();
            pts.push(kinks[0] - 1.0);
            for w in kinks.windows(2) {
                pts.push(0.5 * (w[0] + w[1]));
            }
            pts.extend_from_slice(&kinks);
            pts.push(kinks[kinks.len() - 1] + 1.0);
            let mut sups = SupDeltas { root_sum: 0.0, coord_max: 0.0, sum_root: 0.0 };
            let mut deltas = [0.0];
            for &p in &pts {
                view.gradient_variances(&[p], &mut deltas);
                accumulate_sups(&deltas, &mut sups);
            }
            Ok(sups)
        }
    }
}

fn accumulate_sups(deltas: &[f64], sups: &mut SupDeltas) {
    let mut sum = 0.0;
    let mut maxd = 0.0f64;
    let mut sum_root = 0.0;
    for &dj in deltas {
        sum += dj;
        maxd = maxd.max(dj);
        sum_root += dj.sqrt();
    }
    sups.root_sum = sups.root_sum.max(sum.sqrt());
    sups.coord_max = sups.coord_max.max(maxd.sqrt());
    sups.sum_root = sups.sum_root.max(sum_root);
}

fn lambda_from_sups(
    spec: &ProblemSpec,
    p: Norm,
    n: usize,
    delta: f64,
    sups: &SupDeltas,
) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let lip = spec.lipschitz_for(p).ok_or(Error::MissingLipschitz)?;
    let d = spec.dimension() as f64;
    let nf = n as f64;
    let lambda = match p {
        Norm::L2 => {
            let l = (6.0 / delta).ln();
            4.0 * l.sqrt() * sups.root_sum / nf.sqrt() + 20.0 * lip * l / (nf - 1.0)
        }
        Norm::L1 => {
            let l = (4.0 * d / delta).ln();
            4.0 * (2.0 * l).sqrt() * sups.coord_max / (nf - 1.0).sqrt()
                + 28.0 * lip * l / (3.0 * (nf - 1.0))
        }
        Norm::Linf => {
            let l = (30.0 / delta).ln();
            4.5 * (2.0 * l).sqrt() * sups.sum_root / (nf - 1.0).sqrt() + 50.0 * lip * l / (nf - 1.0)
        }
    };
    Ok((lambda, lip))
}

/// Regularization weight lambda_p for the given geometry.
pub fn compute_lambda(
    spec: &ProblemSpec,
    samples: &[Sample],
    p: Norm,
    delta: f64,
    strategy: &LambdaStrategy,
) -> Result<f64> {
    let view = EmpiricalView::build(spec, samples);
    let view = match (&strategy, view) {
        // The exact strategy needs raw samples for breakpoint enumeration.
        (LambdaStrategy::Exact1d, _) => EmpiricalView::General { spec, samples },
        (_, v) => v,
    };
    let sups = sup_deltas(spec, &view, strategy)?;
    Ok(lambda_from_sups(spec, p, samples.len(), delta, &sups)?.0)
}

fn run_geometry_algorithm(
    spec: &ProblemSpec,
    p: Norm,
    radius: f64,
    samples: &[Sample],
) -> Result<Vec<f64>> {
    if radius == 0.0 {
        // The localization ball degenerated to the origin.
        return Ok(vec![0.0; spec.dimension()]);
    }
    let run = match AlgKind::for_norm(p) {
        AlgKind::AdaSgd => ada_sgd(spec, radius, samples, false)?,
        AlgKind::AdaEmd => ada_emd(spec, radius, samples, false)?,
        AlgKind::AdaGrad => ada_grad(spec, radius, samples, false)?,
    };
    Ok(run.average_iterate)
}

fn split_even(samples: &[Sample]) -> Result<(&[Sample], &[Sample])> {
    if samples.len() < 4 || samples.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "need an even sample count of at least 4, got {}",
            samples.len()
        )));
    }
    let n = samples.len() / 2;
    let (a, b) = samples.split_at(n);
    #[cfg(debug_assertions)]
    {
        let ids: std::collections::BTreeSet<u64> = a.iter().map(|s| s.id).collect();
        debug_assert!(b.iter().all(|t| !ids.contains(&t.id)), "sample halves share ids");
    }
    Ok((a, b))
}

fn adaptive_with_lambda(
    spec: &ProblemSpec,
    samples: &[Sample],
    p: Norm,
    lambda: f64,
    lipschitz_input: f64,
    delta: f64,
    erm_cfg: &ErmConfig,
) -> Result<AdaptiveResult> {
    let (first, second) = split_even(samples)?;
    let erm = regularized_erm(spec, first, lambda, p, erm_cfg)?;
    let radius = 3.0 * norm(&erm.minimizer, p);
    let output = run_geometry_algorithm(spec, p, radius, second)?;
    debug_assert!(norm(&output, p) <= radius + 1e-9);
    Ok(AdaptiveResult {
        output,
        stage1_radius: radius,
        erm,
        row: GeometryRow { norm: p, lambda, algorithm: AlgKind::for_norm(p), lipschitz_input },
        sample_split: (first.len(), second.len()),
        nominal_failure: 3.0 * delta,
    })
}

/// Two-stage distance-adaptive method: lambda and the regularized ERM use
/// the first half of `samples`, the geometry's optimizer runs on the fresh
/// second half inside the ball of radius 3 ||x_hat||.
pub fn optimal_adaptive(
    spec: &ProblemSpec,
    samples: &[Sample],
    p: Norm,
    delta: f64,
    erm_cfg: &ErmConfig,
    strategy: &LambdaStrategy,
) -> Result<AdaptiveResult> {
    let (first, _) = split_even(samples)?;
    let lambda = compute_lambda(spec, first, p, delta, strategy)?;
    let lip = spec.lipschitz_for(p).ok_or(Error::MissingLipschitz)?;
    adaptive_with_lambda(spec, samples, p, lambda, lip, delta, erm_cfg)
}

/// Result of the lambda grid search.
#[derive(Debug, Clone)]
pub struct GridAdaptiveResult {
    pub outcome: SelectionOutcome,
    /// Candidate runs, one per grid point (index k corresponds to candidate
    /// k + 1 of the selection, index 0 being the zero reference).
    pub candidates: Vec<AdaptiveResult>,
    pub grid: Vec<f64>,
    pub lambda0: f64,
    /// Output of the selected candidate (zeros when the reference wins).
    pub selected_output: Vec<f64>,
    pub nominal_failure: f64,
}

/// Grid search over the regularization weight, scored by reliable model
/// selection on held-out validation samples.
///
/// The grid is lambda_k = e^k lambda_0 for k = 1..=K with
/// K = max(1, ceil(ln l_p)) and
/// lambda_0 = 7 sqrt(ln(30/delta)/(n-1)) + 50 ln(30/delta)/(n-1); l_p is the
/// geometry's Lipschitz scale (overridable when only a range is known).
pub fn lambda_grid_adaptive(
    spec: &ProblemSpec,
    train: &[Sample],
    validation: &[Sample],
    p: Norm,
    delta: f64,
    gamma: f64,
    erm_cfg: &ErmConfig,
    lipschitz_scale: Option<f64>,
) -> Result<GridAdaptiveResult> {
    let (first, _) = split_even(train)?;
    if validation.is_empty() {
        return Err(Error::TooFewSamples { need: 2, got: 0 });
    }
    let scale = match lipschitz_scale {
        Some(s) => s,
        None => spec.lipschitz_for(p).ok_or(Error::MissingLipschitz)?,
    };
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter("Lipschitz scale must be positive".into()));
    }
    let n = first.len() as f64;
    let l30 = (30.0 / delta).ln();
    let lambda0 = 7.0 * (l30 / (n - 1.0)).sqrt() + 50.0 * l30 / (n - 1.0);
    let k_p = grid_size(scale);
    let grid: Vec<f64> = (1..=k_p).map(|k| (k as f64).exp() * lambda0).collect();
    let mut candidates = Vec::with_capacity(k_p);
    for &lambda in &grid {
        candidates.push(adaptive_with_lambda(spec, train, p, lambda, scale, delta, erm_cfg)?);
    }
    // Validation losses for the zero reference plus each grid output.
    let mut columns = vec![vec![0.0; validation.len()]; k_p + 1];
    let zero = vec![0.0; spec.dimension()];
    for (i, s) in validation.iter().enumerate() {
        columns[0][i] = spec.loss(&zero, s);
        for (k, cand) in candidates.iter().enumerate() {
            columns[k + 1][i] = spec.loss(&cand.output, s);
        }
    }
    let losses = LossMatrix::from_columns(&columns)?;
    let mut x_norms = vec![0.0];
    x_norms.extend(candidates.iter().map(|c| norm(&c.output, p)));
    let widths = widths_theory(&losses, scale, &x_norms, delta)?;
    let outcome = reliable_select(&losses, &widths, gamma)?;
    let selected_output = if outcome.chosen == 0 {
        zero
    } else {
        candidates[outcome.chosen - 1].output.clone()
    };
    Ok(GridAdaptiveResult {
        outcome,
        candidates,
        grid,
        lambda0,
        selected_output,
        nominal_failure: 4.0 * delta,
    })
}

/// K_p = 1 v ceil(ln l_p).
pub fn grid_size(lipschitz_scale: f64) -> usize {
    let k = lipschitz_scale.ln().ceil();
    if k < 1.0 {
        1
    } else {
        k as usize
    }
}

/// Result of the three-geometry combiner.
#[derive(Debug, Clone)]
pub struct MultiGeometryResult {
    pub outcome: SelectionOutcome,
    /// Candidates in table order: l2, l1, l-infinity (selection indices
    /// 1, 2, 3; index 0 is the zero reference).
    pub candidates: Vec<AdaptiveResult>,
    pub widths: ConfidenceWidths,
    pub selected_output: Vec<f64>,
    /// 3 runs at 3 delta each plus the width event.
    pub nominal_failure: f64,
}

/// Run the two-stage method once per geometry row on the first 2n samples,
/// then pick among the three outputs (and the zero reference) by reliable
/// selection on the last n samples, with widths
/// tau_k = sqrt(2 s_k^2 ln(12/delta)/n)
///       + (14/3) (ln(12/delta)/(n-1)) min(Lhat ||x||_2, linf_hat ||x||_1, l1_hat ||x||_inf).
pub fn multi_geometry(
    spec: &ProblemSpec,
    samples: &[Sample],
    delta: f64,
    gamma: f64,
    erm_cfg: &ErmConfig,
    strategy: &LambdaStrategy,
) -> Result<MultiGeometryResult> {
    if samples.len() < 6 || samples.len() % 3 != 0 {
        return Err(Error::InvalidParameter(format!(
            "need a sample count divisible by 3 and at least 6, got {}",
            samples.len()
        )));
    }
    let n = samples.len() / 3;
    let train = &samples[..2 * n];
    let validation = &samples[2 * n..];
    let (first, _) = split_even(train)?;
    let view = match strategy {
        LambdaStrategy::Exact1d => EmpiricalView::General { spec, samples: first },
        _ => EmpiricalView::build(spec, first),
    };
    let sups = sup_deltas(spec, &view, strategy)?;
    let lip_l2 = spec.lipschitz_for(Norm::L2).ok_or(Error::MissingLipschitz)?;
    let lip_inf_of_coord = spec.lipschitz_for(Norm::L1).ok_or(Error::MissingLipschitz)?;
    let lip_l1_of_coord = spec.lipschitz_for(Norm::Linf).ok_or(Error::MissingLipschitz)?;
    let mut candidates = Vec::with_capacity(3);
    for p in [Norm::L2, Norm::L1, Norm::Linf] {
        let (lambda, lip) = lambda_from_sups(spec, p, first.len(), delta, &sups)?;
        candidates.push(adaptive_with_lambda(spec, train, p, lambda, lip, delta, erm_cfg)?);
    }
    let zero = vec![0.0; spec.dimension()];
    let mut columns = vec![vec![0.0; n]; 4];
    for (i, s) in validation.iter().enumerate() {
        columns[0][i] = spec.loss(&zero, s);
        for (k, cand) in candidates.iter().enumerate() {
            columns[k + 1][i] = spec.loss(&cand.output, s);
        }
    }
    let losses = LossMatrix::from_columns(&columns)?;
    let l12 = (12.0 / delta).ln();
    let nf = n as f64;
    let mut tau = vec![0.0];
    for cand in &candidates {
        let k = tau.len();
        let s2 = losses.diff_sample_variance(k);
        let q = (lip_l2 * norm(&cand.output, Norm::L2))
            .min(lip_inf_of_coord * norm(&cand.output, Norm::L1))
            .min(lip_l1_of_coord * norm(&cand.output, Norm::Linf));
        tau.push((2.0 * s2 * l12 / nf).sqrt() + (14.0 / 3.0) * (l12 / (nf - 1.0)) * q);
    }
    let widths = ConfidenceWidths::custom(tau)?;
    let outcome = reliable_select(&losses, &widths, gamma)?;
    let selected_output = if outcome.chosen == 0 {
        zero
    } else {
        candidates[outcome.chosen - 1].output.clone()
    };
    Ok(MultiGeometryResult {
        outcome,
        candidates,
        widths,
        selected_output,
        nominal_failure: 10.0 * delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::sample_batch;
    use crate::rng::tag;

    #[test]
    fn lambda_zero_variance_matches_formula() {
        // Deterministic gradients: the noiseless Euclidean-norm family has
        // D identically 0, so only the linear term survives:
        // lambda = 20 Lhat ln(6/delta) / (n - 1).
        let spec = ProblemSpec::euclidean_hinge(vec![1.0, 0.0], 0.0).unwrap();
        let samples = sample_batch(&spec, 101, tag("lam0")).unwrap();
        let lam = compute_lambda(
            &spec,
            &samples,
            Norm::L2,
            0.06,
            &LambdaStrategy::GridSup(ProbeGrid::default()),
        )
        .unwrap();
        // The empirical variance of identical gradients carries float
        // rounding of order 1e-16, which enters under a square root.
        let expect = 20.0 * (100.0f64).ln() / 100.0;
        assert!((lam - expect).abs() < 1e-6, "{lam} vs {expect}");
        assert!((lam - 0.9210340).abs() < 1e-6);
    }

    #[test]
    fn envelope_dominates_grid_sup() {
        let spec = ProblemSpec::sparse_optimum_l1(5, 1.0).unwrap();
        let samples = sample_batch(&spec, 400, tag("lam-dom")).unwrap();
        for p in [Norm::L2, Norm::L1, Norm::Linf] {
            let env =
                compute_lambda(&spec, &samples, p, 0.1, &LambdaStrategy::LipschitzEnvelope)
                    .unwrap();
            let grid = compute_lambda(
                &spec,
                &samples,
                p,
                0.1,
                &LambdaStrategy::GridSup(ProbeGrid::default()),
            )
            .unwrap();
            assert!(env >= grid - 1e-12, "{p:?}: envelope {env} < grid {grid}");
        }
    }

    #[test]
    fn exact1d_matches_dense_grid() {
        let spec = ProblemSpec::abs_linear_adversarial(3000, 1.0).unwrap();
        let samples = sample_batch(&spec, 500, tag("lam-1d")).unwrap();
        let exact =
            compute_lambda(&spec, &samples, Norm::L2, 0.1, &LambdaStrategy::Exact1d).unwrap();
        let grid = compute_lambda(
            &spec,
            &samples,
            Norm::L2,
            0.1,
            &LambdaStrategy::GridSup(ProbeGrid { lo: -3.0, hi: 3.0, steps: 601, ..ProbeGrid::default() }),
        )
        .unwrap();
        assert!((exact - grid).abs() < 1e-9, "{exact} vs {grid}");
    }

    #[test]
    fn grid_size_examples() {
        assert_eq!(grid_size(std::f64::consts::E.powi(3)), 3);
        assert_eq!(grid_size(std::f64::consts::E), 1);
        assert_eq!(grid_size(0.5), 1);
        assert_eq!(grid_size(20.0), 3);
    }

    #[test]
    fn degenerate_radius_outputs_origin() {
        // Noiseless instance with optimum at the origin: the ERM stays at 0
        // for any positive lambda, the ball degenerates, and the output is
        // exactly zero rather than an error.
        let spec = ProblemSpec::new(crate::problems::Family::SparseOptimumL1 {
            dim: 3,
            scale: 0.0,
            kink_mass: 0.0,
        })
        .unwrap();
        let samples = sample_batch(&spec, 200, tag("deg")).unwrap();
        let res = optimal_adaptive(
            &spec,
            &samples,
            Norm::L2,
            0.1,
            &ErmConfig::default(),
            &LambdaStrategy::LipschitzEnvelope,
        )
        .unwrap();
        assert_eq!(res.stage1_radius, 0.0);
        assert_eq!(res.output, vec![0.0; 3]);
    }

    #[test]
    fn split_hygiene() {
        let spec = ProblemSpec::abs_linear_adversarial(3000, 1.0).unwrap();
        let samples = sample_batch(&spec, 9, tag("split")).unwrap();
        assert!(optimal_adaptive(
            &spec,
            &samples,
            Norm::L2,
            0.1,
            &ErmConfig::default(),
            &LambdaStrategy::Exact1d
        )
        .is_err());
        // Three-way split shares no ids across stages by construction.
        let samples = sample_batch(&spec, 12, tag("split3")).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for s in &samples {
            assert!(seen.insert(s.id));
        }
    }
}
