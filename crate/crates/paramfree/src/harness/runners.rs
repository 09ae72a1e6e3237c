//! The six experiment runners. Each one resolves its configuration, runs
//! seeded trials (in parallel, keyed by trial index so scheduling cannot
//! change results), and emits per-trial rows plus summary statistics.

use rayon::prelude::*;

use super::{fmt_f64, loglog_slope, median, quantile, ExperimentConfig, ExperimentReport, Resolver};
use crate::adaptive::{multi_geometry, optimal_adaptive, LambdaStrategy, ProbeGrid};
use crate::concentration::{
    dependent_sum_bound, empirical_bennett_width, hoeffding_width, vec_inf_width, vec_l1_width,
    vec_l2_width, Sided, SubGammaTail,
};
use crate::optimizers::{ada_sgd, ErmConfig, ErmSolverChoice};
use crate::problems::{sample_batch, ProblemSpec, Sample};
use crate::rng::{mix2, tag, CounterRng};
use crate::selection::{reliable_select, standard_select, widths_practical, ConfidenceWidths};
use crate::{norm, widths_theory, Error, LossMatrix, Norm, Result};

/// Family parameters resolved from config; `n_cal = None` means "use the
/// experiment's current n", which matters for the adversarial family whose
/// Bernoulli bias is calibrated to the sample size.
#[derive(Debug, Clone)]
enum FamilyCfg {
    AbsLinear { n_cal: Option<usize>, shift: f64 },
    StronglyConvex { mu: f64, optimum: f64, halfwidth: f64 },
    EuclideanHinge { dim: usize, scale: f64, noise: f64 },
    SparseL1 { dim: usize, scale: f64, kink_mass: f64 },
    DenseLinf { dim: usize, scale: f64, kink_mass: f64 },
    Logistic { classes: usize, features: usize },
}

impl FamilyCfg {
    fn resolve(r: &Resolver<'_>, default_name: &str) -> Result<FamilyCfg> {
        let name = r.str_or("family", default_name);
        Ok(match name.as_str() {
            "abs_linear_adversarial" => {
                let n_cal = match r.str_or("family.n_cal", "auto").as_str() {
                    "auto" => None,
                    other => Some(
                        other
                            .parse()
                            .map_err(|_| Error::Config("family.n_cal must be an integer or auto".into()))?,
                    ),
                };
                FamilyCfg::AbsLinear { n_cal, shift: r.f64_or("family.shift", 1.0)? }
            }
            "strongly_convex_1d" => FamilyCfg::StronglyConvex {
                mu: r.f64_or("family.mu", 1.0)?,
                optimum: r.f64_or("family.optimum", 1.0)?,
                halfwidth: r.f64_or("family.halfwidth", 4.0)?,
            },
            "euclidean_hinge" => FamilyCfg::EuclideanHinge {
                dim: r.usize_or("family.dim", 4)?,
                scale: r.f64_or("family.scale", 1.0)?,
                noise: r.f64_or("family.noise", 0.5)?,
            },
            "sparse_optimum_l1" => FamilyCfg::SparseL1 {
                dim: r.usize_or("family.dim", 50)?,
                scale: r.f64_or("family.scale", 1.0)?,
                kink_mass: r.f64_or("family.kink_mass", 0.1)?,
            },
            "dense_optimum_linf" => FamilyCfg::DenseLinf {
                dim: r.usize_or("family.dim", 50)?,
                scale: r.f64_or("family.scale", 1.0)?,
                kink_mass: r.f64_or("family.kink_mass", 0.1)?,
            },
            "multiclass_logistic" => FamilyCfg::Logistic {
                classes: r.usize_or("family.classes", 3)?,
                features: r.usize_or("family.features", 8)?,
            },
            other => return Err(Error::Config(format!("unknown family {other:?}"))),
        })
    }

    fn build(&self, n: usize) -> Result<ProblemSpec> {
        match self {
            FamilyCfg::AbsLinear { n_cal, shift } => {
                ProblemSpec::abs_linear_adversarial(n_cal.unwrap_or(n), *shift)
            }
            FamilyCfg::StronglyConvex { mu, optimum, halfwidth } => {
                ProblemSpec::strongly_convex_1d(*mu, *optimum, *halfwidth)
            }
            FamilyCfg::EuclideanHinge { dim, scale, noise } => {
                let mut optimum = vec![0.0; *dim];
                optimum[0] = *scale;
                ProblemSpec::euclidean_hinge(optimum, *noise)
            }
            FamilyCfg::SparseL1 { dim, scale, kink_mass } => {
                ProblemSpec::new(crate::problems::Family::SparseOptimumL1 {
                    dim: *dim,
                    scale: *scale,
                    kink_mass: *kink_mass,
                })
            }
            FamilyCfg::DenseLinf { dim, scale, kink_mass } => {
                ProblemSpec::new(crate::problems::Family::DenseOptimumLinf {
                    dim: *dim,
                    scale: *scale,
                    kink_mass: *kink_mass,
                })
            }
            FamilyCfg::Logistic { classes, features } => {
                ProblemSpec::multiclass_logistic(*classes, *features)
            }
        }
    }
}

fn lambda_strategy(r: &Resolver<'_>) -> Result<LambdaStrategy> {
    Ok(match r.str_or("lambda_strategy", "envelope").as_str() {
        "envelope" => LambdaStrategy::LipschitzEnvelope,
        "grid" => LambdaStrategy::GridSup(ProbeGrid {
            lo: r.f64_or("grid.lo", -2.0)?,
            hi: r.f64_or("grid.hi", 2.0)?,
            steps: r.usize_or("grid.steps", 9)?,
            include_axes: true,
            include_diagonal: true,
        }),
        "exact1d" => LambdaStrategy::Exact1d,
        other => return Err(Error::Config(format!("unknown lambda_strategy {other:?}"))),
    })
}

fn erm_config(r: &Resolver<'_>) -> Result<ErmConfig> {
    Ok(ErmConfig {
        tol_rel: r.f64_or("erm.tol_rel", 1e-6)?,
        max_iters: r.usize_or("erm.max_iters", 4000)?,
        solver: match r.str_or("erm.solver", "auto").as_str() {
            "auto" => ErmSolverChoice::Auto,
            "exact1d" => ErmSolverChoice::Exact1d,
            "generic" => ErmSolverChoice::Generic,
            other => return Err(Error::Config(format!("unknown erm.solver {other:?}"))),
        },
    })
}

fn parse_norm(r: &Resolver<'_>, key: &str, default: &str) -> Result<Norm> {
    r.str_or(key, default).parse()
}

/// Projected SGD with step 1/(mu t) and t-weighted averaging; the baseline
/// method swept over a mu grid by the strong-convexity experiment.
fn sc_sgd(spec: &ProblemSpec, mu_step: f64, samples: &[Sample]) -> Vec<f64> {
    let d = spec.dimension();
    let domain = spec.domain();
    let mut u = vec![0.0; d];
    let mut wavg = vec![0.0; d];
    let mut wsum = 0.0;
    let mut g = vec![0.0; d];
    for (t, s) in samples.iter().enumerate() {
        let w = (t + 1) as f64;
        for j in 0..d {
            wavg[j] += w * u[j];
        }
        wsum += w;
        spec.subgradient(&u, s, &mut g);
        let step = 1.0 / (mu_step * (t + 1) as f64);
        for j in 0..d {
            u[j] = domain.clamp1d(u[j] - step * g[j]);
        }
    }
    for v in wavg.iter_mut() {
        *v /= wsum;
    }
    wavg
}

// ---------------------------------------------------------------------------
// lowerbound
// ---------------------------------------------------------------------------

/// Greedy learning-rate tuning failure experiment: AdaSGD over a grid of
/// rates e^0..e^{K} on the adversarial instance with its optimum at the
/// origin, scored by standard and reliable selection on a fresh validation
/// half. Records the frequency of
/// F(greedy) - F* >= eta_max / (288 sqrt(n)).
pub fn run_lowerbound(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "lowerbound");
    let n = r.usize_or("n", 3000)?;
    if n < 3000 {
        return Err(Error::Config(format!(
            "lowerbound requires n >= 3000 (construction hypothesis), got {n}"
        )));
    }
    let family = r.str_or("family", "abs_linear_adversarial");
    if family != "abs_linear_adversarial" {
        return Err(Error::Config("lowerbound only runs on abs_linear_adversarial".into()));
    }
    let trials = r.trials_or(20000)?;
    let seed = r.seed()?;
    let delta = r.delta()?;
    let gamma = r.gamma()?;
    let rates = r.usize_or("rates", 7)?;
    if rates == 0 {
        return Err(Error::Config("rates must be at least 1".into()));
    }
    // The construction itself: optimum at the origin, bias calibrated to n.
    if r.str_or("family.shift", "0") != "0" {
        return Err(Error::Config("lowerbound pins family.shift=0".into()));
    }
    let n_cal = r.str_or("family.n_cal", &n.to_string());
    if n_cal != n.to_string() && n_cal != "auto" {
        return Err(Error::Config("lowerbound pins family.n_cal to n".into()));
    }
    let spec = ProblemSpec::abs_linear_adversarial(n, 0.0)?;
    let oracle = spec.population_oracle()?;
    let etas: Vec<f64> = (0..rates).map(|k| (k as f64).exp()).collect();
    let eta_max = *etas.last().unwrap();
    let threshold = eta_max / (288.0 * (n as f64).sqrt());

    let stream = tag("harness.lowerbound");
    let outcomes: Vec<(usize, usize, f64, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(usize, usize, f64, f64, bool)> {
            let batch = sample_batch(&spec, 2 * n, mix2(mix2(seed, stream), t as u64))?;
            let (val, train) = batch.split_at(n);
            let mut cands = Vec::with_capacity(rates);
            for &eta in &etas {
                cands.push(ada_sgd(&spec, eta, train, false)?.average_iterate[0]);
            }
            let mut columns = vec![vec![0.0; n]; rates + 1];
            for (i, s) in val.iter().enumerate() {
                columns[0][i] = spec.loss(&[0.0], s);
                for (k, &x) in cands.iter().enumerate() {
                    columns[k + 1][i] = spec.loss(&[x], s);
                }
            }
            let losses = LossMatrix::from_columns(&columns)?;
            let greedy = standard_select(&losses)?;
            let mut x_norms = vec![0.0];
            x_norms.extend(cands.iter().map(|c| c.abs()));
            let widths = widths_theory(&losses, 1.0, &x_norms, delta)?;
            let rely = reliable_select(&losses, &widths, gamma)?;
            let at = |k: usize| if k == 0 { 0.0 } else { cands[k - 1] };
            let gsub = oracle.suboptimality(&[at(greedy.chosen)]);
            let rsub = oracle.suboptimality(&[at(rely.chosen)]);
            Ok((greedy.chosen, rely.chosen, gsub, rsub, gsub >= threshold))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .enumerate()
        .map(|(t, (gk, rk, gs, rs, ind))| {
            vec![
                t.to_string(),
                gk.to_string(),
                rk.to_string(),
                fmt_f64(*gs),
                fmt_f64(*rs),
                (*ind as u8).to_string(),
            ]
        })
        .collect();
    let hits = outcomes.iter().filter(|o| o.4).count();
    let greedy_mean = outcomes.iter().map(|o| o.2).sum::<f64>() / trials as f64;
    let rely_mean = outcomes.iter().map(|o| o.3).sum::<f64>() / trials as f64;
    let summary = vec![
        ("eta_max".to_string(), fmt_f64(eta_max)),
        ("threshold".to_string(), fmt_f64(threshold)),
        ("indicator_count".to_string(), hits.to_string()),
        ("indicator_freq".to_string(), fmt_f64(hits as f64 / trials as f64)),
        ("greedy_mean_subopt".to_string(), fmt_f64(greedy_mean)),
        ("reliable_mean_subopt".to_string(), fmt_f64(rely_mean)),
    ];
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["trial", "greedy_k", "reliable_k", "greedy_subopt", "reliable_subopt", "indicator"],
        rows,
        summary,
    ))
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

/// Suboptimality-vs-n sweep for a configured method (known-radius AdaSGD,
/// the two-stage adaptive method, or the three-geometry combiner), with a
/// fitted log-log slope of the per-n median suboptimality.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "scaling");
    let method = r.str_or("method", "ada_sgd_known_r");
    let ns = r.n_grid("n", "250,500,1000,2000,4000")?;
    let trials = r.trials_or(500)?;
    let seed = r.seed()?;
    let delta = r.delta()?;
    let family = FamilyCfg::resolve(&r, "abs_linear_adversarial")?;
    let strategy = lambda_strategy(&r)?;
    let erm_cfg = erm_config(&r)?;
    let p = parse_norm(&r, "p", "2")?;
    let gamma = r.gamma()?;
    let bound_const = r.f64_or("bound_const", 10.0)?;
    let radius_cfg = r.str_or("radius", "auto");

    let stream = tag("harness.scaling");
    let mut rows = Vec::new();
    let mut medians = Vec::new();
    let mut summary = Vec::new();
    for &n in &ns {
        let spec = family.build(n)?;
        let oracle = spec.population_oracle()?;
        let results: Vec<(f64, f64, f64, u8)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64, f64, u8)> {
                let tseed = mix2(mix2(mix2(seed, stream), n as u64), t as u64);
                match method.as_str() {
                    "ada_sgd_known_r" => {
                        let radius = match radius_cfg.as_str() {
                            "auto" => oracle.d_star(Norm::L2),
                            s => s
                                .parse::<f64>()
                                .map_err(|_| Error::Config("radius must be a number or auto".into()))?,
                        };
                        let samples = sample_batch(&spec, n, tseed)?;
                        let run = ada_sgd(&spec, radius, &samples, false)?;
                        let sub = oracle.suboptimality(&run.average_iterate);
                        Ok((sub, radius, 0.0, 0))
                    }
                    "optimal_adaptive" => {
                        let samples = sample_batch(&spec, 2 * n, tseed)?;
                        let res = optimal_adaptive(&spec, &samples, p, delta, &erm_cfg, &strategy)?;
                        let sub = oracle.suboptimality(&res.output);
                        Ok((
                            sub,
                            res.stage1_radius,
                            res.row.lambda,
                            res.erm.residual_above_tolerance as u8,
                        ))
                    }
                    "multi_geometry" => {
                        let samples = sample_batch(&spec, 3 * n, tseed)?;
                        let res =
                            multi_geometry(&spec, &samples, delta, gamma, &erm_cfg, &strategy)?;
                        let sub = oracle.suboptimality(&res.selected_output);
                        Ok((sub, 0.0, 0.0, 0))
                    }
                    other => Err(Error::Config(format!("unknown scaling method {other:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for (t, (sub, radius, lambda, flag)) in results.iter().enumerate() {
            rows.push(vec![
                n.to_string(),
                t.to_string(),
                fmt_f64(*sub),
                fmt_f64(*radius),
                fmt_f64(*lambda),
                flag.to_string(),
            ]);
        }
        let subs: Vec<f64> = results.iter().map(|r| r.0).collect();
        let med = median(&subs);
        medians.push(med);
        summary.push((format!("median_n{n}"), fmt_f64(med)));
        summary.push((format!("q90_n{n}"), fmt_f64(quantile(&subs, 0.9))));
        if method == "ada_sgd_known_r" {
            let l = spec.lipschitz_l2().ok_or(Error::MissingLipschitz)?;
            let radius = match radius_cfg.as_str() {
                "auto" => oracle.d_star(Norm::L2),
                s => s.parse::<f64>().unwrap_or(f64::NAN),
            };
            let bound = bound_const * l * radius * (2.0f64 / delta).ln().sqrt() / (n as f64).sqrt();
            summary.push((format!("bound_n{n}"), fmt_f64(bound)));
        }
    }
    if ns.len() >= 2 {
        let (slope, se) = loglog_slope(&ns, &medians);
        summary.push(("slope".to_string(), fmt_f64(slope)));
        summary.push(("slope_se".to_string(), fmt_f64(se)));
    }
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["n", "trial", "subopt", "radius", "lambda", "erm_flag"],
        rows,
        summary,
    ))
}

// ---------------------------------------------------------------------------
// concentration
// ---------------------------------------------------------------------------

struct McDesign {
    name: &'static str,
    n: usize,
    d: usize,
    trials: usize,
}

/// Monte-Carlo coverage of every width formula: observed violation rate
/// must stay below delta + 3 binomial standard deviations.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "concentration");
    let seed = r.seed()?;
    let delta = r.delta()?;
    let trials_scalar = r.usize_or("trials_scalar", 100_000)?;
    let trials_vector = r.usize_or("trials_vector", 10_000)?;
    if trials_scalar == 0 || trials_vector == 0 {
        return Err(Error::Config("trial counts must be positive".into()));
    }

    let designs = [
        McDesign { name: "hoeffding", n: 100, d: 1, trials: trials_scalar },
        McDesign { name: "empirical_bennett", n: 200, d: 1, trials: trials_scalar },
        McDesign { name: "vec_l2", n: 200, d: 5, trials: trials_vector },
        McDesign { name: "vec_inf", n: 200, d: 10, trials: trials_vector },
        McDesign { name: "vec_l1", n: 200, d: 10, trials: trials_vector },
        McDesign { name: "dependent_sum", n: 1, d: 10, trials: trials_scalar },
    ];

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut all_pass = true;
    for design in &designs {
        let violations = mc_violations(design, seed, delta)?;
        let rate = violations as f64 / design.trials as f64;
        let threshold = delta + 3.0 * (delta * (1.0 - delta) / design.trials as f64).sqrt();
        let pass = rate <= threshold;
        all_pass &= pass;
        rows.push(vec![
            design.name.to_string(),
            design.n.to_string(),
            design.d.to_string(),
            fmt_f64(delta),
            design.trials.to_string(),
            violations.to_string(),
            fmt_f64(rate),
            fmt_f64(threshold),
            (pass as u8).to_string(),
        ]);
        summary.push((format!("rate_{}", design.name), fmt_f64(rate)));
    }
    summary.push(("all_pass".to_string(), (all_pass as u8).to_string()));
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["bound", "n", "d", "delta", "trials", "violations", "rate", "threshold", "pass"],
        rows,
        summary,
    ))
}

fn mc_violations(design: &McDesign, seed: u64, delta: f64) -> Result<usize> {
    let stream = mix2(mix2(seed, tag("harness.concentration")), tag(design.name));
    let n = design.n;
    let d = design.d;
    match design.name {
        "hoeffding" => {
            let width = hoeffding_width(1.0, n, delta, Sided::Two)?;
            Ok((0..design.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = CounterRng::new(mix2(stream, t as u64));
                    let mean =
                        (0..n).map(|_| rng.bernoulli(0.5) as u64 as f64).sum::<f64>() / n as f64;
                    ((mean - 0.5).abs() > width) as usize
                })
                .sum())
        }
        "empirical_bennett" => Ok((0..design.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = CounterRng::new(mix2(stream, t as u64));
                let values: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
                let mean = values.iter().sum::<f64>() / n as f64;
                let width = empirical_bennett_width(&values, 1.0, delta, Sided::Two).unwrap();
                ((mean - 0.5).abs() > width) as usize
            })
            .sum()),
        "vec_l2" => Ok((0..design.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = CounterRng::new(mix2(stream, t as u64));
                let mut buf = Vec::new();
                let vectors: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        rng.unit_sphere(d, &mut buf);
                        buf.clone()
                    })
                    .collect();
                let width = vec_l2_width(&vectors, 1.0, delta).unwrap();
                let mut mean = vec![0.0; d];
                for v in &vectors {
                    for j in 0..d {
                        mean[j] += v[j];
                    }
                }
                for m in mean.iter_mut() {
                    *m /= n as f64;
                }
                (norm(&mean, Norm::L2) > width) as usize
            })
            .sum()),
        "vec_inf" | "vec_l1" => {
            let is_inf = design.name == "vec_inf";
            let env = vec![1.0; d];
            Ok((0..design.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = CounterRng::new(mix2(stream, t as u64));
                    let vectors: Vec<Vec<f64>> = (0..n)
                        .map(|_| (0..d).map(|_| rng.rademacher() as f64).collect())
                        .collect();
                    let mut mean = vec![0.0; d];
                    for v in &vectors {
                        for j in 0..d {
                            mean[j] += v[j];
                        }
                    }
                    for m in mean.iter_mut() {
                        *m /= n as f64;
                    }
                    if is_inf {
                        let width = vec_inf_width(&vectors, &env, delta).unwrap();
                        (norm(&mean, Norm::Linf) > width) as usize
                    } else {
                        let width = vec_l1_width(&vectors, &env, delta).unwrap();
                        (norm(&mean, Norm::L1) > width) as usize
                    }
                })
                .sum())
        }
        "dependent_sum" => {
            // Fully correlated coordinates: X_j = |Z| for a single
            // Z ~ N(0, 1/2), whose marginal satisfies
            // P(|Z| >= sqrt(ln 1/q)) <= q for every q (half-Gaussian tail
            // bound), i.e. the sub-gamma hypothesis with a = 1, b = 0.
            let tails = vec![SubGammaTail { a: 1.0, b: 0.0 }; d];
            let bound = dependent_sum_bound(&tails, delta)?;
            Ok((0..design.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = CounterRng::new(mix2(stream, t as u64));
                    let z = rng.normal() * std::f64::consts::FRAC_1_SQRT_2;
                    (d as f64 * z.abs() > bound) as usize
                })
                .sum())
        }
        other => Err(Error::Config(format!("unknown design {other}"))),
    }
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

/// Offline selection over an ingested loss-matrix CSV, emitting greedy and
/// reliable outcomes side by side.
pub fn run_select(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "select");
    let path = r.str_required("csv")?;
    let gamma = r.gamma()?;
    let text = std::fs::read_to_string(&path)?;
    let losses = super::parse_loss_csv(&text)?;
    let widths = if let Some(raw) = cfg.get("tau") {
        r.str_or("tau", raw);
        let tau = parse_f64_list(raw)?;
        ConfidenceWidths::custom(tau)?
    } else if let Some(raw) = cfg.get("m_values") {
        r.str_or("m_values", raw);
        let m = parse_f64_list(raw)?;
        widths_practical(&losses, &m)?
    } else {
        return Err(Error::Config("select needs either tau=... or m_values=...".into()));
    };
    let greedy = standard_select(&losses)?;
    let rely = reliable_select(&losses, &widths, gamma)?;
    let safe = rely.safe_set.clone().unwrap_or_default();
    let mut rows = Vec::new();
    for k in 0..=losses.k() {
        rows.push(vec![
            k.to_string(),
            fmt_f64(losses.mean(k)),
            fmt_f64(widths.tau[k]),
            (safe.contains(&k) as u8).to_string(),
            ((rely.chosen == k) as u8).to_string(),
            ((greedy.chosen == k) as u8).to_string(),
        ]);
    }
    let summary = vec![
        ("n".to_string(), losses.n().to_string()),
        ("candidates".to_string(), (losses.k() + 1).to_string()),
        ("theta".to_string(), fmt_f64(rely.theta.unwrap())),
        ("greedy_chosen".to_string(), greedy.chosen.to_string()),
        ("reliable_chosen".to_string(), rely.chosen.to_string()),
    ];
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["k", "mean", "tau", "in_safe_set", "reliable_chosen", "greedy_chosen"],
        rows,
        summary,
    ))
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("expected a number, got {p:?}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// adaptive
// ---------------------------------------------------------------------------

/// Distance-adaptive pipeline trials: per-geometry two-stage runs
/// (p in {2, 1, inf}) or the three-geometry combiner (p = all).
pub fn run_adaptive(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "adaptive");
    let n = r.usize_or("n", 3000)?;
    let trials = r.trials_or(500)?;
    let seed = r.seed()?;
    let delta = r.delta()?;
    let gamma = r.gamma()?;
    let family = FamilyCfg::resolve(&r, "abs_linear_adversarial")?;
    let strategy = lambda_strategy(&r)?;
    let erm_cfg = erm_config(&r)?;
    let p_raw = r.str_or("p", "2");
    let spec = family.build(n)?;
    let oracle = spec.population_oracle()?;
    let stream = tag("harness.adaptive");

    if p_raw == "all" {
        let results: Vec<MultiTrial> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<MultiTrial> {
                let samples = sample_batch(&spec, 3 * n, mix2(mix2(seed, stream), t as u64))?;
                let res = multi_geometry(&spec, &samples, delta, gamma, &erm_cfg, &strategy)?;
                let subs: Vec<f64> =
                    res.candidates.iter().map(|c| oracle.suboptimality(&c.output)).collect();
                let sel = oracle.suboptimality(&res.selected_output);
                let tau = &res.widths.tau;
                let keylemma = (1..=3)
                    .map(|k| subs[k - 1] + (1.0 + gamma) * tau[k])
                    .fold(f64::INFINITY, f64::min)
                    + 1e-12
                    >= sel;
                Ok(MultiTrial {
                    chosen: res.outcome.chosen,
                    selected_subopt: sel,
                    candidate_subopts: [subs[0], subs[1], subs[2]],
                    taus: [tau[1], tau[2], tau[3]],
                    keylemma,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<String>> = results
            .iter()
            .enumerate()
            .map(|(t, m)| {
                vec![
                    t.to_string(),
                    m.chosen.to_string(),
                    fmt_f64(m.selected_subopt),
                    fmt_f64(m.candidate_subopts[0]),
                    fmt_f64(m.candidate_subopts[1]),
                    fmt_f64(m.candidate_subopts[2]),
                    fmt_f64(m.taus[0]),
                    fmt_f64(m.taus[1]),
                    fmt_f64(m.taus[2]),
                    (m.keylemma as u8).to_string(),
                ]
            })
            .collect();
        let keylemma_rate =
            results.iter().filter(|m| m.keylemma).count() as f64 / trials as f64;
        let mut best_counts = [0usize; 3];
        for m in &results {
            let best = (0..3)
                .min_by(|&a, &b| {
                    m.candidate_subopts[a].partial_cmp(&m.candidate_subopts[b]).unwrap()
                })
                .unwrap();
            best_counts[best] += 1;
        }
        let sel: Vec<f64> = results.iter().map(|m| m.selected_subopt).collect();
        let summary = vec![
            ("keylemma_rate".to_string(), fmt_f64(keylemma_rate)),
            ("keylemma_threshold".to_string(), {
                let sigma = (delta * (1.0 - delta) / trials as f64).sqrt();
                fmt_f64(1.0 - delta - 3.0 * sigma)
            }),
            ("best_is_l2".to_string(), fmt_f64(best_counts[0] as f64 / trials as f64)),
            ("best_is_l1".to_string(), fmt_f64(best_counts[1] as f64 / trials as f64)),
            ("best_is_linf".to_string(), fmt_f64(best_counts[2] as f64 / trials as f64)),
            ("selected_median_subopt".to_string(), fmt_f64(median(&sel))),
            ("nominal_failure".to_string(), fmt_f64(10.0 * delta)),
        ];
        return Ok(ExperimentReport::new(
            r.finish(),
            vec![
                "trial",
                "chosen",
                "selected_subopt",
                "subopt_l2",
                "subopt_l1",
                "subopt_linf",
                "tau_l2",
                "tau_l1",
                "tau_linf",
                "keylemma_ok",
            ],
            rows,
            summary,
        ));
    }

    let p: Norm = p_raw.parse()?;
    let dstar = oracle.d_star(p);
    let results: Vec<(f64, f64, f64, f64, u8)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64, f64, f64, u8)> {
            let samples = sample_batch(&spec, 2 * n, mix2(mix2(seed, stream), t as u64))?;
            let res = optimal_adaptive(&spec, &samples, p, delta, &erm_cfg, &strategy)?;
            Ok((
                res.row.lambda,
                res.stage1_radius,
                norm(&res.output, p),
                oracle.suboptimality(&res.output),
                res.erm.residual_above_tolerance as u8,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(t, (lambda, radius, out_norm, sub, flag))| {
            vec![
                t.to_string(),
                fmt_f64(*lambda),
                fmt_f64(*radius),
                fmt_f64(*out_norm),
                fmt_f64(*sub),
                flag.to_string(),
            ]
        })
        .collect();
    let subs: Vec<f64> = results.iter().map(|r| r.3).collect();
    let norms: Vec<f64> = results.iter().map(|r| r.2).collect();
    let within = results.iter().filter(|r| r.2 <= 33.0 * dstar + 1e-12).count();
    let summary = vec![
        ("d_star".to_string(), fmt_f64(dstar)),
        ("subopt_median".to_string(), fmt_f64(median(&subs))),
        ("subopt_mean".to_string(), fmt_f64(subs.iter().sum::<f64>() / trials as f64)),
        ("output_norm_max".to_string(), fmt_f64(norms.iter().cloned().fold(0.0, f64::max))),
        ("within_33_dstar".to_string(), fmt_f64(within as f64 / trials as f64)),
        ("nominal_failure".to_string(), fmt_f64(3.0 * delta)),
    ];
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["trial", "lambda", "radius", "output_norm", "subopt", "erm_flag"],
        rows,
        summary,
    ))
}

struct MultiTrial {
    chosen: usize,
    selected_subopt: f64,
    candidate_subopts: [f64; 3],
    taus: [f64; 3],
    keylemma: bool,
}

// ---------------------------------------------------------------------------
// strongconvex
// ---------------------------------------------------------------------------

/// Strong-convexity adaptation: candidates from projected SGD over a log
/// grid of strong-convexity guesses, selected greedily and reliably; the
/// per-n median suboptimalities should decay like 1/n.
pub fn run_strong_convexity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = Resolver::new(cfg);
    r.str_or("experiment", "strongconvex");
    let ns = r.n_grid("n", "200,800,3200,12800")?;
    let trials = r.trials_or(200)?;
    let seed = r.seed()?;
    let delta = r.delta()?;
    let gamma = r.gamma()?;
    let mu0 = r.f64_or("mu0", 0.05)?;
    let mu_count = r.usize_or("mu_count", 7)?;
    if mu_count == 0 || mu0 <= 0.0 {
        return Err(Error::Config("need mu0 > 0 and mu_count >= 1".into()));
    }
    let family = FamilyCfg::resolve(&r, "strongly_convex_1d")?;
    let spec = family.build(ns[0])?;
    if spec.dimension() != 1 {
        return Err(Error::Config("strongconvex expects a one-dimensional family".into()));
    }
    let oracle = spec.population_oracle()?;
    let lipschitz_hat = match r.str_or("lipschitz_hat", "auto").as_str() {
        "auto" => spec.lipschitz_l2().ok_or(Error::MissingLipschitz)?,
        s => s.parse::<f64>().map_err(|_| Error::Config("lipschitz_hat must be a number or auto".into()))?,
    };
    // The theory widths at n = 200 are dominated by their Lipschitz linear
    // term, which anchors the safe set to the reference; the practical rule
    // (with an exact per-candidate envelope M) is the default here.
    let width_rule = r.str_or("width_rule", "practical");
    let mus: Vec<f64> = (0..mu_count).map(|k| mu0 * (k as f64).exp()).collect();

    let stream = tag("harness.strongconvex");
    let mut rows = Vec::new();
    let mut greedy_medians = Vec::new();
    let mut rely_medians = Vec::new();
    let mut summary = Vec::new();
    for &n in &ns {
        let results: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64)> {
                let tseed = mix2(mix2(mix2(seed, stream), n as u64), t as u64);
                let batch = sample_batch(&spec, 2 * n, tseed)?;
                let (val, train) = batch.split_at(n);
                let cands: Vec<Vec<f64>> =
                    mus.iter().map(|&mu| sc_sgd(&spec, mu, train)).collect();
                let zero = vec![0.0; 1];
                let mut columns = vec![vec![0.0; n]; mus.len() + 1];
                for (i, s) in val.iter().enumerate() {
                    columns[0][i] = spec.loss(&zero, s);
                    for (k, x) in cands.iter().enumerate() {
                        columns[k + 1][i] = spec.loss(x, s);
                    }
                }
                let losses = LossMatrix::from_columns(&columns)?;
                let greedy = standard_select(&losses)?;
                let widths = match width_rule.as_str() {
                    "practical" => {
                        let mut m = vec![0.0];
                        m.extend(cands.iter().map(|x| spec.loss_diff_bound(x)));
                        widths_practical(&losses, &m)?
                    }
                    "theory" => {
                        let mut x_norms = vec![0.0];
                        x_norms.extend(cands.iter().map(|x| norm(x, Norm::L2)));
                        widths_theory(&losses, lipschitz_hat, &x_norms, delta)?
                    }
                    other => return Err(Error::Config(format!("unknown width_rule {other:?}"))),
                };
                let rely = reliable_select(&losses, &widths, gamma)?;
                let at = |k: usize| if k == 0 { zero.clone() } else { cands[k - 1].clone() };
                Ok((
                    oracle.suboptimality(&at(greedy.chosen)),
                    oracle.suboptimality(&at(rely.chosen)),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        for (t, (gs, rs)) in results.iter().enumerate() {
            rows.push(vec![n.to_string(), t.to_string(), fmt_f64(*gs), fmt_f64(*rs)]);
        }
        let gm = median(&results.iter().map(|r| r.0).collect::<Vec<_>>());
        let rm = median(&results.iter().map(|r| r.1).collect::<Vec<_>>());
        greedy_medians.push(gm);
        rely_medians.push(rm);
        summary.push((format!("greedy_median_n{n}"), fmt_f64(gm)));
        summary.push((format!("reliable_median_n{n}"), fmt_f64(rm)));
    }
    if ns.len() >= 2 {
        let (gs, gse) = loglog_slope(&ns, &greedy_medians);
        let (rs, rse) = loglog_slope(&ns, &rely_medians);
        summary.push(("greedy_slope".to_string(), fmt_f64(gs)));
        summary.push(("greedy_slope_se".to_string(), fmt_f64(gse)));
        summary.push(("reliable_slope".to_string(), fmt_f64(rs)));
        summary.push(("reliable_slope_se".to_string(), fmt_f64(rse)));
    }
    Ok(ExperimentReport::new(
        r.finish(),
        vec!["n", "trial", "greedy_subopt", "reliable_subopt"],
        rows,
        summary,
    ))
}
