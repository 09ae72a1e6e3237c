//! Monte-Carlo validation of the selection machinery: coverage of the
//! theory widths, the selection lemma on instances with exact population
//! oracles, and the adversarial behavior of greedy learning-rate tuning.

use paramfree::rng::{mix2, tag, CounterRng};
use paramfree::*;

/// Coverage of the union-bounded empirical-Bennett widths: clipped Gaussian
/// difference columns (population mean zero by symmetry) respecting the
/// L ||x_k|| envelope; the event that some candidate's population gap
/// escapes its width must have frequency at most delta + 3 sigma.
#[test]
fn theory_widths_cover_gaussian_differences() {
    let delta = 0.1;
    let n = 100;
    let norms = [0.5, 1.0, 2.0];
    let lipschitz_hat = 1.0;
    let trials = 10_000;
    let mut violations = 0;
    for t in 0..trials as u64 {
        let mut rng = CounterRng::from_seed(mix2(tag("cover"), t), &[]);
        let mut columns = vec![vec![0.0; n]];
        for &nm in &norms {
            let env = lipschitz_hat * nm;
            let col: Vec<f64> =
                (0..n).map(|_| (0.4 * env * rng.normal()).clamp(-env, env)).collect();
            columns.push(col);
        }
        let losses = LossMatrix::from_columns(&columns).unwrap();
        let mut x_norms = vec![0.0];
        x_norms.extend_from_slice(&norms);
        let widths = widths_theory(&losses, lipschitz_hat, &x_norms, delta).unwrap();
        // Reference column is identically zero and population differences
        // vanish, so the condition event is |mean_k| > tau_k for some k.
        let bad = (1..=norms.len()).any(|k| losses.mean(k).abs() > widths.tau[k]);
        if bad {
            violations += 1;
        }
    }
    let rate = violations as f64 / trials as f64;
    let threshold = delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(rate <= threshold, "violation rate {rate} above {threshold}");
}

/// On a synthetic family with an exact oracle: in every trial where the
/// width condition holds, F(chosen) <= F(x_k) + (1 + gamma) tau_k for all k.
/// The condition itself must hold at roughly its nominal rate.
#[test]
fn selection_lemma_holds_under_condition_event() {
    let delta = 0.1;
    let gamma = 3.0;
    let n = 200;
    let spec = ProblemSpec::sparse_optimum_l1(4, 1.0).unwrap();
    let oracle = spec.population_oracle().unwrap();
    let lipschitz_hat = spec.lipschitz_l2().unwrap();
    let candidates: Vec<Vec<f64>> = vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.5, 0.0, 0.0, 0.0],
        vec![0.8, -0.4, 0.2, 0.0],
        vec![-1.0, 1.0, 0.0, 0.5],
    ];
    let zero = vec![0.0; 4];
    let pop_gap: Vec<f64> = candidates
        .iter()
        .map(|x| oracle.pop_loss(x) - oracle.pop_loss(&zero))
        .collect();
    let trials = 2000;
    let mut condition_held = 0;
    for t in 0..trials as u64 {
        let samples = sample_batch(&spec, n, mix2(tag("lemma"), t)).unwrap();
        let mut columns = vec![vec![0.0; n]];
        for x in &candidates {
            columns.push(samples.iter().map(|s| spec.loss(x, s)).collect());
        }
        for (i, s) in samples.iter().enumerate() {
            columns[0][i] = spec.loss(&zero, s);
        }
        let losses = LossMatrix::from_columns(&columns).unwrap();
        let mut x_norms = vec![0.0];
        x_norms.extend(candidates.iter().map(|x| norm(x, Norm::L2)));
        let widths = widths_theory(&losses, lipschitz_hat, &x_norms, delta).unwrap();
        // Condition event, checkable exactly through the oracle.
        let event = (1..=candidates.len()).all(|k| {
            let emp_gap = losses.mean(k) - losses.mean(0);
            (pop_gap[k - 1] - emp_gap).abs() <= widths.tau[k]
        });
        if !event {
            continue;
        }
        condition_held += 1;
        let out = reliable_select(&losses, &widths, gamma).unwrap();
        let chosen_pop = if out.chosen == 0 {
            oracle.pop_loss(&zero)
        } else {
            oracle.pop_loss(&candidates[out.chosen - 1])
        };
        // k = 0 carries tau_0 = 0.
        assert!(chosen_pop <= oracle.pop_loss(&zero) + 1e-12, "reference clause violated");
        for k in 1..=candidates.len() {
            let rhs = oracle.pop_loss(&candidates[k - 1]) + (1.0 + gamma) * widths.tau[k];
            assert!(
                chosen_pop <= rhs + 1e-12,
                "trial {t}: F(chosen) = {chosen_pop} > {rhs} for k = {k}"
            );
        }
    }
    let sigma = (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(
        condition_held as f64 >= (1.0 - delta - 3.0 * sigma) * trials as f64,
        "condition held only {condition_held}/{trials}"
    );
}

/// When the validation sample has a majority of linear-branch draws, the
/// empirical mean of every candidate x is (n - 2 sum S) x / n with a
/// negative slope, so greedy selection picks the largest candidate.
#[test]
fn greedy_picks_largest_rate_under_validation_majority() {
    let n = 3000;
    let spec = ProblemSpec::abs_linear_adversarial(n, 0.0).unwrap();
    let etas: Vec<f64> = (0..7).map(|k| (k as f64).exp()).collect();
    let mut majority_trials = 0;
    let mut t = 0u64;
    while majority_trials < 25 {
        let batch = sample_batch(&spec, 2 * n, mix2(tag("greedy-adv"), t)).unwrap();
        t += 1;
        let (val, train) = batch.split_at(n);
        let ones = val
            .iter()
            .filter(|s| matches!(s.value, problems::SampleValue::Bit(true)))
            .count();
        if 2 * ones <= n {
            continue;
        }
        majority_trials += 1;
        let cands: Vec<f64> = etas
            .iter()
            .map(|&eta| ada_sgd(&spec, eta, train, false).unwrap().average_iterate[0])
            .collect();
        let mut columns = vec![vec![0.0; n]];
        for &x in &cands {
            columns.push(val.iter().map(|s| spec.loss(&[x], s)).collect());
        }
        let losses = LossMatrix::from_columns(&columns).unwrap();
        let out = standard_select(&losses).unwrap();
        let max_cand = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max_cand <= 0.0 {
            continue; // all candidates at or below the origin; nothing to choose
        }
        assert!(out.chosen >= 1, "with a negative slope the reference cannot win");
        assert_eq!(
            cands[out.chosen - 1], max_cand,
            "greedy should pick the largest candidate under a majority validation draw"
        );
    }
}

/// gamma sweep: the safe set grows with gamma and the chosen validation
/// mean decreases toward the greedy value.
#[test]
fn reliable_interpolates_towards_greedy_in_gamma() {
    let mut rng = CounterRng::from_seed(2024, &[tag("gamma-sweep")]);
    for _ in 0..50 {
        let k = 2 + rng.below(5);
        let means: Vec<f64> = (0..=k).map(|_| rng.uniform(0.0, 1.0)).collect();
        let mut tau = vec![0.0];
        for _ in 0..k {
            tau.push(rng.uniform(0.0, 0.5));
        }
        let n = 4;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| means.clone()).collect();
        let losses = LossMatrix::from_rows(&rows).unwrap();
        let widths = ConfidenceWidths::custom(tau).unwrap();
        let mut prev_set: Vec<usize> = Vec::new();
        let mut prev_mean = f64::INFINITY;
        for gamma in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 1e9] {
            let out = reliable_select(&losses, &widths, gamma).unwrap();
            let set = out.safe_set.clone().unwrap();
            assert!(
                prev_set.iter().all(|i| set.contains(i)),
                "safe set shrank when gamma grew"
            );
            let mean = out.means[out.chosen];
            assert!(mean <= prev_mean + 1e-12, "chosen mean increased with gamma");
            // Anchoring: the winner's inflated mean never beats the
            // reference's plain mean, at any gamma.
            let tau = out.tau.as_ref().unwrap();
            assert!(mean + tau[out.chosen] <= means[0] + 1e-12);
            prev_set = set;
            prev_mean = mean;
        }
        // gamma = 1 minimizes the upper confidence bound.
        let out1 = reliable_select(&losses, &widths, 1.0).unwrap();
        let ucb_argmin = (0..means.len())
            .min_by(|&a, &b| {
                (means[a] + widths.tau[a]).partial_cmp(&(means[b] + widths.tau[b])).unwrap()
            })
            .unwrap();
        assert_eq!(out1.chosen, ucb_argmin);
    }
}

/// Practical-width shape-count setting: predictions projected to [0, 12]
/// give M = 12 for every candidate.
#[test]
fn practical_widths_shape_count_envelope() {
    let mut rng = CounterRng::from_seed(7, &[tag("shape")]);
    let n = 64;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.uniform(0.0, 12.0);
        rows.push(vec![r, (r + rng.uniform(-3.0, 3.0)).clamp(0.0, 12.0)]);
    }
    let losses = LossMatrix::from_rows(&rows).unwrap();
    let widths = widths_practical(&losses, &[0.0, 12.0]).unwrap();
    let s2 = losses.diff_sample_variance(1);
    let expect = s2.sqrt() / (2.0 * (n as f64).sqrt()) + 12.0 / (2.0 * n as f64);
    assert!((widths.tau[1] - expect).abs() < 1e-12);
}
