//! Ball-constrained adaptive first-order optimizers and the norm-regularized
//! ERM solver behind the localization stage.
//!
//! All three optimizers start from the origin, consume one sample per step,
//! and return the uniform average of the visited iterates u_1..u_n (the
//! initial point included). Step sizes are self-tuned from accumulated
//! gradient norms; when every gradient seen so far is zero the step is
//! skipped outright, so an optimizer started at an exact optimum stays
//! there.

mod erm;

pub use erm::{regularized_erm, ErmConfig, ErmSolution, ErmSolverChoice, ErmSolverKind};

use crate::problems::{Domain, ProblemSpec, Sample};
use crate::{norm, Error, Norm, Result};

/// Output of a single optimizer run.
#[derive(Debug, Clone)]
pub struct OptimizerRun {
    pub radius: f64,
    pub norm: Norm,
    pub iterate_count: usize,
    pub average_iterate: Vec<f64>,
    pub trace: Option<Trace>,
}

/// Per-step diagnostics, kept only when requested.
#[derive(Debug, Clone)]
pub struct Trace {
    /// u_t for t = 1..n, recorded before each update.
    pub iterates: Vec<Vec<f64>>,
    /// Step-size accumulators after each update (scalar for AdaSGD and
    /// AdaEMD, one entry per coordinate for AdaGrad).
    pub accumulators: Vec<Vec<f64>>,
}

impl Trace {
    /// Debug dump: step, iterate coordinates, gradient norm (recovered from
    /// consecutive accumulator increments; the l2 norm for AdaSGD and
    /// AdaGrad traces, the sup norm for AdaEMD traces).
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let d = self.iterates.first().map_or(0, |u| u.len());
        let mut out = String::from("step");
        for j in 0..d {
            let _ = write!(out, ",u{j}");
        }
        out.push_str(",grad_norm\n");
        let mut prev_acc = 0.0;
        for (t, u) in self.iterates.iter().enumerate() {
            let _ = write!(out, "{}", t + 1);
            for v in u {
                let _ = write!(out, ",{v}");
            }
            let acc: f64 = self.accumulators[t].iter().sum();
            let _ = writeln!(out, ",{}", (acc - prev_acc).max(0.0).sqrt());
            prev_acc = acc;
        }
        out
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Adaptive SGD in the Euclidean ball of the given radius:
/// u <- proj(u - R g / sqrt(sum of squared gradient l2 norms)).
pub fn ada_sgd(
    spec: &ProblemSpec,
    radius: f64,
    samples: &[Sample],
    record_trace: bool,
) -> Result<OptimizerRun> {
    check_radius(radius)?;
    let d = spec.dimension();
    let project = euclidean_ball_projector(spec.domain(), radius, d)?;
    let mut u = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut acc = 0.0f64;
    let mut g = vec![0.0; d];
    let mut trace = record_trace.then(|| Trace { iterates: Vec::new(), accumulators: Vec::new() });
    for s in samples {
        if let Some(t) = trace.as_mut() {
            t.iterates.push(u.clone());
        }
        for j in 0..d {
            avg[j] += u[j];
        }
        spec.subgradient(&u, s, &mut g);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if acc + gg > 0.0 {
            acc += gg;
            let scale = radius / acc.sqrt();
            for j in 0..d {
                u[j] -= scale * g[j];
            }
            project(&mut u);
        }
        if let Some(t) = trace.as_mut() {
            t.accumulators.push(vec![acc]);
        }
    }
    let n = samples.len().max(1) as f64;
    for v in avg.iter_mut() {
        *v /= n;
    }
    Ok(OptimizerRun {
        radius,
        norm: Norm::L2,
        iterate_count: samples.len(),
        average_iterate: avg,
        trace,
    })
}

/// Exact Euclidean projection onto {x in X : ||x||_2 <= radius}.
fn euclidean_ball_projector(
    domain: Domain,
    radius: f64,
    d: usize,
) -> Result<Box<dyn Fn(&mut [f64])>> {
    match domain {
        Domain::Unconstrained => Ok(Box::new(move |x: &mut [f64]| {
            let n = norm(x, Norm::L2);
            if n > radius {
                let s = radius / n;
                for v in x.iter_mut() {
                    *v *= s;
                }
            }
        })),
        // Projection onto a cone composed with the radial projection is the
        // exact projection onto their intersection.
        Domain::NonnegativeOrthant => Ok(Box::new(move |x: &mut [f64]| {
            for v in x.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let n = norm(x, Norm::L2);
            if n > radius {
                let s = radius / n;
                for v in x.iter_mut() {
                    *v *= s;
                }
            }
        })),
        Domain::Ball { radius: r, .. } if d == 1 => {
            let lim = r.min(radius);
            Ok(Box::new(move |x: &mut [f64]| x[0] = x[0].clamp(-lim, lim)))
        }
        Domain::Ball { norm: Norm::L2, radius: r } => {
            let lim = r.min(radius);
            Ok(Box::new(move |x: &mut [f64]| {
                let n = norm(x, Norm::L2);
                if n > lim {
                    let s = lim / n;
                    for v in x.iter_mut() {
                        *v *= s;
                    }
                }
            }))
        }
        Domain::Ball { .. } => Err(Error::Unsupported(
            "Euclidean projection onto a multi-dimensional non-l2 ball domain".into(),
        )),
    }
}

/// Entropic mirror descent over {u >= 0, ||u||_1 <= radius} with step
/// eta_t = R sqrt(2) / (2 sqrt(sum of squared gradient sup-norms)).
///
/// An unconstrained domain is handled by the sign-splitting decomposition
/// x = x_+ - x_-, doubling the dimension. The state starts at exactly zero;
/// since multiplicative updates cannot leave a vertex, coordinates sitting
/// at zero receive a small entry mass proportional to (e^{-eta g} - 1)_+,
/// i.e. only in strict descent directions. Ascent-only coordinates stay at
/// exact zero, which keeps zero-gradient problems at the origin.
pub fn ada_emd(
    spec: &ProblemSpec,
    radius: f64,
    samples: &[Sample],
    record_trace: bool,
) -> Result<OptimizerRun> {
    check_radius(radius)?;
    let d = spec.dimension();
    let (doubled, cap) = match spec.domain() {
        Domain::Unconstrained => (true, radius),
        Domain::NonnegativeOrthant => (false, radius),
        Domain::Ball { radius: r, .. } if d == 1 => (true, r.min(radius)),
        Domain::Ball { .. } => {
            return Err(Error::Unsupported(
                "mirror descent over a multi-dimensional ball domain".into(),
            ))
        }
    };
    let m = if doubled { 2 * d } else { d };
    let quantum = cap / (2.0 * m as f64);
    let mut w = vec![0.0f64; m];
    let mut x = vec![0.0f64; d];
    let mut avg = vec![0.0f64; d];
    let mut g = vec![0.0f64; d];
    let mut acc = 0.0f64;
    let mut trace = record_trace.then(|| Trace { iterates: Vec::new(), accumulators: Vec::new() });
    for s in samples {
        recompose(&w, doubled, &mut x);
        if let Some(t) = trace.as_mut() {
            t.iterates.push(x.clone());
        }
        for j in 0..d {
            avg[j] += x[j];
        }
        spec.subgradient(&x, s, &mut g);
        let ginf = norm(&g, Norm::Linf);
        if ginf > 0.0 {
            acc += ginf * ginf;
            let eta = cap * std::f64::consts::SQRT_2 / (2.0 * acc.sqrt());
            let mut total = 0.0;
            for slot in 0..m {
                let gj = if slot < d { g[slot] } else { -g[slot - d] };
                let mult = (-eta * gj).exp();
                if w[slot] > 0.0 {
                    w[slot] *= mult;
                } else if mult > 1.0 {
                    w[slot] = quantum * (mult - 1.0);
                }
                total += w[slot];
            }
            if total > cap {
                let s = cap / total;
                for v in w.iter_mut() {
                    *v *= s;
                }
            }
        }
        if let Some(t) = trace.as_mut() {
            t.accumulators.push(vec![acc]);
        }
    }
    let n = samples.len().max(1) as f64;
    for v in avg.iter_mut() {
        *v /= n;
    }
    Ok(OptimizerRun {
        radius,
        norm: Norm::L1,
        iterate_count: samples.len(),
        average_iterate: avg,
        trace,
    })
}

fn recompose(w: &[f64], doubled: bool, x: &mut [f64]) {
    let d = x.len();
    if doubled {
        for j in 0..d {
            x[j] = w[j] - w[d + j];
        }
    } else {
        x.copy_from_slice(&w[..d]);
    }
}

/// Diagonal AdaGrad in the sup-norm ball of the given radius:
/// G_jj += g_j^2, then u_j <- clip(u_j - R g_j / sqrt(G_jj)) coordinate-wise.
/// Coordinate clipping is the exact projection for the diagonal metric.
pub fn ada_grad(
    spec: &ProblemSpec,
    radius: f64,
    samples: &[Sample],
    record_trace: bool,
) -> Result<OptimizerRun> {
    check_radius(radius)?;
    let d = spec.dimension();
    let (lo, hi) = match spec.domain() {
        Domain::Unconstrained => (-radius, radius),
        Domain::NonnegativeOrthant => (0.0, radius),
        Domain::Ball { radius: r, norm: Norm::Linf } => (-r.min(radius), r.min(radius)),
        Domain::Ball { radius: r, .. } if d == 1 => (-r.min(radius), r.min(radius)),
        Domain::Ball { .. } => {
            return Err(Error::Unsupported(
                "AdaGrad over a multi-dimensional non-box ball domain".into(),
            ))
        }
    };
    let mut u = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut gsq = vec![0.0f64; d];
    let mut g = vec![0.0; d];
    let mut trace = record_trace.then(|| Trace { iterates: Vec::new(), accumulators: Vec::new() });
    for s in samples {
        if let Some(t) = trace.as_mut() {
            t.iterates.push(u.clone());
        }
        for j in 0..d {
            avg[j] += u[j];
        }
        spec.subgradient(&u, s, &mut g);
        for j in 0..d {
            gsq[j] += g[j] * g[j];
            if gsq[j] > 0.0 {
                u[j] = (u[j] - radius * g[j] / gsq[j].sqrt()).clamp(lo, hi);
            }
        }
        if let Some(t) = trace.as_mut() {
            t.accumulators.push(gsq.clone());
        }
    }
    let n = samples.len().max(1) as f64;
    for v in avg.iter_mut() {
        *v /= n;
    }
    Ok(OptimizerRun {
        radius,
        norm: Norm::Linf,
        iterate_count: samples.len(),
        average_iterate: avg,
        trace,
    })
}
