//! Deterministic confidence-width formulas: scalar deviation bounds
//! (Hoeffding, Bennett, empirical Bennett), empirical vector bounds in the
//! l2 / l-infinity / l1 norms, and a combinator that bounds the sum of
//! possibly dependent sub-gamma variables without paying a log(d) union
//! factor.
//!
//! Each function returns the width w such that the corresponding deviation
//! event has probability at most `delta`. All logarithms are natural; no
//! clamping of `delta` is performed.

use crate::{Error, Result};

/// Sidedness of a scalar deviation bound. Two-sided widths use the
/// union-bounded constants (2/delta becomes 4/delta, and so on).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    One,
    Two,
}

/// Sub-gamma tail description: P(X >= a sqrt(ln 1/d') + b ln 1/d') <= d'
/// required for every d' in (0, 1), not just a single level. The
/// dependent-sum combinator needs the whole family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubGammaTail {
    pub a: f64,
    pub b: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

fn check_n(n: usize, need: usize) -> Result<()> {
    if n < need {
        return Err(Error::TooFewSamples { need, got: n });
    }
    Ok(())
}

/// |mean - E| <= (b - a) sqrt(ln(2/delta) / (2n)) for i.i.d. values in [a, b].
pub fn hoeffding_width(range: f64, n: usize, delta: f64, sided: Sided) -> Result<f64> {
    check_delta(delta)?;
    check_n(n, 1)?;
    if range < 0.0 {
        return Err(Error::InvalidParameter("range must be nonnegative".into()));
    }
    let c = match sided {
        Sided::One => (1.0 / delta).ln(),
        Sided::Two => (2.0 / delta).ln(),
    };
    Ok(range * (c / (2.0 * n as f64)).sqrt())
}

/// Bennett width with a known standard deviation:
/// sigma sqrt(2 ln(2/delta) / n) + (b - a) ln(2/delta) / (3n).
pub fn bennett_width(sigma: f64, range: f64, n: usize, delta: f64, sided: Sided) -> Result<f64> {
    check_delta(delta)?;
    check_n(n, 1)?;
    if range < 0.0 || sigma < 0.0 {
        return Err(Error::InvalidParameter("sigma and range must be nonnegative".into()));
    }
    let c = match sided {
        Sided::One => (1.0 / delta).ln(),
        Sided::Two => (2.0 / delta).ln(),
    };
    Ok(sigma * (2.0 * c / n as f64).sqrt() + range * c / (3.0 * n as f64))
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    debug_assert!(n >= 2);
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

/// Empirical Bennett width from the sample variance:
/// sqrt(2 s_n^2 ln(2/delta) / n) + 7 (b - a) ln(2/delta) / (3 (n - 1)),
/// with 2/delta replaced by 4/delta for the two-sided variant.
pub fn empirical_bennett_width(
    values: &[f64],
    range: f64,
    delta: f64,
    sided: Sided,
) -> Result<f64> {
    check_delta(delta)?;
    check_n(values.len(), 2)?;
    if range < 0.0 {
        return Err(Error::InvalidParameter("range must be nonnegative".into()));
    }
    let n = values.len() as f64;
    let c = match sided {
        Sided::One => (2.0 / delta).ln(),
        Sided::Two => (4.0 / delta).ln(),
    };
    let s2 = sample_variance(values);
    Ok((2.0 * s2 * c / n).sqrt() + 7.0 * range * c / (3.0 * (n - 1.0)))
}

fn check_vectors(vectors: &[Vec<f64>]) -> Result<(usize, usize)> {
    check_n(vectors.len(), 2)?;
    let d = vectors[0].len();
    if d == 0 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::ShapeMismatch("vectors must share a positive dimension".into()));
    }
    Ok((vectors.len(), d))
}

const ENVELOPE_SLACK: f64 = 1e-9;

/// ||mean - E||_2 width for i.i.d. vectors with ||V_i||_2 <= c:
/// 2 sqrt(sum_i ||V_i - Vbar||_2^2 ln(6/delta)) / n + 10 c ln(6/delta) / (n-1).
pub fn vec_l2_width(vectors: &[Vec<f64>], c: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (n, d) = check_vectors(vectors)?;
    for v in vectors {
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > c * (1.0 + ENVELOPE_SLACK) + ENVELOPE_SLACK {
            return Err(Error::EnvelopeViolated(format!("||V||_2 = {nrm} exceeds envelope {c}")));
        }
    }
    let mut mean = vec![0.0; d];
    for v in vectors {
        for j in 0..d {
            mean[j] += v[j];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut dev2 = 0.0;
    for v in vectors {
        for j in 0..d {
            let t = v[j] - mean[j];
            dev2 += t * t;
        }
    }
    let l = (6.0 / delta).ln();
    Ok(2.0 * (dev2 * l).sqrt() / n as f64 + 10.0 * c * l / (n as f64 - 1.0))
}

fn coordinate_deviation_sq(vectors: &[Vec<f64>], j: usize) -> f64 {
    let n = vectors.len() as f64;
    let mean = vectors.iter().map(|v| v[j]).sum::<f64>() / n;
    vectors.iter().map(|v| (v[j] - mean) * (v[j] - mean)).sum::<f64>()
}

fn check_coord_envelope(vectors: &[Vec<f64>], c: &[f64]) -> Result<()> {
    for v in vectors {
        for (j, &x) in v.iter().enumerate() {
            if x.abs() > c[j] * (1.0 + ENVELOPE_SLACK) + ENVELOPE_SLACK {
                return Err(Error::EnvelopeViolated(format!(
                    "|V_j| = {} exceeds envelope {} at coordinate {j}",
                    x.abs(),
                    c[j]
                )));
            }
        }
    }
    Ok(())
}

/// ||mean - E||_inf width for i.i.d. vectors with |V_{i,j}| <= c_j:
/// max_j sqrt(2 sum_i (V_{i,j} - Vbar_j)^2 ln(4d/delta)) / (n-1)
///       + 14 c_j ln(4d/delta) / (3 (n-1)).
pub fn vec_inf_width(vectors: &[Vec<f64>], c: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (n, d) = check_vectors(vectors)?;
    if c.len() != d {
        return Err(Error::ShapeMismatch("envelope length must match dimension".into()));
    }
    check_coord_envelope(vectors, c)?;
    let l = (4.0 * d as f64 / delta).ln();
    let nm1 = n as f64 - 1.0;
    let mut worst = 0.0f64;
    for j in 0..d {
        let dev2 = coordinate_deviation_sq(vectors, j);
        let w = (2.0 * dev2 * l).sqrt() / nm1 + 14.0 * c[j] * l / (3.0 * nm1);
        worst = worst.max(w);
    }
    Ok(worst)
}

/// ||mean - E||_1 width for i.i.d. vectors with |V_{i,j}| <= c_j:
/// sum_j (9/4) sqrt(2 sum_i (V_{i,j} - Vbar_j)^2 ln(30/delta)) / (n-1)
///       + 25 c_j ln(30/delta) / (n-1).
///
/// Unlike a per-coordinate union bound, the log factor does not grow with
/// the ambient dimension; inactive coordinates contribute only through
/// their envelopes.
pub fn vec_l1_width(vectors: &[Vec<f64>], c: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (n, d) = check_vectors(vectors)?;
    if c.len() != d {
        return Err(Error::ShapeMismatch("envelope length must match dimension".into()));
    }
    check_coord_envelope(vectors, c)?;
    let l = (30.0 / delta).ln();
    let nm1 = n as f64 - 1.0;
    let mut total = 0.0;
    for j in 0..d {
        let dev2 = coordinate_deviation_sq(vectors, j);
        total += 2.25 * (2.0 * dev2 * l).sqrt() / nm1 + 25.0 * c[j] * l / nm1;
    }
    Ok(total)
}

/// Bound on sum_j X_j holding with probability 1 - delta when each X_j
/// (arbitrarily dependent) satisfies
/// P(X_j >= a_j sqrt(ln 1/d') + b_j ln 1/d') <= d' for every d' in (0,1):
/// (9/4) sum_j [ a_j sqrt(ln(6/delta)) + b_j ln(6/delta) ].
pub fn dependent_sum_bound(tails: &[SubGammaTail], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let mut acc = 0.0;
    let l = (6.0 / delta).ln();
    let sl = l.sqrt();
    for t in tails {
        if t.a < 0.0 || t.b < 0.0 {
            return Err(Error::InvalidParameter("sub-gamma coefficients must be nonnegative".into()));
        }
        acc += t.a * sl + t.b * l;
    }
    Ok(2.25 * acc)
}
