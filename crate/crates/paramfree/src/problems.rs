//! Stochastic convex problems: sampleable objectives f(x; S) with subgradient
//! oracles, plus exact population oracles for the synthetic families used by
//! the experiment harness.
//!
//! Conventions:
//! * at kinks of |·| the reported subgradient is the minimum-norm element
//!   (0 for |u| at u = 0), so optimizers have exact fixed points at optima;
//!   nonsmooth losses are used directly (no envelope smoothing), accepting
//!   the theory gap at the kink set;
//! * all sampling is counter-based: the i-th sample of a batch depends only
//!   on `(spec, seed, i)`, never on how many draws were made elsewhere.

use crate::rng::{mix2, CounterRng};
use crate::{Error, Norm, Result};

/// Feasible set X of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Unconstrained,
    /// x >= 0 coordinate-wise. Mirror descent operates on it directly
    /// without the sign-splitting decomposition.
    NonnegativeOrthant,
    /// p-norm ball of the given radius centered at the origin.
    Ball { norm: Norm, radius: f64 },
}

impl Domain {
    /// Clamp a scalar into the 1-d domain section. Only meaningful for
    /// one-dimensional problems or per-coordinate box domains.
    pub fn clamp1d(&self, u: f64) -> f64 {
        match *self {
            Domain::Unconstrained => u,
            Domain::NonnegativeOrthant => u.max(0.0),
            Domain::Ball { radius, .. } => u.clamp(-radius, radius),
        }
    }
}

/// Realized sample payload. A sample is fully identified by its `id` within
/// a batch plus the value drawn for it.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleValue {
    /// Bernoulli bit of the adversarial instance.
    Bit(bool),
    /// Per-coordinate atoms in {-1, 0, +1} for the weighted-abs families.
    Atoms(Vec<i8>),
    /// ±1 noise of the strongly convex family.
    Rademacher(i8),
    /// Additive noise vector of the Euclidean-norm family.
    Vector(Vec<f64>),
    /// Class label plus unit-norm feature vector.
    Labeled { label: u32, features: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub value: SampleValue,
}

/// Synthetic problem family. Each variant pins its own sample law, loss and
/// subgradient, and (except for the logistic family) an exact population
/// oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// f(x; 0) = |x - shift|, f(x; 1) = -(x - shift), S ~ Bernoulli(q) with
    /// q = 1/2 - 1/(16 sqrt(n_cal)). With shift = 0 this is the instance
    /// behind the greedy-selection lower bound; shift = 1 moves the optimum
    /// to distance one from the origin.
    AbsLinearAdversarial { n_cal: usize, shift: f64 },
    /// f(x; s) = (mu/2)(x - optimum - s)^2 with s = ±1, on [-halfwidth, halfwidth].
    StronglyConvex1d { mu: f64, optimum: f64, halfwidth: f64 },
    /// f(x; S) = ||x - optimum||_2 + <S, x> with S_j = noise * eps_j / sqrt(d).
    /// Population risk is exactly ||x - optimum||_2.
    EuclideanHinge { optimum: Vec<f64>, noise: f64 },
    /// f(x; S) = sum_j |x_j - opt_j - S_j| with unit weights and sparse
    /// optimum scale * e_1; the l1 geometry is the right one for it.
    SparseOptimumL1 { dim: usize, scale: f64, kink_mass: f64 },
    /// f(x; S) = sum_j w_j |x_j - opt_j - S_j| with harmonic weights
    /// w_j = 1/(j+1) and dense optimum scale * (1, ..., 1); the l-infinity
    /// geometry is the right one for it.
    DenseOptimumLinf { dim: usize, scale: f64, kink_mass: f64 },
    /// Multiclass logistic regression with unit-norm random features and
    /// uniform labels; weight matrices are classes x features, row-major.
    MulticlassLogistic { classes: usize, features: usize },
}

pub const DEFAULT_KINK_MASS: f64 = 0.1;

/// A sampleable stochastic convex objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    family: Family,
    dim: usize,
    domain: Domain,
    lipschitz_l2: Option<f64>,
    lipschitz_coord: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new(family: Family) -> Result<Self> {
        let (dim, domain) = match &family {
            Family::AbsLinearAdversarial { n_cal, .. } => {
                if *n_cal == 0 {
                    return Err(Error::InvalidParameter("n_cal must be positive".into()));
                }
                (1, Domain::Unconstrained)
            }
            Family::StronglyConvex1d { mu, halfwidth, .. } => {
                if *mu <= 0.0 || *halfwidth <= 0.0 {
                    return Err(Error::InvalidParameter("mu and halfwidth must be positive".into()));
                }
                (1, Domain::Ball { norm: Norm::Linf, radius: *halfwidth })
            }
            Family::EuclideanHinge { optimum, noise } => {
                if optimum.is_empty() || *noise < 0.0 {
                    return Err(Error::InvalidParameter("empty optimum or negative noise".into()));
                }
                (optimum.len(), Domain::Unconstrained)
            }
            Family::SparseOptimumL1 { dim, kink_mass, .. }
            | Family::DenseOptimumLinf { dim, kink_mass, .. } => {
                if *dim == 0 || !(0.0..=1.0).contains(kink_mass) {
                    return Err(Error::InvalidParameter("dim must be positive, kink_mass in [0,1]".into()));
                }
                (*dim, Domain::Unconstrained)
            }
            Family::MulticlassLogistic { classes, features } => {
                if *classes < 2 || *features == 0 {
                    return Err(Error::InvalidParameter("need classes >= 2 and features >= 1".into()));
                }
                (classes * features, Domain::Unconstrained)
            }
        };
        let lipschitz_l2 = Some(match &family {
            Family::AbsLinearAdversarial { .. } => 1.0,
            // |grad| = mu |x - optimum - s| over the box domain.
            Family::StronglyConvex1d { mu, optimum, halfwidth } => {
                mu * (halfwidth + optimum.abs() + 1.0)
            }
            Family::EuclideanHinge { noise, .. } => 1.0 + noise,
            Family::SparseOptimumL1 { dim, .. } => (*dim as f64).sqrt(),
            Family::DenseOptimumLinf { dim, .. } => {
                (0..*dim).map(|j| harmonic_weight(j).powi(2)).sum::<f64>().sqrt()
            }
            // ||(p - e_y) s^T||_F = ||p - e_y||_2 ||s||_2 <= sqrt(2).
            Family::MulticlassLogistic { .. } => std::f64::consts::SQRT_2,
        });
        let lipschitz_coord = Some(match &family {
            Family::AbsLinearAdversarial { .. } => vec![1.0],
            Family::StronglyConvex1d { mu, optimum, halfwidth } => {
                vec![mu * (halfwidth + optimum.abs() + 1.0)]
            }
            Family::EuclideanHinge { optimum, noise } => {
                vec![1.0 + noise / (optimum.len() as f64).sqrt(); optimum.len()]
            }
            Family::SparseOptimumL1 { dim, .. } => vec![1.0; *dim],
            Family::DenseOptimumLinf { dim, .. } => (0..*dim).map(harmonic_weight).collect(),
            Family::MulticlassLogistic { classes, features } => vec![1.0; classes * features],
        });
        Ok(ProblemSpec { family, dim, domain, lipschitz_l2, lipschitz_coord })
    }

    pub fn abs_linear_adversarial(n_cal: usize, shift: f64) -> Result<Self> {
        ProblemSpec::new(Family::AbsLinearAdversarial { n_cal, shift })
    }

    pub fn strongly_convex_1d(mu: f64, optimum: f64, halfwidth: f64) -> Result<Self> {
        ProblemSpec::new(Family::StronglyConvex1d { mu, optimum, halfwidth })
    }

    pub fn euclidean_hinge(optimum: Vec<f64>, noise: f64) -> Result<Self> {
        ProblemSpec::new(Family::EuclideanHinge { optimum, noise })
    }

    pub fn sparse_optimum_l1(dim: usize, scale: f64) -> Result<Self> {
        ProblemSpec::new(Family::SparseOptimumL1 { dim, scale, kink_mass: DEFAULT_KINK_MASS })
    }

    pub fn dense_optimum_linf(dim: usize, scale: f64) -> Result<Self> {
        ProblemSpec::new(Family::DenseOptimumLinf { dim, scale, kink_mass: DEFAULT_KINK_MASS })
    }

    pub fn multiclass_logistic(classes: usize, features: usize) -> Result<Self> {
        ProblemSpec::new(Family::MulticlassLogistic { classes, features })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Same problem restricted to (or relaxed to) another feasible set.
    /// Lipschitz constants are kept; they are valid on any subset of the
    /// original domain.
    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Replace the Lipschitz constants by caller-supplied estimates. The
    /// adaptive machinery only requires upper bounds; inflated estimates
    /// degrade the regularization weight but keep every guarantee valid.
    pub fn with_lipschitz_estimates(mut self, l2: Option<f64>, coord: Option<Vec<f64>>) -> Self {
        self.lipschitz_l2 = l2;
        self.lipschitz_coord = coord;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// True l2 Lipschitz constant, when known.
    pub fn lipschitz_l2(&self) -> Option<f64> {
        self.lipschitz_l2
    }

    /// True per-coordinate Lipschitz constants, when known.
    pub fn lipschitz_coord(&self) -> Option<&[f64]> {
        self.lipschitz_coord.as_deref()
    }

    /// Scalar Lipschitz input for a geometry: L for p=2, ||l||_inf for p=1,
    /// ||l||_1 for p=inf.
    pub fn lipschitz_for(&self, norm: Norm) -> Option<f64> {
        match norm {
            Norm::L2 => self.lipschitz_l2,
            Norm::L1 => self
                .lipschitz_coord
                .as_ref()
                .map(|l| l.iter().cloned().fold(0.0f64, f64::max)),
            Norm::Linf => self.lipschitz_coord.as_ref().map(|l| l.iter().sum()),
        }
    }

    /// Success probability of the adversarial family's Bernoulli law.
    pub fn adversarial_q(&self) -> Option<f64> {
        match self.family {
            Family::AbsLinearAdversarial { n_cal, .. } => {
                Some(0.5 - 1.0 / (16.0 * (n_cal as f64).sqrt()))
            }
            _ => None,
        }
    }

    /// Draw the sample with the given batch index. Deterministic in
    /// `(self, seed, index)`.
    pub fn sample_at(&self, seed: u64, index: u64) -> Sample {
        let mut rng = CounterRng::new(mix2(mix2(seed, 0x5a5a_1ee7), index));
        let value = match &self.family {
            Family::AbsLinearAdversarial { .. } => {
                let q = self.adversarial_q().unwrap();
                SampleValue::Bit(rng.bernoulli(q))
            }
            Family::StronglyConvex1d { .. } => SampleValue::Rademacher(rng.rademacher()),
            Family::EuclideanHinge { optimum, noise } => {
                let d = optimum.len();
                let s = noise / (d as f64).sqrt();
                SampleValue::Vector((0..d).map(|_| s * rng.rademacher() as f64).collect())
            }
            Family::SparseOptimumL1 { dim, kink_mass, .. }
            | Family::DenseOptimumLinf { dim, kink_mass, .. } => {
                SampleValue::Atoms((0..*dim).map(|_| draw_atom(&mut rng, *kink_mass)).collect())
            }
            Family::MulticlassLogistic { classes, features } => {
                let label = rng.below(*classes) as u32;
                let mut f = Vec::new();
                rng.unit_sphere(*features, &mut f);
                SampleValue::Labeled { label, features: f }
            }
        };
        Sample { id: index, value }
    }

    /// Loss f(x; S).
    pub fn loss(&self, x: &[f64], s: &Sample) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match (&self.family, &s.value) {
            (Family::AbsLinearAdversarial { shift, .. }, SampleValue::Bit(b)) => {
                let u = x[0] - shift;
                if *b {
                    -u
                } else {
                    u.abs()
                }
            }
            (Family::StronglyConvex1d { mu, optimum, .. }, SampleValue::Rademacher(r)) => {
                let e = x[0] - optimum - *r as f64;
                0.5 * mu * e * e
            }
            (Family::EuclideanHinge { optimum, .. }, SampleValue::Vector(noise)) => {
                let mut sq = 0.0;
                let mut dot = 0.0;
                for j in 0..x.len() {
                    let d = x[j] - optimum[j];
                    sq += d * d;
                    dot += noise[j] * x[j];
                }
                sq.sqrt() + dot
            }
            (Family::SparseOptimumL1 { .. } | Family::DenseOptimumLinf { .. }, SampleValue::Atoms(a)) => {
                let mut total = 0.0;
                for j in 0..x.len() {
                    total += self.abs_weight(j) * (x[j] - self.abs_optimum(j) - a[j] as f64).abs();
                }
                total
            }
            (Family::MulticlassLogistic { classes, features }, SampleValue::Labeled { label, features: f }) => {
                logistic_loss(x, *classes, *features, *label, f)
            }
            _ => unreachable!("sample kind does not match family"),
        }
    }

    /// Minimum-norm subgradient of f(.; S) at x, written into `out`.
    pub fn subgradient(&self, x: &[f64], s: &Sample, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match (&self.family, &s.value) {
            (Family::AbsLinearAdversarial { shift, .. }, SampleValue::Bit(b)) => {
                out[0] = if *b { -1.0 } else { signum_min_norm(x[0] - shift) };
            }
            (Family::StronglyConvex1d { mu, optimum, .. }, SampleValue::Rademacher(r)) => {
                out[0] = mu * (x[0] - optimum - *r as f64);
            }
            (Family::EuclideanHinge { optimum, .. }, SampleValue::Vector(noise)) => {
                let mut sq = 0.0;
                for j in 0..x.len() {
                    let d = x[j] - optimum[j];
                    sq += d * d;
                }
                let nrm = sq.sqrt();
                if nrm == 0.0 {
                    out.copy_from_slice(noise);
                } else {
                    for j in 0..x.len() {
                        out[j] = (x[j] - optimum[j]) / nrm + noise[j];
                    }
                }
            }
            (Family::SparseOptimumL1 { .. } | Family::DenseOptimumLinf { .. }, SampleValue::Atoms(a)) => {
                for j in 0..x.len() {
                    out[j] = self.abs_weight(j)
                        * signum_min_norm(x[j] - self.abs_optimum(j) - a[j] as f64);
                }
            }
            (Family::MulticlassLogistic { classes, features }, SampleValue::Labeled { label, features: f }) => {
                logistic_subgradient(x, *classes, *features, *label, f, out);
            }
            _ => unreachable!("sample kind does not match family"),
        }
    }

    /// Weight w_j for the weighted-abs families.
    pub(crate) fn abs_weight(&self, j: usize) -> f64 {
        match &self.family {
            Family::SparseOptimumL1 { .. } => 1.0,
            Family::DenseOptimumLinf { .. } => harmonic_weight(j),
            _ => unreachable!(),
        }
    }

    /// Optimum coordinate for the weighted-abs families.
    pub(crate) fn abs_optimum(&self, j: usize) -> f64 {
        match &self.family {
            Family::SparseOptimumL1 { scale, .. } => {
                if j == 0 {
                    *scale
                } else {
                    0.0
                }
            }
            Family::DenseOptimumLinf { scale, .. } => *scale,
            _ => unreachable!(),
        }
    }

    /// Kinks of the per-sample losses along the only coordinate, for
    /// one-dimensional piecewise-linear families. `None` when the empirical
    /// objective is not piecewise linear in 1-d.
    pub fn loss_breakpoints_1d(&self, samples: &[Sample]) -> Option<Vec<f64>> {
        match &self.family {
            Family::AbsLinearAdversarial { shift, .. } => {
                // f(.; 1) is linear; only f(.; 0) = |x - shift| has a kink.
                let _ = samples;
                Some(vec![*shift])
            }
            Family::SparseOptimumL1 { .. } | Family::DenseOptimumLinf { .. } if self.dim == 1 => {
                let mut pts: Vec<f64> = samples
                    .iter()
                    .map(|s| match &s.value {
                        SampleValue::Atoms(a) => self.abs_optimum(0) + a[0] as f64,
                        _ => unreachable!(),
                    })
                    .collect();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                Some(pts)
            }
            _ => None,
        }
    }

    /// A valid envelope M(x) with |f(x; S) - f(0; S)| <= M(x) for every
    /// sample, as required by the practical confidence-width rule.
    pub fn loss_diff_bound(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::AbsLinearAdversarial { .. } => x[0].abs(),
            Family::StronglyConvex1d { mu, optimum, .. } => {
                // |f(x) - f(0)| = |mu x^2 / 2 - mu x (optimum + s)|.
                mu * (0.5 * x[0] * x[0] + (optimum.abs() + 1.0) * x[0].abs())
            }
            Family::EuclideanHinge { noise, .. } => (1.0 + noise) * crate::norm(x, crate::Norm::L2),
            Family::SparseOptimumL1 { .. } | Family::DenseOptimumLinf { .. } => {
                (0..x.len()).map(|j| self.abs_weight(j) * x[j].abs()).sum()
            }
            Family::MulticlassLogistic { classes, features } => {
                let zero = vec![0.0; x.len()];
                logistic_width_helper(x, &zero, *classes, *features).expect("shapes match")
            }
        }
    }

    /// Exact population oracle, available for every family except the
    /// logistic one (whose population risk has no closed form).
    pub fn population_oracle(&self) -> Result<PopulationOracle<'_>> {
        match self.family {
            Family::MulticlassLogistic { .. } => Err(Error::OracleUnavailable),
            _ => Ok(PopulationOracle { spec: self }),
        }
    }
}

/// Ordered batch of i.i.d. samples; deterministic in `(spec, n, seed)`.
pub fn sample_batch(spec: &ProblemSpec, n: usize, seed: u64) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    Ok((0..n as u64).map(|i| spec.sample_at(seed, i)).collect())
}

/// F(x) - F*, via the family's closed-form population risk.
pub fn population_suboptimality(oracle: &PopulationOracle<'_>, x: &[f64]) -> f64 {
    oracle.suboptimality(x)
}

/// Valid M(x) for the multiclass logistic loss with unit-norm features:
/// twice the largest row-wise l2 distance between the weight matrices.
pub fn logistic_width_helper(x: &[f64], x0: &[f64], classes: usize, features: usize) -> Result<f64> {
    if x.len() != classes * features || x0.len() != classes * features {
        return Err(Error::ShapeMismatch(format!(
            "expected {classes}x{features} matrices, got lengths {} and {}",
            x.len(),
            x0.len()
        )));
    }
    let mut worst = 0.0f64;
    for c in 0..classes {
        let mut sq = 0.0;
        for m in 0..features {
            let d = x[c * features + m] - x0[c * features + m];
            sq += d * d;
        }
        worst = worst.max(sq.sqrt());
    }
    Ok(2.0 * worst)
}

/// Closed-form population quantities for a synthetic family.
#[derive(Debug, Clone, Copy)]
pub struct PopulationOracle<'a> {
    spec: &'a ProblemSpec,
}

impl PopulationOracle<'_> {
    /// F(x) = E[f(x; S)].
    pub fn pop_loss(&self, x: &[f64]) -> f64 {
        match self.spec.family() {
            Family::AbsLinearAdversarial { shift, .. } => {
                let q = self.spec.adversarial_q().unwrap();
                let u = x[0] - shift;
                (1.0 - q) * u.abs() - q * u
            }
            Family::StronglyConvex1d { mu, optimum, .. } => {
                let e = x[0] - optimum;
                0.5 * mu * e * e + 0.5 * mu
            }
            Family::EuclideanHinge { optimum, .. } => {
                let mut sq = 0.0;
                for j in 0..x.len() {
                    let d = x[j] - optimum[j];
                    sq += d * d;
                }
                sq.sqrt()
            }
            Family::SparseOptimumL1 { kink_mass, .. } | Family::DenseOptimumLinf { kink_mass, .. } => {
                let mut total = 0.0;
                for j in 0..x.len() {
                    total += self.spec.abs_weight(j)
                        * atom_abs_mean(x[j] - self.spec.abs_optimum(j), *kink_mass);
                }
                total
            }
            Family::MulticlassLogistic { .. } => unreachable!(),
        }
    }

    /// F* = inf F.
    pub fn f_star(&self) -> f64 {
        match self.spec.family() {
            Family::AbsLinearAdversarial { .. } => 0.0,
            Family::StronglyConvex1d { mu, .. } => 0.5 * mu,
            Family::EuclideanHinge { .. } => 0.0,
            Family::SparseOptimumL1 { dim, kink_mass, .. }
            | Family::DenseOptimumLinf { dim, kink_mass, .. } => {
                (0..*dim).map(|j| self.spec.abs_weight(j) * kink_mass).sum()
            }
            Family::MulticlassLogistic { .. } => unreachable!(),
        }
    }

    /// The unique population minimizer.
    pub fn minimizer(&self) -> Vec<f64> {
        match self.spec.family() {
            Family::AbsLinearAdversarial { shift, .. } => vec![*shift],
            Family::StronglyConvex1d { optimum, .. } => vec![*optimum],
            Family::EuclideanHinge { optimum, .. } => optimum.clone(),
            Family::SparseOptimumL1 { dim, .. } | Family::DenseOptimumLinf { dim, .. } => {
                (0..*dim).map(|j| self.spec.abs_optimum(j)).collect()
            }
            Family::MulticlassLogistic { .. } => unreachable!(),
        }
    }

    /// D* in the given norm: distance from the origin to the minimizer.
    pub fn d_star(&self, norm: Norm) -> f64 {
        crate::norm(&self.minimizer(), norm)
    }

    /// F(x) - F*.
    pub fn suboptimality(&self, x: &[f64]) -> f64 {
        self.pop_loss(x) - self.f_star()
    }

    /// E[min-norm subgradient of f(.; S)] at x; the estimand of the mean
    /// empirical subgradient, used when auditing the regularization
    /// condition empirically.
    pub fn mean_subgradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self.spec.family() {
            Family::AbsLinearAdversarial { shift, .. } => {
                let q = self.spec.adversarial_q().unwrap();
                out[0] = (1.0 - q) * signum_min_norm(x[0] - shift) - q;
                Ok(())
            }
            Family::SparseOptimumL1 { kink_mass, .. } | Family::DenseOptimumLinf { kink_mass, .. } => {
                let rho = *kink_mass;
                for j in 0..x.len() {
                    let u = x[j] - self.spec.abs_optimum(j);
                    let g = 0.5 * rho * signum_min_norm(u + 1.0)
                        + (1.0 - rho) * signum_min_norm(u)
                        + 0.5 * rho * signum_min_norm(u - 1.0);
                    out[j] = self.spec.abs_weight(j) * g;
                }
                Ok(())
            }
            Family::StronglyConvex1d { mu, optimum, .. } => {
                out[0] = mu * (x[0] - optimum);
                Ok(())
            }
            Family::EuclideanHinge { optimum, .. } => {
                let mut sq = 0.0;
                for j in 0..x.len() {
                    let d = x[j] - optimum[j];
                    sq += d * d;
                }
                let nrm = sq.sqrt();
                for j in 0..x.len() {
                    out[j] = if nrm == 0.0 { 0.0 } else { (x[j] - optimum[j]) / nrm };
                }
                Ok(())
            }
            Family::MulticlassLogistic { .. } => Err(Error::OracleUnavailable),
        }
    }

    /// argmin of F(u) + zeta * |u| for the one-dimensional families.
    pub fn reg_minimizer_1d(&self, zeta: f64) -> Result<f64> {
        if zeta < 0.0 {
            return Err(Error::InvalidParameter("zeta must be nonnegative".into()));
        }
        match self.spec.family() {
            Family::AbsLinearAdversarial { shift, .. } => {
                // Piecewise linear; candidate minimizers are the breakpoints.
                let cands = [0.0, *shift];
                Ok(pick_min_1d(&cands, |u| self.pop_loss(&[u]) + zeta * u.abs()))
            }
            Family::SparseOptimumL1 { .. } | Family::DenseOptimumLinf { .. }
                if self.spec.dimension() == 1 =>
            {
                let c = self.spec.abs_optimum(0);
                let cands = [0.0, c - 1.0, c, c + 1.0];
                Ok(pick_min_1d(&cands, |u| self.pop_loss(&[u]) + zeta * u.abs()))
            }
            Family::StronglyConvex1d { mu, optimum, halfwidth } => {
                // Soft-thresholding of the quadratic part.
                let raw = if optimum.abs() * mu <= zeta {
                    0.0
                } else {
                    optimum - optimum.signum() * zeta / mu
                };
                Ok(raw.clamp(-halfwidth, *halfwidth))
            }
            _ => Err(Error::Unsupported(
                "population regularized minimizer available only in one dimension".into(),
            )),
        }
    }
}

/// Empirical view of a sample batch: mean loss, mean subgradient, and
/// per-coordinate gradient variance, with an O(d)-per-query fast path for
/// the weighted-abs families (their losses are separable with three noise
/// atoms per coordinate, so per-coordinate atom counts are sufficient
/// statistics).
#[derive(Debug)]
pub enum EmpiricalView<'a> {
    Atoms { spec: &'a ProblemSpec, counts: Vec<[usize; 3]>, n: usize },
    General { spec: &'a ProblemSpec, samples: &'a [Sample] },
}

impl<'a> EmpiricalView<'a> {
    pub fn build(spec: &'a ProblemSpec, samples: &'a [Sample]) -> Self {
        match spec.family() {
            Family::SparseOptimumL1 { dim, .. } | Family::DenseOptimumLinf { dim, .. } => {
                let mut counts = vec![[0usize; 3]; *dim];
                for s in samples {
                    match &s.value {
                        SampleValue::Atoms(a) => {
                            for j in 0..*dim {
                                counts[j][(a[j] + 1) as usize] += 1;
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                EmpiricalView::Atoms { spec, counts, n: samples.len() }
            }
            _ => EmpiricalView::General { spec, samples },
        }
    }

    pub fn n(&self) -> usize {
        match self {
            EmpiricalView::Atoms { n, .. } => *n,
            EmpiricalView::General { samples, .. } => samples.len(),
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        match self {
            EmpiricalView::Atoms { spec, .. } => spec,
            EmpiricalView::General { spec, .. } => spec,
        }
    }

    /// (1/n) sum_i f_i(x).
    pub fn mean_loss(&self, x: &[f64]) -> f64 {
        match self {
            EmpiricalView::Atoms { spec, counts, n } => {
                let mut total = 0.0;
                for j in 0..x.len() {
                    let u = x[j] - spec.abs_optimum(j);
                    let w = spec.abs_weight(j);
                    let c = &counts[j];
                    total += w
                        * (c[0] as f64 * (u + 1.0).abs()
                            + c[1] as f64 * u.abs()
                            + c[2] as f64 * (u - 1.0).abs());
                }
                total / *n as f64
            }
            EmpiricalView::General { spec, samples } => {
                samples.iter().map(|s| spec.loss(x, s)).sum::<f64>() / samples.len() as f64
            }
        }
    }

    /// (1/n) sum_i grad f_i(x), minimum-norm at kinks.
    pub fn mean_subgradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            EmpiricalView::Atoms { spec, counts, n } => {
                for j in 0..x.len() {
                    let u = x[j] - spec.abs_optimum(j);
                    let w = spec.abs_weight(j);
                    let c = &counts[j];
                    out[j] = w
                        * (c[0] as f64 * signum_min_norm(u + 1.0)
                            + c[1] as f64 * signum_min_norm(u)
                            + c[2] as f64 * signum_min_norm(u - 1.0))
                        / *n as f64;
                }
            }
            EmpiricalView::General { spec, samples } => {
                out.fill(0.0);
                let mut g = vec![0.0; x.len()];
                for s in *samples {
                    spec.subgradient(x, s, &mut g);
                    for j in 0..x.len() {
                        out[j] += g[j];
                    }
                }
                let inv = 1.0 / samples.len() as f64;
                for v in out.iter_mut() {
                    *v *= inv;
                }
            }
        }
    }

    /// Per-coordinate empirical gradient variances
    /// D_j(x) = (1/n) sum_i (grad_j f_i(x) - mean_j)^2.
    pub fn gradient_variances(&self, x: &[f64], out: &mut [f64]) {
        match self {
            EmpiricalView::Atoms { spec, counts, n } => {
                let nf = *n as f64;
                for j in 0..x.len() {
                    let u = x[j] - spec.abs_optimum(j);
                    let w = spec.abs_weight(j);
                    let g = [
                        w * signum_min_norm(u + 1.0),
                        w * signum_min_norm(u),
                        w * signum_min_norm(u - 1.0),
                    ];
                    let c = &counts[j];
                    let mean =
                        (c[0] as f64 * g[0] + c[1] as f64 * g[1] + c[2] as f64 * g[2]) / nf;
                    let second = (c[0] as f64 * g[0] * g[0]
                        + c[1] as f64 * g[1] * g[1]
                        + c[2] as f64 * g[2] * g[2])
                        / nf;
                    out[j] = (second - mean * mean).max(0.0);
                }
            }
            EmpiricalView::General { spec, samples } => {
                let d = x.len();
                let mut mean = vec![0.0; d];
                let mut second = vec![0.0; d];
                let mut g = vec![0.0; d];
                for s in *samples {
                    spec.subgradient(x, s, &mut g);
                    for j in 0..d {
                        mean[j] += g[j];
                        second[j] += g[j] * g[j];
                    }
                }
                let inv = 1.0 / samples.len() as f64;
                for j in 0..d {
                    mean[j] *= inv;
                    second[j] *= inv;
                    out[j] = (second[j] - mean[j] * mean[j]).max(0.0);
                }
            }
        }
    }
}

fn pick_min_1d(cands: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut best = cands[0];
    let mut best_val = f(cands[0]);
    for &c in &cands[1..] {
        let v = f(c);
        if v < best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

/// sign(u) with the minimum-norm convention sign(0) = 0.
#[inline]
pub fn signum_min_norm(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn harmonic_weight(j: usize) -> f64 {
    1.0 / (j + 1) as f64
}

fn draw_atom(rng: &mut CounterRng, kink_mass: f64) -> i8 {
    let u = rng.next_f64();
    if u < 0.5 * kink_mass {
        -1
    } else if u < kink_mass {
        1
    } else {
        0
    }
}

/// E |u - S'| for the three-atom noise S' in {-1, 0, +1} with masses
/// (rho/2, 1 - rho, rho/2).
fn atom_abs_mean(u: f64, rho: f64) -> f64 {
    (1.0 - rho) * u.abs() + 0.5 * rho * ((u - 1.0).abs() + (u + 1.0).abs())
}

fn logistic_scores(x: &[f64], classes: usize, features: usize, f: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; classes];
    for c in 0..classes {
        let row = &x[c * features..(c + 1) * features];
        z[c] = row.iter().zip(f).map(|(w, v)| w * v).sum();
    }
    z
}

fn logistic_loss(x: &[f64], classes: usize, features: usize, label: u32, f: &[f64]) -> f64 {
    let z = logistic_scores(x, classes, features, f);
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = zmax + z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln();
    lse - z[label as usize]
}

fn logistic_subgradient(
    x: &[f64],
    classes: usize,
    features: usize,
    label: u32,
    f: &[f64],
    out: &mut [f64],
) {
    let z = logistic_scores(x, classes, features, f);
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut p: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
    for v in &p {
        total += v;
    }
    for v in p.iter_mut() {
        *v /= total;
    }
    for c in 0..classes {
        let coef = p[c] - if c == label as usize { 1.0 } else { 0.0 };
        for m in 0..features {
            out[c * features + m] = coef * f[m];
        }
    }
}
