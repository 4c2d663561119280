//! Likelihood of ceded losses, the joint posterior over (θ, α, M), and the
//! square-error doubly-balanced combination of estimates.
//!
//! A ceded observation Z = X − α·min(X, M) has the piecewise density
//!
//! ```text
//! f_Z(z) = f_X(z/(1−α)) / (1−α)   for z ≤ (1−α)M     (claim below the cap)
//!        = f_X(z + αM)            for z > (1−α)M     (claim above the cap)
//! ```
//!
//! so the joint likelihood of a sample is a product over the two branches,
//! with n₁ = #{zᵢ ≤ (1−α)M} observations on the proportional branch. The
//! posterior over (θ, α, M) is evaluated on a deterministic tensor midpoint
//! grid clipped to prior quantile ranges, normalized by log-sum-exp, and
//! reduced in a fixed order so results are identical across thread counts.

use rayon::prelude::*;

use crate::contract::ContractParams;
use crate::distributions::{ClaimModel, PriorSpec};
use crate::error::{Error, Result};
use crate::float::Real;

/// Observed ceded-loss values zᵢ = I(xᵢ), all nonnegative.
#[derive(Debug, Clone)]
pub struct CededSample<F> {
    z: Vec<F>,
}

impl<F: Real> CededSample<F> {
    pub fn new(z: Vec<F>) -> Result<Self> {
        if let Some(bad) = z.iter().find(|v| !(**v >= F::zero() && v.is_finite())) {
            return Err(Error::Domain(format!(
                "ceded observations must be nonnegative and finite, got {bad}"
            )));
        }
        Ok(Self { z })
    }

    /// Transforms raw claims into ceded observations under a contract.
    pub fn from_claims(claims: &[F], c: &ContractParams<F>) -> Result<Self> {
        let z = claims
            .iter()
            .map(|&x| c.split(x).map(|s| s.reinsurer_part))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { z })
    }

    pub fn values(&self) -> &[F] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Priors for the claim parameter θ, the share α and the cap M.
#[derive(Debug, Clone, Copy)]
pub struct PriorTriple<F> {
    pub theta: PriorSpec<F>,
    pub alpha: PriorSpec<F>,
    pub m: PriorSpec<F>,
}

impl<F: Real> PriorTriple<F> {
    pub fn new(theta: PriorSpec<F>, alpha: PriorSpec<F>, m: PriorSpec<F>) -> Result<Self> {
        let (alo, ahi) = alpha.support();
        if alo < F::zero() || ahi > F::one() {
            return Err(Error::InvalidParameters(format!(
                "alpha prior support [{alo}, {ahi}] must lie inside [0, 1]"
            )));
        }
        let (mlo, _) = m.support();
        if mlo < F::zero() {
            return Err(Error::InvalidParameters(format!(
                "cap prior support must lie inside (0, inf), got lower bound {mlo}"
            )));
        }
        let (tlo, _) = theta.support();
        if tlo < F::zero() {
            return Err(Error::InvalidParameters(format!(
                "claim-parameter prior support must be nonnegative, got lower bound {tlo}"
            )));
        }
        Ok(Self { theta, alpha, m })
    }
}

/// Balanced-loss weights (ω₁, ω₂). Each lies in [0, 1); the pair may sum to
/// exactly 1, in which case the posterior term drops out entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancedWeights<F> {
    pub w1: F,
    pub w2: F,
}

impl<F: Real> BalancedWeights<F> {
    pub fn new(w1: F, w2: F) -> Result<Self> {
        let in_unit = |w: F| w >= F::zero() && w < F::one();
        if !in_unit(w1) || !in_unit(w2) || w1 + w2 > F::one() {
            return Err(Error::InvalidParameters(format!(
                "weights must lie in [0,1) with w1 + w2 <= 1, got ({w1}, {w2})"
            )));
        }
        Ok(Self { w1, w2 })
    }

    pub fn residual(&self) -> F {
        F::one() - self.w1 - self.w2
    }
}

/// Number of observations on the proportional branch, zᵢ ≤ (1−α)M.
pub fn count_proportional_branch<F: Real>(z: &[F], c: &ContractParams<F>) -> usize {
    let threshold = (F::one() - c.alpha) * c.cap_m;
    z.iter().filter(|&&v| v <= threshold).count()
}

/// Joint log-likelihood of the ceded sample given (θ, α, M). Returns −∞
/// when any factor vanishes; errors when α = 1 (the proportional branch
/// density is undefined there).
pub fn log_likelihood<F: Real>(
    sample: &CededSample<F>,
    theta: F,
    c: &ContractParams<F>,
    family: &ClaimModel<F>,
) -> Result<F> {
    if c.alpha >= F::one() {
        return Err(Error::Domain(
            "ceded-loss likelihood is undefined at alpha = 1 (no proportional branch)".into(),
        ));
    }
    let model = family.with_claim_parameter(theta)?;
    let one_minus = F::one() - c.alpha;
    let threshold = one_minus * c.cap_m;
    let shift = c.alpha * c.cap_m;
    let mut ll = F::zero();
    for &z in sample.values() {
        let term = if z <= threshold {
            model.ln_pdf(z / one_minus) - one_minus.ln()
        } else {
            model.ln_pdf(z + shift)
        };
        if term == F::neg_infinity() {
            return Ok(F::neg_infinity());
        }
        ll = ll + term;
    }
    Ok(ll)
}

/// Per-axis grid resolution. PointMass axes collapse to a single node
/// regardless of the requested count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_alpha: usize,
    pub n_m: usize,
}

impl GridSpec {
    pub fn cubic(n: usize) -> Self {
        Self { n_theta: n, n_alpha: n, n_m: n }
    }

    pub fn doubled(&self) -> Self {
        Self { n_theta: self.n_theta * 2, n_alpha: self.n_alpha * 2, n_m: self.n_m * 2 }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::cubic(200)
    }
}

/// Quantile clip applied to continuous prior axes.
const CLIP: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
struct Axis<F> {
    nodes_lo: F,
    step: F,
    count: usize,
    atom: Option<F>,
}

impl<F: Real> Axis<F> {
    fn build(prior: &PriorSpec<F>, n: usize) -> Result<Self> {
        if let Some(atom) = prior.as_point_mass() {
            return Ok(Self { nodes_lo: atom, step: F::zero(), count: 1, atom: Some(atom) });
        }
        if n == 0 {
            return Err(Error::Domain("grid resolution must be at least 1".into()));
        }
        let lo = prior.quantile(F::of(CLIP))?;
        let hi = prior.quantile(F::one() - F::of(CLIP))?;
        let step = (hi - lo) / F::of_usize(n);
        Ok(Self { nodes_lo: lo, step, count: n, atom: None })
    }

    /// Midpoint of cell i, and the log cell width (0 for an atom).
    fn node(&self, i: usize) -> F {
        match self.atom {
            Some(a) => a,
            None => self.nodes_lo + self.step * (F::of_usize(i) + F::half()),
        }
    }

    fn ln_width(&self) -> F {
        match self.atom {
            Some(_) => F::zero(),
            None => self.step.ln(),
        }
    }

    fn bounds(&self) -> (F, F) {
        match self.atom {
            Some(a) => (a, a),
            None => (self.nodes_lo, self.nodes_lo + self.step * F::of_usize(self.count)),
        }
    }
}

/// Grid actually used by a posterior evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GridUsed<F> {
    pub spec: GridSpec,
    pub theta_bounds: (F, F),
    pub alpha_bounds: (F, F),
    pub m_bounds: (F, F),
}

/// Marginal posterior means and normalization diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorSummary<F> {
    pub mean_alpha: F,
    pub mean_m: F,
    pub grid: GridUsed<F>,
    /// ln ∫ likelihood × priors over the grid (midpoint rule).
    pub log_normalizing: F,
    pub normalizing: F,
    /// (θ, α, M) at the highest-density grid cell.
    pub mode: (F, F, F),
}

/// Evaluates the unnormalized posterior exp(log-likelihood)·π₁·π₂·π₃ on the
/// tensor midpoint grid, normalizes with log-sum-exp, and returns marginal
/// means for α and M.
pub fn posterior_summary<F: Real>(
    sample: &CededSample<F>,
    family: &ClaimModel<F>,
    priors: &PriorTriple<F>,
    grid: GridSpec,
) -> Result<PosteriorSummary<F>> {
    let theta_axis = Axis::build(&priors.theta, grid.n_theta)?;
    let alpha_axis = Axis::build(&priors.alpha, grid.n_alpha)?;
    let m_axis = Axis::build(&priors.m, grid.n_m)?;

    // The α axis must stay strictly below 1 for the likelihood.
    let (_, alpha_hi) = alpha_axis.bounds();
    if alpha_hi >= F::one() && alpha_axis.atom.is_some() {
        return Err(Error::Domain("alpha prior places mass at 1".into()));
    }

    let ln_vol = theta_axis.ln_width() + alpha_axis.ln_width() + m_axis.ln_width();
    let n_cells = theta_axis.count * alpha_axis.count * m_axis.count;

    // Per-θ models are shared across the (α, M) plane.
    let models: Vec<ClaimModel<F>> = (0..theta_axis.count)
        .map(|i| family.with_claim_parameter(theta_axis.node(i)))
        .collect::<Result<_>>()?;

    // Cell order: θ outer, α middle, M inner. Parallel evaluation into a
    // fixed-order buffer keeps the reduction deterministic.
    let cells: Vec<F> = (0..n_cells)
        .into_par_iter()
        .map(|idx| {
            let it = idx / (alpha_axis.count * m_axis.count);
            let rem = idx % (alpha_axis.count * m_axis.count);
            let ia = rem / m_axis.count;
            let im = rem % m_axis.count;
            let theta = theta_axis.node(it);
            let alpha = alpha_axis.node(ia);
            let m = m_axis.node(im);
            if alpha >= F::one() || m <= F::zero() {
                return Ok(F::neg_infinity());
            }
            let c = ContractParams { alpha, cap_m: m };
            let ll = log_likelihood(sample, theta, &c, &models[it])?;
            Ok(ll + priors.theta.ln_pdf(theta)
                + priors.alpha.ln_pdf(alpha)
                + priors.m.ln_pdf(m)
                + ln_vol)
        })
        .collect::<Result<_>>()?;

    let max = cells.iter().fold(F::neg_infinity(), |a, &b| a.max(b));
    if max == F::neg_infinity() {
        return Err(Error::NumericUnderflow(
            "every posterior grid cell has zero mass".into(),
        ));
    }

    let mut total = F::zero();
    let mut acc_alpha = F::zero();
    let mut acc_m = F::zero();
    let mut best = (F::neg_infinity(), 0usize);
    for (idx, &c) in cells.iter().enumerate() {
        let w = (c - max).exp();
        total = total + w;
        let rem = idx % (alpha_axis.count * m_axis.count);
        acc_alpha = acc_alpha + w * alpha_axis.node(rem / m_axis.count);
        acc_m = acc_m + w * m_axis.node(rem % m_axis.count);
        if c > best.0 {
            best = (c, idx);
        }
    }
    let log_normalizing = max + total.ln();
    let it = best.1 / (alpha_axis.count * m_axis.count);
    let rem = best.1 % (alpha_axis.count * m_axis.count);
    Ok(PosteriorSummary {
        mean_alpha: acc_alpha / total,
        mean_m: acc_m / total,
        grid: GridUsed {
            spec: GridSpec {
                n_theta: theta_axis.count,
                n_alpha: alpha_axis.count,
                n_m: m_axis.count,
            },
            theta_bounds: theta_axis.bounds(),
            alpha_bounds: alpha_axis.bounds(),
            m_bounds: m_axis.bounds(),
        },
        log_normalizing,
        normalizing: log_normalizing.exp(),
        mode: (
            theta_axis.node(it),
            alpha_axis.node(rem / m_axis.count),
            m_axis.node(rem % m_axis.count),
        ),
    })
}

/// The square-error doubly-balanced estimate: the affine combination
/// ω₁·target₀ + ω₂·target₁ + (1−ω₁−ω₂)·posterior mean, applied to both α
/// and M.
pub fn balanced_estimate<F: Real>(
    w: &BalancedWeights<F>,
    target0: &ContractParams<F>,
    target1: &ContractParams<F>,
    posterior: &PosteriorSummary<F>,
) -> ContractParams<F> {
    let r = w.residual();
    let alpha = w.w1 * target0.alpha + w.w2 * target1.alpha + r * posterior.mean_alpha;
    let cap_m = w.w1 * target0.cap_m + w.w2 * target1.cap_m + r * posterior.mean_m;
    ContractParams::new(alpha.clamp(F::zero(), F::one()), cap_m)
        .expect("convex combination of valid contract parameters is valid")
}

/// A finite discrete posterior for the balanced-loss equivalence check.
#[derive(Debug, Clone)]
pub struct DiscretePosterior<F> {
    points: Vec<(F, F)>,
}

impl<F: Real> DiscretePosterior<F> {
    pub fn new(points: Vec<(F, F)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("discrete posterior needs support points".into()));
        }
        let mut total = F::zero();
        for &(_, p) in &points {
            if !(p >= F::zero() && p.is_finite()) {
                return Err(Error::Domain(format!("probability {p} invalid")));
            }
            total = total + p;
        }
        if total <= F::zero() {
            return Err(Error::Domain("probabilities sum to zero".into()));
        }
        let points = points.into_iter().map(|(v, p)| (v, p / total)).collect();
        Ok(Self { points })
    }

    pub fn mean(&self) -> F {
        self.points.iter().fold(F::zero(), |a, &(v, p)| a + v * p)
    }
}

/// Result of the brute-force equivalence check.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceCheck<F> {
    pub brute_minimizer: F,
    pub formula_estimate: F,
    pub tolerance: F,
    pub holds: bool,
}

/// Verifies on a discrete posterior that the minimizer of the expected
/// doubly-balanced square loss equals the affine formula, by brute-force
/// minimization over a fine grid of candidate estimates.
pub fn verify_balanced_bayes_equivalence<F: Real>(
    posterior: &DiscretePosterior<F>,
    w: &BalancedWeights<F>,
    delta0: F,
    delta1: F,
) -> EquivalenceCheck<F> {
    let mut lo = delta0.min(delta1);
    let mut hi = delta0.max(delta1);
    for &(v, _) in &posterior.points {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let pad = (hi - lo).max(F::one()) * F::of(0.05);
    lo = lo - pad;
    hi = hi + pad;
    let n = 40_000usize;
    let step = (hi - lo) / F::of_usize(n);

    let expected_loss = |d: F| {
        let fidelity = posterior
            .points
            .iter()
            .fold(F::zero(), |a, &(v, p)| a + p * (v - d) * (v - d));
        w.w1 * (delta0 - d) * (delta0 - d)
            + w.w2 * (delta1 - d) * (delta1 - d)
            + w.residual() * fidelity
    };

    let mut best = (F::infinity(), lo);
    for i in 0..=n {
        let d = lo + step * F::of_usize(i);
        let v = expected_loss(d);
        if v < best.0 {
            best = (v, d);
        }
    }
    let formula = w.w1 * delta0 + w.w2 * delta1 + w.residual() * posterior.mean();
    let tolerance = step * F::two();
    EquivalenceCheck {
        brute_minimizer: best.1,
        formula_estimate: formula,
        tolerance,
        holds: (best.1 - formula).abs() <= tolerance,
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn balanced_estimate_is_affine_identity(
            w1 in 0.0f64..0.99,
            w2_frac in 0.0f64..1.0,
            a0 in 0.0f64..1.0,
            a1 in 0.0f64..1.0,
            am in 0.0f64..1.0,
            m0 in 0.01f64..40.0,
            m1 in 0.01f64..40.0,
            mm in 0.01f64..40.0,
        ) {
            let w2 = (1.0 - w1) * w2_frac * 0.999;
            let w = BalancedWeights::new(w1, w2).unwrap();
            let t0 = ContractParams::new(a0, m0).unwrap();
            let t1 = ContractParams::new(a1, m1).unwrap();
            let post = tests::synthetic_posterior(am, mm);
            let e = balanced_estimate(&w, &t0, &t1, &post);
            let r = 1.0 - w1 - w2;
            prop_assert!((e.alpha - (w1 * a0 + w2 * a1 + r * am)).abs() < 1e-12);
            prop_assert!((e.cap_m - (w1 * m0 + w2 * m1 + r * mm)).abs() < 1e-12);
        }

        #[test]
        fn equivalence_on_random_discrete_posteriors(
            seed in 0u64..10_000,
            w1 in 0.0f64..0.9,
            w2_frac in 0.0f64..1.0,
            d0 in -2.0f64..2.0,
            d1 in -2.0f64..2.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=20usize);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.01..1.0)))
                .collect();
            let post = DiscretePosterior::new(pts).unwrap();
            let w2 = (1.0 - w1) * w2_frac * 0.99;
            let w = BalancedWeights::new(w1, w2).unwrap();
            let check = verify_balanced_bayes_equivalence(&post, &w, d0, d1);
            prop_assert!(
                check.holds,
                "brute {} vs formula {}",
                check.brute_minimizer,
                check.formula_estimate
            );
            prop_assert!((check.brute_minimizer - check.formula_estimate).abs() < 1e-3);
        }

        #[test]
        fn branch_count_matches_direct_count(
            alpha in 0.0f64..0.99,
            m in 0.05f64..10.0,
            seed in 0u64..500,
        ) {
            let model = ClaimModel::exponential(1.0).unwrap();
            let z = model.sample(50, seed);
            let c = ContractParams::new(alpha, m).unwrap();
            let n1 = count_proportional_branch(&z, &c);
            let direct = z.iter().filter(|&&v| v <= (1.0 - alpha) * m).count();
            prop_assert_eq!(n1, direct);
        }
    }
}
