//! The proportional excess-of-loss contract and its risk measures.
//!
//! Per claim X the insurer retains Y = α·min(X, M) and the reinsurer pays
//! I(X) = X − Y. The two classical comparison contracts are proportional
//! (retain αX) and per-claim excess-of-loss (retain min(X, M)). VaR/TVaR
//! are computed both from a [`ClaimModel`] and from empirical samples, and
//! two checkers verify the retained-risk ordering and variance-dominance
//! statements on concrete samples.

use crate::distributions::ClaimModel;
use crate::error::{Error, Result};
use crate::float::Real;
use crate::quadrature::{adaptive_simpson, integrate};

/// The contract parameter pair (α, M).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractParams<F> {
    /// Retained share α ∈ [0, 1].
    pub alpha: F,
    /// Retention cap M > 0.
    pub cap_m: F,
}

impl<F: Real> ContractParams<F> {
    pub fn new(alpha: F, cap_m: F) -> Result<Self> {
        if !(alpha >= F::zero() && alpha <= F::one()) {
            return Err(Error::InvalidParameters(format!(
                "retained share alpha must lie in [0,1], got {alpha}"
            )));
        }
        if !(cap_m > F::zero() && cap_m.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "retention cap M must be positive and finite, got {cap_m}"
            )));
        }
        Ok(Self { alpha, cap_m })
    }

    /// Insurer share of a claim: α·min(x, M).
    pub fn retained(&self, x: F) -> F {
        self.alpha * x.min(self.cap_m)
    }

    /// Splits a claim into insurer and reinsurer parts.
    pub fn split(&self, x: F) -> Result<LossSplit<F>> {
        ensure_nonnegative_claim(x)?;
        let y = self.retained(x);
        Ok(LossSplit { insurer_part: y, reinsurer_part: x - y, total: x })
    }
}

/// A claim decomposed as X = Y + I(X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSplit<F> {
    /// Y, the insurer's retained amount.
    pub insurer_part: F,
    /// I(X), the ceded amount.
    pub reinsurer_part: F,
    /// The original claim X.
    pub total: F,
}

/// Proportional (quota-share) contract: retain αx.
pub fn split_proportional<F: Real>(x: F, alpha: F) -> Result<LossSplit<F>> {
    ensure_nonnegative_claim(x)?;
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::InvalidParameters(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let y = alpha * x;
    Ok(LossSplit { insurer_part: y, reinsurer_part: x - y, total: x })
}

/// Per-claim excess-of-loss contract: retain min(x, M).
pub fn split_excess<F: Real>(x: F, cap_m: F) -> Result<LossSplit<F>> {
    ensure_nonnegative_claim(x)?;
    if !(cap_m > F::zero()) {
        return Err(Error::InvalidParameters(format!("cap M must be positive, got {cap_m}")));
    }
    let y = x.min(cap_m);
    Ok(LossSplit { insurer_part: y, reinsurer_part: x - y, total: x })
}

fn ensure_nonnegative_claim<F: Real>(x: F) -> Result<()> {
    if x >= F::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("claim amount must be nonnegative and finite, got {x}")))
    }
}

// ---------------------------------------------------------------------------
// Risk measures
// ---------------------------------------------------------------------------

/// VaR of a claim model at level p: the analytic quantile.
pub fn var_model<F: Real>(model: &ClaimModel<F>, p: F) -> Result<F> {
    model.quantile(p)
}

/// TVaR of a claim model: (1/(1−p)) ∫_p^1 VaR[X;ξ] dξ, with the upper limit
/// truncated at 1 − 1e-10 and the average taken by adaptive Simpson.
pub fn tvar_model<F: Real>(model: &ClaimModel<F>, p: F) -> Result<F> {
    if !(p > F::zero() && p < F::one()) {
        return Err(Error::Domain(format!("TVaR level must lie in (0,1), got {p}")));
    }
    let hi = F::one() - F::of(1e-10);
    let integral = adaptive_simpson(
        |xi| model.quantile(xi).expect("xi stays inside (0,1)"),
        p,
        hi,
        F::of(1e-8),
    )?;
    Ok(integral / (F::one() - p))
}

/// Empirical VaR on a sorted sample: the smallest order statistic whose
/// empirical cdf reaches p, i.e. x_(⌈np⌉).
pub fn var_sorted<F: Real>(sorted: &[F], p: F) -> Result<F> {
    if sorted.is_empty() {
        return Err(Error::Domain("empirical VaR needs a nonempty sample".into()));
    }
    if !(p > F::zero() && p < F::one()) {
        return Err(Error::Domain(format!("VaR level must lie in (0,1), got {p}")));
    }
    let n = sorted.len();
    Ok(sorted[order_index(n, p)])
}

/// Empirical VaR on an unsorted sample (sorts a copy).
pub fn var_empirical<F: Real>(xs: &[F], p: F) -> Result<F> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("sample values must be comparable"));
    var_sorted(&v, p)
}

/// Empirical TVaR on a sorted sample: the exact integral of the empirical
/// quantile function over (p, 1), divided by 1 − p. The empirical quantile
/// is the step function ξ ↦ x_(k) on ((k−1)/n, k/n], so the integral is a
/// finite sum and carries no quadrature error.
pub fn tvar_sorted<F: Real>(sorted: &[F], p: F) -> Result<F> {
    if sorted.is_empty() {
        return Err(Error::Domain("empirical TVaR needs a nonempty sample".into()));
    }
    if !(p > F::zero() && p < F::one()) {
        return Err(Error::Domain(format!("TVaR level must lie in (0,1), got {p}")));
    }
    let n = sorted.len();
    let nf = F::of_usize(n);
    let k0 = order_index(n, p);
    let mut acc = F::zero();
    for (k, &x) in sorted.iter().enumerate().skip(k0) {
        let seg_lo = (F::of_usize(k) / nf).max(p);
        let seg_hi = F::of_usize(k + 1) / nf;
        acc = acc + x * (seg_hi - seg_lo);
    }
    Ok(acc / (F::one() - p))
}

/// Empirical TVaR on an unsorted sample (sorts a copy).
pub fn tvar_empirical<F: Real>(xs: &[F], p: F) -> Result<F> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("sample values must be comparable"));
    tvar_sorted(&v, p)
}

/// Zero-based index of x_(⌈np⌉), nudged so integer n·p hit by floating
/// error does not round up a rank.
fn order_index<F: Real>(n: usize, p: F) -> usize {
    let np = (F::of_usize(n) * p).to_f64_lossy();
    let k = (np - 1e-9).ceil().max(1.0) as usize;
    k.min(n) - 1
}

/// E[α·min(X, M)] by quadrature on [0, M] plus the cap atom.
pub fn expected_retained<F: Real>(c: &ContractParams<F>, model: &ClaimModel<F>) -> Result<F> {
    let q = integrate(|x| x * model.pdf(x), F::zero(), c.cap_m, F::of(1e-12), F::of(1e-10))?;
    Ok(c.alpha * (q.value + c.cap_m * model.survival(c.cap_m)))
}

/// E[X − α·min(X, M)] = E[X] − E[Y]; the claim mean is analytic.
pub fn expected_ceded<F: Real>(c: &ContractParams<F>, model: &ClaimModel<F>) -> Result<F> {
    Ok(model.mean() - expected_retained(c, model)?)
}

// ---------------------------------------------------------------------------
// Ordering checkers
// ---------------------------------------------------------------------------

/// One pointwise violation of the retained-loss ordering.
#[derive(Debug, Clone, Copy)]
pub struct DominanceViolation<F> {
    pub index: usize,
    pub claim: F,
    pub retained: F,
    pub excess_retained: F,
    pub proportional_retained: F,
}

/// Outcome of [`check_retained_dominance`].
#[derive(Debug, Clone)]
pub struct DominanceReport<F> {
    pub holds: bool,
    pub violations: usize,
    /// Up to 16 recorded counterexamples.
    pub counterexamples: Vec<DominanceViolation<F>>,
}

/// Verifies pointwise that the combined contract retains no more than
/// either comparison contract: α·min(x,M) ≤ min(x,M) and α·min(x,M) ≤ αx
/// for every sampled claim.
pub fn check_retained_dominance<F: Real>(
    xs: &[F],
    c: &ContractParams<F>,
) -> Result<DominanceReport<F>> {
    let retained: Vec<F> = xs
        .iter()
        .map(|&x| c.split(x).map(|s| s.insurer_part))
        .collect::<Result<_>>()?;
    check_retained_dominance_with(xs, &retained, c)
}

/// Same check against externally supplied retained amounts, so a corrupted
/// split can be detected as a negative control.
pub fn check_retained_dominance_with<F: Real>(
    xs: &[F],
    retained: &[F],
    c: &ContractParams<F>,
) -> Result<DominanceReport<F>> {
    if xs.len() != retained.len() {
        return Err(Error::Domain(format!(
            "sample and retained lengths differ: {} vs {}",
            xs.len(),
            retained.len()
        )));
    }
    let mut report = DominanceReport { holds: true, violations: 0, counterexamples: Vec::new() };
    for (i, (&x, &y)) in xs.iter().zip(retained.iter()).enumerate() {
        ensure_nonnegative_claim(x)?;
        let excess = x.min(c.cap_m);
        let proportional = c.alpha * x;
        if y > excess || y > proportional {
            report.holds = false;
            report.violations += 1;
            if report.counterexamples.len() < 16 {
                report.counterexamples.push(DominanceViolation {
                    index: i,
                    claim: x,
                    retained: y,
                    excess_retained: excess,
                    proportional_retained: proportional,
                });
            }
        }
    }
    Ok(report)
}

/// Hypotheses of the variance-dominance statement, checked pointwise on the
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariancePrecondition {
    /// E[I] must match E[I_N] on the sample.
    MeanMatch,
    /// x ≤ M requires I(x) ≥ I_N(x).
    BelowCap,
    /// x ≥ M with x − I(x) ≤ M requires I(x) ≥ I_N(x).
    AboveCapRetainedBelow,
    /// x ≥ M with x − I(x) ≥ M requires I(x) ≤ I_N(x).
    AboveCapRetainedAbove,
}

/// Outcome of [`check_variance_order`].
#[derive(Debug, Clone)]
pub struct VarianceOrderReport<F> {
    pub failed_preconditions: Vec<VariancePrecondition>,
    /// Sample variance of the retained risk under the competing strategy.
    pub variance_other: F,
    /// Sample variance of the retained risk under the combined contract.
    pub variance_combined: F,
    /// Var(X − I) ≥ Var(X − I_N); only meaningful when the preconditions
    /// hold, so `None` when any failed.
    pub inequality_holds: Option<bool>,
}

/// Checks the variance-dominance statement on a sample: given per-claim
/// reinsurer amounts of a competing strategy with matching mean, and the
/// three pointwise hypotheses, the combined contract's retained risk has
/// the smaller variance. This is a checker on supplied data, not a prover.
pub fn check_variance_order<F: Real>(
    xs: &[F],
    c: &ContractParams<F>,
    other_ceded: &[F],
    mean_tol: F,
) -> Result<VarianceOrderReport<F>> {
    if xs.len() != other_ceded.len() || xs.is_empty() {
        return Err(Error::Domain(format!(
            "sample and ceded lengths must match and be nonempty: {} vs {}",
            xs.len(),
            other_ceded.len()
        )));
    }
    let n = F::of_usize(xs.len());
    let tiny = F::of(1e-12);

    let mut failed = Vec::new();
    let mut mean_other = F::zero();
    let mut mean_comb = F::zero();
    let mut below = true;
    let mut above_lo = true;
    let mut above_hi = true;
    for (&x, &io) in xs.iter().zip(other_ceded.iter()) {
        ensure_nonnegative_claim(x)?;
        let i_n = x - c.retained(x);
        mean_other = mean_other + io;
        mean_comb = mean_comb + i_n;
        let slack = tiny * (F::one() + x.abs());
        if x <= c.cap_m && io < i_n - slack {
            below = false;
        }
        if x >= c.cap_m {
            let kept = x - io;
            if kept <= c.cap_m + slack && io < i_n - slack {
                above_lo = false;
            }
            if kept >= c.cap_m - slack && io > i_n + slack {
                above_hi = false;
            }
        }
    }
    mean_other = mean_other / n;
    mean_comb = mean_comb / n;
    if (mean_other - mean_comb).abs() > mean_tol {
        failed.push(VariancePrecondition::MeanMatch);
    }
    if !below {
        failed.push(VariancePrecondition::BelowCap);
    }
    if !above_lo {
        failed.push(VariancePrecondition::AboveCapRetainedBelow);
    }
    if !above_hi {
        failed.push(VariancePrecondition::AboveCapRetainedAbove);
    }

    let variance = |ceded: &dyn Fn(usize) -> F| {
        let mean = xs
            .iter()
            .enumerate()
            .fold(F::zero(), |acc, (i, &x)| acc + (x - ceded(i)))
            / n;
        xs.iter().enumerate().fold(F::zero(), |acc, (i, &x)| {
            let r = x - ceded(i) - mean;
            acc + r * r
        }) / n
    };
    let variance_other = variance(&|i| other_ceded[i]);
    let variance_combined = variance(&|i| xs[i] - c.retained(xs[i]));

    let inequality_holds = if failed.is_empty() {
        Some(variance_other >= variance_combined - tiny * (F::one() + variance_combined))
    } else {
        None
    };
    Ok(VarianceOrderReport { failed_preconditions: failed, variance_other, variance_combined, inequality_holds })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn split_parts_sum_exactly(
            x in 0.0f64..1e6,
            alpha in 0.0f64..=1.0,
            m in 1e-3f64..1e4,
        ) {
            let c = ContractParams::new(alpha, m).unwrap();
            let s = c.split(x).unwrap();
            // Exact up to one rounding of the subtraction that defines I.
            prop_assert!((s.insurer_part + s.reinsurer_part - x).abs() <= x * f64::EPSILON);
            prop_assert!(s.insurer_part >= 0.0);
            prop_assert!(s.insurer_part <= alpha * m + 1e-12);
            prop_assert!(s.reinsurer_part >= 0.0);
        }

        #[test]
        fn retained_is_monotone(
            x in 0.0f64..1e4,
            dx in 0.0f64..100.0,
            alpha in 0.0f64..=1.0,
            da in 0.0f64..1.0,
            m in 1e-3f64..1e3,
            dm in 0.0f64..100.0,
        ) {
            let alpha2 = (alpha + da).min(1.0);
            let base = ContractParams::new(alpha, m).unwrap();
            prop_assert!(base.retained(x + dx) >= base.retained(x));
            let more_share = ContractParams::new(alpha2, m).unwrap();
            prop_assert!(more_share.retained(x) >= base.retained(x));
            let higher_cap = ContractParams::new(alpha, m + dm).unwrap();
            prop_assert!(higher_cap.retained(x) >= base.retained(x));
        }

        #[test]
        fn dominance_always_holds_for_true_splits(
            seed in 0u64..1000,
            alpha in 0.0f64..=1.0,
            m in 0.05f64..50.0,
        ) {
            let model = crate::distributions::ClaimModel::exponential(1.0).unwrap();
            let xs = model.sample(200, seed);
            let c = ContractParams::new(alpha, m).unwrap();
            let report = check_retained_dominance(&xs, &c).unwrap();
            prop_assert!(report.holds);
        }
    }
}
