//! Claim-size distributions and prior specifications.
//!
//! Three claim families (Exponential, Weibull, Gamma) with density, cdf,
//! survival, quantile and seeded inverse-transform sampling, plus the prior
//! families used by the posterior grid (Beta, Exponential, Gamma, Uniform,
//! PointMass). Everything is immutable after construction and pure.
//!
//! Parameter conventions, fixed here and relied on everywhere else:
//! - `Exponential(rate)`: pdf r·e^{−rx}, mean 1/r ("intensity" = rate).
//! - `Weibull(shape k, scale s)`: pdf (k/s)(x/s)^{k−1} e^{−(x/s)^k}.
//! - `Gamma(shape a, rate b)`: pdf b^a x^{a−1} e^{−bx} / Γ(a), mean a/b.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::float::Real;
use crate::special;

/// How fast e^{βx} moments can be taken against the claim tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDecay<F> {
    /// Tail thinner than any exponential (Weibull shape > 1): every
    /// exponential moment exists.
    Superexponential,
    /// Tail ~ e^{−rx}: E[e^{βX}] exists iff β < r.
    Exponential(F),
    /// Tail heavier than exponential (Weibull shape < 1): no exponential
    /// moment exists.
    Subexponential,
}

/// Parametric claim-size distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClaimModel<F> {
    Exponential { rate: F },
    Weibull { shape: F, scale: F },
    Gamma { shape: F, rate: F },
}

impl<F: Real> ClaimModel<F> {
    pub fn exponential(rate: F) -> Result<Self> {
        ensure_positive("Exponential rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn weibull(shape: F, scale: F) -> Result<Self> {
        ensure_positive("Weibull shape", shape)?;
        ensure_positive("Weibull scale", scale)?;
        Ok(Self::Weibull { shape, scale })
    }

    pub fn gamma(shape: F, rate: F) -> Result<Self> {
        ensure_positive("Gamma shape", shape)?;
        ensure_positive("Gamma rate", rate)?;
        Ok(Self::Gamma { shape, rate })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Weibull { .. } => "weibull",
            Self::Gamma { .. } => "gamma",
        }
    }

    /// The scalar claim parameter θ that the posterior ranges over:
    /// the rate for Exponential and Gamma, the scale for Weibull.
    /// Shape parameters stay fixed at their configured values.
    pub fn claim_parameter(&self) -> F {
        match *self {
            Self::Exponential { rate } => rate,
            Self::Weibull { scale, .. } => scale,
            Self::Gamma { rate, .. } => rate,
        }
    }

    /// Same family and fixed shape, with the scalar claim parameter
    /// replaced by `theta`.
    pub fn with_claim_parameter(&self, theta: F) -> Result<Self> {
        match *self {
            Self::Exponential { .. } => Self::exponential(theta),
            Self::Weibull { shape, .. } => Self::weibull(shape, theta),
            Self::Gamma { shape, .. } => Self::gamma(shape, theta),
        }
    }

    pub fn pdf(&self, x: F) -> F {
        if x < F::zero() {
            return F::zero();
        }
        match *self {
            Self::Exponential { rate } => rate * (-rate * x).exp(),
            Self::Weibull { shape, scale } => {
                if x == F::zero() {
                    return weibull_pdf_at_zero(shape, scale);
                }
                let z = x / scale;
                (shape / scale) * z.powf(shape - F::one()) * (-z.powf(shape)).exp()
            }
            Self::Gamma { shape, rate } => {
                if x == F::zero() {
                    return gamma_pdf_at_zero(shape, rate);
                }
                self.ln_pdf(x).exp()
            }
        }
    }

    /// Log-density; −∞ off the support. The likelihood code works in logs.
    pub fn ln_pdf(&self, x: F) -> F {
        if x < F::zero() {
            return F::neg_infinity();
        }
        match *self {
            Self::Exponential { rate } => rate.ln() - rate * x,
            Self::Weibull { shape, scale } => {
                if x == F::zero() {
                    return weibull_pdf_at_zero(shape, scale).ln();
                }
                let z = x / scale;
                (shape / scale).ln() + (shape - F::one()) * z.ln() - z.powf(shape)
            }
            Self::Gamma { shape, rate } => {
                if x == F::zero() {
                    return gamma_pdf_at_zero(shape, rate).ln();
                }
                shape * rate.ln() + (shape - F::one()) * x.ln() - rate * x
                    - special::ln_gamma(shape)
            }
        }
    }

    /// d/dx ln f(x) on the support interior; used for tail decay bounds.
    pub fn ln_pdf_derivative(&self, x: F) -> F {
        match *self {
            Self::Exponential { rate } => -rate,
            Self::Weibull { shape, scale } => {
                (shape - F::one()) / x - (shape / scale) * (x / scale).powf(shape - F::one())
            }
            Self::Gamma { shape, rate } => (shape - F::one()) / x - rate,
        }
    }

    pub fn cdf(&self, x: F) -> F {
        if x <= F::zero() {
            return F::zero();
        }
        match *self {
            Self::Exponential { rate } => -(-rate * x).exp_m1(),
            Self::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
            Self::Gamma { shape, rate } => special::reg_lower_gamma(shape, rate * x),
        }
    }

    /// Survival function F̄(x) = 1 − F(x), computed directly so it stays
    /// accurate in the far tail.
    pub fn survival(&self, x: F) -> F {
        if x <= F::zero() {
            return F::one();
        }
        match *self {
            Self::Exponential { rate } => (-rate * x).exp(),
            Self::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
            Self::Gamma { shape, rate } => special::reg_upper_gamma(shape, rate * x),
        }
    }

    /// Generalized inverse of the cdf. `p` must lie in (0, 1).
    pub fn quantile(&self, p: F) -> Result<F> {
        ensure_open_unit("quantile probability", p)?;
        Ok(match *self {
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
            Self::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(F::one() / shape),
            Self::Gamma { shape, rate } => special::inv_reg_lower_gamma(p, shape) / rate,
        })
    }

    /// Inverse survival: the x with F̄(x) = s, evaluated in log space so it
    /// works for survival levels far below machine epsilon.
    pub fn quantile_upper(&self, s: F) -> Result<F> {
        if !(s > F::zero() && s < F::one()) || !s.is_finite() {
            return Err(Error::Domain(format!("survival level {s} outside (0,1)")));
        }
        Ok(match *self {
            Self::Exponential { rate } => -s.ln() / rate,
            Self::Weibull { shape, scale } => scale * (-s.ln()).powf(F::one() / shape),
            Self::Gamma { shape, rate } => {
                if s > F::of(1e-12) {
                    special::inv_reg_lower_gamma(F::one() - s, shape) / rate
                } else {
                    special::inv_reg_upper_gamma_log(s.ln(), shape) / rate
                }
            }
        })
    }

    pub fn mean(&self) -> F {
        match *self {
            Self::Exponential { rate } => F::one() / rate,
            Self::Weibull { shape, scale } => {
                scale * special::ln_gamma(F::one() + F::one() / shape).exp()
            }
            Self::Gamma { shape, rate } => shape / rate,
        }
    }

    /// Exponential decay classification of the tail, used to decide whether
    /// E[e^{βX}] exists.
    pub fn tail_decay(&self) -> TailDecay<F> {
        match *self {
            Self::Exponential { rate } => TailDecay::Exponential(rate),
            Self::Gamma { rate, .. } => TailDecay::Exponential(rate),
            Self::Weibull { shape, scale } => {
                if shape > F::one() {
                    TailDecay::Superexponential
                } else if shape == F::one() {
                    TailDecay::Exponential(F::one() / scale)
                } else {
                    TailDecay::Subexponential
                }
            }
        }
    }

    /// Upper endpoint T >= m such that ∫_T^∞ e^{βx} dF is below ~e^{−40} of
    /// the mass of ∫_m^∞ e^{βx} dF. Callers must have checked integrability
    /// (β strictly inside the tail decay rate).
    pub fn tilted_tail_cutoff(&self, beta: F, m: F) -> F {
        let margin = F::of(40.0);
        match *self {
            Self::Exponential { rate } => m + margin / (rate - beta),
            Self::Gamma { shape, rate } => {
                let extra = (shape - F::one()).max(F::zero()) * F::of(20.0);
                m + (margin + extra) / (rate - beta)
            }
            Self::Weibull { shape, scale } => {
                // ψ(x) = (x/s)^k − βx is the negative log-tilt of the tail;
                // walk out until ψ has grown by the margin past its minimum
                // on [m, ∞).
                let psi = |x: F| (x / scale).powf(shape) - beta * x;
                let stationary = if shape > F::one() {
                    scale * (beta * scale / shape).powf(F::one() / (shape - F::one()))
                } else {
                    F::zero()
                };
                let start = m.max(stationary);
                let floor = psi(start.max(m)).min(psi(m));
                let mut t = start + F::one();
                for _ in 0..200 {
                    if psi(t) >= floor + margin {
                        break;
                    }
                    t = t * F::two();
                }
                t
            }
        }
    }

    /// Inverse-transform sample of size `n`, reproducible for a fixed seed.
    /// The uniform stream is drawn at f64 precision regardless of `F`, so a
    /// given seed produces the same underlying variates at every precision.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<F> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    /// Draws one variate from an existing RNG stream.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> F {
        let u: f64 = rng.sample(rand::distr::Open01);
        self.quantile(F::of(u))
            .expect("Open01 uniform is strictly inside (0,1)")
    }
}

fn weibull_pdf_at_zero<F: Real>(shape: F, scale: F) -> F {
    if shape > F::one() {
        F::zero()
    } else if shape == F::one() {
        F::one() / scale
    } else {
        F::infinity()
    }
}

fn gamma_pdf_at_zero<F: Real>(shape: F, rate: F) -> F {
    if shape > F::one() {
        F::zero()
    } else if shape == F::one() {
        rate
    } else {
        F::infinity()
    }
}

/// Prior specification for one scalar parameter of the posterior grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec<F> {
    Beta { a: F, b: F },
    Exponential { rate: F },
    Gamma { shape: F, rate: F },
    Uniform { lo: F, hi: F },
    PointMass { atom: F },
}

impl<F: Real> PriorSpec<F> {
    pub fn beta(a: F, b: F) -> Result<Self> {
        ensure_positive("Beta a", a)?;
        ensure_positive("Beta b", b)?;
        Ok(Self::Beta { a, b })
    }

    pub fn exponential(rate: F) -> Result<Self> {
        ensure_positive("Exponential rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn gamma(shape: F, rate: F) -> Result<Self> {
        ensure_positive("Gamma shape", shape)?;
        ensure_positive("Gamma rate", rate)?;
        Ok(Self::Gamma { shape, rate })
    }

    pub fn uniform(lo: F, hi: F) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameters(format!(
                "Uniform requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn point_mass(atom: F) -> Result<Self> {
        if !atom.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "PointMass atom must be finite, got {atom}"
            )));
        }
        Ok(Self::PointMass { atom })
    }

    /// Density on the support, zero elsewhere. The PointMass "density" is a
    /// Dirac atom; callers that need it (the grid) treat that axis
    /// specially, and `pdf` reports 1 at the atom for convenience.
    pub fn pdf(&self, x: F) -> F {
        match *self {
            Self::Beta { a, b } => {
                if x <= F::zero() || x >= F::one() {
                    F::zero()
                } else {
                    (-special::ln_beta(a, b)
                        + (a - F::one()) * x.ln()
                        + (b - F::one()) * (F::one() - x).ln())
                    .exp()
                }
            }
            Self::Exponential { rate } => {
                if x < F::zero() {
                    F::zero()
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Gamma { shape, rate } => {
                if x <= F::zero() {
                    F::zero()
                } else {
                    (shape * rate.ln() + (shape - F::one()) * x.ln()
                        - rate * x
                        - special::ln_gamma(shape))
                    .exp()
                }
            }
            Self::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    F::zero()
                } else {
                    F::one() / (hi - lo)
                }
            }
            Self::PointMass { atom } => {
                if x == atom {
                    F::one()
                } else {
                    F::zero()
                }
            }
        }
    }

    pub fn ln_pdf(&self, x: F) -> F {
        let p = self.pdf(x);
        if p > F::zero() {
            p.ln()
        } else {
            F::neg_infinity()
        }
    }

    pub fn cdf(&self, x: F) -> F {
        match *self {
            Self::Beta { a, b } => {
                if x <= F::zero() {
                    F::zero()
                } else if x >= F::one() {
                    F::one()
                } else {
                    special::reg_inc_beta(x, a, b)
                }
            }
            Self::Exponential { rate } => {
                if x <= F::zero() {
                    F::zero()
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Gamma { shape, rate } => {
                if x <= F::zero() {
                    F::zero()
                } else {
                    special::reg_lower_gamma(shape, rate * x)
                }
            }
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(F::zero(), F::one()),
            Self::PointMass { atom } => {
                if x >= atom {
                    F::one()
                } else {
                    F::zero()
                }
            }
        }
    }

    pub fn survival(&self, x: F) -> F {
        F::one() - self.cdf(x)
    }

    pub fn quantile(&self, p: F) -> Result<F> {
        if let Self::PointMass { atom } = self {
            return Ok(*atom);
        }
        ensure_open_unit("quantile probability", p)?;
        Ok(match *self {
            Self::Beta { a, b } => special::inv_reg_inc_beta(p, a, b),
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
            Self::Gamma { shape, rate } => special::inv_reg_lower_gamma(p, shape) / rate,
            Self::Uniform { lo, hi } => lo + p * (hi - lo),
            Self::PointMass { .. } => unreachable!(),
        })
    }

    /// Support hull (lo, hi); hi may be +∞ for the unbounded families.
    pub fn support(&self) -> (F, F) {
        match *self {
            Self::Beta { .. } => (F::zero(), F::one()),
            Self::Exponential { .. } | Self::Gamma { .. } => (F::zero(), F::infinity()),
            Self::Uniform { lo, hi } => (lo, hi),
            Self::PointMass { atom } => (atom, atom),
        }
    }

    pub fn as_point_mass(&self) -> Option<F> {
        match *self {
            Self::PointMass { atom } => Some(atom),
            _ => None,
        }
    }
}

fn ensure_positive<F: Real>(what: &str, v: F) -> Result<()> {
    if v > F::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{what} must be strictly positive, got {v}")))
    }
}

fn ensure_open_unit<F: Real>(what: &str, p: F) -> Result<()> {
    if p > F::zero() && p < F::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must lie in (0,1), got {p}")))
    }
}

/// SplitMix64 step, used to fan a master seed out to per-replication seeds
/// so replication r can be reproduced in isolation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn exp1() -> ClaimModel<f64> {
        ClaimModel::exponential(1.0).unwrap()
    }

    #[test]
    fn exponential_pdf_at_zero_is_rate() {
        assert_eq!(exp1().pdf(0.0), 1.0);
        assert_eq!(ClaimModel::exponential(4.0).unwrap().pdf(0.0), 4.0);
    }

    #[test]
    fn beta_2_2_density_at_half() {
        let prior: PriorSpec<f64> = PriorSpec::beta(2.0, 2.0).unwrap();
        assert!((prior.pdf(0.5) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn weibull_2_1_density_at_one() {
        let w = ClaimModel::weibull(2.0, 1.0).unwrap();
        assert!((w.pdf(1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exponential_quantile_95() {
        let q = exp1().quantile(0.95).unwrap();
        assert!((q - 20f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_prior_cdf() {
        let u: PriorSpec<f64> = PriorSpec::uniform(0.0, 1.0).unwrap();
        assert!((u.cdf(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quantile_cdf_round_trip_all_families() {
        let models: Vec<ClaimModel<f64>> = vec![
            ClaimModel::exponential(1.0).unwrap(),
            ClaimModel::exponential(4.0).unwrap(),
            ClaimModel::weibull(2.0, 1.0).unwrap(),
            ClaimModel::weibull(4.0, 1.0).unwrap(),
            ClaimModel::gamma(2.0, 2.0).unwrap(),
            ClaimModel::gamma(0.7, 1.5).unwrap(),
        ];
        for m in &models {
            for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = m.quantile(p).unwrap();
                assert!(
                    (m.cdf(x) - p).abs() < 1e-9,
                    "{m:?} p={p} x={x} cdf={}",
                    m.cdf(x)
                );
            }
        }
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        assert!(exp1().quantile(0.0).is_err());
        assert!(exp1().quantile(1.0).is_err());
        assert!(exp1().quantile(-0.2).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        let models: Vec<ClaimModel<f64>> = vec![
            ClaimModel::exponential(1.0).unwrap(),
            ClaimModel::weibull(2.0, 1.0).unwrap(),
            ClaimModel::weibull(2.0, 4.0).unwrap(),
            ClaimModel::gamma(2.0, 2.0).unwrap(),
        ];
        for m in &models {
            let hi = m.quantile(1.0 - 1e-10).unwrap();
            let total = integrate(|x| m.pdf(x), 0.0, hi, 1e-12, 1e-10).unwrap().value;
            assert!((total - 1.0).abs() < 1e-6, "{m:?} integral={total}");
        }
    }

    #[test]
    fn prior_pdf_integrates_to_one() {
        let priors: Vec<PriorSpec<f64>> = vec![
            PriorSpec::beta(2.0, 2.0).unwrap(),
            PriorSpec::beta(5.0, 2.0).unwrap(),
            PriorSpec::exponential(2.0).unwrap(),
            PriorSpec::gamma(3.0, 2.0).unwrap(),
            PriorSpec::uniform(0.0, 1.0).unwrap(),
        ];
        for pr in &priors {
            let (lo, hi) = pr.support();
            let hi = if hi.is_finite() { hi } else { pr.quantile(1.0 - 1e-12).unwrap() };
            let total = integrate(|x| pr.pdf(x), lo, hi, 1e-12, 1e-10).unwrap().value;
            assert!((total - 1.0).abs() < 1e-6, "{pr:?} integral={total}");
        }
    }

    #[test]
    fn survival_complements_cdf() {
        let g: ClaimModel<f64> = ClaimModel::gamma(2.0, 2.0).unwrap();
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            assert!((g.cdf(x) + g.survival(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn survival_accurate_in_far_tail() {
        let e = exp1();
        let s = e.survival(50.0);
        assert!((s / (-50.0f64).exp() - 1.0).abs() < 1e-12);
        // 1 - cdf would have returned exactly 0 here.
        assert_eq!(1.0 - e.cdf(50.0), 0.0);
    }

    #[test]
    fn quantile_upper_inverts_survival() {
        let models: Vec<ClaimModel<f64>> = vec![
            ClaimModel::exponential(1.0).unwrap(),
            ClaimModel::weibull(2.0, 1.0).unwrap(),
            ClaimModel::gamma(2.0, 2.0).unwrap(),
        ];
        for m in &models {
            for &s in &[0.5, 1e-3, 1e-10] {
                let x = m.quantile_upper(s).unwrap();
                assert!(
                    (m.survival(x) / s - 1.0).abs() < 1e-6,
                    "{m:?} s={s} x={x} surv={}",
                    m.survival(x)
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_for_fixed_seed() {
        let m = exp1();
        let a = m.sample(1000, 42);
        let b = m.sample(1000, 42);
        assert_eq!(a, b);
        let c = m.sample(1000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_zero_count_is_empty() {
        assert!(exp1().sample(0, 1).is_empty());
    }

    #[test]
    fn sample_mean_close_to_model_mean() {
        let xs = exp1().sample(100_000, 7);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean={mean}");
    }

    #[test]
    fn sample_kolmogorov_distance_small() {
        let m = ClaimModel::weibull(2.0, 1.0).unwrap();
        let mut xs = m.sample(100_000, 11);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = m.cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            d = d.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn samples_stay_in_support() {
        for m in [
            ClaimModel::<f64>::exponential(4.0).unwrap(),
            ClaimModel::gamma(2.0, 2.0).unwrap(),
        ] {
            assert!(m.sample(10_000, 3).iter().all(|&x| x > 0.0 && x.is_finite()));
        }
    }

    #[test]
    fn point_mass_prior_behaves_like_atom() {
        let p = PriorSpec::point_mass(1.5).unwrap();
        assert_eq!(p.as_point_mass(), Some(1.5));
        assert_eq!(p.quantile(0.3).unwrap(), 1.5);
        assert_eq!(p.support(), (1.5, 1.5));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ClaimModel::exponential(0.0).is_err());
        assert!(ClaimModel::weibull(-1.0, 1.0).is_err());
        assert!(ClaimModel::gamma(1.0, f64::NAN).is_err());
        assert!(PriorSpec::uniform(1.0, 1.0).is_err());
        assert!(PriorSpec::beta(0.0, 2.0).is_err());
    }

    #[test]
    fn claim_parameter_substitution() {
        let w = ClaimModel::weibull(2.0, 1.0).unwrap();
        let w2 = w.with_claim_parameter(3.0).unwrap();
        assert_eq!(w2, ClaimModel::Weibull { shape: 2.0, scale: 3.0 });
        assert_eq!(w2.claim_parameter(), 3.0);
    }

    #[test]
    fn derive_seed_spreads_indices() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(99, i)).collect();
        let mut uniq = s.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), s.len());
    }

    #[test]
    fn tilted_cutoff_leaves_negligible_mass() {
        let m = exp1();
        let beta = 0.2;
        let t = m.tilted_tail_cutoff(beta, 5.0);
        // Remaining tilted mass beyond t, relative to the mass beyond 5.
        let tail = |a: f64| (-(1.0 - beta) * a).exp() / (1.0 - beta);
        assert!(tail(t) / tail(5.0) < 1e-15);
    }
}
