//! Compound-Poisson surplus simulation under exponential utility.
//!
//! The insurer's terminal wealth over [0, t] is u₀ + π₀(t) − Σ Yᵢ with
//! premium π₀(t) = (1+θ₀)·λt·E[Y]; the reinsurer's is u₀* + π₁(t) − Σ I(Xᵢ)
//! with π₁(t) = (1+θ₁)·λt·E[I]. Claim counts are Poisson(λt), claim sizes
//! come from the claim model, and utilities are u(x) = −e^{−βx}.
//!
//! Replications fan out from a master seed via [`derive_seed`], so any
//! single replication can be reproduced in isolation and results are
//! identical regardless of how the batch is parallelized.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contract::{expected_ceded, expected_retained, ContractParams};
use crate::distributions::{derive_seed, ClaimModel};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::insurer::exp_moment_retained;
use crate::reinsurer::{ensure_exponential_moment, exp_moment_ceded};
use crate::utility::UtilityConfig;

/// Which side of the contract is being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Insurer,
    Reinsurer,
}

/// Monte Carlo summary of terminal-wealth utility.
#[derive(Debug, Clone, Copy)]
pub struct SurplusSummary<F> {
    pub expected_utility: F,
    /// Standard error of the utility mean.
    pub std_error: F,
    /// Fraction of replications ending with negative surplus.
    pub ruin_frequency: F,
    pub replications: usize,
}

/// Expected-value premium for the party's share over the horizon.
pub fn premium<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
    party: Party,
) -> Result<F> {
    let expected = match party {
        Party::Insurer => expected_retained(c, model)?,
        Party::Reinsurer => expected_ceded(c, model)?,
    };
    Ok((F::one() + cfg.loading) * cfg.lambda * cfg.horizon_t * expected)
}

/// Closed-form expected utility −e^{−β(u₀+π)}·e^{λt(E[e^{βS₁}]−1)}, with
/// the per-claim exponential moment taken by quadrature. Serves as the
/// analytic cross-check for the simulator.
pub fn analytic_expected_utility<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
    party: Party,
) -> Result<F> {
    let moment = match party {
        Party::Insurer => exp_moment_retained(c, model, cfg.beta)?,
        Party::Reinsurer => exp_moment_ceded(c, model, cfg.beta)?,
    };
    let pi = premium(c, model, cfg, party)?;
    let mass = cfg.poisson_mass();
    Ok(-(-cfg.beta * (cfg.initial_wealth + pi)).exp() * (mass * (moment - F::one())).exp())
}

/// Poisson(λt) count by summing unit-exponential inter-arrival times.
fn poisson_count<F: Real, R: Rng>(mass: F, rng: &mut R) -> usize {
    let mut acc = F::zero();
    let mut n = 0;
    loop {
        let u: f64 = rng.sample(rand::distr::Open01);
        acc = acc - F::of(u).ln();
        if acc >= mass {
            return n;
        }
        n += 1;
    }
}

/// Simulates the party's terminal-wealth utility and ruin frequency.
///
/// `horizon_t = 0` (or λ = 0) is allowed here as the guarded no-claims
/// limit: the result is exactly u(u₀) with zero variance.
pub fn simulate_surplus<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
    party: Party,
    replications: usize,
    seed: u64,
) -> Result<SurplusSummary<F>> {
    if replications < 1000 {
        return Err(Error::Domain(format!(
            "surplus simulation needs at least 1000 replications, got {replications}"
        )));
    }
    if party == Party::Reinsurer {
        ensure_exponential_moment(model, cfg.beta)?;
    }
    let mass = cfg.poisson_mass();
    if mass == F::zero() {
        let u = -(-cfg.beta * cfg.initial_wealth).exp();
        let ruined = if cfg.initial_wealth < F::zero() { F::one() } else { F::zero() };
        return Ok(SurplusSummary {
            expected_utility: u,
            std_error: F::zero(),
            ruin_frequency: ruined,
            replications,
        });
    }

    let pi = premium(c, model, cfg, party)?;
    let utilities: Vec<(F, bool)> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep as u64));
            let n = poisson_count(mass, &mut rng);
            let mut loss = F::zero();
            for _ in 0..n {
                let x: F = model.draw(&mut rng);
                let y = c.retained(x);
                loss = loss
                    + match party {
                        Party::Insurer => y,
                        Party::Reinsurer => x - y,
                    };
            }
            let terminal = cfg.initial_wealth + pi - loss;
            (-(-cfg.beta * terminal).exp(), terminal < F::zero())
        })
        .collect();

    let n = F::of_usize(replications);
    let mut mean = F::zero();
    let mut ruins = 0usize;
    for &(u, ruined) in &utilities {
        mean = mean + u;
        if ruined {
            ruins += 1;
        }
    }
    mean = mean / n;
    let mut var = F::zero();
    for &(u, _) in &utilities {
        var = var + (u - mean) * (u - mean);
    }
    var = var / (n - F::one());
    Ok(SurplusSummary {
        expected_utility: mean,
        std_error: (var / n).sqrt(),
        ruin_frequency: F::of_usize(ruins) / n,
        replications,
    })
}

/// Paired comparison of two contracts on common claim paths: returns the
/// mean of (utility at `center` − utility at `other`) and the standard
/// error of that paired difference. Common random numbers keep the
/// comparison noise far below the independent-run noise.
pub fn paired_utility_margin<F: Real>(
    center: &ContractParams<F>,
    other: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
    party: Party,
    replications: usize,
    seed: u64,
) -> Result<(F, F)> {
    if replications < 1000 {
        return Err(Error::Domain(format!(
            "paired comparison needs at least 1000 replications, got {replications}"
        )));
    }
    if party == Party::Reinsurer {
        ensure_exponential_moment(model, cfg.beta)?;
    }
    let mass = cfg.poisson_mass();
    let pi_center = premium(center, model, cfg, party)?;
    let pi_other = premium(other, model, cfg, party)?;

    let diffs: Vec<F> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep as u64));
            let n = poisson_count(mass, &mut rng);
            let mut loss_center = F::zero();
            let mut loss_other = F::zero();
            for _ in 0..n {
                let x: F = model.draw(&mut rng);
                let (yc, yo) = (center.retained(x), other.retained(x));
                match party {
                    Party::Insurer => {
                        loss_center = loss_center + yc;
                        loss_other = loss_other + yo;
                    }
                    Party::Reinsurer => {
                        loss_center = loss_center + (x - yc);
                        loss_other = loss_other + (x - yo);
                    }
                }
            }
            let uc = -(-cfg.beta * (cfg.initial_wealth + pi_center - loss_center)).exp();
            let uo = -(-cfg.beta * (cfg.initial_wealth + pi_other - loss_other)).exp();
            uc - uo
        })
        .collect();

    let n = F::of_usize(replications);
    let mean = diffs.iter().fold(F::zero(), |a, &d| a + d) / n;
    let var = diffs
        .iter()
        .fold(F::zero(), |a, &d| a + (d - mean) * (d - mean))
        / (n - F::one());
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> ClaimModel<f64> {
        ClaimModel::exponential(1.0).unwrap()
    }

    fn insurer_cfg() -> UtilityConfig<f64> {
        UtilityConfig::new(2.0, 0.8, 1.0, 1.0, 5.0).unwrap()
    }

    #[test]
    fn zero_mass_returns_exact_utility() {
        let c = ContractParams::new(0.5, 1.0).unwrap();
        let mut cfg = insurer_cfg();
        cfg.horizon_t = 0.0; // guarded limit, bypassing the constructor
        let s = simulate_surplus(&c, &exp1(), &cfg, Party::Insurer, 1000, 1).unwrap();
        assert_eq!(s.expected_utility, -(-2.0f64 * 5.0).exp());
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.ruin_frequency, 0.0);
    }

    #[test]
    fn rejects_too_few_replications() {
        let c = ContractParams::new(0.5, 1.0).unwrap();
        assert!(simulate_surplus(&c, &exp1(), &insurer_cfg(), Party::Insurer, 10, 1).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let c = ContractParams::new(0.27, 1.08).unwrap();
        let a = simulate_surplus(&c, &exp1(), &insurer_cfg(), Party::Insurer, 5000, 9).unwrap();
        let b = simulate_surplus(&c, &exp1(), &insurer_cfg(), Party::Insurer, 5000, 9).unwrap();
        assert_eq!(a.expected_utility.to_bits(), b.expected_utility.to_bits());
    }

    #[test]
    fn matches_analytic_expected_utility_insurer() {
        let c = ContractParams::new(0.27, 1.08).unwrap();
        let cfg = insurer_cfg();
        let sim = simulate_surplus(&c, &exp1(), &cfg, Party::Insurer, 100_000, 17).unwrap();
        let exact = analytic_expected_utility(&c, &exp1(), &cfg, Party::Insurer).unwrap();
        let gap = (sim.expected_utility - exact).abs();
        assert!(
            gap < 2.0 * sim.std_error,
            "gap {gap} exceeds 2 SE ({})",
            sim.std_error
        );
    }

    #[test]
    fn matches_analytic_expected_utility_reinsurer() {
        let c = ContractParams::new(0.38, 5.0).unwrap();
        let cfg = UtilityConfig::new(0.2, 0.3, 1.0, 1.0, 5.0).unwrap();
        let sim = simulate_surplus(&c, &exp1(), &cfg, Party::Reinsurer, 100_000, 23).unwrap();
        let exact = analytic_expected_utility(&c, &exp1(), &cfg, Party::Reinsurer).unwrap();
        let gap = (sim.expected_utility - exact).abs();
        assert!(
            gap < 2.5 * sim.std_error,
            "gap {gap} vs SE {}",
            sim.std_error
        );
    }

    #[test]
    fn utility_is_translation_covariant_in_wealth() {
        // Shifting u0 by Δ multiplies every path utility by e^{-βΔ} exactly.
        let c = ContractParams::new(0.27, 1.08).unwrap();
        let cfg = insurer_cfg();
        let mut shifted = cfg;
        shifted.initial_wealth += 0.75;
        let base = simulate_surplus(&c, &exp1(), &cfg, Party::Insurer, 20_000, 3).unwrap();
        let moved = simulate_surplus(&c, &exp1(), &shifted, Party::Insurer, 20_000, 3).unwrap();
        let factor = (-2.0f64 * 0.75).exp();
        assert!(
            (moved.expected_utility - base.expected_utility * factor).abs()
                < 1e-12 * base.expected_utility.abs(),
            "covariance violated: {} vs {}",
            moved.expected_utility,
            base.expected_utility * factor
        );
    }

    #[test]
    fn reinsurer_divergent_moment_propagates() {
        let c = ContractParams::new(0.5, 1.0).unwrap();
        let cfg = UtilityConfig::new(1.5, 0.3, 1.0, 1.0, 5.0).unwrap();
        assert!(matches!(
            simulate_surplus(&c, &exp1(), &cfg, Party::Reinsurer, 2000, 1),
            Err(Error::DivergentMoment(_))
        ));
    }

    #[test]
    fn paired_margin_prefers_lower_g0_contract() {
        // (1, ln1.8/2) minimizes g0, so its expected utility must beat a
        // clearly inferior contract by many paired standard errors.
        let model = exp1();
        let cfg = insurer_cfg();
        let center = ContractParams::new(1.0, 1.8f64.ln() / 2.0).unwrap();
        let worse = ContractParams::new(0.27, 1.08).unwrap();
        let (margin, se) =
            paired_utility_margin(&center, &worse, &model, &cfg, Party::Insurer, 50_000, 41)
                .unwrap();
        assert!(margin > 2.0 * se, "margin {margin} se {se}");
    }

    #[test]
    fn premium_is_loaded_expected_share() {
        let c = ContractParams::new(0.27, 1.08).unwrap();
        let cfg = insurer_cfg();
        let p = premium(&c, &exp1(), &cfg, Party::Insurer).unwrap();
        let want = 1.8 * 0.27 * (1.0 - (-1.08f64).exp());
        assert!((p - want).abs() < 1e-9);
        let pr = premium(&c, &exp1(), &cfg, Party::Reinsurer).unwrap();
        let want_r = 1.8 * (1.0 - 0.27 * (1.0 - (-1.08f64).exp()));
        assert!((pr - want_r).abs() < 1e-9);
    }
}
