//! Reinsurer-optimal contract parameters.
//!
//! The reinsurer's expected exponential utility is maximized when
//!
//! ```text
//! g1(α, M) = E[e^{β₁ I}] − β₁(1+θ₁)·E[I],    I = X − α·min(X, M)
//! ```
//!
//! is minimized, where the ceded amount is (1−α)x below the cap and
//! x − αM above it. Both first-order conditions are derived from g1:
//!
//! ```text
//! ∂g1/∂α = β₁(1+θ₁)[∫_0^M x dF + M·F̄(M)]
//!          − ∫_0^M β₁ x e^{β₁(1−α)x} dF − β₁ M ∫_M^∞ e^{β₁(x−αM)} dF
//! ∂g1/∂M = α β₁ [ (1+θ₁)·F̄(M) − ∫_M^∞ e^{β₁(x−αM)} dF ]
//! ```
//!
//! The system is solved by damped Newton with a numeric Jacobian from a
//! coarse grid start. The exponential tilt makes the tail integrals the
//! delicate part: they are integrated on [M, T] with T chosen so the
//! remaining tilted mass is ~e^{−40} of the integral (a fixed global
//! truncation quantile would inject more error than the FOC residuals
//! being measured), and the integrand is normalized by its value at M so
//! the quadrature works on O(1) numbers.
//!
//! The search box caps M at the survival level ε/2 of the claim model:
//! beyond that point the cap exceeds every claim value distinguishable at
//! working precision, the objective is flat to machine accuracy, and the
//! FOC residuals vanish identically. When the minimizing ridge runs off to
//! M → ∞ (it does for exponential claims), the solver terminates at that
//! cap, the canonical representative of the numerically indistinguishable
//! flat region.

use crate::contract::ContractParams;
use crate::distributions::{ClaimModel, TailDecay};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::quadrature::integrate;
use crate::utility::UtilityConfig;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;
/// Newton iteration cap.
const MAX_NEWTON: usize = 200;
/// Residuals below this count as converged.
const RESIDUAL_TARGET: f64 = 1e-8;

/// Solution of the reinsurer problem.
#[derive(Debug, Clone, Copy)]
pub struct ReinsurerSolveResult<F> {
    pub params: ContractParams<F>,
    /// The minimized g1 value.
    pub objective_value: F,
    /// Second-derivative matrix entries at the solution.
    pub hessian: [[F; 2]; 2],
    pub hessian_det: F,
    /// Determinant positive and leading entry positive.
    pub hessian_ok: bool,
    pub iterations: usize,
    /// True when the final FOC residuals are below 1e-8.
    pub converged: bool,
    /// Max-norm of the FOC residuals at the returned point.
    pub residual_norm: F,
}

/// g1 value plus the bound on what the tail truncation discarded.
#[derive(Debug, Clone, Copy)]
pub struct G1Eval<F> {
    pub value: F,
    pub tail_remainder_bound: F,
}

/// Checks that E[e^{βX}] exists for the claim tail.
pub fn ensure_exponential_moment<F: Real>(model: &ClaimModel<F>, beta: F) -> Result<()> {
    match model.tail_decay() {
        TailDecay::Superexponential => Ok(()),
        TailDecay::Exponential(rate) => {
            if beta < rate {
                Ok(())
            } else {
                Err(Error::DivergentMoment(format!(
                    "beta = {beta} >= tail decay rate {rate} for {}; E[e^(beta X)] diverges",
                    model.family_name()
                )))
            }
        }
        TailDecay::Subexponential => Err(Error::DivergentMoment(format!(
            "{} with shape < 1 has a subexponential tail; no exponential moment exists",
            model.family_name()
        ))),
    }
}

/// ∫_m^∞ e^{β(x − shift)} dF, integrated on [m, T] with the integrand
/// normalized to 1 at m. Returns (value, remainder bound beyond T).
fn tilted_tail<F: Real>(model: &ClaimModel<F>, m: F, beta: F, shift: F) -> Result<(F, F)> {
    let t = model.tilted_tail_cutoff(beta, m);
    let ln_scale = beta * m + model.ln_pdf(m);
    if ln_scale == F::neg_infinity() {
        return Ok((F::zero(), F::zero()));
    }
    let q = integrate(
        |x| (beta * x + model.ln_pdf(x) - ln_scale).exp(),
        m,
        t,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?;
    let scale = (ln_scale - beta * shift).exp();
    // Beyond T the integrand decays at least at rate −(β + (ln f)′); bound
    // the remainder by the exponential envelope from T.
    let decay = -(beta + model.ln_pdf_derivative(t));
    let bound = if decay > F::zero() {
        (beta * t + model.ln_pdf(t) - ln_scale).exp() / decay * scale
    } else {
        F::infinity()
    };
    Ok((q.value * scale, bound))
}

/// ∫_m^∞ (x − shift) dF for shift <= m, same normalization scheme.
fn linear_tail<F: Real>(model: &ClaimModel<F>, m: F, shift: F) -> Result<F> {
    let t = model.tilted_tail_cutoff(F::zero(), m);
    let ln_scale = model.ln_pdf(m) + (m - shift).max(F::of(1e-300)).ln();
    if ln_scale == F::neg_infinity() {
        return Ok(F::zero());
    }
    let q = integrate(
        |x| ((x - shift).max(F::zero()).ln() + model.ln_pdf(x) - ln_scale).exp(),
        m,
        t,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?;
    Ok(q.value * ln_scale.exp())
}

/// E[e^{β I}] for the ceded risk I = X − α·min(X, M).
pub fn exp_moment_ceded<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    beta: F,
) -> Result<F> {
    ensure_exponential_moment(model, beta)?;
    let below = integrate(
        |x| (beta * (F::one() - c.alpha) * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let (above, _) = tilted_tail(model, c.cap_m, beta, c.alpha * c.cap_m)?;
    Ok(below + above)
}

/// g1(α, M) with the truncation remainder bound attached.
pub fn g1_detailed<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<G1Eval<F>> {
    ensure_exponential_moment(model, cfg.beta)?;
    let beta = cfg.beta;
    let one_plus = F::one() + cfg.loading;

    let below = integrate(
        |x| (beta * (F::one() - c.alpha) * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let (above, tail_bound) = tilted_tail(model, c.cap_m, beta, c.alpha * c.cap_m)?;

    let plain_below = integrate(
        |x| x * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let ceded_below = (F::one() - c.alpha) * plain_below;
    let ceded_above = linear_tail(model, c.cap_m, c.alpha * c.cap_m)?;

    let value = below + above - beta * one_plus * (ceded_below + ceded_above);
    if !value.is_finite() {
        return Err(Error::Numeric(format!(
            "g1 evaluated non-finite at alpha={}, M={}",
            c.alpha, c.cap_m
        )));
    }
    Ok(G1Eval { value, tail_remainder_bound: tail_bound })
}

/// g1(α, M): the contract-dependent part of −ln(−EU) for the reinsurer.
pub fn g1<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<F> {
    Ok(g1_detailed(c, model, cfg)?.value)
}

/// FOC residuals [∂g1/∂α, ∂g1/∂M] at an unclamped point.
fn foc_raw<F: Real>(alpha: F, m: F, model: &ClaimModel<F>, cfg: &UtilityConfig<F>) -> Result<[F; 2]> {
    let beta = cfg.beta;
    let one_plus = F::one() + cfg.loading;
    let surv = model.survival(m);
    let tilted_x_below = integrate(
        |x| x * (beta * (F::one() - alpha) * x).exp() * model.pdf(x),
        F::zero(),
        m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let plain_x_below = integrate(
        |x| x * model.pdf(x),
        F::zero(),
        m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let (tail_exp, _) = tilted_tail(model, m, beta, alpha * m)?;
    let r_alpha = beta * one_plus * (plain_x_below + m * surv)
        - beta * tilted_x_below
        - beta * m * tail_exp;
    let r_m = alpha * beta * (one_plus * surv - tail_exp);
    Ok([r_alpha, r_m])
}

/// FOC residuals at a contract point, for tests and diagnostics.
pub fn foc_residuals_reinsurer<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<[F; 2]> {
    ensure_exponential_moment(model, cfg.beta)?;
    foc_raw(c.alpha, c.cap_m, model, cfg)
}

fn norm_inf<F: Real>(r: [F; 2]) -> F {
    r[0].abs().max(r[1].abs())
}

/// Solves the 2-D FOC system for (α̂₁, M̂₁).
pub fn solve_reinsurer<F: Real>(
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<ReinsurerSolveResult<F>> {
    ensure_exponential_moment(model, cfg.beta)?;

    // Search box: α in [0,1]; M from the median up to the survival-ε/2
    // horizon, past which F(M) is indistinguishable from 1 at this
    // precision.
    let m_lo = model.quantile(F::half())?;
    let m_cap = model.quantile_upper(F::half() * F::epsilon())?;

    // Coarse 60x60 grid minimum of g1 as the Newton start.
    let n_grid = 60;
    let m_grid_hi = model.quantile(F::one() - F::of(1e-6))?;
    let mut best = (F::infinity(), F::half(), m_lo);
    for i in 0..n_grid {
        let alpha = F::of_usize(i) / F::of_usize(n_grid - 1);
        for j in 0..n_grid {
            let m = m_lo + (m_grid_hi - m_lo) * F::of_usize(j) / F::of_usize(n_grid - 1);
            let c = ContractParams::new(alpha, m)?;
            let v = g1(&c, model, cfg)?;
            if v < best.0 {
                best = (v, alpha, m);
            }
        }
    }

    let clamp = |a: F, m: F| (a.clamp(F::zero(), F::one()), m.clamp(m_lo, m_cap));
    let (mut alpha, mut m) = clamp(best.1, best.2);
    let mut res = foc_raw(alpha, m, model, cfg)?;
    let mut norm = norm_inf(res);
    let mut iterations = 0;

    while iterations < MAX_NEWTON {
        iterations += 1;
        // Numeric Jacobian, central differences.
        let ha = F::of(1e-7);
        let hm = F::of(1e-7) * m.abs().max(F::one());
        let ra_p = foc_raw(alpha + ha, m, model, cfg)?;
        let ra_m = foc_raw(alpha - ha, m, model, cfg)?;
        let rm_p = foc_raw(alpha, m + hm, model, cfg)?;
        let rm_m = foc_raw(alpha, m - hm, model, cfg)?;
        let j = [
            [
                (ra_p[0] - ra_m[0]) / (F::two() * ha),
                (rm_p[0] - rm_m[0]) / (F::two() * hm),
            ],
            [
                (ra_p[1] - ra_m[1]) / (F::two() * ha),
                (rm_p[1] - rm_m[1]) / (F::two() * hm),
            ],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (da, dm) = if det.abs() > F::of(1e-300) {
            (
                -(j[1][1] * res[0] - j[0][1] * res[1]) / det,
                -(j[0][0] * res[1] - j[1][0] * res[0]) / det,
            )
        } else {
            // Singular Jacobian: fall back to independent diagonal steps.
            let da = if j[0][0].abs() > F::of(1e-300) { -res[0] / j[0][0] } else { F::zero() };
            let dm = if j[1][1].abs() > F::of(1e-300) { -res[1] / j[1][1] } else { F::zero() };
            (da, dm)
        };

        // Damped line search: halve until the residual norm drops.
        let floor = F::of(2f64.powi(-20));
        let mut accepted = None;
        let mut step = F::one();
        while step >= floor {
            let (ta, tm) = clamp(alpha + step * da, m + step * dm);
            let tr = foc_raw(ta, tm, model, cfg)?;
            let tn = norm_inf(tr);
            if tn < norm {
                accepted = Some((ta, tm, tr));
                break;
            }
            step = step * F::half();
        }
        // The two residual components live on very different scales once M
        // runs into the tail: ∂g1/∂α is an O(1) balance of quadratures
        // while ∂g1/∂M decays with F̄(M). When the joint step stalls inside
        // the α-residual's evaluation noise, keep relaxing the M component
        // alone; its residual is computed from normalized tail integrals
        // and stays meaningful all the way to the search cap.
        if accepted.is_none() && j[1][1].abs() > F::of(1e-300) {
            let dm_only = -res[1] / j[1][1];
            let mut step = F::one();
            while step >= floor {
                let (_, tm) = clamp(alpha, m + step * dm_only);
                if tm == m {
                    break;
                }
                let tr = foc_raw(alpha, tm, model, cfg)?;
                if tr[1].abs() < res[1].abs()
                    && tr[0].abs() <= res[0].abs().max(F::of(1e-10)) * F::two()
                {
                    accepted = Some((alpha, tm, tr));
                    break;
                }
                step = step * F::half();
            }
        }
        match accepted {
            Some((ta, tm, tr)) => {
                alpha = ta;
                m = tm;
                res = tr;
                norm = norm_inf(tr);
            }
            // No relaxation improves any residual: the iterate sits at the
            // numerical floor of the system.
            None => break,
        }
    }

    let params = ContractParams::new(alpha, m)?;
    let converged = norm.to_f64_lossy() < RESIDUAL_TARGET;
    let objective_value = g1(&params, model, cfg)?;
    let (hessian, hessian_det) = hessian_reinsurer(&params, model, cfg)?;
    Ok(ReinsurerSolveResult {
        params,
        objective_value,
        hessian,
        hessian_det,
        hessian_ok: hessian_det > F::zero() && hessian[0][0] > F::zero(),
        iterations,
        converged,
        residual_norm: norm,
    })
}

/// Second-derivative matrix of g1 by quadrature. Returns (matrix, det).
pub fn hessian_reinsurer<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<([[F; 2]; 2], F)> {
    ensure_exponential_moment(model, cfg.beta)?;
    let beta = cfg.beta;
    let one_plus = F::one() + cfg.loading;
    let alpha = c.alpha;
    let m = c.cap_m;
    let surv = model.survival(m);
    let pdf_m = model.pdf(m);

    let second_below = integrate(
        |x| beta * beta * x * x * (beta * (F::one() - alpha) * x).exp() * model.pdf(x),
        F::zero(),
        m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let (tail_exp, _) = tilted_tail(model, m, beta, alpha * m)?;

    let a11 = second_below + beta * beta * m * m * tail_exp;
    let a12 = (beta * alpha * m - F::one()) * beta * tail_exp + beta * one_plus * surv;
    let a22 = beta * beta * alpha * alpha * tail_exp
        + beta * alpha * (beta * (F::one() - alpha) * m).exp() * pdf_m
        - beta * alpha * one_plus * pdf_m;
    let det = a11 * a22 - a12 * a12;
    Ok(([[a11, a12], [a12, a22]], det))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> ClaimModel<f64> {
        ClaimModel::exponential(1.0).unwrap()
    }

    fn cfg(beta: f64, loading: f64) -> UtilityConfig<f64> {
        UtilityConfig::new(beta, loading, 1.0, 1.0, 5.0).unwrap()
    }

    /// Closed-form g1 for Exponential(rate) claims: every integral has an
    /// elementary antiderivative. Independent oracle for the quadrature path.
    pub(crate) fn g1_closed_exponential(
        alpha: f64,
        m: f64,
        rate: f64,
        beta: f64,
        loading: f64,
    ) -> f64 {
        let b = beta * (1.0 - alpha);
        let a = rate - b;
        let below = if a.abs() < 1e-14 { rate * m } else { rate * (1.0 - (-a * m).exp()) / a };
        let above = rate * (-beta * alpha * m).exp() * (-(rate - beta) * m).exp() / (rate - beta);
        let ceded_below = (1.0 - alpha) * (1.0 - (-rate * m).exp() * (1.0 + rate * m)) / rate;
        let ceded_above = (-rate * m).exp() * (1.0 / rate + (1.0 - alpha) * m);
        below + above - beta * (1.0 + loading) * (ceded_below + ceded_above)
    }

    #[test]
    fn g1_matches_closed_form() {
        let model = exp1();
        let config = cfg(0.2, 0.3);
        for &(alpha, m) in &[(0.38, 37.001), (0.5, 1.0), (0.1, 0.8), (0.9, 5.0), (0.38, 20.0)] {
            let c = ContractParams::new(alpha, m).unwrap();
            let got = g1(&c, &model, &config).unwrap();
            let want = g1_closed_exponential(alpha, m, 1.0, 0.2, 0.3);
            assert!(
                (got - want).abs() < 1e-9,
                "({alpha},{m}): got {got}, want {want}, diff {:e}",
                got - want
            );
        }
    }

    #[test]
    fn g1_decreases_in_loading() {
        let model = exp1();
        let c = ContractParams::new(0.4, 2.0).unwrap();
        let v1 = g1(&c, &model, &cfg(0.2, 0.3)).unwrap();
        let v2 = g1(&c, &model, &cfg(0.2, 3.0)).unwrap();
        let v3 = g1(&c, &model, &cfg(0.2, 30.0)).unwrap();
        assert!(v2 < v1 && v3 < v2, "premium terms are linear in 1+theta with negative sign");
    }

    #[test]
    fn divergent_moment_is_detected() {
        let model = exp1();
        let c = ContractParams::new(1.0, 100.0).unwrap();
        // beta equal to the rate sits exactly on the integrability boundary.
        assert!(matches!(
            g1(&c, &model, &cfg(1.0, 0.3)),
            Err(Error::DivergentMoment(_))
        ));
        assert!(matches!(
            solve_reinsurer(&model, &cfg(1.5, 0.3)),
            Err(Error::DivergentMoment(_))
        ));
        let heavy = ClaimModel::weibull(0.5, 1.0).unwrap();
        assert!(matches!(
            solve_reinsurer(&heavy, &cfg(0.1, 0.3)),
            Err(Error::DivergentMoment(_))
        ));
    }

    #[test]
    fn tail_remainder_bound_is_small() {
        let model = exp1();
        let c = ContractParams::new(0.38, 5.0).unwrap();
        let eval = g1_detailed(&c, &model, &cfg(0.2, 0.3)).unwrap();
        assert!(eval.tail_remainder_bound < 1e-14 * eval.value.abs());
    }

    #[test]
    fn solves_paper_configuration() {
        let model = exp1();
        let config = cfg(0.2, 0.3);
        let r = solve_reinsurer(&model, &config).unwrap();
        assert!(r.converged, "residual norm {}", r.residual_norm);
        // The ridge optimum: alpha* = 1 - (1 - (1+theta)^(-1/2))/beta.
        let alpha_star = 1.0 - (1.0 - 1.3f64.powf(-0.5)) / 0.2;
        assert!(
            (r.params.alpha - alpha_star).abs() < 1e-5,
            "alpha {} vs ridge {}",
            r.params.alpha,
            alpha_star
        );
        // M runs to the numerical horizon of the exponential model.
        let cap = model.quantile_upper(0.5 * f64::EPSILON).unwrap();
        assert!((r.params.cap_m - cap).abs() < 1e-6, "M {} vs cap {cap}", r.params.cap_m);
        assert!(r.hessian_ok, "det = {}", r.hessian_det);
        // Residual contract.
        let res = foc_residuals_reinsurer(&r.params, &model, &config).unwrap();
        assert!(res[0].abs() < 1e-8 && res[1].abs() < 1e-8, "residuals {res:?}");
    }

    #[test]
    fn m_foc_restatement_at_solution() {
        // Dividing the M-FOC by alpha*beta: tail exp moment = (1+theta)F̄(M).
        let model = exp1();
        let config = cfg(0.2, 0.3);
        let r = solve_reinsurer(&model, &config).unwrap();
        let (tail, _) =
            tilted_tail(&model, r.params.cap_m, config.beta, r.params.alpha * r.params.cap_m)
                .unwrap();
        let rhs = 1.3 * model.survival(r.params.cap_m);
        assert!((tail - rhs).abs() < 1e-8, "tail {tail} vs rhs {rhs}");
    }

    #[test]
    fn solution_invariant_to_initial_wealth_and_scale() {
        let model = exp1();
        let base = solve_reinsurer(&model, &cfg(0.2, 0.3)).unwrap();
        for config in [
            UtilityConfig::new(0.2, 0.3, 1.0, 1.0, 999.0).unwrap(),
            UtilityConfig::new(0.2, 0.3, 4.0, 2.5, 5.0).unwrap(),
        ] {
            let r = solve_reinsurer(&model, &config).unwrap();
            assert!((r.params.alpha - base.params.alpha).abs() < 1e-6);
            assert!((r.params.cap_m - base.params.cap_m).abs() < 1e-6);
        }
    }

    #[test]
    fn hessian_symmetric_with_positive_leading_entry() {
        let model = exp1();
        let config = cfg(0.2, 0.3);
        for &(alpha, m) in &[(0.38, 37.001), (0.5, 1.0), (0.2, 3.0)] {
            let c = ContractParams::new(alpha, m).unwrap();
            let (h, _) = hessian_reinsurer(&c, &model, &config).unwrap();
            assert_eq!(h[0][1], h[1][0]);
            assert!(h[0][0] > 0.0, "a11 at ({alpha},{m})");
        }
    }

    #[test]
    fn hessian_det_positive_at_paper_point() {
        let model = exp1();
        let c = ContractParams::new(0.38, 37.001).unwrap();
        let (_, det) = hessian_reinsurer(&c, &model, &cfg(0.2, 0.3)).unwrap();
        assert!(det > 0.0, "det = {det}");
    }

    #[test]
    fn solver_handles_weibull_claims() {
        // At beta = 2 the exponential tilt bites and the share FOC has an
        // interior solution; M still runs out along the flat ridge.
        let model = ClaimModel::weibull(2.0, 1.0).unwrap();
        let r = solve_reinsurer(&model, &cfg(2.0, 0.3)).unwrap();
        assert!(r.converged, "residual {}", r.residual_norm);
        assert!(r.params.alpha > 0.0 && r.params.alpha < 1.0, "alpha {}", r.params.alpha);
    }

    #[test]
    fn corner_optimum_reports_not_converged() {
        // Weibull(2,1) with beta = 0.2, theta = 0.3: ceding everything
        // (alpha = 0) minimizes g1, the M-FOC vanishes identically there,
        // and no interior stationary point exists. The solver must return
        // the boundary point flagged as not converged rather than fail.
        let model = ClaimModel::weibull(2.0, 1.0).unwrap();
        let r = solve_reinsurer(&model, &cfg(0.2, 0.3)).unwrap();
        assert!(!r.converged);
        assert_eq!(r.params.alpha, 0.0);
        // The stationarity gap points inward: raising the share from 0
        // would increase g1, confirming a constrained corner optimum.
        let res = foc_residuals_reinsurer(&r.params, &model, &cfg(0.2, 0.3)).unwrap();
        assert!(res[0] > 0.0);
    }
}
