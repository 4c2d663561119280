//! Insurer-optimal contract parameters.
//!
//! The insurer's expected exponential utility of terminal wealth is
//! maximized exactly when
//!
//! ```text
//! g0(α, M) = λt·( E[e^{β₀ Y}] − β₀(1+θ₀)·E[Y] ),    Y = α·min(X, M)
//! ```
//!
//! is minimized. Setting ∂g0/∂M = 0 gives the closed retention equation
//! e^{αβ₀M} = 1 + θ₀, i.e. αβ₀M = ln(1+θ₀), which eliminates α. The
//! remaining scalar equation in M,
//!
//! ```text
//! (1+θ₀) ∫_0^M x dF(x) = ∫_0^M x e^{(ln(1+θ₀)/M)·x} dF(x),
//! ```
//!
//! is scanned for a bracket and solved by bisection with a Newton polish.
//! Because e^{(ln(1+θ₀)/M)x} < 1+θ₀ strictly below M, the right side stays
//! below the left for every continuous claim distribution, so in practice
//! the scan finds no interior root: the objective keeps falling as α grows
//! along the retention equation, the reconstructed α exceeds 1, and the
//! solver projects α to 1 and re-solves the retention equation at fixed α
//! (M = ln(1+θ₀)/β₀). The returned flag records the projection, and the
//! brute-force oracle in the acceptance suite confirms the projected point
//! is the constrained minimizer.

use crate::contract::ContractParams;
use crate::distributions::ClaimModel;
use crate::error::{Error, Result};
use crate::float::Real;
use crate::quadrature::integrate;
use crate::utility::UtilityConfig;

/// Inner quadrature tolerances; tighter than the 1e-8 residual target so
/// the root solve is not chasing integration noise.
const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;

/// Solution of the insurer problem.
#[derive(Debug, Clone, Copy)]
pub struct SolveResult<F> {
    pub params: ContractParams<F>,
    /// The minimized g0 value.
    pub objective_value: F,
    pub hessian_det: F,
    /// Determinant positive and leading entry positive.
    pub hessian_ok: bool,
    /// True when α had to be projected onto [0, 1].
    pub projected: bool,
    pub iterations: usize,
}

/// g0(α, M): the part of −ln(−EU) that depends on the contract.
pub fn g0<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<F> {
    let mass = cfg.poisson_mass();
    let ab = c.alpha * cfg.beta;
    let tilted = integrate(
        |x| (ab * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let surv = model.survival(c.cap_m);
    let exp_moment = tilted + (ab * c.cap_m).exp() * surv;

    let first_moment = integrate(
        |x| x * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let expected_retained = c.alpha * (first_moment + c.cap_m * surv);

    let v = mass * (exp_moment - cfg.beta * (F::one() + cfg.loading) * expected_retained);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("g0 evaluated non-finite at alpha={}, M={}", c.alpha, c.cap_m)))
    }
}

/// E[e^{β Y}] for the retained risk Y = α·min(X, M).
pub fn exp_moment_retained<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    beta: F,
) -> Result<F> {
    let ab = c.alpha * beta;
    let tilted = integrate(
        |x| (ab * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    Ok(tilted + (ab * c.cap_m).exp() * model.survival(c.cap_m))
}

/// Residual of the reduced retention equation after eliminating α:
/// r(M) = ∫_0^M x e^{(L/M)x} dF − (1+θ) ∫_0^M x dF with L = ln(1+θ).
fn reduced_residual<F: Real>(m: F, model: &ClaimModel<F>, loading: F) -> Result<F> {
    let l = loading.ln_1p();
    let c = l / m;
    let tilted = integrate(
        |x| x * (c * x).exp() * model.pdf(x),
        F::zero(),
        m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let plain = integrate(
        |x| x * model.pdf(x),
        F::zero(),
        m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    Ok(tilted - (F::one() + loading) * plain)
}

/// First-order-condition residuals of g0 at a point, for diagnostics and
/// tests. Entries: [∂g0/∂α, ∂g0/∂M].
pub fn foc_residuals_insurer<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<[F; 2]> {
    let mass = cfg.poisson_mass();
    let beta = cfg.beta;
    let ab = c.alpha * beta;
    let one_plus = F::one() + cfg.loading;
    let surv = model.survival(c.cap_m);
    let tilted_x = integrate(
        |x| x * (ab * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let plain_x = integrate(
        |x| x * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let cap_tilt = (ab * c.cap_m).exp();
    let d_alpha = mass
        * beta
        * (tilted_x + c.cap_m * cap_tilt * surv - one_plus * (plain_x + c.cap_m * surv));
    let d_m = mass * c.alpha * beta * surv * (cap_tilt - one_plus);
    Ok([d_alpha, d_m])
}

/// Solves for (α̂₀, M̂₀) minimizing g0 subject to α ∈ [0, 1].
pub fn solve_insurer<F: Real>(
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<SolveResult<F>> {
    if cfg.loading <= F::zero() {
        return Err(Error::DegenerateLoading { loading: cfg.loading.to_f64_lossy() });
    }
    let l = cfg.loading.ln_1p();

    // Scan log-spaced retention levels for a sign change of the reduced
    // equation.
    let lo = model.quantile(F::of(0.001))?;
    let hi = model.quantile(F::of(0.9999))?;
    let n_scan = 200;
    let ratio = (hi / lo).ln() / F::of_usize(n_scan - 1);
    let mut iterations = n_scan;
    let mut bracket: Option<(F, F, F, F)> = None;
    let mut prev: Option<(F, F)> = None;
    let mut all_negative = true;
    for i in 0..n_scan {
        let m = lo * (ratio * F::of_usize(i)).exp();
        let r = reduced_residual(m, model, cfg.loading)?;
        if r > F::zero() {
            all_negative = false;
        }
        if let Some((pm, pr)) = prev {
            if (pr <= F::zero()) != (r <= F::zero()) {
                bracket = Some((pm, pr, m, r));
                break;
            }
        }
        prev = Some((m, r));
    }

    let (params, projected) = if let Some((mut a, mut fa, mut b, _fb)) = bracket {
        // Interior root: bisection, then a few secant/Newton polish steps.
        for _ in 0..80 {
            let mid = F::half() * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = reduced_residual(mid, model, cfg.loading)?;
            iterations += 1;
            if (fm <= F::zero()) == (fa <= F::zero()) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        let mut m = F::half() * (a + b);
        for _ in 0..4 {
            let h = F::of(1e-6) * m;
            let f0 = reduced_residual(m, model, cfg.loading)?;
            let f1 = reduced_residual(m + h, model, cfg.loading)?;
            iterations += 2;
            let slope = (f1 - f0) / h;
            if slope == F::zero() {
                break;
            }
            let next = m - f0 / slope;
            if next > a && next < b {
                m = next;
            } else {
                break;
            }
        }
        let alpha = l / (cfg.beta * m);
        if alpha <= F::one() {
            (ContractParams::new(alpha.max(F::zero()), m)?, false)
        } else {
            // Reconstructed share beyond 1: project and re-solve the
            // retention equation at α = 1.
            (ContractParams::new(F::one(), l / cfg.beta)?, true)
        }
    } else if all_negative {
        // The tilted moment never catches the loaded plain moment, so the
        // objective decreases in α all along the retention valley: the
        // constrained optimum sits at α = 1 with M from e^{β M} = 1+θ.
        (ContractParams::new(F::one(), l / cfg.beta)?, true)
    } else {
        return Err(Error::NoRootFound {
            details: format!(
                "retention equation has no sign change on [{:.6}, {:.6}] and does not favor \
                 raising the retained share; scanned {} points",
                lo.to_f64_lossy(),
                hi.to_f64_lossy(),
                n_scan
            ),
        });
    };

    let objective_value = g0(&params, model, cfg)?;
    let (h, det) = hessian_insurer(&params, model, cfg)?;
    Ok(SolveResult {
        params,
        objective_value,
        hessian_det: det,
        hessian_ok: det > F::zero() && h[0][0] > F::zero(),
        projected,
        iterations,
    })
}

/// Hessian of g0 with the retention identity e^{αβM} applied to the second
/// derivatives, evaluated by quadrature. Returns (matrix, determinant).
pub fn hessian_insurer<F: Real>(
    c: &ContractParams<F>,
    model: &ClaimModel<F>,
    cfg: &UtilityConfig<F>,
) -> Result<([[F; 2]; 2], F)> {
    let mass = cfg.poisson_mass();
    let beta = cfg.beta;
    let ab = c.alpha * beta;
    let surv = model.survival(c.cap_m);
    let cap_tilt = (ab * c.cap_m).exp();
    let second_tilted = integrate(
        |x| beta * beta * x * x * (ab * x).exp() * model.pdf(x),
        F::zero(),
        c.cap_m,
        F::of(ABS_TOL),
        F::of(REL_TOL),
    )?
    .value;
    let a11 = mass * (second_tilted + beta * beta * c.cap_m * c.cap_m * cap_tilt * surv);
    let a12 = mass * c.alpha * beta * beta * c.cap_m * cap_tilt * surv;
    let a22 = mass * c.alpha * c.alpha * beta * beta * cap_tilt * surv;
    let det = a11 * a22 - a12 * a12;
    Ok(([[a11, a12], [a12, a22]], det))
}
