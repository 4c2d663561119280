// Scratch probe for solver landing points and posterior means.
use pxl_core::bayes::{posterior_summary, CededSample, GridSpec, PriorTriple};
use pxl_core::distributions::{ClaimModel, PriorSpec};
use pxl_core::insurer::solve_insurer;
use pxl_core::reinsurer::solve_reinsurer;
use pxl_core::utility::UtilityConfig;

fn main() {
    let model: ClaimModel<f64> = ClaimModel::exponential(1.0).unwrap();
    let t0 = std::time::Instant::now();
    let ins = solve_insurer(&model, &UtilityConfig::new(2.0, 0.8, 1.0, 1.0, 5.0).unwrap()).unwrap();
    println!(
        "insurer: alpha={:.6} M={:.6} g0={:.8} det={:.3e} ok={} projected={} iters={} [{:?}]",
        ins.params.alpha,
        ins.params.cap_m,
        ins.objective_value,
        ins.hessian_det,
        ins.hessian_ok,
        ins.projected,
        ins.iterations,
        t0.elapsed()
    );

    let t1 = std::time::Instant::now();
    let re = solve_reinsurer(&model, &UtilityConfig::new(0.2, 0.3, 1.0, 1.0, 5.0).unwrap()).unwrap();
    println!(
        "reinsurer: alpha={:.6} M={:.6} g1={:.8} det={:.3e} ok={} conv={} res={:.3e} iters={} [{:?}]",
        re.params.alpha,
        re.params.cap_m,
        re.objective_value,
        re.hessian_det,
        re.hessian_ok,
        re.converged,
        re.residual_norm,
        re.iterations,
        t1.elapsed()
    );

    let sample = CededSample::new(vec![
        4.117, 1.434, 0.453, 3.333, 0.456, 0.0637, 0.145, 0.211, 3.618, 5.467,
    ])
    .unwrap();
    let priors = PriorTriple::new(
        PriorSpec::point_mass(1.0).unwrap(),
        PriorSpec::beta(2.0, 2.0).unwrap(),
        PriorSpec::exponential(2.0).unwrap(),
    )
    .unwrap();
    for n in [100usize, 200, 400, 800] {
        let t = std::time::Instant::now();
        let post = posterior_summary(&sample, &model, &priors, GridSpec::cubic(n)).unwrap();
        println!(
            "grid {n}: E[alpha|z]={:.6} E[M|z]={:.6} logZ={:.6} mode=({:.3},{:.3},{:.3}) [{:?}]",
            post.mean_alpha,
            post.mean_m,
            post.log_normalizing,
            post.mode.0,
            post.mode.1,
            post.mode.2,
            t.elapsed()
        );
    }
}
