//! Subcommand implementations.
//!
//! Each command returns a human-readable summary plus, when it produces
//! tabular output, a CSV body. Output text is fully determined by the
//! configuration and seed, so identical inputs give byte-identical
//! artifacts.

use rayon::prelude::*;

use pxl_core::bayes::{
    balanced_estimate, posterior_summary, BalancedWeights, CededSample, GridSpec, PosteriorSummary,
    PriorTriple,
};
use pxl_core::distributions::{derive_seed, PriorSpec};
use pxl_core::insurer::solve_insurer;
use pxl_core::reinsurer::solve_reinsurer;
use pxl_core::surplus::{simulate_surplus, Party};
use pxl_core::{ContractParams, Error};

use crate::config::{ExperimentConfig, RawConfig, TableRowSpec};
use crate::{parse_pair, CliError};

type Result<T> = std::result::Result<T, CliError>;

/// Rendered result of one subcommand.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub summary: String,
    pub csv: Option<String>,
}

/// One emitted estimate row.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub w1: f64,
    pub w2: f64,
    pub one_minus: f64,
    pub alpha_hat: f64,
    pub m_hat: f64,
}

impl TableRow {
    fn build(w: &BalancedWeights<f64>, estimate: &ContractParams) -> Self {
        // Snap the rounding dust of 1 - w1 - w2 so boundary rows print as
        // an exact zero.
        let one_minus = if w.residual().abs() < 1e-12 { 0.0 } else { w.residual() };
        Self { w1: w.w1, w2: w.w2, one_minus, alpha_hat: estimate.alpha, m_hat: estimate.cap_m }
    }
}

const WEIGHT_CSV_HEADER: &str = "w1,w2,residual_weight,alpha_hat,m_hat";

fn weight_rows_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(WEIGHT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:.5},{:.5},{:.5},{:.5},{:.5}\n",
            r.w1, r.w2, r.one_minus, r.alpha_hat, r.m_hat
        ));
    }
    out
}

fn weight_rows_text(rows: &[TableRow]) -> String {
    let mut out = String::from("    w1      w2     1-w1-w2   alpha_hat     m_hat\n");
    for r in rows {
        out.push_str(&format!(
            "  {:5.2}   {:5.2}   {:7.2}   {:9.5}   {:9.5}\n",
            r.w1, r.w2, r.one_minus, r.alpha_hat, r.m_hat
        ));
    }
    out
}

pub fn solve_insurer_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let r = solve_insurer(&cfg.claim, &cfg.insurer)?;
    let summary = format!(
        "insurer-optimal contract\n  alpha_hat = {:.6}\n  m_hat     = {:.6}\n  objective g0 = {:.9}\n  \
         hessian det = {:.6e} (ok = {})\n  projected = {}\n  iterations = {}\n",
        r.params.alpha,
        r.params.cap_m,
        r.objective_value,
        r.hessian_det,
        r.hessian_ok,
        r.projected,
        r.iterations
    );
    let csv = format!(
        "alpha_hat,m_hat,objective,hessian_det,hessian_ok,projected,iterations\n{:.5},{:.5},{:.5},{:e},{},{},{}\n",
        r.params.alpha, r.params.cap_m, r.objective_value, r.hessian_det, r.hessian_ok, r.projected, r.iterations
    );
    Ok(CommandOutput { summary, csv: Some(csv) })
}

pub fn solve_reinsurer_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let r = solve_reinsurer(&cfg.claim, &cfg.reinsurer)?;
    if !r.converged {
        return Err(CliError::Numeric(Error::NewtonStalled {
            iterations: r.iterations,
            residual: r.residual_norm,
        })
        .with_context(format!(
            "solve-reinsurer did not reach the residual target; best point alpha = {:.6}, M = {:.6}",
            r.params.alpha, r.params.cap_m
        )));
    }
    let summary = format!(
        "reinsurer-optimal contract\n  alpha_hat = {:.6}\n  m_hat     = {:.6}\n  objective g1 = {:.9}\n  \
         hessian det = {:.6e} (ok = {})\n  foc residual = {:.3e}\n  iterations = {}\n",
        r.params.alpha,
        r.params.cap_m,
        r.objective_value,
        r.hessian_det,
        r.hessian_ok,
        r.residual_norm,
        r.iterations
    );
    let csv = format!(
        "alpha_hat,m_hat,objective,hessian_det,hessian_ok,residual,iterations\n{:.5},{:.5},{:.5},{:e},{},{:e},{}\n",
        r.params.alpha, r.params.cap_m, r.objective_value, r.hessian_det, r.hessian_ok, r.residual_norm, r.iterations
    );
    Ok(CommandOutput { summary, csv: Some(csv) })
}

fn posterior_of(cfg: &ExperimentConfig) -> Result<PosteriorSummary<f64>> {
    let obs = cfg.observations()?;
    let sample = CededSample::new(obs)?;
    Ok(posterior_summary(&sample, &cfg.claim, &cfg.priors, GridSpec::cubic(cfg.grid))?)
}

fn describe_posterior(post: &PosteriorSummary<f64>) -> String {
    format!(
        "  E[alpha|z] = {:.6}\n  E[M|z]     = {:.6}\n  log normalizing constant = {:.6}\n  \
         mode cell (theta, alpha, M) = ({:.4}, {:.4}, {:.4})\n  grid = {}x{}x{} over theta {:?}, alpha {:?}, M {:?}\n",
        post.mean_alpha,
        post.mean_m,
        post.log_normalizing,
        post.mode.0,
        post.mode.1,
        post.mode.2,
        post.grid.spec.n_theta,
        post.grid.spec.n_alpha,
        post.grid.spec.n_m,
        post.grid.theta_bounds,
        post.grid.alpha_bounds,
        post.grid.m_bounds
    )
}

pub fn posterior_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let post = posterior_of(cfg)?;
    let summary = format!("posterior summary\n{}", describe_posterior(&post));
    let csv = format!(
        "mean_alpha,mean_m,log_normalizing,n_theta,n_alpha,n_m\n{:.5},{:.5},{:.5},{},{},{}\n",
        post.mean_alpha,
        post.mean_m,
        post.log_normalizing,
        post.grid.spec.n_theta,
        post.grid.spec.n_alpha,
        post.grid.spec.n_m
    );
    Ok(CommandOutput { summary, csv: Some(csv) })
}

fn contract_from_pair(key: &str, raw: &RawConfig) -> Result<ContractParams> {
    let (a, m) = parse_pair(raw.require(key)?)?;
    ContractParams::new(a, m).map_err(CliError::Numeric)
}

/// Combines explicitly supplied targets and posterior means.
pub fn combine_cmd(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<CommandOutput> {
    let t0 = contract_from_pair("target0", raw)?;
    let t1 = contract_from_pair("target1", raw)?;
    let (ma, mm) = parse_pair(raw.require("posterior_mean")?)?;
    let rows = balanced_rows(&cfg.weights, &t0, &t1, ma, mm);
    let summary = format!(
        "balanced combination\n  target0 = ({:.5}, {:.5})\n  target1 = ({:.5}, {:.5})\n  posterior means = ({:.5}, {:.5})\n{}",
        t0.alpha, t0.cap_m, t1.alpha, t1.cap_m, ma, mm,
        weight_rows_text(&rows)
    );
    Ok(CommandOutput { summary, csv: Some(weight_rows_csv(&rows)) })
}

fn balanced_rows(
    weights: &[BalancedWeights<f64>],
    t0: &ContractParams,
    t1: &ContractParams,
    mean_alpha: f64,
    mean_m: f64,
) -> Vec<TableRow> {
    // A posterior summary carrying just the means; only the means enter
    // the combination.
    let post = PosteriorMeansOnly { mean_alpha, mean_m }.into_summary();
    weights
        .iter()
        .map(|w| TableRow::build(w, &balanced_estimate(w, t0, t1, &post)))
        .collect()
}

struct PosteriorMeansOnly {
    mean_alpha: f64,
    mean_m: f64,
}

impl PosteriorMeansOnly {
    fn into_summary(self) -> PosteriorSummary<f64> {
        PosteriorSummary {
            mean_alpha: self.mean_alpha,
            mean_m: self.mean_m,
            grid: pxl_core::bayes::GridUsed {
                spec: GridSpec::cubic(1),
                theta_bounds: (0.0, 0.0),
                alpha_bounds: (0.0, 1.0),
                m_bounds: (0.0, f64::MAX),
            },
            log_normalizing: 0.0,
            normalizing: 1.0,
            mode: (0.0, self.mean_alpha, self.mean_m),
        }
    }
}

/// The canonical 18 weight pairs of the reference table: w1 fixed at 0.1
/// while w2 sweeps 0.1..0.9, then w2 fixed at 0.1 while w1 sweeps.
pub fn reference_weight_pairs() -> Vec<BalancedWeights<f64>> {
    let mut v = Vec::with_capacity(18);
    for i in 1..=9 {
        v.push(BalancedWeights::new(0.1, i as f64 / 10.0).expect("valid weights"));
    }
    for i in 1..=9 {
        v.push(BalancedWeights::new(i as f64 / 10.0, 0.1).expect("valid weights"));
    }
    v
}

/// Reproduces the reference estimate table from configured targets and
/// posterior means, over the canonical 18 weight pairs unless the config
/// lists its own.
pub fn table1_cmd(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<CommandOutput> {
    let t0 = contract_from_pair("target0", raw)?;
    let t1 = contract_from_pair("target1", raw)?;
    let (ma, mm) = parse_pair(raw.require("posterior_mean")?)?;
    let weights =
        if raw.get("weights").is_some() { cfg.weights.clone() } else { reference_weight_pairs() };
    let rows = balanced_rows(&weights, &t0, &t1, ma, mm);
    let summary = format!("balanced estimates over {} weight pairs\n{}", rows.len(), weight_rows_text(&rows));
    Ok(CommandOutput { summary, csv: Some(weight_rows_csv(&rows)) })
}

/// Full report of the three-step pipeline.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub target0: ContractParams,
    pub target1: ContractParams,
    pub posterior: PosteriorSummary<f64>,
    pub rows: Vec<TableRow>,
}

/// Step 1: insurer-optimal targets; step 2: reinsurer-optimal targets;
/// step 3: posterior means from the observations; then the balanced
/// combination for every configured weight pair.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    let ins = solve_insurer(&cfg.claim, &cfg.insurer)?;
    let re = solve_reinsurer(&cfg.claim, &cfg.reinsurer)?;
    if !re.converged {
        return Err(CliError::Numeric(Error::NewtonStalled {
            iterations: re.iterations,
            residual: re.residual_norm,
        }));
    }
    let posterior = posterior_of(cfg)?;
    let rows = cfg
        .weights
        .iter()
        .map(|w| TableRow::build(w, &balanced_estimate(w, &ins.params, &re.params, &posterior)))
        .collect();
    Ok(PipelineReport { target0: ins.params, target1: re.params, posterior, rows })
}

pub fn pipeline_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let report = run_pipeline(cfg)?;
    let summary = format!(
        "pipeline report\nstep 1 (insurer):   alpha0_hat = {:.6}, m0_hat = {:.6}\n\
         step 2 (reinsurer): alpha1_hat = {:.6}, m1_hat = {:.6}\nstep 3 (posterior):\n{}balanced estimates:\n{}",
        report.target0.alpha,
        report.target0.cap_m,
        report.target1.alpha,
        report.target1.cap_m,
        describe_posterior(&report.posterior),
        weight_rows_text(&report.rows)
    );
    Ok(CommandOutput { summary, csv: Some(weight_rows_csv(&report.rows)) })
}

/// Replication summary for one claim/prior row.
#[derive(Debug, Clone)]
pub struct Table2Result {
    pub claim_label: String,
    pub prior_alpha_label: String,
    pub prior_m_label: String,
    pub mean_alpha: f64,
    pub sd_alpha: f64,
    pub mean_m: f64,
    pub sd_m: f64,
}

/// For each configured row, draws `sample_n` claims per replication,
/// treats them as ceded observations, computes the posterior means on the
/// configured grid, and reports the mean and standard deviation of the two
/// estimates across replications. The claim-parameter prior is a point
/// mass at each row's generating parameter.
pub fn run_table2(cfg: &ExperimentConfig) -> Result<Vec<Table2Result>> {
    if cfg.rows.is_empty() {
        return Err(CliError::Config("table2 needs at least one `row = ...` entry".into()));
    }
    if cfg.replications < 1 {
        return Err(CliError::Config("replications must be at least 1".into()));
    }
    cfg.rows
        .iter()
        .enumerate()
        .map(|(row_idx, row)| run_table2_row(cfg, row, derive_seed(cfg.seed, row_idx as u64)))
        .collect()
}

fn run_table2_row(
    cfg: &ExperimentConfig,
    row: &TableRowSpec,
    row_seed: u64,
) -> Result<Table2Result> {
    let priors = PriorTriple::new(
        PriorSpec::point_mass(row.claim.claim_parameter()).map_err(CliError::Numeric)?,
        row.prior_alpha,
        row.prior_m,
    )
    .map_err(CliError::Numeric)?;
    let grid = GridSpec::cubic(cfg.grid);

    let estimates: Vec<(f64, f64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let claims = row.claim.sample(cfg.sample_n, derive_seed(row_seed, rep as u64));
            let sample = CededSample::new(claims).map_err(CliError::Numeric)?;
            let post = posterior_summary(&sample, &row.claim, &priors, grid)?;
            Ok((post.mean_alpha, post.mean_m))
        })
        .collect::<Result<_>>()?;

    let n = estimates.len() as f64;
    let (sum_a, sum_m) = estimates
        .iter()
        .fold((0.0, 0.0), |(a, m), &(ea, em)| (a + ea, m + em));
    let (mean_alpha, mean_m) = (sum_a / n, sum_m / n);
    let (var_a, var_m) = estimates.iter().fold((0.0, 0.0), |(a, m), &(ea, em)| {
        (a + (ea - mean_alpha).powi(2), m + (em - mean_m).powi(2))
    });
    let denom = (n - 1.0).max(1.0);
    Ok(Table2Result {
        claim_label: row.claim_label.clone(),
        prior_alpha_label: row.prior_alpha_label.clone(),
        prior_m_label: row.prior_m_label.clone(),
        mean_alpha,
        sd_alpha: (var_a / denom).sqrt(),
        mean_m,
        sd_m: (var_m / denom).sqrt(),
    })
}

pub fn table2_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let results = run_table2(cfg)?;
    let mut csv = String::from(
        "# claim-parameter prior: point mass at each row's generating parameter\n\
         family,prior_alpha,prior_m,mean_alpha,sd_alpha,mean_m,sd_m\n",
    );
    let mut summary = format!(
        "replication study: {} replications x {} observations per row, {}^2 grid\n\
         claim-parameter prior: point mass at each row's generating parameter\n",
        cfg.replications, cfg.sample_n, cfg.grid
    );
    for r in &results {
        csv.push_str(&format!(
            "{},{},{},{:.5},{:.5},{:.5},{:.5}\n",
            r.claim_label, r.prior_alpha_label, r.prior_m_label, r.mean_alpha, r.sd_alpha, r.mean_m, r.sd_m
        ));
        summary.push_str(&format!(
            "  {:<14} alpha: {:.5} (sd {:.5})   M: {:.5} (sd {:.5})   [priors {} / {}]\n",
            r.claim_label, r.mean_alpha, r.sd_alpha, r.mean_m, r.sd_m, r.prior_alpha_label, r.prior_m_label
        ));
    }
    Ok(CommandOutput { summary, csv: Some(csv) })
}

pub fn simulate_cmd(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<CommandOutput> {
    let alpha = raw.f64_req("alpha")?;
    let m = raw.f64_req("m")?;
    let contract = ContractParams::new(alpha, m).map_err(CliError::Numeric)?;
    let (party, pcfg) = match raw.require("party")? {
        "insurer" => (Party::Insurer, &cfg.insurer),
        "reinsurer" => (Party::Reinsurer, &cfg.reinsurer),
        other => {
            return Err(CliError::Config(format!(
                "party must be `insurer` or `reinsurer`, got `{other}`"
            )))
        }
    };
    let reps = raw.usize_or("reps", 100_000)?;
    let s = simulate_surplus(&contract, &cfg.claim, pcfg, party, reps, cfg.seed)?;
    let summary = format!(
        "surplus simulation ({:?}, alpha = {:.5}, M = {:.5}, {} replications, seed {})\n  \
         expected utility = {:.9}\n  std error        = {:.3e}\n  ruin frequency   = {:.5}\n",
        party, alpha, m, reps, cfg.seed, s.expected_utility, s.std_error, s.ruin_frequency
    );
    let csv = format!(
        "expected_utility,std_error,ruin_frequency,replications\n{:.9},{:e},{:.5},{}\n",
        s.expected_utility, s.std_error, s.ruin_frequency, s.replications
    );
    Ok(CommandOutput { summary, csv: Some(csv) })
}
