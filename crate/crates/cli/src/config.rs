//! Flat key-value experiment configuration.
//!
//! One `key = value` per line, `#` starts a comment, blank lines ignored.
//! Distributions are written `name(p1[,p2])`, pairs as `a, b` (parentheses
//! optional), the weight list as whitespace-separated `(w1,w2)` pairs, and
//! claim/prior rows for the replication table as
//! `row = claim | alpha-prior | m-prior`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use pxl_core::bayes::{BalancedWeights, PriorTriple};
use pxl_core::distributions::{ClaimModel, PriorSpec};
use pxl_core::utility::UtilityConfig;

use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Raw parsed key-value pairs. Keys are unique except `row`, which may
/// repeat to build up the replication table.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: HashMap<String, String>,
    rows: Vec<String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RawConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if key == "row" {
                cfg.rows.push(value);
            } else if cfg.values.insert(key.clone(), value).is_some() {
                return Err(config_err(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| config_err(format!("missing required key `{key}`")))
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| config_err(format!("key `{key}`: expected a number, got `{s}`"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| config_err(format!("missing required key `{key}`")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| config_err(format!("key `{key}`: expected a count, got `{s}`"))),
        }
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<u64>()
                .map(Some)
                .map_err(|_| config_err(format!("key `{key}`: expected an integer, got `{s}`"))),
        }
    }
}

/// `name(p1[,p2])` into (lowercased name, params).
fn parse_call(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| config_err(format!("expected `name(args)`, got `{s}`")))?;
    if !s.ends_with(')') {
        return Err(config_err(format!("expected closing parenthesis in `{s}`")));
    }
    let name = s[..open].trim().to_ascii_lowercase();
    let inner = &s[open + 1..s.len() - 1];
    let params = inner
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad numeric parameter `{p}` in `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name, params))
}

fn arity(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() == n {
        Ok(())
    } else {
        Err(config_err(format!("{name} takes {n} parameter(s), got {}", params.len())))
    }
}

pub fn parse_claim_model(s: &str) -> Result<ClaimModel<f64>> {
    let (name, p) = parse_call(s)?;
    let model = match name.as_str() {
        "exponential" | "exp" => {
            arity("exponential", &p, 1)?;
            ClaimModel::exponential(p[0])
        }
        "weibull" => {
            arity("weibull", &p, 2)?;
            ClaimModel::weibull(p[0], p[1])
        }
        "gamma" => {
            arity("gamma", &p, 2)?;
            ClaimModel::gamma(p[0], p[1])
        }
        other => {
            return Err(config_err(format!(
                "unknown claim family `{other}` (use exponential, weibull or gamma)"
            )))
        }
    };
    model.map_err(CliError::Numeric)
}

pub fn parse_prior(s: &str) -> Result<PriorSpec<f64>> {
    let (name, p) = parse_call(s)?;
    let prior = match name.as_str() {
        "beta" => {
            arity("beta", &p, 2)?;
            PriorSpec::beta(p[0], p[1])
        }
        "exponential" | "exp" => {
            arity("exponential", &p, 1)?;
            PriorSpec::exponential(p[0])
        }
        "gamma" => {
            arity("gamma", &p, 2)?;
            PriorSpec::gamma(p[0], p[1])
        }
        "uniform" => {
            arity("uniform", &p, 2)?;
            PriorSpec::uniform(p[0], p[1])
        }
        "pointmass" => {
            arity("pointmass", &p, 1)?;
            PriorSpec::point_mass(p[0])
        }
        other => {
            return Err(config_err(format!(
                "unknown prior family `{other}` (use beta, exponential, gamma, uniform or pointmass)"
            )))
        }
    };
    prior.map_err(CliError::Numeric)
}

/// `a, b` with optional surrounding parentheses.
pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let mut it = t.split(',');
    let a = it
        .next()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| config_err(format!("expected `a, b`, got `{s}`")))?;
    let b = it
        .next()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| config_err(format!("expected `a, b`, got `{s}`")))?;
    if it.next().is_some() {
        return Err(config_err(format!("expected exactly two values in `{s}`")));
    }
    Ok((a, b))
}

/// Whitespace- or semicolon-separated list of `(w1,w2)` pairs.
pub fn parse_weights(s: &str) -> Result<Vec<BalancedWeights<f64>>> {
    let mut out = Vec::new();
    for chunk in s.split(|c: char| c.is_whitespace() || c == ';') {
        if chunk.is_empty() {
            continue;
        }
        let (w1, w2) = parse_pair(chunk)?;
        out.push(BalancedWeights::new(w1, w2).map_err(CliError::Numeric)?);
    }
    if out.is_empty() {
        return Err(config_err("weight list is empty"));
    }
    Ok(out)
}

/// Where the observation sample comes from.
#[derive(Debug, Clone)]
pub enum DataSpec {
    Inline(Vec<f64>),
    File(PathBuf),
    Generate { n: usize },
}

/// Whether supplied observations are ceded amounts or raw claims that must
/// be transformed through a contract first.
#[derive(Debug, Clone, Copy)]
pub enum DataKind {
    Ceded,
    Claims { alpha: f64, m: f64 },
}

/// One row of the replication study: claim family plus the two priors.
#[derive(Debug, Clone)]
pub struct TableRowSpec {
    pub claim: ClaimModel<f64>,
    pub prior_alpha: PriorSpec<f64>,
    pub prior_m: PriorSpec<f64>,
    /// Labels exactly as written in the config, echoed into the CSV.
    pub claim_label: String,
    pub prior_alpha_label: String,
    pub prior_m_label: String,
}

/// Fully typed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub claim: ClaimModel<f64>,
    pub insurer: UtilityConfig<f64>,
    pub reinsurer: UtilityConfig<f64>,
    pub priors: PriorTriple<f64>,
    pub weights: Vec<BalancedWeights<f64>>,
    pub data: DataSpec,
    pub data_kind: DataKind,
    pub seed: u64,
    pub replications: usize,
    pub sample_n: usize,
    pub grid: usize,
    pub rows: Vec<TableRowSpec>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let claim = parse_claim_model(raw.require("claim")?)?;
        let lambda = raw.f64_or("lambda", 1.0)?;
        let horizon = raw.f64_or("horizon", 1.0)?;
        let u0 = raw.f64_or("u0", 0.0)?;
        let u0_star = raw.f64_or("u0_star", 0.0)?;
        let insurer = UtilityConfig::new(
            raw.f64_req("beta0")?,
            raw.f64_req("theta0")?,
            lambda,
            horizon,
            u0,
        )
        .map_err(CliError::Numeric)?;
        let reinsurer = UtilityConfig::new(
            raw.f64_req("beta1")?,
            raw.f64_req("theta1")?,
            lambda,
            horizon,
            u0_star,
        )
        .map_err(CliError::Numeric)?;

        // Default claim-parameter prior: pinned at the configured value.
        let theta_prior = match raw.get("prior_theta") {
            Some(s) => parse_prior(s)?,
            None => PriorSpec::point_mass(claim.claim_parameter()).map_err(CliError::Numeric)?,
        };
        let priors = PriorTriple::new(
            theta_prior,
            parse_prior(raw.require("prior_alpha")?)?,
            parse_prior(raw.require("prior_m")?)?,
        )
        .map_err(CliError::Numeric)?;

        let weights = match raw.get("weights") {
            Some(s) => parse_weights(s)?,
            None => vec![BalancedWeights::new(0.0, 0.0).map_err(CliError::Numeric)?],
        };

        let data = Self::data_spec(raw)?;
        let data_kind = match raw.get("data_kind").unwrap_or("ceded") {
            "ceded" => DataKind::Ceded,
            "claims" => DataKind::Claims {
                alpha: raw.f64_req("transform_alpha")?,
                m: raw.f64_req("transform_m")?,
            },
            other => {
                return Err(config_err(format!(
                    "data_kind must be `ceded` or `claims`, got `{other}`"
                )))
            }
        };

        let rows = raw
            .rows()
            .iter()
            .map(|line| Self::parse_row(line))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            claim,
            insurer,
            reinsurer,
            priors,
            weights,
            data,
            data_kind,
            seed: raw.u64_opt("sample_seed")?.unwrap_or(0),
            replications: raw.usize_or("replications", 100)?,
            sample_n: raw.usize_or("sample_n", 100)?,
            grid: raw.usize_or("grid", 200)?,
            rows,
            out: raw.get("out").map(PathBuf::from),
        })
    }

    fn data_spec(raw: &RawConfig) -> Result<DataSpec> {
        let inline = raw.get("data");
        let file = raw.get("data_file");
        let generated = raw.get("sample_n").is_some() && inline.is_none() && file.is_none();
        match (inline, file, generated) {
            (Some(s), None, _) => {
                let values = s
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| config_err(format!("bad data value `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if values.is_empty() {
                    return Err(config_err("inline data list is empty"));
                }
                Ok(DataSpec::Inline(values))
            }
            (None, Some(p), _) => Ok(DataSpec::File(PathBuf::from(p))),
            (None, None, true) => Ok(DataSpec::Generate { n: raw.usize_or("sample_n", 100)? }),
            (None, None, false) => Err(config_err(
                "no observations: set exactly one of `data`, `data_file`, or `sample_n` (+ `sample_seed`)",
            )),
            (Some(_), Some(_), _) => {
                Err(config_err("set only one of `data` and `data_file`"))
            }
        }
    }

    fn parse_row(line: &str) -> Result<TableRowSpec> {
        let parts: Vec<&str> = line.split('|').map(|p| p.trim()).collect();
        if parts.len() != 3 {
            return Err(config_err(format!(
                "row must be `claim | alpha-prior | m-prior`, got `{line}`"
            )));
        }
        Ok(TableRowSpec {
            claim: parse_claim_model(parts[0])?,
            prior_alpha: parse_prior(parts[1])?,
            prior_m: parse_prior(parts[2])?,
            claim_label: parts[0].to_string(),
            prior_alpha_label: parts[1].to_string(),
            prior_m_label: parts[2].to_string(),
        })
    }

    /// Materializes the observation sample. Generated data are drawn from
    /// the claim model with the configured seed; raw-claims data are
    /// transformed through the configured contract.
    pub fn observations(&self) -> Result<Vec<f64>> {
        let raw = match &self.data {
            DataSpec::Inline(v) => v.clone(),
            DataSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    config_err(format!("cannot read data file {}: {e}", path.display()))
                })?;
                let mut v = Vec::new();
                for (lineno, line) in text.lines().enumerate() {
                    let t = line.trim();
                    if t.is_empty() || t.starts_with('#') {
                        continue;
                    }
                    v.push(t.parse::<f64>().map_err(|_| {
                        config_err(format!(
                            "{}:{}: bad data value `{t}`",
                            path.display(),
                            lineno + 1
                        ))
                    })?);
                }
                if v.is_empty() {
                    return Err(config_err(format!("data file {} is empty", path.display())));
                }
                v
            }
            DataSpec::Generate { n } => self.claim.sample(*n, self.seed),
        };
        match self.data_kind {
            DataKind::Ceded => Ok(raw),
            DataKind::Claims { alpha, m } => {
                let c = pxl_core::ContractParams::new(alpha, m).map_err(CliError::Numeric)?;
                raw.iter()
                    .map(|&x| c.split(x).map(|s| s.reinsurer_part).map_err(CliError::Numeric))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# demo
claim = exponential(1)
beta0 = 2.0
theta0 = 0.8
beta1 = 0.2
theta1 = 0.3
prior_alpha = beta(2,2)
prior_m = exp(2)
weights = (0.1,0.1) (0.2,0.1)
data = 4.117 1.434 0.453
";

    #[test]
    fn parses_example() {
        let raw = RawConfig::parse(EXAMPLE).unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.insurer.beta, 2.0);
        assert_eq!(cfg.weights.len(), 2);
        assert_eq!(cfg.observations().unwrap(), vec![4.117, 1.434, 0.453]);
        // theta prior defaults to a point mass at the claim parameter
        assert_eq!(cfg.priors.theta.as_point_mass(), Some(1.0));
    }

    #[test]
    fn rejects_duplicate_keys() {
        assert!(RawConfig::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn rows_accumulate() {
        let raw = RawConfig::parse("row = exp(1) | beta(2,2) | exp(2)\nrow = weibull(2,1) | beta(2,4) | gamma(3,2)").unwrap();
        assert_eq!(raw.rows().len(), 2);
    }

    #[test]
    fn parse_pair_variants() {
        assert_eq!(parse_pair("0.27, 1.08").unwrap(), (0.27, 1.08));
        assert_eq!(parse_pair("(0.27,1.08)").unwrap(), (0.27, 1.08));
        assert!(parse_pair("1").is_err());
        assert!(parse_pair("1,2,3").is_err());
    }

    #[test]
    fn missing_data_is_a_config_error() {
        let raw = RawConfig::parse(
            "claim = exp(1)\nbeta0 = 2\ntheta0 = 0.8\nbeta1 = 0.2\ntheta1 = 0.3\nprior_alpha = beta(2,2)\nprior_m = exp(2)",
        )
        .unwrap();
        let err = ExperimentConfig::from_raw(&raw).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn generator_spec() {
        let raw = RawConfig::parse(
            "claim = exp(1)\nbeta0 = 2\ntheta0 = 0.8\nbeta1 = 0.2\ntheta1 = 0.3\nprior_alpha = beta(2,2)\nprior_m = exp(2)\nsample_n = 10\nsample_seed = 7",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        let obs = cfg.observations().unwrap();
        assert_eq!(obs.len(), 10);
        assert_eq!(obs, cfg.claim.sample(10, 7));
    }

    #[test]
    fn claims_kind_transforms() {
        let raw = RawConfig::parse(
            "claim = exp(1)\nbeta0 = 2\ntheta0 = 0.8\nbeta1 = 0.2\ntheta1 = 0.3\nprior_alpha = beta(2,2)\nprior_m = exp(2)\ndata = 4.117\ndata_kind = claims\ntransform_alpha = 0.27\ntransform_m = 1.08",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        let obs = cfg.observations().unwrap();
        assert!((obs[0] - 3.8254).abs() < 1e-12);
    }

    #[test]
    fn unknown_family_rejected() {
        assert!(parse_claim_model("lognormal(0,1)").is_err());
        assert!(parse_prior("cauchy(0,1)").is_err());
    }
}
