//! Monte Carlo driver: simulate from a one-factor model, fit the proposed and
//! naive estimators, score both against the true density and aggregate.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula_kde::{ClipRegion, KdeOptions, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::factor::{fit_factor_with, fit_naive, FactorOptions, DEFAULT_QUAD_NODES};
use crate::families::{sample_one_factor, true_factor_density, CopulaFamily, FamilySpec, OneFactorModel};
use crate::kernel::{KernelSpec, DEFAULT_CDF_CONST, DEFAULT_DENSITY_CONST};
use crate::marginal::{pseudo_observations_with, UniformMatrix};
use crate::metrics::{aggregate, replication_errors, ErrorSummary, ReplicationErrors};
use crate::proxy::ProxyOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Proposed,
    Naive,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Proposed => "proposed",
            Estimator::Naive => "naive",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Estimator::Proposed),
            "naive" => Ok(Estimator::Naive),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Proposed, Estimator::Naive]
}
fn default_quad_nodes() -> usize {
    DEFAULT_QUAD_NODES
}
fn default_cap() -> f64 {
    DEFAULT_CAP
}
fn default_cdf_const() -> f64 {
    DEFAULT_CDF_CONST
}
fn default_density_const() -> f64 {
    DEFAULT_DENSITY_CONST
}
fn default_truth_nodes() -> usize {
    100
}
fn default_eval_lo() -> f64 {
    0.01
}
fn default_eval_hi() -> f64 {
    0.99
}

/// Flat JSON experiment description. Keys with a dot are literal key names,
/// e.g. `"factor.quad_nodes": 200`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: String,
    #[serde(default)]
    pub theta: Option<f64>,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub reps: usize,
    #[serde(default)]
    pub seed0: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(rename = "factor.quad_nodes", default = "default_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default = "default_cap")]
    pub k0_cap: f64,
    #[serde(rename = "bandwidth.cdf_const", default = "default_cdf_const")]
    pub cdf_const: f64,
    #[serde(rename = "bandwidth.density_const", default = "default_density_const")]
    pub density_const: f64,
    #[serde(rename = "proxy.auto_orient", default)]
    pub auto_orient: bool,
    /// Replace the simulated uniforms by kernel-CDF pseudo-observations
    /// before fitting, as would be done with data of unknown margins.
    #[serde(default)]
    pub pseudo_observations: bool,
    /// Nodes of the quadrature rule used for the true density.
    #[serde(rename = "truth.quad_nodes", default = "default_truth_nodes")]
    pub truth_nodes: usize,
    /// Sample rows whose first k coordinates all lie in [eval_lo, eval_hi]
    /// serve as evaluation points.
    #[serde(default = "default_eval_lo")]
    pub eval_lo: f64,
    #[serde(default = "default_eval_hi")]
    pub eval_hi: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub per_rep_output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Config with every optional key at its default.
    pub fn new(family: CopulaFamily, n: usize, d: usize, k: usize, reps: usize, seed0: u64) -> Self {
        let spec = FamilySpec::from(family);
        ExperimentConfig {
            family: spec.family,
            theta: spec.theta,
            n,
            d,
            k,
            reps,
            seed0,
            estimators: default_estimators(),
            quad_nodes: default_quad_nodes(),
            k0_cap: default_cap(),
            cdf_const: default_cdf_const(),
            density_const: default_density_const(),
            auto_orient: false,
            pseudo_observations: false,
            truth_nodes: default_truth_nodes(),
            eval_lo: default_eval_lo(),
            eval_hi: default_eval_hi(),
            output: None,
            per_rep_output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn copula_family(&self) -> Result<CopulaFamily> {
        let spec = FamilySpec {
            family: self.family.clone(),
            theta: self.theta,
        };
        CopulaFamily::try_from(&spec).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.copula_family()?;
        if self.n < 10 {
            return bad(format!("n must be at least 10, got {}", self.n));
        }
        if self.d < 2 {
            return bad(format!("d must be at least 2, got {}", self.d));
        }
        if self.k < 2 || self.k > self.d {
            return bad(format!("need 2 <= k <= d, got k = {}, d = {}", self.k, self.d));
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if self.quad_nodes < 1 || self.truth_nodes < 3 {
            return bad("quadrature node counts too small".into());
        }
        for (name, x) in [
            ("k0_cap", self.k0_cap),
            ("bandwidth.cdf_const", self.cdf_const),
            ("bandwidth.density_const", self.density_const),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{name} must be positive, got {x}"));
            }
        }
        if !(0.0 < self.eval_lo && self.eval_lo < self.eval_hi && self.eval_hi < 1.0) {
            return bad(format!(
                "need 0 < eval_lo < eval_hi < 1, got [{}, {}]",
                self.eval_lo, self.eval_hi
            ));
        }
        Ok(())
    }

    fn factor_options(&self) -> FactorOptions {
        FactorOptions {
            kde: KdeOptions {
                kernel: KernelSpec::Quartic,
                density_const: self.density_const,
                cap: self.k0_cap,
                clip: ClipRegion::default(),
            },
            quad_nodes: self.quad_nodes,
            proxy: ProxyOptions {
                auto_orient: self.auto_orient,
            },
        }
    }

    pub fn seed(&self, rep: usize) -> u64 {
        self.seed0.wrapping_add(rep as u64)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub seed: u64,
    /// Number of evaluation points.
    pub points: usize,
    /// One entry per selected estimator, in config order.
    pub errors: Vec<(Estimator, ReplicationErrors)>,
}

impl ReplicationRecord {
    pub fn get(&self, est: Estimator) -> Option<ReplicationErrors> {
        self.errors.iter().find(|(e, _)| *e == est).map(|(_, r)| *r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedReplication {
    pub rep: usize,
    pub seed: u64,
    pub error: String,
}

/// Evaluation points: rows of `u` restricted to the first `k` columns, kept
/// only when every one of those coordinates lies in [lo, hi].
pub fn evaluation_points(u: &UniformMatrix, k: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    u.view()
        .rows()
        .into_iter()
        .map(|row| row.iter().take(k).copied().collect::<Vec<f64>>())
        .filter(|p| p.iter().all(|&x| (lo..=hi).contains(&x)))
        .collect()
}

pub fn run_replication(cfg: &ExperimentConfig, rep: usize) -> Result<ReplicationRecord> {
    let family = cfg.copula_family()?;
    let model = OneFactorModel::homogeneous(family, cfg.d)?;
    let seed = cfg.seed(rep);
    let (sample, _latent) = sample_one_factor(&model, cfg.n, seed)?;
    let points = evaluation_points(&sample, cfg.k, cfg.eval_lo, cfg.eval_hi);
    if points.is_empty() {
        return Err(Error::Degenerate("no evaluation points inside the interior box".into()));
    }

    let fitted_on = if cfg.pseudo_observations {
        pseudo_observations_with(sample.view(), KernelSpec::Quartic, cfg.cdf_const)?
    } else {
        sample
    };

    let truth_rule = model.reference_rule(cfg.truth_nodes)?;
    let truth = points
        .iter()
        .map(|p| true_factor_density(&model, p, &truth_rule))
        .collect::<Result<Vec<_>>>()?;

    let mut errors = Vec::with_capacity(cfg.estimators.len());
    for &est in &cfg.estimators {
        let values = match est {
            Estimator::Proposed => {
                let fit = fit_factor_with(&fitted_on, cfg.k, &cfg.factor_options())?;
                fit.eval_many(&points)?
            }
            Estimator::Naive => {
                let cols: Vec<usize> = (0..cfg.k).collect();
                let fit = fit_naive(&fitted_on.select_columns(&cols)?)?;
                fit.eval_many(&points)?
            }
        };
        errors.push((est, replication_errors(&values, &truth)?));
    }
    Ok(ReplicationRecord {
        rep,
        seed,
        points: points.len(),
        errors,
    })
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: Estimator,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub family: String,
    pub theta: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub sd: f64,
    pub bias: f64,
    /// Replications that entered the aggregate.
    pub reps: usize,
    pub seed0: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub config: ExperimentConfig,
    /// Successful replications in replication order.
    pub records: Vec<ReplicationRecord>,
    pub failures: Vec<FailedReplication>,
    pub summary: Vec<SummaryRow>,
}

impl McReport {
    pub fn summary_for(&self, est: Estimator) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.estimator == est)
    }

    pub fn errors_for(&self, est: Estimator) -> Vec<ReplicationErrors> {
        self.records.iter().filter_map(|r| r.get(est)).collect()
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "estimator", "n", "d", "k", "family", "theta", "rmse", "mae", "sd", "bias", "reps", "seed0",
        ])?;
        for r in &self.summary {
            w.write_record([
                r.estimator.name().to_string(),
                r.n.to_string(),
                r.d.to_string(),
                r.k.to_string(),
                r.family.clone(),
                r.theta.map(fmt_float).unwrap_or_default(),
                fmt_float(r.rmse),
                fmt_float(r.mae),
                fmt_float(r.sd),
                fmt_float(r.bias),
                r.reps.to_string(),
                r.seed0.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_per_rep_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rep", "seed", "points", "estimator", "rmse", "mae", "mean_err"])?;
        for rec in &self.records {
            for (est, e) in &rec.errors {
                w.write_record([
                    rec.rep.to_string(),
                    rec.seed.to_string(),
                    rec.points.to_string(),
                    est.name().to_string(),
                    fmt_float(e.rmse),
                    fmt_float(e.mae),
                    fmt_float(e.mean_err),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_failures_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rep", "seed", "error"])?;
        for f in &self.failures {
            w.write_record([f.rep.to_string(), f.seed.to_string(), f.error.clone()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the summary (and per-rep table, and failure manifest when
    /// there are failures) to the paths named in the config.
    pub fn write_outputs(&self) -> Result<()> {
        if let Some(out) = &self.config.output {
            self.write_summary_csv(out)?;
            if self.is_partial() {
                let mut name = out.as_os_str().to_owned();
                name.push(".failures.csv");
                self.write_failures_csv(Path::new(&name))?;
            }
        }
        if let Some(per_rep) = &self.config.per_rep_output {
            self.write_per_rep_csv(per_rep)?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs every replication (in parallel), then aggregates. Failed
/// replications are logged and listed in the report, not aggregated.
pub fn run_study(cfg: &ExperimentConfig) -> Result<McReport> {
    cfg.validate()?;
    let outcomes: Vec<(usize, Result<ReplicationRecord>)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| (rep, run_replication(cfg, rep)))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (rep, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("replication {rep} (seed {}) failed: {e}", cfg.seed(rep));
                failures.push(FailedReplication {
                    rep,
                    seed: cfg.seed(rep),
                    error: e.to_string(),
                });
            }
        }
    }

    let mut summary = Vec::new();
    if !records.is_empty() {
        for &est in &cfg.estimators {
            let errs: Vec<ReplicationErrors> = records.iter().filter_map(|r| r.get(est)).collect();
            let ErrorSummary { rmse, mae, sd, bias } = aggregate(&errs)?;
            summary.push(SummaryRow {
                estimator: est,
                n: cfg.n,
                d: cfg.d,
                k: cfg.k,
                family: cfg.family.to_ascii_lowercase(),
                theta: cfg.theta,
                rmse,
                mae,
                sd,
                bias,
                reps: errs.len(),
                seed0: cfg.seed0,
            });
        }
    }
    Ok(McReport {
        config: cfg.clone(),
        records,
        failures,
        summary,
    })
}
