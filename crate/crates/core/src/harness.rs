//! Seeded data generation, Monte Carlo sweeps over sample sizes and budgets,
//! and the results table.
//!
//! Every run draws its data from a generator keyed on
//! `(master_seed, N, run_id)` and its teacher randomness from one keyed on
//! `(master_seed, N, B, run_id)`. Runs at different budgets therefore see the
//! same data, and any schedule of parallel execution gives the same records.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::estimators::{EstimatorSpec, ParameterVector, DEFAULT_GRADIENT_STEP};
use crate::measure::{CostFunctionSpec, SampleSequence};
use crate::policies::{teach, Policy, SolverInputs, TeacherConfig};
use crate::solver::SolverOptions;

pub const CSV_HEADER: [&str; 15] = [
    "run_id",
    "N",
    "B",
    "M",
    "policy",
    "estimator",
    "theta0",
    "theta_hat",
    "theta_tilde",
    "err_before",
    "err_after",
    "num_changes",
    "cost_used",
    "seed",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Variance of zero-mean Gaussian data with true variance `theta0`.
    GaussianVariance,
    /// Scale of Weibull data with true scale `theta0` and known `shape_k`.
    WeibullScale,
    /// Reward-weight updates from fixed per-feature count sequences.
    IrlWeights,
    /// Any estimator on a fixed sample file.
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// True parameter. For `irl_weights`, one true weight per feature.
    pub theta0: ParameterVector,
    /// Sample sizes for generated data. Fixed-data experiments use the data's
    /// own length.
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    pub budgets: Vec<f64>,
    #[serde(rename = "M")]
    pub num_proposals: usize,
    pub cost: CostFunctionSpec,
    pub policy: Policy,
    pub mc_runs: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Initial weight estimates: one value shared by all features, or one
    /// per feature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_hat: Option<ParameterVector>,
    /// Per-feature count sequences for `irl_weights`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Vec<f64>>>,
    /// Estimator identifier for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    /// Sample file for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `key=value` overrides before parsing.
    /// Values are read as JSON, falling back to a plain string.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        apply_overrides(&mut value, overrides)?;
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_runs == 0 {
            return config_err("mc_runs must be at least 1");
        }
        if self.budgets.is_empty() {
            return config_err("budgets must not be empty");
        }
        if let Some(b) = self.budgets.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return config_err(format!("budget {b} is not a nonnegative number"));
        }
        if self.num_proposals == 0 && self.policy == Policy::Batch {
            return config_err("M must be at least 1 for the batch policy");
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return config_err(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return config_err(format!("tol must be positive, got {t}"));
            }
        }
        match self.experiment {
            ExperimentKind::GaussianVariance | ExperimentKind::WeibullScale => {
                if self.sample_sizes.is_empty() {
                    return config_err("sample_sizes must not be empty");
                }
                if self.sample_sizes.contains(&0) {
                    return config_err("sample sizes must be at least 1");
                }
                if self.theta0.dim() != 1 || !(self.theta0.values()[0] > 0.0) {
                    return config_err("theta0 must be a single positive number");
                }
                if self.experiment == ExperimentKind::WeibullScale {
                    match self.shape_k {
                        Some(k) if k > 0.0 && k.is_finite() => {}
                        _ => return config_err("weibull_scale requires a positive shape_k"),
                    }
                }
            }
            ExperimentKind::IrlWeights => {
                let features = self.irl_features()?;
                if self.theta0.dim() != features.len() {
                    return config_err(format!(
                        "theta0 has {} entries for {} features",
                        self.theta0.dim(),
                        features.len()
                    ));
                }
                for i in 0..features.len() {
                    self.irl_theta_hat(i)?;
                }
                match self.beta {
                    Some(b) if b < 0.0 => {}
                    _ => return config_err("irl_weights requires a negative beta"),
                }
            }
            ExperimentKind::Custom => {
                self.custom_estimator()?;
                if self.samples.is_none() {
                    return config_err("custom experiments require a samples file");
                }
            }
        }
        Ok(())
    }

    fn irl_features(&self) -> Result<&[Vec<f64>]> {
        match &self.features {
            Some(f) if !f.is_empty() && f.iter().all(|s| !s.is_empty()) => Ok(f),
            _ => config_err("irl_weights requires nonempty feature count lists"),
        }
    }

    fn irl_theta_hat(&self, feature: usize) -> Result<f64> {
        let Some(t) = &self.theta_hat else {
            return config_err("irl_weights requires theta_hat");
        };
        match t.values() {
            [v] => Ok(*v),
            vs if feature < vs.len() => Ok(vs[feature]),
            _ => config_err("theta_hat needs one value or one per feature"),
        }
    }

    fn custom_estimator(&self) -> Result<EstimatorSpec> {
        let Some(id) = &self.estimator else {
            return config_err("custom experiments require an estimator");
        };
        let theta_hat = match &self.theta_hat {
            Some(t) if t.dim() == 1 => Some(t.values()[0]),
            Some(_) => return config_err("custom theta_hat must be a single number"),
            None => None,
        };
        EstimatorSpec::from_id(id, self.shape_k, self.beta, theta_hat)
            .map_err(|e| Error::Config(e.to_string()))
    }

    fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(m) = self.max_iters {
            opts.max_iters = m;
        }
        opts
    }
}

/// Sets top-level keys of a JSON config from `key=value` strings.
pub fn apply_overrides(value: &mut Value, overrides: &[String]) -> Result<()> {
    let Some(obj) = value.as_object_mut() else {
        return config_err("config must be a JSON object");
    };
    for item in overrides {
        let Some((key, raw)) = item.split_once('=') else {
            return config_err(format!("override {item:?} is not key=value"));
        };
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.trim().to_string(), parsed);
    }
    Ok(())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a key path into a seed by chaining splitmix64 over its parts.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0u64, |h, &p| splitmix64(h ^ splitmix64(p)))
}

const DATA_STREAM: u64 = 0xDA7A;
const TEACHER_STREAM: u64 = 0x7EAC;

pub fn data_seed(master_seed: u64, n: usize, run_id: usize) -> u64 {
    derive_seed(&[master_seed, DATA_STREAM, n as u64, run_id as u64])
}

pub fn teacher_seed(master_seed: u64, n: usize, budget: f64, run_id: usize) -> u64 {
    derive_seed(&[master_seed, TEACHER_STREAM, n as u64, budget.to_bits(), run_id as u64])
}

pub fn sample_gaussian<R: Rng + ?Sized>(
    n: usize,
    mean: f64,
    variance: f64,
    rng: &mut R,
) -> Result<SampleSequence> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
        return invalid(format!("need a finite mean and positive variance, got {mean}, {variance}"));
    }
    let normal = Normal::new(mean, variance.sqrt()).map_err(|e| Error::InvalidInput(e.to_string()))?;
    SampleSequence::from_flat(1, (0..n).map(|_| normal.sample(rng)).collect())
}

/// Inverse of the Weibull CDF at `1 - u`: `lambda * (-ln u)^(1/k)`.
pub fn weibull_from_uniform(u: f64, scale_lambda: f64, shape_k: f64) -> f64 {
    scale_lambda * (-u.ln()).powf(1.0 / shape_k)
}

pub fn sample_weibull<R: Rng + ?Sized>(
    n: usize,
    scale_lambda: f64,
    shape_k: f64,
    rng: &mut R,
) -> Result<SampleSequence> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    if !(scale_lambda > 0.0 && scale_lambda.is_finite() && shape_k > 0.0 && shape_k.is_finite()) {
        return invalid(format!(
            "Weibull scale and shape must be positive, got {scale_lambda}, {shape_k}"
        ));
    }
    let values = (0..n)
        .map(|_| {
            // u in (0, 1] keeps the logarithm finite
            let u = 1.0 - rng.gen::<f64>();
            weibull_from_uniform(u, scale_lambda, shape_k)
        })
        .collect();
    SampleSequence::from_flat(1, values)
}

/// Values computed by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub theta_hat: ParameterVector,
    pub theta_tilde: ParameterVector,
    pub err_before: f64,
    pub err_after: f64,
    pub num_changes: usize,
    pub cost_used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub n: usize,
    pub budget: f64,
    pub num_proposals: usize,
    pub policy: Policy,
    pub estimator: String,
    pub theta0: ParameterVector,
    pub seed: u64,
    /// The run's results, or the error that aborted it.
    pub outcome: std::result::Result<Outcome, String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn status(&self) -> String {
        match &self.outcome {
            Ok(_) => "ok".into(),
            Err(e) => format!("error: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Job {
    n: usize,
    budget: f64,
    run_id: usize,
    data: Data,
}

#[derive(Debug, Clone)]
enum Data {
    Generated,
    Fixed {
        seq: SampleSequence,
        spec: EstimatorSpec,
        theta0: ParameterVector,
        label: String,
        stream: u64,
    },
}

fn jobs(cfg: &ExperimentConfig) -> Result<Vec<Job>> {
    let fixed: Vec<(SampleSequence, EstimatorSpec, ParameterVector, String)> = match cfg.experiment {
        ExperimentKind::GaussianVariance | ExperimentKind::WeibullScale => Vec::new(),
        ExperimentKind::IrlWeights => {
            let beta = cfg.beta.unwrap_or(-1.0);
            cfg.irl_features()?
                .iter()
                .enumerate()
                .map(|(i, counts)| {
                    Ok((
                        SampleSequence::from_scalars(counts)?,
                        EstimatorSpec::IrlUpdate {
                            beta,
                            theta_hat: cfg.irl_theta_hat(i)?,
                        },
                        ParameterVector::scalar(cfg.theta0.values()[i])?,
                        format!("irl_update:feature{}", i + 1),
                    ))
                })
                .collect::<Result<_>>()?
        }
        ExperimentKind::Custom => {
            let spec = cfg.custom_estimator()?;
            let path = cfg.samples.as_ref().expect("validated");
            let seq = SampleSequence::read_from_path(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            vec![(seq, spec.clone(), cfg.theta0.clone(), spec.id().to_string())]
        }
    };

    let mut out = Vec::new();
    if fixed.is_empty() {
        for &n in &cfg.sample_sizes {
            for &budget in &cfg.budgets {
                for run_id in 0..cfg.mc_runs {
                    out.push(Job {
                        n,
                        budget,
                        run_id,
                        data: Data::Generated,
                    });
                }
            }
        }
    } else {
        for &budget in &cfg.budgets {
            for run_id in 0..cfg.mc_runs {
                for (stream, (seq, spec, theta0, label)) in fixed.iter().enumerate() {
                    out.push(Job {
                        n: seq.len(),
                        budget,
                        run_id,
                        data: Data::Fixed {
                            seq: seq.clone(),
                            spec: spec.clone(),
                            theta0: theta0.clone(),
                            label: label.clone(),
                            stream: stream as u64,
                        },
                    });
                }
            }
        }
    }
    Ok(out)
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> RunRecord {
    let mut seed = teacher_seed(cfg.master_seed, job.n, job.budget, job.run_id);
    let (label, theta0) = match &job.data {
        Data::Generated => (
            match cfg.experiment {
                ExperimentKind::WeibullScale => "weibull_scale".to_string(),
                _ => "variance".to_string(),
            },
            cfg.theta0.clone(),
        ),
        Data::Fixed {
            label,
            theta0,
            stream,
            ..
        } => {
            seed = derive_seed(&[seed, *stream]);
            (label.clone(), theta0.clone())
        }
    };
    let outcome = run_pipeline(cfg, job, &theta0, seed).map_err(|e| e.to_string());
    RunRecord {
        run_id: job.run_id,
        n: job.n,
        budget: job.budget,
        num_proposals: cfg.num_proposals,
        policy: cfg.policy,
        estimator: label,
        theta0,
        seed,
        outcome,
    }
}

fn run_pipeline(cfg: &ExperimentConfig, job: &Job, theta0: &ParameterVector, seed: u64) -> Result<Outcome> {
    let (seq, spec) = match &job.data {
        Data::Generated => {
            let mut rng = ChaCha8Rng::seed_from_u64(data_seed(cfg.master_seed, job.n, job.run_id));
            let truth = cfg.theta0.values()[0];
            match cfg.experiment {
                ExperimentKind::WeibullScale => {
                    let k = cfg.shape_k.expect("validated");
                    (
                        sample_weibull(job.n, truth, k, &mut rng)?,
                        EstimatorSpec::WeibullScale { shape_k: k },
                    )
                }
                _ => (sample_gaussian(job.n, 0.0, truth, &mut rng)?, EstimatorSpec::Variance),
            }
        }
        Data::Fixed { seq, spec, .. } => (seq.clone(), spec.clone()),
    };
    let estimator = spec.build(&seq)?;
    let teacher = TeacherConfig {
        budget: job.budget,
        num_proposals: cfg.num_proposals,
        policy: cfg.policy,
        seed,
    };
    let solver = SolverInputs {
        epsilon: cfg.epsilon.unwrap_or(DEFAULT_GRADIENT_STEP),
        options: cfg.solver_options(),
        ..SolverInputs::for_sequence(&seq)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = teach(&seq, estimator.as_ref(), theta0, &cfg.cost, &teacher, &solver, &mut rng)?;
    if !(res.error_after <= res.error_before) || res.cost_used > job.budget {
        return Err(Error::InvalidInput(format!(
            "intervention broke its guarantees: error {} -> {}, cost {} of {}",
            res.error_before, res.error_after, res.cost_used, job.budget
        )));
    }
    Ok(Outcome {
        theta_hat: res.theta_hat,
        theta_tilde: res.theta_tilde,
        err_before: res.error_before,
        err_after: res.error_after,
        num_changes: res.num_changes,
        cost_used: res.cost_used,
    })
}

/// Runs every `(N, B, run)` combination in parallel. A failing run becomes a
/// record with an error status; only an invalid config is an error here.
/// Records come back sorted by `(N, B, run_id)`.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let jobs = jobs(cfg)?;
    let mut records: Vec<RunRecord> = jobs.par_iter().map(|job| run_job(cfg, job)).collect();
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.budget.total_cmp(&b.budget))
            .then(a.run_id.cmp(&b.run_id))
    });
    Ok(records)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_params(p: &ParameterVector) -> String {
    p.values().iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

pub fn write_results<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let (theta_hat, theta_tilde, before, after, changes, cost) = match &r.outcome {
            Ok(o) => (
                fmt_params(&o.theta_hat),
                fmt_params(&o.theta_tilde),
                fmt_f64(o.err_before),
                fmt_f64(o.err_after),
                o.num_changes.to_string(),
                fmt_f64(o.cost_used),
            ),
            Err(_) => Default::default(),
        };
        w.write_record([
            r.run_id.to_string(),
            r.n.to_string(),
            fmt_f64(r.budget),
            r.num_proposals.to_string(),
            r.policy.to_string(),
            r.estimator.clone(),
            fmt_params(&r.theta0),
            theta_hat,
            theta_tilde,
            before,
            after,
            changes,
            cost,
            r.seed.to_string(),
            r.status(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_file(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    write_results(records, std::fs::File::create(path)?)
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = row.get(i).unwrap_or_default();
    raw.parse().map_err(|_| {
        Error::InvalidInput(format!(
            "line {}: cannot parse {} from {raw:?}",
            row.position().map_or(0, |p| p.line()),
            CSV_HEADER[i]
        ))
    })
}

fn parse_params(row: &csv::StringRecord, i: usize) -> Result<ParameterVector> {
    let raw = row.get(i).unwrap_or_default();
    let values = raw
        .split(';')
        .map(|v| v.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidInput(format!("cannot parse {} from {raw:?}", CSV_HEADER[i])))?;
    ParameterVector::new(values)
}

/// Reads a results table written by [`write_results`]. A header that does
/// not match, or a malformed row, is an [`Error::InvalidInput`].
pub fn read_results<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return invalid(format!(
            "results header {:?} does not match the expected columns {}",
            header.iter().collect::<Vec<_>>(),
            CSV_HEADER.join(",")
        ));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let status = row.get(14).unwrap_or_default();
        let outcome = if status == "ok" {
            Ok(Outcome {
                theta_hat: parse_params(&row, 7)?,
                theta_tilde: parse_params(&row, 8)?,
                err_before: parse_field(&row, 9)?,
                err_after: parse_field(&row, 10)?,
                num_changes: parse_field(&row, 11)?,
                cost_used: parse_field(&row, 12)?,
            })
        } else if let Some(msg) = status.strip_prefix("error: ") {
            Err(msg.to_string())
        } else {
            return invalid(format!("unknown status {status:?}"));
        };
        out.push(RunRecord {
            run_id: parse_field(&row, 0)?,
            n: parse_field(&row, 1)?,
            budget: parse_field(&row, 2)?,
            num_proposals: parse_field(&row, 3)?,
            policy: row.get(4).unwrap_or_default().parse()?,
            estimator: row.get(5).unwrap_or_default().to_string(),
            theta0: parse_params(&row, 6)?,
            seed: parse_field(&row, 13)?,
            outcome,
        });
    }
    Ok(out)
}

pub fn read_results_file(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_results(std::fs::File::open(path)?)
}

/// Mean errors of the successful runs in one `(N, B)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub budget: f64,
    pub mean_err_after: f64,
    pub mean_err_before: f64,
    pub runs: usize,
    pub failures: usize,
}

/// Groups records by `(N, B)` in ascending order. Means are folded in record
/// order over successful runs; a cell without any is `NaN`.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, u64), (f64, Vec<&RunRecord>)> = BTreeMap::new();
    for r in records {
        // nonnegative floats order like their bit patterns
        groups
            .entry((r.n, r.budget.to_bits()))
            .or_insert((r.budget, Vec::new()))
            .1
            .push(r);
    }
    groups
        .into_values()
        .map(|(budget, rs)| {
            let ok: Vec<&Outcome> = rs.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let mean = |f: fn(&Outcome) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|o| f(o)).sum::<f64>() / ok.len() as f64
                }
            };
            SummaryRow {
                n: rs[0].n,
                budget,
                mean_err_after: mean(|o| o.err_after),
                mean_err_before: mean(|o| o.err_before),
                runs: ok.len(),
                failures: rs.len() - ok.len(),
            }
        })
        .collect()
}

/// Plain-text table: one line per sample size, one column per budget.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut budgets: Vec<f64> = rows.iter().map(|r| r.budget).collect();
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();

    let mut out = String::from("mean |e| by N (rows) and B (columns)\n");
    out.push_str(&format!("{:>8}", "N"));
    for b in &budgets {
        out.push_str(&format!(" {:>14}", format!("B={b}")));
    }
    out.push('\n');
    for n in &sizes {
        out.push_str(&format!("{n:>8}"));
        for b in &budgets {
            match rows.iter().find(|r| r.n == *n && r.budget == *b) {
                Some(r) => out.push_str(&format!(" {:>14.6e}", r.mean_err_after)),
                None => out.push_str(&format!(" {:>14}", "-")),
            }
        }
        out.push('\n');
    }
    out.push_str("\nN,B,runs,failures,mean_err_before,mean_err_after\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e}\n",
            r.n, r.budget, r.runs, r.failures, r.mean_err_before, r.mean_err_after
        ));
    }
    out
}
