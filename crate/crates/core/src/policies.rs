//! Intervention policies that turn a solved plan into a corrected sequence
//! within the budget, plus an exhaustive oracle for small instances.
//!
//! Every policy returns the original sequence untouched unless its
//! correction strictly lowers `||theta0 - J(.)||`, so no policy can make the
//! student's estimate worse.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{Estimator, ParameterVector, DEFAULT_GRADIENT_STEP};
use crate::measure::{sequence_cost, CostFunctionSpec, SampleSequence, StateSpace};
use crate::solver::{assemble_problem, conditional_pmf, solve_alpha, ConditionalPmf, SolverOptions};

/// Largest number of assignments [`oracle_search`] will enumerate.
pub const ORACLE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Draw `M` sequences from the pmf and keep the best one within budget.
    Batch,
    /// Apply the most probable single changes first.
    Greedy,
    /// One change at a time, re-solving the plan after each.
    RecedingHorizon,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Batch => "batch",
            Policy::Greedy => "greedy",
            Policy::RecedingHorizon => "receding_horizon",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batch" => Ok(Policy::Batch),
            "greedy" => Ok(Policy::Greedy),
            "receding_horizon" => Ok(Policy::RecedingHorizon),
            other => invalid(format!(
                "unknown policy {other:?} (expected batch, greedy or receding_horizon)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TeacherConfig {
    pub budget: f64,
    /// Number of candidate sequences `M` drawn by the batch policy.
    pub num_proposals: usize,
    pub policy: Policy,
    pub seed: u64,
}

impl TeacherConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return invalid(format!("budget must be nonnegative, got {}", self.budget));
        }
        if self.policy == Policy::Batch && self.num_proposals == 0 {
            return invalid("the batch policy needs at least one proposal");
        }
        Ok(())
    }
}

/// Settings for the inner transport solves.
#[derive(Debug, Clone)]
pub struct SolverInputs {
    pub targets: StateSpace,
    pub epsilon: f64,
    pub options: SolverOptions,
}

impl SolverInputs {
    /// Targets are the unique values of `original`; default step and options.
    pub fn for_sequence(original: &SampleSequence) -> Self {
        Self {
            targets: StateSpace::from_sequence(original),
            epsilon: DEFAULT_GRADIENT_STEP,
            options: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InterventionResult {
    pub corrected: SampleSequence,
    pub theta_hat: ParameterVector,
    pub theta_tilde: ParameterVector,
    pub error_before: f64,
    pub error_after: f64,
    pub cost_used: f64,
    pub num_changes: usize,
    /// Candidates that respected the budget (batch policy), or changes
    /// considered feasible (other policies).
    pub proposals_feasible: usize,
    pub fell_back: bool,
}

struct Baseline<'a> {
    original: &'a SampleSequence,
    estimator: &'a dyn Estimator,
    theta0: &'a ParameterVector,
    theta_hat: ParameterVector,
    error: f64,
}

impl<'a> Baseline<'a> {
    fn new(
        original: &'a SampleSequence,
        estimator: &'a dyn Estimator,
        theta0: &'a ParameterVector,
    ) -> Result<Self> {
        let theta_hat = estimator.estimate(original)?;
        if theta_hat.dim() != theta0.dim() {
            return invalid("theta0 and the estimate have different dimensions");
        }
        Ok(Self {
            error: theta0.distance(&theta_hat),
            original,
            estimator,
            theta0,
            theta_hat,
        })
    }

    fn keep_original(&self, proposals_feasible: usize) -> InterventionResult {
        InterventionResult {
            corrected: self.original.clone(),
            theta_hat: self.theta_hat.clone(),
            theta_tilde: self.theta_hat.clone(),
            error_before: self.error,
            error_after: self.error,
            cost_used: 0.0,
            num_changes: 0,
            proposals_feasible,
            fell_back: true,
        }
    }

    /// Accepts `candidate` only if it is within budget and strictly better.
    fn finish(
        &self,
        candidate: Option<SampleSequence>,
        cost: &CostFunctionSpec,
        budget: f64,
        proposals_feasible: usize,
    ) -> Result<InterventionResult> {
        let Some(candidate) = candidate else {
            return Ok(self.keep_original(proposals_feasible));
        };
        let cost_used = sequence_cost(self.original, &candidate, cost)?;
        let theta_tilde = self.estimator.estimate(&candidate)?;
        let error_after = self.theta0.distance(&theta_tilde);
        if cost_used > budget || !(error_after < self.error) {
            return Ok(self.keep_original(proposals_feasible));
        }
        Ok(InterventionResult {
            num_changes: self.original.hamming_distance(&candidate)?,
            corrected: candidate,
            theta_hat: self.theta_hat.clone(),
            theta_tilde,
            error_before: self.error,
            error_after,
            cost_used,
            proposals_feasible,
            fell_back: false,
        })
    }
}

/// Per-row cumulative distributions for inverse-CDF draws.
struct RowSampler {
    cdf: Vec<Vec<f64>>,
    last_positive: Vec<usize>,
}

impl RowSampler {
    fn new(pmf: &ConditionalPmf) -> Self {
        let mut cdf = Vec::with_capacity(pmf.probs.nrows());
        let mut last_positive = Vec::with_capacity(pmf.probs.nrows());
        for row in pmf.probs.rows() {
            let mut acc = 0.0;
            cdf.push(
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect(),
            );
            last_positive.push(row.iter().rposition(|&p| p > 0.0).unwrap_or(0));
        }
        Self { cdf, last_positive }
    }

    fn draw<R: Rng + ?Sized>(&self, row: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let cdf = &self.cdf[row];
        let j = cdf.partition_point(|&c| c <= u);
        if j < cdf.len() {
            j
        } else {
            self.last_positive[row]
        }
    }
}

fn draw_sequence<R: Rng + ?Sized>(
    original: &SampleSequence,
    rows: &[usize],
    sampler: &RowSampler,
    targets: &StateSpace,
    rng: &mut R,
) -> (SampleSequence, Vec<usize>) {
    let mut out = original.clone();
    let mut picks = Vec::with_capacity(rows.len());
    for (i, &row) in rows.iter().enumerate() {
        let j = sampler.draw(row, rng);
        out.set(i, targets.state(j));
        picks.push(j);
    }
    (out, picks)
}

/// Replaces every `x_i` by an independent draw from `P(. | x_i)`, in
/// sequence order.
pub fn sample_modified_sequence<R: Rng + ?Sized>(
    original: &SampleSequence,
    pmf: &ConditionalPmf,
    rng: &mut R,
) -> Result<SampleSequence> {
    let rows = pmf.source.indices_of(original)?;
    let sampler = RowSampler::new(pmf);
    Ok(draw_sequence(original, &rows, &sampler, &pmf.targets, rng).0)
}

/// Draws `M` candidates from the pmf, discards those over budget, and keeps
/// the one with the lowest estimation error if it beats the original.
pub fn batch_policy<R: Rng + ?Sized>(
    original: &SampleSequence,
    pmf: &ConditionalPmf,
    cost: &CostFunctionSpec,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    config: &TeacherConfig,
    rng: &mut R,
) -> Result<InterventionResult> {
    config.validate()?;
    let base = Baseline::new(original, estimator, theta0)?;
    let rows = pmf.source.indices_of(original)?;
    let sampler = RowSampler::new(pmf);
    let position_costs = position_cost_table(original, &pmf.targets, cost)?;

    let mut best: Option<(f64, SampleSequence)> = None;
    let mut feasible = 0;
    for _ in 0..config.num_proposals {
        let (candidate, picks) = draw_sequence(original, &rows, &sampler, &pmf.targets, rng);
        let total: f64 = picks
            .iter()
            .enumerate()
            .map(|(i, &j)| position_costs[i][j])
            .sum();
        if total > config.budget {
            continue;
        }
        feasible += 1;
        let err = theta0.distance(&estimator.estimate(&candidate)?);
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, candidate));
        }
    }
    base.finish(best.map(|(_, s)| s), cost, config.budget, feasible)
}

fn position_cost_table(
    original: &SampleSequence,
    targets: &StateSpace,
    cost: &CostFunctionSpec,
) -> Result<Vec<Vec<f64>>> {
    original
        .iter()
        .map(|x| targets.iter().map(|t| cost.cost(x, t)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Change {
    prob: f64,
    cost: f64,
    sample: usize,
    target: usize,
}

/// Probability descending, then cost, sample index and target index ascending.
fn rank_changes(changes: &mut [Change]) {
    changes.sort_by(|a, b| {
        b.prob
            .total_cmp(&a.prob)
            .then(a.cost.total_cmp(&b.cost))
            .then(a.sample.cmp(&b.sample))
            .then(a.target.cmp(&b.target))
    });
}

/// Sum of per-position costs in sequence order, matching [`sequence_cost`].
fn total_with(position_cost: &[f64], i: usize, c: f64) -> f64 {
    position_cost
        .iter()
        .enumerate()
        .map(|(k, &v)| if k == i { c } else { v })
        .sum()
}

/// Walks all single-sample changes with positive probability from most to
/// least probable and applies each one that still fits in the budget (at most
/// one change per sample). Deterministic.
pub fn greedy_policy(
    original: &SampleSequence,
    pmf: &ConditionalPmf,
    cost: &CostFunctionSpec,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    config: &TeacherConfig,
) -> Result<InterventionResult> {
    config.validate()?;
    let base = Baseline::new(original, estimator, theta0)?;
    let rows = pmf.source.indices_of(original)?;
    let position_costs = position_cost_table(original, &pmf.targets, cost)?;

    let mut changes = Vec::new();
    for (i, x) in original.iter().enumerate() {
        for j in 0..pmf.targets.len() {
            let prob = pmf.probs[[rows[i], j]];
            if prob > 0.0 && pmf.targets.index_of(x) != Some(j) {
                changes.push(Change {
                    prob,
                    cost: position_costs[i][j],
                    sample: i,
                    target: j,
                });
            }
        }
    }
    rank_changes(&mut changes);

    let mut corrected = original.clone();
    let mut position_cost = vec![0.0; original.len()];
    let mut changed = vec![false; original.len()];
    let mut applied = 0;
    for ch in &changes {
        if changed[ch.sample] || total_with(&position_cost, ch.sample, ch.cost) > config.budget {
            continue;
        }
        corrected.set(ch.sample, pmf.targets.state(ch.target));
        position_cost[ch.sample] = ch.cost;
        changed[ch.sample] = true;
        applied += 1;
    }
    let candidate = (applied > 0).then_some(corrected);
    base.finish(candidate, cost, config.budget, changes.len())
}

/// Re-solves the plan on the current sequence with the remaining budget and
/// applies the single supported change with the largest predicted error
/// reduction under the linearized estimator, until the budget is spent or no
/// change is predicted to help. Each sample changes at most once.
pub fn receding_horizon_policy(
    original: &SampleSequence,
    solver: &SolverInputs,
    cost: &CostFunctionSpec,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    config: &TeacherConfig,
) -> Result<InterventionResult> {
    config.validate()?;
    let base = Baseline::new(original, estimator, theta0)?;
    match receding_horizon_path(original, solver, cost, estimator, theta0, config) {
        Ok((candidate, considered)) => base.finish(candidate, cost, config.budget, considered),
        // a failed re-solve leaves the student's data alone
        Err(Error::Infeasible(_)) | Err(Error::DegeneratePlan(_)) => Ok(base.keep_original(0)),
        Err(e) => Err(e),
    }
}

fn receding_horizon_path(
    original: &SampleSequence,
    solver: &SolverInputs,
    cost: &CostFunctionSpec,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    config: &TeacherConfig,
) -> Result<(Option<SampleSequence>, usize)> {
    let targets = &solver.targets;
    let n_samples = original.len() as f64;
    let position_costs = position_cost_table(original, targets, cost)?;
    let mut current = original.clone();
    let mut position_cost = vec![0.0; original.len()];
    let mut frozen = vec![false; original.len()];
    let mut applied = 0;
    let mut considered = 0;

    while applied < original.len() {
        let spent: f64 = position_cost.iter().sum();
        let remaining = config.budget - spent;
        if remaining <= 0.0 {
            break;
        }
        let problem = assemble_problem(
            &current,
            targets,
            estimator,
            theta0,
            cost,
            remaining,
            solver.epsilon,
        )?;
        let plan = solve_alpha(&problem, &solver.options)?;
        let pmf = conditional_pmf(&plan, &problem.r, problem.source())?;
        let rows = problem.source().indices_of(&current)?;

        let model_error = |shift: &dyn Fn(usize) -> f64| -> f64 {
            problem
                .base_estimate
                .values()
                .iter()
                .zip(theta0.values())
                .enumerate()
                .map(|(k, (j, t))| {
                    let e = t - (j + shift(k));
                    e * e
                })
                .sum::<f64>()
                .sqrt()
        };
        let now = model_error(&|_| 0.0);

        let mut best: Option<(f64, Change)> = None;
        for i in (0..original.len()).filter(|&i| !frozen[i]) {
            let a = rows[i];
            for j in 0..targets.len() {
                let prob = pmf.probs[[a, j]];
                if prob <= 0.0 || targets.index_of(current.get(i)) == Some(j) {
                    continue;
                }
                let c = position_costs[i][j];
                if total_with(&position_cost, i, c) > config.budget {
                    continue;
                }
                considered += 1;
                // moving one sample shifts mass 1/N from s_a to s~_j
                let predicted = model_error(&|k| {
                    (problem.target_gradient.at(j, k) - problem.source_gradient.at(a, k)) / n_samples
                });
                let gain = now - predicted;
                let ch = Change {
                    prob,
                    cost: c,
                    sample: i,
                    target: j,
                };
                let better = match &best {
                    None => true,
                    Some((g, b)) => {
                        gain > *g
                            || (gain == *g && {
                                let mut pair = [*b, ch];
                                rank_changes(&mut pair);
                                pair[0].sample == ch.sample && pair[0].target == ch.target
                            })
                    }
                };
                if better {
                    best = Some((gain, ch));
                }
            }
        }
        match best {
            Some((gain, ch)) if gain > 0.0 => {
                current.set(ch.sample, targets.state(ch.target));
                position_cost[ch.sample] = ch.cost;
                frozen[ch.sample] = true;
                applied += 1;
            }
            _ => break,
        }
    }
    Ok(((applied > 0).then_some(current), considered))
}

/// Exhaustive search over all `m^N` reassignments of the sequence to target
/// states. Ties go to the lexicographically smallest assignment of target
/// indices.
pub fn oracle_search(
    original: &SampleSequence,
    targets: &StateSpace,
    budget: f64,
    cost: &CostFunctionSpec,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
) -> Result<InterventionResult> {
    if !(budget.is_finite() && budget >= 0.0) {
        return invalid(format!("budget must be nonnegative, got {budget}"));
    }
    if targets.is_empty() {
        return invalid("target state space is empty");
    }
    let (n, m) = (original.len(), targets.len());
    let assignments = (m as f64).powi(n as i32);
    if assignments > ORACLE_LIMIT as f64 {
        return Err(Error::TooLarge {
            assignments,
            limit: ORACLE_LIMIT,
        });
    }
    let base = Baseline::new(original, estimator, theta0)?;
    let position_costs = position_cost_table(original, targets, cost)?;

    let mut idx = vec![0usize; n];
    let mut candidate = original.clone();
    let mut best: Option<(f64, SampleSequence)> = None;
    let mut feasible = 0;
    loop {
        let total: f64 = idx.iter().enumerate().map(|(i, &j)| position_costs[i][j]).sum();
        if total <= budget {
            feasible += 1;
            for (i, &j) in idx.iter().enumerate() {
                candidate.set(i, targets.state(j));
            }
            let err = theta0.distance(&estimator.estimate(&candidate)?);
            if best.as_ref().map_or(true, |(e, _)| err < *e) {
                best = Some((err, candidate.clone()));
            }
        }
        // odometer with the last position fastest: lexicographic order
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX {
            break;
        }
    }

    let Some((error_after, corrected)) = best else {
        return Ok(base.keep_original(0));
    };
    if corrected.bit_eq(original) {
        return Ok(base.keep_original(feasible));
    }
    let theta_tilde = estimator.estimate(&corrected)?;
    Ok(InterventionResult {
        cost_used: sequence_cost(original, &corrected, cost)?,
        num_changes: original.hamming_distance(&corrected)?,
        fell_back: false,
        theta_hat: base.theta_hat.clone(),
        error_before: base.error,
        theta_tilde,
        error_after,
        corrected,
        proposals_feasible: feasible,
    })
}

/// The full teacher pipeline: assemble the transport problem on the
/// original sequence, solve for the plan, derive the conditional pmf and run
/// the configured policy.
pub fn teach<R: Rng + ?Sized>(
    original: &SampleSequence,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    cost: &CostFunctionSpec,
    config: &TeacherConfig,
    solver: &SolverInputs,
    rng: &mut R,
) -> Result<InterventionResult> {
    config.validate()?;
    if config.policy == Policy::RecedingHorizon {
        return receding_horizon_policy(original, solver, cost, estimator, theta0, config);
    }
    let problem = assemble_problem(
        original,
        &solver.targets,
        estimator,
        theta0,
        cost,
        config.budget,
        solver.epsilon,
    )?;
    let plan = solve_alpha(&problem, &solver.options)?;
    let pmf = conditional_pmf(&plan, &problem.r, problem.source())?;
    match config.policy {
        Policy::Batch => batch_policy(original, &pmf, cost, estimator, theta0, config, rng),
        Policy::Greedy => greedy_policy(original, &pmf, cost, estimator, theta0, config),
        Policy::RecedingHorizon => unreachable!(),
    }
}
