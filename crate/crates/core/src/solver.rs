//! The discretized teacher problem.
//!
//! The decision variable `alpha` (n x m) is the density of the transport plan
//! `dp(x_i, s~_j)` against the product proposal `q_i r_j`. The solver minimizes
//!
//! ```text
//! || theta0 - c0 - sum_ij G_ij alpha_ij ||^2
//! ```
//!
//! over `alpha >= 0` with the row marginals `sum_j r_j alpha_ij = row_targets[i]`
//! and the budget `sum_ij q_i r_j c_ij alpha_ij <= B / N`, where
//! `G_ij = q_i r_j g(s~_j)` and `g` is the Gateaux gradient of the estimator at
//! the empirical measure. With uniform proposals (`q_i = 1/n`, `r_j = 1/m`)
//! these are the `1/(nm)` and `1/m` quadrature weights of the importance
//! sampling discretization.
//!
//! Minimization is projected gradient descent with step `1/L`. The projection
//! onto the feasible set is exact: rows are projected onto weighted simplices
//! and the single budget halfspace is handled through its scalar multiplier,
//! found by a bracketed root search. Dykstra's alternating projections are
//! available as [`ProjectionMethod::Dykstra`].

use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::estimators::{numerical_gradient, Estimator, GradientField, ParameterVector};
use crate::measure::{
    build_cost_matrix, empirical_measure, CostFunctionSpec, CostMatrix, EmpiricalMeasure,
    SampleSequence, StateSpace,
};

/// The assembled quadratic program over `alpha`.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    /// `q`, supported on the source states `S`.
    pub q: EmpiricalMeasure,
    /// `r`, supported on the target states `S~`.
    pub r: EmpiricalMeasure,
    /// `dp_hat / dq` on each source state.
    pub row_targets: Vec<f64>,
    pub cost: CostMatrix,
    /// One coefficient matrix per parameter coordinate.
    pub coefficients: Vec<Array2<f64>>,
    /// `J(p_hat) - sum_i p_hat(s_i) g(s_i)`.
    pub c0: ParameterVector,
    pub theta0: ParameterVector,
    /// `B / N`.
    pub budget_rhs: f64,
    /// `J(p_hat)`.
    pub base_estimate: ParameterVector,
    /// Gradient at the target states.
    pub target_gradient: GradientField,
    /// Gradient at the source states.
    pub source_gradient: GradientField,
    pub sample_count: usize,
}

impl TransportProblem {
    pub fn source(&self) -> &StateSpace {
        self.q.support()
    }

    pub fn targets(&self) -> &StateSpace {
        self.r.support()
    }

    pub fn n(&self) -> usize {
        self.q.support().len()
    }

    pub fn m(&self) -> usize {
        self.r.support().len()
    }

    /// The linearized estimate `c0 + <G, alpha>` per coordinate.
    pub fn model_estimate(&self, alpha: &Array2<f64>) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(self.c0.values())
            .map(|(g, c)| c + dot(g, alpha))
            .collect()
    }

    pub fn objective(&self, alpha: &Array2<f64>) -> f64 {
        self.model_estimate(alpha)
            .iter()
            .zip(self.theta0.values())
            .map(|(e, t)| (t - e) * (t - e))
            .sum()
    }

    /// `sum_ij q_i r_j c_ij alpha_ij`.
    pub fn budget_used(&self, alpha: &Array2<f64>) -> f64 {
        dot(&self.weighted_cost(), alpha)
    }

    /// Largest violation of the row marginal constraints.
    pub fn marginal_residual(&self, alpha: &Array2<f64>) -> f64 {
        let r = self.r.weights();
        alpha
            .rows()
            .into_iter()
            .zip(&self.row_targets)
            .map(|(row, t)| (row.iter().zip(r).map(|(a, w)| a * w).sum::<f64>() - t).abs())
            .fold(0.0, f64::max)
    }

    /// Marginal of the plan on the target states, `sum_i q_i r_j alpha_ij`.
    pub fn implied_target_marginal(&self, alpha: &Array2<f64>) -> Vec<f64> {
        let (q, r) = (self.q.weights(), self.r.weights());
        (0..self.m())
            .map(|j| (0..self.n()).map(|i| q[i] * r[j] * alpha[[i, j]]).sum())
            .collect()
    }

    fn weighted_cost(&self) -> Array2<f64> {
        let (q, r) = (self.q.weights(), self.r.weights());
        Array2::from_shape_fn((self.n(), self.m()), |(i, j)| {
            q[i] * r[j] * self.cost.entries[[i, j]]
        })
    }

    /// The zero-cost plan: each row puts all of its mass on its cheapest
    /// reachable target, preferring the target equal to the source state.
    /// With `S~ = S` and a zero-diagonal cost this is the diagonal plan.
    pub fn identity_plan(&self) -> Result<Array2<f64>> {
        let r = self.r.weights();
        let mut alpha = Array2::zeros((self.n(), self.m()));
        for i in 0..self.n() {
            let own = self.targets().index_of(self.source().state(i));
            let mut best: Option<usize> = None;
            for j in (0..self.m()).filter(|&j| r[j] > 0.0) {
                let c = self.cost.entries[[i, j]];
                best = match best {
                    None => Some(j),
                    Some(b) => {
                        let cb = self.cost.entries[[i, b]];
                        if c < cb || (c == cb && own == Some(j)) {
                            Some(j)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let j = best.ok_or_else(|| Error::InvalidInput("no target state has proposal mass".into()))?;
            alpha[[i, j]] = self.row_targets[i] / r[j];
        }
        Ok(alpha)
    }
}

/// Cap on the step multiple tried by the solver.
const MAX_STEP_GAIN: f64 = 1e12;

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Builds the problem for the re-weighting case `q = r = p_hat`: the source
/// states are the unique values of `seq`, `q` is their empirical measure and
/// `r` is the empirical measure restricted to `targets` (renormalized).
pub fn assemble_problem(
    seq: &SampleSequence,
    targets: &StateSpace,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    cost: &CostFunctionSpec,
    budget: f64,
    epsilon: f64,
) -> Result<TransportProblem> {
    let p_hat = empirical_measure(seq);
    if targets.is_empty() {
        return invalid("target state space is empty");
    }
    let r = p_hat.restricted_to(targets)?;
    assemble_with_proposals(seq, p_hat, r, estimator, theta0, cost, budget, epsilon)
}

/// Builds the problem for arbitrary proposals `q` (on the unique values of
/// `seq`, in first-occurrence order) and `r` (on the target states).
#[allow(clippy::too_many_arguments)]
pub fn assemble_with_proposals(
    seq: &SampleSequence,
    q: EmpiricalMeasure,
    r: EmpiricalMeasure,
    estimator: &dyn Estimator,
    theta0: &ParameterVector,
    cost: &CostFunctionSpec,
    budget: f64,
    epsilon: f64,
) -> Result<TransportProblem> {
    if !(budget.is_finite() && budget >= 0.0) {
        return invalid(format!("budget must be a nonnegative number, got {budget}"));
    }
    let p_hat = empirical_measure(seq);
    if q.support() != p_hat.support() {
        return invalid("q must be supported on the unique observed values");
    }
    let row_targets = p_hat
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(p, qw)| {
            if *qw > 0.0 {
                Ok(p / qw)
            } else {
                invalid("q has no mass on an observed state")
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let base_estimate = estimator.evaluate(&p_hat)?;
    if base_estimate.dim() != theta0.dim() {
        return invalid(format!(
            "theta0 has dimension {} but the estimator returns {}",
            theta0.dim(),
            base_estimate.dim()
        ));
    }
    let target_gradient = numerical_gradient(estimator, &p_hat, r.support(), epsilon)?;
    let source_gradient = if r.support() == p_hat.support() {
        target_gradient.clone()
    } else {
        numerical_gradient(estimator, &p_hat, p_hat.support(), epsilon)?
    };

    let c0 = ParameterVector::new(
        base_estimate
            .values()
            .iter()
            .enumerate()
            .map(|(k, j)| {
                j - p_hat
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * source_gradient.at(i, k))
                    .sum::<f64>()
            })
            .collect(),
    )?;

    let (n, m) = (q.support().len(), r.support().len());
    let coefficients = (0..theta0.dim())
        .map(|k| {
            Array2::from_shape_fn((n, m), |(i, j)| {
                q.weights()[i] * r.weights()[j] * target_gradient.at(j, k)
            })
        })
        .collect();

    let cost = build_cost_matrix(q.support(), r.support(), cost)?;
    Ok(TransportProblem {
        q,
        r,
        row_targets,
        cost,
        coefficients,
        c0,
        theta0: theta0.clone(),
        budget_rhs: budget / seq.len() as f64,
        base_estimate,
        target_gradient,
        source_gradient,
        sample_count: seq.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionMethod {
    /// Row-wise simplex projections with the budget multiplier found by
    /// root search. Returns feasible points.
    Exact,
    /// Dykstra's alternating projections between the row simplices and the
    /// budget halfspace. The budget holds only up to `tol` after
    /// `max_sweeps`.
    Dykstra { max_sweeps: usize, tol: f64 },
}

/// Starting point of the descent. Along directions where the objective is
/// flat the solver stays where it started, so this decides which of several
/// optimal plans is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    /// The zero-cost plan: nothing moves unless the gradient says so.
    ZeroCost,
    /// The independent coupling `alpha = 1` projected onto the feasible set,
    /// which spreads the budget over every reachable target.
    #[default]
    ProjectedProduct,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Threshold on the relative objective decrease and the relative iterate
    /// displacement.
    pub tol: f64,
    pub max_iters: usize,
    pub projection: ProjectionMethod,
    pub init: Initialization,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 20_000,
            projection: ProjectionMethod::Exact,
            init: Initialization::default(),
            record_trace: false,
        }
    }
}

/// A solved plan and its diagnostics.
#[derive(Debug, Clone)]
pub struct TransportPlanAlpha {
    pub alpha: Array2<f64>,
    pub objective_value: f64,
    pub marginal_residual: f64,
    /// `budget_rhs - sum_ij q_i r_j c_ij alpha_ij`.
    pub budget_slack: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start and after every accepted step, when requested.
    pub trace: Vec<f64>,
}

/// Minimizes the linearized teacher objective over feasible plans, starting
/// from the point chosen by [`SolverOptions::init`].
///
/// Returns [`Error::Infeasible`] when even the zero-cost plan exceeds the
/// budget. Hitting `max_iters` is not an error; the plan is flagged with
/// `converged = false`.
pub fn solve_alpha(problem: &TransportProblem, options: &SolverOptions) -> Result<TransportPlanAlpha> {
    let mut alpha = problem.identity_plan()?;
    let weighted_cost = problem.weighted_cost();
    let floor = dot(&weighted_cost, &alpha);
    let rhs = problem.budget_rhs;
    if floor > rhs + 1e-12 * rhs.abs().max(1.0) {
        return Err(Error::Infeasible(format!(
            "the cheapest plan uses a normalized budget of {floor}, above B/N = {rhs}"
        )));
    }

    let mut projector = Projector::new(problem, weighted_cost);
    if options.init == Initialization::ProjectedProduct {
        alpha = projector.project(&Array2::ones(alpha.dim()), options.projection)?;
    }
    let lipschitz_half: f64 = problem
        .coefficients
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum::<f64>())
        .sum();

    let mut objective = problem.objective(&alpha);
    let mut trace = Vec::new();
    if options.record_trace {
        trace.push(objective);
    }
    let mut iterations = 0;
    let mut converged = true;

    if lipschitz_half > 0.0 && objective > 0.0 {
        converged = false;
        let mut step_point = alpha.clone();
        // multiple of the safe step 1/L; grows while the quadratic upper
        // bound at the longer step still holds, halves back otherwise
        let mut gain = 1.0f64;
        while iterations < options.max_iters {
            iterations += 1;
            // y = alpha - gain * grad / L, with grad = -2 sum_k res_k G_k and L = 2 sum_k |G_k|^2
            let residuals: Vec<f64> = problem
                .model_estimate(&alpha)
                .iter()
                .zip(problem.theta0.values())
                .map(|(e, t)| t - e)
                .collect();
            gain = (gain * 2.0).min(MAX_STEP_GAIN);
            let (candidate, next_objective) = loop {
                step_point.assign(&alpha);
                for (g, res) in problem.coefficients.iter().zip(&residuals) {
                    step_point.scaled_add(gain * res / lipschitz_half, g);
                }
                let candidate = projector.project(&step_point, options.projection)?;
                let next_objective = problem.objective(&candidate);
                if gain <= 1.0 {
                    break (candidate, next_objective);
                }
                let d = &candidate - &alpha;
                let slope: f64 = problem
                    .coefficients
                    .iter()
                    .zip(&residuals)
                    .map(|(g, res)| -2.0 * res * dot(g, &d))
                    .sum();
                let bound = objective + slope + lipschitz_half * dot(&d, &d) / gain;
                if next_objective <= bound {
                    break (candidate, next_objective);
                }
                gain = (gain * 0.5).max(1.0);
            };
            if next_objective > objective {
                // no descent left at working precision
                converged = true;
                break;
            }
            let displacement = candidate
                .iter()
                .zip(alpha.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let scale = alpha.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            let decrease = (objective - next_objective) / objective.max(f64::MIN_POSITIVE);
            alpha = candidate;
            objective = next_objective;
            if options.record_trace {
                trace.push(objective);
            }
            if objective < 1e-30 || decrease < options.tol || displacement / scale < options.tol {
                converged = true;
                break;
            }
        }
    }

    Ok(TransportPlanAlpha {
        objective_value: objective,
        marginal_residual: problem.marginal_residual(&alpha),
        budget_slack: rhs - dot(&projector.weighted_cost, &alpha),
        iterations,
        converged,
        trace,
        alpha,
    })
}

/// Euclidean projection onto `{x >= 0, sum_j w_j x_j = total}`. Entries with
/// zero weight are set to zero.
pub fn project_weighted_simplex(y: &[f64], w: &[f64], total: f64, out: &mut [f64]) {
    let mut order: Vec<usize> = (0..y.len()).filter(|&j| w[j] > 0.0).collect();
    project_weighted_simplex_with(y, w, total, out, &mut order);
}

fn project_weighted_simplex_with(
    y: &[f64],
    w: &[f64],
    total: f64,
    out: &mut [f64],
    order: &mut [usize],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    if total <= 0.0 || order.is_empty() {
        return;
    }
    // x_j = max(y_j - lambda w_j, 0); breakpoints at y_j / w_j
    order.sort_unstable_by(|&a, &b| (y[b] / w[b]).total_cmp(&(y[a] / w[a])));
    let (mut sum_wy, mut sum_ww) = (0.0, 0.0);
    let mut lambda = 0.0;
    for (k, &j) in order.iter().enumerate() {
        sum_wy += w[j] * y[j];
        sum_ww += w[j] * w[j];
        let candidate = (sum_wy - total) / sum_ww;
        if k == 0 || y[j] / w[j] > candidate {
            lambda = candidate;
        } else {
            break;
        }
    }
    for &j in order.iter() {
        out[j] = (y[j] - lambda * w[j]).max(0.0);
    }
}

struct Projector<'a> {
    problem: &'a TransportProblem,
    weighted_cost: Array2<f64>,
    cost_norm_sq: f64,
    active: Vec<usize>,
    scratch: Vec<usize>,
}

impl<'a> Projector<'a> {
    fn new(problem: &'a TransportProblem, weighted_cost: Array2<f64>) -> Self {
        let r = problem.r.weights();
        Self {
            cost_norm_sq: weighted_cost.iter().map(|v| v * v).sum(),
            weighted_cost,
            problem,
            active: (0..r.len()).filter(|&j| r[j] > 0.0).collect(),
            scratch: Vec::new(),
        }
    }

    fn project(&mut self, y: &Array2<f64>, method: ProjectionMethod) -> Result<Array2<f64>> {
        match method {
            ProjectionMethod::Exact => self.project_exact(y),
            ProjectionMethod::Dykstra { max_sweeps, tol } => Ok(self.project_dykstra(y, max_sweeps, tol)),
        }
    }

    /// Projects `y - mu * C` onto the product of row simplices.
    fn rows_shifted(&mut self, y: &Array2<f64>, mu: f64, out: &mut Array2<f64>) {
        let r = self.problem.r.weights();
        let m = self.problem.m();
        let mut shifted = vec![0.0; m];
        for i in 0..self.problem.n() {
            for j in 0..m {
                shifted[j] = y[[i, j]] - mu * self.weighted_cost[[i, j]];
            }
            self.scratch.clear();
            self.scratch.extend_from_slice(&self.active);
            let mut row = out.row_mut(i);
            let row = row.as_slice_mut().expect("standard layout");
            project_weighted_simplex_with(&shifted, r, self.problem.row_targets[i], row, &mut self.scratch);
        }
    }

    fn budget_excess(&mut self, y: &Array2<f64>, mu: f64, out: &mut Array2<f64>) -> f64 {
        self.rows_shifted(y, mu, out);
        dot(&self.weighted_cost, out) - self.problem.budget_rhs
    }

    fn project_exact(&mut self, y: &Array2<f64>) -> Result<Array2<f64>> {
        let (n, m) = (self.problem.n(), self.problem.m());
        let mut out = Array2::zeros((n, m));
        let slack_tol = 1e-14 * self.problem.budget_rhs.abs().max(1e-2);
        let f0 = self.budget_excess(y, 0.0, &mut out);
        if f0 <= 0.0 {
            return Ok(out);
        }
        // excess(mu) is nonincreasing and piecewise linear in mu
        let (mut lo, mut f_lo) = (0.0, f0);
        let mut hi = (f0 / self.cost_norm_sq.max(f64::MIN_POSITIVE)).max(1e-300);
        let mut f_hi = self.budget_excess(y, hi, &mut out);
        let mut doublings = 0;
        while f_hi > 0.0 {
            lo = hi;
            f_lo = f_hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 2000 {
                return Err(Error::Infeasible("budget multiplier search diverged".into()));
            }
            f_hi = self.budget_excess(y, hi, &mut out);
        }
        let mut best_hi = out.clone();
        // Illinois false position, keeping `hi` feasible
        let mut side = 0i8;
        for _ in 0..200 {
            if f_hi >= -slack_tol || hi - lo <= 1e-15 * hi {
                break;
            }
            let mu = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            let mu = if mu > lo && mu < hi { mu } else { 0.5 * (lo + hi) };
            let f = self.budget_excess(y, mu, &mut out);
            if f > 0.0 {
                lo = mu;
                f_lo = f;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = mu;
                f_hi = f;
                best_hi.assign(&out);
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
        }
        Ok(best_hi)
    }

    fn project_halfspace(&self, z: &Array2<f64>) -> Array2<f64> {
        let excess = dot(&self.weighted_cost, z) - self.problem.budget_rhs;
        if excess <= 0.0 || self.cost_norm_sq == 0.0 {
            return z.clone();
        }
        z - &(&self.weighted_cost * (excess / self.cost_norm_sq))
    }

    fn project_dykstra(&mut self, y: &Array2<f64>, max_sweeps: usize, tol: f64) -> Array2<f64> {
        let (n, m) = (self.problem.n(), self.problem.m());
        let mut x = y.clone();
        let mut p = Array2::zeros((n, m));
        let mut q = Array2::zeros((n, m));
        let mut a = Array2::zeros((n, m));
        for _ in 0..max_sweeps {
            let shifted = &x + &p;
            self.rows_shifted(&shifted, 0.0, &mut a);
            p = &shifted - &a;
            let shifted = &a + &q;
            let h = self.project_halfspace(&shifted);
            q = &shifted - &h;
            let change = h
                .iter()
                .zip(x.iter())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            let gap = h
                .iter()
                .zip(a.iter())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            x = h;
            if change < tol && gap < tol {
                break;
            }
        }
        a
    }
}

/// Row-stochastic table `P[i][j] = p(s~_j | s_i)`.
#[derive(Debug, Clone)]
pub struct ConditionalPmf {
    pub probs: Array2<f64>,
    pub source: StateSpace,
    pub targets: StateSpace,
    /// Largest deviation of a row sum from one before renormalization.
    pub normalization_residual: f64,
}

impl ConditionalPmf {
    /// Validates a user-supplied table.
    pub fn new(probs: Array2<f64>, source: StateSpace, targets: StateSpace) -> Result<Self> {
        if probs.dim() != (source.len(), targets.len()) {
            return invalid("pmf shape does not match the state spaces");
        }
        for row in probs.rows() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return invalid("pmf entries must be nonnegative");
            }
            if (row.sum() - 1.0).abs() > 1e-9 {
                return invalid("pmf rows must sum to one");
            }
        }
        Ok(Self {
            probs,
            source,
            targets,
            normalization_residual: 0.0,
        })
    }

    /// Every state maps to itself. All source states must be targets.
    pub fn identity(source: &StateSpace, targets: &StateSpace) -> Result<Self> {
        let mut probs = Array2::zeros((source.len(), targets.len()));
        for (i, s) in source.iter().enumerate() {
            let j = targets
                .index_of(s)
                .ok_or_else(|| Error::InvalidInput(format!("state {s:?} is not a target")))?;
            probs[[i, j]] = 1.0;
        }
        Self::new(probs, source.clone(), targets.clone())
    }
}

/// Bayes' rule on the plan: `P[i][j] = alpha_ij r(s~_j)`, rows renormalized.
/// A row without mass maps its state to itself when that state is a target.
pub fn conditional_pmf(
    plan: &TransportPlanAlpha,
    r: &EmpiricalMeasure,
    source: &StateSpace,
) -> Result<ConditionalPmf> {
    let targets = r.support();
    if plan.alpha.dim() != (source.len(), targets.len()) {
        return invalid("plan shape does not match the state spaces");
    }
    let mut probs = Array2::zeros(plan.alpha.dim());
    let mut residual = 0.0f64;
    for (i, row) in plan.alpha.rows().into_iter().enumerate() {
        let mut sum = 0.0;
        for (j, a) in row.iter().enumerate() {
            let p = a.max(0.0) * r.weights()[j];
            probs[[i, j]] = p;
            sum += p;
        }
        residual = residual.max((sum - 1.0).abs());
        if sum > 0.0 {
            probs.row_mut(i).mapv_inplace(|p| p / sum);
        } else {
            let s = source.state(i);
            let j = targets.index_of(s).ok_or_else(|| {
                Error::DegeneratePlan(format!("row {i} carries no mass and {s:?} is not a target"))
            })?;
            probs[[i, j]] = 1.0;
        }
    }
    Ok(ConditionalPmf {
        probs,
        source: source.clone(),
        targets: targets.clone(),
        normalization_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{MeanEstimator, VarianceEstimator};
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn seq(v: &[f64]) -> SampleSequence {
        SampleSequence::from_scalars(v).unwrap()
    }

    fn theta(v: f64) -> ParameterVector {
        ParameterVector::scalar(v).unwrap()
    }

    fn problem(xs: &[f64], est: &dyn Estimator, t0: f64, budget: f64) -> TransportProblem {
        let s = seq(xs);
        let targets = StateSpace::from_sequence(&s);
        assemble_problem(&s, &targets, est, &theta(t0), &CostFunctionSpec::Indicator, budget, 1e-5)
            .unwrap()
    }

    #[test]
    fn assembly_for_mean_on_two_points() {
        let p = problem(&[0.0, 1.0], &MeanEstimator, 3.0, 1.0);
        assert_relative_eq!(p.target_gradient.at(0, 0), -0.5, epsilon = 1e-9);
        assert_relative_eq!(p.target_gradient.at(1, 0), 0.5, epsilon = 1e-9);
        assert_relative_eq!(p.c0.values()[0], 0.5, epsilon = 1e-9);
        assert_eq!(p.row_targets, vec![1.0, 1.0]);
        assert_eq!(p.budget_rhs, 0.5);
        // uniform proposals give the 1/(nm) quadrature weight
        assert_relative_eq!(p.coefficients[0][[1, 0]], -0.5 / 4.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_budget_and_sizes() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.37 - 1.0).collect();
        let p = problem(&xs, &VarianceEstimator, 1.0, 0.0);
        assert_eq!(p.budget_rhs, 0.0);
        assert_eq!((p.n(), p.m()), (10, 10));
        assert!(p.row_targets.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn weibull_domain_violation_is_rejected() {
        let s = seq(&[1.0, 2.0]);
        let targets = StateSpace::from_scalars(&[1.0, 2.0, -1.0]).unwrap();
        let w = crate::estimators::WeibullScaleEstimator::new(8.0).unwrap();
        // r restricted to the targets puts no mass on -1, but the gradient
        // is still requested there
        assert!(assemble_problem(&s, &targets, &w, &theta(2.0), &CostFunctionSpec::Indicator, 1.0, 1e-5).is_err());
    }

    #[test]
    fn zero_budget_keeps_the_diagonal() {
        let p = problem(&[0.1, 0.7, 2.0, -1.0], &VarianceEstimator, 3.0, 0.0);
        let plan = solve_alpha(&p, &SolverOptions::default()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 4.0 } else { 0.0 };
                assert_relative_eq!(plan.alpha[[i, j]], expected, epsilon = 1e-12);
            }
        }
        let pmf = conditional_pmf(&plan, &p.r, p.source()).unwrap();
        for i in 0..4 {
            assert_relative_eq!(pmf.probs[[i, i]], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn attained_target_has_zero_objective() {
        let xs = [0.3, -0.2, 1.5, 0.9];
        let j = VarianceEstimator.estimate(&seq(&xs)).unwrap().values()[0];
        let p = problem(&xs, &VarianceEstimator, j, 2.0);
        let plan = solve_alpha(&p, &SolverOptions::default()).unwrap();
        assert!(plan.objective_value <= 1e-10);
    }

    #[test]
    fn infeasible_budget_is_reported() {
        let s = seq(&[0.0, 1.0]);
        let targets = StateSpace::from_scalars(&[5.0, 6.0]).unwrap();
        let p = assemble_with_proposals(
            &s,
            empirical_measure(&s),
            EmpiricalMeasure::uniform(targets),
            &MeanEstimator,
            &theta(0.0),
            &CostFunctionSpec::Indicator,
            0.5,
            1e-5,
        )
        .unwrap();
        assert!(matches!(solve_alpha(&p, &SolverOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn weighted_simplex_projection() {
        let mut out = [0.0; 3];
        project_weighted_simplex(&[0.2, 0.5, -1.0], &[1.0, 1.0, 1.0], 1.0, &mut out);
        assert_relative_eq!(out[0], 0.35, epsilon = 1e-15);
        assert_relative_eq!(out[1], 0.65, epsilon = 1e-15);
        assert_eq!(out[2], 0.0);
        // zero-weight entries are pinned to zero
        project_weighted_simplex(&[3.0, 1.0], &[0.0, 0.5], 2.0, &mut out[..2]);
        assert_eq!(out[0], 0.0);
        assert_relative_eq!(out[1], 4.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_pmf_examples() {
        let s = StateSpace::from_scalars(&[0.0, 1.0]).unwrap();
        let r = EmpiricalMeasure::uniform(s.clone());
        let mut plan = TransportPlanAlpha {
            alpha: array![[2.0, 0.0], [0.0, 2.0]],
            objective_value: 0.0,
            marginal_residual: 0.0,
            budget_slack: 0.0,
            iterations: 0,
            converged: true,
            trace: vec![],
        };
        let pmf = conditional_pmf(&plan, &r, &s).unwrap();
        assert_eq!(pmf.probs, array![[1.0, 0.0], [0.0, 1.0]]);

        plan.alpha = Array2::ones((2, 2));
        let pmf = conditional_pmf(&plan, &r, &s).unwrap();
        assert_eq!(pmf.probs, array![[0.5, 0.5], [0.5, 0.5]]);

        plan.alpha = array![[0.0, 0.0], [0.0, 2.0]];
        let pmf = conditional_pmf(&plan, &r, &s).unwrap();
        assert_eq!(pmf.probs.row(0).to_vec(), vec![1.0, 0.0]);

        let other = StateSpace::from_scalars(&[7.0, 1.0]).unwrap();
        assert!(matches!(conditional_pmf(&plan, &r, &other), Err(Error::DegeneratePlan(_))));
    }

    #[test]
    fn dykstra_agrees_with_exact_projection() {
        let p = problem(&[0.0, 0.4, 1.1, 2.5], &VarianceEstimator, 2.0, 1.0);
        let mut proj = Projector::new(&p, p.weighted_cost());
        let y = Array2::from_shape_fn((4, 4), |(i, j)| ((i * 7 + j * 3) % 5) as f64 * 0.8 - 0.6);
        let exact = proj.project_exact(&y).unwrap();
        let dyk = proj.project_dykstra(&y, 100_000, 1e-13);
        for (a, b) in exact.iter().zip(dyk.iter()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn solved_plans_are_feasible_and_descend(
            xs in prop::collection::hash_set(-300i32..300, 2..7),
            t0 in 0.0f64..4.0,
            budget in 0.0f64..3.0,
        ) {
            let xs: Vec<f64> = xs.iter().map(|&v| v as f64 / 100.0).collect();
            let p = problem(&xs, &VarianceEstimator, t0, budget);
            let opts = SolverOptions { record_trace: true, ..Default::default() };
            let plan = solve_alpha(&p, &opts).unwrap();
            prop_assert!(plan.alpha.iter().all(|&a| a >= -1e-12));
            prop_assert!(plan.marginal_residual < 1e-6);
            prop_assert!(plan.budget_slack >= -1e-8);
            let initial = p.objective(&p.identity_plan().unwrap());
            prop_assert!(plan.objective_value <= initial);
            for w in plan.trace.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }
    }
}
