use correctional_ot::estimators::{MeanEstimator, ParameterVector, VarianceEstimator};
use correctional_ot::measure::{CostFunctionSpec, SampleSequence, StateSpace};
use correctional_ot::solver::{
    assemble_problem, conditional_pmf, solve_alpha, Initialization, ProjectionMethod, SolverOptions,
    TransportProblem,
};
use ndarray::Array2;
use proptest::prelude::*;

fn problem(xs: &[f64], est: &dyn correctional_ot::Estimator, theta0: f64, budget: f64) -> TransportProblem {
    let seq = SampleSequence::from_scalars(xs).unwrap();
    let targets = StateSpace::from_sequence(&seq);
    let theta0 = ParameterVector::scalar(theta0).unwrap();
    assemble_problem(&seq, &targets, est, &theta0, &CostFunctionSpec::Indicator, budget, 1e-5).unwrap()
}

/// Brute force over the two free coordinates of a 2 x 2 plan: the share of
/// each row's mass sent to the first target.
fn grid_2x2(p: &TransportProblem, step: f64) -> (f64, Array2<f64>) {
    let r = p.r.weights();
    let steps = (1.0 / step).round() as usize;
    let mut best = (f64::INFINITY, Array2::zeros((2, 2)));
    for a in 0..=steps {
        for b in 0..=steps {
            let shares = [a as f64 * step, b as f64 * step];
            let mut alpha = Array2::<f64>::zeros((2, 2));
            for i in 0..2 {
                alpha[[i, 0]] = p.row_targets[i] * shares[i] / r[0];
                alpha[[i, 1]] = p.row_targets[i] * (1.0 - shares[i]) / r[1];
            }
            if p.budget_used(&alpha) > p.budget_rhs {
                continue;
            }
            let obj = p.objective(&alpha);
            if obj < best.0 {
                best = (obj, alpha);
            }
        }
    }
    best
}

#[test]
fn two_state_mean_plan_matches_grid_search() {
    // p_hat = (1/2, 1/2) on {0, 1}; B / N = 0.25
    let p = problem(&[0.0, 1.0], &MeanEstimator, 0.75, 0.5);
    assert_eq!(p.budget_rhs, 0.25);
    let plan = solve_alpha(&p, &SolverOptions::default()).unwrap();
    let (grid, _) = grid_2x2(&p, 1e-3);
    assert!((plan.objective_value - grid).abs() < 1e-4, "{} vs {grid}", plan.objective_value);
    assert!(plan.marginal_residual < 1e-6);
    assert!(plan.budget_slack >= -1e-8);
    assert!(plan.alpha.iter().all(|&a| a >= -1e-12));

    // Bayes' rule by hand: P[i][j] = alpha_ij r_j / sum_k alpha_ik r_k
    let pmf = conditional_pmf(&plan, &p.r, p.source()).unwrap();
    for i in 0..2 {
        let row: Vec<f64> = (0..2).map(|j| plan.alpha[[i, j]] * 0.5).collect();
        let total: f64 = row.iter().sum();
        for j in 0..2 {
            assert!((pmf.probs[[i, j]] - row[j] / total).abs() < 1e-9);
        }
    }
    // the mean can rise by at most 0.25 with this budget, reaching 0.75
    assert!(plan.objective_value < 1e-10);
    assert!(pmf.probs[[0, 1]] > 0.0);
}

#[test]
fn zero_budget_keeps_the_diagonal() {
    let p = problem(&[0.3, -1.2, 0.8, 2.2], &VarianceEstimator, 5.0, 0.0);
    for init in [Initialization::ZeroCost, Initialization::ProjectedProduct] {
        let plan = solve_alpha(&p, &SolverOptions { init, ..Default::default() }).unwrap();
        let pmf = conditional_pmf(&plan, &p.r, p.source()).unwrap();
        for ((i, j), v) in pmf.probs.indexed_iter() {
            assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn flat_objective_keeps_the_starting_plan() {
    // two samples at each of two states: the first-order variance change is
    // the same for both targets, so no plan improves on another
    let p = problem(&[0.0, 1.0, 1.0, 0.0], &VarianceEstimator, 0.1, 1.0);
    let zero = solve_alpha(&p, &SolverOptions { init: Initialization::ZeroCost, ..Default::default() }).unwrap();
    let spread = solve_alpha(&p, &SolverOptions::default()).unwrap();
    assert!((zero.objective_value - spread.objective_value).abs() < 1e-12);
    let pmf = conditional_pmf(&spread, &p.r, p.source()).unwrap();
    // the default start leaves every change reachable within the budget
    assert!(pmf.probs.iter().all(|&v| v > 0.0));
    assert!(spread.budget_slack >= -1e-12);
}

#[test]
fn dykstra_and_exact_projection_agree() {
    let p = problem(&[0.3, -1.2, 0.8, 2.2, -0.4], &VarianceEstimator, 2.5, 1.0);
    let exact = solve_alpha(&p, &SolverOptions::default()).unwrap();
    let dykstra = solve_alpha(
        &p,
        &SolverOptions {
            projection: ProjectionMethod::Dykstra { max_sweeps: 5000, tol: 1e-13 },
            max_iters: 2000,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((exact.objective_value - dykstra.objective_value).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn larger_budget_never_hurts(
        xs in prop::collection::hash_set(-200i32..200, 2..6),
        t0 in 0.0f64..6.0,
        b in 0.0f64..2.0,
        extra in 0.0f64..2.0,
    ) {
        let xs: Vec<f64> = xs.iter().map(|&v| v as f64 / 50.0).collect();
        let small = solve_alpha(&problem(&xs, &VarianceEstimator, t0, b), &SolverOptions::default()).unwrap();
        let large = solve_alpha(&problem(&xs, &VarianceEstimator, t0, b + extra), &SolverOptions::default()).unwrap();
        prop_assert!(large.objective_value <= small.objective_value + 1e-9 * small.objective_value.max(1e-6));
    }

    #[test]
    fn mean_model_is_exact_on_feasible_plans(
        xs in prop::collection::vec(0i32..5, 2..10),
        weights in prop::collection::vec(0.01f64..1.0, 25),
    ) {
        let xs: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
        let seq = SampleSequence::from_scalars(&xs).unwrap();
        let targets = StateSpace::from_sequence(&seq);
        prop_assume!(targets.len() >= 2);
        let theta0 = ParameterVector::scalar(1.0).unwrap();
        let p = assemble_problem(&seq, &targets, &MeanEstimator, &theta0, &CostFunctionSpec::Indicator, xs.len() as f64, 1e-5).unwrap();
        let r = p.r.weights();
        let mut alpha = Array2::<f64>::zeros((p.n(), p.m()));
        for i in 0..p.n() {
            let w = &weights[i * 5..i * 5 + p.m()];
            let norm: f64 = w.iter().zip(r).map(|(a, b)| a * b).sum();
            for j in 0..p.m() {
                alpha[[i, j]] = p.row_targets[i] * w[j] / norm;
            }
        }
        let marginal = p.implied_target_marginal(&alpha);
        let exact: f64 = marginal.iter().zip(targets.iter()).map(|(w, s)| w * s[0]).sum();
        prop_assert!((p.model_estimate(&alpha)[0] - exact).abs() < 1e-10);
    }
}
