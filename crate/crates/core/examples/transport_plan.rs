//! Solve the budget-constrained transport problem for one sequence and turn
//! the plan into per-state correction probabilities.

use correctional_ot::solver::SolverOptions;
use correctional_ot::{
    assemble_problem, conditional_pmf, solve_alpha, CostFunctionSpec, ParameterVector, SampleSequence, StateSpace,
    VarianceEstimator,
};

fn main() -> correctional_ot::Result<()> {
    let seq = SampleSequence::from_scalars(&[-1.2, 0.3, 0.3, 0.9, 1.7, -0.4, 0.3, 2.1])?;
    let targets = StateSpace::from_sequence(&seq);
    let theta0 = ParameterVector::scalar(0.5)?;

    for budget in [0.0, 1.0, 3.0] {
        let problem =
            assemble_problem(&seq, &targets, &VarianceEstimator, &theta0, &CostFunctionSpec::Indicator, budget, 1e-5)?;
        let plan = solve_alpha(&problem, &SolverOptions::default())?;
        let pmf = conditional_pmf(&plan, &problem.r, problem.source())?;
        println!(
            "B = {budget}: theta_hat {:.4}, predicted {:.4}, {} iterations, slack {:.2e}",
            problem.base_estimate.values()[0],
            problem.model_estimate(&plan.alpha)[0],
            plan.iterations,
            plan.budget_slack
        );
        for (i, s) in problem.source().iter().enumerate() {
            let row: Vec<String> = pmf.probs.row(i).iter().map(|p| format!("{p:.3}")).collect();
            println!("  from {:>5}: [{}]", s[0], row.join(", "));
        }
    }
    Ok(())
}
