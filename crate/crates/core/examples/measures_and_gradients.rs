//! Empirical measures, correction costs and numerical Gateaux derivatives.

use correctional_ot::{
    build_cost_matrix, empirical_measure, numerical_gradient, CostFunctionSpec, Estimator, SampleSequence,
    StateSpace, VarianceEstimator,
};

fn main() -> correctional_ot::Result<()> {
    let seq = SampleSequence::from_scalars(&[0.4, 1.0, 0.4, 2.5, 1.0, 0.4])?;
    let measure = empirical_measure(&seq);
    println!("empirical measure:");
    for (state, w) in measure.iter() {
        println!("  {:>5} -> {w:.4}", state[0]);
    }

    let est = VarianceEstimator;
    println!("variance estimate: {:.6}", est.estimate(&seq)?.values()[0]);

    let targets = StateSpace::from_scalars(&[0.0, 0.4, 1.0, 2.5, 3.0])?;
    let grad = numerical_gradient(&est, &measure, &targets, 1e-5)?;
    println!("Gateaux derivative toward each target:");
    for (j, s) in targets.iter().enumerate() {
        println!("  {:>5} -> {:+.6}", s[0], grad.at(j, 0));
    }

    let cost = CostFunctionSpec::ceil_proportional(10.0)?;
    let matrix = build_cost_matrix(measure.support(), &targets, &cost)?;
    println!("ceil-proportional costs, observed state -> targets:");
    for (i, s) in measure.support().iter().enumerate() {
        let row: Vec<String> = matrix.entries.row(i).iter().map(|c| format!("{c:>4}")).collect();
        println!("  {:>5} -> {}", s[0], row.join(" "));
    }
    Ok(())
}
