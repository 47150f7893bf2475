//! Compare the intervention policies against exhaustive search on a
//! sequence small enough to enumerate.

use correctional_ot::{
    oracle_search, teach, CostFunctionSpec, ParameterVector, Policy, SampleSequence, SolverInputs, TeacherConfig,
    VarianceEstimator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> correctional_ot::Result<()> {
    let seq = SampleSequence::from_scalars(&[0.0, 1.0, 2.0, 2.0, 1.0, 3.0])?;
    let theta0 = ParameterVector::scalar(0.4)?;
    let cost = CostFunctionSpec::Indicator;
    let solver = SolverInputs::for_sequence(&seq);
    let budget = 2.0;

    for policy in [Policy::Batch, Policy::Greedy, Policy::RecedingHorizon] {
        let cfg = TeacherConfig {
            budget,
            num_proposals: 1000,
            policy,
            seed: 11,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let res = teach(&seq, &VarianceEstimator, &theta0, &cost, &cfg, &solver, &mut rng)?;
        println!(
            "{:<16} |e| {:.4} -> {:.4}  changes {}  cost {}",
            policy.to_string(),
            res.error_before, res.error_after, res.num_changes, res.cost_used
        );
    }
    let best = oracle_search(&seq, &solver.targets, budget, &cost, &VarianceEstimator, &theta0)?;
    println!(
        "{:<16} |e| {:.4} -> {:.4}  changes {}  ({} feasible sequences)",
        "oracle", best.error_before, best.error_after, best.num_changes, best.proposals_feasible
    );
    Ok(())
}
