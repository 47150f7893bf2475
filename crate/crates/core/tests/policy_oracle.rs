use correctional_ot::estimators::{Estimator, MeanEstimator, ParameterVector, VarianceEstimator};
use correctional_ot::measure::{sequence_cost, CostFunctionSpec, SampleSequence, StateSpace};
use correctional_ot::policies::{oracle_search, teach, InterventionResult, Policy, SolverInputs, TeacherConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(
    xs: &[f64],
    est: &dyn Estimator,
    theta0: f64,
    budget: f64,
    policy: Policy,
    m: usize,
    seed: u64,
) -> (InterventionResult, InterventionResult) {
    let seq = SampleSequence::from_scalars(xs).unwrap();
    let theta0 = ParameterVector::scalar(theta0).unwrap();
    let cost = CostFunctionSpec::Indicator;
    let solver = SolverInputs::for_sequence(&seq);
    let cfg = TeacherConfig {
        budget,
        num_proposals: m,
        policy,
        seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = teach(&seq, est, &theta0, &cost, &cfg, &solver, &mut rng).unwrap();
    let oracle = oracle_search(&seq, &solver.targets, budget, &cost, est, &theta0).unwrap();
    (res, oracle)
}

fn assert_sandwich(res: &InterventionResult, oracle: &InterventionResult, budget: f64) {
    assert!(oracle.error_after <= res.error_after, "{} < {}", res.error_after, oracle.error_after);
    assert!(res.error_after <= res.error_before);
    assert!(res.cost_used <= budget);
}

#[test]
fn batch_lies_between_oracle_and_original() {
    let (res, oracle) = run(&[0.0, 1.0, 1.0, 1.0], &VarianceEstimator, 0.1, 1.0, Policy::Batch, 2000, 42);
    assert_sandwich(&res, &oracle, 1.0);
    // one change to (0, 0, 1, 1) or (1, 1, 1, 1) is the best available
    assert_eq!(res.error_after, oracle.error_after);
}

#[test]
fn receding_horizon_lies_between_oracle_and_original() {
    for theta0 in [0.0, 0.1, 0.22, 0.3] {
        let (res, oracle) = run(&[0.0, 1.0, 0.0, 0.0], &VarianceEstimator, theta0, 1.0, Policy::RecedingHorizon, 1, 0);
        assert_sandwich(&res, &oracle, 1.0);
    }
}

#[test]
fn greedy_is_deterministic() {
    let a = run(&[0.0, 1.0, 2.0, 2.0, 0.5], &MeanEstimator, 0.2, 2.0, Policy::Greedy, 1, 1).0;
    let b = run(&[0.0, 1.0, 2.0, 2.0, 0.5], &MeanEstimator, 0.2, 2.0, Policy::Greedy, 1, 99).0;
    assert!(a.corrected.bit_eq(&b.corrected));
    assert!(a.error_after < a.error_before);
}

#[test]
fn corrected_cost_is_recomputable() {
    let xs = [0.0, 3.0, 1.0, 1.0, 2.0];
    let (res, _) = run(&xs, &MeanEstimator, 0.5, 2.0, Policy::Batch, 500, 3);
    let seq = SampleSequence::from_scalars(&xs).unwrap();
    assert_eq!(sequence_cost(&seq, &res.corrected, &CostFunctionSpec::Indicator).unwrap(), res.cost_used);
    assert_eq!(seq.hamming_distance(&res.corrected).unwrap(), res.num_changes);
    let targets = StateSpace::from_sequence(&seq);
    assert!(res.corrected.iter().all(|x| targets.contains(x)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_policy_is_sandwiched(
        xs in prop::collection::vec(0u8..3, 2..6),
        theta0 in 0.0f64..2.0,
        budget in 0u8..3,
        use_mean in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let xs: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
        let est: &dyn Estimator = if use_mean { &MeanEstimator } else { &VarianceEstimator };
        for policy in [Policy::Batch, Policy::Greedy, Policy::RecedingHorizon] {
            let (res, oracle) = run(&xs, est, theta0, budget as f64, policy, 200, seed);
            prop_assert!(oracle.error_after <= res.error_after);
            prop_assert!(res.error_after <= res.error_before);
            prop_assert!(res.cost_used <= budget as f64);
            prop_assert!(res.num_changes <= budget as usize);
        }
    }
}
