//! Plug a user-defined estimator into the teacher. Here the student
//! estimates the second raw moment `E[x^2]`.

use correctional_ot::measure::EmpiricalMeasure;
use correctional_ot::{
    teach, CostFunctionSpec, Estimator, ParameterVector, Policy, SampleSequence, SolverInputs, TeacherConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct SecondMoment;

impl Estimator for SecondMoment {
    fn name(&self) -> String {
        "second_moment".into()
    }

    fn evaluate(&self, measure: &EmpiricalMeasure) -> correctional_ot::Result<ParameterVector> {
        let mut atoms: Vec<(f64, f64)> = measure.iter().map(|(s, w)| (s[0], w)).collect();
        // fixed summation order keeps the result permutation invariant
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        ParameterVector::scalar(atoms.iter().map(|(s, w)| w * s * s).sum())
    }

    fn is_linear(&self) -> bool {
        true
    }
}

fn main() -> correctional_ot::Result<()> {
    let seq = SampleSequence::from_scalars(&[0.5, -1.5, 2.0, 0.0, 1.0, -0.5, 2.5, 1.0])?;
    let theta0 = ParameterVector::scalar(1.0)?;
    let cfg = TeacherConfig {
        budget: 2.0,
        num_proposals: 2000,
        policy: Policy::Batch,
        seed: 5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let res = teach(
        &seq,
        &SecondMoment,
        &theta0,
        &CostFunctionSpec::Indicator,
        &cfg,
        &SolverInputs::for_sequence(&seq),
        &mut rng,
    )?;
    let show = |s: &SampleSequence| s.iter().map(|x| format!("{:>4}", x[0])).collect::<Vec<_>>().join(" ");
    println!("original  {}", show(&seq));
    println!("corrected {}", show(&res.corrected));
    println!(
        "E[x^2]: {:.4} -> {:.4} (target {}), {} changes",
        res.theta_hat.values()[0],
        res.theta_tilde.values()[0],
        theta0.values()[0],
        res.num_changes
    );
    Ok(())
}
