//! Reward-weight correction for inverse reinforcement learning: the teacher
//! edits feature counts so the student's weight update moves toward the
//! true weights.

use correctional_ot::{run_monte_carlo, ExperimentConfig};

fn main() -> correctional_ot::Result<()> {
    let cfg = ExperimentConfig::from_json(include_str!("../configs/irl_weights.json"))?;
    println!("{:<22} {:>10} {:>10} {:>10} {:>8}", "feature", "w_true", "|e| before", "|e| after", "changes");
    for r in run_monte_carlo(&cfg)? {
        match &r.outcome {
            Ok(o) => println!(
                "{:<22} {:>10.4} {:>10.4} {:>10.4} {:>8}",
                r.estimator,
                r.theta0.values()[0],
                o.err_before,
                o.err_after,
                o.num_changes
            ),
            Err(e) => println!("{:<22} failed: {e}", r.estimator),
        }
    }
    Ok(())
}
