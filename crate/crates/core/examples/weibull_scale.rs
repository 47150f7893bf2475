//! Weibull scale estimation with known shape and a ceil-proportional cost.
//! Every change costs at least 10, so small budgets cannot buy anything.
//!
//! `cargo run --release --example weibull_scale -- [mc_runs]`

use correctional_ot::harness::format_summary;
use correctional_ot::{run_monte_carlo, summarize, ExperimentConfig};

fn main() -> correctional_ot::Result<()> {
    let mut cfg = ExperimentConfig::from_json(include_str!("../configs/weibull_scale.json"))?;
    cfg.mc_runs = std::env::args().nth(1).map_or(20, |v| v.parse().expect("mc_runs must be an integer"));
    let records = run_monte_carlo(&cfg)?;
    print!("{}", format_summary(&summarize(&records)));

    let changed: usize = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .filter(|o| o.num_changes > 0)
        .count();
    println!("{changed} of {} runs changed at least one sample", records.len());
    Ok(())
}
