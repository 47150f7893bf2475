//! Monte Carlo sweep for the Gaussian variance experiment.
//!
//! `cargo run --release --example gaussian_variance -- [mc_runs]`

use correctional_ot::harness::format_summary;
use correctional_ot::{run_monte_carlo, summarize, ExperimentConfig};

fn main() -> correctional_ot::Result<()> {
    let mut cfg = ExperimentConfig::from_json(include_str!("../configs/gaussian_variance.json"))?;
    if let Some(runs) = std::env::args().nth(1) {
        cfg.mc_runs = runs.parse().expect("mc_runs must be an integer");
    }
    let records = run_monte_carlo(&cfg)?;
    print!("{}", format_summary(&summarize(&records)));

    let worse = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .filter(|o| o.err_after > o.err_before)
        .count();
    println!("{} runs, {worse} made worse by the teacher", records.len());
    Ok(())
}
