//! Run a short sweep, write the results CSV, read it back and render the
//! error-versus-N chart.
//!
//! `cargo run --release --example report_chart -- [out_dir]`

use std::path::PathBuf;

use correctional_ot::harness::{format_summary, read_results_file, write_results_file};
use correctional_ot::report::render_svg;
use correctional_ot::{run_monte_carlo, summarize, ExperimentConfig};

fn main() -> correctional_ot::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "report".into()));
    std::fs::create_dir_all(&out)?;

    let mut cfg = ExperimentConfig::from_json(include_str!("../configs/gaussian_variance.json"))?;
    cfg.mc_runs = 10;
    cfg.num_proposals = 200;
    let csv = out.join("results.csv");
    write_results_file(&run_monte_carlo(&cfg)?, &csv)?;

    let rows = summarize(&read_results_file(&csv)?);
    print!("{}", format_summary(&rows));
    let svg = out.join("error_by_n.svg");
    std::fs::write(&svg, render_svg(&rows, "Gaussian variance"))?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
