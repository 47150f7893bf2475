//! Command-line front end. Exit codes: 0 success, 2 usage or configuration
//! error, 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::estimators::{EstimatorSpec, ParameterVector, DEFAULT_GRADIENT_STEP};
use crate::harness::{
    format_summary, read_results_file, run_monte_carlo, summarize, write_results_file, ExperimentConfig,
};
use crate::measure::{CostFunctionSpec, SampleSequence, StateSpace};
use crate::policies::oracle_search;
use crate::report::render_svg;
use crate::solver::{assemble_problem, conditional_pmf, solve_alpha, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "correctional-ot", version, about = "Budget-constrained teacher corrections via optimal transport")]
pub struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and write results.csv and summary.txt.
    Simulate(SimulateArgs),
    /// Solve the transport problem for one sequence and print the plan and pmf.
    Solve(ProblemArgs),
    /// Exhaustively search the best correction of a small sequence.
    Oracle(ProblemArgs),
    /// Summarize a results CSV as a text table and an SVG chart.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Override a config key, e.g. --set M=500 or --set budgets=[0,1].
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Observations, one per line, components separated by whitespace.
    #[arg(long)]
    pub samples: PathBuf,
    /// variance, mean, weibull_scale or irl_update.
    #[arg(long)]
    pub estimator: String,
    /// True parameter; vector components separated by ',' or ';'.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: String,
    #[arg(long)]
    pub budget: f64,
    /// indicator or ceil_proportional:<scale>.
    #[arg(long, default_value = "indicator")]
    pub cost: String,
    /// Target states, in the samples format. Defaults to the unique samples.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long)]
    pub shape_k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_hat: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRADIENT_STEP)]
    pub epsilon: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, cli.verbose, stdout, stderr),
        Command::Solve(a) => solve(a, stdout),
        Command::Oracle(a) => oracle(a, stdout),
        Command::Report(a) => report(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn create_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

fn simulate(args: &SimulateArgs, verbose: u8, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = ExperimentConfig::load(&args.config, &args.overrides)
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    if verbose > 0 {
        let _ = writeln!(
            stderr,
            "running {:?}: {} sample sizes x {} budgets x {} runs",
            cfg.experiment,
            cfg.sample_sizes.len().max(1),
            cfg.budgets.len(),
            cfg.mc_runs
        );
    }
    let records = run_monte_carlo(&cfg).map_err(|e| match e {
        Error::Config(_) => usage(e),
        other => runtime(other),
    })?;
    create_dir(&args.out)?;
    let csv_path = args.out.join("results.csv");
    write_results_file(&records, &csv_path).map_err(runtime)?;
    let summary = format_summary(&summarize(&records));
    std::fs::write(args.out.join("summary.txt"), &summary).map_err(runtime)?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        let _ = writeln!(stderr, "warning: {failed} of {} runs failed; see the status column", records.len());
    }
    let _ = write!(stdout, "{summary}");
    if verbose > 0 {
        let _ = writeln!(stderr, "wrote {}", csv_path.display());
    }
    Ok(())
}

struct Loaded {
    seq: SampleSequence,
    targets: StateSpace,
    estimator: Box<dyn crate::estimators::Estimator>,
    theta0: ParameterVector,
    cost: CostFunctionSpec,
}

fn parse_theta0(raw: &str) -> crate::error::Result<ParameterVector> {
    let values = raw
        .split([',', ';'])
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidInput(format!("cannot parse theta0 from {raw:?}")))?;
    ParameterVector::new(values)
}

fn load_problem(args: &ProblemArgs) -> std::result::Result<Loaded, Failure> {
    let seq = SampleSequence::read_from_path(&args.samples)
        .map_err(|e| usage(format!("{}: {e}", args.samples.display())))?;
    let targets = match &args.targets {
        Some(path) => StateSpace::from_sequence(
            &SampleSequence::read_from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        ),
        None => StateSpace::from_sequence(&seq),
    };
    let spec = EstimatorSpec::from_id(&args.estimator, args.shape_k, args.beta, args.theta_hat).map_err(usage)?;
    let estimator = spec.build(&seq).map_err(usage)?;
    let theta0 = parse_theta0(&args.theta0).map_err(usage)?;
    let cost: CostFunctionSpec = args.cost.parse().map_err(usage)?;
    if !(args.budget.is_finite() && args.budget >= 0.0) {
        return Err(usage(format!("budget must be nonnegative, got {}", args.budget)));
    }
    Ok(Loaded {
        seq,
        targets,
        estimator,
        theta0,
        cost,
    })
}

fn fmt_state(s: &[f64]) -> String {
    s.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(";")
}

fn solve(args: &ProblemArgs, stdout: &mut dyn Write) -> Outcome {
    let p = load_problem(args)?;
    let problem = assemble_problem(
        &p.seq,
        &p.targets,
        p.estimator.as_ref(),
        &p.theta0,
        &p.cost,
        args.budget,
        args.epsilon,
    )
    .map_err(|e| match e {
        Error::InvalidInput(_) => usage(e),
        other => runtime(other),
    })?;
    let mut options = SolverOptions::default();
    if let Some(t) = args.tol {
        options.tol = t;
    }
    if let Some(m) = args.max_iters {
        options.max_iters = m;
    }
    let plan = solve_alpha(&problem, &options).map_err(runtime)?;
    let pmf = conditional_pmf(&plan, &problem.r, problem.source()).map_err(runtime)?;

    let mut out = String::from("matrix,i,j,value\n");
    for (name, table) in [("alpha", &plan.alpha), ("pmf", &pmf.probs)] {
        for ((i, j), v) in table.indexed_iter() {
            out.push_str(&format!("{name},{i},{j},{v:.16e}\n"));
        }
    }
    out.push_str(&format!(
        "# summary objective={:.16e} marginal_residual={:.3e} budget_slack={:.3e} iterations={} converged={} pmf_normalization_residual={:.3e} theta_hat={} model_estimate={}\n",
        plan.objective_value,
        plan.marginal_residual,
        plan.budget_slack,
        plan.iterations,
        plan.converged,
        pmf.normalization_residual,
        fmt_state(problem.base_estimate.values()),
        fmt_state(&problem.model_estimate(&plan.alpha)),
    ));
    stdout.write_all(out.as_bytes()).map_err(runtime)
}

fn oracle(args: &ProblemArgs, stdout: &mut dyn Write) -> Outcome {
    let p = load_problem(args)?;
    let res = oracle_search(&p.seq, &p.targets, args.budget, &p.cost, p.estimator.as_ref(), &p.theta0)
        .map_err(runtime)?;
    let mut out = String::from("index,original,corrected\n");
    for (i, (a, b)) in p.seq.iter().zip(res.corrected.iter()).enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_state(a), fmt_state(b)));
    }
    out.push_str(&format!(
        "# summary err_before={:.16e} err_after={:.16e} theta_hat={} theta_tilde={} cost_used={:.16e} num_changes={} feasible_assignments={}\n",
        res.error_before,
        res.error_after,
        fmt_state(res.theta_hat.values()),
        fmt_state(res.theta_tilde.values()),
        res.cost_used,
        res.num_changes,
        res.proposals_feasible,
    ));
    stdout.write_all(out.as_bytes()).map_err(runtime)
}

fn report(args: &ReportArgs, stdout: &mut dyn Write) -> Outcome {
    let records =
        read_results_file(&args.results).map_err(|e| usage(format!("{}: {e}", args.results.display())))?;
    if records.is_empty() {
        return Err(usage(format!("{}: no result rows", args.results.display())));
    }
    let rows = summarize(&records);
    let summary = format_summary(&rows);
    let mut estimators: Vec<&str> = records.iter().map(|r| r.estimator.as_str()).collect();
    estimators.sort_unstable();
    estimators.dedup();
    let svg = render_svg(&rows, &format!("mean |e| for {}", estimators.join(", ")));
    create_dir(&args.out)?;
    std::fs::write(args.out.join("summary.txt"), &summary).map_err(runtime)?;
    std::fs::write(args.out.join("error_by_n.svg"), svg).map_err(runtime)?;
    stdout.write_all(summary.as_bytes()).map_err(runtime)
}
