use clap::{Args, Parser, Subcommand};
use riemann_ssn::experiment::{
    artifact_path, list_fields, run_batch, run_experiment, Analysis, ExperimentConfig,
    ExperimentError,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Riemannian semismooth Newton experiments.
#[derive(Parser)]
#[command(name = "rssn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver; prints the trace CSV unless --out is given.
    Solve(ExpArgs),
    /// Run the solver and analyses (all by default); prints the report unless --out is given.
    Analyze(ExpArgs),
    /// List the battery fields.
    ListFields,
    /// Run every *.conf file of a directory concurrently.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        args: ExpArgs,
    },
}

#[derive(Args, Default)]
struct ExpArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    field: Option<String>,
    /// sphere:<n> or euclidean:<n>
    #[arg(long)]
    manifold: Option<String>,
    /// Coordinates "x0,x1,..." or "auto:distance=<r>,seed=<s>".
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long)]
    tol_field: Option<String>,
    #[arg(long)]
    tol_step: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    singular_threshold: Option<String>,
    /// midpoint | lower | upper | random:<seed>
    #[arg(long)]
    selection: Option<String>,
    /// Comma-separated: order, semismooth-scan, kantorovich, kp, lipschitz, regularity; or "all".
    #[arg(long)]
    analyses: Option<String>,
    /// Output prefix for <out>.trace.csv and <out>.report.txt.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl ExpArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        [
            ("field", &self.field),
            ("manifold", &self.manifold),
            ("start", &self.start),
            ("tol_field", &self.tol_field),
            ("tol_step", &self.tol_step),
            ("max_iters", &self.max_iters),
            ("singular_threshold", &self.singular_threshold),
            ("selection", &self.selection),
            ("analyses", &self.analyses),
            ("out", &self.out),
            ("seed", &self.seed),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

fn run_single(args: &ExpArgs, analyze: bool) -> Result<i32, ExperimentError> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref(), &args.overrides())?;
    if analyze && cfg.analyses.is_empty() {
        cfg.analyses = Analysis::ALL.to_vec();
    }
    let outcome = run_experiment(&cfg)?;
    match &cfg.out {
        Some(out) => {
            println!(
                "termination = {}\niterations = {}\ntrace = {}\nreport = {}",
                outcome.trace.termination,
                outcome.trace.steps(),
                artifact_path(out, "trace.csv").display(),
                artifact_path(out, "report.txt").display()
            );
        }
        None if analyze => print!("{}", outcome.report),
        None => print!("{}", outcome.csv),
    }
    Ok(outcome.exit_code())
}

fn run(cli: Cli) -> Result<i32, ExperimentError> {
    match cli.command {
        Command::Solve(args) => run_single(&args, false),
        Command::Analyze(args) => run_single(&args, true),
        Command::ListFields => {
            print!("{}", list_fields());
            Ok(0)
        }
        Command::Batch { dir, args } => {
            let results = run_batch(&dir, &args.overrides())?;
            let mut worst = 0;
            for r in &results {
                let code = r.exit_code();
                match &r.result {
                    Ok(_) => println!("{}\texit {code}", r.config.display()),
                    Err(e) => println!("{}\texit {code}\t{e}", r.config.display()),
                }
                worst = worst.max(code);
            }
            Ok(worst)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
