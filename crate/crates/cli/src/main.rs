use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qpac::experiments::{self, ConceptSelection, ExperimentConfig, SummaryRow};
use qpac::Schedule;

#[derive(Parser)]
#[command(
    name = "qpac",
    version,
    about = "Parity-concept learning with amplitude-amplified tunable networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a grid of learning experiments and write one CSV row per run.
    Run(RunArgs),
    /// Aggregate a results CSV per (concept, ε, δ, schedule).
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON summary destination; the table is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical cross-checks (lemma grid, posterior quadrature,
    /// amplification closed form, unitarity).
    Verify {
        /// Print the outcomes as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config with the same keys as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// `all`, `random:K`, or a comma-separated list of bitstrings (x_0 first).
    #[arg(long)]
    concepts: Option<String>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// `linear` and/or `powers-of-two`.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<String>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Use one random distribution per concept across repetitions.
    #[arg(long)]
    fixed_distribution: bool,
    #[arg(long)]
    max_updates: Option<usize>,
    /// Record wall-clock time per run (output is then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                ExperimentConfig::from_json_file(path).with_context(|| format!("reading config {}", path.display()))?
            }
            None => {
                let Some(n) = self.n else {
                    bail!("--n is required without --config")
                };
                let (Some(eps), Some(delta)) = (&self.epsilon, &self.delta) else {
                    bail!("--epsilon and --delta are required without --config")
                };
                let mut c = ExperimentConfig::new(n, ConceptSelection::All, eps[0], delta[0], 0);
                c.epsilons = eps.clone();
                c.deltas = delta.clone();
                c
            }
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(c) = &self.concepts {
            cfg.concepts = c.parse()?;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilons = e;
        }
        if let Some(d) = self.delta {
            cfg.deltas = d;
        }
        if let Some(s) = self.schedule {
            cfg.schedules = s.iter().map(|s| s.parse::<Schedule>()).collect::<qpac::Result<_>>()?;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.max_updates.is_some() {
            cfg.max_updates = self.max_updates;
        }
        cfg.fixed_distribution |= self.fixed_distribution;
        cfg.timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_summary(summary: &[SummaryRow]) {
    println!(
        "{:>3} {:<26} {:>7} {:>7} {:<14} {:>4} {:>9} {:>9} {:>9} {:>7} {:>8} {:>12}",
        "n", "concept", "eps", "delta", "schedule", "runs", "min", "median", "max", "frac<e", "updates", "oracle_calls"
    );
    for s in summary {
        println!(
            "{:>3} {:<26} {:>7} {:>7} {:<14} {:>4} {:>9.5} {:>9.5} {:>9.5} {:>7.3} {:>8.2} {:>12.0}",
            s.n,
            s.concept,
            s.epsilon,
            s.delta,
            s.schedule,
            s.runs,
            s.min_error,
            s.median_error,
            s.max_error,
            s.fraction_below_epsilon,
            s.mean_updates,
            s.mean_oracle_calls
        );
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let cfg = args.into_config()?;
    let outcomes = match &cfg.out {
        Some(path) => experiments::run_grid_to_csv(&cfg, path)
            .with_context(|| format!("writing results to {}", path.display()))?,
        None => experiments::run_grid(&cfg)?,
    };
    let rows: Vec<_> = outcomes.into_iter().map(|o| o.row).collect();
    let summary = experiments::summarize(&rows)?;
    if let Some(path) = &cfg.out {
        let json = experiments::summary_path_for(path);
        experiments::write_summary_json(&summary, &json)?;
        eprintln!(
            "wrote {} rows to {} and summary to {}",
            rows.len(),
            path.display(),
            json.display()
        );
    }
    print_summary(&summary);
    Ok(ExitCode::SUCCESS)
}

fn summarize(input: PathBuf, out: Option<PathBuf>) -> Result<ExitCode> {
    let rows = experiments::read_rows(&input).with_context(|| format!("reading {}", input.display()))?;
    let summary = experiments::summarize(&rows)?;
    if let Some(path) = out {
        experiments::write_summary_json(&summary, &path)?;
    }
    print_summary(&summary);
    Ok(ExitCode::SUCCESS)
}

fn verify(json: bool) -> Result<ExitCode> {
    let outcomes = qpac::verify::run_all()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&outcomes)?);
    } else {
        for o in &outcomes {
            println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        }
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { input, out } => summarize(input, out),
        Command::Verify { json } => verify(json),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
