use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isqlab::harness::{self, ExperimentConfig, ExperimentKind, Format, VerificationReport};

/// Numerical experiments for intrinsic square functions on generalized
/// Orlicz-Morrey spaces.
#[derive(Debug, Parser)]
#[command(name = "isqlab", version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for reports; defaults to the configuration's `output`, then `reports`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "ISQLAB_WORKERS")]
    workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Young function, inverse and complementary function tables.
    Young,
    /// Orlicz, Morrey and BMO norms of the corpus.
    Norm,
    /// Square functions and commutators at the probe centers.
    Sqfn,
    /// Runs one verification experiment.
    Verify {
        #[arg(value_parser = parse_kind)]
        kind: ExperimentKind,
    },
    /// Zygmund-type condition constants.
    Zygmund,
    /// Supremal Hardy operator constant.
    Hardy,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn run(cli: &Cli) -> isqlab::Result<(VerificationReport, PathBuf)> {
    let path = cli.config.as_ref().ok_or_else(|| isqlab::Error::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let report = harness::with_workers(cli.workers, || match &cli.command {
        Command::Young => harness::run_young(&cfg),
        Command::Norm => harness::run_norm(&cfg),
        Command::Sqfn => harness::run_sqfn(&cfg),
        Command::Verify { kind } => harness::run_experiment(*kind, &cfg),
        Command::Zygmund => harness::run_zygmund(&cfg),
        Command::Hardy => harness::run_hardy(&cfg),
    })??;
    let dir = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let written = harness::emit(&report, format, &dir)?;
    Ok((report, written))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((report, path)) => {
            for c in &report.checks {
                let mark = if c.pass {
                    "ok"
                } else if c.gating {
                    "FAIL"
                } else {
                    "finding"
                };
                match c.delta {
                    Some(d) => println!("{:<8} {} = {:e} (change {:.2}%)", mark, c.name, c.value, 100.0 * d),
                    None => println!("{:<8} {} = {:e}", mark, c.name, c.value),
                }
            }
            for n in &report.notes {
                println!("note     {n}");
            }
            println!("{} -> {}", report.status.as_str(), path.display());
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
