use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmaction_cli::batch::{combined_exit_code, run_batch, width_from_env};
use qmaction_cli::{parse_scenario, run, CliError, RunManifest, RunOptions};

#[derive(Parser)]
#[command(name = "qmaction", version, about = "Run qmaction scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario.
    Run {
        scenario: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record every N-th step; overrides `record_stride`.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        stride: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and check a scenario, then print it with defaults filled in.
    Validate { scenario: PathBuf },
    /// Execute every `*.json` scenario in a directory.
    Batch {
        dir: PathBuf,
        /// Root for per-scenario output directories [default: DIR/results].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn report(m: &RunManifest) {
    println!("{} [{}] converged={}", m.scenario_name, m.task, m.converged);
    for (k, v) in &m.summary {
        println!("  {k} = {v:.10e}");
    }
    for (k, ok) in m.checks.iter().filter(|(_, ok)| !**ok) {
        println!("  check {k} FAILED ({ok})");
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { scenario, out, stride, quiet } => {
            let s = parse_scenario(&scenario)?;
            let opts = RunOptions {
                out,
                stride: stride.map(|k| k as usize),
                quiet,
                base_dir: scenario.parent().map(PathBuf::from).unwrap_or_default(),
            };
            let m = run(&s, &opts)?;
            if !quiet {
                report(&m);
            }
            Ok(m.exit_code())
        }
        Command::Validate { scenario } => {
            let s = parse_scenario(&scenario)?;
            println!("{}", s.to_json());
            Ok(0)
        }
        Command::Batch { dir, out, quiet } => {
            let width = width_from_env()?;
            let root = out.unwrap_or_else(|| dir.join("results"));
            let items = run_batch(&dir, &root, quiet, width)?;
            for item in &items {
                match &item.result {
                    Ok(m) if !quiet => report(m),
                    Ok(_) => {}
                    Err(e) => eprintln!("{}: {e}", item.file.display()),
                }
            }
            Ok(combined_exit_code(&items))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let quiet = matches!(cli.command, Command::Run { quiet: true, .. } | Command::Batch { quiet: true, .. });
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "warn" }))
        .init();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
