use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deskalg_cli::scenario::run_text;
use deskalg_cli::selftest::{run_selftest, SuiteStatus};
use deskalg_cli::{render, resolve_budget, RunError, Status};

#[derive(Parser)]
#[command(name = "deskalg", version, about = "Run exact homological-algebra scenarios and self-tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its report.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run the built-in property suites.
    Selftest {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn exit(status: Status) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit(Status::InputError) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { file, out, seed, budget } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("input error: cannot read {}: {}", file.display(), e);
                    return exit(Status::InputError);
                }
            };
            match run_text(&text, seed, budget) {
                Ok(outcome) => {
                    if let Err(e) = std::fs::write(&out, render(&outcome.report)) {
                        eprintln!("input error: cannot write {}: {}", out.display(), e);
                        return exit(Status::InputError);
                    }
                    println!("{}: {}", out.display(), outcome.status.label());
                    exit(outcome.status)
                }
                Err(e) => {
                    eprintln!("{}", e);
                    exit(e.status())
                }
            }
        }
        Command::Selftest { filter, budget } => {
            let budget = match resolve_budget(budget, None) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("{}", e);
                    return exit(e.status());
                }
            };
            let results = match run_selftest(filter.as_deref(), budget) {
                Ok(r) => r,
                Err(msg) => {
                    eprintln!("{}", RunError::Input(msg));
                    return exit(Status::InputError);
                }
            };
            let mut failed = false;
            for r in &results {
                let tag = match r.status {
                    SuiteStatus::Pass => "PASS",
                    SuiteStatus::Fail => "FAIL",
                    SuiteStatus::Skipped => "SKIPPED",
                };
                println!("{:<8} {:<22} {} checks", tag, r.suite, r.checks);
                for f in &r.failures {
                    println!("         failed: {}", f);
                }
                if r.status == SuiteStatus::Fail {
                    failed = true;
                    println!("         reproduce: {}", r.reproduce);
                }
            }
            exit(if failed { Status::PropertyFailure } else { Status::Ok })
        }
    }
}
