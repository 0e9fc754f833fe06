use std::process::ExitCode;

use clap::Parser;
use nsmo_cli::args::{Cli, Command};
use nsmo_cli::run_experiment;
use nsmo_core::analytic::AnalyticProblem;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Problems => {
            for name in AnalyticProblem::NAMES {
                println!("analytic:{name}");
            }
            println!("obstacle:constant");
            println!("obstacle:constant=<value>");
            println!("obstacle:piecewise");
            ExitCode::SUCCESS
        }
        Command::Run(args) => match args.into_config().and_then(|cfg| run_experiment(&cfg)) {
            Ok(exp) => {
                for r in &exp.summary.runs {
                    let values: Vec<String> = r.values.iter().map(|v| format!("{v:.6}")).collect();
                    println!(
                        "{} {:<10} h={:<6} {:<17} iters={:<6} J=[{}]{}",
                        r.run_id,
                        r.start_label,
                        r.h_max.map(|h| h.to_string()).unwrap_or_else(|| "-".into()),
                        r.status,
                        r.iters,
                        values.join(", "),
                        r.error
                            .as_deref()
                            .map(|e| format!("  error: {e}"))
                            .unwrap_or_default(),
                    );
                }
                if exp.all_completed() {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("{} of {} runs failed", exp.summary.failed, exp.summary.runs.len());
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
