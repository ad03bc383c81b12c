/*
Copyright 2026 The proxsplit Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! `proxsplit` command-line driver.
//!
//! Exit codes: 0 on success, 1 if any solver (or selftest check) failed,
//! 2 for usage, configuration and I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proxsplit::config::RunSpec;
use proxsplit::runner::{self, eps_tag};
use proxsplit::selftest::{self, SelftestOptions};

#[derive(Debug, Parser)]
#[command(name = "proxsplit", version, about = "Splitting solvers for prior-image TV reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured reconstruction experiment.
    Run {
        /// Flat key = value configuration file.
        config: PathBuf,
        /// Output directory (overrides run.out; default ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed (overrides scene.seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in consistency checks.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_prox: bool,
    },
}

const EXIT_SOLVER: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> ExitCode {
    let mut spec = match RunSpec::load(&config) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(seed) = seed {
        spec.scene.seed = seed;
    }
    let out_dir = out.or_else(|| spec.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let summary = match runner::execute(&spec, &out_dir) {
        Ok(summary) => summary,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for row in &summary.rows {
        match &row.outcome {
            Ok(o) => println!(
                "{:<5} eps={:<6} iters={:<6} snr={:.4} dB  nmsd={:.6}  objective={:.10e}  ({})",
                row.algorithm,
                eps_tag(row.eps),
                o.iterations,
                o.snr_db,
                o.nmsd,
                o.final_objective,
                o.termination.name()
            ),
            Err(e) => println!("{:<5} eps={:<6} FAILED: {e}", row.algorithm, eps_tag(row.eps)),
        }
    }
    println!("wrote {} files to {}", summary.files.len(), out_dir.display());
    if summary.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} solver run(s) failed", summary.failures().count());
        ExitCode::from(EXIT_SOLVER)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, out, seed } => run(config, out, seed),
        Command::Selftest { corrupt_prox } => {
            let report = selftest::run(SelftestOptions { corrupt_prox });
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SOLVER)
            }
        }
    }
}
