use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paradiff_lab::config::{ExperimentConfig, Scenario};
use paradiff_lab::output::write_outputs;
use paradiff_lab::{run, RunResult};

#[derive(Parser)]
#[command(name = "paradiff-lab", version, about = "Type 1,1 operator experiments on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write results.json, tables/*.csv and manifest.json.
    Run {
        scenario: Scenario,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Points per axis; replaces the configured grid and refinements.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        max_matrix_dim: Option<usize>,
    },
}

fn execute(cli: Cli) -> RunResult<bool> {
    let Command::Run { scenario, config, seed, out, grid, max_matrix_dim } = cli.command;
    let mut cfg = ExperimentConfig::from_path(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(n) = grid {
        cfg.grid.size = n;
        cfg.refinements.clear();
    }
    if max_matrix_dim.is_some() {
        cfg.max_matrix_dim = max_matrix_dim;
    }
    let record = run(&cfg, scenario)?;
    write_outputs(&out, &record, Some(&config))?;
    for m in record.metrics() {
        let verdict = match m.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        println!("{verdict:>4}  {:<40} {:<50} {:.6e}", m.anchor, m.name, m.value);
    }
    println!(
        "{}: {} ({:.2}s), outputs in {}",
        record.scenario,
        if record.passed() { "all checks passed" } else { "some checks failed" },
        record.wall_time_s,
        out.display()
    );
    Ok(record.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
