use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tdrl_harness::config;
use tdrl_harness::run::{read_records, records_to_csv, summary_to_csv, write_output};
use tdrl_harness::{emit_plotdata, parse_grid, run_experiment, sweep, ExperimentConfig, HarnessError, Result};

/// Seeded reinforcement-learning experiments.
#[derive(Parser)]
#[command(name = "tdrl", version)]
struct Cli {
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file. Without it, CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write per-episode records plus a summary.
    Run { config: PathBuf },
    /// Run the Cartesian product of `--grid` values and write a summary table.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`; repeatable. Bare keys refer to `[algorithm]`.
        #[arg(long, required = true)]
        grid: Vec<String>,
    },
    /// Convert a records CSV to long format for one metric.
    Plotdata {
        records: PathBuf,
        #[arg(long)]
        metric: String,
    },
}

fn load_table(path: &Path, seed: Option<u64>) -> Result<toml::Table> {
    let mut table = config::load_table(path)?;
    if let Some(seed) = seed {
        let seed = i64::try_from(seed).map_err(|_| HarnessError::InvalidRange {
            name: "seed".into(),
            value: seed.to_string(),
            expected: "a seed below 2^63".into(),
        })?;
        if let Some(run) = table
            .entry("run")
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
        {
            run.insert("seed".into(), seed.into());
        }
    }
    Ok(table)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| HarnessError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| HarnessError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_table(load_table(&config, cli.seed)?)?;
            let output = run_experiment(&cfg)?;
            for (i, t) in output.wall_time.iter().enumerate() {
                eprintln!("replicate {i}: {:.3} s", t.as_secs_f64());
            }
            match cli.out.or(cfg.run.out) {
                Some(path) => write_output(&path, &output),
                None => {
                    emit(None, &records_to_csv(&output.records)?)?;
                    std::io::stderr()
                        .write_all(&summary_to_csv(&output.summary)?)
                        .map_err(|e| HarnessError::Io {
                            path: "<stderr>".into(),
                            source: e,
                        })
                }
            }
        }
        Command::Sweep { config, grid } => {
            let table = load_table(&config, cli.seed)?;
            let axes = grid.iter().map(|g| parse_grid(g)).collect::<Result<Vec<_>>>()?;
            let result = sweep(&table, &axes)?;
            emit(cli.out.as_deref(), &result.to_csv()?)
        }
        Command::Plotdata { records, metric } => {
            let records = read_records(&records)?;
            emit(cli.out.as_deref(), &emit_plotdata(&records, &metric)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
