use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dflux::config::RunConfig;
use dflux::experiments::{example, refinement_study, reproduce, run_at, write_report, write_solution, DiagnosticsMode};
use dflux::verify::{run_suite, SUITES};
use dflux::DfluxError;

/// Environment variable that overrides every output directory.
const OUTPUT_DIR_ENV: &str = "DFLUX_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "dflux", version, about = "Central schemes for conservation laws with discontinuous flux")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a key=value config file.
    Run { config: PathBuf },
    /// Reproduce a canned experiment (1 or 2): LF, NT and the LF reference.
    Reproduce {
        id: u32,
        /// Output directory (default: reproduce-<id>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and print its worst margins.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
    },
    /// Refinement study of the configured scheme.
    Study {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        halvings: usize,
    },
}

fn output_dir(default: PathBuf) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or(default)
}

fn fail(e: &DfluxError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        DfluxError::CflViolation { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn cmd_run(path: &Path) -> Result<(), DfluxError> {
    let cfg = RunConfig::from_file(path)?;
    let spec = cfg.to_spec(1);
    let mode = if cfg.diagnostics {
        DiagnosticsMode::Full
    } else {
        DiagnosticsMode::Light
    };
    let out = run_at(&spec, cfg.scheme, cfg.dx, mode)?;
    let dir = output_dir(cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;
    for snap in &out.snapshots {
        let p = write_solution(&dir, "", snap)?;
        println!("t = {} (snapped {}, {} steps) -> {}", snap.requested_time, snap.state.time, snap.state.step_index, p.display());
    }
    if let Some(report) = &out.diagnostics {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        write_report(&dir.join("diagnostics.json"), report)?;
    }
    Ok(())
}

fn cmd_reproduce(id: u32, out: Option<PathBuf>) -> Result<(), DfluxError> {
    let spec = example(id)?;
    let dir = output_dir(out.unwrap_or_else(|| PathBuf::from(format!("reproduce-{id}"))));
    let r = reproduce(&spec, &dir)?;
    for row in &r.table.rows {
        println!("{:>3} dx = {:.6}  t = {:.6} (coarse {:.6})  L1 = {:.6e}", row.scheme.label(), row.dx, row.time, row.coarse_time, row.l1_error);
    }
    println!("{} files written to {}", r.files.len(), dir.display());
    Ok(())
}

fn cmd_study(path: &Path, halvings: usize) -> Result<(), DfluxError> {
    let cfg = RunConfig::from_file(path)?;
    let spec = cfg.to_spec(halvings);
    let table = refinement_study(&spec, cfg.scheme, halvings)?;
    let dir = output_dir(cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;
    let p = dir.join("errors.csv");
    let mut w = BufWriter::new(fs::File::create(&p)?);
    table.write_csv(&mut w)?;
    w.flush()?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Reproduce { id, out } => cmd_reproduce(id, out),
        Command::Study { config, halvings } => cmd_study(&config, halvings),
        Command::Verify { suite } => {
            return match run_suite(&suite) {
                Ok(report) => {
                    for s in &report.scenarios {
                        println!("{} {:<28} worst margin {:.6e}", if s.passed { "ok  " } else { "FAIL" }, s.id, s.worst_margin);
                    }
                    match report.failures().next() {
                        None => ExitCode::SUCCESS,
                        Some(f) => {
                            eprintln!("suite {suite} failed at scenario {}", f.id);
                            ExitCode::from(3)
                        }
                    }
                }
                Err(e) => fail(&e),
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
