use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use spikereg::bench::{emit_report, run_grid, trace_demo, Drive, ExperimentConfig, ReportFormat};
use spikereg::models::ModelKind;
use spikereg::solvers::SolverKind;

#[derive(Parser)]
#[command(name = "spikereg", version, about = "Spiking-neuron regression benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the model x solver x function x noise grid.
    Run {
        /// Comma-separated subset of lif,fhn,izh,hh.
        #[arg(long)]
        models: Option<String>,
        /// Comma-separated subset of euler,rk4.
        #[arg(long)]
        solvers: Option<String>,
        /// Comma-separated subset of square,discontinuity,sine (or sine:<k>).
        #[arg(long)]
        functions: Option<String>,
        /// Comma-separated subset of off,on.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Flat `key = value` manifest; flags given here take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// table, json or csv.
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Simulate one neuron and write a t/v/input/output table.
    Trace {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "euler")]
        solver: String,
        /// constant:<amp> | burst:<start>:<len>[:<period>] | encode:<x>
        #[arg(long, default_value = "burst:10:20:50")]
        drive: String,
        #[arg(long, default_value_t = 150)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run {
            models,
            solvers,
            functions,
            noise,
            nx,
            nt,
            dt,
            seed,
            config,
            out,
            format,
        } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = models {
                cfg.set_models(&v)?;
            }
            if let Some(v) = solvers {
                cfg.set_solvers(&v)?;
            }
            if let Some(v) = functions {
                cfg.set_functions(&v)?;
            }
            if let Some(v) = noise {
                cfg.set_noise(&v)?;
            }
            if let Some(v) = nx {
                cfg.n_x = v;
            }
            if let Some(v) = nt {
                cfg.n_t = v;
            }
            if let Some(v) = dt {
                cfg.dt = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            let format: ReportFormat = format.parse()?;
            let report = run_grid(&cfg).context("invalid experiment configuration")?;
            emit_report(&report, format, out.as_deref())?;
            for c in report.cells.iter().filter(|c| !c.is_ok()) {
                eprintln!("cell {} failed: {}", c.cell().key(), c.error.as_deref().unwrap_or(""));
            }
            Ok(report.failures() == 0)
        }
        Command::Trace {
            model,
            solver,
            drive,
            steps,
            out,
        } => {
            let kind: ModelKind = model.parse()?;
            let solver: SolverKind = solver.parse()?;
            let drive: Drive = drive.parse()?;
            let tr = trace_demo(kind, solver, drive, steps, &out)?;
            let n = tr.spikes.iter().filter(|&&s| s).count();
            eprintln!(
                "{kind}/{solver}: {n} output spikes over {steps} steps -> {}",
                out.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
