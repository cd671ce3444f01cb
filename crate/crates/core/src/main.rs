use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use penreg::cli::{cmd_fit, cmd_report, cmd_simulate, FitConfig};
use penreg::config::SimConfig;
use penreg::generators::PenaltyMode;
use penreg::Selector;

#[derive(Parser)]
#[command(name = "penreg", version, about = "Penalized regression with tuning-parameter selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Fit penalized paths to a CSV data set and report the selected models.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        /// Comma separated: l1, scad, scad37.
        #[arg(long, value_delimiter = ',', default_value = "l1,scad,scad37")]
        penalty: Vec<PenaltyMode>,
        #[arg(long, value_delimiter = ',', default_value = "cv10,aic,aicc,bic,cp,gcv,gamma")]
        selectors: Vec<Selector>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute summaries from an existing records.csv.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> penreg::Result<()> {
    match cli.command {
        Command::Simulate { config, seed, workers, reps, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| penreg::Error::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = SimConfig::parse(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            let dir = cmd_simulate(&cfg)?;
            eprintln!("wrote {}", dir.display());
        }
        Command::Fit { data, target, penalty, selectors, seed, out } => {
            let mut cfg = FitConfig::new(data, target, out);
            cfg.penalties = penalty;
            cfg.selectors = selectors;
            cfg.seed = seed;
            let picks = cmd_fit(&cfg)?;
            for p in picks {
                println!("{} {} lambda={} df={}", p.penalty, p.label, penreg::cli::fmt_g(p.lambda), p.df);
            }
        }
        Command::Report { records, out } => cmd_report(&records, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
