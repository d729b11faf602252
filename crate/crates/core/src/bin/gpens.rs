use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gpens::experiment::{self, output, ExperimentConfig};
use gpens::{Error, PruneStrategy, Result};

#[derive(Parser)]
#[command(name = "gpens", version, about = "Pruned STGP/GSGP ensembles for symbolic regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
}

#[derive(Subcommand)]
enum Command {
    /// Run the comparison protocol and write generations/summary/removals CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Restrict to these methods (repeatable).
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// All-pairs one-tailed Mann-Whitney p-values from summary files.
    Stats {
        #[arg(long = "summary", required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean ensemble size per method from a generations file.
    Size {
        #[arg(long)]
        records: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, dataset, methods, seed, out, preset, runs, generations, threads } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(Preset::Desk) = preset {
                cfg.apply_desk_preset();
            }
            if let Some(d) = dataset {
                cfg.dataset = d;
            }
            if !methods.is_empty() {
                cfg.methods = methods.iter().map(|m| m.parse()).collect::<Result<Vec<PruneStrategy>>>()?;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(g) = generations {
                cfg.generations = g;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let result = experiment::run_experiment(&cfg)?;
            println!("wrote {}", result.generations_path.display());
            println!("wrote {}", result.summary_path.display());
            println!("wrote {}", result.removals_path.display());
        }
        Command::Stats { summaries, out } => {
            let matrix = experiment::stats_command(&summaries, &out)?;
            print!("{}", matrix.display_table());
            println!("wrote {}", out.display());
        }
        Command::Size { records } => {
            let rows = output::read_generations(&records)?;
            if rows.is_empty() {
                return Err(Error::Format { path: records, line: 2, message: "no records".into() });
            }
            println!("method,mean_alive");
            for (method, mean) in experiment::summarize_size(&rows) {
                println!("{method},{mean}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
