use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xxz_lab::{plots, run, LabError, RunOptions};

#[derive(Parser)]
#[command(name = "xxz-lab", version, about = "Run XXZ chain bound checks and emit plot data")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "XXZ_JOBS")]
    jobs: Option<usize>,
    /// Decomposition cache directory (default: <out>/cache).
    #[arg(long, global = true, env = "XXZ_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Output directory (default: `out` for run, the manifest's directory for emit-plots).
    #[arg(long, global = true, env = "XXZ_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every job of a configuration.
    Run { config: PathBuf },
    /// Write plot data for a finished run.
    EmitPlots { manifest: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

fn fail(e: LabError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match xxz_lab::load_config(&config) {
            Ok((_, cfg)) => {
                let kinds: Vec<_> = cfg.kinds().iter().map(|k| k.as_str()).collect();
                println!("{}: ok ({})", config.display(), kinds.join(", "));
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Run { config } => {
            let jobs = cli
                .jobs
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let opts = RunOptions {
                jobs,
                cache_dir: cli.cache_dir,
                out: cli.out.unwrap_or_else(|| PathBuf::from("out")),
            };
            match run(&config, &opts) {
                Ok(m) => {
                    for j in &m.jobs {
                        let status = format!("{:?}", j.status).to_lowercase();
                        println!("{:<28} {status:<7} {}", j.id, j.detail);
                    }
                    println!("outputs in {}", opts.out.display());
                    if m.all_passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::EmitPlots { manifest } => {
            match plots::emit_plots(&manifest, cli.out.as_deref()) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
