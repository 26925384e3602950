use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdkde::distributions::preset_names;
use sdkde::runner::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sdkde", version, about = "Score-debiased KDE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Seed range `a..b` (half-open) or `a..=b`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, value_parser = ["per-point", "per-call"])]
        noise_mode: Option<String>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Override any config key, e.g. `--set bandwidth.sdkde_constant=0.9`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in target distributions.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for p in preset_names() {
                println!("{:<14} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seeds, noise_mode, threads, mut overrides } => {
            if let Some(s) = seeds {
                overrides.push(format!("seeds=\"{s}\""));
            }
            if let Some(m) = noise_mode {
                overrides.push(format!("noise_mode=\"{m}\""));
            }
            if let Some(t) = threads {
                overrides.push(format!("threads={t}"));
            }
            let result = ExperimentConfig::load(&config, &overrides).and_then(|cfg| runner::run(&cfg, &out));
            match result {
                Ok(report) => {
                    for s in &report.summaries {
                        println!(
                            "{} n={} {} beats {} on {}/{} seeds ({:.2})",
                            s.target, s.n, s.method, s.baseline, s.wins, s.seeds, s.win_rate
                        );
                    }
                    for f in &report.files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
