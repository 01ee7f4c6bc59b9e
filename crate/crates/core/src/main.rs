use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use weldray::runner::{run, RunConfig, Study};

/// Ray-based ultrasonic inspection studies of dissimilar-metal welds.
#[derive(Parser, Debug)]
#[command(name = "weldray", version)]
struct Cli {
    /// trace | orientation-map | bscan | tilt-sweep | validate
    study: Study,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configured one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match RunConfig::load(&cli.config) {
        Ok(c) => RunConfig { study: cli.study, ..c },
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    match run(&config, &base, cli.out.as_deref(), cli.threads) {
        Ok(outcome) => {
            println!("{}: {} files in {}", cli.study_label(), outcome.manifest.files.len(), outcome.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

impl Cli {
    fn study_label(&self) -> String {
        weldray::runner::study_name(self.study)
    }
}
