// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command, RunConfig};
use error::{CliError, CliResult};

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Error,
        1 => LevelFilter::Warn,
        2 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
}

fn run(cfg: RunConfig) -> CliResult<()> {
    if cfg.plot {
        if cfg.out.is_none() {
            return Err(CliError::Usage("--plot needs --out; the SVG is written next to it".into()));
        }
        if !matches!(cfg.command, Command::Scan | Command::Compare | Command::Discriminate) {
            return Err(CliError::Usage(format!("{} has no plot", cfg.command.name())));
        }
    }
    let artifacts = commands::run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            commands::write_output(BufWriter::new(file), &artifacts.output, cfg.format)?;
            if cfg.plot {
                let svg_path = path.with_extension("svg");
                let chart = artifacts.chart.as_ref().expect("plotting commands build a chart");
                std::fs::write(&svg_path, svg::render(chart))
                    .map_err(|e| CliError::Io(format!("{}: {e}", svg_path.display())))?;
            }
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            commands::write_output(&mut lock, &artifacts.output, cfg.format)?;
            lock.flush()?;
        }
    }
    match artifacts.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn main() {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let result = RunConfig::resolve(cli).and_then(run);
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
