use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fourier_grover::config::{ConfigFile, Mode};
use fourier_grover::experiment;
use fourier_grover::Error;

#[derive(Parser)]
#[command(
    name = "fgsearch",
    version,
    about = "Fourier-optics Grover search cavity simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured mode once (search unless the config says otherwise).
    Run(Options),
    /// Run every point of the configured sweep axes.
    Sweep(Options),
    /// Record slit energies of the output pulse train.
    PulseTrain(Options),
    /// Evaluate the discrete amplitude-amplification reference model.
    Reference(Options),
}

#[derive(Args)]
struct Options {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset to start from (paper-42um, paper-84um, paper-126um, ideal).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Rescale recorded profiles by the inverse accumulated loss.
    #[arg(long, action = clap::ArgAction::Set)]
    compensate_loss: Option<bool>,
}

impl Options {
    fn load(&self) -> Result<ConfigFile, Error> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if let Some(p) = &self.preset {
            file.preset = Some(p.clone());
        }
        if let Some(out) = &self.out {
            file.output_dir = Some(out.display().to_string());
        }
        if let Some(w) = self.workers {
            file.workers = Some(w);
        }
        if let Some(c) = self.compensate_loss {
            file.loss_compensation = Some(c);
        }
        Ok(file)
    }
}

fn execute(cli: Cli) -> Result<String, Error> {
    let (options, forced_mode, sweeping) = match &cli.command {
        Command::Run(o) => (o, None, false),
        Command::Sweep(o) => (o, None, true),
        Command::PulseTrain(o) => (o, Some(Mode::PulseTrain), false),
        Command::Reference(o) => (o, Some(Mode::Reference), false),
    };
    let mut file = options.load()?;
    if forced_mode.is_some() {
        file.mode = forced_mode;
    }
    let config = file.resolve()?;
    let dir = config.output_dir.clone();
    if sweeping {
        let out = experiment::sweep(&config)?;
        out.write_to(&dir)?;
        Ok(format!(
            "{} sweep point(s) written to {}",
            out.points.len(),
            dir.display()
        ))
    } else {
        let out = experiment::run(&config)?;
        out.write_to(&dir)?;
        Ok(format!(
            "{} run written to {}",
            config.mode.as_str(),
            dir.display()
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(message) => {
            eprintln!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let category = match e.exit_code() {
                2 => "configuration error",
                3 => "simulation error",
                _ => "i/o error",
            };
            eprintln!("{category}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
