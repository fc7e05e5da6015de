use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use spectral_hom::config::preset_names;
use spectral_hom::run::{run, ConfigSource, RunOptions, Subcommand};

#[derive(Parser)]
#[command(name = "spectral-hom", version, about = "Spectrally multiplexed HOM interference and rate estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Per-channel SSMM transmission versus frequency.
    FreqResponse(Common),
    /// Coincidence dip scans for every channel pair, with Gaussian fits.
    HomDip(Common),
    /// Matched-pair visibility versus the early/late qubit phase.
    PhaseScan(Common),
    /// Multiplexed MDI-QKD key-rate enhancement for each scenario.
    KeyrateSweep(Common),
    /// Relay and multiplexed repeater rates versus distance.
    RepeaterRate(Common),
    /// Repeater rate versus pulse duration at fixed total bandwidth.
    TbpSweep(Common),
    /// Analytic engines against the Fock, Monte Carlo and closed-form oracles.
    ValidateOracle(Common),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Master seed for every random stream in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for CSV files and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Report expected coincidence counts.
    #[arg(long, conflicts_with = "probabilities")]
    counts: bool,
    /// Report coincidence probabilities per pulse (default).
    #[arg(long)]
    probabilities: bool,
}

impl Common {
    fn options(self, subcommand: Subcommand) -> RunOptions {
        let source = match (self.config, self.preset) {
            (Some(path), _) => Some(ConfigSource::File(path)),
            (None, Some(name)) => Some(ConfigSource::Preset(name)),
            (None, None) => None,
        };
        RunOptions { subcommand, source, seed: self.seed, out_dir: self.out, counts: self.counts }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = match cli.command {
        Command::FreqResponse(c) => c.options(Subcommand::FreqResponse),
        Command::HomDip(c) => c.options(Subcommand::HomDip),
        Command::PhaseScan(c) => c.options(Subcommand::PhaseScan),
        Command::KeyrateSweep(c) => c.options(Subcommand::KeyrateSweep),
        Command::RepeaterRate(c) => c.options(Subcommand::RepeaterRate),
        Command::TbpSweep(c) => c.options(Subcommand::TbpSweep),
        Command::ValidateOracle(c) => c.options(Subcommand::ValidateOracle),
        Command::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    };
    let mut stdout = std::io::stdout();
    match run(&options, &mut stdout) {
        Ok(manifest) => {
            println!("wrote {} file(s) to {}", manifest.outputs.len() + 1, manifest.out_dir);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
