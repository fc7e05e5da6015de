//! The run driver behind the CLI: resolve the configuration, run one
//! experiment, write its CSV files and a manifest.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hom::{fit_gaussian_dip, fit_raised_cosine, hom_dip_scan, phase_scan, DipFit};
use crate::keyrate::{enhancement_curve, ScenarioName};
use crate::repeater::{relay_rate, repeater_rate, storage_constraints, tbp_sweep, LinkConfig};
use crate::ssmm::frequency_response_scan;
use crate::sweep::{format_value, linspace, SweepResult};
use crate::validation::{format_table, run_oracle_suite, write_report};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    FreqResponse,
    HomDip,
    PhaseScan,
    KeyrateSweep,
    RepeaterRate,
    TbpSweep,
    ValidateOracle,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::FreqResponse => "freq-response",
            Subcommand::HomDip => "hom-dip",
            Subcommand::PhaseScan => "phase-scan",
            Subcommand::KeyrateSweep => "keyrate-sweep",
            Subcommand::RepeaterRate => "repeater-rate",
            Subcommand::TbpSweep => "tbp-sweep",
            Subcommand::ValidateOracle => "validate-oracle",
        }
    }

    /// Preset used when neither a config file nor a preset is given.
    pub fn default_preset(self) -> &'static str {
        match self {
            Subcommand::FreqResponse => "freq-response",
            Subcommand::HomDip => "hom-calibrated",
            Subcommand::PhaseScan => "hom-phase",
            Subcommand::KeyrateSweep => "keyrate",
            Subcommand::RepeaterRate | Subcommand::TbpSweep => "repeater",
            Subcommand::ValidateOracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub subcommand: Subcommand,
    /// The subcommand's default preset when absent.
    pub source: Option<ConfigSource>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Expected (or sampled) counts instead of per-pulse probabilities.
    pub counts: bool,
}

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: String,
    pub seed: u64,
    pub out_dir: String,
    pub output_mode: String,
    pub version: String,
    pub config_sha256: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn sweep(&mut self, name: impl Into<String>, sweep: &SweepResult) -> Result<()> {
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.files.push((name.into(), buf));
        Ok(())
    }
}

fn resolve(options: &RunOptions) -> Result<(RunConfig, String, String)> {
    match &options.source {
        Some(ConfigSource::File(path)) => {
            let (config, text) = RunConfig::load(path)?;
            Ok((config, text, path.display().to_string()))
        }
        Some(ConfigSource::Preset(name)) => {
            let (config, text) = RunConfig::preset(name)?;
            Ok((config, text, format!("preset:{name}")))
        }
        None => {
            let name = options.subcommand.default_preset();
            let (config, text) = RunConfig::preset(name)?;
            Ok((config, text, format!("preset:{name}")))
        }
    }
}

/// Runs one subcommand; progress and summaries go to `console`.
///
/// Output files are written only after the computation succeeds, except for
/// `validate-oracle`, which writes its report before signalling failures.
pub fn run(options: &RunOptions, console: &mut dyn Write) -> Result<RunManifest> {
    let (config, text, origin) = resolve(options)?;
    let mut artifacts = Artifacts { files: Vec::new() };
    let mut failure = None;

    match options.subcommand {
        Subcommand::FreqResponse => {
            let section = config.freq_response.clone().unwrap_or_default();
            let sweep = frequency_response_scan(&section.ssmm, section.f_min_hz, section.f_max_hz, section.step_hz)?;
            for c in 0..sweep.columns.len() {
                let best = sweep.argmax(c).unwrap_or(f64::NAN);
                writeln!(console, "channel {}: peak transmission at {:+.3} GHz", c + 1, best / 1e9)?;
            }
            artifacts.sweep("freq_response.csv", &sweep)?;
        }
        Subcommand::HomDip => {
            let section = config.hom.clone().unwrap_or_default();
            let interference = section.interference_config()?;
            let pairs = section.channel_pairs()?;
            let mode = section.output_mode(options.counts, options.seed);
            let range = (section.delay_range_s[0], section.delay_range_s[1]);
            let scan = hom_dip_scan(&interference, range, section.steps, &pairs, &mode)?;
            let xs = scan.sweep.xs();
            let mut rows = Vec::new();
            for (i, &(c1, c2)) in pairs.iter().enumerate() {
                // A flat, noisy dip leaves center and width unidentified; keep the best estimate.
                let fit = match fit_gaussian_dip(&xs, &scan.sweep.column(i)) {
                    Ok(fit) => fit,
                    Err(Error::FitDidNotConverge { best, .. }) => *best,
                    Err(err) => return Err(err),
                };
                let note = if fit.converged { "" } else { " [not converged]" };
                writeln!(
                    console,
                    "ch{} x ch{}: V = {:.4} (width {:.1} ps){note}",
                    c1 + 1,
                    c2 + 1,
                    fit.visibility,
                    fit.width * 1e12
                )?;
                rows.push(fit_row(c1, c2, &fit));
            }
            artifacts.sweep("hom_dip.csv", &scan.sweep)?;
            artifacts.table(
                "hom_dip_fits.csv",
                &[
                    "channel_1",
                    "channel_2",
                    "baseline",
                    "visibility",
                    "center_s",
                    "width_s",
                    "residual_norm",
                    "iterations",
                    "converged",
                ],
                rows,
            )?;
        }
        Subcommand::PhaseScan => {
            let section = config.hom.clone().unwrap_or_default();
            let interference = section.interference_config()?;
            let ps = section.phase_scan;
            if ps.points == 0 {
                return Err(Error::EmptyRange("phase scan with no points".into()));
            }
            let thetas = linspace(ps.theta_min_rad, ps.theta_max_rad, ps.points);
            let range = (section.delay_range_s[0], section.delay_range_s[1]);
            let sweep = phase_scan(&interference, &thetas, range, section.steps, section.phase_scan_pair()?)?;
            let fit = fit_raised_cosine(&sweep.xs(), &sweep.column(0))?;
            writeln!(console, "V_max = {:.4}, max residual {:.2e}", fit.v_max, fit.max_residual)?;
            artifacts.sweep("phase_scan.csv", &sweep)?;
            artifacts.table(
                "phase_scan_fit.csv",
                &["v_max", "max_residual"],
                vec![vec![format_value(fit.v_max), format_value(fit.max_residual)]],
            )?;
        }
        Subcommand::KeyrateSweep => {
            let section = config.keyrate.clone().unwrap_or_default();
            let mut custom_index = 0;
            for scenario in section.scenarios()? {
                let max_modes = section.max_modes.unwrap_or_else(|| scenario.mode_limit());
                let curve = enhancement_curve(&scenario, max_modes)?;
                let label = match scenario.name {
                    ScenarioName::Custom => {
                        custom_index += 1;
                        format!("custom_{custom_index}")
                    }
                    name => name.as_str().to_string(),
                };
                let last = curve.rows.last().expect("at least one mode");
                let crossover = curve.crossover().map_or("none".to_string(), |m| m.to_string());
                writeln!(
                    console,
                    "{label}: enhancement {:.3} at M = {}, crossover M = {crossover}",
                    last.enhancement, last.modes
                )?;
                artifacts.sweep(format!("keyrate_{label}.csv"), &curve.to_sweep())?;
            }
        }
        Subcommand::RepeaterRate => {
            let section = config.repeater.unwrap_or_default();
            if section.points == 0
                || !(section.distance_min_m > 0.0 && section.distance_min_m <= section.distance_max_m)
            {
                return Err(Error::EmptyRange(format!(
                    "distances [{}, {}] with {} points",
                    section.distance_min_m, section.distance_max_m, section.points
                )));
            }
            let columns = ["relay_rate_hz", "repeater_rate_hz", "temporal_modes", "fixed_time_s", "storage_feasible"];
            let mut sweep = SweepResult::new("distance_m", columns.map(String::from).to_vec());
            for distance in linspace(section.distance_min_m, section.distance_max_m, section.points) {
                let link = LinkConfig { total_distance: distance, ..section.link };
                let storage = storage_constraints(&link)?;
                sweep.push(
                    distance,
                    vec![
                        relay_rate(&link)?,
                        repeater_rate(&link)?,
                        storage.temporal_modes,
                        storage.fixed_time,
                        if storage.feasible { 1.0 } else { 0.0 },
                    ],
                );
            }
            let link = section.link;
            writeln!(
                console,
                "L = {:.0} km, n = {}, M = {}: repeater {:.4e} Hz, relay {:.4e} Hz",
                link.total_distance / 1e3,
                link.links,
                link.modes,
                repeater_rate(&link)?,
                relay_rate(&link)?
            )?;
            artifacts.sweep("repeater_rate.csv", &sweep)?;
        }
        Subcommand::TbpSweep => {
            let section = config.tbp.unwrap_or_default();
            let result = tbp_sweep(&section.link, &section.params)?;
            writeln!(
                console,
                "optimum: tau = {:.3e} s, M = {}, rate {:.4e} Hz",
                result.optimal_tau, result.optimal_modes, result.optimal_rate
            )?;
            artifacts.sweep("tbp_sweep.csv", &result.sweep)?;
        }
        Subcommand::ValidateOracle => {
            let section = config.oracle.unwrap_or_default();
            let checks = run_oracle_suite(&section, options.seed)?;
            write!(console, "{}", format_table(&checks))?;
            let mut buf = Vec::new();
            write_report(&checks, &mut buf)?;
            artifacts.files.push(("oracle_report.csv".into(), buf));
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if !failed.is_empty() {
                failure = Some(Error::OracleValidation(failed.join(", ")));
            }
        }
    }

    let manifest = RunManifest {
        subcommand: options.subcommand.name().into(),
        config: origin,
        seed: options.seed,
        out_dir: options.out_dir.display().to_string(),
        output_mode: if options.counts { "counts" } else { "probabilities" }.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(text.as_bytes()),
        outputs: artifacts.files.iter().map(|(name, _)| name.clone()).collect(),
    };
    write_outputs(&options.out_dir, &artifacts, &manifest)?;
    match failure {
        Some(err) => Err(err),
        None => Ok(manifest),
    }
}

fn fit_row(c1: usize, c2: usize, fit: &DipFit) -> Vec<String> {
    vec![
        (c1 + 1).to_string(),
        (c2 + 1).to_string(),
        format_value(fit.baseline),
        format_value(fit.visibility),
        format_value(fit.center),
        format_value(fit.width),
        format_value(fit.residual_norm),
        fit.iterations.to_string(),
        fit.converged.to_string(),
    ]
}

fn write_outputs(dir: &Path, artifacts: &Artifacts, manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &artifacts.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    let mut json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.into()))?;
    json.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}
