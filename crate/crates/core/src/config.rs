//! JSON run configuration and the built-in presets.
//!
//! Every section is optional; a subcommand reads only its own section and
//! falls back to that section's defaults. Presets are the JSON files shipped in
//! `presets/`, embedded at compile time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{CoincidenceWindow, DetectorModel, InterferenceConfig, OutputMode, PhaseModel};
use crate::keyrate::ScenarioConfig;
use crate::photonic::{BinWeights, SpectralModeGrid, Station, TemporalEnvelope, WeakCoherentPulseSpec};
use crate::repeater::{LinkConfig, TbpParams};
use crate::ssmm::SsmmModel;

pub const PRESETS: &[(&str, &str)] = &[
    ("freq-response", include_str!("../presets/freq-response.json")),
    ("hom-ideal", include_str!("../presets/hom-ideal.json")),
    ("hom-calibrated", include_str!("../presets/hom-calibrated.json")),
    ("hom-crosstalk", include_str!("../presets/hom-crosstalk.json")),
    ("hom-crosstalk-18db", include_str!("../presets/hom-crosstalk-18db.json")),
    ("hom-phase", include_str!("../presets/hom-phase.json")),
    ("keyrate", include_str!("../presets/keyrate.json")),
    ("current", include_str!("../presets/current.json")),
    ("soa_coupling", include_str!("../presets/soa_coupling.json")),
    ("soa_coupling_dense", include_str!("../presets/soa_coupling_dense.json")),
    ("repeater", include_str!("../presets/repeater.json")),
    ("oracle", include_str!("../presets/oracle.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text).ok_or_else(|| Error::Config {
        path: "--preset".into(),
        message: format!("unknown preset `{name}`; available: {}", preset_names().join(", ")),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub freq_response: Option<FreqResponseSection>,
    #[serde(default)]
    pub hom: Option<HomSection>,
    #[serde(default)]
    pub keyrate: Option<KeyrateSection>,
    #[serde(default)]
    pub repeater: Option<RepeaterSection>,
    #[serde(default)]
    pub tbp: Option<TbpSection>,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
}

impl RunConfig {
    /// Parses JSON, reporting schema violations with the offending field path.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config { path: format!("{origin}: {path}"), message: e.into_inner().to_string() }
        })?;
        de.end().map_err(|e| Error::Config { path: origin.into(), message: e.to_string() })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })?;
        Ok((Self::from_json(&text, &path.display().to_string())?, text))
    }

    pub fn preset(name: &str) -> Result<(Self, String)> {
        let text = preset_text(name)?;
        Ok((Self::from_json(text, &format!("preset {name}"))?, text.to_string()))
    }
}

fn default_f_min() -> f64 {
    -6e9
}

fn default_f_max() -> f64 {
    6e9
}

fn default_f_step() -> f64 {
    100e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqResponseSection {
    pub ssmm: SsmmModel,
    #[serde(default = "default_f_min")]
    pub f_min_hz: f64,
    #[serde(default = "default_f_max")]
    pub f_max_hz: f64,
    #[serde(default = "default_f_step")]
    pub step_hz: f64,
}

impl Default for FreqResponseSection {
    fn default() -> Self {
        let grid = SpectralModeGrid { center_frequency: 0.0, spacing: 8e9, mode_count: 2 };
        let ssmm = SsmmModel::new(grid, 3.2e9, 0.05, 60e9)
            .and_then(|m| m.with_rejection_db(10.0))
            .expect("default SSMM is valid");
        FreqResponseSection { ssmm, f_min_hz: default_f_min(), f_max_hz: default_f_max(), step_hz: default_f_step() }
    }
}

/// Time-bin content of every mode of one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Early,
    Late,
    /// `(|e> + e^{i theta} |l>) / sqrt(2)`.
    Superposition {
        theta: f64,
    },
}

impl StateSpec {
    pub fn weights(self) -> BinWeights {
        match self {
            StateSpec::Early => BinWeights::early_only(),
            StateSpec::Late => BinWeights::late_only(),
            StateSpec::Superposition { theta } => BinWeights::superposition(theta),
        }
    }
}

fn default_mu() -> f64 {
    0.1
}

fn default_state() -> StateSpec {
    StateSpec::Late
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSection {
    #[serde(default = "default_mu")]
    pub mean_photon_number: f64,
    #[serde(default = "default_state")]
    pub state: StateSpec,
    /// Fixed phase of each spectral mode (rad); zeros when absent.
    #[serde(default)]
    pub phase_offsets: Option<Vec<f64>>,
}

impl Default for StationSection {
    fn default() -> Self {
        StationSection { mean_photon_number: default_mu(), state: default_state(), phase_offsets: None }
    }
}

impl StationSection {
    fn pulse(&self, station: Station, modes: usize, envelope: TemporalEnvelope) -> Result<WeakCoherentPulseSpec> {
        let spec =
            WeakCoherentPulseSpec::uniform(station, modes, self.mean_photon_number, self.state.weights(), envelope)?;
        match &self.phase_offsets {
            Some(offsets) => spec.with_phase_offsets(offsets),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsSection {
    pub source_rate_hz: f64,
    pub accumulation_time_s: f64,
    /// Replace expected counts by Poisson draws seeded from the run seed.
    #[serde(default)]
    pub poisson: bool,
}

impl Default for CountsSection {
    fn default() -> Self {
        CountsSection { source_rate_hz: 80e6, accumulation_time_s: 1.0, poisson: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanSection {
    pub theta_min_rad: f64,
    pub theta_max_rad: f64,
    pub points: usize,
    /// One-based (SSMM 1 channel, SSMM 2 channel).
    pub pair: [usize; 2],
}

impl Default for PhaseScanSection {
    fn default() -> Self {
        PhaseScanSection {
            theta_min_rad: -std::f64::consts::PI,
            theta_max_rad: std::f64::consts::PI,
            points: 25,
            pair: [1, 1],
        }
    }
}

fn calibrated_deficit() -> f64 {
    0.9f64.sqrt()
}

fn default_nodes() -> usize {
    crate::hom::DEFAULT_QUADRATURE_NODES
}

fn default_delay_range() -> [f64; 2] {
    [-1.5e-9, 1.5e-9]
}

fn default_steps() -> usize {
    61
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    pub ssmm: SsmmModel,
    /// Second mapper; a copy of `ssmm` when absent.
    #[serde(default)]
    pub ssmm_2: Option<SsmmModel>,
    #[serde(default)]
    pub station_a: StationSection,
    #[serde(default)]
    pub station_b: StationSection,
    #[serde(default)]
    pub envelope: TemporalEnvelope,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub phase_model: PhaseModel,
    #[serde(default = "calibrated_deficit")]
    pub overlap_deficit: f64,
    #[serde(default)]
    pub window: CoincidenceWindow,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default = "default_delay_range")]
    pub delay_range_s: [f64; 2],
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// One-based channel pairs; every combination when absent.
    #[serde(default)]
    pub pairs: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub counts: CountsSection,
    #[serde(default)]
    pub phase_scan: PhaseScanSection,
}

impl Default for HomSection {
    fn default() -> Self {
        let grid = SpectralModeGrid { center_frequency: 0.0, spacing: 8e9, mode_count: 2 };
        HomSection {
            ssmm: SsmmModel::new(grid, 3.2e9, 0.05, 60e9).expect("default SSMM is valid"),
            ssmm_2: None,
            station_a: StationSection::default(),
            station_b: StationSection::default(),
            envelope: TemporalEnvelope::default(),
            detector: DetectorModel::default(),
            phase_model: PhaseModel::Common,
            overlap_deficit: calibrated_deficit(),
            window: CoincidenceWindow::Late,
            quadrature_nodes: default_nodes(),
            delay_range_s: default_delay_range(),
            steps: default_steps(),
            pairs: None,
            counts: CountsSection::default(),
            phase_scan: PhaseScanSection::default(),
        }
    }
}

fn zero_based(pair: [usize; 2], modes: usize) -> Result<(usize, usize)> {
    for c in pair {
        if c == 0 || c > modes {
            return Err(Error::Config {
                path: "hom.pairs".into(),
                message: format!("channels are numbered 1..={modes}, got {c}"),
            });
        }
    }
    Ok((pair[0] - 1, pair[1] - 1))
}

impl HomSection {
    pub fn interference_config(&self) -> Result<InterferenceConfig> {
        let modes = self.ssmm.grid.mode_count;
        let a = self.station_a.pulse(Station::A, modes, self.envelope)?;
        let b = self.station_b.pulse(Station::B, modes, self.envelope)?;
        let ssmm_2 = self.ssmm_2.clone().unwrap_or_else(|| self.ssmm.clone());
        let mut config = InterferenceConfig::new(a, b, self.ssmm.clone(), ssmm_2, self.detector)?;
        config.phase_model = self.phase_model;
        config.overlap_deficit = self.overlap_deficit;
        config.window = self.window;
        config.quadrature_nodes = self.quadrature_nodes;
        config.validate()?;
        Ok(config)
    }

    /// Zero-based channel pairs to scan.
    pub fn channel_pairs(&self) -> Result<Vec<(usize, usize)>> {
        let modes = self.ssmm.grid.mode_count;
        match &self.pairs {
            Some(pairs) => pairs.iter().map(|&p| zero_based(p, modes)).collect(),
            None => Ok((0..modes).flat_map(|c1| (0..modes).map(move |c2| (c1, c2))).collect()),
        }
    }

    pub fn phase_scan_pair(&self) -> Result<(usize, usize)> {
        zero_based(self.phase_scan.pair, self.ssmm.grid.mode_count)
    }

    pub fn output_mode(&self, counts: bool, seed: u64) -> OutputMode {
        if counts {
            OutputMode::Counts {
                source_rate: self.counts.source_rate_hz,
                accumulation_time: self.counts.accumulation_time_s,
                poisson_seed: self.counts.poisson.then_some(seed),
            }
        } else {
            OutputMode::Probability
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyrateSection {
    /// Built-in scenarios by name.
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default)]
    pub custom: Vec<ScenarioConfig>,
    /// Largest M evaluated; each scenario's channel count when absent.
    #[serde(default)]
    pub max_modes: Option<usize>,
}

impl KeyrateSection {
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>> {
        let mut out = Vec::new();
        let names: Vec<String> = if self.presets.is_empty() && self.custom.is_empty() {
            ScenarioConfig::presets().iter().map(|s| s.name.as_str().to_string()).collect()
        } else {
            self.presets.clone()
        };
        for name in &names {
            let scenario =
                ScenarioConfig::presets().into_iter().find(|s| s.name.as_str() == name).ok_or_else(|| {
                    Error::Config {
                        path: "keyrate.presets".into(),
                        message: format!(
                            "unknown scenario `{name}`; expected current, soa_coupling or soa_coupling_dense"
                        ),
                    }
                })?;
            out.push(scenario);
        }
        out.extend(self.custom.iter().cloned());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeaterSection {
    pub link: LinkConfig,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    pub points: usize,
}

impl Default for RepeaterSection {
    fn default() -> Self {
        RepeaterSection { link: default_link(), distance_min_m: 10e3, distance_max_m: 500e3, points: 50 }
    }
}

fn default_link() -> LinkConfig {
    LinkConfig {
        total_distance: 100e3,
        links: 2,
        loss_db_per_m: 0.2e-3,
        source_rate: 80e6,
        modes: 10,
        storage_time: 1e-3,
        fiber_speed: 2e8,
        link_efficiency: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TbpSection {
    pub link: LinkConfig,
    pub params: TbpParams,
}

impl Default for TbpSection {
    fn default() -> Self {
        TbpSection {
            link: default_link(),
            params: TbpParams {
                total_bandwidth: 60e9,
                tbp_constant: 1.0,
                duty_cycle: 0.05,
                tau_min: 10e-12,
                tau_max: 10e-9,
                points: 61,
                bandwidth_constrained: true,
            },
        }
    }
}

fn default_oracle_configs() -> usize {
    200
}

fn default_n_max() -> usize {
    8
}

fn default_mc_trials() -> u64 {
    1_000_000
}

fn default_relay_configs() -> usize {
    1000
}

fn default_oracle_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_oracle_configs")]
    pub fock_configs: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_mc_trials")]
    pub monte_carlo_trials: u64,
    #[serde(default = "default_relay_configs")]
    pub relay_configs: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            fock_configs: default_oracle_configs(),
            n_max: default_n_max(),
            tolerance: default_oracle_tolerance(),
            monte_carlo_trials: default_mc_trials(),
            relay_configs: default_relay_configs(),
        }
    }
}
