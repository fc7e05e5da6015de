//! Per-mode MDI-QKD secret key rates behind a spectrally multiplexed BSM.
//!
//! Each spectral mode is an independent MDI-QKD channel whose only
//! difference from the single-mode reference is its detection efficiency:
//! SSMM peak coupling times the coupling envelope at the mode's frequency,
//! times the detector efficiency. Crosstalk and state imperfections enter
//! through the measured qubit parameters and HOM visibility, which are shared
//! by every mode and by the reference.
//!
//! The key rate per pulse is the asymptotic
//! `P11 Y11 (1 - H2(e11)) - Q_Z f H2(E_Z)` with the single-photon quantities
//! taken from the model rather than from decoy bounds. `Q_Z` and `E_Z` come
//! from the coincidence engine with time-bin-resolved threshold detectors:
//! a successful projection is one click in each bin, on different detectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{CoincidenceEngine, CoincidenceWindow, DetectionCell, DetectorModel, InterferenceConfig};
use crate::photonic::{SpectralModeGrid, Station, TemporalEnvelope, WeakCoherentPulseSpec};
use crate::qubit::{basis_error_rates, build_state, TimeBinQubitSpec};
use crate::ssmm::{CrosstalkMatrix, SsmmModel};
use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Current,
    SoaCoupling,
    SoaCouplingDense,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Current => "current",
            ScenarioName::SoaCoupling => "soa_coupling",
            ScenarioName::SoaCouplingDense => "soa_coupling_dense",
            ScenarioName::Custom => "custom",
        }
    }
}

/// Measured qubit descriptions used by every mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitInputs {
    pub z_early: TimeBinQubitSpec,
    pub z_late: TimeBinQubitSpec,
    pub x_plus: TimeBinQubitSpec,
}

impl QubitInputs {
    pub fn with_snr_db(snr_db: f64) -> Self {
        QubitInputs {
            z_early: TimeBinQubitSpec::early_with_snr_db(snr_db),
            z_late: TimeBinQubitSpec::late_with_snr_db(snr_db),
            x_plus: TimeBinQubitSpec::superposition_with_snr_db(0.0, snr_db),
        }
    }
}

impl Default for QubitInputs {
    fn default() -> Self {
        Self::with_snr_db(20.0)
    }
}

fn default_visibility() -> f64 {
    0.42
}

fn default_source_rate() -> f64 {
    80e6
}

fn default_mu() -> f64 {
    0.1
}

fn default_f() -> f64 {
    1.16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    /// The grid holds every channel the device can resolve within its bandwidth.
    pub ssmm: SsmmModel,
    #[serde(default = "default_visibility")]
    pub hom_visibility: f64,
    #[serde(default = "default_source_rate")]
    pub source_rate: f64,
    /// Signal mean photon number per mode, identical for both stations.
    #[serde(default = "default_mu")]
    pub mean_photon_number: f64,
    #[serde(default = "default_f")]
    pub error_correction_inefficiency: f64,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub qubits: QubitInputs,
}

impl ScenarioConfig {
    /// Current device: 5% peak coupling, 8 GHz spacing, 60 GHz envelope, 7 channels.
    pub fn current() -> Self {
        let mut s = Self::preset(ScenarioName::Current, 0.05, 8e9, 7);
        s.ssmm = s.ssmm.with_rejection_db(10.0).expect("preset SSMM is valid");
        s
    }

    /// Current spacing with state-of-the-art 50% coupling.
    pub fn soa_coupling() -> Self {
        Self::preset(ScenarioName::SoaCoupling, 0.5, 8e9, 7)
    }

    /// 50% coupling and 3.2 GHz spacing; 20 channels.
    pub fn soa_coupling_dense() -> Self {
        Self::preset(ScenarioName::SoaCouplingDense, 0.5, 3.2e9, 20)
    }

    pub fn presets() -> [ScenarioConfig; 3] {
        [Self::current(), Self::soa_coupling(), Self::soa_coupling_dense()]
    }

    fn preset(name: ScenarioName, peak: f64, spacing: f64, modes: usize) -> Self {
        let grid = SpectralModeGrid { center_frequency: 0.0, spacing, mode_count: modes };
        let ssmm = SsmmModel::new(grid, 3.2e9, peak, 60e9).expect("preset SSMM is valid");
        ScenarioConfig {
            name,
            ssmm,
            hom_visibility: default_visibility(),
            source_rate: default_source_rate(),
            mean_photon_number: default_mu(),
            error_correction_inefficiency: default_f(),
            detector: DetectorModel::default(),
            qubits: QubitInputs::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ssmm.validate()?;
        self.detector.validate()?;
        if !(0.0..=0.5).contains(&self.hom_visibility) {
            return Err(Error::invalid("hom_visibility", "must lie in [0, 0.5]"));
        }
        if !(self.source_rate > 0.0) {
            return Err(Error::invalid("source_rate", "must be positive"));
        }
        if !(self.mean_photon_number > 0.0 && self.mean_photon_number < 2.0) {
            return Err(Error::invalid("mean_photon_number", "must lie in (0, 2)"));
        }
        if !(self.error_correction_inefficiency >= 1.0) {
            return Err(Error::invalid("error_correction_inefficiency", "must be at least 1"));
        }
        for q in [self.qubits.z_early, self.qubits.z_late, self.qubits.x_plus] {
            q.validate()?;
        }
        Ok(())
    }

    /// Largest M the device supports.
    pub fn mode_limit(&self) -> usize {
        self.ssmm.grid.mode_count
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Intermediate quantities of one mode's key rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRate {
    /// Per-photon detection efficiency (SSMM and detector).
    pub efficiency: f64,
    pub gain_z: f64,
    pub error_z: f64,
    pub yield_11: f64,
    pub error_11: f64,
    /// Secret bits per second, clipped at zero.
    pub rate: f64,
}

/// Key rate of one mode of the scenario's grid.
pub fn mode_key_rate(scenario: &ScenarioConfig, mode_index: usize) -> Result<ModeRate> {
    scenario.validate()?;
    let n = scenario.ssmm.grid.mode_count;
    if mode_index >= n {
        return Err(Error::ChannelOutOfRange { index: mode_index, mode_count: n });
    }
    let coupling = scenario.ssmm.crosstalk_matrix().get(mode_index, mode_index);
    rate_for_coupling(scenario, coupling)
}

/// Single-mode reference: the same parameters with the SSMM removed.
pub fn baseline_key_rate(scenario: &ScenarioConfig) -> Result<ModeRate> {
    scenario.validate()?;
    rate_for_coupling(scenario, 1.0)
}

fn rate_for_coupling(scenario: &ScenarioConfig, coupling: f64) -> Result<ModeRate> {
    let mu = scenario.mean_photon_number;
    let det = scenario.detector;
    let eta = coupling * det.efficiency;
    let d = det.dark_click_probability;

    let (gain_z, error_z) = z_basis_statistics(scenario, coupling)?;

    let x_state = build_state(&scenario.qubits.x_plus)?;
    let (_, e_x) = basis_error_rates(&x_state, &x_state, scenario.hom_visibility)?;
    let (yield_11, photon_yield) = single_photon_yield(eta, d);
    let error_11 = if yield_11 > 0.0 { 0.5 - (0.5 - e_x) * photon_yield / yield_11 } else { 0.5 };

    let p11 = (mu * (-mu).exp()).powi(2);
    let f = scenario.error_correction_inefficiency;
    let per_pulse = p11 * yield_11 * (1.0 - binary_entropy(error_11)) - gain_z * f * binary_entropy(error_z);
    Ok(ModeRate {
        efficiency: eta,
        gain_z,
        error_z,
        yield_11,
        error_11,
        rate: scenario.source_rate * per_pulse.max(0.0),
    })
}

/// Overlap factor that makes the engine's coherent-state visibility match the input.
fn engine_overlap(hom_visibility: f64) -> f64 {
    (2.0 * hom_visibility).sqrt().min(1.0)
}

/// `(Q_Z, E_Z)` averaged over the four Z-basis input combinations.
fn z_basis_statistics(scenario: &ScenarioConfig, coupling: f64) -> Result<(f64, f64)> {
    let early = build_state(&scenario.qubits.z_early)?.weights();
    let late = build_state(&scenario.qubits.z_late)?.weights();
    let grid = SpectralModeGrid::new(0.0, scenario.ssmm.grid.spacing, 1)?;
    let device = SsmmModel::lossless(grid);
    let envelope = TemporalEnvelope::default();
    let mu = scenario.mean_photon_number;
    let matrices =
        [CrosstalkMatrix::from_rows(vec![vec![coupling]])?, CrosstalkMatrix::from_rows(vec![vec![coupling]])?];

    let cells = |port, bin| DetectionCell::new(port, 0, bin);
    let (d1e, d1l) = (cells(0, CoincidenceWindow::Early), cells(0, CoincidenceWindow::Late));
    let (d2e, d2l) = (cells(1, CoincidenceWindow::Early), cells(1, CoincidenceWindow::Late));

    let mut gain = [[0.0f64; 2]; 2];
    for (i, wa) in [early, late].into_iter().enumerate() {
        for (j, wb) in [early, late].into_iter().enumerate() {
            let a = WeakCoherentPulseSpec::uniform(Station::A, 1, mu, wa, envelope)?;
            let b = WeakCoherentPulseSpec::uniform(Station::B, 1, mu, wb, envelope)?;
            let mut config = InterferenceConfig::new(a, b, device.clone(), device.clone(), scenario.detector)?;
            config.overlap_deficit = engine_overlap(scenario.hom_visibility);
            let engine = CoincidenceEngine::with_crosstalk(&config, matrices.clone())?;
            gain[i][j] = engine.event_probability(&[d1e, d2l], &[d1l, d2e])?
                + engine.event_probability(&[d1l, d2e], &[d1e, d2l])?;
        }
    }
    let total: f64 = gain.iter().flatten().sum();
    let gain_z = total / 4.0;
    let error_z = if total > 0.0 { (gain[0][0] + gain[1][1]) / total } else { 0.5 };
    Ok((gain_z, error_z))
}

/// Success probability of the BSM given exactly one photon from each station,
/// and the part of it in which both photons were detected without dark clicks.
///
/// Photons are treated as distinguishable; this is exact when they occupy
/// different bins, and same-bin pairs only contribute through dark clicks.
fn single_photon_yield(eta: f64, dark: f64) -> (f64, f64) {
    // Fate of a photon: lost, or detected at detector 0 or 1.
    let fates = [(None, 1.0 - eta), (Some(0usize), eta / 2.0), (Some(1usize), eta / 2.0)];
    let mut total = 0.0;
    for (bin_a, bin_b) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
        for &(fate_a, pa) in &fates {
            for &(fate_b, pb) in &fates {
                // photon[detector][bin]
                let mut photon = [[false; 2]; 2];
                if let Some(det) = fate_a {
                    photon[det][bin_a] = true;
                }
                if let Some(det) = fate_b {
                    photon[det][bin_b] = true;
                }
                let p_click = |det: usize, bin: usize| if photon[det][bin] { 1.0 } else { dark };
                let pattern = |first: usize| {
                    // `first` clicks early, the other detector clicks late.
                    let other = 1 - first;
                    p_click(first, 0) * (1.0 - p_click(other, 0)) * p_click(other, 1) * (1.0 - p_click(first, 1))
                };
                total += 0.25 * pa * pb * (pattern(0) + pattern(1));
            }
        }
    }
    let photon_only = (1.0 - dark).powi(2) * eta * eta / 4.0;
    (total, photon_only)
}

/// Cumulative multiplexed key rate and its ratio to the single-mode reference.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub scenario: ScenarioName,
    pub rows: Vec<RateCurveRow>,
    pub baseline_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurveRow {
    pub modes: usize,
    pub mode_index: usize,
    /// Rate contributed by the mode added in this row.
    pub mode_rate: f64,
    pub total_rate: f64,
    pub enhancement: f64,
}

impl RateCurve {
    pub fn to_sweep(&self) -> SweepResult {
        let mut sweep = SweepResult::new("M", vec!["rate_bits_per_s".into(), "enhancement".into()]);
        for row in &self.rows {
            sweep.push(row.modes as f64, vec![row.total_rate, row.enhancement]);
        }
        sweep
    }

    pub fn enhancements(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.enhancement).collect()
    }

    /// Smallest M whose enhancement reaches 1.
    pub fn crossover(&self) -> Option<usize> {
        self.rows.iter().find(|r| r.enhancement >= 1.0).map(|r| r.modes)
    }
}

/// Adds modes from the grid center outward, up to `max_modes`.
pub fn enhancement_curve(scenario: &ScenarioConfig, max_modes: usize) -> Result<RateCurve> {
    scenario.validate()?;
    let limit = scenario.mode_limit();
    if max_modes == 0 {
        return Err(Error::invalid("max_modes", "need at least one mode"));
    }
    if max_modes > limit {
        return Err(Error::ConstraintViolation {
            what: format!(
                "{max_modes} modes requested but the {:.0} GHz device bandwidth holds {limit} channels at {:.1} GHz spacing",
                scenario.ssmm.envelope_bandwidth / 1e9,
                scenario.ssmm.grid.spacing / 1e9
            ),
            limit: limit.to_string(),
        });
    }
    let baseline = baseline_key_rate(scenario)?.rate;
    let order = scenario.ssmm.grid.center_outward_order();
    let mut rows = Vec::with_capacity(max_modes);
    let mut total = 0.0;
    for (k, &mode_index) in order.iter().take(max_modes).enumerate() {
        let mode_rate = mode_key_rate(scenario, mode_index)?.rate;
        total += mode_rate;
        let enhancement = if baseline > 0.0 { total / baseline } else { 0.0 };
        rows.push(RateCurveRow { modes: k + 1, mode_index, mode_rate, total_rate: total, enhancement });
    }
    Ok(RateCurve { scenario: scenario.name, rows, baseline_rate: baseline })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_limits() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - 0.4999).abs() < 1e-3);
    }

    #[test]
    fn zero_coupling_gives_no_key() {
        let mut s = ScenarioConfig::current();
        s.ssmm.peak_coupling = 0.0;
        assert_eq!(mode_key_rate(&s, 3).unwrap().rate, 0.0);
    }

    #[test]
    fn random_phase_errors_give_no_key() {
        let mut s = ScenarioConfig::soa_coupling();
        s.hom_visibility = 0.0;
        let r = mode_key_rate(&s, 3).unwrap();
        assert!((r.error_11 - 0.5).abs() < 1e-15);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn single_photon_yield_without_darks() {
        let (y, photon) = single_photon_yield(0.6, 0.0);
        assert!((y - 0.09).abs() < 1e-15);
        assert_eq!(y, photon);
    }

    #[test]
    fn mode_index_is_checked() {
        assert!(mode_key_rate(&ScenarioConfig::current(), 7).is_err());
    }

    #[test]
    fn too_many_modes_is_a_constraint_violation() {
        let err = enhancement_curve(&ScenarioConfig::current(), 8).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { ref limit, .. } if limit == "7"));
    }

    #[test]
    fn preset_names() {
        let names: Vec<_> = ScenarioConfig::presets().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["current", "soa_coupling", "soa_coupling_dense"]);
    }
}
