//! Two-station HOM interference of phase-randomized weak coherent pulses
//! behind a balanced beam splitter and two spectral-to-spatial mode mappers.

pub mod engine;
pub mod fit;
pub mod fock;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photonic::{temporal_overlap, Bin, WeakCoherentPulseSpec};
use crate::ssmm::{CrosstalkMatrix, SsmmModel};

pub use engine::{coincidence_probability, CoincidenceEngine, CoincidenceResult, DetectionCell};
pub use fit::{fit_gaussian_dip, fit_raised_cosine, DipFit, RaisedCosineFit};
pub use fock::fock_oracle_coincidence;
pub use scan::{hom_dip_scan, phase_scan, DipScan, OutputMode};

pub const DEFAULT_QUADRATURE_NODES: usize = 256;

/// Threshold single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Probability of a dark click per detection window.
    pub dark_click_probability: f64,
    #[serde(default = "default_window")]
    pub coincidence_window: f64,
}

fn default_window() -> f64 {
    1e-9
}

impl DetectorModel {
    pub fn ideal() -> Self {
        DetectorModel { efficiency: 1.0, dark_click_probability: 0.0, coincidence_window: default_window() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid("efficiency", format!("must lie in [0, 1], got {}", self.efficiency)));
        }
        if !(0.0..1.0).contains(&self.dark_click_probability) {
            return Err(Error::invalid(
                "dark_click_probability",
                format!("must lie in [0, 1), got {}", self.dark_click_probability),
            ));
        }
        if !(self.coincidence_window > 0.0) {
            return Err(Error::invalid("coincidence_window", "must be positive"));
        }
        Ok(())
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel { efficiency: 0.8, dark_click_probability: 1e-6, coincidence_window: default_window() }
    }
}

/// How the random phase of station B is shared across spectral modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// One uniform phase applied to all of B's modes.
    #[default]
    Common,
    /// An independent uniform phase per spectral mode.
    IndependentPerMode,
}

/// Time bins integrated by each detection window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoincidenceWindow {
    Early,
    #[default]
    Late,
    Both,
}

impl CoincidenceWindow {
    pub fn contains(self, bin: Bin) -> bool {
        match self {
            CoincidenceWindow::Early => bin == Bin::Early,
            CoincidenceWindow::Late => bin == Bin::Late,
            CoincidenceWindow::Both => true,
        }
    }

    pub fn bins(self) -> Vec<Bin> {
        Bin::ALL.into_iter().filter(|&b| self.contains(b)).collect()
    }
}

/// Everything needed to evaluate coincidences at one relative delay.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceConfig {
    pub pulse_a: WeakCoherentPulseSpec,
    pub pulse_b: WeakCoherentPulseSpec,
    pub ssmm_1: SsmmModel,
    pub ssmm_2: SsmmModel,
    /// `detectors[s][c]` sits behind SSMM `s+1`, channel `c`.
    pub detectors: [Vec<DetectorModel>; 2],
    /// Delay of B relative to A (s).
    pub delta_t: f64,
    pub phase_model: PhaseModel,
    /// Residual distinguishability factor multiplying the temporal overlap.
    pub overlap_deficit: f64,
    pub window: CoincidenceWindow,
    pub quadrature_nodes: usize,
}

impl InterferenceConfig {
    pub fn new(
        pulse_a: WeakCoherentPulseSpec,
        pulse_b: WeakCoherentPulseSpec,
        ssmm_1: SsmmModel,
        ssmm_2: SsmmModel,
        detector: DetectorModel,
    ) -> Result<Self> {
        let n = ssmm_1.grid.mode_count;
        let config = InterferenceConfig {
            pulse_a,
            pulse_b,
            ssmm_1,
            ssmm_2,
            detectors: [vec![detector; n], vec![detector; n]],
            delta_t: 0.0,
            phase_model: PhaseModel::Common,
            overlap_deficit: 1.0,
            window: CoincidenceWindow::Late,
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.ssmm_1.validate()?;
        self.ssmm_2.validate()?;
        if self.ssmm_1.grid != self.ssmm_2.grid {
            return Err(Error::MismatchedGrids);
        }
        let n = self.mode_count();
        self.pulse_a.validate()?;
        self.pulse_b.validate()?;
        if self.pulse_a.envelope != self.pulse_b.envelope {
            return Err(Error::MismatchedEnvelopes);
        }
        for pulse in [&self.pulse_a, &self.pulse_b] {
            if pulse.modes.len() != n {
                return Err(Error::invalid(
                    "modes",
                    format!(
                        "pulse from station {:?} describes {} modes, grid has {n}",
                        pulse.station,
                        pulse.modes.len()
                    ),
                ));
            }
        }
        for row in &self.detectors {
            if row.len() != n {
                return Err(Error::invalid("detectors", format!("expected {n} detectors per SSMM, got {}", row.len())));
            }
            for d in row {
                d.validate()?;
            }
        }
        if !(0.0..=1.0).contains(&self.overlap_deficit) {
            return Err(Error::invalid("overlap_deficit", format!("must lie in [0, 1], got {}", self.overlap_deficit)));
        }
        if self.quadrature_nodes < 8 {
            return Err(Error::invalid("quadrature_nodes", "need at least 8 nodes"));
        }
        if !self.delta_t.is_finite() {
            return Err(Error::invalid("delta_t", "must be finite"));
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.ssmm_1.grid.mode_count
    }

    /// Field overlap between A's and B's wave packets, including the deficit factor.
    pub fn interference_overlap(&self) -> Result<f64> {
        Ok(self.overlap_deficit * temporal_overlap(&self.pulse_a.envelope, self.delta_t)?)
    }

    pub fn with_delay(&self, delta_t: f64) -> Self {
        InterferenceConfig { delta_t, ..self.clone() }
    }

    pub fn crosstalk(&self, port: usize) -> CrosstalkMatrix {
        match port {
            0 => self.ssmm_1.crosstalk_matrix(),
            _ => self.ssmm_2.crosstalk_matrix(),
        }
    }

    /// Same configuration with the two stations exchanged.
    pub fn swapped(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.pulse_a, &mut out.pulse_b);
        out.pulse_a.station = self.pulse_a.station;
        out.pulse_b.station = self.pulse_b.station;
        out
    }
}

/// `(C_dist - C_indist) / C_dist`.
pub fn visibility(c_dist: f64, c_indist: f64) -> Result<f64> {
    if !(c_dist > 0.0) {
        return Err(Error::UndefinedVisibility);
    }
    if !(c_indist >= 0.0) {
        return Err(Error::invalid("c_indist", format!("must be non-negative, got {c_indist}")));
    }
    Ok((c_dist - c_indist) / c_dist)
}
