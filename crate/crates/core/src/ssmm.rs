//! Parametric model of a VIPA-based spectral-to-spatial mode mapper.
//!
//! Each spatial output channel has a Gaussian power passband centered on its
//! grid frequency. The whole device sits under a Gaussian coupling envelope
//! whose FWHM is the VIPA's usable spectral bandwidth, so channels far from
//! the nominal frequency couple less light into their fibers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photonic::SpectralModeGrid;
use crate::sweep::SweepResult;

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingEnvelopeShape {
    #[default]
    Gaussian,
    /// No frequency dependence; used for idealized comparisons.
    Flat,
}

fn default_passband_fwhm() -> f64 {
    3.2e9
}

fn default_envelope_bandwidth() -> f64 {
    60e9
}

fn default_focal_length() -> f64 {
    1.0
}

fn default_angular_dispersion() -> f64 {
    // rad per Hz; only used to report fiber positions in the focal plane.
    1.0e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsmmModel {
    pub grid: SpectralModeGrid,
    /// Used when `adjacent_rejection_db` is absent.
    #[serde(default = "default_passband_fwhm")]
    pub passband_fwhm: f64,
    pub peak_coupling: f64,
    /// Power ratio between a channel's own center and its neighbor's center.
    /// When set it determines the passband width.
    #[serde(default)]
    pub adjacent_rejection_db: Option<f64>,
    #[serde(default = "default_envelope_bandwidth")]
    pub envelope_bandwidth: f64,
    #[serde(default)]
    pub envelope_shape: CouplingEnvelopeShape,
    /// Frequency of maximum coupling; defaults to the grid center.
    #[serde(default)]
    pub envelope_center: Option<f64>,
    #[serde(default = "default_focal_length")]
    pub focal_length: f64,
    #[serde(default = "default_angular_dispersion")]
    pub angular_dispersion: f64,
}

/// `T[c][m]`: power transmission of spectral mode `m` into output channel `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    entries: Vec<Vec<f64>>,
}

impl CrosstalkMatrix {
    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|c| (0..n).map(|m| if c == m { 1.0 } else { 0.0 }).collect()).collect();
        CrosstalkMatrix { entries }
    }

    pub fn from_rows(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("crosstalk", "matrix must be square"));
        }
        if entries.iter().flatten().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::invalid("crosstalk", "entries must lie in [0, 1]"));
        }
        Ok(CrosstalkMatrix { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, channel: usize, mode: usize) -> f64 {
        self.entries[channel][mode]
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.entries[channel]
    }

    pub fn column_sum(&self, mode: usize) -> f64 {
        self.entries.iter().map(|row| row[mode]).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CrosstalkMatrix { entries: self.entries.iter().map(|r| r.iter().map(|t| t * factor).collect()).collect() }
    }
}

/// Passband FWHM that yields `rejection_db` of suppression one `spacing` away.
pub fn passband_fwhm_for_rejection(spacing: f64, rejection_db: f64) -> f64 {
    let ln_suppression = rejection_db * std::f64::consts::LN_10 / 10.0;
    spacing * (FOUR_LN2 / ln_suppression).sqrt()
}

impl SsmmModel {
    /// Gaussian envelope, grid-centered, no explicit rejection.
    pub fn new(
        grid: SpectralModeGrid,
        passband_fwhm: f64,
        peak_coupling: f64,
        envelope_bandwidth: f64,
    ) -> Result<Self> {
        let model = SsmmModel {
            grid,
            passband_fwhm,
            peak_coupling,
            adjacent_rejection_db: None,
            envelope_bandwidth,
            envelope_shape: CouplingEnvelopeShape::Gaussian,
            envelope_center: None,
            focal_length: default_focal_length(),
            angular_dispersion: default_angular_dispersion(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_rejection_db(mut self, rejection_db: f64) -> Result<Self> {
        self.adjacent_rejection_db = Some(rejection_db);
        self.validate()?;
        Ok(self)
    }

    pub fn with_flat_envelope(mut self) -> Self {
        self.envelope_shape = CouplingEnvelopeShape::Flat;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(0.0..=1.0).contains(&self.peak_coupling) {
            return Err(Error::invalid("peak_coupling", format!("must lie in [0, 1], got {}", self.peak_coupling)));
        }
        if !(self.passband_fwhm > 0.0 && self.passband_fwhm.is_finite()) {
            return Err(Error::invalid("passband_fwhm", format!("must be positive, got {}", self.passband_fwhm)));
        }
        if let Some(db) = self.adjacent_rejection_db {
            if !(db > 0.0 && db.is_finite()) {
                return Err(Error::invalid("adjacent_rejection_db", format!("must be positive, got {db}")));
            }
        }
        if !(self.envelope_bandwidth > 0.0 && self.envelope_bandwidth.is_finite()) {
            return Err(Error::invalid("envelope_bandwidth", "must be positive"));
        }
        // Channel centers may sit up to half a spacing beyond the envelope's FWHM edges.
        if self.grid.span() > self.envelope_bandwidth + self.grid.spacing {
            return Err(Error::invalid(
                "envelope_bandwidth",
                format!(
                    "grid span {:.4e} Hz exceeds the device bandwidth {:.4e} Hz",
                    self.grid.span(),
                    self.envelope_bandwidth
                ),
            ));
        }
        let matrix = self.crosstalk_matrix();
        for m in 0..self.grid.mode_count {
            let sum = matrix.column_sum(m);
            if sum > 1.0 + 1e-12 {
                return Err(Error::invalid(
                    "passband_fwhm",
                    format!("mode {m} would be transmitted with total power {sum:.4}, exceeding 1"),
                ));
            }
        }
        Ok(())
    }

    pub fn effective_passband_fwhm(&self) -> f64 {
        match self.adjacent_rejection_db {
            Some(db) => passband_fwhm_for_rejection(self.grid.spacing, db),
            None => self.passband_fwhm,
        }
    }

    pub fn nominal_frequency(&self) -> f64 {
        self.envelope_center.unwrap_or(self.grid.center_frequency)
    }

    /// Normalized passband power response at `detuning` from a channel center.
    pub fn passband(&self, detuning: f64) -> f64 {
        let w = self.effective_passband_fwhm();
        (-FOUR_LN2 * detuning * detuning / (w * w)).exp()
    }

    /// Relative coupling efficiency of a channel centered at `frequency`, 1 at the nominal frequency.
    pub fn envelope(&self, frequency: f64) -> f64 {
        match self.envelope_shape {
            CouplingEnvelopeShape::Flat => 1.0,
            CouplingEnvelopeShape::Gaussian => {
                let d = frequency - self.nominal_frequency();
                let w = self.envelope_bandwidth;
                (-FOUR_LN2 * d * d / (w * w)).exp()
            }
        }
    }

    pub fn transmission(&self, channel: usize, frequency: f64) -> Result<f64> {
        if channel >= self.grid.mode_count {
            return Err(Error::ChannelOutOfRange { index: channel, mode_count: self.grid.mode_count });
        }
        Ok(self.transmission_unchecked(channel, frequency))
    }

    // The envelope is a property of each output fiber (its place under the
    // diffraction envelope), so it is evaluated at the channel center.
    fn transmission_unchecked(&self, channel: usize, frequency: f64) -> f64 {
        let center = self.grid.mode_offset(channel);
        self.peak_coupling * self.envelope(center) * self.passband(frequency - center)
    }

    pub fn crosstalk_matrix(&self) -> CrosstalkMatrix {
        let n = self.grid.mode_count;
        let offsets = self.grid.mode_offsets();
        let entries = (0..n).map(|c| offsets.iter().map(|&f| self.transmission_unchecked(c, f)).collect()).collect();
        CrosstalkMatrix { entries }
    }

    /// Transverse position of each channel's fiber in the lens focal plane (m).
    pub fn spatial_positions(&self) -> Vec<f64> {
        let nominal = self.nominal_frequency();
        self.grid
            .mode_offsets()
            .into_iter()
            .map(|f| self.focal_length * self.angular_dispersion * (f - nominal))
            .collect()
    }

    /// Same device with coupling loss, envelope and crosstalk removed.
    pub fn lossless(grid: SpectralModeGrid) -> Self {
        SsmmModel {
            grid,
            passband_fwhm: grid.spacing / 1e3,
            peak_coupling: 1.0,
            adjacent_rejection_db: None,
            envelope_bandwidth: grid.span() + grid.spacing,
            envelope_shape: CouplingEnvelopeShape::Flat,
            envelope_center: None,
            focal_length: default_focal_length(),
            angular_dispersion: default_angular_dispersion(),
        }
    }
}

/// Per-channel transmission sampled from `f_min` to `f_max` in steps of `step`.
pub fn frequency_response_scan(model: &SsmmModel, f_min: f64, f_max: f64, step: f64) -> Result<SweepResult> {
    if !(step > 0.0) || !(f_min < f_max) || !f_min.is_finite() || !f_max.is_finite() {
        return Err(Error::EmptyRange(format!("[{f_min}, {f_max}] with step {step}")));
    }
    let columns = (0..model.grid.mode_count).map(|c| format!("channel_{}_transmission", c + 1)).collect();
    let mut sweep = SweepResult::new("frequency_hz", columns);
    let count = ((f_max - f_min) / step + 1e-9).floor() as usize + 1;
    for i in 0..count {
        let f = f_min + step * i as f64;
        let values = (0..model.grid.mode_count).map(|c| model.transmission_unchecked(c, f)).collect();
        sweep.push(f, values);
    }
    Ok(sweep)
}
