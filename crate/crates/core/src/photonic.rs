//! Spectral and temporal mode arithmetic shared by every engine.
//!
//! Frequencies are detunings in Hz relative to the common laser carrier,
//! durations are in seconds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equally spaced spectral channels, symmetric about `center_frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModeGrid {
    pub center_frequency: f64,
    pub spacing: f64,
    pub mode_count: usize,
}

impl SpectralModeGrid {
    pub fn new(center_frequency: f64, spacing: f64, mode_count: usize) -> Result<Self> {
        let grid = SpectralModeGrid { center_frequency, spacing, mode_count };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::invalid("spacing", format!("must be positive, got {}", self.spacing)));
        }
        if self.mode_count == 0 {
            return Err(Error::invalid("mode_count", "must be at least 1"));
        }
        if !self.center_frequency.is_finite() {
            return Err(Error::invalid("center_frequency", "must be finite"));
        }
        Ok(())
    }

    /// Detuning of mode `index`; mode 0 is the reddest.
    pub fn mode_offset(&self, index: usize) -> f64 {
        let half = (self.mode_count as f64 - 1.0) / 2.0;
        self.center_frequency + (index as f64 - half) * self.spacing
    }

    pub fn mode_offsets(&self) -> Vec<f64> {
        (0..self.mode_count).map(|i| self.mode_offset(i)).collect()
    }

    /// Distance between the outermost channel centers.
    pub fn span(&self) -> f64 {
        (self.mode_count as f64 - 1.0) * self.spacing
    }

    /// Mode indices sorted by distance from the grid center, red side first on ties.
    pub fn center_outward_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.mode_count).collect();
        let half = (self.mode_count as f64 - 1.0) / 2.0;
        order.sort_by(|&a, &b| {
            let da = (a as f64 - half).abs();
            let db = (b as f64 - half).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeShape {
    #[default]
    Gaussian,
}

/// Temporal shape of one time bin and the early/late bin separation.
///
/// `fwhm` is the full width at half maximum of the Gaussian field-amplitude
/// envelope, so the rms width `sigma()` is also the rms width of the HOM dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalEnvelope {
    #[serde(default)]
    pub shape: EnvelopeShape,
    pub fwhm: f64,
    pub bin_separation: f64,
}

impl TemporalEnvelope {
    pub fn gaussian(fwhm: f64, bin_separation: f64) -> Result<Self> {
        let env = TemporalEnvelope { shape: EnvelopeShape::Gaussian, fwhm, bin_separation };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(Error::invalid("fwhm", format!("must be positive, got {}", self.fwhm)));
        }
        if !(self.bin_separation > self.fwhm) {
            return Err(Error::invalid(
                "bin_separation",
                format!("must exceed the pulse fwhm ({} <= {})", self.bin_separation, self.fwhm),
            ));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }
}

impl Default for TemporalEnvelope {
    fn default() -> Self {
        TemporalEnvelope { shape: EnvelopeShape::Gaussian, fwhm: 625e-12, bin_separation: 2.5e-9 }
    }
}

/// Inner product of two normalized Gaussian envelopes offset by `delta_t`.
pub fn temporal_overlap(envelope: &TemporalEnvelope, delta_t: f64) -> Result<f64> {
    if !(envelope.fwhm > 0.0 && envelope.fwhm.is_finite()) {
        return Err(Error::invalid("fwhm", format!("must be positive, got {}", envelope.fwhm)));
    }
    let sigma = envelope.sigma();
    Ok((-(delta_t * delta_t) / (4.0 * sigma * sigma)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Station {
    A,
    B,
}

/// Time bins of a time-bin qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    Early,
    Late,
}

impl Bin {
    pub const ALL: [Bin; 2] = [Bin::Early, Bin::Late];

    pub fn index(self) -> usize {
        match self {
            Bin::Early => 0,
            Bin::Late => 1,
        }
    }
}

/// Complex amplitude weights of the early and late bins, `|e|^2 + |l|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinWeights {
    pub early: Complex64,
    pub late: Complex64,
}

impl BinWeights {
    pub fn new(early: Complex64, late: Complex64) -> Result<Self> {
        let norm = early.norm_sqr() + late.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("bin_weights", format!("squared magnitudes sum to {norm}, expected 1")));
        }
        Ok(BinWeights { early, late })
    }

    pub fn early_only() -> Self {
        BinWeights { early: Complex64::new(1.0, 0.0), late: Complex64::new(0.0, 0.0) }
    }

    pub fn late_only() -> Self {
        BinWeights { early: Complex64::new(0.0, 0.0), late: Complex64::new(1.0, 0.0) }
    }

    /// `(|e> + e^{i theta}|l>)/sqrt(2)`
    pub fn superposition(theta: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        BinWeights { early: Complex64::new(h, 0.0), late: Complex64::from_polar(h, theta) }
    }

    pub fn get(&self, bin: Bin) -> Complex64 {
        match bin {
            Bin::Early => self.early,
            Bin::Late => self.late,
        }
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.early, self.late]
    }
}

/// Excitation of a single spectral mode by one station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeExcitation {
    pub mean_photon_number: f64,
    pub weights: BinWeights,
    pub phase_offset: f64,
}

/// A phase-randomized weak coherent pulse train from one station, one entry per grid mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakCoherentPulseSpec {
    pub station: Station,
    pub modes: Vec<ModeExcitation>,
    pub envelope: TemporalEnvelope,
}

impl WeakCoherentPulseSpec {
    /// Same mean photon number and bin weights on every mode, zero phase offsets.
    pub fn uniform(
        station: Station,
        mode_count: usize,
        mean_photon_number: f64,
        weights: BinWeights,
        envelope: TemporalEnvelope,
    ) -> Result<Self> {
        let modes = vec![ModeExcitation { mean_photon_number, weights, phase_offset: 0.0 }; mode_count];
        let spec = WeakCoherentPulseSpec { station, modes, envelope };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_phase_offsets(mut self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.modes.len() {
            return Err(Error::invalid(
                "phase_offsets",
                format!("expected {} entries, got {}", self.modes.len(), offsets.len()),
            ));
        }
        for (mode, &offset) in self.modes.iter_mut().zip(offsets) {
            mode.phase_offset = offset;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.envelope.validate()?;
        for mode in &self.modes {
            if !(mode.mean_photon_number >= 0.0 && mode.mean_photon_number.is_finite()) {
                return Err(Error::invalid(
                    "mean_photon_number",
                    format!("must be finite and non-negative, got {}", mode.mean_photon_number),
                ));
            }
            BinWeights::new(mode.weights.early, mode.weights.late)?;
        }
        Ok(())
    }
}

/// Coherent amplitude of every (mode, bin): `sqrt(mu_m) * w_k * exp(i dtheta_m)`.
pub fn mode_amplitudes(spec: &WeakCoherentPulseSpec) -> Vec<[Complex64; 2]> {
    spec.modes
        .iter()
        .map(|m| {
            let scale = Complex64::from_polar(m.mean_photon_number.sqrt(), m.phase_offset);
            [scale * m.weights.early, scale * m.weights.late]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn overlap_is_one_at_zero_delay() {
        let env = TemporalEnvelope::default();
        assert_eq!(temporal_overlap(&env, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn overlap_vanishes_far_from_the_dip() {
        let env = TemporalEnvelope::default();
        assert!(temporal_overlap(&env, 20.0 * env.fwhm).unwrap() < 1e-12);
    }

    #[test]
    fn overlap_rejects_non_positive_width() {
        let env = TemporalEnvelope { fwhm: 0.0, ..TemporalEnvelope::default() };
        assert!(matches!(temporal_overlap(&env, 1e-12), Err(Error::InvalidParameter { name: "fwhm", .. })));
    }

    #[test]
    fn overlap_is_even_bounded_and_monotone() {
        let env = TemporalEnvelope::default();
        let mut prev = 1.0;
        for i in 0..1000 {
            let dt = i as f64 * 3e-12;
            let plus = temporal_overlap(&env, dt).unwrap();
            let minus = temporal_overlap(&env, -dt).unwrap();
            assert_eq!(plus, minus);
            assert!((0.0..=1.0).contains(&plus));
            assert!(plus <= prev);
            prev = plus;
        }
    }

    #[test]
    fn envelope_requires_resolvable_bins() {
        assert!(TemporalEnvelope::gaussian(625e-12, 500e-12).is_err());
        assert!(TemporalEnvelope::gaussian(-1.0, 1e-9).is_err());
        assert!(TemporalEnvelope::gaussian(625e-12, 1e-9).is_ok());
    }

    #[test]
    fn grid_offsets_are_symmetric_and_distinct() {
        let grid = SpectralModeGrid::new(0.0, 8e9, 2).unwrap();
        assert_eq!(grid.mode_offsets(), vec![-4e9, 4e9]);
        let grid = SpectralModeGrid::new(1e9, 3.2e9, 7).unwrap();
        let offsets = grid.mode_offsets();
        for i in 0..7 {
            assert!((offsets[i] - 1e9 + offsets[6 - i] - 1e9).abs() < 1e-3);
        }
        assert!(offsets.windows(2).all(|w| w[1] > w[0]));
        assert!(SpectralModeGrid::new(0.0, 0.0, 3).is_err());
        assert!(SpectralModeGrid::new(0.0, 1e9, 0).is_err());
    }

    #[test]
    fn center_outward_order() {
        let grid = SpectralModeGrid::new(0.0, 8e9, 7).unwrap();
        assert_eq!(grid.center_outward_order(), vec![3, 2, 4, 1, 5, 0, 6]);
        let grid = SpectralModeGrid::new(0.0, 3.2e9, 4).unwrap();
        assert_eq!(grid.center_outward_order(), vec![1, 2, 0, 3]);
    }

    fn single(mu: f64, weights: BinWeights, phase: f64) -> WeakCoherentPulseSpec {
        WeakCoherentPulseSpec::uniform(Station::A, 1, mu, weights, TemporalEnvelope::default())
            .unwrap()
            .with_phase_offsets(&[phase])
            .unwrap()
    }

    #[test]
    fn late_bin_amplitude() {
        let amps = mode_amplitudes(&single(0.1, BinWeights::late_only(), 0.0));
        assert_eq!(amps[0][0], Complex64::new(0.0, 0.0));
        assert!((amps[0][1] - Complex64::new(0.1f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_amplitudes() {
        let amps = mode_amplitudes(&single(0.0, BinWeights::superposition(0.3), 1.0));
        assert!(amps[0].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn superposition_with_pi_offset() {
        let w = BinWeights::new(Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
        let amps = mode_amplitudes(&single(0.1, w, PI));
        for a in amps[0] {
            assert!((a.norm() - 0.05f64.sqrt()).abs() < 1e-15);
            assert!((a.arg().abs() - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_weights_are_rejected() {
        assert!(BinWeights::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }
}
