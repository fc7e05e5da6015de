//! Analytic coincidence engine.
//!
//! A coherent state on each input of a balanced beam splitter leaves it as a
//! coherent state on each output, so the photon number reaching a detector is
//! Poissonian with a mean that depends only on the relative optical phase of
//! the two stations. For spectral mode `m` and time bin `k` the output
//! intensities are
//!
//! ```text
//! J±(φ) = ½ (|α|² + |β|² ± 2 κ Re(α* β e^{iφ}))
//! ```
//!
//! with `κ` the field overlap of the two wave packets. The non-overlapping
//! part of B's pulse still reaches the detectors, which keeps the total
//! energy fixed. Intensities of different spectral modes add at a detector;
//! different bins are orthogonal temporal modes. Click probabilities are then
//! averaged over the random phase with periodic trapezoidal quadrature, which
//! converges geometrically for these analytic integrands.

use num_complex::Complex64;

use super::{CoincidenceWindow, InterferenceConfig, PhaseModel};
use crate::error::{Error, Result};
use crate::photonic::{mode_amplitudes, Bin};
use crate::ssmm::CrosstalkMatrix;

/// A detector (behind SSMM `port + 1`, spatial channel `channel`) integrating `window`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionCell {
    pub port: usize,
    pub channel: usize,
    pub window: CoincidenceWindow,
}

impl DetectionCell {
    pub fn new(port: usize, channel: usize, window: CoincidenceWindow) -> Self {
        DetectionCell { port, channel, window }
    }
}

/// Singles and pairwise coincidence probabilities per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceResult {
    /// `singles[s][c]` for the detector behind SSMM `s+1`, channel `c`.
    pub singles: [Vec<f64>; 2],
    /// `p_cc[c1][c2]` between SSMM 1 channel `c1` and SSMM 2 channel `c2`.
    pub p_cc: Vec<Vec<f64>>,
}

impl CoincidenceResult {
    pub fn counts_per_second(&self, source_rate: f64) -> Vec<Vec<f64>> {
        self.p_cc.iter().map(|row| row.iter().map(|p| p * source_rate).collect()).collect()
    }
}

#[derive(Debug, Clone)]
struct BinTerms {
    /// Phase-independent mean photon number.
    constant: f64,
    /// Coefficient of `e^{iφ_m}` per spectral mode.
    coefficients: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct CoincidenceEngine {
    // terms[port][channel][bin]
    terms: [Vec<[BinTerms; 2]>; 2],
    dark: [Vec<f64>; 2],
    phase_model: PhaseModel,
    cos_table: Vec<f64>,
    window: CoincidenceWindow,
    mode_count: usize,
}

impl CoincidenceEngine {
    pub fn new(config: &InterferenceConfig) -> Result<Self> {
        config.validate()?;
        let matrices = [config.crosstalk(0), config.crosstalk(1)];
        Self::build(config, &matrices)
    }

    /// Use explicit crosstalk matrices instead of the SSMM models' own.
    pub fn with_crosstalk(config: &InterferenceConfig, matrices: [CrosstalkMatrix; 2]) -> Result<Self> {
        config.validate()?;
        for t in &matrices {
            if t.size() != config.mode_count() {
                return Err(Error::MismatchedGrids);
            }
        }
        Self::build(config, &matrices)
    }

    fn build(config: &InterferenceConfig, matrices: &[CrosstalkMatrix; 2]) -> Result<Self> {
        let n = config.mode_count();
        let kappa = config.interference_overlap()?;
        let amps_a = mode_amplitudes(&config.pulse_a);
        let amps_b = mode_amplitudes(&config.pulse_b);

        // Per (mode, bin): shared intensity and interference coefficient.
        let mut shared = vec![[0.0f64; 2]; n];
        let mut beat = vec![[Complex64::new(0.0, 0.0); 2]; n];
        for m in 0..n {
            for k in 0..2 {
                let (a, b) = (amps_a[m][k], amps_b[m][k]);
                shared[m][k] = 0.5 * (a.norm_sqr() + b.norm_sqr());
                beat[m][k] = a.conj() * b * kappa;
            }
        }

        let terms = [0usize, 1].map(|port| {
            let sign = if port == 0 { 1.0 } else { -1.0 };
            (0..n)
                .map(|c| {
                    let eta = config.detectors[port][c].efficiency;
                    let row = matrices[port].row(c);
                    [0usize, 1].map(|k| BinTerms {
                        constant: (0..n).map(|m| eta * row[m] * shared[m][k]).sum(),
                        coefficients: (0..n).map(|m| beat[m][k] * (sign * eta * row[m])).collect(),
                    })
                })
                .collect::<Vec<_>>()
        });
        let dark = [0usize, 1].map(|port| config.detectors[port].iter().map(|d| d.dark_click_probability).collect());
        let nodes = config.quadrature_nodes;
        let cos_table = (0..nodes).map(|j| (2.0 * std::f64::consts::PI * j as f64 / nodes as f64).cos()).collect();
        Ok(CoincidenceEngine {
            terms,
            dark,
            phase_model: config.phase_model,
            cos_table,
            window: config.window,
            mode_count: n,
        })
    }

    fn check(&self, cell: &DetectionCell) -> Result<()> {
        if cell.port > 1 {
            return Err(Error::invalid("port", format!("must be 0 or 1, got {}", cell.port)));
        }
        if cell.channel >= self.mode_count {
            return Err(Error::ChannelOutOfRange { index: cell.channel, mode_count: self.mode_count });
        }
        Ok(())
    }

    /// `(constant, per-mode coefficients)` of a cell's mean photon number.
    fn cell_terms(&self, cell: &DetectionCell) -> (f64, Vec<Complex64>) {
        let mut constant = 0.0;
        let mut coefficients = vec![Complex64::new(0.0, 0.0); self.mode_count];
        for bin in cell.window.bins() {
            let t = &self.terms[cell.port][cell.channel][bin.index()];
            constant += t.constant;
            for (acc, c) in coefficients.iter_mut().zip(&t.coefficients) {
                *acc += c;
            }
        }
        (constant, coefficients)
    }

    /// Expected photon number at a detector when B's phase is `phi` on every mode.
    pub fn mean_photon_number(&self, cell: &DetectionCell, phi: f64) -> Result<f64> {
        self.check(cell)?;
        let (constant, coefficients) = self.cell_terms(cell);
        let rotation = Complex64::from_polar(1.0, phi);
        Ok(constant + coefficients.iter().map(|c| (c * rotation).re).sum::<f64>())
    }

    /// `E[exp(-Re(Σ_m w_m e^{iφ_m}))]` under the configured phase model.
    fn phase_average(&self, coefficients: &[Complex64]) -> f64 {
        match self.phase_model {
            PhaseModel::Common => {
                let r = coefficients.iter().sum::<Complex64>().norm();
                self.cosine_average(r)
            }
            PhaseModel::IndependentPerMode => coefficients.iter().map(|w| self.cosine_average(w.norm())).product(),
        }
    }

    fn cosine_average(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        self.cos_table.iter().map(|c| (-r * c).exp()).sum::<f64>() / self.cos_table.len() as f64
    }

    /// Probability that every cell in `clicks` fires and no cell in `silent` does.
    pub fn event_probability(&self, clicks: &[DetectionCell], silent: &[DetectionCell]) -> Result<f64> {
        let all: Vec<&DetectionCell> = clicks.iter().chain(silent).collect();
        for (i, cell) in all.iter().enumerate() {
            self.check(cell)?;
            for other in &all[..i] {
                if other.port == cell.port
                    && other.channel == cell.channel
                    && windows_overlap(other.window, cell.window)
                {
                    return Err(Error::invalid("cells", "detection cells must not overlap"));
                }
            }
        }
        let p = match self.phase_model {
            PhaseModel::Common => self.event_probability_common(clicks, silent),
            PhaseModel::IndependentPerMode => self.event_probability_expanded(clicks, silent),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Direct quadrature of the click/no-click product over the shared phase.
    fn event_probability_common(&self, clicks: &[DetectionCell], silent: &[DetectionCell]) -> f64 {
        let prepared = |cell: &DetectionCell| {
            let (constant, coefficients) = self.cell_terms(cell);
            let w: Complex64 = coefficients.iter().sum();
            let log_no_dark = (-self.dark[cell.port][cell.channel]).ln_1p();
            (constant, w, log_no_dark)
        };
        let click_terms: Vec<_> = clicks.iter().map(prepared).collect();
        let silent_terms: Vec<_> = silent.iter().map(prepared).collect();
        let nodes = self.cos_table.len();
        let mut total = 0.0;
        for j in 0..nodes {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
            let rot = Complex64::from_polar(1.0, phi);
            let mut value = 1.0;
            let mut log_silent = 0.0;
            for &(constant, w, log_no_dark) in &click_terms {
                let lambda = (constant + (w * rot).re).max(0.0);
                value *= -(log_no_dark - lambda).exp_m1();
            }
            for &(constant, w, log_no_dark) in &silent_terms {
                let lambda = (constant + (w * rot).re).max(0.0);
                log_silent += log_no_dark - lambda;
            }
            total += value * log_silent.exp();
        }
        total / nodes as f64
    }

    /// Inclusion-exclusion over the clicking cells; each term factorizes over modes.
    fn event_probability_expanded(&self, clicks: &[DetectionCell], silent: &[DetectionCell]) -> f64 {
        let silent_terms: Vec<_> = silent.iter().map(|c| (self.cell_terms(c), self.dark[c.port][c.channel])).collect();
        let click_terms: Vec<_> = clicks.iter().map(|c| (self.cell_terms(c), self.dark[c.port][c.channel])).collect();
        let mut total = 0.0;
        for subset in 0u32..(1u32 << clicks.len()) {
            let mut constant = 0.0;
            let mut log_no_dark = 0.0;
            let mut coefficients = vec![Complex64::new(0.0, 0.0); self.mode_count];
            let chosen = click_terms
                .iter()
                .enumerate()
                .filter(|(i, _)| subset & (1 << i) != 0)
                .map(|(_, t)| t)
                .chain(silent_terms.iter());
            for ((c0, coefs), dark) in chosen {
                constant += c0;
                log_no_dark += (-dark).ln_1p();
                for (acc, c) in coefficients.iter_mut().zip(coefs) {
                    *acc += c;
                }
            }
            let sign = if subset.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * (log_no_dark - constant).exp() * self.phase_average(&coefficients);
        }
        total
    }

    pub fn click_probability(&self, cell: &DetectionCell) -> Result<f64> {
        self.event_probability(std::slice::from_ref(cell), &[])
    }

    /// Coincidence between SSMM 1 channel `c1` and SSMM 2 channel `c2` in the configured window.
    pub fn coincidence(&self, c1: usize, c2: usize) -> Result<f64> {
        let cells = [DetectionCell::new(0, c1, self.window), DetectionCell::new(1, c2, self.window)];
        self.event_probability(&cells, &[])
    }

    pub fn result(&self) -> Result<CoincidenceResult> {
        let n = self.mode_count;
        let singles = [0usize, 1].map(|port| {
            (0..n)
                .map(|c| self.click_probability(&DetectionCell::new(port, c, self.window)))
                .collect::<Result<Vec<_>>>()
        });
        let [s1, s2] = singles;
        let p_cc = (0..n)
            .map(|c1| (0..n).map(|c2| self.coincidence(c1, c2)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(CoincidenceResult { singles: [s1?, s2?], p_cc })
    }
}

fn windows_overlap(a: CoincidenceWindow, b: CoincidenceWindow) -> bool {
    Bin::ALL.iter().any(|&bin| a.contains(bin) && b.contains(bin))
}

/// Coincidence probability for one channel pair `(SSMM 1 channel, SSMM 2 channel)`.
pub fn coincidence_probability(config: &InterferenceConfig, pair: (usize, usize)) -> Result<f64> {
    CoincidenceEngine::new(config)?.coincidence(pair.0, pair.1)
}
