//! Delay and phase scans.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::engine::CoincidenceEngine;
use super::fit::{fit_gaussian_dip, DipFit};
use super::{CoincidenceWindow, InterferenceConfig};
use crate::error::{Error, Result};
use crate::sweep::{linspace, SweepResult};

/// What a dip scan reports at each delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputMode {
    /// Coincidence probability per pulse.
    Probability,
    /// Expected (or Poisson-sampled) counts over `accumulation_time` seconds.
    Counts { source_rate: f64, accumulation_time: f64, poisson_seed: Option<u64> },
}

/// A dip scan plus the channel pair behind each column.
#[derive(Debug, Clone, PartialEq)]
pub struct DipScan {
    pub sweep: SweepResult,
    pub pairs: Vec<(usize, usize)>,
}

impl DipScan {
    pub fn fits(&self) -> Result<Vec<DipFit>> {
        let xs = self.sweep.xs();
        (0..self.pairs.len()).map(|i| fit_gaussian_dip(&xs, &self.sweep.column(i))).collect()
    }
}

fn column_name(mode: &OutputMode, pair: (usize, usize)) -> String {
    let prefix = match mode {
        OutputMode::Probability => "coinc_prob_per_pulse",
        OutputMode::Counts { .. } => "coinc_counts",
    };
    format!("{prefix}_ch{}_ch{}", pair.0 + 1, pair.1 + 1)
}

/// Coincidences for each channel pair as B's delay sweeps `range` in `steps` points.
pub fn hom_dip_scan(
    config: &InterferenceConfig,
    range: (f64, f64),
    steps: usize,
    pairs: &[(usize, usize)],
    mode: &OutputMode,
) -> Result<DipScan> {
    if steps < 3 {
        return Err(Error::invalid("steps", format!("need at least 3 points, got {steps}")));
    }
    if !(range.0 < range.1) || !range.0.is_finite() || !range.1.is_finite() {
        return Err(Error::EmptyRange(format!("delay range [{}, {}]", range.0, range.1)));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("pairs", "no channel pairs requested"));
    }
    if let OutputMode::Counts { source_rate, accumulation_time, .. } = mode {
        if !(*source_rate > 0.0 && *accumulation_time > 0.0) {
            return Err(Error::invalid("source_rate", "counts mode needs a positive rate and accumulation time"));
        }
    }
    config.validate()?;
    let delays = linspace(range.0, range.1, steps);
    let rows = delays
        .par_iter()
        .enumerate()
        .map(|(index, &delay)| {
            let engine = CoincidenceEngine::new(&config.with_delay(delay))?;
            let probabilities = pairs.iter().map(|&(c1, c2)| engine.coincidence(c1, c2)).collect::<Result<Vec<_>>>()?;
            Ok(match *mode {
                OutputMode::Probability => probabilities,
                OutputMode::Counts { source_rate, accumulation_time, poisson_seed } => {
                    let expected = probabilities.iter().map(|p| p * source_rate * accumulation_time);
                    match poisson_seed {
                        None => expected.collect(),
                        Some(seed) => {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            rng.set_stream(index as u64);
                            expected.map(|mean| sample_poisson(mean, &mut rng)).collect()
                        }
                    }
                }
            })
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let mut sweep = SweepResult::new("delay_s", pairs.iter().map(|&p| column_name(mode, p)).collect());
    for (delay, values) in delays.into_iter().zip(rows) {
        sweep.push(delay, values);
    }
    Ok(DipScan { sweep, pairs: pairs.to_vec() })
}

fn sample_poisson(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(mean)
}

/// Visibility of the dip on `pair` as the early/late phase of B's qubit is varied.
///
/// B's late-bin amplitude on every mode is rotated by `e^{i theta}` relative to the
/// configured state, and the detection window spans both bins.
pub fn phase_scan(
    config: &InterferenceConfig,
    thetas: &[f64],
    range: (f64, f64),
    steps: usize,
    pair: (usize, usize),
) -> Result<SweepResult> {
    if thetas.is_empty() {
        return Err(Error::EmptyRange("no phase values".into()));
    }
    let rows = thetas
        .par_iter()
        .map(|&theta| {
            let mut cfg = config.clone();
            cfg.window = CoincidenceWindow::Both;
            let rot = Complex64::from_polar(1.0, theta);
            for mode in &mut cfg.pulse_b.modes {
                mode.weights.late *= rot;
            }
            let scan = hom_dip_scan(&cfg, range, steps, &[pair], &OutputMode::Probability)?;
            let fit = fit_gaussian_dip(&scan.sweep.xs(), &scan.sweep.column(0))?;
            Ok(vec![fit.visibility, fit.residual_norm])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sweep = SweepResult::new("theta_rad", vec!["visibility".into(), "fit_residual_norm".into()]);
    for (&theta, values) in thetas.iter().zip(rows) {
        sweep.push(theta, values);
    }
    Ok(sweep)
}
