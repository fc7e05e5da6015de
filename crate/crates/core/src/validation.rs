//! Cross-checks of the analytic engines against independent computations.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::OracleSection;
use crate::error::{Error, Result};
use crate::hom::{
    fock_oracle_coincidence, CoincidenceEngine, CoincidenceWindow, DetectorModel, InterferenceConfig, PhaseModel,
};
use crate::photonic::{BinWeights, ModeExcitation, SpectralModeGrid, Station, TemporalEnvelope, WeakCoherentPulseSpec};
use crate::repeater::{monte_carlo_success, relay_rate, repeater_rate, LinkConfig};
use crate::ssmm::SsmmModel;
use crate::sweep::format_value;

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: &'static str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        OracleCheck { name, cases, max_error, tolerance, passed: max_error <= tolerance }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_ssmm(rng: &mut ChaCha8Rng, grid: SpectralModeGrid) -> Result<SsmmModel> {
    let rejection_db: f64 = 5.0 + 25.0 * rng.random::<f64>();
    let leak = 10f64.powf(-rejection_db / 10.0);
    let peak = rng.random::<f64>() / (1.0 + 2.0 * leak);
    SsmmModel::new(grid, 3.2e9, peak, 60e9)?.with_rejection_db(rejection_db)
}

fn random_pulse(rng: &mut ChaCha8Rng, station: Station, modes: usize, max_mu: f64) -> Result<WeakCoherentPulseSpec> {
    let modes = (0..modes)
        .map(|_| {
            let split = std::f64::consts::FRAC_PI_2 * rng.random::<f64>();
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            let weights = BinWeights::new(Complex64::new(split.cos(), 0.0), Complex64::from_polar(split.sin(), phase))?;
            Ok(ModeExcitation {
                mean_photon_number: max_mu * rng.random::<f64>(),
                weights,
                phase_offset: std::f64::consts::TAU * rng.random::<f64>(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = WeakCoherentPulseSpec { station, modes, envelope: TemporalEnvelope::default() };
    spec.validate()?;
    Ok(spec)
}

/// A random valid configuration with at most two modes and `mu <= max_mu` per mode.
pub fn random_interference_config(rng: &mut ChaCha8Rng, max_mu: f64) -> Result<InterferenceConfig> {
    let modes = if rng.random::<bool>() { 2 } else { 1 };
    let grid = SpectralModeGrid::new(0.0, 8e9, modes)?;
    let ssmm_1 = random_ssmm(rng, grid)?;
    let ssmm_2 = random_ssmm(rng, grid)?;
    let a = random_pulse(rng, Station::A, modes, max_mu)?;
    let b = random_pulse(rng, Station::B, modes, max_mu)?;
    let mut config = InterferenceConfig::new(a, b, ssmm_1, ssmm_2, DetectorModel::default())?;
    for row in config.detectors.iter_mut() {
        for det in row.iter_mut() {
            det.efficiency = 0.1 + 0.9 * rng.random::<f64>();
            det.dark_click_probability = 1e-3 * rng.random::<f64>();
        }
    }
    config.delta_t = 1.5e-9 * (2.0 * rng.random::<f64>() - 1.0);
    config.overlap_deficit = rng.random::<f64>();
    config.phase_model = if rng.random::<bool>() { PhaseModel::Common } else { PhaseModel::IndependentPerMode };
    config.window =
        [CoincidenceWindow::Early, CoincidenceWindow::Late, CoincidenceWindow::Both][rng.random_range(0..3)];
    config.validate()?;
    Ok(config)
}

fn all_pairs(modes: usize) -> Vec<(usize, usize)> {
    (0..modes).flat_map(|c1| (0..modes).map(move |c2| (c1, c2))).collect()
}

/// Largest |analytic - Fock| over every channel pair of `count` random configurations.
pub fn fock_equivalence(count: usize, n_max: usize, seed: u64) -> Result<f64> {
    let errors = (0..count)
        .into_par_iter()
        .map(|i| {
            let config = random_interference_config(&mut stream_rng(seed, i as u64), 0.2)?;
            let engine = CoincidenceEngine::new(&config)?;
            let mut worst = 0.0f64;
            for (c1, c2) in all_pairs(config.mode_count()) {
                let analytic = engine.coincidence(c1, c2)?;
                let fock = fock_oracle_coincidence(&config, (c1, c2), n_max)?;
                worst = worst.max((analytic - fock).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// Largest change in any coincidence probability when the quadrature order doubles.
pub fn quadrature_doubling(count: usize, seed: u64) -> Result<f64> {
    let errors = (0..count)
        .into_par_iter()
        .map(|i| {
            let config = random_interference_config(&mut stream_rng(seed, i as u64), 0.2)?;
            let coarse = CoincidenceEngine::new(&config)?;
            let fine = CoincidenceEngine::new(&InterferenceConfig {
                quadrature_nodes: 2 * config.quadrature_nodes,
                ..config.clone()
            })?;
            let mut worst = 0.0f64;
            for (c1, c2) in all_pairs(config.mode_count()) {
                worst = worst.max((coarse.coincidence(c1, c2)? - fine.coincidence(c1, c2)?).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// Distinguishable single-mode pulses: the closed form `(1 - e^-mu)^2` through both engines.
pub fn distinguishable_closed_form(n_max: usize) -> Result<f64> {
    let grid = SpectralModeGrid::new(0.0, 8e9, 1)?;
    let ssmm = SsmmModel::lossless(grid);
    let a = WeakCoherentPulseSpec::uniform(Station::A, 1, 0.1, BinWeights::late_only(), TemporalEnvelope::default())?;
    let b = WeakCoherentPulseSpec::uniform(Station::B, 1, 0.1, BinWeights::late_only(), TemporalEnvelope::default())?;
    let mut config = InterferenceConfig::new(a, b, ssmm.clone(), ssmm, DetectorModel::ideal())?;
    config.overlap_deficit = 0.0;
    let expected = (-(-0.1f64).exp_m1()).powi(2);
    let analytic = CoincidenceEngine::new(&config)?.coincidence(0, 0)?;
    let fock = fock_oracle_coincidence(&config, (0, 0), n_max)?;
    Ok((analytic - expected).abs().max((fock - expected).abs()))
}

fn repeater_reference() -> LinkConfig {
    LinkConfig {
        total_distance: 100e3,
        links: 2,
        loss_db_per_m: 0.2e-3,
        source_rate: 1.0,
        modes: 10,
        storage_time: 0.0,
        fiber_speed: 2e8,
        link_efficiency: 1.0,
    }
}

/// `(|simulated - analytic|, standard error)` for two 10 dB links with ten modes each.
pub fn repeater_monte_carlo(trials: u64, seed: u64) -> Result<(f64, f64)> {
    let cfg = repeater_reference();
    let analytic = repeater_rate(&cfg)?;
    let simulated = monte_carlo_success(&cfg, trials, seed)?;
    let standard_error = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    Ok(((simulated - analytic).abs(), standard_error))
}

/// Largest relative gap between the relay rate and the one-link, one-mode repeater rate.
pub fn relay_identity(count: usize, seed: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, u64::MAX);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let cfg = LinkConfig {
            total_distance: 1e3 + 499e3 * rng.random::<f64>(),
            links: 1,
            loss_db_per_m: 0.5e-3 * rng.random::<f64>(),
            source_rate: 1e3 + 1e9 * rng.random::<f64>(),
            modes: 1,
            storage_time: 1e-3 * rng.random::<f64>(),
            fiber_speed: 2e8,
            link_efficiency: rng.random::<f64>(),
        };
        let relay = relay_rate(&cfg)?;
        let repeater = repeater_rate(&cfg)?;
        if relay > 0.0 {
            worst = worst.max((relay - repeater).abs() / relay);
        }
    }
    Ok(worst)
}

pub fn run_oracle_suite(section: &OracleSection, seed: u64) -> Result<Vec<OracleCheck>> {
    let fock = fock_equivalence(section.fock_configs, section.n_max, seed)?;
    let doubling = quadrature_doubling(section.fock_configs, seed)?;
    let closed = distinguishable_closed_form(section.n_max)?;
    let (mc_gap, mc_se) = repeater_monte_carlo(section.monte_carlo_trials, seed)?;
    let relay = relay_identity(section.relay_configs, seed)?;
    Ok(vec![
        OracleCheck::new("fock_vs_analytic", section.fock_configs, fock, section.tolerance),
        OracleCheck::new("quadrature_doubling", section.fock_configs, doubling, 1e-10),
        OracleCheck::new("distinguishable_closed_form", 1, closed, 1e-9),
        OracleCheck::new("repeater_monte_carlo", 1, mc_gap, 3.0 * mc_se),
        OracleCheck::new("relay_identity", section.relay_configs, relay, 1e-12),
    ])
}

/// Plain-text table of check results.
pub fn format_table(checks: &[OracleCheck]) -> String {
    let mut out = format!("{:<28} {:>6} {:>12} {:>12}  result\n", "check", "cases", "max_error", "tolerance");
    for c in checks {
        out.push_str(&format!(
            "{:<28} {:>6} {:>12.3e} {:>12.3e}  {}\n",
            c.name,
            c.cases,
            c.max_error,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}

pub fn write_report<W: std::io::Write>(checks: &[OracleCheck], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["check", "cases", "max_abs_error", "tolerance", "passed"])?;
    for c in checks {
        w.write_record([
            c.name.to_string(),
            c.cases.to_string(),
            format_value(c.max_error),
            format_value(c.tolerance),
            c.passed.to_string(),
        ])?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_configs_are_reproducible() {
        let a = random_interference_config(&mut stream_rng(7, 3), 0.2).unwrap();
        let b = random_interference_config(&mut stream_rng(7, 3), 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_suite_passes() {
        let section =
            OracleSection { fock_configs: 6, monte_carlo_trials: 20_000, relay_configs: 50, ..Default::default() };
        let checks = run_oracle_suite(&section, 11).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{}", format_table(&checks));
    }
}
