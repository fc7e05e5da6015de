//! Analytic entanglement-distribution rates for relays and multiplexed repeaters.
//!
//! Fiber loss is in dB per meter and applied as `10^(-loss_db/10)` everywhere.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::SweepResult;

fn default_fiber_speed() -> f64 {
    2.0e8
}

fn default_link_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// End-to-end distance L (m).
    pub total_distance: f64,
    /// Number of elementary links n.
    pub links: u32,
    /// Fiber attenuation (dB/m).
    pub loss_db_per_m: f64,
    /// Source repetition rate (Hz).
    pub source_rate: f64,
    /// Multiplexed modes per elementary link.
    pub modes: u64,
    /// Memory storage time (s).
    #[serde(default)]
    pub storage_time: f64,
    #[serde(default = "default_fiber_speed")]
    pub fiber_speed: f64,
    /// Extra per-attempt efficiency (BSM, coupling); 1 for the ideal case.
    #[serde(default = "default_link_efficiency")]
    pub link_efficiency: f64,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("total_distance", self.total_distance),
            ("source_rate", self.source_rate),
            ("fiber_speed", self.fiber_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.links == 0 {
            return Err(Error::invalid("links", "need at least one elementary link"));
        }
        if !(self.loss_db_per_m >= 0.0 && self.loss_db_per_m.is_finite()) {
            return Err(Error::invalid("loss_db_per_m", "must be non-negative"));
        }
        if self.modes == 0 {
            return Err(Error::invalid("modes", "need at least one mode"));
        }
        if !(self.storage_time >= 0.0) {
            return Err(Error::invalid("storage_time", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.link_efficiency) {
            return Err(Error::invalid("link_efficiency", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Success probability of one attempt over one elementary link.
    pub fn attempt_success(&self) -> f64 {
        let link_loss_db = self.loss_db_per_m * self.total_distance / self.links as f64;
        self.link_efficiency * 10f64.powf(-link_loss_db / 10.0)
    }

    fn end_to_end_success(&self) -> f64 {
        self.link_efficiency * 10f64.powf(-self.loss_db_per_m * self.total_distance / 10.0)
    }
}

/// Direct transmission or a memoryless relay: `R_source 10^(-alpha L / 10)`.
pub fn relay_rate(cfg: &LinkConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.source_rate * cfg.end_to_end_success())
}

/// Probability that at least one of `modes` attempts succeeds.
fn multiplexed_success(p: f64, modes: u64) -> f64 {
    if modes == 1 {
        p
    } else {
        -((modes as f64) * (-p).ln_1p()).exp_m1()
    }
}

/// `R_source (1 - (1 - 10^(-alpha L / (10 n)))^M)^n`.
pub fn repeater_rate(cfg: &LinkConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(repeater_rate_unchecked(cfg))
}

fn repeater_rate_unchecked(cfg: &LinkConfig) -> f64 {
    let per_link = multiplexed_success(cfg.attempt_success(), cfg.modes);
    cfg.source_rate * per_link.powi(cfg.links as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageConstraints {
    /// Attempts that fit in the storage time, `t_store * R_source`.
    pub temporal_modes: f64,
    /// Heralding delay over one elementary link, `(L/n) / v_fiber`.
    pub fixed_time: f64,
    pub feasible: bool,
}

pub fn storage_constraints(cfg: &LinkConfig) -> Result<StorageConstraints> {
    cfg.validate()?;
    let fixed_time = cfg.total_distance / cfg.links as f64 / cfg.fiber_speed;
    Ok(StorageConstraints {
        temporal_modes: cfg.storage_time * cfg.source_rate,
        fixed_time,
        feasible: cfg.storage_time >= fixed_time,
    })
}

/// Simulated fraction of rounds in which every link heralds at least one success.
///
/// Independent check of [`repeater_rate`]: draws a Bernoulli outcome per mode per link.
pub fn monte_carlo_success(cfg: &LinkConfig, trials: u64, seed: u64) -> Result<f64> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let p = cfg.attempt_success();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        let all_links = (0..cfg.links).all(|_| (0..cfg.modes).any(|_| rng.random::<f64>() < p));
        if all_links {
            successes += 1;
        }
    }
    Ok(successes as f64 / trials as f64)
}

fn default_tbp_constant() -> f64 {
    1.0
}

fn default_duty_cycle() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

/// Pulse-duration sweep trading channel width against source rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TbpParams {
    /// Total spectral bandwidth available for channels (Hz).
    pub total_bandwidth: f64,
    /// Channel width times pulse duration.
    #[serde(default = "default_tbp_constant")]
    pub tbp_constant: f64,
    /// Pulse duration times repetition rate.
    #[serde(default = "default_duty_cycle")]
    pub duty_cycle: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    /// When false the link's own mode count is used at every duration.
    #[serde(default = "default_true")]
    pub bandwidth_constrained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TbpSweep {
    pub sweep: SweepResult,
    pub optimal_tau: f64,
    pub optimal_rate: f64,
    pub optimal_modes: u64,
}

/// Repeater rate over a log grid of pulse durations.
pub fn tbp_sweep(cfg: &LinkConfig, params: &TbpParams) -> Result<TbpSweep> {
    cfg.validate()?;
    if !(params.total_bandwidth > 0.0) {
        return Err(Error::invalid("total_bandwidth", "must be positive"));
    }
    if !(params.tbp_constant > 0.0) || !(params.duty_cycle > 0.0 && params.duty_cycle <= 1.0) {
        return Err(Error::invalid("tbp_constant", "tbp constant and duty cycle must be positive, duty at most 1"));
    }
    if params.points == 0 || !(params.tau_min > 0.0) || !(params.tau_min <= params.tau_max) {
        return Err(Error::EmptyRange(format!(
            "pulse durations [{}, {}] with {} points",
            params.tau_min, params.tau_max, params.points
        )));
    }
    let columns = ["channel_width_hz", "modes", "source_rate_hz", "rate_hz"].map(String::from).to_vec();
    let mut sweep = SweepResult::new("pulse_duration_s", columns);
    let (log_min, log_max) = (params.tau_min.ln(), params.tau_max.ln());
    let mut best: Option<(f64, f64, u64)> = None;
    for i in 0..params.points {
        let tau = if params.points == 1 {
            params.tau_min
        } else {
            (log_min + (log_max - log_min) * i as f64 / (params.points - 1) as f64).exp()
        };
        let width = params.tbp_constant / tau;
        let modes = if params.bandwidth_constrained {
            (params.total_bandwidth / width * (1.0 + 1e-12)).floor() as u64
        } else {
            cfg.modes
        };
        let source_rate = params.duty_cycle / tau;
        let rate = if modes == 0 { 0.0 } else { repeater_rate_unchecked(&LinkConfig { modes, source_rate, ..*cfg }) };
        sweep.push(tau, vec![width, modes as f64, source_rate, rate]);
        if best.is_none_or(|(_, r, _)| rate > r) {
            best = Some((tau, rate, modes));
        }
    }
    let (optimal_tau, optimal_rate, optimal_modes) = best.expect("at least one point");
    Ok(TbpSweep { sweep, optimal_tau, optimal_rate, optimal_modes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(distance: f64, links: u32, loss_db_per_km: f64, modes: u64) -> LinkConfig {
        LinkConfig {
            total_distance: distance,
            links,
            loss_db_per_m: loss_db_per_km / 1e3,
            source_rate: 80e6,
            modes,
            storage_time: 100e-6,
            fiber_speed: 2e8,
            link_efficiency: 1.0,
        }
    }

    #[test]
    fn lossless_relay_runs_at_source_rate() {
        assert_eq!(relay_rate(&link(50e3, 1, 0.0, 1)).unwrap(), 80e6);
    }

    #[test]
    fn ten_db_relay() {
        let rate = relay_rate(&link(50e3, 1, 0.2, 1)).unwrap();
        assert!((rate - 8e6).abs() < 1e-6);
    }

    #[test]
    fn two_link_repeater_with_ten_modes() {
        let rate = repeater_rate(&link(100e3, 2, 0.2, 10)).unwrap();
        let expected = 80e6 * (1.0 - 0.9f64.powi(10)).powi(2);
        assert!((rate / 80e6 - expected / 80e6).abs() < 1e-14);
        assert!((rate / 80e6 - 0.424219).abs() < 1e-6);
    }

    #[test]
    fn many_modes_saturate() {
        let rate = repeater_rate(&link(100e3, 2, 0.2, 10_000)).unwrap();
        assert!((rate / 80e6 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn relay_is_the_single_mode_single_link_repeater() {
        let cfg = link(73e3, 1, 0.17, 1);
        assert_eq!(relay_rate(&cfg).unwrap(), repeater_rate(&cfg).unwrap());
    }

    #[test]
    fn storage_examples() {
        let s = storage_constraints(&link(20e3, 1, 0.2, 1)).unwrap();
        assert!((s.fixed_time - 100e-6).abs() < 1e-15);
        assert!(s.feasible);
        assert!((s.temporal_modes - 8000.0).abs() < 1e-9);
        let s = storage_constraints(&link(80e3, 2, 0.2, 1)).unwrap();
        assert!((s.fixed_time - 200e-6).abs() < 1e-15);
        assert!(!s.feasible);
    }

    #[test]
    fn invalid_links_are_rejected() {
        assert!(repeater_rate(&link(1e3, 0, 0.2, 1)).is_err());
        assert!(repeater_rate(&link(1e3, 1, -0.2, 1)).is_err());
        assert!(repeater_rate(&link(1e3, 1, 0.2, 0)).is_err());
    }

    #[test]
    fn tbp_sweep_reports_an_optimum() {
        let params = TbpParams {
            total_bandwidth: 60e9,
            tbp_constant: 1.0,
            duty_cycle: 0.05,
            tau_min: 10e-12,
            tau_max: 10e-9,
            points: 61,
            bandwidth_constrained: true,
        };
        let out = tbp_sweep(&link(100e3, 2, 0.2, 1), &params).unwrap();
        assert_eq!(out.sweep.len(), 61);
        let rates = out.sweep.column(3);
        assert_eq!(out.optimal_rate, rates.iter().cloned().fold(0.0, f64::max));
        assert!(out.optimal_modes >= 1);
        let empty = TbpParams { points: 0, ..params };
        assert!(matches!(tbp_sweep(&link(100e3, 2, 0.2, 1), &empty), Err(Error::EmptyRange(_))));
    }
}
