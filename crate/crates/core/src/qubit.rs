//! Imperfect time-bin qubits built from measured signal and background counts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photonic::BinWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Measured signal counts in each bin, background counts and the relative phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBinQubitSpec {
    pub signal_early: f64,
    pub signal_late: f64,
    pub background: f64,
    #[serde(default)]
    pub theta: f64,
    pub basis: Basis,
}

impl TimeBinQubitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("signal_early", self.signal_early), ("signal_late", self.signal_late), ("background", self.background)]
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("counts must be finite and non-negative, got {v}")));
            }
        }
        if self.signal_early + self.signal_late <= 0.0 {
            return Err(Error::invalid("signal_early", "S_e + S_l must be positive"));
        }
        Ok(())
    }

    /// Z-basis state meant to be `|l>` with the given signal-to-background ratio in dB.
    pub fn late_with_snr_db(snr_db: f64) -> Self {
        let signal = 1.0e4;
        TimeBinQubitSpec {
            signal_early: 0.0,
            signal_late: signal,
            background: signal * 10f64.powf(-snr_db / 10.0),
            theta: 0.0,
            basis: Basis::Z,
        }
    }

    pub fn early_with_snr_db(snr_db: f64) -> Self {
        let late = Self::late_with_snr_db(snr_db);
        TimeBinQubitSpec { signal_early: late.signal_late, signal_late: 0.0, ..late }
    }

    /// X-basis state `(|e> + e^{i theta}|l>)/sqrt(2)` with background.
    pub fn superposition_with_snr_db(theta: f64, snr_db: f64) -> Self {
        let signal = 1.0e4;
        TimeBinQubitSpec {
            signal_early: signal / 2.0,
            signal_late: signal / 2.0,
            background: signal * 10f64.powf(-snr_db / 10.0),
            theta,
            basis: Basis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub amplitude_early: Complex64,
    pub amplitude_late: Complex64,
    /// Fraction of signal in the early bin.
    pub m: f64,
    /// Background relative to total signal.
    pub b: f64,
}

impl QubitState {
    pub fn weights(&self) -> BinWeights {
        BinWeights { early: self.amplitude_early, late: self.amplitude_late }
    }

    pub fn overlap(&self, other: &QubitState) -> f64 {
        (self.amplitude_early.conj() * other.amplitude_early + self.amplitude_late.conj() * other.amplitude_late).norm()
    }
}

pub fn build_state(spec: &TimeBinQubitSpec) -> Result<QubitState> {
    spec.validate()?;
    let total = spec.signal_early + spec.signal_late;
    let m = spec.signal_early / total;
    let b = spec.background / total;
    let norm = (1.0 + 2.0 * b).sqrt();
    let early = Complex64::new((m + b).sqrt() / norm, 0.0);
    // 1 - m + b >= 0 because m <= 1.
    let late = Complex64::from_polar((1.0 - m + b).sqrt() / norm, spec.theta);
    Ok(QubitState { amplitude_early: early, amplitude_late: late, m, b })
}

/// Knobs of the basis error composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// Fraction of the minority-bin signal counted as a Z error.
    #[serde(default)]
    pub z_leak: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel { z_leak: 0.0 }
    }
}

/// Z error of one state: background plus optional minority-bin leakage.
pub fn z_error(state: &QubitState, model: &ErrorModel) -> f64 {
    (state.b + state.m.min(1.0 - state.m) * model.z_leak) / (1.0 + 2.0 * state.b)
}

/// `(e_Z, e_X)` for a pair of states given the observed coherent-state HOM visibility.
///
/// `e_X = 1/2 - V |<a|b>|^2`, clipped to `[0, 1/2]`; `e_Z` averages the two states.
pub fn basis_error_rates(state_a: &QubitState, state_b: &QubitState, hom_visibility: f64) -> Result<(f64, f64)> {
    basis_error_rates_with(state_a, state_b, hom_visibility, &ErrorModel::default())
}

pub fn basis_error_rates_with(
    state_a: &QubitState,
    state_b: &QubitState,
    hom_visibility: f64,
    model: &ErrorModel,
) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&hom_visibility) {
        return Err(Error::invalid("hom_visibility", format!("must lie in [0, 0.5], got {hom_visibility}")));
    }
    let overlap = state_a.overlap(state_b);
    let e_x = (0.5 - hom_visibility * overlap * overlap).clamp(0.0, 0.5);
    let e_z = 0.5 * (z_error(state_a, model) + z_error(state_b, model));
    Ok((e_z.clamp(0.0, 0.5), e_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn spec(se: f64, sl: f64, bg: f64, theta: f64) -> TimeBinQubitSpec {
        TimeBinQubitSpec { signal_early: se, signal_late: sl, background: bg, theta, basis: Basis::Z }
    }

    #[test]
    fn pure_late_state() {
        let s = build_state(&spec(0.0, 1000.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.m, 0.0);
        assert_eq!(s.b, 0.0);
        assert_eq!(s.amplitude_early.norm(), 0.0);
        assert!((s.amplitude_late.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn balanced_state_is_plus() {
        let s = build_state(&spec(500.0, 500.0, 0.0, 0.0)).unwrap();
        assert!((s.amplitude_early.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude_late.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(s.amplitude_late.im.abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_imperfect_state() {
        let s = build_state(&spec(300.0, 600.0, 90.0, 0.7)).unwrap();
        assert!((s.m - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.b - 0.1).abs() < 1e-15);
        assert!((s.amplitude_early.norm_sqr() - (1.0 / 3.0 + 0.1) / 1.2).abs() < 1e-12);
        assert!((s.amplitude_late.norm_sqr() - (2.0 / 3.0 + 0.1) / 1.2).abs() < 1e-12);
        assert!((s.amplitude_early.norm_sqr() - 0.3611).abs() < 1e-4);
        assert!((s.amplitude_late.arg() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_is_rejected() {
        assert!(build_state(&spec(0.0, 0.0, 5.0, 0.0)).is_err());
        assert!(build_state(&spec(-1.0, 3.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn error_rate_limits() {
        let plus = build_state(&spec(1.0, 1.0, 0.0, 0.0)).unwrap();
        let (ez, ex) = basis_error_rates(&plus, &plus, 0.5).unwrap();
        assert_eq!((ez, ex), (0.0, 0.0));
        let (_, ex) = basis_error_rates(&plus, &plus, 0.0).unwrap();
        assert_eq!(ex, 0.5);
        let (_, ex) = basis_error_rates(&plus, &plus, 0.42).unwrap();
        assert!((ex - 0.08).abs() < 1e-12);
        assert!(basis_error_rates(&plus, &plus, 0.6).is_err());
    }

    #[test]
    fn background_drives_z_errors() {
        let late = build_state(&TimeBinQubitSpec::late_with_snr_db(20.0)).unwrap();
        let (ez, _) = basis_error_rates(&late, &late, 0.42).unwrap();
        assert!((ez - 0.01 / 1.02).abs() < 1e-12);
        let leaky = ErrorModel { z_leak: 1.0 };
        let mixed = build_state(&spec(100.0, 900.0, 0.0, 0.0)).unwrap();
        let (ez, _) = basis_error_rates_with(&mixed, &mixed, 0.42, &leaky).unwrap();
        assert!((ez - 0.1).abs() < 1e-12);
    }
}
