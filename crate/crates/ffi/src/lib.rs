//! C ABI over the `spectral-hom` engines.
//!
//! Every function returns an [`ShStatus`]; results are written through out
//! pointers. On failure a description is available from
//! [`sh_last_error_message`] on the same thread. Handles are opaque and must
//! be released with their `_free` function. Channel indices are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spectral_hom::config::RunConfig;
use spectral_hom::hom::{fit_gaussian_dip, hom_dip_scan, CoincidenceEngine, InterferenceConfig, OutputMode};
use spectral_hom::keyrate::{enhancement_curve, ScenarioConfig};
use spectral_hom::repeater::{relay_rate, repeater_rate, LinkConfig};
use spectral_hom::Error;

/// Outcome of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    ConstraintViolation = 4,
    NumericalFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> ShStatus {
    match err {
        Error::Config { .. } => ShStatus::ConfigError,
        Error::ConstraintViolation { .. } => ShStatus::ConstraintViolation,
        Error::FitDidNotConverge { .. } | Error::TruncationExceeded { .. } | Error::OracleValidation(_) => {
            ShStatus::NumericalFailure
        }
        _ => ShStatus::InvalidArgument,
    }
}

fn fail(status: ShStatus, message: impl Into<String>) -> ShStatus {
    set_last_error(message.into());
    status
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), ShStatus>) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ShStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(ShStatus::Panic, "internal panic"),
    }
}

fn check(result: spectral_hom::Result<()>) -> Result<(), ShStatus> {
    result.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn lift<T>(result: spectral_hom::Result<T>) -> Result<T, ShStatus> {
    result.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), ShStatus> {
    if p.is_null() {
        Err(fail(ShStatus::NullPointer, format!("`{name}` is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, ShStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p).to_str().map_err(|_| fail(ShStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

/// Message for the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Two-station interference setup; opaque to C.
pub struct ShInterference {
    config: InterferenceConfig,
}

fn interference_from_run_config(config: RunConfig) -> Result<Box<ShInterference>, ShStatus> {
    let hom = config.hom.ok_or_else(|| fail(ShStatus::ConfigError, "configuration has no `hom` section"))?;
    Ok(Box::new(ShInterference { config: lift(hom.interference_config())? }))
}

/// Builds an interference setup from the `hom` section of a JSON run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_interference_from_json(json: *const c_char, out: *mut *mut ShInterference) -> ShStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_str(json, "json")?;
        let handle = interference_from_run_config(lift(RunConfig::from_json(text, "json"))?)?;
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Builds an interference setup from a built-in preset such as `hom-calibrated`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_interference_from_preset(name: *const c_char, out: *mut *mut ShInterference) -> ShStatus {
    guard(|| {
        non_null(out, "out")?;
        let name = read_str(name, "name")?;
        let (config, _) = lift(RunConfig::preset(name))?;
        *out = Box::into_raw(interference_from_run_config(config)?);
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from an `sh_interference_from_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sh_interference_free(handle: *mut ShInterference) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of spectral modes (and channels per SSMM).
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_interference_mode_count(handle: *const ShInterference, out: *mut usize) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(out, "out")?;
        *out = (*handle).config.mode_count();
        Ok(())
    })
}

/// Sets the delay of station B relative to A (s).
///
/// # Safety
/// `handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_interference_set_delay(handle: *mut ShInterference, delay_s: f64) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        let updated = (*handle).config.with_delay(delay_s);
        check(updated.validate())?;
        (*handle).config = updated;
        Ok(())
    })
}

/// Coincidence probability per pulse between SSMM 1 channel `c1` and SSMM 2 channel `c2`.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_coincidence_probability(
    handle: *const ShInterference,
    c1: usize,
    c2: usize,
    out: *mut f64,
) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(out, "out")?;
        let engine = lift(CoincidenceEngine::new(&(*handle).config))?;
        *out = lift(engine.coincidence(c1, c2))?;
        Ok(())
    })
}

/// Coincidence probability at `steps` delays from `t_min` to `t_max`.
///
/// Both output arrays must hold `capacity >= steps` values.
///
/// # Safety
/// `handle` must be valid; `delays_out` and `probabilities_out` must each
/// point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_hom_dip_scan(
    handle: *const ShInterference,
    t_min: f64,
    t_max: f64,
    steps: usize,
    c1: usize,
    c2: usize,
    delays_out: *mut f64,
    probabilities_out: *mut f64,
    capacity: usize,
) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(delays_out, "delays_out")?;
        non_null(probabilities_out, "probabilities_out")?;
        if capacity < steps {
            return Err(fail(ShStatus::BufferTooSmall, format!("need {steps} values, buffer holds {capacity}")));
        }
        let scan = lift(hom_dip_scan(&(*handle).config, (t_min, t_max), steps, &[(c1, c2)], &OutputMode::Probability))?;
        let delays = std::slice::from_raw_parts_mut(delays_out, steps);
        let values = std::slice::from_raw_parts_mut(probabilities_out, steps);
        for (i, row) in scan.sweep.rows.iter().enumerate() {
            delays[i] = row.x;
            values[i] = row.values[0];
        }
        Ok(())
    })
}

/// Result of a Gaussian dip fit `baseline * (1 - visibility * exp(-(t - center)^2 / (2 width^2)))`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShDipFit {
    pub baseline: f64,
    pub visibility: f64,
    pub center: f64,
    pub width: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Fits a Gaussian dip to `n` points.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sh_fit_dip(xs: *const f64, ys: *const f64, n: usize, out: *mut ShDipFit) -> ShStatus {
    guard(|| {
        non_null(xs, "xs")?;
        non_null(ys, "ys")?;
        non_null(out, "out")?;
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let fit = lift(fit_gaussian_dip(xs, ys))?;
        *out = ShDipFit {
            baseline: fit.baseline,
            visibility: fit.visibility,
            center: fit.center,
            width: fit.width,
            residual_norm: fit.residual_norm,
            iterations: fit.iterations,
        };
        Ok(())
    })
}

/// Elementary-link description for the repeater rate functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShLinkConfig {
    /// End-to-end distance (m).
    pub total_distance: f64,
    pub links: u32,
    /// Fiber attenuation (dB/m).
    pub loss_db_per_m: f64,
    /// Source repetition rate (Hz).
    pub source_rate: f64,
    pub modes: u64,
    /// Memory storage time (s).
    pub storage_time: f64,
    /// Speed of light in fiber (m/s).
    pub fiber_speed: f64,
    /// Additional per-attempt efficiency in [0, 1].
    pub link_efficiency: f64,
}

impl From<ShLinkConfig> for LinkConfig {
    fn from(c: ShLinkConfig) -> Self {
        LinkConfig {
            total_distance: c.total_distance,
            links: c.links,
            loss_db_per_m: c.loss_db_per_m,
            source_rate: c.source_rate,
            modes: c.modes,
            storage_time: c.storage_time,
            fiber_speed: c.fiber_speed,
            link_efficiency: c.link_efficiency,
        }
    }
}

/// Multiplexed repeater rate (Hz).
///
/// # Safety
/// `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_repeater_rate(config: *const ShLinkConfig, out: *mut f64) -> ShStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        *out = lift(repeater_rate(&(*config).into()))?;
        Ok(())
    })
}

/// Direct-transmission (relay) rate over the full distance (Hz).
///
/// # Safety
/// `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_relay_rate(config: *const ShLinkConfig, out: *mut f64) -> ShStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        *out = lift(relay_rate(&(*config).into()))?;
        Ok(())
    })
}

/// MDI-QKD scenario; opaque to C.
pub struct ShScenario {
    scenario: ScenarioConfig,
}

/// Loads one of `current`, `soa_coupling` or `soa_coupling_dense`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_scenario_from_preset(name: *const c_char, out: *mut *mut ShScenario) -> ShStatus {
    guard(|| {
        non_null(out, "out")?;
        let name = read_str(name, "name")?;
        let scenario = ScenarioConfig::presets()
            .into_iter()
            .find(|s| s.name.as_str() == name)
            .ok_or_else(|| fail(ShStatus::ConfigError, format!("unknown scenario `{name}`")))?;
        *out = Box::into_raw(Box::new(ShScenario { scenario }));
        Ok(())
    })
}

/// Releases a scenario; NULL is ignored.
///
/// # Safety
/// `handle` must come from [`sh_scenario_from_preset`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sh_scenario_free(handle: *mut ShScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Largest M the scenario's device supports.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_scenario_mode_limit(handle: *const ShScenario, out: *mut usize) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(out, "out")?;
        *out = (*handle).scenario.mode_limit();
        Ok(())
    })
}

/// Total key rate (bits/s) and enhancement over the single-mode reference for M = 1..=max_modes.
///
/// # Safety
/// `handle` must be valid; `rates_out` and `enhancement_out` must each point
/// to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_enhancement_curve(
    handle: *const ShScenario,
    max_modes: usize,
    rates_out: *mut f64,
    enhancement_out: *mut f64,
    capacity: usize,
) -> ShStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(rates_out, "rates_out")?;
        non_null(enhancement_out, "enhancement_out")?;
        if capacity < max_modes {
            return Err(fail(ShStatus::BufferTooSmall, format!("need {max_modes} values, buffer holds {capacity}")));
        }
        let curve = lift(enhancement_curve(&(*handle).scenario, max_modes))?;
        let rates = std::slice::from_raw_parts_mut(rates_out, max_modes);
        let enhancement = std::slice::from_raw_parts_mut(enhancement_out, max_modes);
        for (i, row) in curve.rows.iter().enumerate() {
            rates[i] = row.total_rate;
            enhancement[i] = row.enhancement;
        }
        Ok(())
    })
}
