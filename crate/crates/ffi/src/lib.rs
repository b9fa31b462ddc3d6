//! C ABI over the ebitsim library.
//!
//! Every fallible call returns an [`EbitStatus`] and writes its result
//! through an out-pointer. After a non-OK status,
//! [`ebit_last_error_message`] describes the failure on the calling thread.
//! Handles are opaque; free each one with its matching `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use libc::{c_char, size_t};

use ebitsim::constellnet::RateTimeSeries;
use ebitsim::earthgeo::{EarthModel, GeodeticPoint};
use ebitsim::linkbudget::{self, BeamWaistMode, LinkParams};
use ebitsim::orbitprop::{walker_polar, Constellation, RaanSpread};
use ebitsim::relaychain;
use ebitsim::scenarios::{run_scenario, Scenario};
use ebitsim::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidScenario = 3,
    Io = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Settable fields of a link parameter set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbitLinkField {
    WavelengthM = 0,
    BeamWaistM = 1,
    OgsApertureM = 2,
    SatApertureM = 3,
    EtaZenith = 4,
    RelayEfficiency = 5,
    PointingEfficiency = 6,
    SourceRateHz = 7,
    MaxDownlinkGroundKm = 8,
    /// Nonzero selects a per-link optimal ISL beam waist.
    OptimalWaist = 9,
}

/// Opaque link parameter set.
pub struct EbitLinkParams(LinkParams);

/// Opaque constellation.
pub struct EbitConstellation(Constellation);

/// Opaque sampled rate series.
pub struct EbitSeries(RateTimeSeries);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EbitSummary {
    pub max_rate_hz: f64,
    pub mean_all_hz: f64,
    pub mean_visible_hz: f64,
    pub samples: size_t,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> EbitStatus {
    match e {
        Error::InvalidInput(_) => EbitStatus::InvalidInput,
        Error::Scenario { .. } => EbitStatus::InvalidScenario,
        Error::Io { .. } => EbitStatus::Io,
    }
}

fn fail(status: EbitStatus, msg: impl Into<String>) -> EbitStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), EbitStatus>) -> EbitStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EbitStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(EbitStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: ebitsim::Result<T>) -> Result<T, EbitStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, EbitStatus> {
    p.as_mut().ok_or_else(|| fail(EbitStatus::NullPointer, "output pointer is null"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, EbitStatus> {
    p.as_ref().ok_or_else(|| fail(EbitStatus::NullPointer, "handle is null"))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, EbitStatus> {
    if p.is_null() {
        return Err(fail(EbitStatus::NullPointer, "string is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EbitStatus::InvalidInput, "string is not UTF-8"))
}

/// Copies the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ebit_last_error_message(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a parameter set holding the library defaults.
///
/// # Safety
/// `out_params` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_link_params_new(out_params: *mut *mut EbitLinkParams) -> EbitStatus {
    guard(|| {
        *out(out_params)? = Box::into_raw(Box::new(EbitLinkParams(LinkParams::default())));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`ebit_link_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebit_link_params_free(params: *mut EbitLinkParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sets one field; the updated set must still validate.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebit_link_params_set(params: *mut EbitLinkParams, field: EbitLinkField, value: f64) -> EbitStatus {
    guard(|| {
        let p = &mut out(params)?.0;
        let mut next = *p;
        match field {
            EbitLinkField::WavelengthM => next.wavelength_m = value,
            EbitLinkField::BeamWaistM => next.beam_waist_m = value,
            EbitLinkField::OgsApertureM => next.ogs_aperture_m = value,
            EbitLinkField::SatApertureM => next.sat_aperture_m = value,
            EbitLinkField::EtaZenith => next.eta_zenith = value,
            EbitLinkField::RelayEfficiency => next.relay_efficiency = value,
            EbitLinkField::PointingEfficiency => next.pointing_efficiency = value,
            EbitLinkField::SourceRateHz => next.source_rate_hz = value,
            EbitLinkField::MaxDownlinkGroundKm => next.max_downlink_ground_km = value,
            EbitLinkField::OptimalWaist => {
                next.beam_waist_mode = if value != 0.0 {
                    BeamWaistMode::PerLinkOptimal
                } else {
                    BeamWaistMode::Fixed
                }
            }
        }
        lift(next.validate())?;
        *p = next;
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_link_params_get(params: *const EbitLinkParams, field: EbitLinkField, value: *mut f64) -> EbitStatus {
    guard(|| {
        let p = &handle(params)?.0;
        *out(value)? = match field {
            EbitLinkField::WavelengthM => p.wavelength_m,
            EbitLinkField::BeamWaistM => p.beam_waist_m,
            EbitLinkField::OgsApertureM => p.ogs_aperture_m,
            EbitLinkField::SatApertureM => p.sat_aperture_m,
            EbitLinkField::EtaZenith => p.eta_zenith,
            EbitLinkField::RelayEfficiency => p.relay_efficiency,
            EbitLinkField::PointingEfficiency => p.pointing_efficiency,
            EbitLinkField::SourceRateHz => p.source_rate_hz,
            EbitLinkField::MaxDownlinkGroundKm => p.max_downlink_ground_km,
            EbitLinkField::OptimalWaist => (p.beam_waist_mode == BeamWaistMode::PerLinkOptimal) as u8 as f64,
        };
        Ok(())
    })
}

/// Gaussian-beam aperture capture fraction over `l_m` meters.
///
/// # Safety
/// `eta` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_eta_fs(l_m: f64, w0_m: f64, ra_m: f64, wavelength_m: f64, eta: *mut f64) -> EbitStatus {
    guard(|| {
        if !(l_m >= 0.0 && w0_m > 0.0 && ra_m > 0.0 && wavelength_m > 0.0) {
            return Err(fail(EbitStatus::InvalidInput, "need l >= 0 and positive waist, aperture, wavelength"));
        }
        *out(eta)? = linkbudget::eta_fs(l_m, w0_m, ra_m, wavelength_m);
        Ok(())
    })
}

/// Atmospheric transmittance for a satellite at `h_km` seen at slant range `l_km`.
///
/// # Safety
/// `eta` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_eta_atm(h_km: f64, l_km: f64, eta_zenith: f64, eta: *mut f64) -> EbitStatus {
    guard(|| {
        if !(h_km > 0.0 && l_km >= h_km && eta_zenith > 0.0 && eta_zenith <= 1.0) {
            return Err(fail(EbitStatus::InvalidInput, "need h > 0, l >= h and 0 < eta_zenith <= 1"));
        }
        *out(eta)? = linkbudget::eta_atm(h_km, l_km, eta_zenith, EarthModel::default().radius_km);
        Ok(())
    })
}

/// Full downlink transmittance including cutoff and horizon blocking.
///
/// # Safety
/// `params` must be a live handle and `eta` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_downlink_transmittance(params: *const EbitLinkParams, h_km: f64, l_km: f64, eta: *mut f64) -> EbitStatus {
    guard(|| {
        let p = &handle(params)?.0;
        if !(h_km > 0.0 && l_km >= 0.0) {
            return Err(fail(EbitStatus::InvalidInput, "need h > 0 and l >= 0"));
        }
        *out(eta)? = linkbudget::downlink_transmittance(h_km, l_km, p, &EarthModel::default()).transmittance;
        Ok(())
    })
}

/// Fewest satellites in a relay chain spanning `d_km` at altitude `h_km`.
///
/// # Safety
/// `params` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_min_relay_count(params: *const EbitLinkParams, d_km: f64, h_km: f64, count: *mut size_t) -> EbitStatus {
    guard(|| {
        let p = &handle(params)?.0;
        *out(count)? = lift(relaychain::min_relay_count(d_km, h_km, p, &EarthModel::default()))?;
        Ok(())
    })
}

/// Pair rate through the shortest feasible relay chain.
///
/// # Safety
/// `params` must be a live handle and `rate_hz` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_chain_rate(params: *const EbitLinkParams, d_km: f64, h_km: f64, rate_hz: *mut f64) -> EbitStatus {
    guard(|| {
        let p = &handle(params)?.0;
        let earth = EarthModel::default();
        let chain = lift(relaychain::build_chain(d_km, h_km, p, &earth))?;
        *out(rate_hz)? = relaychain::chain_rate(&chain, p, &earth);
        Ok(())
    })
}

/// Polar Walker grid. `full_spread` nonzero spreads planes over 360°
/// instead of 180°.
///
/// # Safety
/// `out_constellation` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_constellation_new_walker(
    planes: size_t,
    slots: size_t,
    altitude_km: f64,
    phase_offset_rad: f64,
    full_spread: i32,
    out_constellation: *mut *mut EbitConstellation,
) -> EbitStatus {
    guard(|| {
        let spread = if full_spread != 0 { RaanSpread::Full } else { RaanSpread::Half };
        let c = lift(walker_polar(planes, slots, altitude_km, phase_offset_rad, spread))?;
        *out(out_constellation)? = Box::into_raw(Box::new(EbitConstellation(c)));
        Ok(())
    })
}

/// Rotates every plane's RAAN by `delta_rad`.
///
/// # Safety
/// `constellation` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebit_constellation_rotate_raan(constellation: *mut EbitConstellation, delta_rad: f64) -> EbitStatus {
    guard(|| {
        let c = out(constellation)?;
        if !delta_rad.is_finite() {
            return Err(fail(EbitStatus::InvalidInput, "rotation must be finite"));
        }
        c.0 = c.0.clone().with_raan_offset(delta_rad);
        Ok(())
    })
}

/// # Safety
/// `constellation` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebit_constellation_free(constellation: *mut EbitConstellation) {
    if !constellation.is_null() {
        drop(Box::from_raw(constellation));
    }
}

/// Samples the best routed rate between two ground points every `step_s`
/// seconds over `[0, window_s)`.
///
/// # Safety
/// Handles must be live and `out_series` a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ebit_time_sweep(
    constellation: *const EbitConstellation,
    params: *const EbitLinkParams,
    lat1_deg: f64,
    lon1_deg: f64,
    lat2_deg: f64,
    lon2_deg: f64,
    window_s: f64,
    step_s: f64,
    out_series: *mut *mut EbitSeries,
) -> EbitStatus {
    guard(|| {
        let c = &handle(constellation)?.0;
        let p = &handle(params)?.0;
        let slot = out(out_series)?;
        let a = lift(GeodeticPoint::ground(lat1_deg, lon1_deg))?;
        let b = lift(GeodeticPoint::ground(lat2_deg, lon2_deg))?;
        lift(p.validate())?;
        let s = lift(ebitsim::constellnet::time_sweep(&a, &b, c, window_s, step_s, p, &EarthModel::default()))?;
        *slot = Box::into_raw(Box::new(EbitSeries(s)));
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebit_series_free(series: *mut EbitSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle and `summary` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebit_series_summary(series: *const EbitSeries, summary: *mut EbitSummary) -> EbitStatus {
    guard(|| {
        let s = &handle(series)?.0;
        *out(summary)? = EbitSummary {
            max_rate_hz: s.max_rate_hz,
            mean_all_hz: s.mean_all_hz,
            mean_visible_hz: s.mean_visible_hz,
            samples: s.rates_hz.len(),
        };
        Ok(())
    })
}

/// Sample `index`: time in seconds and rate in Hz.
///
/// # Safety
/// `series` must be a live handle; `t_s` and `rate_hz` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ebit_series_sample(series: *const EbitSeries, index: size_t, t_s: *mut f64, rate_hz: *mut f64) -> EbitStatus {
    guard(|| {
        let s = &handle(series)?.0;
        let (t_out, r_out) = (out(t_s)?, out(rate_hz)?);
        let (Some(&t), Some(&r)) = (s.times_s.get(index), s.rates_hz.get(index)) else {
            return Err(fail(
                EbitStatus::OutOfRange,
                format!("sample {index} out of range (len {})", s.rates_hz.len()),
            ));
        };
        *t_out = t;
        *r_out = r;
        Ok(())
    })
}

/// Runs a scenario given as JSON text. A non-null `out_dir` replaces the
/// scenario's output directory.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn ebit_run_scenario_json(scenario_json: *const c_char, out_dir: *const c_char) -> EbitStatus {
    guard(|| {
        let mut s = lift(Scenario::from_json_str(text(scenario_json)?))?;
        if !out_dir.is_null() {
            s.output.dir = PathBuf::from(text(out_dir)?);
        }
        lift(run_scenario(&s))?;
        Ok(())
    })
}
