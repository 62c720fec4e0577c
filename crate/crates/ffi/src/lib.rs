//! C interface to qpulse.
//!
//! Every function returns a [`QpStatus`]; outputs go through pointer
//! arguments. On failure the message is kept per thread and can be read with
//! [`qp_last_error`]. Handles are opaque and must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use num_complex::Complex64 as C64;
use qpulse::config::{preset, validate_config, RunConfig, Scenario};
use qpulse::demux::{apply_demux, reduced_density_matrix, solve_demux_angles, DemuxOptions, RdmMethod, SupermodeBasis};
use qpulse::density::FockDensityMatrix;
use qpulse::export::{write_run, RhoFile};
use qpulse::mps::{snapshot, VidalMPS};
use qpulse::phasespace::{entanglement_negativity, wigner, wigner_negativity_volume, GridSpec, NegativityOptions};
use qpulse::scenario::{run_scenario, RunResult};
use qpulse::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Capacity = 4,
    Numerical = 5,
    Undefined = 6,
    StepSize = 7,
    Inconsistency = 8,
    Degeneracy = 9,
    Layout = 10,
    BondExplosion = 11,
    Quadrature = 12,
    InvalidState = 13,
    Format = 14,
    Io = 15,
    OutOfRange = 16,
    BufferTooSmall = 17,
    Panic = 99,
}

/// Run configuration.
pub struct QpConfig(RunConfig);
/// Finished run with its analysis.
pub struct QpRun(RunResult);
/// Matrix product state.
pub struct QpMps(VidalMPS);
/// One- or two-mode density matrix.
pub struct QpDensity(FockDensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Validation(_) => QpStatus::Validation,
            Error::Capacity { .. } => QpStatus::Capacity,
            Error::Numerical { .. } => QpStatus::Numerical,
            Error::Undefined(_) => QpStatus::Undefined,
            Error::StepSize { .. } => QpStatus::StepSize,
            Error::Inconsistency { .. } => QpStatus::Inconsistency,
            Error::Degeneracy { .. } => QpStatus::Degeneracy,
            Error::Layout(_) => QpStatus::Layout,
            Error::BondExplosion { .. } => QpStatus::BondExplosion,
            Error::Quadrature(_) => QpStatus::Quadrature,
            Error::InvalidState(_) => QpStatus::InvalidState,
            Error::Format(_) | Error::Json(_) => QpStatus::Format,
            Error::Io(_) => QpStatus::Io,
        };
        Failure(code, e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> QpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QpStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(QpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(QpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    put(out, Box::into_raw(Box::new(value)), "output handle")
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_config_from_toml(toml: *const c_char, out: *mut *mut QpConfig) -> QpStatus {
    guard(|| {
        let cfg = validate_config(str_arg(toml, "toml")?)?;
        put_handle(out, QpConfig(cfg))
    })
}

/// Default configuration of a named scenario (`kerr_soliton`,
/// `second_order_soliton`, `simulton`, `custom`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_config_preset(name: *const c_char, out: *mut *mut QpConfig) -> QpStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let s: Scenario = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| Failure(QpStatus::Validation, format!("unknown scenario '{name}'")))?;
        put_handle(out, QpConfig(preset(s)))
    })
}

/// Serialize a configuration to TOML. The string must be released with
/// [`qp_string_free`].
///
/// # Safety
/// `cfg` must be a live config handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_config_to_toml(cfg: *const QpConfig, out: *mut *mut c_char) -> QpStatus {
    guard(|| {
        let text = ref_arg(cfg, "cfg")?.0.to_toml()?;
        let c = CString::new(text).map_err(|e| Failure(QpStatus::Format, e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_config_free(cfg: *mut QpConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Run the configured scenario. Trajectories run in parallel unless the
/// config disables it.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_run(cfg: *const QpConfig, out: *mut *mut QpRun) -> QpStatus {
    guard(|| {
        let result = run_scenario(&ref_arg(cfg, "cfg")?.0)?;
        put_handle(out, QpRun(result))
    })
}

/// Write the run directory (manifest, series, densities, ρ files).
///
/// # Safety
/// `run` must be a live run handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn qp_run_write(run: *const QpRun, dir: *const c_char) -> QpStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        write_run(&PathBuf::from(str_arg(dir, "dir")?), &run.0)?;
        Ok(())
    })
}

/// # Safety
/// `run` must be a live run handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_run_snapshot_count(run: *const QpRun, out: *mut usize) -> QpStatus {
    guard(|| put(out, ref_arg(run, "run")?.0.snapshots.len(), "out"))
}

/// Scalar diagnostics of sample `k`. `wigner_negativity` receives the FH
/// value; `entanglement` is NaN for single-mode runs. Any output may be null.
///
/// # Safety
/// `run` must be a live run handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_run_snapshot(
    run: *const QpRun,
    k: usize,
    t: *mut f64,
    purity: *mut f64,
    wigner_negativity: *mut f64,
    entanglement: *mut f64,
) -> QpStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let s = run.0.snapshots.get(k).ok_or_else(|| {
            Failure(QpStatus::OutOfRange, format!("snapshot {k} of {}", run.0.snapshots.len()))
        })?;
        for (p, v) in [
            (t, s.t),
            (purity, s.purity),
            (wigner_negativity, s.wigner_negativity[0]),
            (entanglement, s.entanglement_negativity.unwrap_or(f64::NAN)),
        ] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Copy of the averaged ρ_S at sample `k`.
///
/// # Safety
/// `run` must be a live run handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_run_snapshot_density(run: *const QpRun, k: usize, out: *mut *mut QpDensity) -> QpStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let s = run.0.snapshots.get(k).ok_or_else(|| {
            Failure(QpStatus::OutOfRange, format!("snapshot {k} of {}", run.0.snapshots.len()))
        })?;
        put_handle(out, QpDensity(s.rho.clone()))
    })
}

/// Copy of the final MPS of trajectory 0.
///
/// # Safety
/// `run` must be a live run handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_run_final_state(run: *const QpRun, out: *mut *mut QpMps) -> QpStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        put_handle(out, QpMps(run.0.final_state.clone()))
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_run_free(run: *mut QpRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Load an MPS snapshot file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_mps_load(path: *const c_char, out: *mut *mut QpMps) -> QpStatus {
    guard(|| {
        let mps = snapshot::load(&PathBuf::from(str_arg(path, "path")?))?;
        put_handle(out, QpMps(mps))
    })
}

/// # Safety
/// `mps` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qp_mps_save(mps: *const QpMps, path: *const c_char) -> QpStatus {
    guard(|| {
        let mps = ref_arg(mps, "mps")?;
        snapshot::save(&mps.0, &PathBuf::from(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `mps` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_mps_site_count(mps: *const QpMps, out: *mut usize) -> QpStatus {
    guard(|| put(out, ref_arg(mps, "mps")?.0.n_sites(), "out"))
}

/// Local photon numbers ⟨n_m⟩ of every site.
///
/// # Safety
/// `mps` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qp_mps_photon_numbers(mps: *const QpMps, buf: *mut f64, len: usize) -> QpStatus {
    guard(|| {
        let mps = &ref_arg(mps, "mps")?.0;
        let n = mps.n_sites();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < n {
            return Err(Failure(QpStatus::BufferTooSmall, format!("need {n} values, got {len}")));
        }
        for m in 0..n {
            buf.add(m).write(mps.local_number(m));
        }
        Ok(())
    })
}

/// # Safety
/// `mps` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_mps_free(mps: *mut QpMps) {
    if !mps.is_null() {
        drop(Box::from_raw(mps));
    }
}

/// Demultiplex `n_modes` supermodes and return their joint density matrix.
///
/// `modes` holds `n_modes · n_sites` complex amplitudes as interleaved
/// (re, im) pairs, mode-major. The input state is not modified.
/// `cutoff` of 0 pads to the largest local dimension.
///
/// # Safety
/// `mps` must be a live handle, `modes` must hold `2·n_modes·n_sites`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_demux(
    mps: *const QpMps,
    modes: *const f64,
    n_modes: usize,
    n_sites: usize,
    cutoff: usize,
    out: *mut *mut QpDensity,
) -> QpStatus {
    guard(|| {
        let mps = ref_arg(mps, "mps")?;
        if modes.is_null() {
            return Err(null("modes"));
        }
        let raw = std::slice::from_raw_parts(modes, 2 * n_modes * n_sites);
        let targets: Vec<Vec<C64>> = (0..n_modes)
            .map(|s| (0..n_sites).map(|m| C64::new(raw[2 * (s * n_sites + m)], raw[2 * (s * n_sites + m) + 1])).collect())
            .collect();
        let basis = SupermodeBasis::new(targets)?;
        let plan = solve_demux_angles(&basis)?;
        let mut state = mps.0.clone();
        apply_demux(&mut state, &plan, DemuxOptions { cutoff: (cutoff > 0).then_some(cutoff) })?;
        let rho = reduced_density_matrix(&state, n_modes, None, RdmMethod::Contraction)?;
        put_handle(out, QpDensity(rho))
    })
}

/// Load a ρ JSON file written by a run or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_load(path: *const c_char, out: *mut *mut QpDensity) -> QpStatus {
    guard(|| {
        let file = RhoFile::load(&PathBuf::from(str_arg(path, "path")?))?;
        put_handle(out, QpDensity(FockDensityMatrix::from_json(&file.rho)?))
    })
}

/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_mode_count(rho: *const QpDensity, out: *mut usize) -> QpStatus {
    guard(|| put(out, ref_arg(rho, "rho")?.0.n_modes(), "out"))
}

/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_purity(rho: *const QpDensity, out: *mut f64) -> QpStatus {
    guard(|| put(out, ref_arg(rho, "rho")?.0.purity(), "out"))
}

/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_mean_photons(rho: *const QpDensity, mode: usize, out: *mut f64) -> QpStatus {
    guard(|| {
        let rho = &ref_arg(rho, "rho")?.0;
        if mode >= rho.n_modes() {
            return Err(Failure(QpStatus::OutOfRange, format!("mode {mode} of {}", rho.n_modes())));
        }
        put(out, rho.mean_photons(mode), "out")
    })
}

/// Reduced state of one mode of a two-mode density matrix.
///
/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_partial_trace(rho: *const QpDensity, keep: usize, out: *mut *mut QpDensity) -> QpStatus {
    guard(|| {
        let reduced = ref_arg(rho, "rho")?.0.partial_trace(keep)?;
        put_handle(out, QpDensity(reduced))
    })
}

/// Doubled negative volume ∫∫(|W| − W) dx dp of a single-mode state.
///
/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_wigner_negativity(rho: *const QpDensity, out: *mut f64) -> QpStatus {
    guard(|| {
        let v = wigner_negativity_volume(&ref_arg(rho, "rho")?.0, NegativityOptions::default())?;
        put(out, v, "out")
    })
}

/// Entanglement negativity (‖ρ^T_A‖₁ − 1)/2 of a two-mode state.
///
/// # Safety
/// `rho` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_density_entanglement_negativity(rho: *const QpDensity, out: *mut f64) -> QpStatus {
    guard(|| put(out, entanglement_negativity(&ref_arg(rho, "rho")?.0)?, "out"))
}

/// Wigner function on a `points × points` grid over `[-half_width, half_width]²`.
/// `buf[ip * points + ix]` receives W(x_ix, p_ip).
///
/// # Safety
/// `rho` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qp_density_wigner(
    rho: *const QpDensity,
    half_width: f64,
    points: usize,
    buf: *mut f64,
    len: usize,
) -> QpStatus {
    guard(|| {
        let rho = &ref_arg(rho, "rho")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = points * points;
        if len < need {
            return Err(Failure(QpStatus::BufferTooSmall, format!("need {need} values, got {len}")));
        }
        let grid = wigner(rho, GridSpec::square(half_width, points))?;
        ptr::copy_nonoverlapping(grid.values.as_ptr(), buf, need);
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_density_free(rho: *mut QpDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}
