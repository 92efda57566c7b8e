//! C interface to `cavitynm`.
//!
//! Every function returns a [`CnmStatus`]; results go through out-pointers.
//! On failure the message is available from [`cnm_last_error`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Two-qubit states cross the boundary as 32 doubles: the 4×4
//! matrix in row-major order with interleaved real and imaginary parts.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;

use cavitynm::dynamics::{excitation_probabilities, ModelParams};
use cavitynm::error::Error;
use cavitynm::linalg::Mat4;
use cavitynm::measures::{fidelity, fidelity_closed_form, FidelityIndex};
use cavitynm::scan::{run_scan, CellFlag, Format, ScanSpec, WitnessGrid};
use cavitynm::states::{reduced_state, Partition};
use cavitynm::trajectory::{simulate, TrajectoryConfig, TrajectoryEstimate};
use cavitynm::witnesses::{
    chsh, classical_correlation_closed, fidelity_difference, mutual_information, quantum_discord_closed,
    relative_entropy_difference, trace_distance_difference, ChshBranch, Family, WitnessValue,
};

/// Number of doubles in a serialized two-qubit state.
pub const CNM_STATE_LEN: usize = 32;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    NotPsd = 4,
    NotXForm = 5,
    Numerical = 6,
    InvalidSpec = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmPartition {
    AtomAtom = 0,
    CavityCavity = 1,
    ReservoirReservoir = 2,
    AtomCavityIntra = 3,
    AtomReservoirIntra = 4,
    CavityReservoirIntra = 5,
    AtomReservoirCross = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmFidelityIndex {
    F1 = 1,
    F2 = 2,
    F3 = 3,
    F4 = 4,
    F5 = 5,
    F6 = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmWitness {
    FidelityDiff = 0,
    TraceDistDiff = 1,
    RelEntropyDiff = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmFamily {
    AtomAtom = 0,
    CavityCavity = 1,
    ReservoirReservoir = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmFormat {
    Csv = 0,
    Json = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmValueKind {
    Value = 0,
    Undefined = 1,
    Infinite = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmChshBranch {
    B1 = 1,
    B2 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnmCellFlag {
    Negative = 0,
    NonNegative = 1,
    Violating = 2,
    Undefined = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnmExcitation {
    pub p: f64,
    pub q: f64,
    pub gamma_d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnmCorrelations {
    pub mutual_information: f64,
    pub classical: f64,
    pub discord: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnmCheckpoint {
    pub t: f64,
    pub est_atom: f64,
    pub est_cavity: f64,
    pub est_reservoir: f64,
    pub se_atom: f64,
    pub se_cavity: f64,
    pub se_reservoir: f64,
}

/// Model parameters.
pub struct CnmParams(ModelParams);

/// Result of a parameter scan.
pub struct CnmGrid(WitnessGrid);

/// Trajectory ensemble estimates.
pub struct CnmTrajectory(TrajectoryEstimate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(CnmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParams(_) => CnmStatus::InvalidParams,
            Error::InvalidArgument(_) => CnmStatus::InvalidArgument,
            Error::NotPsd(_) => CnmStatus::NotPsd,
            Error::NotXForm(_) => CnmStatus::NotXForm,
            Error::StepControl { .. } | Error::DtConvergence { .. } => CnmStatus::Numerical,
            Error::InvalidSpec(_) => CnmStatus::InvalidSpec,
            Error::Io(_) => CnmStatus::Io,
            Error::Parse(_) => CnmStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CnmStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CnmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CnmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            CnmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(CnmStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure(CnmStatus::NullPointer, format!("{name} is null")));
    }
    p.write(value);
    Ok(())
}

fn partition(code: u32) -> Result<Partition, Failure> {
    Partition::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| invalid(format!("unknown partition {code}")))
}

fn family(code: u32) -> Result<Family, Failure> {
    Family::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| invalid(format!("unknown family {code}")))
}

fn fidelity_index(code: u32) -> Result<FidelityIndex, Failure> {
    (code as usize)
        .checked_sub(1)
        .and_then(|k| FidelityIndex::ALL.get(k).copied())
        .ok_or_else(|| invalid(format!("unknown fidelity index {code}")))
}

fn format(code: u32) -> Result<Format, Failure> {
    match code {
        0 => Ok(Format::Csv),
        1 => Ok(Format::Json),
        _ => Err(invalid(format!("unknown format {code}"))),
    }
}

unsafe fn read_state(p: *const f64, name: &str) -> Result<Mat4, Failure> {
    if p.is_null() {
        return Err(Failure(CnmStatus::NullPointer, format!("{name} is null")));
    }
    let s = std::slice::from_raw_parts(p, CNM_STATE_LEN);
    Ok(Mat4::from_fn(|r, c| {
        Complex64::new(s[2 * (4 * r + c)], s[2 * (4 * r + c) + 1])
    }))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CnmStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cnm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cnm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates parameters with coupling `v`, cavity decay `lambda_c` and
/// initial amplitudes `a`, `b` (`|a|² + |b|² = 1`).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cnm_params_new(
    v: f64,
    lambda_c: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    out: *mut *mut CnmParams,
) -> CnmStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "out is null".into()));
        }
        let params = ModelParams::new(v, lambda_c, Complex64::new(a_re, a_im), Complex64::new(b_re, b_im))?;
        out.write(Box::into_raw(Box::new(CnmParams(params))));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`cnm_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cnm_params_free(params: *mut CnmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_excitation_probabilities(
    params: *const CnmParams,
    t: f64,
    out: *mut CnmExcitation,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("t must be non-negative, got {t}")));
        }
        let e = excitation_probabilities(params, t);
        write(
            out,
            CnmExcitation {
                p: e.p,
                q: e.q,
                gamma_d: e.gamma_d,
            },
            "out",
        )
    })
}

/// Writes the reduced state of `partition` (a [`CnmPartition`]) at time `t`
/// into `out`, which must hold [`CNM_STATE_LEN`] doubles.
///
/// # Safety
/// `params` must be a live handle and `out` must point to 32 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cnm_reduced_state(
    params: *const CnmParams,
    partition: u32,
    t: f64,
    out: *mut f64,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        let partition = self::partition(partition)?;
        if out.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "out is null".into()));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("t must be non-negative, got {t}")));
        }
        let m = reduced_state(partition, params, t).into_matrix();
        let buf = std::slice::from_raw_parts_mut(out, CNM_STATE_LEN);
        for r in 0..4 {
            for c in 0..4 {
                buf[2 * (4 * r + c)] = m[(r, c)].re;
                buf[2 * (4 * r + c) + 1] = m[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Uhlmann fidelity of two serialized states.
///
/// # Safety
/// `rho1` and `rho2` must each point to 32 readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_fidelity(rho1: *const f64, rho2: *const f64, out: *mut f64) -> CnmStatus {
    guard(|| {
        let a = read_state(rho1, "rho1")?;
        let b = read_state(rho2, "rho2")?;
        write(out, fidelity(&a, &b)?, "out")
    })
}

/// Closed-form fidelity `F1`..`F6` ([`CnmFidelityIndex`]) at time `t`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_fidelity_closed_form(
    params: *const CnmParams,
    index: u32,
    t: f64,
    out: *mut f64,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        write(out, fidelity_closed_form(fidelity_index(index)?, params, t), "out")
    })
}

/// Time-lag witness ([`CnmWitness`]) at `(t, tau)`. `kind` receives a
/// [`CnmValueKind`]; `value` is NaN when undefined and +inf when infinite.
/// `epsilon` regularizes relative entropies and is ignored otherwise.
///
/// # Safety
/// `params` must be a live handle; `value` and `kind` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_witness(
    params: *const CnmParams,
    partition: u32,
    witness: u32,
    t: f64,
    tau: f64,
    epsilon: f64,
    value: *mut f64,
    kind: *mut u32,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        let partition = self::partition(partition)?;
        if !(t.is_finite() && t >= 0.0 && tau.is_finite() && tau >= 0.0) {
            return Err(invalid("t and tau must be non-negative"));
        }
        let w = match witness {
            0 => fidelity_difference(partition, params, t, tau),
            1 => trace_distance_difference(partition, params, t, tau),
            2 => relative_entropy_difference(partition, params, t, tau, epsilon),
            _ => return Err(invalid(format!("unknown witness {witness}"))),
        };
        let k = match w {
            WitnessValue::Value(_) => CnmValueKind::Value,
            WitnessValue::Undefined => CnmValueKind::Undefined,
            WitnessValue::Infinite => CnmValueKind::Infinite,
        };
        write(value, w.to_f64(), "value")?;
        write(kind, k as u32, "kind")
    })
}

/// CHSH-Bell value of the reduced state; `branch` receives a
/// [`CnmChshBranch`] and may be null.
///
/// # Safety
/// `params` must be a live handle; `value` writable; `branch` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_chsh(
    params: *const CnmParams,
    partition: u32,
    t: f64,
    value: *mut f64,
    branch: *mut u32,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        let r = chsh(&reduced_state(self::partition(partition)?, params, t))?;
        write(value, r.value, "value")?;
        if !branch.is_null() {
            let b = match r.branch {
                ChshBranch::B1 => CnmChshBranch::B1,
                ChshBranch::B2 => CnmChshBranch::B2,
            };
            branch.write(b as u32);
        }
        Ok(())
    })
}

/// Mutual information, classical correlation and discord of a
/// [`CnmFamily`] pair.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_correlations(
    params: *const CnmParams,
    family: u32,
    t: f64,
    out: *mut CnmCorrelations,
) -> CnmStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        let f = self::family(family)?;
        let c = CnmCorrelations {
            mutual_information: mutual_information(&reduced_state(f.partition(), params, t)),
            classical: classical_correlation_closed(f, params, t),
            discord: quantum_discord_closed(f, params, t),
        };
        write(out, c, "out")
    })
}

/// Runs a scan described by a JSON spec.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_scan_json(spec_json: *const c_char, out: *mut *mut CnmGrid) -> CnmStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "out is null".into()));
        }
        let spec = ScanSpec::from_json_str(str_arg(spec_json, "spec_json")?)?;
        let grid = run_scan(&spec)?;
        out.write(Box::into_raw(Box::new(CnmGrid(grid))));
        Ok(())
    })
}

/// # Safety
/// `grid` must be a live handle; `n1` and `n2` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_grid_shape(grid: *const CnmGrid, n1: *mut usize, n2: *mut usize) -> CnmStatus {
    guard(|| {
        let (a, b) = deref(grid, "grid")?.0.shape();
        write(n1, a, "n1")?;
        write(n2, b, "n2")
    })
}

/// Copies the row-major values (NaN undefined, +inf infinite) into `buf`.
///
/// # Safety
/// `grid` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cnm_grid_values(grid: *const CnmGrid, buf: *mut f64, len: usize) -> CnmStatus {
    guard(|| {
        let grid = &deref(grid, "grid")?.0;
        if buf.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "buf is null".into()));
        }
        if len < grid.values.len() {
            return Err(invalid(format!(
                "buffer holds {len} values, grid has {}",
                grid.values.len()
            )));
        }
        ptr::copy_nonoverlapping(grid.values.as_ptr(), buf, grid.values.len());
        Ok(())
    })
}

/// Copies the per-cell [`CnmCellFlag`] codes into `buf`.
///
/// # Safety
/// `grid` must be a live handle and `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cnm_grid_flags(grid: *const CnmGrid, buf: *mut u8, len: usize) -> CnmStatus {
    guard(|| {
        let grid = &deref(grid, "grid")?.0;
        if buf.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "buf is null".into()));
        }
        if len < grid.flags.len() {
            return Err(invalid(format!(
                "buffer holds {len} flags, grid has {}",
                grid.flags.len()
            )));
        }
        let out = std::slice::from_raw_parts_mut(buf, grid.flags.len());
        for (o, f) in out.iter_mut().zip(&grid.flags) {
            *o = match f {
                CellFlag::Negative => CnmCellFlag::Negative,
                CellFlag::NonNegative => CnmCellFlag::NonNegative,
                CellFlag::Violating => CnmCellFlag::Violating,
                CellFlag::Undefined => CnmCellFlag::Undefined,
            } as u8;
        }
        Ok(())
    })
}

/// Writes the grid to `path` as CSV or JSON ([`CnmFormat`]).
///
/// # Safety
/// `grid` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cnm_grid_write(grid: *const CnmGrid, path: *const c_char, fmt: u32) -> CnmStatus {
    guard(|| {
        let grid = &deref(grid, "grid")?.0;
        let path = str_arg(path, "path")?;
        grid.write(Path::new(path), format(fmt)?)?;
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from [`cnm_scan_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cnm_grid_free(grid: *mut CnmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Quantum-jump ensemble of `n_traj` trajectories sampled at the strictly
/// increasing `checkpoints`. `dt <= 0` selects the default step.
///
/// # Safety
/// `params` must be a live handle, `checkpoints` must hold `n_checkpoints`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_trajectory_simulate(
    params: *const CnmParams,
    checkpoints: *const f64,
    n_checkpoints: usize,
    n_traj: usize,
    seed: u64,
    dt: f64,
    out: *mut *mut CnmTrajectory,
) -> CnmStatus {
    guard(|| {
        let params = deref(params, "params")?.0;
        if checkpoints.is_null() || out.is_null() {
            return Err(Failure(CnmStatus::NullPointer, "checkpoints or out is null".into()));
        }
        let times = std::slice::from_raw_parts(checkpoints, n_checkpoints).to_vec();
        let mut config = TrajectoryConfig::new(params, times, n_traj, seed);
        if dt > 0.0 {
            config.dt = dt;
        }
        let estimate = simulate(&config)?;
        out.write(Box::into_raw(Box::new(CnmTrajectory(estimate))));
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_trajectory_len(traj: *const CnmTrajectory, len: *mut usize) -> CnmStatus {
    guard(|| write(len, deref(traj, "traj")?.0.checkpoints.len(), "len"))
}

/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cnm_trajectory_get(
    traj: *const CnmTrajectory,
    index: usize,
    out: *mut CnmCheckpoint,
) -> CnmStatus {
    guard(|| {
        let est = &deref(traj, "traj")?.0;
        let c = est.checkpoints.get(index).ok_or_else(|| {
            invalid(format!(
                "index {index} out of range ({} checkpoints)",
                est.checkpoints.len()
            ))
        })?;
        let row = CnmCheckpoint {
            t: c.t,
            est_atom: c.est_atom,
            est_cavity: c.est_cavity,
            est_reservoir: c.est_reservoir,
            se_atom: c.se_atom,
            se_cavity: c.se_cavity,
            se_reservoir: c.se_reservoir,
        };
        write(out, row, "out")
    })
}

/// # Safety
/// `traj` must be null or a handle from [`cnm_trajectory_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cnm_trajectory_free(traj: *mut CnmTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
