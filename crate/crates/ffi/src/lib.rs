//! C ABI over `cglb`.
//!
//! Every function returns a [`CglbStatus`]. On failure a message describing the
//! last error on the calling thread is available from [`cglb_last_error`].
//! Objects are opaque handles created by `*_new` and released by `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cglb::dispersion::{self, CouplingMode};
use cglb::model::{self, Affine, Branch, DriftMode, PlaneWave, SystemParams};
use cglb::solver::{FieldState, Integrator, NoForcing, SolverConfig};
use cglb::spectral::{Grid, SpectralField};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CglbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoPlaneWave = 3,
    SolverFailure = 4,
    Panic = 5,
}

/// Amplitude-dependent coefficient selector for [`cglb_params_set_coefficient`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CglbCoefficient {
    U = 0,
    V = 1,
    Kappa = 2,
    S1 = 3,
    S2 = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CglbCoupling {
    KappaZero = 0,
    ConstantCoupling = 1,
    GradientCoupling = 2,
}

impl From<CglbCoupling> for CouplingMode {
    fn from(c: CglbCoupling) -> Self {
        match c {
            CglbCoupling::KappaZero => CouplingMode::KappaZero,
            CglbCoupling::ConstantCoupling => CouplingMode::ConstantCoupling,
            CglbCoupling::GradientCoupling => CouplingMode::GradientCoupling,
        }
    }
}

/// Plane wave `P = r0·exp(i·theta0·x)`, `Ω = w0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CglbPlaneWave {
    pub r0: f64,
    pub theta0: f64,
    pub w0: f64,
}

/// Opaque model coefficients.
pub struct CglbParams {
    inner: SystemParams,
}

/// Opaque time stepper with its current state.
pub struct CglbSimulation {
    grid: Grid,
    integrator: Integrator,
    state: FieldState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn guard(f: impl FnOnce() -> Result<(), (CglbStatus, String)>) -> CglbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CglbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CglbStatus::Panic
        }
    }
}

fn null<T>() -> (CglbStatus, String) {
    (CglbStatus::NullPointer, format!("null pointer to {}", short_type_name::<T>()))
}

fn short_type_name<T>() -> &'static str {
    let full = std::any::type_name::<T>();
    full.rsplit("::").next().unwrap_or(full)
}

fn invalid(e: impl ToString) -> (CglbStatus, String) {
    (CglbStatus::InvalidArgument, e.to_string())
}

/// Message of the last failed call on this thread. The pointer stays valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cglb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cglb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default coefficients (`ξ = m = 1`, everything else zero).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cglb_params_new(out: *mut *mut CglbParams) -> CglbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null::<*mut CglbParams>());
        }
        let h = Box::into_raw(Box::new(CglbParams { inner: SystemParams::default() }));
        // SAFETY: checked non-null above; caller guarantees it is writable.
        unsafe { *out = h };
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`cglb_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cglb_params_free(params: *mut CglbParams) {
    if !params.is_null() {
        // SAFETY: the handle was produced by Box::into_raw.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Sets the coefficient `c0 + c1·r`.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cglb_params_set_coefficient(
    params: *mut CglbParams,
    which: CglbCoefficient,
    c0: f64,
    c1: f64,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let p = unsafe { params.as_mut() }.ok_or_else(null::<CglbParams>)?;
        if !(c0.is_finite() && c1.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        let a = Affine(c0, c1);
        match which {
            CglbCoefficient::U => p.inner.u = a,
            CglbCoefficient::V => p.inner.v = a,
            CglbCoefficient::Kappa => p.inner.kappa = a,
            CglbCoefficient::S1 => p.inner.s1 = a,
            CglbCoefficient::S2 => p.inner.s2 = a,
        }
        Ok(())
    })
}

/// Sets the diffusion `m` and the coupling `ξ`.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cglb_params_set_scalars(params: *mut CglbParams, m: f64, xi: f64) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let p = unsafe { params.as_mut() }.ok_or_else(null::<CglbParams>)?;
        if !(m.is_finite() && xi.is_finite()) {
            return Err(invalid("m and xi must be finite"));
        }
        p.inner.m = m;
        p.inner.xi = xi;
        Ok(())
    })
}

/// Solves the plane-wave constraints. `root < 0` picks the default branch,
/// otherwise the isolated amplitude with that ascending index. With `compatible`
/// the drift is fixed to `−u(r0)·theta0` and `w0` is only used when `theta0 = 0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cglb_solve_plane_wave(
    params: *const CglbParams,
    root: i32,
    w0: f64,
    compatible: bool,
    out: *mut CglbPlaneWave,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let p = unsafe { params.as_ref() }.ok_or_else(null::<CglbParams>)?;
        if out.is_null() {
            return Err(null::<CglbPlaneWave>());
        }
        let branch = if root < 0 { Branch::Default } else { Branch::Root(root as usize) };
        let drift = if compatible { DriftMode::Compatible { fallback: w0 } } else { DriftMode::Free(w0) };
        let w = model::solve_plane_wave(&p.inner, branch, drift)
            .map_err(|e| (CglbStatus::NoPlaneWave, e.to_string()))?;
        // SAFETY: checked non-null above.
        unsafe { *out = CglbPlaneWave { r0: w.r0, theta0: w.theta0, w0: w.w0 } };
        Ok(())
    })
}

/// The three eigenvalues of the linearised symbol at `k`, sorted by descending
/// real part, written to `re[0..3]` and `im[0..3]`.
///
/// # Safety
/// `params` and `wave` must be valid; `re` and `im` must each hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn cglb_eigenvalues_at_k(
    params: *const CglbParams,
    wave: *const CglbPlaneWave,
    coupling: CglbCoupling,
    k: f64,
    re: *mut f64,
    im: *mut f64,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees valid pointers or null.
        let p = unsafe { params.as_ref() }.ok_or_else(null::<CglbParams>)?;
        let w = unsafe { wave.as_ref() }.ok_or_else(null::<CglbPlaneWave>)?;
        if re.is_null() || im.is_null() {
            return Err(null::<f64>());
        }
        if !k.is_finite() {
            return Err(invalid("k must be finite"));
        }
        let wave = PlaneWave { r0: w.r0, theta0: w.theta0, w0: w.w0 };
        let m = dispersion::build_matrices(&p.inner, &wave, coupling.into());
        let s = dispersion::eigenvalues_at_k(&m, k);
        for (j, l) in s.lambdas.iter().enumerate() {
            // SAFETY: caller provides room for three values.
            unsafe {
                *re.add(j) = l.re;
                *im.add(j) = l.im;
            }
        }
        Ok(())
    })
}

/// Creates a simulation on a `dim`-dimensional periodic grid with `n` points per
/// axis, starting from `P = 0`, `Ω = 0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_new(
    params: *const CglbParams,
    dim: u32,
    n: u32,
    length: f64,
    dt: f64,
    out: *mut *mut CglbSimulation,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let p = unsafe { params.as_ref() }.ok_or_else(null::<CglbParams>)?;
        if out.is_null() {
            return Err(null::<*mut CglbSimulation>());
        }
        let grid = Grid::new(dim as usize, n as usize, length).map_err(invalid)?;
        let config = SolverConfig { dt, t_end: dt, cfl_limit: None, ..Default::default() };
        let integrator = Integrator::new(&grid, &p.inner, &config).map_err(invalid)?;
        let state = FieldState::zeros(&grid);
        let h = Box::into_raw(Box::new(CglbSimulation { grid, integrator, state }));
        // SAFETY: checked non-null above.
        unsafe { *out = h };
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from [`cglb_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_free(sim: *mut CglbSimulation) {
    if !sim.is_null() {
        // SAFETY: the handle was produced by Box::into_raw.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Number of grid points (`n^dim`); the length of every array exchanged with a
/// simulation. `omega` arrays hold `dim` consecutive components.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_len(sim: *const CglbSimulation, out: *mut usize) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let s = unsafe { sim.as_ref() }.ok_or_else(null::<CglbSimulation>)?;
        if out.is_null() {
            return Err(null::<usize>());
        }
        // SAFETY: checked non-null above.
        unsafe { *out = s.grid.len() };
        Ok(())
    })
}

/// Replaces the state with physical values and resets the time to `t`.
///
/// # Safety
/// `p_re`, `p_im` must hold `len` doubles and `omega` must hold `dim·len`.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_set_state(
    sim: *mut CglbSimulation,
    p_re: *const f64,
    p_im: *const f64,
    omega: *const f64,
    len: usize,
    t: f64,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let s = unsafe { sim.as_mut() }.ok_or_else(null::<CglbSimulation>)?;
        if p_re.is_null() || p_im.is_null() || omega.is_null() {
            return Err(null::<f64>());
        }
        let n = s.grid.len();
        if len != n {
            return Err(invalid(format!("expected {n} points, got {len}")));
        }
        // SAFETY: lengths are the caller's contract.
        let (re, im, w) = unsafe {
            (
                std::slice::from_raw_parts(p_re, n),
                std::slice::from_raw_parts(p_im, n),
                std::slice::from_raw_parts(omega, n * s.grid.dim()),
            )
        };
        if re.iter().chain(im).chain(w).any(|x| !x.is_finite()) {
            return Err(invalid("state must be finite"));
        }
        let p: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let p = SpectralField::from_physical(&s.grid, p).map_err(invalid)?;
        let omega = w
            .chunks(n)
            .map(|c| SpectralField::from_physical(&s.grid, c.iter().map(|&x| Complex64::new(x, 0.0)).collect()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;
        s.state = FieldState::new(p, omega, t).map_err(invalid)?;
        Ok(())
    })
}

/// Advances by `steps` time steps without forcing.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_step(sim: *mut CglbSimulation, steps: u32) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let s = unsafe { sim.as_mut() }.ok_or_else(null::<CglbSimulation>)?;
        for _ in 0..steps {
            s.integrator
                .step(&mut s.state, &NoForcing)
                .map_err(|e| (CglbStatus::SolverFailure, e.to_string()))?;
        }
        Ok(())
    })
}

/// Copies the physical state out and writes the current time to `t`.
///
/// # Safety
/// Same buffer sizes as [`cglb_simulation_set_state`]; `t` writable.
#[no_mangle]
pub unsafe extern "C" fn cglb_simulation_get_state(
    sim: *const CglbSimulation,
    p_re: *mut f64,
    p_im: *mut f64,
    omega: *mut f64,
    len: usize,
    t: *mut f64,
) -> CglbStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or null.
        let s = unsafe { sim.as_ref() }.ok_or_else(null::<CglbSimulation>)?;
        if p_re.is_null() || p_im.is_null() || omega.is_null() || t.is_null() {
            return Err(null::<f64>());
        }
        let n = s.grid.len();
        if len != n {
            return Err(invalid(format!("expected {n} points, got {len}")));
        }
        let p = s.state.p.values();
        // SAFETY: lengths are the caller's contract.
        let (re, im, w) = unsafe {
            (
                std::slice::from_raw_parts_mut(p_re, n),
                std::slice::from_raw_parts_mut(p_im, n),
                std::slice::from_raw_parts_mut(omega, n * s.grid.dim()),
            )
        };
        for (i, z) in p.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        for (c, field) in s.state.omega.iter().enumerate() {
            w[c * n..(c + 1) * n].copy_from_slice(&field.real_values());
        }
        // SAFETY: checked non-null above.
        unsafe { *t = s.state.t };
        Ok(())
    })
}
