use std::ffi::CStr;
use std::ptr;

use cglb_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cglb_last_error()) }.to_string_lossy().into_owned()
}

fn params(m: f64) -> *mut CglbParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cglb_params_new(&mut p) }, CglbStatus::Ok);
    assert_eq!(unsafe { cglb_params_set_scalars(p, m, 1.0) }, CglbStatus::Ok);
    p
}

#[test]
fn eigenvalues_through_the_abi() {
    let p = params(1.0);
    let wave = CglbPlaneWave { r0: 1.0, theta0: 0.0, w0: 0.0 };
    let (mut re, mut im) = ([0.0; 3], [0.0; 3]);
    let st = unsafe { cglb_eigenvalues_at_k(p, &wave, CglbCoupling::KappaZero, 1.0, re.as_mut_ptr(), im.as_mut_ptr()) };
    assert_eq!(st, CglbStatus::Ok);
    for (got, want) in re.iter().zip([-1.0, -1.0, -3.0]) {
        assert!((got - want).abs() < 1e-12, "{re:?}");
    }
    assert!(im.iter().all(|x| x.abs() < 1e-12));
    unsafe { cglb_params_free(p) };
}

#[test]
fn plane_wave_solve() {
    let p = params(1.0);
    let mut w = CglbPlaneWave { r0: 0.0, theta0: 0.0, w0: 0.0 };
    assert_eq!(unsafe { cglb_solve_plane_wave(p, -1, 0.5, false, &mut w) }, CglbStatus::Ok);
    assert_eq!((w.r0, w.theta0, w.w0), (1.0, 0.0, 0.5));

    // u = 1, v = -1: amplitude 1/sqrt(2)
    unsafe {
        cglb_params_set_coefficient(p, CglbCoefficient::U, 1.0, 0.0);
        cglb_params_set_coefficient(p, CglbCoefficient::V, -1.0, 0.0);
    }
    assert_eq!(unsafe { cglb_solve_plane_wave(p, -1, 0.0, true, &mut w) }, CglbStatus::Ok);
    assert!((w.r0 - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((w.w0 + w.theta0).abs() < 1e-12);

    // u = 1, v = 1 has no amplitude in [0, 1]
    unsafe { cglb_params_set_coefficient(p, CglbCoefficient::V, 1.0, 0.0) };
    assert_eq!(unsafe { cglb_solve_plane_wave(p, -1, 0.0, false, &mut w) }, CglbStatus::NoPlaneWave);
    assert!(!last_error().is_empty());
    unsafe { cglb_params_free(p) };
}

#[test]
fn null_and_invalid_arguments() {
    assert_eq!(unsafe { cglb_params_new(ptr::null_mut()) }, CglbStatus::NullPointer);
    assert_eq!(unsafe { cglb_params_set_scalars(ptr::null_mut(), 1.0, 1.0) }, CglbStatus::NullPointer);
    let p = params(1.0);
    assert_eq!(unsafe { cglb_params_set_scalars(p, f64::NAN, 1.0) }, CglbStatus::InvalidArgument);
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cglb_simulation_new(p, 3, 16, 1.0, 1e-3, &mut sim) }, CglbStatus::InvalidArgument);
    assert!(sim.is_null());
    assert!(last_error().contains('3'));
    unsafe {
        cglb_params_free(p);
        cglb_params_free(ptr::null_mut());
        cglb_simulation_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(cglb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn heat_decay_through_the_abi() {
    let p = params(1.0);
    assert_eq!(unsafe { cglb_params_set_scalars(p, 1.0, 0.0) }, CglbStatus::Ok);
    let mut sim = ptr::null_mut();
    let n = 32usize;
    let l = 2.0 * std::f64::consts::PI;
    assert_eq!(unsafe { cglb_simulation_new(p, 1, n as u32, l, 1e-3, &mut sim) }, CglbStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { cglb_simulation_len(sim, &mut len) }, CglbStatus::Ok);
    assert_eq!(len, n);

    // with ξ = 0, P = 1e-3 sin x decays like e^{-t} up to the cubic term
    let xs: Vec<f64> = (0..n).map(|i| l * i as f64 / n as f64).collect();
    let re: Vec<f64> = xs.iter().map(|x| 1e-3 * x.sin()).collect();
    let zeros = vec![0.0; n];
    assert_eq!(unsafe { cglb_simulation_set_state(sim, re.as_ptr(), zeros.as_ptr(), zeros.as_ptr(), n, 0.0) }, CglbStatus::Ok);
    assert_eq!(unsafe { cglb_simulation_step(sim, 500) }, CglbStatus::Ok);
    let (mut pr, mut pi, mut w, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], 0.0);
    let st = unsafe { cglb_simulation_get_state(sim, pr.as_mut_ptr(), pi.as_mut_ptr(), w.as_mut_ptr(), n, &mut t) };
    assert_eq!(st, CglbStatus::Ok);
    assert!((t - 0.5).abs() < 1e-12);
    let decay = (-0.5f64).exp();
    for i in 0..n {
        assert!((pr[i] - re[i] * decay).abs() < 1e-8, "{i}");
    }
    assert_eq!(unsafe { cglb_simulation_set_state(sim, re.as_ptr(), zeros.as_ptr(), zeros.as_ptr(), n - 1, 0.0) }, CglbStatus::InvalidArgument);
    unsafe {
        cglb_simulation_free(sim);
        cglb_params_free(p);
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cglb.h")).unwrap();
    for sym in ["cglb_simulation_step", "cglb_eigenvalues_at_k", "CGLB_STATUS_OK", "typedef struct CglbParams CglbParams"] {
        assert!(h.contains(sym), "{sym}");
    }
}
