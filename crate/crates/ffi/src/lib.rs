//! C ABI over `chi3_core`.
//!
//! Every fallible call returns a [`Chi3Status`]; on failure the message is
//! kept per thread and read back with [`chi3_last_error_message`]. Handles
//! are opaque and owned by the caller, who releases them with the matching
//! `_free` function. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chi3_core::cli::{simulate_linearized, McRun, McSettings};
use chi3_core::invfree::{generation_stats, steady_moments, InvFreeCoeffs};
use chi3_core::linearized::{DriftForm, LinearizedModel};
use chi3_core::{Error, MediumParams, Model};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chi3Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    InvalidParameter = 4,
    Unstable = 5,
    Stability = 6,
    NoSteadyState = 7,
    SpectralResolution = 8,
    NoConvergence = 9,
    Config = 10,
    Io = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chi3ModelKind {
    Eha = 0,
    Hm = 1,
    Slm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chi3DriftForm {
    Exact = 0,
    WeakField = 1,
}

/// Medium and cavity constants.
pub struct Chi3Params(MediumParams);

/// A model linearized about its semiclassical operating point.
pub struct Chi3Model(LinearizedModel);

/// Result of a Monte Carlo spectrum run.
pub struct Chi3McResult(McRun);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Chi3ModelInfo {
    /// Field decay rate A (rad/s); the frequency unit of `omega_bar`.
    pub decay: f64,
    /// Intracavity intensity U.
    pub intensity: f64,
    /// Phase of the intracavity field.
    pub phase: f64,
    pub beta_u: f64,
    /// Scaled offset of the cavity from the drive.
    pub eps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Chi3OptimalPhase {
    /// Local-oscillator phase of the quietest quadrature.
    pub theta0: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// Nonzero when the noise does not depend on the phase.
    pub degenerate: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Chi3InvFreeMoments {
    pub mean_alpha_re: f64,
    pub mean_alpha_im: f64,
    pub mean_n: f64,
    pub s: f64,
    pub mu_re: f64,
    pub mu_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Chi3GenerationStats {
    pub mean_n: f64,
    pub linewidth: f64,
    pub mandel_xi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Chi3Status {
    match e {
        Error::Domain(_) => Chi3Status::Domain,
        Error::InvalidParameter { .. } => Chi3Status::InvalidParameter,
        Error::Unstable(_) => Chi3Status::Unstable,
        Error::Stability { .. } => Chi3Status::Stability,
        Error::NoSteadyState(_) => Chi3Status::NoSteadyState,
        Error::SpectralResolution { .. } => Chi3Status::SpectralResolution,
        Error::NoConvergence { .. } => Chi3Status::NoConvergence,
        Error::Config(_) => Chi3Status::Config,
        Error::Io(_) => Chi3Status::Io,
    }
}

struct Fail(Chi3Status, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(Chi3Status::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> Chi3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Chi3Status::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            Chi3Status::Panic
        }
    }
}

unsafe fn key_str<'a>(key: *const c_char) -> Result<&'a str, Fail> {
    if key.is_null() {
        return Err(null("key"));
    }
    CStr::from_ptr(key).to_str().map_err(|_| Fail(Chi3Status::InvalidArgument, "key is not UTF-8".into()))
}

fn field<'a>(p: &'a mut MediumParams, key: &str) -> Result<&'a mut f64, Fail> {
    Ok(match key {
        "gamma" => &mut p.gamma,
        "gamma1" => &mut p.gamma1,
        "gamma2" => &mut p.gamma2,
        "delta" => &mut p.delta,
        "g" => &mut p.g,
        "n_atoms" => &mut p.n_atoms,
        "f1s" => &mut p.f1s,
        "f2s" => &mut p.f2s,
        "c_in" => &mut p.c_in,
        "c_out" => &mut p.c_out,
        "a0" => &mut p.a0,
        "omega_offset" => &mut p.omega_offset,
        "fc" => &mut p.fc,
        _ => return Err(Fail(Chi3Status::InvalidArgument, format!("unknown parameter `{key}`"))),
    })
}

/// Length in bytes of the last error message on this thread, without the
/// terminating NUL. Zero when no error has been recorded.
#[no_mangle]
pub extern "C" fn chi3_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn chi3_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chi3_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// New parameter set holding the defaults. Never null.
#[no_mangle]
pub extern "C" fn chi3_params_new() -> *mut Chi3Params {
    Box::into_raw(Box::new(Chi3Params(MediumParams::default())))
}

/// # Safety
/// `p` must be null or come from [`chi3_params_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn chi3_params_free(p: *mut Chi3Params) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sets a parameter by name (`gamma`, `delta`, `c_out`, `fc`, ...).
///
/// # Safety
/// `p` must be a live handle, `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn chi3_params_set(p: *mut Chi3Params, key: *const c_char, value: f64) -> Chi3Status {
    guard(|| {
        let p = p.as_mut().ok_or_else(|| null("params"))?;
        *field(&mut p.0, key_str(key)?)? = value;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle, `key` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_params_get(p: *const Chi3Params, key: *const c_char, out: *mut f64) -> Chi3Status {
    guard(|| {
        let mut copy = p.as_ref().ok_or_else(|| null("params"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = *field(&mut copy, key_str(key)?)?;
        Ok(())
    })
}

/// Checks the construction invariants of the parameter set.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chi3_params_validate(p: *const Chi3Params) -> Chi3Status {
    guard(|| Ok(p.as_ref().ok_or_else(|| null("params"))?.0.validate()?))
}

/// Linearizes `kind` about its steady state and stores the handle in `out`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_new(
    p: *const Chi3Params,
    kind: Chi3ModelKind,
    form: Chi3DriftForm,
    out: *mut *mut Chi3Model,
) -> Chi3Status {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let model = match kind {
            Chi3ModelKind::Eha => Model::Eha,
            Chi3ModelKind::Hm => Model::Hm,
            Chi3ModelKind::Slm => Model::Slm,
        };
        let form = match form {
            Chi3DriftForm::Exact => DriftForm::Exact,
            Chi3DriftForm::WeakField => DriftForm::WeakField,
        };
        p.0.validate()?;
        let lm = LinearizedModel::from_params(model, &p.0, form)?;
        *out = Box::into_raw(Box::new(Chi3Model(lm)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or come from [`chi3_model_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_free(m: *mut Chi3Model) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_info(m: *const Chi3Model, out: *mut Chi3ModelInfo) -> Chi3Status {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Chi3ModelInfo { decay: m.decay(), intensity: m.u, phase: m.phi0, beta_u: m.beta_u(), eps: m.eps() };
        Ok(())
    })
}

/// Normally ordered output spectrum at `n` scaled frequencies ω/A for the
/// quadrature `theta_rel` away from the field phase.
///
/// # Safety
/// `omega_bar` must point to `n` readable doubles and `out` to `n` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_spectrum(
    m: *const Chi3Model,
    omega_bar: *const f64,
    n: usize,
    theta_rel: f64,
    out: *mut f64,
) -> Chi3Status {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.0;
        if n == 0 {
            return Ok(());
        }
        if omega_bar.is_null() || out.is_null() {
            return Err(null("array"));
        }
        let w = std::slice::from_raw_parts(omega_bar, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, &wb) in out.iter_mut().zip(w) {
            *o = m.g(wb, theta_rel)?;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_optimal_phase(
    m: *const Chi3Model,
    omega_bar: f64,
    out: *mut Chi3OptimalPhase,
) -> Chi3Status {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o = m.optimal_phase(omega_bar)?;
        *out = Chi3OptimalPhase { theta0: o.theta0, g_min: o.g_min, g_max: o.g_max, degenerate: o.degenerate as i32 };
        Ok(())
    })
}

/// Monte Carlo estimate of the spectrum from `n_traj` trajectories.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_model_simulate(
    m: *const Chi3Model,
    n_traj: usize,
    seed: u64,
    theta_rel: f64,
    out: *mut *mut Chi3McResult,
) -> Chi3Status {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if n_traj < 2 {
            return Err(Fail(Chi3Status::InvalidArgument, "need at least 2 trajectories".into()));
        }
        let run = simulate_linearized(m, &McSettings::new(n_traj, seed, theta_rel))?;
        *out = Box::into_raw(Box::new(Chi3McResult(run)));
        Ok(())
    })
}

/// Number of frequency bins in a Monte Carlo result (0 for null).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chi3_mc_len(r: *const Chi3McResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.omega_bar.len())
}

/// Copies up to `cap` bins. Any of the output arrays may be null to skip it.
///
/// # Safety
/// `r` must be a live handle; non-null arrays must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn chi3_mc_copy(
    r: *const Chi3McResult,
    cap: usize,
    omega_bar: *mut f64,
    g_mc: *mut f64,
    std_err: *mut f64,
    g_exact: *mut f64,
) -> Chi3Status {
    guard(|| {
        let r = &r.as_ref().ok_or_else(|| null("result"))?.0;
        let n = cap.min(r.omega_bar.len());
        for (dst, src) in [(omega_bar, &r.omega_bar), (g_mc, &r.g_mc), (std_err, &r.std_err), (g_exact, &r.g_exact)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
            }
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or come from [`chi3_model_simulate`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn chi3_mc_free(r: *mut Chi3McResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Stationary moments of the inversion-free medium at resonance, referred
/// to the local-oscillator phase `theta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_invfree_moments(
    q0: f64,
    beta: f64,
    x: f64,
    a0: f64,
    c: f64,
    theta: f64,
    out: *mut Chi3InvFreeMoments,
) -> Chi3Status {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(c > 0.0) {
            return Err(Fail(Chi3Status::Domain, format!("total cavity loss must be positive (got {c})")));
        }
        let m = steady_moments(&InvFreeCoeffs::from_resonant(q0, beta, x, a0, c), theta)?;
        *out = Chi3InvFreeMoments {
            mean_alpha_re: m.mean_alpha.re,
            mean_alpha_im: m.mean_alpha.im,
            mean_n: m.mean_n,
            s: m.s,
            mu_re: m.mu.re,
            mu_im: m.mu.im,
        };
        Ok(())
    })
}

/// Photon number, linewidth and Mandel parameter of light generated
/// without injection.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chi3_generation_stats(q0: f64, beta: f64, c: f64, out: *mut Chi3GenerationStats) -> Chi3Status {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = generation_stats(q0, beta, c)?;
        *out = Chi3GenerationStats { mean_n: s.mean_n, linewidth: s.linewidth, mandel_xi: s.mandel_xi };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let n = chi3_last_error_length();
        let mut buf = vec![0 as c_char; n + 1];
        unsafe { chi3_last_error_message(buf.as_mut_ptr(), buf.len()) };
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn params_roundtrip_and_unknown_key() {
        let p = chi3_params_new();
        unsafe {
            assert_eq!(chi3_params_set(p, c"fc".as_ptr(), 0.5), Chi3Status::Ok);
            let mut v = 0.0;
            assert_eq!(chi3_params_get(p, c"fc".as_ptr(), &mut v), Chi3Status::Ok);
            assert_eq!(v, 0.5);
            assert_eq!(chi3_params_set(p, c"bogus".as_ptr(), 1.0), Chi3Status::InvalidArgument);
            assert!(last_error().contains("bogus"));
            assert_eq!(chi3_params_set(p, ptr::null(), 1.0), Chi3Status::NullPointer);
            assert_eq!(chi3_params_set(p, c"fc".as_ptr(), 2.0), Chi3Status::Ok);
            assert_eq!(chi3_params_validate(p), Chi3Status::InvalidParameter);
            chi3_params_free(p);
        }
    }

    #[test]
    fn spectrum_matches_core() {
        let p = chi3_params_new();
        let mut m = ptr::null_mut();
        unsafe {
            assert_eq!(chi3_model_new(p, Chi3ModelKind::Hm, Chi3DriftForm::Exact, &mut m), Chi3Status::Ok);
            let w = [0.0, 1.0, 2.5];
            let mut g = [0.0; 3];
            assert_eq!(chi3_model_spectrum(m, w.as_ptr(), 3, 0.3, g.as_mut_ptr()), Chi3Status::Ok);
            let lm = LinearizedModel::from_params(Model::Hm, &MediumParams::default(), DriftForm::Exact).unwrap();
            for (wb, gv) in w.iter().zip(g) {
                assert_eq!(gv, lm.g(*wb, 0.3).unwrap());
            }
            let mut info = Chi3ModelInfo::default();
            assert_eq!(chi3_model_info(m, &mut info), Chi3Status::Ok);
            assert_eq!(info.intensity, lm.u);
            let mut opt = Chi3OptimalPhase::default();
            assert_eq!(chi3_model_optimal_phase(m, 1.0, &mut opt), Chi3Status::Ok);
            assert!(opt.g_min <= opt.g_max);
            chi3_model_free(m);
            chi3_params_free(p);
        }
    }

    #[test]
    fn physics_errors_map_to_status() {
        let mut out = Chi3InvFreeMoments::default();
        let s = unsafe { chi3_invfree_moments(-100.0, 0.01, 10.0, 0.0, 1.0, 0.0, &mut out) };
        assert_eq!(s, Chi3Status::Stability);
        assert!(last_error().contains("stability"));
        let mut st = Chi3GenerationStats::default();
        assert_eq!(unsafe { chi3_generation_stats(-1.0, 0.0, 1.0, &mut st) }, Chi3Status::Domain);
        assert_eq!(unsafe { chi3_generation_stats(10.0, 0.0, 1.0, &mut st) }, Chi3Status::Ok);
        assert_eq!(st.mean_n, 10.0);
    }

    #[test]
    fn truncated_error_message_is_terminated() {
        let p = chi3_params_new();
        unsafe {
            chi3_params_set(p, c"not_a_parameter".as_ptr(), 1.0);
            let mut buf = [1 as c_char; 6];
            let full = chi3_last_error_message(buf.as_mut_ptr(), buf.len());
            assert!(full > 5);
            assert_eq!(buf[5], 0);
            chi3_params_free(p);
        }
    }

    #[test]
    fn simulate_small_run() {
        let p = chi3_params_new();
        let mut m = ptr::null_mut();
        let mut r = ptr::null_mut();
        unsafe {
            assert_eq!(chi3_model_new(p, Chi3ModelKind::Eha, Chi3DriftForm::Exact, &mut m), Chi3Status::Ok);
            assert_eq!(chi3_model_simulate(m, 1, 0, 0.0, &mut r), Chi3Status::InvalidArgument);
            assert!(r.is_null());
            assert_eq!(chi3_model_simulate(m, 4, 3, 0.0, &mut r), Chi3Status::Ok);
            let n = chi3_mc_len(r);
            assert!(n > 10);
            let mut w = vec![0.0; n];
            let mut g = vec![0.0; n];
            assert_eq!(chi3_mc_copy(r, n, w.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), g.as_mut_ptr()), Chi3Status::Ok);
            assert!(w.windows(2).all(|p| p[1] > p[0]));
            assert!(g.iter().all(|v| v.is_finite()));
            chi3_mc_free(r);
            chi3_model_free(m);
            chi3_params_free(p);
        }
    }
}
