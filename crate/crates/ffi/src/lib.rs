//! C ABI for `rematch`.
//!
//! Every fallible function returns an [`RmStatus`]; on failure the message is
//! available from [`rm_last_error_message`] on the same thread. Instances are
//! opaque handles released with [`rm_instance_free`]. Strings returned through
//! `char **` out-parameters are owned by the caller and must be released with
//! [`rm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rematch::coupling::{verify_many, LemmaId, Mode, VerifyOptions};
use rematch::harness::{self, Bundle, ReproduceConfig};
use rematch::lp::{self, CertificateForm, LpVariant};
use rematch::policies::{self, PolicyId};
use rematch::{Error, Instance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed instance, unknown name or parameter out of range.
    InvalidArgument = 3,
    /// An enumeration, DP or matching size limit was exceeded.
    LimitExceeded = 4,
    /// The operation does not apply to this instance.
    Unsupported = 5,
    Numerical = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmLpVariant {
    Sm = 0,
    GreedyCommit = 1,
}

impl From<RmLpVariant> for LpVariant {
    fn from(v: RmLpVariant) -> Self {
        match v {
            RmLpVariant::Sm => LpVariant::SmVsOpt,
            RmLpVariant::GreedyCommit => LpVariant::GreedyCommitVsOpt,
        }
    }
}

/// Summary of a Monte Carlo run. Per-round values are only in the JSON form.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RmRewardStats {
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

/// Opaque instance handle.
pub struct RmInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RmStatus {
    match e {
        Error::LimitExceeded { .. } => RmStatus::LimitExceeded,
        Error::Unsupported(_) => RmStatus::Unsupported,
        Error::Numerical(_) => RmStatus::Numerical,
        _ => RmStatus::InvalidArgument,
    }
}

struct Fail(RmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(RmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn instance_arg<'a>(p: *const RmInstance) -> Result<&'a Instance, Fail> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("instance"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(RmStatus::Numerical, "string has interior nul".into()))?;
    write(out, c.into_raw(), "out")
}

unsafe fn write_instance(out: *mut *mut RmInstance, inst: Instance) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(RmInstance { inner: inst })));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string this library wrote to a `char **`
/// out-parameter, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_from_json(json: *const c_char, out: *mut *mut RmInstance) -> RmStatus {
    guard(|| {
        let inst = Instance::from_json(str_arg(json, "json")?)?;
        write_instance(out, inst)
    })
}

/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_to_json(inst: *const RmInstance, out: *mut *mut c_char) -> RmStatus {
    guard(|| write_string(out, instance_arg(inst)?.to_json()))
}

/// # Safety
/// `inst` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_free(inst: *mut RmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_edge_count(inst: *const RmInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.edge_count())
}

/// Number of rounds, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_rounds(inst: *const RmInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.rounds)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_gen_gneps(n: usize, eps: f64, out: *mut *mut RmInstance) -> RmStatus {
    guard(|| write_instance(out, harness::gen_gneps(n, eps)?))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_gen_separation(out: *mut *mut RmInstance) -> RmStatus {
    guard(|| write_instance(out, harness::gen_separation()))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_gen_knn(n: usize, p: f64, out: *mut *mut RmInstance) -> RmStatus {
    guard(|| write_instance(out, harness::gen_knn(n, p)?))
}

/// `profile` is one of "unit-small", "cap-small", "m2o-small", "hyper3-small".
///
/// # Safety
/// `profile` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_gen_random(profile: *const c_char, seed: u64, out: *mut *mut RmInstance) -> RmStatus {
    guard(|| {
        let profile = str_arg(profile, "profile")?.parse()?;
        write_instance(out, harness::gen_random(profile, seed))
    })
}

unsafe fn stats(
    inst: *const RmInstance,
    policy: *const c_char,
    trials: u64,
    seed: u64,
) -> Result<harness::RewardStats, Fail> {
    let inst = instance_arg(inst)?;
    let policy: PolicyId = str_arg(policy, "policy")?.parse()?;
    Ok(harness::monte_carlo(inst, policy, trials as usize, seed)?)
}

/// Monte Carlo reward of `policy` ("sm", "greedy_commit", "opt_exact", ...).
///
/// # Safety
/// `inst` must be a live handle, `policy` a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_monte_carlo(
    inst: *const RmInstance,
    policy: *const c_char,
    trials: u64,
    seed: u64,
    out: *mut RmRewardStats,
) -> RmStatus {
    guard(|| {
        let s = stats(inst, policy, trials, seed)?;
        write(out, RmRewardStats { trials: s.trials as u64, seed: s.seed, mean: s.mean, std_error: s.stderr }, "out")
    })
}

/// Same as [`rm_monte_carlo`] with the full statistics as JSON.
///
/// # Safety
/// As for [`rm_monte_carlo`]; free the string with [`rm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rm_monte_carlo_json(
    inst: *const RmInstance,
    policy: *const c_char,
    trials: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> RmStatus {
    guard(|| write_string(out, stats(inst, policy, trials, seed)?.to_json()))
}

/// Exact optimal expected reward, optionally restricted to committing policies.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_opt_value(inst: *const RmInstance, commit: bool, out: *mut f64) -> RmStatus {
    guard(|| write(out, policies::opt_value(instance_arg(inst)?, commit)?, "out"))
}

/// Simplex optimum of the factor-revealing LP at horizon `t`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_lp_solve(t: usize, variant: RmLpVariant, out: *mut f64) -> RmStatus {
    guard(|| write(out, lp::build_primal(t, variant.into())?.solve()?.objective, "out"))
}

/// Closed-form u(t).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_lp_u(t: usize, variant: RmLpVariant, out: *mut f64) -> RmStatus {
    guard(|| write(out, lp::u_closed_form(t, variant.into())?, "out"))
}

/// Approximation factor 1/u(t).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_lp_factor(t: usize, variant: RmLpVariant, out: *mut f64) -> RmStatus {
    guard(|| write(out, lp::approximation_factor(t, variant.into())?, "out"))
}

/// Checks the finite-horizon dual certificate, or the published expressions
/// when `printed` is set.
///
/// # Safety
/// `feasible` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_lp_check_dual(t: usize, variant: RmLpVariant, printed: bool, feasible: *mut bool) -> RmStatus {
    guard(|| {
        let form = if printed { CertificateForm::Printed } else { CertificateForm::FiniteHorizon };
        let v: LpVariant = variant.into();
        let cert = lp::dual_certificate(t, v, form)?;
        write(feasible, lp::verify_dual_feasible(&cert, t, v).feasible, "feasible")
    })
}

/// Checks one lemma at horizon `t` (0 means every horizon). Exact when
/// `trials` is 0, Monte Carlo otherwise. Writes a JSON array of reports and
/// whether all of them hold.
///
/// # Safety
/// `inst` must be a live handle, `lemma` a valid string, and `out_json` and
/// `holds` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rm_verify_json(
    inst: *const RmInstance,
    lemma: *const c_char,
    t: usize,
    trials: u64,
    seed: u64,
    out_json: *mut *mut c_char,
    holds: *mut bool,
) -> RmStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        let lemma: LemmaId = str_arg(lemma, "lemma")?.parse()?;
        let horizons: Vec<usize> = if t == 0 { (1..=inst.rounds).collect() } else { vec![t] };
        let mode = if trials == 0 { Mode::Exact } else { Mode::MonteCarlo { trials: trials as usize, seed } };
        let reports = verify_many(inst, &[lemma], &horizons, mode, &VerifyOptions::default())?;
        let all = reports.iter().all(|r| r.holds());
        let json = serde_json::to_string(&reports).map_err(|e| Fail(RmStatus::Numerical, e.to_string()))?;
        write(holds, all, "holds")?;
        write_string(out_json, json)
    })
}

/// Runs a named experiment bundle ("lp", "lemmas", ..., or "all") and
/// writes its JSON lines and pass flag.
///
/// # Safety
/// `bundle` must be a valid string; `out_lines` and `pass` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rm_reproduce(
    bundle: *const c_char,
    seed: u64,
    out_lines: *mut *mut c_char,
    pass: *mut bool,
) -> RmStatus {
    guard(|| {
        let name = str_arg(bundle, "bundle")?;
        let bundles: Vec<Bundle> = if name == "all" { Bundle::ALL.to_vec() } else { vec![name.parse()?] };
        let config = ReproduceConfig { seed, ..ReproduceConfig::default() };
        let mut text = String::new();
        let mut ok = true;
        for b in bundles {
            let r = harness::reproduce(b, &config)?;
            ok &= r.pass;
            text.push_str(&r.render());
        }
        write(pass, ok, "pass")?;
        write_string(out_lines, text)
    })
}
