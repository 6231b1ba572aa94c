//! C ABI for embedding the engine in non-Rust hosts.
//!
//! Conventions, uniform across the surface:
//!
//! - Every fallible call returns an [`FcgStatus`]; results come back through
//!   out-pointers, which are written only on `FCG_STATUS_OK`.
//! - Handles ([`FcgConfig`], [`FcgRun`]) are opaque; release them with the
//!   matching `*_free`. Freeing null is a no-op, double-free is not.
//! - String and array getters use a two-call protocol: call with `cap = 0`
//!   (buffer may be null) to learn the required size through `written`, then
//!   call again with a buffer at least that large. String sizes include the
//!   trailing nul.
//! - After any non-OK status, [`fcg_last_error`] returns a message for the
//!   calling thread, valid until that thread's next API call.
//! - Cross-language unwinding is undefined behaviour, so every entry point
//!   catches panics and turns them into `FCG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fedcigar::config::ExperimentConfig;
use fedcigar::experiment::{run_experiment, RunOutput};

/// Outcome of an API call. Values are stable; new ones are only appended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was out of range for the handle it addresses.
    InvalidArgument = 3,
    /// The configuration failed to parse or validate.
    Config = 4,
    /// The experiment itself failed.
    Run = 5,
    /// The supplied buffer is too small; `written` holds the required size.
    BufferTooSmall = 6,
    /// An internal invariant broke; the handle is still safe to free.
    Panic = 7,
}

/// Opaque parsed experiment configuration.
pub struct FcgConfig {
    inner: ExperimentConfig,
}

/// Opaque result of a finished experiment.
pub struct FcgRun {
    inner: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut text: String = msg.into();
    text.retain(|c| c != '\0');
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).unwrap());
}

/// Runs the body with a panic guard so unwinding never crosses the ABI.
fn guard(body: impl FnOnce() -> FcgStatus) -> FcgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic; see stderr for details");
            FcgStatus::Panic
        }
    }
}

/// Borrows a required C string argument, reporting null and encoding errors.
///
/// # Safety
/// `ptr` must be null or point to a nul-terminated string.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, FcgStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(FcgStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        FcgStatus::InvalidUtf8
    })
}

/// Borrows a required handle argument.
///
/// # Safety
/// `ptr` must be null or a pointer previously returned by this library.
unsafe fn handle_arg<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, FcgStatus> {
    match ptr.as_ref() {
        Some(r) => Ok(r),
        None => {
            set_error(format!("{name} is null"));
            Err(FcgStatus::NullPointer)
        }
    }
}

/// Two-call copy-out for byte strings; `written` receives len + 1 for the nul.
///
/// # Safety
/// `buf` must be valid for `cap` bytes when `cap > 0`; `written` must be
/// valid or null.
unsafe fn write_str_out(
    src: &str,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    if written.is_null() {
        set_error("written is null");
        return FcgStatus::NullPointer;
    }
    let needed = src.len() + 1;
    *written = needed;
    if cap < needed {
        set_error(format!("buffer of {cap} bytes, {needed} required"));
        return FcgStatus::BufferTooSmall;
    }
    if buf.is_null() {
        set_error("buf is null");
        return FcgStatus::NullPointer;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf.cast::<u8>(), src.len());
    *buf.add(src.len()) = 0;
    FcgStatus::Ok
}

/// ABI revision of this header and library, bumped on breaking change.
#[no_mangle]
pub extern "C" fn fcg_abi_version() -> u32 {
    1
}

/// Message for the calling thread's most recent failure.
///
/// The pointer stays valid until this thread's next call into the library;
/// it is never null, and holds an empty string when nothing failed yet.
#[no_mangle]
pub extern "C" fn fcg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses `key = value` configuration text into a handle.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be a valid pointer.
/// On success `*out` owns the handle and must go to [`fcg_config_free`].
#[no_mangle]
pub unsafe extern "C" fn fcg_config_parse(
    text: *const c_char,
    out: *mut *mut FcgConfig,
) -> FcgStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return FcgStatus::NullPointer;
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match ExperimentConfig::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FcgConfig { inner }));
                FcgStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                FcgStatus::Config
            }
        }
    })
}

/// Replaces one key in the configuration, revalidating the result.
///
/// # Safety
/// `cfg` must be a live handle from [`fcg_config_parse`]; `key` and `value`
/// must be nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fcg_config_override(
    cfg: *mut FcgConfig,
    key: *const c_char,
    value: *const c_char,
) -> FcgStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            set_error("cfg is null");
            return FcgStatus::NullPointer;
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(status), _) | (_, Err(status)) => return status,
        };
        match cfg.inner.with_override(key, value) {
            Ok(updated) => {
                cfg.inner = updated;
                FcgStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                FcgStatus::Config
            }
        }
    })
}

/// Copies the canonical echo of the configuration (two-call protocol).
///
/// # Safety
/// `cfg` must be a live handle; `buf`/`cap`/`written` follow the two-call
/// buffer contract described in the crate docs.
#[no_mangle]
pub unsafe extern "C" fn fcg_config_echo(
    cfg: *const FcgConfig,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    guard(|| {
        let cfg = match handle_arg(cfg, "cfg") {
            Ok(c) => c,
            Err(status) => return status,
        };
        write_str_out(&cfg.inner.to_text(), buf, cap, written)
    })
}

/// Releases a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle from [`fcg_config_parse`] that has not
/// been freed before.
#[no_mangle]
pub unsafe extern "C" fn fcg_config_free(cfg: *mut FcgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the full federated experiment described by `cfg`.
///
/// Blocks until every round and the final evaluation finish; the handle it
/// returns is immutable.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be a valid pointer. On success
/// `*out` owns the handle and must go to [`fcg_run_free`].
#[no_mangle]
pub unsafe extern "C" fn fcg_experiment_run(
    cfg: *const FcgConfig,
    out: *mut *mut FcgRun,
) -> FcgStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return FcgStatus::NullPointer;
        }
        let cfg = match handle_arg(cfg, "cfg") {
            Ok(c) => c,
            Err(status) => return status,
        };
        match run_experiment(&cfg.inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FcgRun { inner }));
                FcgStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                FcgStatus::Run
            }
        }
    })
}

/// Macro-averaged AUC over clients.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_macro_auc(run: *const FcgRun, out: *mut f64) -> FcgStatus {
    scalar_out(run, out, |r| r.report.macro_auc)
}

/// Macro-averaged F1 at the contamination threshold.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_macro_f1(run: *const FcgRun, out: *mut f64) -> FcgStatus {
    scalar_out(run, out, |r| r.report.macro_f1)
}

/// Degree cap the run resolved (relevant when the config left it automatic).
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_resolved_degree_cap(
    run: *const FcgRun,
    out: *mut usize,
) -> FcgStatus {
    scalar_out(run, out, |r| r.resolved_d_cap)
}

/// Seed the experiment ran under.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_seed(run: *const FcgRun, out: *mut u64) -> FcgStatus {
    scalar_out(run, out, |r| r.seed)
}

/// Number of federated clients in the run.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_client_count(run: *const FcgRun, out: *mut usize) -> FcgStatus {
    scalar_out(run, out, |r| r.scores.len())
}

/// Number of federation rounds the run executed.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_round_count(run: *const FcgRun, out: *mut usize) -> FcgStatus {
    scalar_out(run, out, |r| r.rounds.len())
}

/// Copies the final client-to-cluster assignment (two-call protocol,
/// one entry per client).
///
/// # Safety
/// `run` must be a live handle; `buf` must be valid for `cap` entries when
/// `cap > 0`; `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_assignment(
    run: *const FcgRun,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if written.is_null() {
            set_error("written is null");
            return FcgStatus::NullPointer;
        }
        let src = &run.inner.assignment.assignment;
        *written = src.len();
        if cap < src.len() {
            set_error(format!("buffer of {cap} entries, {} required", src.len()));
            return FcgStatus::BufferTooSmall;
        }
        if buf.is_null() {
            set_error("buf is null");
            return FcgStatus::NullPointer;
        }
        std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        FcgStatus::Ok
    })
}

/// Number of scored test graphs held by one client.
///
/// # Safety
/// `run` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_score_count(
    run: *const FcgRun,
    client: usize,
    out: *mut usize,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        let Some(scores) = run.inner.scores.get(client) else {
            set_error(format!(
                "client {client} out of range for {} clients",
                run.inner.scores.len()
            ));
            return FcgStatus::InvalidArgument;
        };
        if out.is_null() {
            set_error("out is null");
            return FcgStatus::NullPointer;
        }
        *out = scores.len();
        FcgStatus::Ok
    })
}

/// Copies one client's anomaly scores, in test order (two-call protocol).
///
/// When `labels` is non-null it receives, per graph, 1 for anomalous ground
/// truth and 0 for normal.
///
/// # Safety
/// `run` must be a live handle; `scores` (and `labels` when non-null) must
/// be valid for `cap` entries when `cap > 0`; `written` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_scores(
    run: *const FcgRun,
    client: usize,
    scores: *mut f64,
    labels: *mut u8,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        let Some(src) = run.inner.scores.get(client) else {
            set_error(format!(
                "client {client} out of range for {} clients",
                run.inner.scores.len()
            ));
            return FcgStatus::InvalidArgument;
        };
        if written.is_null() {
            set_error("written is null");
            return FcgStatus::NullPointer;
        }
        *written = src.len();
        if cap < src.len() {
            set_error(format!("buffer of {cap} entries, {} required", src.len()));
            return FcgStatus::BufferTooSmall;
        }
        if scores.is_null() {
            set_error("scores is null");
            return FcgStatus::NullPointer;
        }
        for (i, &(score, is_anomaly)) in src.iter().enumerate() {
            *scores.add(i) = score;
            if !labels.is_null() {
                *labels.add(i) = u8::from(is_anomaly);
            }
        }
        FcgStatus::Ok
    })
}

/// Copies the evaluation report rendered as text (two-call protocol).
///
/// # Safety
/// `run` must be a live handle; `buf`/`cap`/`written` follow the two-call
/// buffer contract.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_report(
    run: *const FcgRun,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        write_str_out(&run.inner.report_text(), buf, cap, written)
    })
}

/// Copies the per-round log, one JSON object per line (two-call protocol).
///
/// # Safety
/// `run` must be a live handle; `buf`/`cap`/`written` follow the two-call
/// buffer contract.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_round_log(
    run: *const FcgRun,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        write_str_out(&run.inner.round_log(), buf, cap, written)
    })
}

/// Releases a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle from [`fcg_experiment_run`] that has not
/// been freed before.
#[no_mangle]
pub unsafe extern "C" fn fcg_run_free(run: *mut FcgRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Shared shape of the scalar accessors.
///
/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid.
unsafe fn scalar_out<T>(
    run: *const FcgRun,
    out: *mut T,
    read: impl Fn(&RunOutput) -> T,
) -> FcgStatus {
    guard(|| {
        let run = match handle_arg(run, "run") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("out is null");
            return FcgStatus::NullPointer;
        }
        *out = read(&run.inner);
        FcgStatus::Ok
    })
}
