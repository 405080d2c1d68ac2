//! C ABI over the `oblivion` simulator.
//!
//! Results live behind opaque [`ObvResult`] handles. Every fallible call
//! returns an [`ObvStatus`]; on failure a message is available from
//! [`obv_last_error`] on the same thread until the next failing call.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`obv_string_free`]; handles with [`obv_result_free`].
//! Panics never cross the boundary: they surface as `OBV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use oblivion::dsl;
use oblivion::report::{emit, Format, RunInfo};
use oblivion::scenarios::{self, Epoch, ScenarioResult, SCENARIO_IDS};

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownScenario = 3,
    ParseError = 4,
    EvalError = 5,
    NotFound = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObvFormat {
    Table = 0,
    Csv = 1,
    Jsonl = 2,
}

impl From<ObvFormat> for Format {
    fn from(f: ObvFormat) -> Format {
        match f {
            ObvFormat::Table => Format::Table,
            ObvFormat::Csv => Format::Csv,
            ObvFormat::Jsonl => Format::Jsonl,
        }
    }
}

/// Opaque scenario result.
pub struct ObvResult {
    inner: ScenarioResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ObvStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: ObvStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', "\\0")).expect("interior nuls escaped");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, converting failures and panics into a status code.
fn guard(body: impl FnOnce() -> Outcome) -> ObvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ObvStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {what}"));
            ObvStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(ObvStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|e| fail(ObvStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

/// # Safety
/// `p` is null or points to writable memory for a `T`.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Outcome {
    if p.is_null() {
        return fail(ObvStatus::NullPointer, format!("{what} is null"));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `p` is null or a live handle from this library.
unsafe fn handle<'a>(p: *const ObvResult) -> Result<&'a ScenarioResult, Failure> {
    p.as_ref()
        .map(|r| &r.inner)
        .ok_or(Failure(ObvStatus::NullPointer, "result handle is null".into()))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', "\\0"))
        .expect("interior nuls escaped")
        .into_raw()
}

fn boxed(r: ScenarioResult) -> *mut ObvResult {
    Box::into_raw(Box::new(ObvResult { inner: r }))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn obv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn obv_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).expect("no nuls"))
        .as_ptr()
}

#[no_mangle]
pub extern "C" fn obv_scenario_count() -> usize {
    SCENARIO_IDS.len()
}

/// Id of built-in scenario `index` as a static string, or null when out of range.
#[no_mangle]
pub extern "C" fn obv_scenario_id(index: usize) -> *const c_char {
    static IDS: OnceLock<Vec<CString>> = OnceLock::new();
    IDS.get_or_init(|| {
        SCENARIO_IDS
            .iter()
            .map(|s| CString::new(*s).expect("no nuls"))
            .collect()
    })
    .get(index)
    .map_or(ptr::null(), |c| c.as_ptr())
}

/// Runs built-in scenario `id`. `trials` matters only for Monte Carlo
/// scenarios and must be at least 1.
///
/// # Safety
/// `id` is a nul-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn obv_run_builtin(
    id: *const c_char,
    trials: u64,
    seed: u64,
    out: *mut *mut ObvResult,
) -> ObvStatus {
    guard(|| {
        let id = text(id, "scenario id")?;
        if out.is_null() {
            return fail(ObvStatus::NullPointer, "output pointer is null");
        }
        if trials == 0 {
            return fail(ObvStatus::InvalidArgument, "trials must be at least 1");
        }
        let trials = usize::try_from(trials)
            .map_err(|_| Failure(ObvStatus::InvalidArgument, "trials too large".into()))?;
        let r = match scenarios::run_builtin(id, trials, seed) {
            None => return fail(ObvStatus::UnknownScenario, format!("unknown scenario `{id}`")),
            Some(r) => r.map_err(|e| Failure(ObvStatus::EvalError, e.to_string()))?,
        };
        write(out, boxed(r), "output pointer")
    })
}

/// Parses and evaluates a `.scn` description held in `source`.
///
/// # Safety
/// `source` and `name` are nul-terminated strings; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn obv_run_source(
    source: *const c_char,
    name: *const c_char,
    out: *mut *mut ObvResult,
) -> ObvStatus {
    guard(|| {
        let source = text(source, "source")?;
        let name = text(name, "scenario name")?;
        if out.is_null() {
            return fail(ObvStatus::NullPointer, "output pointer is null");
        }
        let spec = dsl::parse(source).map_err(|d| Failure(ObvStatus::ParseError, d.to_string()))?;
        let r = dsl::evaluate(&spec, name).map_err(|e| Failure(ObvStatus::EvalError, e.to_string()))?;
        write(out, boxed(r), "output pointer")
    })
}

/// Canonical text of a `.scn` description.
///
/// # Safety
/// `source` is a nul-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn obv_render_source(source: *const c_char, out: *mut *mut c_char) -> ObvStatus {
    guard(|| {
        let source = text(source, "source")?;
        if out.is_null() {
            return fail(ObvStatus::NullPointer, "output pointer is null");
        }
        let spec = dsl::parse(source).map_err(|d| Failure(ObvStatus::ParseError, d.to_string()))?;
        write(out, owned_string(dsl::render(&spec)), "output pointer")
    })
}

/// Weak value `name` as real and imaginary parts.
///
/// # Safety
/// `result` is a live handle; `name` a nul-terminated string; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn obv_result_weak_value(
    result: *const ObvResult,
    name: *const c_char,
    re: *mut f64,
    im: *mut f64,
) -> ObvStatus {
    guard(|| {
        let r = handle(result)?;
        let name = text(name, "name")?;
        if re.is_null() || im.is_null() {
            return fail(ObvStatus::NullPointer, "output pointer is null");
        }
        let w = r
            .weak_value(name)
            .ok_or_else(|| Failure(ObvStatus::NotFound, format!("no weak value `{name}`")))?;
        write(re, w.re, "re")?;
        write(im, w.im, "im")
    })
}

/// Probability `name`, including `.complement` and `.cumulative` entries.
///
/// # Safety
/// `result` is a live handle; `name` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obv_result_probability(
    result: *const ObvResult,
    name: *const c_char,
    out: *mut f64,
) -> ObvStatus {
    guard(|| {
        let r = handle(result)?;
        let name = text(name, "name")?;
        let p = r
            .probability(name)
            .ok_or_else(|| Failure(ObvStatus::NotFound, format!("no probability `{name}`")))?;
        write(out, p, "output pointer")
    })
}

/// Monte Carlo or pointer statistic `name`.
///
/// # Safety
/// `result` is a live handle; `name` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obv_result_trial_stat(
    result: *const ObvResult,
    name: *const c_char,
    out: *mut f64,
) -> ObvStatus {
    guard(|| {
        let r = handle(result)?;
        let name = text(name, "name")?;
        let v = r
            .trial_stats
            .get(name)
            .copied()
            .ok_or_else(|| Failure(ObvStatus::NotFound, format!("no trial statistic `{name}`")))?;
        write(out, v, "output pointer")
    })
}

/// Schmidt rank across the first factor at `epoch` (`t0`, `t1`, `t2`, `final`).
///
/// # Safety
/// `result` is a live handle; `epoch` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obv_result_schmidt_rank(
    result: *const ObvResult,
    epoch: *const c_char,
    out: *mut usize,
) -> ObvStatus {
    guard(|| {
        let r = handle(result)?;
        let label = text(epoch, "epoch")?;
        let e: Epoch = label
            .parse()
            .map_err(|e: oblivion::Error| Failure(ObvStatus::InvalidArgument, e.to_string()))?;
        let rank = r
            .schmidt_ranks
            .get(&e)
            .copied()
            .ok_or_else(|| Failure(ObvStatus::NotFound, format!("no Schmidt rank at `{label}`")))?;
        write(out, rank, "output pointer")
    })
}

/// Renders the result in `format` with `seed` in the header.
///
/// # Safety
/// `result` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn obv_result_emit(
    result: *const ObvResult,
    format: ObvFormat,
    seed: u64,
    out: *mut *mut c_char,
) -> ObvStatus {
    guard(|| {
        let r = handle(result)?;
        let trials = r.trial_stats.get("trials").map(|t| *t as usize);
        let info = RunInfo {
            seed,
            trials,
            color: false,
        };
        write(out, owned_string(emit(r, format.into(), &info)), "output pointer")
    })
}

/// # Safety
/// `result` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obv_result_free(result: *mut ObvResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` is null or a string returned through an out-parameter of this library.
#[no_mangle]
pub unsafe extern "C" fn obv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
