//! C ABI over `darbouxkit`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Strings returned through `char **` are freed with
//! [`dk_string_free`]. When a call returns anything but [`DkStatus::Ok`] or
//! [`DkStatus::CheckFailed`], [`dk_last_error`] describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use darbouxkit::cli::{self, Command, Invocation, Options, Report};
use darbouxkit::model::{self, ModelFile, Section};
use darbouxkit::vanishing::{builtin_datum, motivic_nearby, motivic_vanishing};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DkStatus {
    Ok = 0,
    CheckFailed = 1,
    ParseError = 2,
    NullArgument = 3,
    InvalidUtf8 = 4,
    NotFound = 5,
    EvalError = 6,
    UnknownCommand = 7,
}

/// A parsed model file.
pub struct DkModel {
    inner: ModelFile,
}

/// The outcome of a command run.
pub struct DkReport {
    inner: Report,
    exit: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: DkStatus, message: impl Into<String>) -> DkStatus {
    let text = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, DkStatus> {
    if p.is_null() {
        return Err(fail(DkStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(DkStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> DkStatus {
    if out.is_null() {
        return fail(DkStatus::NullArgument, "null output pointer");
    }
    *out = CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw();
    DkStatus::Ok
}

fn command(name: &str) -> Option<Command> {
    Some(match name {
        "darboux build" => Command::DarbouxBuild,
        "darboux check" => Command::DarbouxCheck,
        "crit" => Command::Crit,
        "cotangent" => Command::Cotangent,
        "glue" => Command::Glue,
        "motive eval" => Command::MotiveEval,
        "vanish" => Command::Vanish,
        "atlas" => Command::Atlas,
        _ => return None,
    })
}

/// Message for the most recent failure on this thread; valid until the next call.
#[no_mangle]
pub extern "C" fn dk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn dk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dk_model_parse(text: *const c_char, out: *mut *mut DkModel) -> DkStatus {
    if out.is_null() {
        return fail(DkStatus::NullArgument, "null output pointer");
    }
    *out = ptr::null_mut();
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match model::parse(text) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(DkModel { inner: m }));
            DkStatus::Ok
        }
        Err(e) => fail(DkStatus::ParseError, e.to_string()),
    }
}

/// # Safety
/// `m` must come from [`dk_model_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn dk_model_free(m: *mut DkModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live model handle or null.
#[no_mangle]
pub unsafe extern "C" fn dk_model_section_count(m: *const DkModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.sections.len())
}

/// Canonical text of the model.
///
/// # Safety
/// `m` must be a live model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dk_model_print(m: *const DkModel, out: *mut *mut c_char) -> DkStatus {
    match m.as_ref() {
        Some(m) => write_string(out, m.inner.to_string()),
        None => fail(DkStatus::NullArgument, "null model"),
    }
}

/// Value of `let name` in `[motive section]`, in normal form.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dk_model_motive_value(
    m: *const DkModel,
    section: *const c_char,
    name: *const c_char,
    out: *mut *mut c_char,
) -> DkStatus {
    let Some(m) = m.as_ref() else {
        return fail(DkStatus::NullArgument, "null model");
    };
    let (section, name) = match (read_str(section), read_str(name)) {
        (Ok(s), Ok(n)) => (s, n),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let found = m.inner.sections.iter().find_map(|s| match s {
        Section::Motive(ms) if ms.name == section => Some(ms),
        _ => None,
    });
    let Some(ms) = found else {
        return fail(DkStatus::NotFound, format!("no [motive {section}] section"));
    };
    let resolved = match ms.resolve() {
        Ok(r) => r,
        Err(e) => return fail(DkStatus::EvalError, e.to_string()),
    };
    match resolved.value(name) {
        Some(v) => write_string(out, v.to_string()),
        None => fail(DkStatus::NotFound, format!("no `let {name}` in [motive {section}]")),
    }
}

/// Vanishing (`phi != 0`) or nearby cycle of a built-in resolution datum.
///
/// # Safety
/// `spec` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dk_vanishing_builtin(spec: *const c_char, phi: i32, out: *mut *mut c_char) -> DkStatus {
    let spec = match read_str(spec) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let datum = match builtin_datum(spec) {
        Ok(d) => d,
        Err(e) => return fail(DkStatus::NotFound, e.to_string()),
    };
    let value = if phi != 0 { motivic_vanishing(&datum) } else { motivic_nearby(&datum) };
    match value {
        Ok(v) => write_string(out, v.to_string()),
        Err(e) => fail(DkStatus::EvalError, e.to_string()),
    }
}

/// Runs a command (`"darboux check"`, `"glue"`, ...) on model files.
///
/// Returns `Ok`, `CheckFailed` or `ParseError` like the CLI exit codes; the
/// report is produced in all three cases.
///
/// # Safety
/// `inputs` must point to `n_inputs` NUL-terminated paths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dk_run(
    command_name: *const c_char,
    inputs: *const *const c_char,
    n_inputs: usize,
    out: *mut *mut DkReport,
) -> DkStatus {
    if out.is_null() {
        return fail(DkStatus::NullArgument, "null output pointer");
    }
    *out = ptr::null_mut();
    let name = match read_str(command_name) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let Some(command) = command(name) else {
        return fail(DkStatus::UnknownCommand, format!("unknown command `{name}`"));
    };
    if n_inputs > 0 && inputs.is_null() {
        return fail(DkStatus::NullArgument, "null input list");
    }
    let mut paths = Vec::with_capacity(n_inputs);
    for i in 0..n_inputs {
        match read_str(*inputs.add(i)) {
            Ok(p) => paths.push(PathBuf::from(p)),
            Err(e) => return e,
        }
    }
    let (exit, report) = cli::run(&Invocation { command, options: Options::default(), inputs: paths });
    let status = match exit {
        0 => DkStatus::Ok,
        1 => DkStatus::CheckFailed,
        _ => {
            let msg = report.checks.last().map(|c| c.detail.clone()).unwrap_or_default();
            fail(DkStatus::ParseError, msg)
        }
    };
    *out = Box::into_raw(Box::new(DkReport { inner: report, exit }));
    status
}

/// # Safety
/// `r` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn dk_report_exit_code(r: *const DkReport) -> i32 {
    r.as_ref().map_or(2, |r| r.exit)
}

/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dk_report_json(r: *const DkReport, out: *mut *mut c_char) -> DkStatus {
    match r.as_ref() {
        Some(r) => write_string(out, r.inner.to_json()),
        None => fail(DkStatus::NullArgument, "null report"),
    }
}

/// # Safety
/// `r` must come from [`dk_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn dk_report_free(r: *mut DkReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
