//! C ABI over the discosim core: opaque handles, integer status codes, and a
//! thread-local last-error message. Every entry point catches panics.
//!
//! Ownership: `*_new`/`*_parse`/`ds_run_curve` return handles the caller must
//! release with the matching `*_free`. Strings passed in are borrowed,
//! NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use discosim::cli::config::ConfigSpec;
use discosim::infer::{invert_ci, normal_quantile, wald_test};
use discosim::mc::{run_curve, ExperimentConfig, RowLabel, Scenario, SummaryTable};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    DsOk = 0,
    DsErrArgument = 1,
    DsErrDomain = 2,
    DsErrEstimation = 3,
    DsErrConfig = 4,
    DsErrIo = 5,
    DsErrNullPointer = 6,
    DsErrUtf8 = 7,
    DsErrPanic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &discosim::Error) -> DsStatus {
    use discosim::Error::*;
    match err {
        Argument(_) => DsStatus::DsErrArgument,
        Domain(_) => DsStatus::DsErrDomain,
        Estimation { .. } => DsStatus::DsErrEstimation,
        Config { .. } => DsStatus::DsErrConfig,
        Io(_) => DsStatus::DsErrIo,
    }
}

fn fail(err: discosim::Error) -> DsStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

fn guarded(f: impl FnOnce() -> DsStatus) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DsStatus::DsErrPanic
        }
    }
}

/// Copy the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null with
/// `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn ds_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, DsStatus> {
    if p.is_null() {
        set_error("null string pointer");
        return Err(DsStatus::DsErrNullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        DsStatus::DsErrUtf8
    })
}

/// Opaque experiment handle.
pub struct DsConfig {
    inner: ExperimentConfig,
}

/// Opaque result-table handle.
pub struct DsTable {
    inner: SummaryTable,
}

/// One summary row. `is_q` is 1 for the alternative's own row, in which case
/// `k` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsRow {
    pub is_q: c_int,
    pub k: u64,
    pub reject_rate: f64,
    pub cover_rate: f64,
    pub mean_ci_len: f64,
    pub mcse_reject: f64,
    pub mcse_cover: f64,
    pub n_eff_mean: f64,
    pub failures: usize,
}

/// Build the built-in benchmark for `scenario` ("rdd", "rkd" or "bunching")
/// with the given master seed.
///
/// # Safety
/// `scenario` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_benchmark_config(
    scenario: *const c_char,
    seed: u64,
    out: *mut *mut DsConfig,
) -> DsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DsStatus::DsErrNullPointer;
        }
        let name = match read_str(scenario) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let sc = match name {
            "rdd" => Scenario::Rdd,
            "rkd" => Scenario::Rkd,
            "bunching" => Scenario::Bunching,
            other => {
                set_error(format!("unknown scenario '{other}'"));
                return DsStatus::DsErrArgument;
            }
        };
        match ConfigSpec::benchmark(sc).to_experiment(Some(seed)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DsConfig { inner }));
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a config file's text. `has_seed != 0` overrides the config's seed
/// with `seed`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_config_parse(
    text: *const c_char,
    has_seed: c_int,
    seed: u64,
    out: *mut *mut DsConfig,
) -> DsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DsStatus::DsErrNullPointer;
        }
        let text = match read_str(text) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let spec = match ConfigSpec::parse(text) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let seed_override = if has_seed != 0 { Some(seed) } else { None };
        match spec.to_experiment(seed_override) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DsConfig { inner }));
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Run the full rejection/coverage curve for a config.
///
/// # Safety
/// `config` must be a live handle from this library and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_run_curve(
    config: *const DsConfig,
    out: *mut *mut DsTable,
) -> DsStatus {
    guarded(|| {
        if config.is_null() || out.is_null() {
            set_error("null pointer");
            return DsStatus::DsErrNullPointer;
        }
        match run_curve(&(*config).inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DsTable { inner }));
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of rows in a table (the k rows plus the final Q row).
///
/// # Safety
/// `table` must be a live handle; null yields 0.
#[no_mangle]
pub unsafe extern "C" fn ds_table_num_rows(table: *const DsTable) -> usize {
    if table.is_null() {
        return 0;
    }
    (*table).inner.rows.len()
}

/// Copy row `index` into `out`.
///
/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_table_row(
    table: *const DsTable,
    index: usize,
    out: *mut DsRow,
) -> DsStatus {
    guarded(|| {
        if table.is_null() || out.is_null() {
            set_error("null pointer");
            return DsStatus::DsErrNullPointer;
        }
        let rows = &(*table).inner.rows;
        let Some(row) = rows.get(index) else {
            set_error(format!("row index {index} out of range ({} rows)", rows.len()));
            return DsStatus::DsErrArgument;
        };
        let (is_q, k) = match row.label {
            RowLabel::K(k) => (0, k),
            RowLabel::Q => (1, 0),
        };
        *out = DsRow {
            is_q,
            k,
            reject_rate: row.reject_rate,
            cover_rate: row.cover_rate,
            mean_ci_len: row.mean_ci_len,
            mcse_reject: row.mcse_reject,
            mcse_cover: row.mcse_cover,
            n_eff_mean: row.n_eff_mean,
            failures: row.failures,
        };
        DsStatus::DsOk
    })
}

/// Write the table as CSV to `path`.
///
/// # Safety
/// `table` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ds_table_write_csv(
    table: *const DsTable,
    path: *const c_char,
) -> DsStatus {
    guarded(|| {
        if table.is_null() {
            set_error("null table pointer");
            return DsStatus::DsErrNullPointer;
        }
        let path = match read_str(path) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match std::fs::write(path, (*table).inner.to_csv()) {
            Ok(()) => DsStatus::DsOk,
            Err(e) => {
                set_error(format!("cannot write {path}: {e}"));
                DsStatus::DsErrIo
            }
        }
    })
}

/// Standard normal quantile at `p` in (0, 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_normal_quantile(p: f64, out: *mut f64) -> DsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DsStatus::DsErrNullPointer;
        }
        match normal_quantile(p) {
            Ok(q) => {
                *out = q;
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Two-sided level-`alpha` z test of `m0` against `estimate` with standard
/// error `stderr`. Writes the z statistic and the 0/1 rejection flag.
///
/// # Safety
/// `z_out` and `reject_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ds_wald_test(
    estimate: f64,
    stderr: f64,
    m0: f64,
    alpha: f64,
    z_out: *mut f64,
    reject_out: *mut c_int,
) -> DsStatus {
    guarded(|| {
        if z_out.is_null() || reject_out.is_null() {
            set_error("null output pointer");
            return DsStatus::DsErrNullPointer;
        }
        match wald_test(estimate, stderr, m0, alpha) {
            Ok(test) => {
                *z_out = test.statistic;
                *reject_out = test.reject as c_int;
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// The `1 - alpha` confidence interval dual to the z test.
///
/// # Safety
/// `lo_out` and `hi_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ds_invert_ci(
    estimate: f64,
    stderr: f64,
    alpha: f64,
    lo_out: *mut f64,
    hi_out: *mut f64,
) -> DsStatus {
    guarded(|| {
        if lo_out.is_null() || hi_out.is_null() {
            set_error("null output pointer");
            return DsStatus::DsErrNullPointer;
        }
        match invert_ci(estimate, stderr, alpha) {
            Ok(ci) => {
                *lo_out = ci.lo;
                *hi_out = ci.hi;
                DsStatus::DsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a config handle. Null is a no-op.
///
/// # Safety
/// `config` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_config_free(config: *mut DsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Release a table handle. Null is a no-op.
///
/// # Safety
/// `table` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_table_free(table: *mut DsTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
