//! C ABI for the quasi-exactly solvable potential solver.
//!
//! The interface follows the usual C conventions:
//!
//! * solver results live behind an opaque [`QesSolutionSet`] handle,
//!   released with [`qes_solution_set_free`],
//! * every fallible call returns a `QES_STATUS_*` code and writes its result
//!   through out-pointers; [`qes_last_error_message`] retrieves a
//!   caller-freed copy of the most recent error text on this thread,
//! * strings returned to the caller are NUL-terminated copies owned by the
//!   caller and released with [`qes_string_free`].
//!
//! Panics never unwind across the boundary; they surface as
//! `QES_STATUS_RUNTIME`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qes::oracle::{potential_eval, validate, PotentialSpec, ValidateOptions};
use qes::record::{timestamp_now, to_json_line, ProblemBlock, Provenance, SolutionEntry};
use qes::solver::{
    solve_catalogued, solve_generic, solve_harmonic, solve_zero_energy, GenericOptions,
};
use qes::{BetaVector, QesError, QesSolution};

/// Success.
pub const QES_STATUS_OK: i32 = 0;
/// A required pointer argument was NULL.
pub const QES_STATUS_NULL_ARGUMENT: i32 = 1;
/// Invalid parameter, dimension, or index.
pub const QES_STATUS_INVALID: i32 = 2;
/// The request is outside what this build can solve.
pub const QES_STATUS_UNSUPPORTED: i32 = 3;
/// The constraints ruled every branch out.
pub const QES_STATUS_NO_SOLUTION: i32 = 4;
/// (N, M) is outside the zero-energy families M = kN, kN + 1.
pub const QES_STATUS_BAD_FAMILY: i32 = 5;
/// Internal failure (I/O, serialization, panic).
pub const QES_STATUS_RUNTIME: i32 = 6;

/// Opaque batch of solved eigenpairs, ordered by ascending energy.
pub struct QesSolutionSet {
    solutions: Vec<QesSolution>,
}

/// Plain-data summary of one grid-oracle validation run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QesOracleSummary {
    /// Half-width of the Dirichlet box the spectrum was computed in.
    pub grid_half_width: f64,
    /// Interior grid points used.
    pub grid_steps: usize,
    /// Index of the grid eigenvalue closest to the analytic energy.
    pub matched_index: usize,
    /// That grid eigenvalue.
    pub matched_eigenvalue: f64,
    /// Grid eigenvalue minus analytic energy.
    pub matched_delta: f64,
    /// Scaled defect of the analytic eigenpair in the eigenvalue equation.
    pub residual_norm: f64,
    /// Sign changes of the matched grid eigenvector.
    pub node_count: usize,
    /// Sign changes of the analytic wavefunction on the same grid.
    pub analytic_nodes: usize,
    /// True when probability mass leaks into the box walls.
    pub wall_warning: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn remember_error(text: &str) {
    let sanitized: Vec<u8> = text.bytes().filter(|&b| b != 0).collect();
    let stored = CString::new(sanitized).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn status_of(err: &QesError) -> i32 {
    match err {
        QesError::DimensionMismatch(_)
        | QesError::InvalidParameter(_)
        | QesError::IndexOutOfRange(_) => QES_STATUS_INVALID,
        QesError::Unsupported(_) => QES_STATUS_UNSUPPORTED,
        QesError::ZeroEnergyOrder { .. } => QES_STATUS_BAD_FAMILY,
        QesError::NoSolution(_) => QES_STATUS_NO_SOLUTION,
        QesError::Io(_) | QesError::Record(_) => QES_STATUS_RUNTIME,
    }
}

fn fail(err: &QesError) -> i32 {
    remember_error(&err.to_string());
    status_of(err)
}

fn fail_null(what: &str) -> i32 {
    remember_error(&format!("{what} must not be NULL"));
    QES_STATUS_NULL_ARGUMENT
}

/// Run a fallible body, converting panics into `QES_STATUS_RUNTIME`.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            remember_error("internal panic");
            QES_STATUS_RUNTIME
        }
    }
}

/// Shared solve plumbing: closed harmonic form for N = 2, catalogue for
/// N in 4..=6, energy-only numeric hunt otherwise.
fn solve_for_betas(n: usize, m: usize, alpha: f64, betas: BetaVector) -> Result<Vec<QesSolution>, QesError> {
    if n == 2 {
        return Ok(vec![solve_harmonic(m, alpha, betas)?]);
    }
    let problem = qes::QesProblem::from_betas(n, m, betas.clone())?;
    let c = &problem.casimirs;
    let rest: Vec<Option<f64>> = (3..n).map(|k| Some(c.get(k))).collect();
    let outcome = if (4..=6).contains(&n) {
        match solve_catalogued(n, m, c.get(1), c.get(2), &rest) {
            Ok(outcome) => outcome,
            Err(QesError::Unsupported(_)) => {
                solve_generic(n, m, c.get(1), c.get(2), &rest, &[], &GenericOptions::default())?
            }
            Err(e) => return Err(e),
        }
    } else {
        solve_generic(n, m, c.get(1), c.get(2), &rest, &[], &GenericOptions::default())?
    };
    outcome
        .solutions
        .into_iter()
        .map(|s| s.with_betas(betas.clone()))
        .collect()
}

fn boxed_set(solutions: Vec<QesSolution>, out: *mut *mut QesSolutionSet) -> i32 {
    if solutions.is_empty() {
        remember_error("no solution branch survived the constraints");
        return QES_STATUS_NO_SOLUTION;
    }
    let handle = Box::new(QesSolutionSet { solutions });
    // Safety contract of the callers guarantees `out` is a valid pointer.
    unsafe { *out = Box::into_raw(handle) };
    QES_STATUS_OK
}

fn solution_at<'a>(set: *const QesSolutionSet, index: usize) -> Result<&'a QesSolution, i32> {
    if set.is_null() {
        return Err(fail_null("set"));
    }
    let set = unsafe { &*set };
    set.solutions.get(index).ok_or_else(|| {
        remember_error(&format!(
            "index {index} out of range for {} solutions",
            set.solutions.len()
        ));
        QES_STATUS_INVALID
    })
}

/// Solve the block with fully specified labels `beta_1..beta_N`.
///
/// `alpha` is only read for `n == 2`, where the linear coupling stays free;
/// for `n >= 3` it is fixed by (N, M). On success `*out` owns the result.
///
/// # Safety
/// `betas` must point to `len` readable doubles and `out` to a writable
/// pointer slot. The returned handle must be released with
/// [`qes_solution_set_free`].
#[no_mangle]
pub unsafe extern "C" fn qes_solve_betas(
    n: usize,
    m: usize,
    alpha: f64,
    betas: *const f64,
    len: usize,
    out: *mut *mut QesSolutionSet,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        if betas.is_null() {
            return fail_null("betas");
        }
        let labels = unsafe { std::slice::from_raw_parts(betas, len) }.to_vec();
        let betas = match BetaVector::new(labels) {
            Ok(b) => b,
            Err(e) => return fail(&e),
        };
        match solve_for_betas(n, m, alpha, betas) {
            Ok(solutions) => boxed_set(solutions, out),
            Err(e) => fail(&e),
        }
    })
}

/// Solve from the invariants `C_1, C_2` (higher ones family-determined) and
/// realize labels with the given `beta_2`.
///
/// # Safety
/// `out` must point to a writable pointer slot; release the result with
/// [`qes_solution_set_free`].
#[no_mangle]
pub unsafe extern "C" fn qes_solve_casimirs(
    n: usize,
    m: usize,
    c1: f64,
    c2: f64,
    beta2: f64,
    out: *mut *mut QesSolutionSet,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let rest = vec![None; n.saturating_sub(3)];
        let outcome = if (4..=6).contains(&n) {
            solve_catalogued(n, m, c1, c2, &rest)
        } else {
            solve_generic(n, m, c1, c2, &rest, &[], &GenericOptions::default())
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        let realized: Result<Vec<_>, _> =
            outcome.solutions.into_iter().map(|s| s.realize(beta2)).collect();
        match realized {
            Ok(solutions) => boxed_set(solutions, out),
            Err(e) => fail(&e),
        }
    })
}

/// Solve the zero-energy family at (N, M); valid orders are M = kN and
/// M = kN + 1, anything else returns `QES_STATUS_BAD_FAMILY`.
///
/// # Safety
/// `out` must point to a writable pointer slot; release the result with
/// [`qes_solution_set_free`].
#[no_mangle]
pub unsafe extern "C" fn qes_solve_zero_energy(
    n: usize,
    m: usize,
    out: *mut *mut QesSolutionSet,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match solve_zero_energy(n, m) {
            Ok(sol) => boxed_set(vec![sol], out),
            Err(e) => fail(&e),
        }
    })
}

/// Number of solution branches in the set (0 for NULL).
///
/// # Safety
/// `set` must be NULL or a live handle from a `qes_solve_*` call.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_set_len(set: *const QesSolutionSet) -> usize {
    if set.is_null() {
        return 0;
    }
    unsafe { &*set }.solutions.len()
}

/// Energy of branch `index`.
///
/// # Safety
/// `set` must be a live handle and `energy` a writable double.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_energy(
    set: *const QesSolutionSet,
    index: usize,
    energy: *mut f64,
) -> i32 {
    guarded(|| {
        if energy.is_null() {
            return fail_null("energy");
        }
        match solution_at(set, index) {
            Ok(sol) => {
                unsafe { *energy = sol.energy };
                QES_STATUS_OK
            }
            Err(status) => status,
        }
    })
}

/// Number of block coefficients (M + 1) of branch `index`.
///
/// # Safety
/// `set` must be a live handle and `count` a writable size_t.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_coefficient_count(
    set: *const QesSolutionSet,
    index: usize,
    count: *mut usize,
) -> i32 {
    guarded(|| {
        if count.is_null() {
            return fail_null("count");
        }
        match solution_at(set, index) {
            Ok(sol) => {
                unsafe { *count = sol.coeffs.0.len() };
                QES_STATUS_OK
            }
            Err(status) => status,
        }
    })
}

/// Copy the block coefficients `a_0..a_M` of branch `index` into `buf`.
///
/// # Safety
/// `buf` must point to at least `buf_len` writable doubles, with `buf_len`
/// at least the value reported by [`qes_solution_coefficient_count`].
#[no_mangle]
pub unsafe extern "C" fn qes_solution_coefficients(
    set: *const QesSolutionSet,
    index: usize,
    buf: *mut f64,
    buf_len: usize,
) -> i32 {
    guarded(|| {
        if buf.is_null() {
            return fail_null("buf");
        }
        match solution_at(set, index) {
            Ok(sol) => {
                let coeffs = &sol.coeffs.0;
                if buf_len < coeffs.len() {
                    remember_error(&format!(
                        "buffer holds {buf_len} doubles, need {}",
                        coeffs.len()
                    ));
                    return QES_STATUS_INVALID;
                }
                unsafe {
                    std::ptr::copy_nonoverlapping(coeffs.as_ptr(), buf, coeffs.len());
                }
                QES_STATUS_OK
            }
            Err(status) => status,
        }
    })
}

/// Branch tag of solution `index` as a caller-freed C string.
///
/// # Safety
/// `out` must point to a writable pointer slot; free the string with
/// [`qes_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qes_solution_branch(
    set: *const QesSolutionSet,
    index: usize,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match solution_at(set, index) {
            Ok(sol) => {
                let s = CString::new(sol.branch.clone()).unwrap_or_default();
                unsafe { *out = s.into_raw() };
                QES_STATUS_OK
            }
            Err(status) => status,
        }
    })
}

/// Serialize branch `index` as one JSON record line (same schema as the
/// `qes solve` command) into a caller-freed C string.
///
/// # Safety
/// `out` must point to a writable pointer slot; free the string with
/// [`qes_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qes_solution_record_json(
    set: *const QesSolutionSet,
    index: usize,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let sol = match solution_at(set, index) {
            Ok(sol) => sol,
            Err(status) => return status,
        };
        let record = match record_for(sol) {
            Ok(record) => record,
            Err(e) => return fail(&e),
        };
        match to_json_line(&record) {
            Ok(json) => {
                let s = CString::new(json).unwrap_or_default();
                unsafe { *out = s.into_raw() };
                QES_STATUS_OK
            }
            Err(e) => fail(&e),
        }
    })
}

fn record_for(sol: &QesSolution) -> Result<qes::record::SolutionRecord, QesError> {
    let problem = ProblemBlock::from_solution(sol, false, None)?;
    Ok(qes::record::SolutionRecord {
        schema_version: qes::record::SCHEMA_VERSION.to_string(),
        problem,
        solutions: vec![SolutionEntry {
            branch: sol.branch.clone(),
            energy: sol.energy,
            coefficients: sol.coeffs.0.clone(),
            node_count: 0,
            continuity_residual: None,
        }],
        oracle: None,
        provenance: Provenance {
            command: "qes-ffi".to_string(),
            timestamp: timestamp_now(),
        },
    })
}

/// Potential value `V(x)` of the problem behind branch `index`.
///
/// # Safety
/// `set` must be a live handle and `value` a writable double.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_potential(
    set: *const QesSolutionSet,
    index: usize,
    x: f64,
    value: *mut f64,
) -> i32 {
    guarded(|| {
        if value.is_null() {
            return fail_null("value");
        }
        let sol = match solution_at(set, index) {
            Ok(sol) => sol,
            Err(status) => return status,
        };
        match PotentialSpec::from_solution(sol) {
            Ok(spec) => {
                unsafe { *value = potential_eval(x, &spec) };
                QES_STATUS_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Wavefunction value `psi(x)` of branch `index` (unnormalized).
///
/// # Safety
/// `set` must be a live handle and `value` a writable double.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_wavefunction(
    set: *const QesSolutionSet,
    index: usize,
    x: f64,
    value: *mut f64,
) -> i32 {
    guarded(|| {
        if value.is_null() {
            return fail_null("value");
        }
        let sol = match solution_at(set, index) {
            Ok(sol) => sol,
            Err(status) => return status,
        };
        match qes::oracle::wavefunction_eval(x, sol) {
            Ok(v) => {
                unsafe { *value = v };
                QES_STATUS_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Validate branch `index` against the independent finite-difference
/// oracle and fill `summary`. `grid_steps` of 0 selects the default grid.
///
/// # Safety
/// `set` must be a live handle and `summary` a writable
/// [`QesOracleSummary`].
#[no_mangle]
pub unsafe extern "C" fn qes_solution_validate(
    set: *const QesSolutionSet,
    index: usize,
    grid_steps: usize,
    levels: usize,
    summary: *mut QesOracleSummary,
) -> i32 {
    guarded(|| {
        if summary.is_null() {
            return fail_null("summary");
        }
        let sol = match solution_at(set, index) {
            Ok(sol) => sol,
            Err(status) => return status,
        };
        let defaults = ValidateOptions::default();
        let opts = ValidateOptions {
            grid_steps: if grid_steps == 0 { defaults.grid_steps } else { grid_steps },
            levels: if levels == 0 { defaults.levels } else { levels },
            ..defaults
        };
        match validate(sol, &opts) {
            Ok(report) => {
                unsafe {
                    *summary = QesOracleSummary {
                        grid_half_width: report.grid_half_width,
                        grid_steps: report.grid_steps,
                        matched_index: report.matched_index,
                        matched_eigenvalue: report.eigenvalues[report.matched_index],
                        matched_delta: report.matched_delta,
                        residual_norm: report.residual_norm,
                        node_count: report.node_count,
                        analytic_nodes: report.analytic_nodes,
                        wall_warning: report.wall_warning,
                    };
                }
                QES_STATUS_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Copy of the most recent error text on this thread, or NULL when the
/// last call succeeded. The caller frees it with [`qes_string_free`].
///
/// # Safety
/// Always safe to call; the returned pointer must not outlive a
/// [`qes_string_free`] on it.
#[no_mangle]
pub unsafe extern "C" fn qes_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(text) => text.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a solution set obtained from a `qes_solve_*` call. NULL is a
/// no-op.
///
/// # Safety
/// `set` must be NULL or an unreleased handle from this library; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qes_solution_set_free(set: *mut QesSolutionSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Release a string obtained from this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or an unreleased string from this library; it must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qes_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
