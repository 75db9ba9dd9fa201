//! C ABI over the `quaydeck` optimizer.
//!
//! Instances and solutions are opaque heap handles released with their
//! `_free` function. Every call returns a [`QdStatus`]; on failure the
//! message is available from [`qd_last_error_message`] on the same thread.
//! Strings handed out by the library are released with [`qd_string_free`].
//! Unloading sequences cross the boundary 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quaydeck::baselines::{solve, SolveOptions, StrategyKind};
use quaydeck::cli::SolutionFile;
use quaydeck::ga::GaParams;
use quaydeck::model::{Chromosome, CostBreakdown, Instance, TimingParams};
use quaydeck::scenario::generate_preset;
use quaydeck::sim::{evaluate, SimError};
use quaydeck::stats::{paired_t_test, PairedSample, StatsError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInstance = 4,
    Infeasible = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Opaque instance handle.
pub struct QdInstance(Instance);

/// Opaque solution handle.
pub struct QdSolution(SolutionFile);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdCost {
    pub singles: u64,
    pub duals: u64,
    pub rehandles: u64,
    pub total_seconds: f64,
}

impl From<&CostBreakdown> for QdCost {
    fn from(c: &CostBreakdown) -> Self {
        Self {
            singles: c.singles,
            duals: c.duals,
            rehandles: c.rehandles,
            total_seconds: c.total_seconds,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdTiming {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdGaParams {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_fraction: f64,
    pub max_generations: usize,
    pub stagnation_limit: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the default pool.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdTTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
    pub critical: f64,
    /// NaN when either sample is constant.
    pub pearson_r: f64,
    pub significant: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (QdStatus, String);

fn fail<T>(status: QdStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err((status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QdStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QdStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(QdStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (QdStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| (QdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(QdStatus::NullPointer, format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| (QdStatus::InvalidArgument, e.to_string()))
}

fn sim_status(e: &SimError) -> QdStatus {
    match e {
        SimError::BadSequence => QdStatus::InvalidArgument,
        _ => QdStatus::Infeasible,
    }
}

/// Last error message on this thread, or null. Valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn qd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from JSON. The instance is not validated; see
/// [`qd_instance_validate`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_instance_from_json(
    json: *const c_char,
    out: *mut *mut QdInstance,
) -> QdStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let inst = Instance::from_json(text).map_err(|e| (QdStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(QdInstance(inst))), "out")
    })
}

/// Generates preset `scenario` (1..=6) with `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_instance_generate(
    scenario: u32,
    seed: u64,
    out: *mut *mut QdInstance,
) -> QdStatus {
    guard(|| {
        let inst = generate_preset(scenario, seed)
            .map_err(|e| (QdStatus::InvalidArgument, e.to_string()))?;
        put(out, Box::into_raw(Box::new(QdInstance(inst))), "out")
    })
}

/// # Safety
/// `inst` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qd_instance_free(inst: *mut QdInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Writes the number of violations to `count`. A nonzero count also sets
/// the last error message to the violation list.
///
/// # Safety
/// `inst` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_instance_validate(
    inst: *const QdInstance,
    count: *mut usize,
) -> QdStatus {
    let mut report = None;
    let status = guard(|| {
        let v = get(inst, "inst")?.0.validate();
        put(count, v.len(), "count")?;
        if !v.is_empty() {
            report = Some(
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
        }
        Ok(())
    });
    if let Some(r) = report {
        set_error(&r);
    }
    status
}

/// Number of ship stacks.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_instance_stacks(inst: *const QdInstance, out: *mut usize) -> QdStatus {
    guard(|| put(out, get(inst, "inst")?.0.plan.len(), "out"))
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable. Free the string
/// with [`qd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qd_instance_to_json(
    inst: *const QdInstance,
    out: *mut *mut c_char,
) -> QdStatus {
    guard(|| {
        let s = into_c_string(get(inst, "inst")?.0.to_json())?;
        put(out, s, "out")
    })
}

/// Default search parameters.
#[no_mangle]
pub extern "C" fn qd_ga_params_default() -> QdGaParams {
    let p = GaParams::default();
    QdGaParams {
        population_size: p.population_size,
        crossover_rate: p.crossover_rate,
        mutation_rate: p.mutation_rate,
        elite_fraction: p.elite_fraction,
        max_generations: p.max_generations,
        stagnation_limit: p.stagnation_limit,
        seed: p.seed,
        threads: 0,
    }
}

/// Default timing: 90 s single, 170 s dual, 60 s rehandle.
#[no_mangle]
pub extern "C" fn qd_timing_default() -> QdTiming {
    let t = TimingParams::default();
    QdTiming {
        alpha: t.alpha,
        beta: t.beta,
        gamma: t.gamma,
    }
}

unsafe fn timing_from(t: *const QdTiming) -> Result<TimingParams, Failure> {
    let t = match t.as_ref() {
        None => TimingParams::default(),
        Some(t) => TimingParams {
            alpha: t.alpha,
            beta: t.beta,
            gamma: t.gamma,
        },
    };
    t.validate()
        .map_err(|e| (QdStatus::InvalidArgument, e.to_string()))?;
    Ok(t)
}

/// Cost of working the ship in the 1-based order `seq` against the
/// instance's own yard. `timing` may be null for the defaults.
///
/// # Safety
/// `inst` must be a live handle, `seq` must point to `len` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_evaluate(
    inst: *const QdInstance,
    seq: *const usize,
    len: usize,
    timing: *const QdTiming,
    out: *mut QdCost,
) -> QdStatus {
    guard(|| {
        let inst = &get(inst, "inst")?.0;
        if seq.is_null() && len > 0 {
            return fail(QdStatus::NullPointer, "seq is null");
        }
        let raw = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(seq, len)
        };
        let timing = timing_from(timing)?;
        if let Some(v) = inst.validate().first() {
            return fail(QdStatus::InvalidInstance, v.to_string());
        }
        let chrom = Chromosome {
            unload_seq: raw.iter().map(|&s| s.wrapping_sub(1)).collect(),
            yard: inst.yard.clone(),
        };
        let (cost, _) =
            evaluate(&chrom, &inst.plan, &timing).map_err(|e| (sim_status(&e), e.to_string()))?;
        put(out, QdCost::from(&cost), "out")
    })
}

/// Solves with `strategy` (`greedy`, `bilevel`, `ilsrs1`, `ilsrs2` or
/// `qcdc-dr-ga`). `params` and `timing` may be null for the defaults.
///
/// # Safety
/// `inst` must be a live handle, `strategy` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_solve(
    inst: *const QdInstance,
    strategy: *const c_char,
    params: *const QdGaParams,
    timing: *const QdTiming,
    out: *mut *mut QdSolution,
) -> QdStatus {
    guard(|| {
        let inst = &get(inst, "inst")?.0;
        let kind: StrategyKind = read_str(strategy, "strategy")?.parse().map_err(
            |e: quaydeck::baselines::UnknownStrategy| (QdStatus::InvalidArgument, e.to_string()),
        )?;
        let q = params
            .as_ref()
            .copied()
            .unwrap_or_else(|| qd_ga_params_default());
        let opts = SolveOptions {
            timing: timing_from(timing)?,
            params: GaParams {
                population_size: q.population_size,
                crossover_rate: q.crossover_rate,
                mutation_rate: q.mutation_rate,
                elite_fraction: q.elite_fraction,
                max_generations: q.max_generations,
                stagnation_limit: q.stagnation_limit,
                seed: q.seed,
            },
            threads: (q.threads > 0).then_some(q.threads),
        };
        opts.params
            .validate()
            .map_err(|e| (QdStatus::InvalidArgument, e.to_string()))?;
        if let Some(v) = inst.validate().first() {
            return fail(QdStatus::InvalidInstance, v.to_string());
        }
        let sol = solve(kind, inst, &opts).map_err(|e| (QdStatus::Infeasible, e.to_string()))?;
        let file = SolutionFile {
            strategy: sol.strategy,
            unload_seq: sol.chromosome.unload_seq.iter().map(|s| s + 1).collect(),
            yard: sol.chromosome.yard,
            cost: sol.cost,
        };
        put(out, Box::into_raw(Box::new(QdSolution(file))), "out")
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_solution_cost(sol: *const QdSolution, out: *mut QdCost) -> QdStatus {
    guard(|| put(out, QdCost::from(&get(sol, "sol")?.0.cost), "out"))
}

/// Copies the 1-based unloading sequence into `buf`. `len` always receives
/// the sequence length; if `cap` is too small nothing is copied and the
/// call fails with `InvalidArgument`.
///
/// # Safety
/// `sol` must be a live handle, `buf` must hold `cap` values (or be null
/// when `cap` is 0) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_solution_unload_seq(
    sol: *const QdSolution,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> QdStatus {
    guard(|| {
        let seq = &get(sol, "sol")?.0.unload_seq;
        put(len, seq.len(), "len")?;
        if cap < seq.len() {
            return fail(
                QdStatus::InvalidArgument,
                format!("buffer holds {cap}, sequence has {}", seq.len()),
            );
        }
        if !seq.is_empty() {
            if buf.is_null() {
                return fail(QdStatus::NullPointer, "buf is null");
            }
            ptr::copy_nonoverlapping(seq.as_ptr(), buf, seq.len());
        }
        Ok(())
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be writable. Free the string
/// with [`qd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qd_solution_to_json(
    sol: *const QdSolution,
    out: *mut *mut c_char,
) -> QdStatus {
    guard(|| {
        let json = serde_json::to_string_pretty(&get(sol, "sol")?.0)
            .map_err(|e| (QdStatus::InvalidArgument, e.to_string()))?;
        put(out, into_c_string(json)?, "out")
    })
}

/// # Safety
/// `sol` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qd_solution_free(sol: *mut QdSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Paired t-test on `d = b − a` over `n` index-matched observations.
///
/// # Safety
/// `a` and `b` must point to `n` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_paired_t_test(
    a: *const f64,
    b: *const f64,
    n: usize,
    alpha: f64,
    out: *mut QdTTest,
) -> QdStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return fail(QdStatus::NullPointer, "sample pointer is null");
        }
        let a = std::slice::from_raw_parts(a, n).to_vec();
        let b = std::slice::from_raw_parts(b, n).to_vec();
        let r = PairedSample::new(a, b)
            .and_then(|s| paired_t_test(&s, alpha))
            .map_err(|e: StatsError| (QdStatus::InvalidArgument, e.to_string()))?;
        put(
            out,
            QdTTest {
                t: r.t,
                df: r.df,
                p: r.p,
                critical: r.critical,
                pearson_r: r.pearson_r.unwrap_or(f64::NAN),
                significant: r.significant,
            },
            "out",
        )
    })
}
