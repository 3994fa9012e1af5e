//! C interface to `heavytail`.
//!
//! Every fallible function returns an [`HtStatus`]. On failure the message is
//! kept per thread and can be read with [`ht_last_error`] until the next
//! failing call on that thread. Results are written through out-pointers,
//! which are left untouched on failure.
//!
//! Slices are passed as `(pointer, length)`; a null pointer is accepted only
//! when the length is zero. Handles are created by `*_new`/`*_from_*` and
//! released with the matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use heavytail::abelian::{abelian_limits, AbelianParams};
use heavytail::baselines::clt_ci;
use heavytail::ecdf::WeightedEcdf;
use heavytail::pstable::{
    build_log_ecdf, ci_alpha, ci_mean, compute_tn, permutation_average, ConfidenceInterval, Levels, PStableOptions,
    ProductSummary, Target, TnSequence,
};
use heavytail::rng::{
    sample_abelian, sample_pareto_like, sample_power_law_cutoff, sample_stable, ParetoLikeParams, PowerLawCutoffParams,
    RandomSource, StableParams,
};
use heavytail::stirling::{
    check_degree4_bound, check_p_decomposition_range, check_product_bound_range, check_rising_identity,
    check_table_against_oracle, check_table_structure, LemmaReport, StirlingTable,
};
use heavytail::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    Parameter = 2,
    Domain = 3,
    Input = 4,
    Instability = 5,
    Capacity = 6,
    Config = 7,
    Parse = 8,
    Io = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn status_of(e: &Error) -> HtStatus {
    match e {
        Error::Parameter(_) => HtStatus::Parameter,
        Error::Domain(_) => HtStatus::Domain,
        Error::Input(_) => HtStatus::Input,
        Error::Instability(_) => HtStatus::Instability,
        Error::Capacity(_) => HtStatus::Capacity,
        Error::Config(_) => HtStatus::Config,
        Error::Parse { .. } => HtStatus::Parse,
        Error::Io { .. } => HtStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HtStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(&format!("null pointer passed for `{name}`"));
            HtStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            HtStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, name: &'static str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &'static str) -> FfiResult<&'a mut T> {
    ptr.as_mut().ok_or(Failure::Null(name))
}

unsafe fn handle<'a, T>(ptr: *const T, name: &'static str) -> FfiResult<&'a T> {
    ptr.as_ref().ok_or(Failure::Null(name))
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- samplers ----

/// Fills `out[0..count]` with `S(stability, skewness, scale, location)` draws
/// from stream `(seed, stream)`.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_stable(
    stability: f64,
    skewness: f64,
    scale: f64,
    location: f64,
    seed: u64,
    stream: u64,
    count: usize,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let dst = slice_mut(out, count, "out")?;
        let params = StableParams::new(stability, skewness, scale, location)?;
        dst.copy_from_slice(&sample_stable(&params, &RandomSource::new(seed, stream), count)?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ht_sample_pareto_like(
    tail_exponent: f64,
    x_min: f64,
    transform: bool,
    seed: u64,
    stream: u64,
    count: usize,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let dst = slice_mut(out, count, "out")?;
        let params = ParetoLikeParams::new(tail_exponent, x_min, transform)?;
        dst.copy_from_slice(&sample_pareto_like(&params, &RandomSource::new(seed, stream), count)?);
        Ok(())
    })
}

/// Draws from `P(k) ~ k^-exponent` on `1..=cutoff`.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_power_law_cutoff(
    exponent: f64,
    cutoff: u64,
    seed: u64,
    stream: u64,
    count: usize,
    out: *mut u64,
) -> HtStatus {
    guard(|| {
        let dst = slice_mut(out, count, "out")?;
        let params = PowerLawCutoffParams::new(exponent, cutoff)?;
        dst.copy_from_slice(&sample_power_law_cutoff(
            &params,
            &RandomSource::new(seed, stream),
            count,
        )?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ht_sample_abelian(
    size: u64,
    alpha: f64,
    seed: u64,
    stream: u64,
    count: usize,
    out: *mut u64,
) -> HtStatus {
    guard(|| {
        let dst = slice_mut(out, count, "out")?;
        let params = AbelianParams::from_alpha(size, alpha)?;
        dst.copy_from_slice(&sample_abelian(&params, &RandomSource::new(seed, stream), count)?);
        Ok(())
    })
}

// ---- Abelian distribution ----

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HtAbelianMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// Limits as the size grows without bound.
    pub mean_limit: f64,
    pub variance_limit: f64,
}

#[no_mangle]
pub unsafe extern "C" fn ht_abelian_pmf(size: u64, alpha: f64, b: u64, out: *mut f64) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        *dst = AbelianParams::from_alpha(size, alpha)?.pmf(b)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ht_abelian_moments(size: u64, alpha: f64, out: *mut HtAbelianMoments) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let params = AbelianParams::from_alpha(size, alpha)?;
        let m = params.moments();
        let (mean_limit, variance_limit) = abelian_limits(params.alpha())?;
        *dst = HtAbelianMoments {
            mean: m.mean,
            second_moment: m.second_moment,
            variance: m.variance,
            mean_limit,
            variance_limit,
        };
        Ok(())
    })
}

// ---- estimator ----

/// Writes `t_1, ..., t_len` for the degree-one statistic into `out`.
#[no_mangle]
pub unsafe extern "C" fn ht_compute_tn(
    x: *const f64,
    y: *const f64,
    len: usize,
    mu_hat: f64,
    p: f64,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let (x, y) = (slice(x, len, "x")?, slice(y, len, "y")?);
        let dst = slice_mut(out, len, "out")?;
        dst.copy_from_slice(&compute_tn(x, y, mu_hat, p)?.values);
        Ok(())
    })
}

/// Opaque weighted ECDF.
pub struct HtEcdf(WeightedEcdf);

/// Equal-weight ECDF of `values`.
#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_from_samples(values: *const f64, len: usize, out: *mut *mut HtEcdf) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let ecdf = WeightedEcdf::from_samples(slice(values, len, "values")?)?;
        *dst = Box::into_raw(Box::new(HtEcdf(ecdf)));
        Ok(())
    })
}

/// Logarithmic ECDF of `tn[burn_in..len]`, term `n` weighted by `1/n`.
#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_log_from_tn(
    tn: *const f64,
    len: usize,
    burn_in: usize,
    out: *mut *mut HtEcdf,
) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let seq = TnSequence {
            p: f64::NAN,
            mu_hat: f64::NAN,
            degree: 1,
            values: slice(tn, len, "tn")?.to_vec(),
        };
        *dst = Box::into_raw(Box::new(HtEcdf(build_log_ecdf(&seq, burn_in)?)));
        Ok(())
    })
}

/// Number of distinct support points.
#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_len(ecdf: *const HtEcdf, out: *mut usize) -> HtStatus {
    guard(|| {
        *self::out(out, "out")? = handle(ecdf, "ecdf")?.0.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_eval(ecdf: *const HtEcdf, t: f64, out: *mut f64) -> HtStatus {
    guard(|| {
        *self::out(out, "out")? = handle(ecdf, "ecdf")?.0.eval(t);
        Ok(())
    })
}

/// Smallest support point whose cumulative weight reaches `level`.
#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_quantile(ecdf: *const HtEcdf, level: f64, out: *mut f64) -> HtStatus {
    guard(|| {
        let q = handle(ecdf, "ecdf")?.0.quantile(level)?;
        *self::out(out, "out")? = q;
        Ok(())
    })
}

/// Releases an ECDF; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ht_ecdf_free(ecdf: *mut HtEcdf) {
    if !ecdf.is_null() {
        drop(Box::from_raw(ecdf));
    }
}

/// A two-sided interval. An undefined bound is NaN with its flag cleared.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HtInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_defined: bool,
    pub upper_defined: bool,
    pub level_lo: f64,
    pub level_hi: f64,
}

impl From<&ConfidenceInterval> for HtInterval {
    fn from(ci: &ConfidenceInterval) -> Self {
        Self {
            lower: ci.lower.unwrap_or(f64::NAN),
            upper: ci.upper.unwrap_or(f64::NAN),
            lower_defined: ci.lower.is_some(),
            upper_defined: ci.upper.is_some(),
            level_lo: ci.level_lo,
            level_hi: ci.level_hi,
        }
    }
}

impl HtInterval {
    fn to_interval(self, target: Target) -> ConfidenceInterval {
        ConfidenceInterval {
            lower: self.lower_defined.then_some(self.lower),
            upper: self.upper_defined.then_some(self.upper),
            level_lo: self.level_lo,
            level_hi: self.level_hi,
            target,
        }
    }
}

/// Interval for the mean from given quantiles `lower_q <= upper_q` of the limit law.
#[no_mangle]
pub unsafe extern "C" fn ht_ci_mean(
    x: *const f64,
    y: *const f64,
    len: usize,
    lower_q: f64,
    upper_q: f64,
    p: f64,
    level_lo: f64,
    level_hi: f64,
    out: *mut HtInterval,
) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let summary = ProductSummary::from_samples(slice(x, len, "x")?, slice(y, len, "y")?)?;
        let ci = ci_mean(&summary, lower_q, upper_q, p, Levels::new(level_lo, level_hi)?)?;
        *dst = HtInterval::from(&ci);
        Ok(())
    })
}

/// Maps a mean interval through `mu -> 1 - 1/mu`.
#[no_mangle]
pub unsafe extern "C" fn ht_ci_alpha(mean: *const HtInterval, out: *mut HtInterval) -> HtStatus {
    guard(|| {
        let src = *handle(mean, "mean")?;
        *self::out(out, "out")? = HtInterval::from(&ci_alpha(&src.to_interval(Target::Mean)));
        Ok(())
    })
}

/// Normal-approximation interval for the mean of `x`.
#[no_mangle]
pub unsafe extern "C" fn ht_clt_ci(
    x: *const f64,
    len: usize,
    level_lo: f64,
    level_hi: f64,
    out: *mut HtInterval,
) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let ci = clt_ci(slice(x, len, "x")?, Levels::new(level_lo, level_hi)?)?;
        *dst = HtInterval::from(&ci);
        Ok(())
    })
}

/// Full p-stable interval: quantiles of the logarithmic ECDF averaged over
/// `permutations` orderings of the weights (the first is the given order).
#[no_mangle]
pub unsafe extern "C" fn ht_pstable_ci(
    x: *const f64,
    y: *const f64,
    len: usize,
    mu_hat: f64,
    p: f64,
    burn_in: usize,
    permutations: usize,
    seed: u64,
    level_lo: f64,
    level_hi: f64,
    out: *mut HtInterval,
) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let opts = PStableOptions {
            burn_in,
            permutations,
            ..PStableOptions::new(p)
        };
        let est = permutation_average(
            slice(x, len, "x")?,
            slice(y, len, "y")?,
            mu_hat,
            &opts,
            Levels::new(level_lo, level_hi)?,
            &RandomSource::new(seed, 0),
        )?;
        *dst = HtInterval::from(&est.interval);
        Ok(())
    })
}

// ---- Stirling numbers ----

/// Largest table accepted by [`ht_stirling_new`].
pub const HT_STIRLING_MAX_ROWS: usize = 2000;

/// Opaque table of exact `s(i, j; 1)`.
pub struct HtStirlingTable(StirlingTable);

#[no_mangle]
pub unsafe extern "C" fn ht_stirling_new(i_max: usize, out: *mut *mut HtStirlingTable) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        if i_max > HT_STIRLING_MAX_ROWS {
            return Err(Error::Capacity(format!("table rows limited to {HT_STIRLING_MAX_ROWS}, got {i_max}")).into());
        }
        *dst = Box::into_raw(Box::new(HtStirlingTable(StirlingTable::new(i_max))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ht_stirling_free(table: *mut HtStirlingTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Writes `s(i, j; 1)` as a decimal string; release it with [`ht_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ht_stirling_get(
    table: *const HtStirlingTable,
    i: usize,
    j: usize,
    out: *mut *mut c_char,
) -> HtStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let v = handle(table, "table")?.0.get(i, j)?;
        *dst = CString::new(v.to_string()).expect("digits contain no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ht_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Which exact check [`ht_stirling_check`] runs, and what its `bound` means.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStirlingCheck {
    /// Table against a subset-sum oracle for rows up to `bound`.
    Oracle = 0,
    /// Signs and diagonals of the whole table; `bound` is ignored.
    Structure = 1,
    /// Polynomial identity at integers `-bound..=bound`.
    RisingIdentity = 2,
    /// Decomposition for every size up to `bound`.
    PDecomposition = 3,
    /// Product bound for every size `1..=bound`.
    ProductBound = 4,
    /// Degree-four bound for rows up to `bound`.
    Degree4 = 5,
}

#[no_mangle]
pub unsafe extern "C" fn ht_stirling_check(
    table: *const HtStirlingTable,
    check: HtStirlingCheck,
    bound: u64,
    out_cases: *mut u64,
    out_passed: *mut bool,
) -> HtStatus {
    guard(|| {
        let t = &handle(table, "table")?.0;
        let cases = out(out_cases, "out_cases")?;
        let passed = out(out_passed, "out_passed")?;
        let narrow = |v: u64| usize::try_from(v).map_err(|_| Error::Domain(format!("bound {v} too large")));
        let report: LemmaReport = match check {
            HtStirlingCheck::Oracle => {
                let b = u32::try_from(bound).map_err(|_| Error::Domain(format!("bound {bound} too large")))?;
                check_table_against_oracle(t, b)?
            }
            HtStirlingCheck::Structure => check_table_structure(t)?,
            HtStirlingCheck::RisingIdentity => {
                let b = i64::try_from(bound).map_err(|_| Error::Domain(format!("bound {bound} too large")))?;
                check_rising_identity(t, &(-b..=b).collect::<Vec<_>>())?
            }
            HtStirlingCheck::PDecomposition => check_p_decomposition_range(t, bound)?,
            HtStirlingCheck::ProductBound => check_product_bound_range(1..=bound)?,
            HtStirlingCheck::Degree4 => check_degree4_bound(t, narrow(bound)?)?,
        };
        *cases = report.cases;
        *passed = report.passed();
        if let Some(c) = &report.counterexample {
            set_last_error(&format!("{}: {c}", report.name));
        }
        Ok(())
    })
}
