//! C ABI for `korobov-star`.
//!
//! Every function returns a [`KrbStatus`]; outputs go through pointer
//! arguments. On failure the message is available from
//! [`krb_last_error_message`] on the same thread. Handles are opaque and must
//! be released with their `_free` function. Panics never cross the boundary:
//! they are reported as [`KrbStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use korobov_star::bounds::{theorem_bound, BoundSpec, TheoremCase};
use korobov_star::experiments::{run_campaign, CampaignConfig};
use korobov_star::pointset::{generate_korobov, sample_trial_construction};
use korobov_star::{charsum, discrepancy, fourier, modmath, AnchoredBox, Error, Limits, PointSet, PrimeContext};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrbStatus {
    Ok = 0,
    InvalidArgument = 1,
    Capacity = 2,
    Parse = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

/// The four randomized constructions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrbCase {
    RandomContinuous = 0,
    FixedContinuous = 1,
    RandomDiscrete = 2,
    FixedDiscrete = 3,
}

impl From<KrbCase> for TheoremCase {
    fn from(c: KrbCase) -> Self {
        match c {
            KrbCase::RandomContinuous => TheoremCase::RandomContinuous,
            KrbCase::FixedContinuous => TheoremCase::FixedContinuous,
            KrbCase::RandomDiscrete => TheoremCase::RandomDiscrete,
            KrbCase::FixedDiscrete => TheoremCase::FixedDiscrete,
        }
    }
}

/// Closed-form bound and its ingredients.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrbBound {
    pub variance_cap: f64,
    pub log_term: f64,
    pub t_zero: f64,
    pub unrounded_bound: f64,
    pub final_bound: f64,
    pub constant: f64,
    pub rounded_constant: f64,
}

/// Prime modulus, dimension and lattice count.
pub struct KrbContext {
    inner: PrimeContext,
}

/// A point set: grid numerators or real coordinates.
pub struct KrbPointSet {
    inner: PointSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(KrbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => KrbStatus::InvalidArgument,
            Error::Capacity { .. } => KrbStatus::Capacity,
            Error::Parse(_) | Error::Json(_) => KrbStatus::Parse,
            Error::Io(_) => KrbStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KrbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            KrbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(format!("internal panic: {msg}"));
            KrbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KrbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer is valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn krb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Primality of `n` (`n >= 2`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_is_prime(n: u64, out: *mut bool) -> KrbStatus {
    guard(|| write_out(out, modmath::is_prime(n)?, "out"))
}

/// Create a context; `num_lattices = 0` selects the default `N - 1`.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with
/// `krb_context_free`.
#[no_mangle]
pub unsafe extern "C" fn krb_context_new(n_prime: u64, dim: usize, num_lattices: u64, out: *mut *mut KrbContext) -> KrbStatus {
    guard(|| {
        let inner = if num_lattices == 0 {
            PrimeContext::with_default_lattices(n_prime, dim)?
        } else {
            PrimeContext::new(n_prime, dim, num_lattices)?
        };
        write_out(out, Box::into_raw(Box::new(KrbContext { inner })), "out")
    })
}

/// # Safety
/// `ctx` must come from `krb_context_new` and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn krb_context_free(ctx: *mut KrbContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Write `(1, z, ..., z^{s-1}) mod N` into `out[0..len]`; `len` must equal the dimension.
///
/// # Safety
/// `ctx` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn krb_korobov_vector(ctx: *const KrbContext, z: u64, out: *mut u64, len: usize) -> KrbStatus {
    guard(|| {
        let ctx = &deref(ctx, "ctx")?.inner;
        if len != ctx.dim() {
            return Err(Failure(KrbStatus::InvalidArgument, format!("buffer length {len} != dimension {}", ctx.dim())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let v = modmath::korobov_vector(z, ctx)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&v.components);
        Ok(())
    })
}

/// The unshifted Korobov lattice with generator `z`.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_generate(ctx: *const KrbContext, z: u64, out: *mut *mut KrbPointSet) -> KrbStatus {
    guard(|| {
        let ctx = &deref(ctx, "ctx")?.inner;
        let inner = PointSet::Grid(generate_korobov(z, ctx)?);
        write_out(out, Box::into_raw(Box::new(KrbPointSet { inner })), "out")
    })
}

/// Trial `trial_index` of the seeded construction for `case`.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_sample(
    ctx: *const KrbContext,
    case_: KrbCase,
    master_seed: u64,
    trial_index: u64,
    out: *mut *mut KrbPointSet,
) -> KrbStatus {
    guard(|| {
        let ctx = &deref(ctx, "ctx")?.inner;
        let case = TheoremCase::from(case_);
        let c = sample_trial_construction(ctx, case.generator_mode(), case.shift_mode(), master_seed, trial_index)?;
        write_out(out, Box::into_raw(Box::new(KrbPointSet { inner: c.points })), "out")
    })
}

/// # Safety
/// `ps` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_len(ps: *const KrbPointSet, out: *mut usize) -> KrbStatus {
    guard(|| write_out(out, deref(ps, "ps")?.inner.len(), "out"))
}

/// # Safety
/// `ps` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_dim(ps: *const KrbPointSet, out: *mut usize) -> KrbStatus {
    guard(|| write_out(out, deref(ps, "ps")?.inner.dim(), "out"))
}

/// Whether the set holds grid numerators (otherwise real coordinates).
///
/// # Safety
/// `ps` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_is_grid(ps: *const KrbPointSet, out: *mut bool) -> KrbStatus {
    guard(|| write_out(out, deref(ps, "ps")?.inner.is_grid(), "out"))
}

/// Copy the real coordinates, row-major, into `out[0..len]`; `len` must be
/// `count * dim`.
///
/// # Safety
/// `ps` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_copy_coords(ps: *const KrbPointSet, out: *mut f64, len: usize) -> KrbStatus {
    guard(|| {
        let real = deref(ps, "ps")?.inner.to_real();
        let coords = real.as_flat();
        if len != coords.len() {
            return Err(Failure(KrbStatus::InvalidArgument, format!("buffer length {len} != {}", coords.len())));
        }
        if len > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            std::slice::from_raw_parts_mut(out, len).copy_from_slice(coords);
        }
        Ok(())
    })
}

/// # Safety
/// `ps` must come from a `krb_pointset_*` constructor and not be freed twice.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn krb_pointset_free(ps: *mut KrbPointSet) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Maximum of |local discrepancy| over the grid corners, and that plus `s/N`.
///
/// # Safety
/// Handles must be live; outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn krb_star_disc_grid(
    ps: *const KrbPointSet,
    ctx: *const KrbContext,
    grid_max: *mut f64,
    upper_bound: *mut f64,
) -> KrbStatus {
    guard(|| {
        let r = discrepancy::star_disc_grid(&deref(ps, "ps")?.inner, &deref(ctx, "ctx")?.inner, &Limits::default())?;
        write_out(grid_max, r.grid_max, "grid_max")?;
        write_out(upper_bound, r.upper_bound, "upper_bound")
    })
}

/// Exact star discrepancy over the critical boxes.
///
/// # Safety
/// `ps` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_star_disc_exact(ps: *const KrbPointSet, out: *mut f64) -> KrbStatus {
    guard(|| write_out(out, discrepancy::star_disc_exact(&deref(ps, "ps")?.inner, &Limits::default())?, "out"))
}

/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_theorem_bound(
    ctx: *const KrbContext,
    case_: KrbCase,
    failure_prob: f64,
    out: *mut KrbBound,
) -> KrbStatus {
    guard(|| {
        let spec = BoundSpec::new(case_.into(), failure_prob, deref(ctx, "ctx")?.inner)?;
        let b = theorem_bound(&spec)?;
        write_out(
            out,
            KrbBound {
                variance_cap: b.variance_cap,
                log_term: b.log_term,
                t_zero: b.t_zero,
                unrounded_bound: b.unrounded_bound,
                final_bound: b.final_bound,
                constant: b.constant,
                rounded_constant: b.rounded_constant,
            },
            "out",
        )
    })
}

/// `S_N(z, k)`: 1 when `k · a(z) ≡ 0 (mod N)`, else 0.
///
/// # Safety
/// `ctx` must be a live handle, `k` must hold `len` values, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn krb_char_sum(ctx: *const KrbContext, z: u64, k: *const i64, len: usize, out: *mut u8) -> KrbStatus {
    guard(|| {
        let r = charsum::char_sum(z, slice(k, len, "k")?, &deref(ctx, "ctx")?.inner)?;
        write_out(out, r.value, "out")
    })
}

/// Number of generators `r ∈ {1, ..., M}` with `k · a(r) ≡ 0 (mod N)`.
///
/// # Safety
/// `ctx` must be a live handle, `k` must hold `len` values, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn krb_count_generator_hits(ctx: *const KrbContext, k: *const i64, len: usize, out: *mut u64) -> KrbStatus {
    guard(|| write_out(out, charsum::count_generator_hits(slice(k, len, "k")?, &deref(ctx, "ctx")?.inner)?, "out"))
}

/// Continuous Fourier coefficient of the indicator of `[0, b)`.
///
/// # Safety
/// `k` and `b` must hold `len` values; outputs valid.
#[no_mangle]
pub unsafe extern "C" fn krb_cont_coeff(k: *const i64, b: *const f64, len: usize, re: *mut f64, im: *mut f64) -> KrbStatus {
    guard(|| {
        let bx = AnchoredBox::new(slice(b, len, "b")?.to_vec())?;
        let c = fourier::cont_coeff(slice(k, len, "k")?, &bx)?;
        write_out(re, c.re, "re")?;
        write_out(im, c.im, "im")
    })
}

/// Discrete Fourier coefficient of the grid box with numerators `b_num`.
///
/// # Safety
/// `k` and `b_num` must hold `len` values; outputs valid.
#[no_mangle]
pub unsafe extern "C" fn krb_disc_coeff(
    n_prime: u64,
    k: *const u64,
    b_num: *const u32,
    len: usize,
    re: *mut f64,
    im: *mut f64,
) -> KrbStatus {
    guard(|| {
        let bx = AnchoredBox::grid(slice(b_num, len, "b_num")?.to_vec(), n_prime)?;
        let c = fourier::disc_coeff(slice(k, len, "k")?, &bx, n_prime)?;
        write_out(re, c.re, "re")?;
        write_out(im, c.im, "im")
    })
}

/// Run a campaign from a JSON config; writes the JSON summary to `*out`,
/// which must be released with `krb_string_free`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn krb_run_campaign_json(config_json: *const c_char, out: *mut *mut c_char) -> KrbStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(KrbStatus::Parse, format!("config is not UTF-8: {e}")))?;
        let config: CampaignConfig = serde_json::from_str(text).map_err(Error::from)?;
        let summary = run_campaign(&config)?;
        let json = serde_json::to_string(&summary).map_err(Error::from)?;
        let json = CString::new(json).map_err(|e| Failure(KrbStatus::Parse, e.to_string()))?;
        write_out(out, json.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn krb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
