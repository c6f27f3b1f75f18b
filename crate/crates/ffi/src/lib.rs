//! C ABI for the orthoplex library.
//!
//! Every fallible function returns an [`OrthoplexStatus`] code and writes
//! its result through an out-pointer. On failure the message is kept per
//! thread and can be read with [`orthoplex_last_error_message`]. Objects are
//! opaque handles released with the matching `*_free` function.
//!
//! Pointer arguments must be NULL or valid for the access the function
//! documents; handles must come from this library and be freed once. NULL
//! is always detected and reported as `ORTHOPLEX_STATUS_NULL_POINTER`.

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orthoplex::equivalence::pinsker_bound;
use orthoplex::interaction::{analyze, rate_function, FiniteMixture};
use orthoplex::model::{entropy_n, log_z_interior};
use orthoplex::sampling::{RngState, SamplerSpec, SpinSampler};
use orthoplex::thermo::{ensemble_map, limiting_entropy};
use orthoplex::{parse_interaction, Error, Interaction, ModelPoint};
use rand_chacha::ChaCha20Rng;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrthoplexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPoint = 3,
    Domain = 4,
    Parse = 5,
    BoundaryMaximum = 6,
    TypeTooHigh = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for OrthoplexStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::SystemTooSmall { .. }
            | Error::InvalidArgument(_)
            | Error::ArityTooLarge { .. }
            | Error::IndexSetTooLarge { .. }
            | Error::WindowNotIsolated { .. } => OrthoplexStatus::InvalidArgument,
            Error::NotInterior { .. } | Error::InvalidPoint { .. } | Error::InvalidFields { .. } => {
                OrthoplexStatus::InvalidPoint
            }
            Error::Domain(_) | Error::NonFinite { .. } => OrthoplexStatus::Domain,
            Error::Parse { .. } => OrthoplexStatus::Parse,
            Error::BoundaryMaximum { .. } => OrthoplexStatus::BoundaryMaximum,
            Error::TypeTooHigh { .. } => OrthoplexStatus::TypeTooHigh,
            Error::Quadrature(_) | Error::NonConvergence(_) => OrthoplexStatus::Numerical,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: OrthoplexStatus, msg: impl Into<String>) -> OrthoplexStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), OrthoplexStatus>) -> OrthoplexStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrthoplexStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(OrthoplexStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: orthoplex::Result<T>) -> Result<T, OrthoplexStatus> {
    r.map_err(|e| fail(OrthoplexStatus::from(&e), e.to_string()))
}

fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, OrthoplexStatus> {
    // SAFETY: the caller passes either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| fail(OrthoplexStatus::NullPointer, format!("{name} is NULL")))
}

fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, OrthoplexStatus> {
    // SAFETY: non-NULL handles were produced by this library and not yet freed.
    unsafe { p.as_ref() }.ok_or_else(|| fail(OrthoplexStatus::NullPointer, format!("{name} is NULL")))
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn orthoplex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code; `"unknown"` for values outside the enum.
#[no_mangle]
pub extern "C" fn orthoplex_status_name(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"invalid point",
        4 => c"domain error",
        5 => c"parse error",
        6 => c"boundary maximum",
        7 => c"type too high",
        8 => c"numerical failure",
        9 => c"buffer too small",
        10 => c"panic",
        _ => c"unknown",
    };
    s.as_ptr()
}

/// `ln Z_n(mn, rho n)` at an interior point.
#[no_mangle]
pub extern "C" fn orthoplex_log_z(n: usize, m: f64, rho: f64, out_value: *mut f64) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        let p = lib(ModelPoint::interior(m, rho))?;
        *o = lib(log_z_interior(n, &p))?.ln();
        Ok(())
    })
}

/// `s_n(m, rho)`; boundary points are allowed.
#[no_mangle]
pub extern "C" fn orthoplex_entropy_n(n: usize, m: f64, rho: f64, out_value: *mut f64) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        let p = lib(ModelPoint::new(m, rho))?;
        *o = lib(entropy_n(n, &p))?;
        Ok(())
    })
}

/// `s(m, rho)` at an interior point.
#[no_mangle]
pub extern "C" fn orthoplex_limiting_entropy(m: f64, rho: f64, out_value: *mut f64) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = lib(limiting_entropy(&lib(ModelPoint::interior(m, rho))?))?;
        Ok(())
    })
}

/// Matched grand-canonical parameters of an interior point.
#[no_mangle]
pub extern "C" fn orthoplex_ensemble_map(m: f64, rho: f64, out_beta: *mut f64, out_mu: *mut f64) -> OrthoplexStatus {
    guard(|| {
        let b = out(out_beta, "out_beta")?;
        let u = out(out_mu, "out_mu")?;
        let t = lib(ensemble_map(&lib(ModelPoint::interior(m, rho))?))?;
        *b = t.beta();
        *u = t.mu();
        Ok(())
    })
}

/// Pinsker bound on local expectation gaps at matched parameters.
#[no_mangle]
pub extern "C" fn orthoplex_pinsker_bound(
    n: usize,
    index_size: usize,
    m: f64,
    rho: f64,
    out_value: *mut f64,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        let p = lib(ModelPoint::interior(m, rho))?;
        let t = lib(ensemble_map(&p))?;
        *o = lib(pinsker_bound(n, index_size, &p, &t))?;
        Ok(())
    })
}

/// Opaque interaction `g`.
pub struct OrthoplexInteraction {
    inner: Interaction,
}

/// Parses an interaction spec such as `cw:betaJ=1,h=0` or `expr:0.5*m^2`.
#[no_mangle]
pub extern "C" fn orthoplex_interaction_parse(
    spec: *const c_char,
    out_handle: *mut *mut OrthoplexInteraction,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_handle, "out_handle")?;
        *o = ptr::null_mut();
        if spec.is_null() {
            return Err(fail(OrthoplexStatus::NullPointer, "spec is NULL"));
        }
        // SAFETY: `spec` is a NUL-terminated string owned by the caller.
        let text =
            unsafe { CStr::from_ptr(spec) }.to_str().map_err(|_| fail(OrthoplexStatus::Parse, "spec is not UTF-8"))?;
        let g = lib(parse_interaction(text))?;
        *o = Box::into_raw(Box::new(OrthoplexInteraction { inner: g }));
        Ok(())
    })
}

/// `g(m)`.
#[no_mangle]
pub extern "C" fn orthoplex_interaction_value(
    g: *const OrthoplexInteraction,
    m: f64,
    out_value: *mut f64,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = lib(handle(g, "g")?.inner.value(m))?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn orthoplex_interaction_free(g: *mut OrthoplexInteraction) {
    if !g.is_null() {
        // SAFETY: produced by `orthoplex_interaction_parse` and freed once.
        drop(unsafe { Box::from_raw(g) });
    }
}

/// One global maximizer of `psi = g + s(., 1)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OrthoplexMaximizer {
    pub m_star: f64,
    pub psi: f64,
    pub type_k: u32,
    pub deriv_2k: f64,
    pub weight: f64,
}

/// Writes up to `capacity` maximizers to `buffer` and their total count to
/// `out_count`. Returns `BufferTooSmall` (with the count set) if they do not fit.
#[no_mangle]
pub extern "C" fn orthoplex_interaction_analyze(
    g: *const OrthoplexInteraction,
    buffer: *mut OrthoplexMaximizer,
    capacity: usize,
    out_count: *mut usize,
) -> OrthoplexStatus {
    guard(|| {
        let count = out(out_count, "out_count")?;
        let recs = lib(analyze(&handle(g, "g")?.inner))?;
        *count = recs.len();
        if recs.len() > capacity {
            return Err(fail(
                OrthoplexStatus::BufferTooSmall,
                format!("{} maximizers, capacity {capacity}", recs.len()),
            ));
        }
        if buffer.is_null() && !recs.is_empty() {
            return Err(fail(OrthoplexStatus::NullPointer, "buffer is NULL"));
        }
        for (i, r) in recs.iter().enumerate() {
            // SAFETY: `buffer` holds at least `capacity >= recs.len()` elements.
            unsafe {
                *buffer.add(i) = OrthoplexMaximizer {
                    m_star: r.m_star,
                    psi: r.psi,
                    type_k: r.type_k as u32,
                    deriv_2k: r.deriv_2k,
                    weight: r.weight,
                };
            }
        }
        Ok(())
    })
}

/// `I^g(m)`; `+inf` outside `[-1, 1]`.
#[no_mangle]
pub extern "C" fn orthoplex_rate_function(
    g: *const OrthoplexInteraction,
    m: f64,
    out_value: *mut f64,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = lib(rate_function(&handle(g, "g")?.inner, m))?;
        Ok(())
    })
}

/// Opaque law of the magnetization per spin at a finite size.
pub struct OrthoplexMixture {
    inner: FiniteMixture,
}

#[no_mangle]
pub extern "C" fn orthoplex_mixture_new(
    g: *const OrthoplexInteraction,
    n: usize,
    out_handle: *mut *mut OrthoplexMixture,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_handle, "out_handle")?;
        *o = ptr::null_mut();
        let g = handle(g, "g")?.inner.clone();
        let mix = lib(FiniteMixture::new(g, n, 1e-10))?;
        *o = Box::into_raw(Box::new(OrthoplexMixture { inner: mix }));
        Ok(())
    })
}

/// `ln kappa_n([a, b])`.
#[no_mangle]
pub extern "C" fn orthoplex_mixture_log_mass(
    mix: *const OrthoplexMixture,
    a: f64,
    b: f64,
    out_value: *mut f64,
) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = lib(handle(mix, "mix")?.inner.log_mass(a, b))?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn orthoplex_mixture_free(mix: *mut OrthoplexMixture) {
    if !mix.is_null() {
        // SAFETY: produced by `orthoplex_mixture_new` and freed once.
        drop(unsafe { Box::from_raw(mix) });
    }
}

/// Opaque exact sampler with its own random stream.
pub struct OrthoplexSampler {
    sampler: Box<dyn SpinSampler>,
    rng: ChaCha20Rng,
}

fn new_sampler(spec: SamplerSpec, seed: u64, out_handle: *mut *mut OrthoplexSampler) -> OrthoplexStatus {
    guard(|| {
        let o = out(out_handle, "out_handle")?;
        *o = ptr::null_mut();
        let sampler = lib(spec.build())?;
        let rng = RngState::new(seed, 0).rng();
        *o = Box::into_raw(Box::new(OrthoplexSampler { sampler, rng }));
        Ok(())
    })
}

/// Sampler for the microcanonical measure at `(m, rho)`.
#[no_mangle]
pub extern "C" fn orthoplex_sampler_microcanonical(
    n: usize,
    m: f64,
    rho: f64,
    seed: u64,
    out_handle: *mut *mut OrthoplexSampler,
) -> OrthoplexStatus {
    new_sampler(SamplerSpec::Microcanonical { n, m, rho }, seed, out_handle)
}

/// Sampler for `n` independent spins under `eta(beta, mu)`.
#[no_mangle]
pub extern "C" fn orthoplex_sampler_grand_canonical(
    n: usize,
    beta: f64,
    mu: f64,
    seed: u64,
    out_handle: *mut *mut OrthoplexSampler,
) -> OrthoplexStatus {
    new_sampler(SamplerSpec::GrandCanonical { n, beta, mu }, seed, out_handle)
}

/// Draws one configuration into `buffer`, which must hold exactly `n` values.
#[no_mangle]
pub extern "C" fn orthoplex_sampler_draw(
    sampler: *mut OrthoplexSampler,
    buffer: *mut f64,
    len: usize,
) -> OrthoplexStatus {
    guard(|| {
        let s = out(sampler, "sampler")?;
        if buffer.is_null() {
            return Err(fail(OrthoplexStatus::NullPointer, "buffer is NULL"));
        }
        if len != s.sampler.n() {
            return Err(fail(
                OrthoplexStatus::BufferTooSmall,
                format!("buffer length {len}, system size {}", s.sampler.n()),
            ));
        }
        // SAFETY: `buffer` points to `len` writable doubles.
        let phi = unsafe { std::slice::from_raw_parts_mut(buffer, len) };
        s.sampler.sample_into(&mut s.rng, phi);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn orthoplex_sampler_free(sampler: *mut OrthoplexSampler) {
    if !sampler.is_null() {
        // SAFETY: produced by a sampler constructor and freed once.
        drop(unsafe { Box::from_raw(sampler) });
    }
}
