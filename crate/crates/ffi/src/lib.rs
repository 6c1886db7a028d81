//! C ABI over `ballnorm`.
//!
//! Fields cross the boundary as opaque `BnField` handles owned by the caller
//! and released with `bn_field_free`. Every fallible call returns a
//! `BnStatus`; on failure `bn_last_error_message` describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ballnorm::averaging::{ball_difference, higher_average, AverageSpec};
use ballnorm::body::{BodyKind, BodySpec};
use ballnorm::error::Error;
use ballnorm::filter_bank::{band_project, build_bank};
use ballnorm::harness::{generate, Family, TestFunctionSpec};
use ballnorm::multiplier::{a_ell, ball_hat, m_ell};
use ballnorm::norms::{norm, Method, NormParams, ScaleRange, Space};
use ballnorm::quadrature::QuadratureRule;
use ballnorm::torus::io::{read_binary, write_binary};
use ballnorm::torus::{Exponent, GridSpec, SampledField};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGrid = 2,
    MalformedField = 3,
    InvalidParameter = 4,
    RadiusOutOfRange = 5,
    QuadratureTooCoarse = 6,
    MultiplierUndefined = 7,
    InvariantViolation = 8,
    InsufficientScales = 9,
    NonFinite = 10,
    Format = 11,
    Io = 12,
    Panic = 13,
}

pub const BN_FAMILY_WEIERSTRASS: u32 = 0;
pub const BN_FAMILY_BAND_BUMP: u32 = 1;
pub const BN_FAMILY_POWER_SPECTRUM: u32 = 2;
pub const BN_FAMILY_SMOOTH_REFERENCE: u32 = 3;

pub const BN_BODY_BALL: u32 = 0;
pub const BN_BODY_CUBE: u32 = 1;

pub const BN_SPACE_BESOV: u32 = 0;
pub const BN_SPACE_TRIEBEL_LIZORKIN: u32 = 1;

pub const BN_METHOD_CLASSICAL: u32 = 0;
pub const BN_METHOD_BALL: u32 = 1;

pub const BN_MULTIPLIER_BALL_HAT: u32 = 0;
pub const BN_MULTIPLIER_A_ELL: u32 = 1;
pub const BN_MULTIPLIER_M_ELL: u32 = 2;

/// Opaque sampled field.
pub struct BnField {
    inner: SampledField,
}

/// Test-function description for `bn_generate`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BnFunctionSpec {
    /// One of the `BN_FAMILY_*` constants.
    pub family: u32,
    pub alpha: f64,
    /// Top lacunary level; negative ties it to `log2(N/2)`.
    pub levels: i32,
    pub k0: u32,
    pub seed: u64,
    /// Largest `|m|` of the power spectrum; 0 means `N/2 - 1`.
    pub band_cap: u64,
    pub dim: u32,
    pub samples_per_axis: u32,
}

/// Norm parameters for `bn_norm`. Pass `INFINITY` for an infinite exponent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BnNormParams {
    /// One of the `BN_SPACE_*` constants.
    pub space: u32,
    /// One of the `BN_METHOD_*` constants.
    pub method: u32,
    pub homogeneous: bool,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub ell: u32,
    /// One of the `BN_BODY_*` constants.
    pub body: u32,
    /// When false the grid's default scale range is used.
    pub has_range: bool,
    pub k_min: i32,
    pub k_max: i32,
    /// Centre stride of the `p = INFINITY` Triebel-Lizorkin sweep; 0 means 1.
    pub stride: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(e: &Error) -> BnStatus {
    match e {
        Error::InvalidGrid(_) => BnStatus::InvalidGrid,
        Error::MalformedField(_) => BnStatus::MalformedField,
        Error::InvalidParameter(_) => BnStatus::InvalidParameter,
        Error::RadiusOutOfRange(_) => BnStatus::RadiusOutOfRange,
        Error::QuadratureTooCoarse(_) => BnStatus::QuadratureTooCoarse,
        Error::MultiplierUndefined(_) => BnStatus::MultiplierUndefined,
        Error::InvariantViolation(_) => BnStatus::InvariantViolation,
        Error::InsufficientScales(_) => BnStatus::InsufficientScales,
        Error::NonFinite(_) => BnStatus::NonFinite,
        Error::Format(_) => BnStatus::Format,
    }
}

struct Failure(BnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BnStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure(BnStatus::InvalidParameter, msg.into())
}

/// Run `body`, turning errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BnStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            BnStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            BnStatus::Panic
        }
    }
}

unsafe fn field_ref<'a>(f: *const BnField) -> Result<&'a SampledField, Failure> {
    f.as_ref().map(|h| &h.inner).ok_or_else(|| null("field"))
}

unsafe fn emit(out: *mut *mut BnField, field: SampledField) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(BnField { inner: field }));
    Ok(())
}

unsafe fn path_of<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| bad("path is not valid UTF-8"))
}

fn body_kind(code: u32) -> Result<BodyKind, Failure> {
    match code {
        BN_BODY_BALL => Ok(BodyKind::EuclideanBall),
        BN_BODY_CUBE => Ok(BodyKind::Cube),
        _ => Err(bad(format!("unknown body code {code}"))),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a real field from `len = N^dim` samples in row-major order.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_field_from_real(
    dim: u32,
    samples_per_axis: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut BnField,
) -> BnStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = GridSpec::new(dim as usize, samples_per_axis as usize)?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        emit(out, SampledField::from_real(grid, data)?)
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bn_field_free(field: *mut BnField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Deep copy.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_field_clone(field: *const BnField, out: *mut *mut BnField) -> BnStatus {
    guard(|| emit(out, field_ref(field)?.clone()))
}

/// Grid shape of a field.
///
/// # Safety
/// `field` must be a live handle; `dim` and `samples_per_axis` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_field_shape(
    field: *const BnField,
    dim: *mut u32,
    samples_per_axis: *mut u32,
) -> BnStatus {
    guard(|| {
        let f = field_ref(field)?;
        if dim.is_null() || samples_per_axis.is_null() {
            return Err(null("shape output"));
        }
        *dim = f.grid().dim() as u32;
        *samples_per_axis = f.grid().samples_per_axis() as u32;
        Ok(())
    })
}

/// Copy the real parts into `out`, which must hold exactly `N^dim` doubles.
///
/// # Safety
/// `field` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bn_field_real_parts(
    field: *const BnField,
    out: *mut f64,
    len: usize,
) -> BnStatus {
    guard(|| {
        let f = field_ref(field)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len != f.grid().len() {
            return Err(Failure(
                BnStatus::MalformedField,
                format!("buffer holds {len} values, field has {}", f.grid().len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&f.real_parts());
        Ok(())
    })
}

/// Realise a test function.
///
/// # Safety
/// `spec` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_generate(
    spec: *const BnFunctionSpec,
    out: *mut *mut BnField,
) -> BnStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let family = match s.family {
            BN_FAMILY_WEIERSTRASS => Family::Weierstrass,
            BN_FAMILY_BAND_BUMP => Family::BandBump,
            BN_FAMILY_POWER_SPECTRUM => Family::PowerSpectrum,
            BN_FAMILY_SMOOTH_REFERENCE => Family::SmoothReference,
            other => return Err(bad(format!("unknown family code {other}"))),
        };
        let spec = TestFunctionSpec {
            family,
            alpha: s.alpha,
            levels: u32::try_from(s.levels).ok(),
            k0: s.k0,
            seed: s.seed,
            band_cap: (s.band_cap > 0).then_some(s.band_cap),
            grid: GridSpec::new(s.dim as usize, s.samples_per_axis as usize)?,
        };
        emit(out, generate(&spec)?)
    })
}

unsafe fn average_op(
    field: *const BnField,
    ell: u32,
    t: f64,
    body: u32,
    out: *mut *mut BnField,
    op: fn(&SampledField, &AverageSpec) -> ballnorm::error::Result<SampledField>,
) -> BnStatus {
    guard(|| {
        let f = field_ref(field)?;
        let spec = AverageSpec::new(ell, t, BodySpec::new(body_kind(body)?, f.grid().dim())?)?;
        emit(out, op(f, &spec)?)
    })
}

/// `f - B_{ℓ,t} f` through the `A_ℓ` multiplier.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_ball_difference(
    field: *const BnField,
    ell: u32,
    t: f64,
    body: u32,
    out: *mut *mut BnField,
) -> BnStatus {
    average_op(field, ell, t, body, out, ball_difference)
}

/// The order-`2ℓ` average `B_{ℓ,t} f`.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_higher_average(
    field: *const BnField,
    ell: u32,
    t: f64,
    body: u32,
    out: *mut *mut BnField,
) -> BnStatus {
    average_op(field, ell, t, body, out, higher_average)
}

/// Dyadic band piece `φ_{2^{-j}} * f`.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_band_project(
    field: *const BnField,
    j: i32,
    out: *mut *mut BnField,
) -> BnStatus {
    guard(|| emit(out, band_project(field_ref(field)?, j, &build_bank())?))
}

/// Aggregate norm value.
///
/// # Safety
/// `field` must be a live handle; `params` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bn_norm(
    field: *const BnField,
    params: *const BnNormParams,
    out: *mut f64,
) -> BnStatus {
    guard(|| {
        let f = field_ref(field)?;
        let c = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("output"));
        }
        let space = match c.space {
            BN_SPACE_BESOV => Space::Besov,
            BN_SPACE_TRIEBEL_LIZORKIN => Space::TriebelLizorkin,
            other => return Err(bad(format!("unknown space code {other}"))),
        };
        let method = match c.method {
            BN_METHOD_CLASSICAL => Method::Classical,
            BN_METHOD_BALL => Method::Ball,
            other => return Err(bad(format!("unknown method code {other}"))),
        };
        let mut params = NormParams::new(
            space,
            method,
            c.alpha,
            Exponent::from(c.p),
            Exponent::from(c.q),
            c.ell,
        );
        if !c.homogeneous {
            params = params.inhomogeneous();
        }
        params.body = body_kind(c.body)?;
        params.stride = c.stride.max(1) as usize;
        if c.has_range {
            params = params.with_range(ScaleRange::new(c.k_min, c.k_max)?);
        }
        *out = norm(f, &params)?.aggregate;
        Ok(())
    })
}

/// Radial symbol value at `s` (`BN_MULTIPLIER_*`), with a quadrature rule
/// sized to the oscillation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_multiplier(
    kind: u32,
    ell: u32,
    dim: u32,
    s: f64,
    out: *mut f64,
) -> BnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output"));
        }
        let dim = dim as usize;
        let omega = if kind == BN_MULTIPLIER_BALL_HAT {
            s
        } else {
            ell as f64 * s
        };
        let rule = QuadratureRule::for_frequency(omega.abs());
        *out = match kind {
            BN_MULTIPLIER_BALL_HAT => ball_hat(dim, s, &rule)?,
            BN_MULTIPLIER_A_ELL => a_ell(ell, dim, s, &rule)?,
            BN_MULTIPLIER_M_ELL => m_ell(ell, dim, s, &rule)?,
            other => return Err(bad(format!("unknown multiplier code {other}"))),
        };
        Ok(())
    })
}

/// Write the binary field format.
///
/// # Safety
/// `field` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bn_field_write(field: *const BnField, path: *const c_char) -> BnStatus {
    guard(|| {
        let f = field_ref(field)?;
        let path = path_of(path)?;
        let file = File::create(path).map_err(|e| Failure(BnStatus::Io, format!("{path}: {e}")))?;
        Ok(write_binary(f, BufWriter::new(file))?)
    })
}

/// Read the binary field format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bn_field_read(path: *const c_char, out: *mut *mut BnField) -> BnStatus {
    guard(|| {
        let path = path_of(path)?;
        let file = File::open(path).map_err(|e| Failure(BnStatus::Io, format!("{path}: {e}")))?;
        emit(out, read_binary(BufReader::new(file))?)
    })
}
