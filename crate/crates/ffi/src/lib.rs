//! C ABI over the affine-energy toolkit.
//!
//! Every function returns an [`AeStatus`]; results come back through out
//! pointers. Objects are opaque handles released with the matching `_free`.
//! After a non-zero status, `ae_last_error()` describes the failure on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use affine_energy::affine_energy::EnergyContext;
use affine_energy::bodies::{busemann_petty_deficit, petty_product, BodySpec, CentroidMethod, ConvexBody};
use affine_energy::funcspace::{FunctionSpec, GridFunction};
use affine_energy::inequalities::{sharp_constant, SharpKind};
use affine_energy::scenario::{reports_to_json, run_scenario, RunOptions, Scenario};
use affine_energy::spherequad::{Scheme, SphereGrid};
use affine_energy::Error;

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Config = 4,
    Domain = 5,
    Numerical = 6,
    InvalidBody = 7,
    Unsupported = 8,
    Degenerate = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeScheme {
    UniformAngle = 0,
    ProductGauss = 1,
    MonteCarlo = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeSharpKind {
    Sobolev = 0,
    Morrey = 1,
    GnI = 2,
    GnII = 3,
    Logsob = 4,
}

/// Energies of `f` and of its symmetric decreasing rearrangement.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AeEnergyGap {
    pub energy: f64,
    pub energy_star: f64,
    pub gap: f64,
    pub plateau_measure: f64,
}

/// Direction grid on the unit sphere.
pub struct AeSphere(Arc<SphereGrid>);

/// Convex body.
pub struct AeBody(ConvexBody);

/// Function sampled on a regular grid.
pub struct AeFunction(GridFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AeStatus {
    match e {
        Error::Config(_) => AeStatus::Config,
        Error::Domain(_) => AeStatus::Domain,
        Error::Numerical(_) => AeStatus::Numerical,
        Error::InvalidBody(_) => AeStatus::InvalidBody,
        Error::Unsupported(_) => AeStatus::Unsupported,
        Error::Degenerate(_) => AeStatus::Degenerate,
        Error::Parse(_) => AeStatus::Parse,
        Error::Io(_) => AeStatus::Io,
    }
}

struct Fail(AeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> AeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AeStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail(AeStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(AeStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Fail(AeStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail(AeStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failure on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ae_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ae_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ae_sphere_new(
    n: usize,
    resolution: usize,
    scheme: AeScheme,
    seed: u64,
    out: *mut *mut AeSphere,
) -> AeStatus {
    guard(|| {
        let scheme = match scheme {
            AeScheme::UniformAngle => Scheme::UniformAngle,
            AeScheme::ProductGauss => Scheme::ProductGauss,
            AeScheme::MonteCarlo => Scheme::MonteCarlo,
        };
        let grid = SphereGrid::new(n, resolution, scheme, seed)?;
        write_out(out, Box::into_raw(Box::new(AeSphere(Arc::new(grid)))))
    })
}

/// # Safety
/// `sphere` must come from `ae_sphere_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_sphere_free(sphere: *mut AeSphere) {
    if !sphere.is_null() {
        drop(Box::from_raw(sphere));
    }
}

/// Builds a body from its JSON spec, e.g. `{"kind":"cube","params":{"n":2}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ae_body_from_json(json: *const c_char, out: *mut *mut AeBody) -> AeStatus {
    guard(|| {
        let body = BodySpec::from_json(str_arg(json, "json")?)?.build()?;
        write_out(out, Box::into_raw(Box::new(AeBody(body))))
    })
}

/// # Safety
/// `body` must come from `ae_body_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_body_free(body: *mut AeBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_body_dim(body: *const AeBody, out: *mut usize) -> AeStatus {
    guard(|| write_out(out, ref_arg(body, "body")?.0.dim()))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_body_volume(body: *const AeBody, out: *mut f64) -> AeStatus {
    guard(|| write_out(out, ref_arg(body, "body")?.0.volume()))
}

/// `V(K)^{n-1} V(Pi* K) / (omega_n / omega_{n-1})^n`, at most 1.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_petty_product(body: *const AeBody, sphere: *const AeSphere, out: *mut f64) -> AeStatus {
    guard(|| {
        let k = &ref_arg(body, "body")?.0;
        let grid = &ref_arg(sphere, "sphere")?.0;
        write_out(out, petty_product(k, grid)?)
    })
}

/// `V(Gamma_{lambda,p} K) / V(K) - 1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_busemann_petty_deficit(
    body: *const AeBody,
    lambda: f64,
    p: f64,
    sphere: *const AeSphere,
    out: *mut f64,
) -> AeStatus {
    guard(|| {
        let k = &ref_arg(body, "body")?.0;
        let grid = ref_arg(sphere, "sphere")?.0.clone();
        write_out(out, busemann_petty_deficit(&k.as_star(), lambda, p, grid, CentroidMethod::Auto)?)
    })
}

/// Builds a gridded function from a catalog spec, e.g.
/// `{"name":"gaussian","grid":{"n":2,"extent":5,"h":0.05}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ae_function_from_json(json: *const c_char, out: *mut *mut AeFunction) -> AeStatus {
    guard(|| {
        let f = FunctionSpec::from_json(str_arg(json, "json")?)?.build()?;
        write_out(out, Box::into_raw(Box::new(AeFunction(f))))
    })
}

/// # Safety
/// `f` must come from `ae_function_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_function_free(f: *mut AeFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `E_{lambda,p}(f)` for `p > 1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_affine_energy(
    f: *const AeFunction,
    lambda: f64,
    p: f64,
    sphere: *const AeSphere,
    out: *mut f64,
) -> AeStatus {
    guard(|| {
        let f = &ref_arg(f, "function")?.0;
        let grid = ref_arg(sphere, "sphere")?.0.clone();
        write_out(out, EnergyContext::new(f, lambda, p, grid)?.affine_energy()?)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_polya_szego_gap(
    f: *const AeFunction,
    lambda: f64,
    p: f64,
    sphere: *const AeSphere,
    out: *mut AeEnergyGap,
) -> AeStatus {
    guard(|| {
        let f = &ref_arg(f, "function")?.0;
        let grid = ref_arg(sphere, "sphere")?.0.clone();
        let g = EnergyContext::new(f, lambda, p, grid)?.polya_szego_gap()?;
        write_out(
            out,
            AeEnergyGap { energy: g.e_f, energy_star: g.e_fstar, gap: g.gap, plateau_measure: g.plateau_measure },
        )
    })
}

/// Sharp constant; `alpha` is read only for the Gagliardo-Nirenberg kinds.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ae_sharp_constant(
    kind: AeSharpKind,
    n: usize,
    p: f64,
    alpha: f64,
    out: *mut f64,
) -> AeStatus {
    guard(|| {
        let (kind, alpha) = match kind {
            AeSharpKind::Sobolev => (SharpKind::Sobolev, None),
            AeSharpKind::Morrey => (SharpKind::Morrey, None),
            AeSharpKind::GnI => (SharpKind::GnI, Some(alpha)),
            AeSharpKind::GnII => (SharpKind::GnII, Some(alpha)),
            AeSharpKind::Logsob => (SharpKind::Logsob, None),
        };
        write_out(out, sharp_constant(kind, n, p, alpha)?)
    })
}

/// Runs a scenario given as JSON text. On success `*out_json` holds the
/// report array (release it with `ae_string_free`) and `*all_pass` is 1 when
/// every job passed. A failing job is named in `ae_last_error()`.
///
/// # Safety
/// `scenario` must be a NUL-terminated string; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ae_run_scenario(
    scenario: *const c_char,
    tolerance_scale: f64,
    out_json: *mut *mut c_char,
    all_pass: *mut i32,
) -> AeStatus {
    guard(|| {
        if out_json.is_null() || all_pass.is_null() {
            return Err(Fail(AeStatus::NullPointer, "output pointer is null".into()));
        }
        let s = Scenario::from_json(str_arg(scenario, "scenario")?)?;
        let opts = RunOptions { tolerance_scale, ..Default::default() };
        let reports = run_scenario(&s, &opts).map_err(|f| Fail(status_of(&f.error), f.to_string()))?;
        let text = CString::new(reports_to_json(&reports)).expect("json has no nul bytes");
        write_out(all_pass, i32::from(reports.iter().all(|r| r.pass)))?;
        write_out(out_json, text.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ae_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
