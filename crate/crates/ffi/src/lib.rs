//! C ABI over `qaw`. Contexts and parameter sets are opaque heap handles;
//! every call returns a [`QawStatus`] and writes results through out
//! pointers. The message of the last failure on the calling thread is kept
//! for `qaw_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qaw::contour::eval_in;
use qaw::qkernel::{qpoch_inf, theta};
use qaw::{FamilyParams, Method, QContext, QawError, C64};

/// Opaque q and tolerance settings.
pub struct QawContext {
    inner: QContext,
}

/// Opaque parameter set (N, a_1..a_2N) bound to a context.
pub struct QawParams {
    inner: FamilyParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QawStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    PoleProximity = 3,
    ThetaZero = 4,
    Divergence = 5,
    NoConvergence = 6,
    UnsupportedDomain = 7,
    Degenerate = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QawMethod {
    Circle = 0,
    CirclePlusTail = 1,
    ResidueFull = 2,
    ResidueReduced = 3,
    ClosedForm = 4,
}

impl From<QawMethod> for Method {
    fn from(m: QawMethod) -> Self {
        match m {
            QawMethod::Circle => Method::Circle,
            QawMethod::CirclePlusTail => Method::CirclePlusTail,
            QawMethod::ResidueFull => Method::ResidueFull,
            QawMethod::ResidueReduced => Method::ResidueReduced,
            QawMethod::ClosedForm => Method::ClosedForm,
        }
    }
}

/// Result of `qaw_eval`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QawIntegral {
    pub value_re: f64,
    pub value_im: f64,
    pub est_error: f64,
    pub nodes_or_terms: usize,
    pub tail_omitted: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let s = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &QawError) -> QawStatus {
    match e {
        QawError::InvalidInput(_) => QawStatus::InvalidInput,
        QawError::PoleProximity(_) => QawStatus::PoleProximity,
        QawError::ThetaZero(_) => QawStatus::ThetaZero,
        QawError::Divergence(_) => QawStatus::Divergence,
        QawError::NoConvergence(_) => QawStatus::NoConvergence,
        QawError::UnsupportedDomain(_) => QawStatus::UnsupportedDomain,
        QawError::Degenerate(_) => QawStatus::Degenerate,
    }
}

fn guard(f: impl FnOnce() -> Result<(), QawError>) -> QawStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QawStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside qaw");
            QawStatus::Panic
        }
    }
}

fn null() -> QawStatus {
    set_error("null pointer argument");
    QawStatus::NullPointer
}

/// Creates a context for base q = q_re + i q_im. `eps <= 0` keeps the default.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qaw_context_new(q_re: f64, q_im: f64, eps: f64, out: *mut *mut QawContext) -> QawStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let mut ctx = QContext::new(C64::new(q_re, q_im))?;
        if eps > 0.0 {
            ctx = ctx.with_eps(eps)?;
        }
        *out = Box::into_raw(Box::new(QawContext { inner: ctx }));
        Ok(())
    })
}

/// # Safety
/// `ctx` must come from `qaw_context_new` and not have been freed. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qaw_context_free(ctx: *mut QawContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Creates a parameter set from `len = 2n` complex values. With `continued`
/// set, parameters outside the unit disc are accepted and their poles are
/// picked up as residues.
///
/// # Safety
/// `a_re` and `a_im` must each point to `len` doubles; `ctx` must be live.
#[no_mangle]
pub unsafe extern "C" fn qaw_params_new(
    ctx: *const QawContext,
    n: usize,
    a_re: *const f64,
    a_im: *const f64,
    len: usize,
    continued: bool,
    out: *mut *mut QawParams,
) -> QawStatus {
    if ctx.is_null() || a_re.is_null() || a_im.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        let re = std::slice::from_raw_parts(a_re, len);
        let im = std::slice::from_raw_parts(a_im, len);
        let a: Vec<C64> = re.iter().zip(im).map(|(&x, &y)| C64::new(x, y)).collect();
        let c = (*ctx).inner;
        let p = if continued { FamilyParams::new_continued(n, a, c)? } else { FamilyParams::new(n, a, c)? };
        *out = Box::into_raw(Box::new(QawParams { inner: p }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `qaw_params_new` and not have been freed. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qaw_params_free(p: *mut QawParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Evaluates I_N by `method`.
///
/// # Safety
/// `p` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qaw_eval(p: *const QawParams, method: QawMethod, out: *mut QawIntegral) -> QawStatus {
    if p.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        let r = eval_in(&(*p).inner, method.into())?;
        *out = QawIntegral {
            value_re: r.value.re,
            value_im: r.value.im,
            est_error: r.est_error,
            nodes_or_terms: r.nodes_or_terms,
            tail_omitted: r.tail_omitted,
        };
        Ok(())
    })
}

/// theta(z; q) = (z;q)_inf (q/z;q)_inf.
///
/// # Safety
/// `ctx` must be live; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn qaw_theta(
    ctx: *const QawContext,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> QawStatus {
    if ctx.is_null() || out_re.is_null() || out_im.is_null() {
        return null();
    }
    guard(|| {
        let v = theta(C64::new(z_re, z_im), &(*ctx).inner)?;
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// (a; q)_inf.
///
/// # Safety
/// `ctx` must be live; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn qaw_qpoch_inf(
    ctx: *const QawContext,
    a_re: f64,
    a_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> QawStatus {
    if ctx.is_null() || out_re.is_null() || out_im.is_null() {
        return null();
    }
    guard(|| {
        let v = qpoch_inf(C64::new(a_re, a_im), &(*ctx).inner).value;
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qaw_status_message(s: QawStatus) -> *const c_char {
    let m: &'static [u8] = match s {
        QawStatus::Ok => b"ok\0",
        QawStatus::NullPointer => b"null pointer\0",
        QawStatus::InvalidInput => b"invalid input\0",
        QawStatus::PoleProximity => b"pole proximity\0",
        QawStatus::ThetaZero => b"theta zero\0",
        QawStatus::Divergence => b"divergent\0",
        QawStatus::NoConvergence => b"no convergence\0",
        QawStatus::UnsupportedDomain => b"unsupported domain\0",
        QawStatus::Degenerate => b"degenerate\0",
        QawStatus::Panic => b"panic\0",
    };
    m.as_ptr().cast()
}

/// Message of the last failed call on this thread, empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qaw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

