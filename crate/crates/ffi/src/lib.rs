//! C ABI for locomp.
//!
//! Spaces and formal points are opaque handles. Balls, intervals, points
//! and certificates cross the boundary as JSON text in the same shape the
//! command line uses. Every call returns a [`LocompStatus`]; on failure
//! [`locomp_last_error`] describes what went wrong. Strings handed out by
//! the library are released with [`locomp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locomp::deciders::{decide_interval_cover, semidecide_lc_cover, Interval};
use locomp::gus::{ball_order, ball_subset, make_space, FormalBall, Gus, GusError, MetricId, Point, SpaceKind};
use locomp::job::{parse_job, run, RunOptions};
use locomp::numeric::{format_rational, Bound};
use locomp::points::{dist_upper, member, point_of_element, sqrt_point, PointApprox};
use locomp::uniform::pf_cover_check;
use locomp::verdict::Verdict;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocompStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// JSON input did not parse or did not describe the expected value.
    Parse = 3,
    /// The space rejected the input (unknown metric, bad radius, ...).
    Space = 4,
    /// The operation needs a spatial oracle the space does not have.
    OracleMissing = 5,
    /// Internal failure; the library caught a panic.
    Panic = 6,
}

/// Three-valued judgment.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocompVerdict {
    Proved = 0,
    Refuted = 1,
    Unknown = 2,
}

/// A generalised metric space with its oracle.
pub struct LocompSpace(Gus);

/// A formal point of the localic completion of a space.
pub struct LocompPoint(PointApprox);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LocompStatus, String);

impl From<GusError> for Failure {
    fn from(e: GusError) -> Self {
        let status = if e == GusError::OracleMissing { LocompStatus::OracleMissing } else { LocompStatus::Space };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LocompStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LocompStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LocompStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(LocompStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(LocompStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn json<T: DeserializeOwned>(p: *const c_char, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text(p, what)?).map_err(|e| Failure(LocompStatus::Parse, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(LocompStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(LocompStatus::NullArgument, format!("{what} is null")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn ball_checked(g: &Gus, b: FormalBall) -> Result<FormalBall, Failure> {
    g.check_metric(&b.metric)?;
    FormalBall::new(b.metric, b.center, b.radius).map_err(Failure::from)
}

/// Writes the verdict and, when `evidence` is non-null, the certificate or
/// witness as JSON (null for unknown).
unsafe fn report<P: Serialize, R: Serialize>(v: Verdict<P, R>, verdict: *mut LocompVerdict, evidence: *mut *mut c_char) -> Result<(), Failure> {
    let (code, ev) = match &v {
        Verdict::Proved(p) => (LocompVerdict::Proved, serde_json::to_string(p)),
        Verdict::Refuted(r) => (LocompVerdict::Refuted, serde_json::to_string(r)),
        Verdict::Unknown { .. } => (LocompVerdict::Unknown, Ok("null".to_string())),
    };
    *out(verdict, "verdict")? = code;
    if let Some(e) = evidence.as_mut() {
        *e = owned_string(ev.map_err(|e| Failure(LocompStatus::Panic, e.to_string()))?);
    }
    Ok(())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn locomp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn locomp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn locomp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a space from a JSON description such as `{"kind":"rational_line"}`.
///
/// # Safety
/// `kind_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locomp_space_new(kind_json: *const c_char, out_space: *mut *mut LocompSpace) -> LocompStatus {
    guard(|| {
        let slot = out(out_space, "out_space")?;
        let kind: SpaceKind = json(kind_json, "kind_json")?;
        *slot = Box::into_raw(Box::new(LocompSpace(make_space(&kind)?)));
        Ok(())
    })
}

/// # Safety
/// `space` must come from [`locomp_space_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn locomp_space_free(space: *mut LocompSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// `a ≤ b` (or `a < b` when `strict`) in the ball order.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn locomp_ball_order(
    space: *const LocompSpace,
    a_json: *const c_char,
    b_json: *const c_char,
    strict: bool,
    budget: u32,
    verdict: *mut LocompVerdict,
) -> LocompStatus {
    guard(|| {
        let g = &handle(space, "space")?.0;
        let a = ball_checked(g, json(a_json, "a_json")?)?;
        let b = ball_checked(g, json(b_json, "b_json")?)?;
        report(ball_order(g, &a, &b, strict, budget), verdict, ptr::null_mut())
    })
}

/// Inclusion of the extents of `a` and `b`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated; `evidence` may be null.
#[no_mangle]
pub unsafe extern "C" fn locomp_ball_subset(
    space: *const LocompSpace,
    a_json: *const c_char,
    b_json: *const c_char,
    budget: u32,
    verdict: *mut LocompVerdict,
    evidence: *mut *mut c_char,
) -> LocompStatus {
    guard(|| {
        let g = &handle(space, "space")?.0;
        let a = ball_checked(g, json(a_json, "a_json")?)?;
        let b = ball_checked(g, json(b_json, "b_json")?)?;
        report(ball_subset(g, &a, &b, budget)?, verdict, evidence)
    })
}

unsafe fn cover_args(space: *const LocompSpace, a_json: *const c_char, u_json: *const c_char) -> Result<(&'static Gus, FormalBall, Vec<FormalBall>), Failure> {
    let g = &handle(space, "space")?.0;
    let a = ball_checked(g, json(a_json, "a_json")?)?;
    let u: Vec<FormalBall> = json(u_json, "u_json")?;
    let u = u.into_iter().map(|b| ball_checked(g, b)).collect::<Result<_, _>>()?;
    Ok((g, a, u))
}

/// `a ◁ U` in the localic completion; `u_json` is a JSON array of balls.
/// The evidence is the certificate or an uncovered point.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated; `evidence` may be null.
#[no_mangle]
pub unsafe extern "C" fn locomp_ball_cover(
    space: *const LocompSpace,
    a_json: *const c_char,
    u_json: *const c_char,
    budget: u32,
    verdict: *mut LocompVerdict,
    evidence: *mut *mut c_char,
) -> LocompStatus {
    guard(|| {
        let (g, a, u) = cover_args(space, a_json, u_json)?;
        report(semidecide_lc_cover(g, &a, &u, budget)?, verdict, evidence)
    })
}

/// `a ◁̄ U` in the uniform completion.
///
/// # Safety
/// As for [`locomp_ball_cover`].
#[no_mangle]
pub unsafe extern "C" fn locomp_pf_cover(
    space: *const LocompSpace,
    a_json: *const c_char,
    u_json: *const c_char,
    budget: u32,
    verdict: *mut LocompVerdict,
    evidence: *mut *mut c_char,
) -> LocompStatus {
    guard(|| {
        let (g, a, u) = cover_args(space, a_json, u_json)?;
        report(pf_cover_check(g, &a, &u, budget)?, verdict, evidence)
    })
}

/// Decides `(p, q) ◁ U` for rational intervals given as `["p","q"]`.
///
/// # Safety
/// Strings NUL-terminated; `verdict` writable; `evidence` may be null.
#[no_mangle]
pub unsafe extern "C" fn locomp_interval_cover(
    target_json: *const c_char,
    u_json: *const c_char,
    verdict: *mut LocompVerdict,
    evidence: *mut *mut c_char,
) -> LocompStatus {
    guard(|| {
        let target: Interval = json(target_json, "target_json")?;
        let u: Vec<Interval> = json(u_json, "u_json")?;
        let v = decide_interval_cover(&target, &u).map_err(|e| Failure(LocompStatus::Parse, e.to_string()))?;
        report(v.map(|c| c, |x| format_rational(&x)), verdict, evidence)
    })
}

/// The formal point `√s`.
///
/// # Safety
/// `space` valid; `out_point` writable.
#[no_mangle]
pub unsafe extern "C" fn locomp_point_sqrt(space: *const LocompSpace, s: u64, out_point: *mut *mut LocompPoint) -> LocompStatus {
    guard(|| {
        let slot = out(out_point, "out_point")?;
        let g = &handle(space, "space")?.0;
        let p = sqrt_point(g, s).map_err(|e| Failure(LocompStatus::Space, e.to_string()))?;
        *slot = Box::into_raw(Box::new(LocompPoint(p)));
        Ok(())
    })
}

/// The formal point of a carrier point given as JSON (`"7/5"`, `["0","1"]`).
///
/// # Safety
/// `space` valid; string NUL-terminated; `out_point` writable.
#[no_mangle]
pub unsafe extern "C" fn locomp_point_element(space: *const LocompSpace, point_json: *const c_char, out_point: *mut *mut LocompPoint) -> LocompStatus {
    guard(|| {
        let slot = out(out_point, "out_point")?;
        let g = &handle(space, "space")?.0;
        let x: Point = json(point_json, "point_json")?;
        let p = point_of_element(g, &x).map_err(|e| Failure(LocompStatus::Space, e.to_string()))?;
        *slot = Box::into_raw(Box::new(LocompPoint(p)));
        Ok(())
    })
}

/// # Safety
/// `point` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn locomp_point_free(point: *mut LocompPoint) {
    if !point.is_null() {
        drop(Box::from_raw(point));
    }
}

/// Whether the ball belongs to the formal point.
///
/// # Safety
/// Pointers valid; string NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn locomp_point_member(point: *const LocompPoint, ball_json: *const c_char, budget: u32, verdict: *mut LocompVerdict) -> LocompStatus {
    guard(|| {
        let p = &handle(point, "point")?.0;
        let b = ball_checked(&p.space, json(ball_json, "ball_json")?)?;
        report(member(p, &b, budget), verdict, ptr::null_mut())
    })
}

/// Upper bound at precision `n` for the distance of two points under the
/// metric given as a JSON list of generator ids (null: all generators).
/// Writes a rational string, or `"inf"`.
///
/// # Safety
/// Pointers valid; `metric_json` may be null; `out_bound` writable.
#[no_mangle]
pub unsafe extern "C" fn locomp_point_dist_upper(
    p: *const LocompPoint,
    q: *const LocompPoint,
    metric_json: *const c_char,
    n: u32,
    out_bound: *mut *mut c_char,
) -> LocompStatus {
    guard(|| {
        let slot = out(out_bound, "out_bound")?;
        let (p, q) = (&handle(p, "p")?.0, &handle(q, "q")?.0);
        let d: MetricId = if metric_json.is_null() { p.space.full_metric() } else { json(metric_json, "metric_json")? };
        p.space.check_metric(&d)?;
        let b = dist_upper(p, q, &d, n).map_err(|e| Failure(LocompStatus::Space, e.to_string()))?;
        *slot = owned_string(match b {
            Bound::Finite(x) => format_rational(&x),
            Bound::Infinite => "inf".into(),
        });
        Ok(())
    })
}

/// Runs a job document and writes the structured report. `exit_code`
/// receives the worst verdict code (0, 1, 2, or 3 for errors).
///
/// # Safety
/// String NUL-terminated; `report_json` and `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn locomp_run_job(
    job_json: *const c_char,
    default_budget: u32,
    replay_certificates: bool,
    report_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> LocompStatus {
    guard(|| {
        let slot = out(report_json, "report_json")?;
        let code = out(exit_code, "exit_code")?;
        let doc = parse_job(text(job_json, "job_json")?).map_err(|e| Failure(LocompStatus::Parse, e.to_string()))?;
        let rep = run(&doc, &RunOptions { default_budget, replay: replay_certificates });
        *code = rep.exit_code;
        *slot = owned_string(serde_json::to_string(&rep).map_err(|e| Failure(LocompStatus::Panic, e.to_string()))?);
        Ok(())
    })
}
