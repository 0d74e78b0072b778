use std::ffi::{c_char, CStr, CString};
use std::ptr;

use locomp_ffi::*;
use serde_json::Value;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = locomp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    locomp_string_free(s);
    out
}

fn space(kind: &str) -> *mut LocompSpace {
    let mut sp = ptr::null_mut();
    assert_eq!(unsafe { locomp_space_new(c(kind).as_ptr(), &mut sp) }, LocompStatus::Ok);
    assert!(!sp.is_null());
    sp
}

fn line_ball(center: &str, radius: &str) -> CString {
    c(&format!(r#"{{"metric":["d"],"center":"{center}","radius":"{radius}"}}"#))
}

#[test]
fn ball_order_and_subset_on_the_line() {
    let sp = space(r#"{"kind":"rational_line"}"#);
    let (a, b) = (line_ball("0", "1/2"), line_ball("1/4", "1"));
    let mut v = LocompVerdict::Unknown;
    unsafe {
        assert_eq!(locomp_ball_order(sp, a.as_ptr(), b.as_ptr(), false, 8, &mut v), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Proved);
        assert_eq!(locomp_ball_order(sp, b.as_ptr(), a.as_ptr(), false, 8, &mut v), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Refuted);
        let mut ev = ptr::null_mut();
        assert_eq!(locomp_ball_subset(sp, b.as_ptr(), a.as_ptr(), 8, &mut v, &mut ev), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Refuted);
        let _: Value = serde_json::from_str(&take(ev)).unwrap();
        locomp_space_free(sp);
    }
}

#[test]
fn covers_return_certificates_and_witnesses() {
    let sp = space(r#"{"kind":"rational_line"}"#);
    let a = line_ball("0", "1");
    let good = c(r#"[{"metric":["d"],"center":"-1/2","radius":"1"},{"metric":["d"],"center":"1/2","radius":"1"}]"#);
    let gap = c(r#"[{"metric":["d"],"center":"-1","radius":"1"},{"metric":["d"],"center":"1","radius":"1"}]"#);
    let mut v = LocompVerdict::Unknown;
    let mut ev = ptr::null_mut();
    unsafe {
        assert_eq!(locomp_ball_cover(sp, a.as_ptr(), good.as_ptr(), 12, &mut v, &mut ev), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Proved);
        assert!(serde_json::from_str::<Value>(&take(ev)).unwrap().is_object());

        assert_eq!(locomp_ball_cover(sp, a.as_ptr(), gap.as_ptr(), 12, &mut v, &mut ev), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Refuted);
        assert_eq!(take(ev), r#""0""#);

        assert_eq!(locomp_pf_cover(sp, a.as_ptr(), good.as_ptr(), 12, &mut v, ptr::null_mut()), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Proved);
        locomp_space_free(sp);
    }
}

#[test]
fn interval_cover_witness_is_a_rational() {
    let mut v = LocompVerdict::Unknown;
    let mut ev = ptr::null_mut();
    let target = c(r#"["0","1"]"#);
    unsafe {
        let u = c(r#"[["-1/2","3/5"],["2/5","3/2"]]"#);
        assert_eq!(locomp_interval_cover(target.as_ptr(), u.as_ptr(), &mut v, ptr::null_mut()), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Proved);
        let u = c(r#"[["-1/2","1/2"],["1/2","3/2"]]"#);
        assert_eq!(locomp_interval_cover(target.as_ptr(), u.as_ptr(), &mut v, &mut ev), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Refuted);
        assert_eq!(take(ev), r#""1/2""#);
    }
}

#[test]
fn sqrt_two_point() {
    let sp = space(r#"{"kind":"rational_line"}"#);
    let mut p = ptr::null_mut();
    let mut q = ptr::null_mut();
    let mut v = LocompVerdict::Unknown;
    unsafe {
        assert_eq!(locomp_point_sqrt(sp, 2, &mut p), LocompStatus::Ok);
        assert_eq!(locomp_point_element(sp, c(r#""7/5""#).as_ptr(), &mut q), LocompStatus::Ok);
        assert_eq!(locomp_point_member(p, line_ball("7/5", "1/50").as_ptr(), 16, &mut v), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Proved);
        assert_eq!(locomp_point_member(p, line_ball("3/2", "1/20").as_ptr(), 16, &mut v), LocompStatus::Ok);
        assert_eq!(v, LocompVerdict::Refuted);

        let mut s = ptr::null_mut();
        assert_eq!(locomp_point_dist_upper(p, q, ptr::null(), 20, &mut s), LocompStatus::Ok);
        let text = take(s);
        let (n, d) = text.split_once('/').unwrap();
        let upper = n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap();
        let exact = 2f64.sqrt() - 1.4;
        assert!(upper >= exact && upper - exact <= 4.0 * 2f64.powi(-20), "{text}");
        locomp_point_free(p);
        locomp_point_free(q);
        locomp_space_free(sp);
    }
}

#[test]
fn run_job_reports_worst_exit_code() {
    let job = c(r#"{"spaces":{"Q":{"kind":"rational_line"}},"queries":[
        {"kind":"interval-cover","target":["0","1"],"u":[["-1/2","3/5"],["2/5","3/2"]]},
        {"kind":"interval-cover","target":["0","1"],"u":[["-1/2","1/2"],["1/2","3/2"]]}]}"#);
    let mut rep = ptr::null_mut();
    let mut code = -1;
    unsafe {
        assert_eq!(locomp_run_job(job.as_ptr(), 12, true, &mut rep, &mut code), LocompStatus::Ok);
        assert_eq!(code, 1);
        let r: Value = serde_json::from_str(&take(rep)).unwrap();
        assert_eq!(r["queries"][0]["verdict"], "proved");
        assert_eq!(r["queries"][1]["verdict"], "refuted");
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut sp = ptr::null_mut();
    unsafe {
        assert_eq!(locomp_space_new(ptr::null(), &mut sp), LocompStatus::NullArgument);
        assert!(last_error().contains("kind_json"));
        assert_eq!(locomp_space_new(c("{not json").as_ptr(), &mut sp), LocompStatus::Parse);
        assert!(sp.is_null());
        let bad = [0xffu8, 0];
        assert_eq!(locomp_space_new(bad.as_ptr().cast(), &mut sp), LocompStatus::InvalidUtf8);

        let sp = space(r#"{"kind":"rational_line"}"#);
        let mut v = LocompVerdict::Unknown;
        let wrong_metric = c(r#"{"metric":["nope"],"center":"0","radius":"1"}"#);
        let a = line_ball("0", "1");
        assert_eq!(locomp_ball_order(sp, wrong_metric.as_ptr(), a.as_ptr(), false, 4, &mut v), LocompStatus::Space);
        assert!(!last_error().is_empty());
        let neg = line_ball("0", "-1");
        assert_eq!(locomp_ball_order(sp, neg.as_ptr(), a.as_ptr(), false, 4, &mut v), LocompStatus::Space);
        assert_eq!(locomp_ball_order(sp, a.as_ptr(), a.as_ptr(), false, 4, ptr::null_mut()), LocompStatus::NullArgument);

        // success clears the message
        assert_eq!(locomp_ball_order(sp, a.as_ptr(), a.as_ptr(), false, 4, &mut v), LocompStatus::Ok);
        assert!(locomp_last_error().is_null());
        locomp_space_free(sp);
        locomp_space_free(ptr::null_mut());
        locomp_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_manifest() {
    let v = unsafe { CStr::from_ptr(locomp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
