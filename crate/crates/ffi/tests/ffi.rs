use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use rematch_ffi::*;

fn last_error() -> String {
    let p = rm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    rm_string_free(s);
    out
}

fn separation() -> *mut RmInstance {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rm_gen_separation(&mut h) }, RmStatus::Ok);
    h
}

#[test]
fn instance_json_roundtrip() {
    unsafe {
        let h = separation();
        assert_eq!(rm_instance_edge_count(h), 4);
        assert_eq!(rm_instance_rounds(h), 2);
        let mut s = ptr::null_mut();
        assert_eq!(rm_instance_to_json(h, &mut s), RmStatus::Ok);
        let json = take(s);
        assert_eq!(rematch::Instance::from_json(&json).unwrap(), rematch::harness::gen_separation());

        let c = CString::new(json).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(rm_instance_from_json(c.as_ptr(), &mut back), RmStatus::Ok);
        assert_eq!(rm_instance_edge_count(back), 4);
        rm_instance_free(back);
        rm_instance_free(h);
        rm_instance_free(ptr::null_mut());
        assert_eq!(rm_instance_edge_count(ptr::null()), 0);
    }
}

#[test]
fn generators_match_the_core_crate() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(rm_gen_gneps(6, 0.1, &mut h), RmStatus::Ok);
        assert_eq!(rm_instance_edge_count(h), 11);
        assert_eq!(rm_instance_rounds(h), 36);
        rm_instance_free(h);

        assert_eq!(rm_gen_knn(3, 0.2, &mut h), RmStatus::Ok);
        assert_eq!(rm_instance_edge_count(h), 9);
        rm_instance_free(h);

        let profile = CString::new("cap-small").unwrap();
        assert_eq!(rm_gen_random(profile.as_ptr(), 17, &mut h), RmStatus::Ok);
        let mut s = ptr::null_mut();
        rm_instance_to_json(h, &mut s);
        let want = rematch::harness::gen_random(rematch::harness::Profile::CapSmall, 17);
        assert_eq!(rematch::Instance::from_json(&take(s)).unwrap(), want);
        rm_instance_free(h);
    }
}

#[test]
fn monte_carlo_and_opt() {
    unsafe {
        let h = separation();
        let policy = CString::new("sm").unwrap();
        let mut stats = RmRewardStats::default();
        assert_eq!(rm_monte_carlo(h, policy.as_ptr(), 400, 5, &mut stats), RmStatus::Ok);
        let want = rematch::harness::monte_carlo(&rematch::harness::gen_separation(), rematch::PolicyId::Sm, 400, 5)
            .unwrap();
        assert_eq!((stats.trials, stats.seed, stats.mean, stats.std_error), (400, 5, want.mean, want.stderr));

        let mut s = ptr::null_mut();
        assert_eq!(rm_monte_carlo_json(h, policy.as_ptr(), 400, 5, &mut s), RmStatus::Ok);
        assert_eq!(take(s), want.to_json());

        let (mut v, mut vc) = (0.0, 0.0);
        assert_eq!(rm_opt_value(h, false, &mut v), RmStatus::Ok);
        assert_eq!(rm_opt_value(h, true, &mut vc), RmStatus::Ok);
        assert!((v - 3.094).abs() < 1e-9);
        assert!((vc - 2.926).abs() < 1e-9);
        rm_instance_free(h);
    }
}

#[test]
fn lp_functions() {
    unsafe {
        let (mut opt, mut u, mut f) = (0.0, 0.0, 0.0);
        for (variant, first) in [(RmLpVariant::Sm, 2), (RmLpVariant::GreedyCommit, 3)] {
            for t in first..=6 {
                assert_eq!(rm_lp_solve(t, variant, &mut opt), RmStatus::Ok);
                assert_eq!(rm_lp_u(t, variant, &mut u), RmStatus::Ok);
                assert_eq!(rm_lp_factor(t, variant, &mut f), RmStatus::Ok);
                assert!((opt - u).abs() <= 1e-6, "{variant:?} t={t}: {opt} vs {u}");
                assert!((f * u - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(rm_lp_factor(2, RmLpVariant::GreedyCommit, &mut f), RmStatus::InvalidArgument);
        let mut feasible = false;
        assert_eq!(rm_lp_check_dual(5, RmLpVariant::Sm, false, &mut feasible), RmStatus::Ok);
        assert!(feasible);
        assert_eq!(rm_lp_check_dual(5, RmLpVariant::Sm, true, &mut feasible), RmStatus::Ok);
        assert!(!feasible);
    }
}

#[test]
fn verify_reports_json() {
    unsafe {
        let h = separation();
        let lemma = CString::new("domination").unwrap();
        let mut s = ptr::null_mut();
        let mut holds = false;
        assert_eq!(rm_verify_json(h, lemma.as_ptr(), 0, 0, 0, &mut s, &mut holds), RmStatus::Ok, "{}", last_error());
        assert!(holds);
        let reports: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(reports.as_array().unwrap().len(), 2);

        let bogus = CString::new("no-such-lemma").unwrap();
        assert_eq!(rm_verify_json(h, bogus.as_ptr(), 0, 0, 0, &mut s, &mut holds), RmStatus::InvalidArgument);
        rm_instance_free(h);
    }
}

#[test]
fn reproduce_one_bundle() {
    unsafe {
        let name = CString::new("separation").unwrap();
        let mut s = ptr::null_mut();
        let mut pass = false;
        assert_eq!(rm_reproduce(name.as_ptr(), 7, &mut s, &mut pass), RmStatus::Ok);
        assert!(pass);
        let text = take(s);
        assert!(text.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(rm_gen_separation(ptr::null_mut()), RmStatus::NullPointer);
        assert!(last_error().contains("null"));

        assert_eq!(rm_instance_from_json(ptr::null(), &mut h), RmStatus::NullPointer);

        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(rm_instance_from_json(bad.as_ptr().cast(), &mut h), RmStatus::InvalidUtf8);

        let junk = CString::new("{\"rounds\":").unwrap();
        assert_eq!(rm_instance_from_json(junk.as_ptr(), &mut h), RmStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        assert_eq!(rm_gen_gneps(1, 0.1, &mut h), RmStatus::InvalidArgument);
        assert_eq!(rm_gen_knn(3, 1.5, &mut h), RmStatus::InvalidArgument);

        assert_eq!(rm_gen_knn(4, 0.5, &mut h), RmStatus::Ok);
        assert!(rm_last_error_message().is_null());
        let mut v = 0.0;
        assert_eq!(rm_opt_value(h, false, &mut v), RmStatus::LimitExceeded);
        assert!(!last_error().is_empty());
        rm_instance_free(h);

        let mut x = 0.0;
        assert_eq!(rm_lp_solve(40, RmLpVariant::Sm, &mut x), RmStatus::LimitExceeded);
        assert_eq!(rm_lp_u(0, RmLpVariant::Sm, &mut x), RmStatus::InvalidArgument);
        assert_eq!(rm_lp_u(3, RmLpVariant::Sm, ptr::null_mut()), RmStatus::NullPointer);

        let policy = CString::new("sm").unwrap();
        let mut stats = RmRewardStats::default();
        assert_eq!(rm_monte_carlo(ptr::null(), policy.as_ptr(), 10, 1, &mut stats), RmStatus::NullPointer);
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(rm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rematch.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for needle in [
        "typedef struct RmInstance RmInstance;",
        "RM_STATUS_OK = 0",
        "RM_STATUS_LIMIT_EXCEEDED = 4",
        "RM_LP_VARIANT_GREEDY_COMMIT = 1",
        "double std_error;",
        "RmStatus rm_opt_value(const RmInstance *inst, bool commit, double *out);",
        "void rm_string_free(char *s);",
        "const char *rm_last_error_message(void);",
    ] {
        assert!(h.contains(needle), "header is missing `{needle}`");
    }
}

fn target_dir() -> PathBuf {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

/// Compiles and runs a small C program against the static library, when a C
/// compiler is present.
#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("librematch_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = std::env::temp_dir().join(format!("rematch-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "rematch.h"
int main(void) {
    RmInstance *h = NULL;
    double v = 0.0;
    if (rm_gen_separation(&h) != RM_STATUS_OK) return 10;
    if (rm_opt_value(h, false, &v) != RM_STATUS_OK) return 11;
    rm_instance_free(h);
    if (rm_gen_gneps(1, 0.1, &h) != RM_STATUS_INVALID_ARGUMENT) return 12;
    if (rm_last_error_message() == NULL) return 13;
    printf("%.6f\n", v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "3.094000");
}
