//! Exercises the C ABI through the exported symbols, plus an end-to-end
//! check that the generated header compiles and links from actual C code.

use std::ffi::{CStr, CString};

use magnus_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mg_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn model_text_roundtrip() {
    let text = "magnus-model v1\ndim 2\nbreakpoints 0 3\nsegment\n0 0 : 2\n0 1 : 0 1\n1 0 : 0\n1 1 : -1\n";
    unsafe {
        let model = mg_model_from_text(c(text).as_ptr());
        assert!(!model.is_null(), "{}", last_error());
        assert_eq!(mg_model_dim(model), 2);
        assert_eq!(mg_model_domain_end(model), 3.0);
        let out = mg_model_to_text(model);
        assert!(!out.is_null());
        let roundtrip = CStr::from_ptr(out).to_str().unwrap().to_owned();
        assert_eq!(roundtrip, text);
        mg_string_free(out);
        mg_model_free(model);
    }
}

#[test]
fn parse_error_reports_message() {
    unsafe {
        let model = mg_model_from_text(c("not a model").as_ptr());
        assert!(model.is_null());
        assert!(last_error().contains("header"), "{}", last_error());
        let model = mg_model_from_text(std::ptr::null());
        assert!(model.is_null());
    }
}

#[test]
fn builtin_series_and_partial_sum() {
    unsafe {
        let model = mg_model_builtin(c("ex3").as_ptr());
        assert!(!model.is_null());
        let mut series: *mut MgSeries = std::ptr::null_mut();
        let status = mg_series_compute(model, 4, &mut series);
        assert_eq!(status, MgStatus::MgStatusOk, "{}", last_error());
        assert_eq!(mg_series_order(series), 4);
        assert_eq!(mg_series_dim(series), 2);

        // Partial sum at t = 0.5: corner entry 0.094921875.
        let mut buf = [0.0f64; 4];
        let status = mg_series_partial_sum(series, 4, 0.5, buf.as_mut_ptr());
        assert_eq!(status, MgStatus::MgStatusOk);
        assert!((buf[0] - 1.0).abs() < 1e-14);
        assert!((buf[1] - 0.094921875).abs() < 1e-14);

        // κ = 1 matches the plain sum.
        let mut re = [0.0f64; 4];
        let mut im = [0.0f64; 4];
        let status =
            mg_series_kappa_sum(series, 1.0, 0.0, 4, 0.5, re.as_mut_ptr(), im.as_mut_ptr());
        assert_eq!(status, MgStatus::MgStatusOk);
        assert!((re[1] - buf[1]).abs() < 1e-14);
        assert!(im.iter().all(|x| x.abs() < 1e-14));

        // Out-of-range term index is an argument error.
        let mut norm = 0.0;
        let status = mg_series_term_norm(series, 9, 0.5, &mut norm);
        assert_eq!(status, MgStatus::MgStatusInvalidArgument);

        let text = mg_series_term_text(series, 2);
        assert!(!text.is_null());
        let term = CStr::from_ptr(text).to_str().unwrap();
        assert!(term.contains("-1/4"), "{term}");
        mg_string_free(text);

        mg_series_free(series);
        mg_model_free(model);
    }
}

#[test]
fn numeric_only_model_rejected_for_terms() {
    unsafe {
        let model = mg_model_builtin(c("ex2").as_ptr());
        assert!(!model.is_null());
        let mut series: *mut MgSeries = std::ptr::null_mut();
        let status = mg_series_compute(model, 4, &mut series);
        assert_eq!(status, MgStatus::MgStatusInvalidArgument);
        assert!(last_error().contains("numeric-only"));
        let text = mg_model_to_text(model);
        assert!(text.is_null());
        mg_model_free(model);
    }
}

#[test]
fn certify_and_action_norm() {
    unsafe {
        let model = mg_model_builtin(c("ex2").as_ptr());
        let mut gamma = 0.0;
        let mut guaranteed = false;
        let status = mg_certify(model, std::f64::consts::PI, &mut gamma, &mut guaranteed);
        assert_eq!(status, MgStatus::MgStatusOk);
        assert!((gamma - std::f64::consts::PI).abs() < 1e-6);
        assert!(!guaranteed);
        let status = mg_certify(model, 3.13, &mut gamma, &mut guaranteed);
        assert_eq!(status, MgStatus::MgStatusOk);
        assert!(guaranteed);
        let mut direct = 0.0;
        let status = mg_action_norm(model, 1.0, 1e-8, &mut direct);
        assert_eq!(status, MgStatus::MgStatusOk);
        assert!((direct - 1.0).abs() < 1e-6);
        mg_model_free(model);
    }
}

#[test]
fn solve_matches_closed_form() {
    unsafe {
        let model = mg_model_builtin(c("ex2").as_ptr());
        let t = std::f64::consts::PI;
        let mut re = [0.0f64; 4];
        let mut im = [0.0f64; 4];
        let status = mg_solve(model, 1.0, 0.0, t, 1e-10, re.as_mut_ptr(), im.as_mut_ptr());
        assert_eq!(status, MgStatus::MgStatusOk);
        // Y(π) = [[-1, 0], [π, -1]]
        assert!((re[0] + 1.0).abs() < 1e-6);
        assert!(re[1].abs() < 1e-6);
        assert!((re[2] - t).abs() < 1e-6);
        assert!((re[3] + 1.0).abs() < 1e-6);
        assert!(im.iter().all(|x| x.abs() < 1e-9));

        let mut verdict = MgRealLogVerdict::MgRealLogYes;
        let status = mg_real_log_verdict(model, t, &mut verdict);
        assert_eq!(status, MgStatus::MgStatusOk);
        assert_eq!(verdict, MgRealLogVerdict::MgRealLogNo);
        mg_model_free(model);
    }
}

#[test]
fn sweep_on_triangular_model() {
    unsafe {
        let model = mg_model_builtin(c("ex3").as_ptr());
        let mut hit = MgSweepHit {
            found: false,
            alpha: 0.0,
            t_star: 0.0,
            lambda_re: 0.0,
            lambda_im: 0.0,
            winding: 0,
            defective: false,
        };
        let status = mg_sweep(model, 2.5, 16, &mut hit);
        assert_eq!(status, MgStatus::MgStatusOk, "{}", last_error());
        assert!(hit.found);
        assert!((hit.alpha - std::f64::consts::FRAC_PI_2).abs() < 0.02);
        assert!((hit.t_star - 2.0 * std::f64::consts::PI / 3.0).abs() < 5e-3);
        assert!(hit.defective);
        assert_eq!(hit.winding.abs(), 1);
        mg_model_free(model);
    }
}

/// Compile and run a small C program against the generated header and the
/// staticlib to prove the ABI end to end.
#[test]
fn c_program_links_and_runs() {
    let manifest = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    if !header_dir.join("magnus.h").exists() {
        panic!("generated header missing");
    }
    // Locate the staticlib next to the test executable's target dir.
    let mut lib_dir = std::path::PathBuf::from(std::env::current_exe().unwrap());
    lib_dir.pop(); // test binary
    lib_dir.pop(); // deps/
    let staticlib = lib_dir.join("libmagnus_ffi.a");
    if !staticlib.exists() {
        // cdylib/staticlib targets live one level up from deps.
        panic!("staticlib not found at {}", staticlib.display());
    }
    let scratch = std::env::temp_dir().join("magnus_ffi_c_smoke");
    std::fs::create_dir_all(&scratch).unwrap();
    let c_source = scratch.join("smoke.c");
    std::fs::write(
        &c_source,
        r#"
#include "magnus.h"
#include <math.h>
#include <stdio.h>

int main(void) {
    MgModel *model = mg_model_builtin("ex1");
    if (!model) return 1;
    if (mg_model_dim(model) != 2) return 2;
    double gamma = 0.0;
    bool guaranteed = false;
    if (mg_certify(model, 1.0, &gamma, &guaranteed) != MgStatusOk) return 3;
    if (fabs(gamma - 1.0) > 1e-6 || !guaranteed) return 4;
    double re[4], im[4];
    if (mg_solve(model, 1.0, 0.0, 3.141592653589793, 1e-10, re, im) != MgStatusOk) return 5;
    if (fabs(re[0] + 1.0) > 1e-6) return 6;
    mg_model_free(model);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = scratch.join("smoke");
    let compile = std::process::Command::new("cc")
        .arg(&c_source)
        .arg("-I")
        .arg(&header_dir)
        .arg(staticlib)
        .arg("-lm")
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("invoke cc");
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&exe).output().expect("run C smoke test");
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
