use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use oblivion_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = obv_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn run(id: &str) -> *mut ObvResult {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { obv_run_builtin(c(id).as_ptr(), 1000, 42, &mut out) },
        ObvStatus::Ok
    );
    assert!(!out.is_null());
    out
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { obv_string_free(p) };
    s
}

#[test]
fn three_boxes_weak_values() {
    let r = run("three_boxes");
    for (name, expected) in [("P1", 1.0), ("P2", 1.0), ("P3", -1.0)] {
        let (mut re, mut im) = (f64::NAN, f64::NAN);
        let status = unsafe { obv_result_weak_value(r, c(name).as_ptr(), &mut re, &mut im) };
        assert_eq!(status, ObvStatus::Ok);
        assert!((re - expected).abs() < 1e-10 && im.abs() < 1e-10, "{name}");
    }
    unsafe { obv_result_free(r) };
}

#[test]
fn oblivion_ranks_and_probabilities() {
    let r = run("oblivion");
    let ranks: Vec<usize> = ["t0", "t1", "t2"]
        .iter()
        .map(|e| {
            let mut rank = 0;
            assert_eq!(
                unsafe { obv_result_schmidt_rank(r, c(e).as_ptr(), &mut rank) },
                ObvStatus::Ok
            );
            rank
        })
        .collect();
    assert_eq!(ranks, [1, 2, 1]);
    let mut p = 0.0;
    let name = c("no_click_t2.cumulative");
    assert_eq!(
        unsafe { obv_result_probability(r, name.as_ptr(), &mut p) },
        ObvStatus::Ok
    );
    assert!((p - 0.5).abs() < 1e-12);
    assert_eq!(
        unsafe { obv_result_schmidt_rank(r, c("t7").as_ptr(), &mut 0) },
        ObvStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { obv_result_schmidt_rank(r, c("final").as_ptr(), &mut 0) },
        ObvStatus::NotFound
    );
    unsafe { obv_result_free(r) };
}

#[test]
fn trial_stats_and_emit_match_the_library() {
    let r = run("four_mirror");
    let mut trials = 0.0;
    assert_eq!(
        unsafe { obv_result_trial_stat(r, c("trials").as_ptr(), &mut trials) },
        ObvStatus::Ok
    );
    assert_eq!(trials, 1000.0);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { obv_result_emit(r, ObvFormat::Csv, 42, &mut out) },
        ObvStatus::Ok
    );
    let text = take_string(out);
    assert!(
        text.starts_with("# scenario=four_mirror seed=42 trials=1000\n"),
        "{text}"
    );
    let direct = oblivion::scenarios::run_four_mirror(1000, 42).unwrap();
    let info = oblivion::report::RunInfo {
        seed: 42,
        trials: Some(1000),
        color: false,
    };
    assert_eq!(
        text,
        oblivion::report::emit(&direct, oblivion::report::Format::Csv, &info)
    );
    unsafe { obv_result_free(r) };
}

#[test]
fn source_runs_and_renders() {
    let src = c(oblivion::dsl::builtin_source("hardy").unwrap());
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { obv_run_source(src.as_ptr(), c("hardy").as_ptr(), &mut r) },
        ObvStatus::Ok
    );
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(
        unsafe { obv_result_weak_value(r, c("NO_NO").as_ptr(), &mut re, &mut im) },
        ObvStatus::Ok
    );
    assert!((re + 1.0).abs() < 1e-10);
    unsafe { obv_result_free(r) };

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { obv_render_source(src.as_ptr(), &mut out) },
        ObvStatus::Ok
    );
    let rendered = take_string(out);
    let spec = oblivion::dsl::parse(src.to_str().unwrap()).unwrap();
    assert_eq!(rendered, oblivion::dsl::render(&spec));
}

#[test]
fn errors_set_status_and_message() {
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { obv_run_builtin(c("nope").as_ptr(), 1, 1, &mut r) },
        ObvStatus::UnknownScenario
    );
    assert!(r.is_null());
    assert!(last_error().contains("nope"));

    assert_eq!(
        unsafe { obv_run_builtin(ptr::null(), 1, 1, &mut r) },
        ObvStatus::NullPointer
    );
    assert_eq!(
        unsafe { obv_run_builtin(c("hardy").as_ptr(), 1, 1, ptr::null_mut()) },
        ObvStatus::NullPointer
    );
    assert_eq!(
        unsafe { obv_run_builtin(c("four_mirror").as_ptr(), 0, 1, &mut r) },
        ObvStatus::InvalidArgument
    );

    let bad = c("FACTORS\nbox 1 2\n");
    assert_eq!(
        unsafe { obv_run_source(bad.as_ptr(), c("x").as_ptr(), &mut r) },
        ObvStatus::ParseError
    );
    assert!(last_error().starts_with("2:5: syntax error"), "{}", last_error());

    let orthogonal = c("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nPOSTSELECT\n2 : 1\n");
    assert_eq!(
        unsafe { obv_run_source(orthogonal.as_ptr(), c("x").as_ptr(), &mut r) },
        ObvStatus::EvalError
    );

    let invalid = [0xffu8, 0];
    let status = unsafe { obv_run_builtin(invalid.as_ptr().cast(), 1, 1, &mut r) };
    assert_eq!(status, ObvStatus::InvalidUtf8);

    let h = run("three_boxes");
    assert_eq!(
        unsafe { obv_result_probability(h, c("P9").as_ptr(), &mut 0.0) },
        ObvStatus::NotFound
    );
    assert_eq!(
        unsafe { obv_result_probability(ptr::null(), c("P1").as_ptr(), &mut 0.0) },
        ObvStatus::NullPointer
    );
    unsafe { obv_result_free(h) };
    unsafe { obv_result_free(ptr::null_mut()) };
    unsafe { obv_string_free(ptr::null_mut()) };
}

#[test]
fn scenario_listing() {
    assert_eq!(obv_scenario_count(), oblivion::scenarios::SCENARIO_IDS.len());
    for (i, id) in oblivion::scenarios::SCENARIO_IDS.iter().enumerate() {
        assert_eq!(
            unsafe { CStr::from_ptr(obv_scenario_id(i)) }.to_str().unwrap(),
            *id
        );
    }
    assert!(obv_scenario_id(obv_scenario_count()).is_null());
    assert_eq!(
        unsafe { CStr::from_ptr(obv_version()) }.to_str().unwrap(),
        env!("CARGO_PKG_VERSION")
    );
}

#[test]
fn header_declares_every_export() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/oblivion.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert_eq!(exports.len(), 14);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Compiles the C example against the generated header and the shared
/// library, then runs it.
#[test]
fn c_program_links_against_the_library() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from <target>/<profile>/deps
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_owned();
    assert!(lib_dir.join("liboblivion_ffi.so").exists() || lib_dir.join("liboblivion_ffi.dylib").exists());
    let exe = lib_dir.join("obv_smoke");
    let compiled = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(dir.join("examples/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-loblivion_ffi", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .status();
    let Ok(status) = compiled else {
        eprintln!("no C compiler found; skipping the C link check");
        return;
    };
    assert!(status.success());
    let out = Command::new(&exe)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .env("DYLD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "P1 1.000000 0.000000\nP2 1.000000 0.000000\nP3 -1.000000 0.000000\nmissing 6\n"
    );
}
