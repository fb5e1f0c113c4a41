use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use affine_energy_ffi::*;

fn last_error() -> String {
    let p = ae_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn circle() -> *mut AeSphere {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ae_sphere_new(2, 512, AeScheme::UniformAngle, 0, &mut s) }, AeStatus::Ok);
    s
}

#[test]
fn body_round_trip() {
    let sphere = circle();
    let json = CString::new(r#"{"kind":"cube","params":{"n":2,"r":1}}"#).unwrap();
    let mut body = ptr::null_mut();
    unsafe {
        assert_eq!(ae_body_from_json(json.as_ptr(), &mut body), AeStatus::Ok);
        let (mut dim, mut vol, mut d) = (0usize, 0.0, 0.0);
        assert_eq!(ae_body_dim(body, &mut dim), AeStatus::Ok);
        assert_eq!(ae_body_volume(body, &mut vol), AeStatus::Ok);
        assert_eq!(ae_busemann_petty_deficit(body, 0.5, 2.0, sphere, &mut d), AeStatus::Ok);
        assert_eq!(dim, 2);
        assert!((vol - 4.0).abs() < 1e-12);
        assert!((d - (std::f64::consts::PI / 3.0 - 1.0)).abs() < 1e-3);
        ae_body_free(body);
        ae_sphere_free(sphere);
    }
}

#[test]
fn energy_of_gaussian() {
    let sphere = circle();
    let json = CString::new(r#"{"name":"gaussian","grid":{"n":2,"extent":5,"h":0.0625}}"#).unwrap();
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(ae_function_from_json(json.as_ptr(), &mut f), AeStatus::Ok);
        let mut e = 0.0;
        assert_eq!(ae_affine_energy(f, 0.5, 2.0, sphere, &mut e), AeStatus::Ok);
        // ||grad exp(-|x|^2)||_2 = sqrt(pi)
        assert!((e / std::f64::consts::PI.sqrt() - 1.0).abs() < 0.01, "{e}");
        let mut gap = AeEnergyGap::default();
        assert_eq!(ae_polya_szego_gap(f, 0.5, 2.0, sphere, &mut gap), AeStatus::Ok);
        assert!((gap.energy - e).abs() < 1e-12);
        assert!(gap.gap.abs() < 0.02 * e);
        ae_function_free(f);
        ae_sphere_free(sphere);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut out = 0.0;
    let status = unsafe { ae_sharp_constant(AeSharpKind::Sobolev, 2, 0.5, 0.0, &mut out) };
    assert_eq!(status, AeStatus::Domain);
    assert!(last_error().contains("(1, n)"));

    let bad = CString::new(r#"{"kind":"cube","params":{"n":2,"side":1}}"#).unwrap();
    let mut body = ptr::null_mut();
    assert_eq!(unsafe { ae_body_from_json(bad.as_ptr(), &mut body) }, AeStatus::Parse);
    assert!(body.is_null());

    assert_eq!(unsafe { ae_body_volume(ptr::null(), &mut out) }, AeStatus::NullPointer);
    assert_eq!(unsafe { ae_body_from_json(ptr::null(), &mut body) }, AeStatus::NullPointer);

    assert_eq!(unsafe { ae_sharp_constant(AeSharpKind::Morrey, 2, 3.0, 0.0, &mut out) }, AeStatus::Ok);
    assert!(ae_last_error().is_null());
}

#[test]
fn scenario_reports_json() {
    let text = CString::new(
        r#"{"seed": 5, "jobs": [{"id": "petty_square", "kind": "petty_projection",
            "body": {"kind": "cube", "params": {"n": 2}}}]}"#,
    )
    .unwrap();
    let (mut json, mut pass) = (ptr::null_mut(), 0);
    unsafe {
        assert_eq!(ae_run_scenario(text.as_ptr(), 1.0, &mut json, &mut pass), AeStatus::Ok);
        let s = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ae_string_free(json);
        assert_eq!(pass, 1);
        assert!(s.contains("\"petty_square\"") && s.contains("\"seed\": 5"), "{s}");
    }

    let failing = CString::new(
        r#"{"jobs": [{"id": "bad_p", "kind": "affine_sobolev_p",
            "function": {"name": "gaussian", "grid": {"n": 2, "extent": 5, "h": 0.25}},
            "params": {"p": 0.5}}]}"#,
    )
    .unwrap();
    let status = unsafe { ae_run_scenario(failing.as_ptr(), 1.0, &mut json, &mut pass) };
    assert_eq!(status, AeStatus::Domain);
    assert!(last_error().contains("bad_p"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/affine_energy.h")
}

#[test]
fn header_declares_the_abi() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "ae_last_error",
        "ae_sphere_new",
        "ae_body_from_json",
        "ae_petty_product",
        "ae_busemann_petty_deficit",
        "ae_affine_energy",
        "ae_polya_szego_gap",
        "ae_sharp_constant",
        "ae_run_scenario",
        "ae_string_free",
        "typedef struct AeBody AeBody;",
        "AE_STATUS_DOMAIN = 5",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Links the C smoke program against the shared library cargo builds next to
/// the test binary.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libaffine_energy_ffi.so");
    if !cfg!(target_os = "linux") || !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("c_program_links_and_runs: no cc or shared library, C link not exercised");
        return;
    }
    let out = std::env::temp_dir().join(format!("ae_smoke_{}", std::process::id()));
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(profile_dir)
        .arg("-laffine_energy_ffi")
        .arg("-lm")
        .arg(format!("-Wl,-rpath,{}", profile_dir.display()))
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
