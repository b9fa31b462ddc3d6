use std::ffi::CString;
use std::path::Path;
use std::process::Command;
use std::ptr;

use ebitsim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as libc::c_char; 256];
    let n = unsafe { ebit_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let end = n.min(buf.len() - 1);
    buf[..end].iter().map(|&c| c as u8 as char).collect()
}

fn params() -> *mut EbitLinkParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ebit_link_params_new(&mut p) }, EbitStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn link_budget_calls() {
    let mut eta = 0.0;
    unsafe {
        assert_eq!(ebit_eta_fs(500e3, 0.1, 0.75, 810e-9, &mut eta), EbitStatus::Ok);
        assert!((eta - 0.48976).abs() < 1e-4);
        assert_eq!(ebit_eta_atm(500.0, 500.0, 0.47, &mut eta), EbitStatus::Ok);
        assert_eq!(eta, 0.47);
        assert_eq!(ebit_eta_fs(-1.0, 0.1, 0.75, 810e-9, &mut eta), EbitStatus::InvalidInput);
        assert_eq!(ebit_eta_fs(1.0, 0.1, 0.75, 810e-9, ptr::null_mut()), EbitStatus::NullPointer);
    }
    assert!(last_error().contains("null"));
}

#[test]
fn params_round_trip_and_validation() {
    let p = params();
    let mut v = 0.0;
    unsafe {
        assert_eq!(ebit_link_params_set(p, EbitLinkField::SatApertureM, 0.35), EbitStatus::Ok);
        assert_eq!(ebit_link_params_get(p, EbitLinkField::SatApertureM, &mut v), EbitStatus::Ok);
        assert_eq!(v, 0.35);
        assert_eq!(ebit_link_params_set(p, EbitLinkField::EtaZenith, 2.0), EbitStatus::InvalidInput);
        assert!(last_error().contains("eta_zenith"));
        // rejected update leaves the set unchanged
        assert_eq!(ebit_link_params_get(p, EbitLinkField::EtaZenith, &mut v), EbitStatus::Ok);
        assert_eq!(v, 0.47);
        assert_eq!(ebit_link_params_set(p, EbitLinkField::OptimalWaist, 1.0), EbitStatus::Ok);
        assert_eq!(ebit_link_params_get(p, EbitLinkField::OptimalWaist, &mut v), EbitStatus::Ok);
        assert_eq!(v, 1.0);
        ebit_link_params_free(p);
        ebit_link_params_free(ptr::null_mut());
    }
}

#[test]
fn chain_calls() {
    let p = params();
    let (mut k, mut rate) = (0usize, 0.0);
    unsafe {
        assert_eq!(ebit_min_relay_count(p, 10_000.0, 500.0, &mut k), EbitStatus::Ok);
        assert_eq!(k, 5);
        assert_eq!(ebit_chain_rate(p, 10_000.0, 500.0, &mut rate), EbitStatus::Ok);
        assert!(rate > 0.0);
        assert_eq!(ebit_min_relay_count(p, 10_000.0, 50.0, &mut k), EbitStatus::InvalidInput);
        ebit_link_params_free(p);
    }
}

#[test]
fn sweep_through_handles() {
    let p = params();
    let mut c = ptr::null_mut();
    let mut s = ptr::null_mut();
    let mut summary = EbitSummary::default();
    let (mut t, mut r) = (0.0, 0.0);
    unsafe {
        assert_eq!(ebit_constellation_new_walker(0, 5, 500.0, 0.0, 0, &mut c), EbitStatus::InvalidInput);
        assert_eq!(ebit_constellation_new_walker(5, 5, 500.0, 0.0, 0, &mut c), EbitStatus::Ok);
        assert_eq!(ebit_constellation_rotate_raan(c, -1.5), EbitStatus::Ok);
        assert_eq!(
            ebit_time_sweep(c, p, 34.05, -118.24, 37.77, -122.42, 7200.0, 10.0, &mut s),
            EbitStatus::Ok
        );
        assert_eq!(ebit_series_summary(s, &mut summary), EbitStatus::Ok);
        assert_eq!(summary.samples, 720);
        assert!(summary.max_rate_hz >= summary.mean_visible_hz && summary.mean_visible_hz >= summary.mean_all_hz);
        assert_eq!(ebit_series_sample(s, 3, &mut t, &mut r), EbitStatus::Ok);
        assert_eq!(t, 30.0);
        assert_eq!(ebit_series_sample(s, 720, &mut t, &mut r), EbitStatus::OutOfRange);
        assert_eq!(
            ebit_time_sweep(c, p, 95.0, 0.0, 0.0, 0.0, 7200.0, 10.0, &mut s),
            EbitStatus::InvalidInput
        );
        ebit_series_free(s);
        ebit_constellation_free(c);
        ebit_link_params_free(p);
    }
}

#[test]
fn scenario_json_runs_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let good = CString::new(r#"{"kind":"fig3","fig3":{"max_ground_km":100}}"#).unwrap();
    let bad = CString::new(r#"{"kind":"fig3","fig3":{"nope":1}}"#).unwrap();
    unsafe {
        assert_eq!(ebit_run_scenario_json(good.as_ptr(), out.as_ptr()), EbitStatus::Ok);
        assert_eq!(ebit_run_scenario_json(bad.as_ptr(), out.as_ptr()), EbitStatus::InvalidScenario);
        assert!(last_error().contains("fig3.nope"));
        assert_eq!(ebit_run_scenario_json(ptr::null(), out.as_ptr()), EbitStatus::NullPointer);
    }
    assert!(dir.path().join("fig3.csv").exists());
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ebitsim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ebit_time_sweep", "ebit_last_error_message", "EBIT_STATUS_OK", "typedef struct EbitSeries EbitSeries"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"ebitsim.h\"\nint main(void) { EbitSummary s = {0}; return (int)s.samples; }\n").unwrap();
    match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(status) => assert!(status.success(), "header failed to compile"),
        Err(_) => eprintln!("no C compiler found; skipped syntax check"),
    }
}
