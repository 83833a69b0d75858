use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use fdastap_ffi::*;

const SMALL: &str = r#"{
    "system": {"n_tx": 3, "n_rx": 2, "pulses": 8},
    "scene": {"clutter": [{"patches": 19}]},
    "grid": {"azimuth_step_deg": 30, "doppler_step_hz": 200}
}"#;

fn small() -> *mut FdaScenario {
    let json = CString::new(SMALL).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fda_scenario_from_json(json.as_ptr(), &mut s) }, FdaStatus::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = fda_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pattern_and_spectrum() {
    let s = small();
    let (mut na, mut nd) = (0, 0);
    unsafe {
        assert_eq!(fda_grid_shape(s, &mut na, &mut nd), FdaStatus::Ok);
        assert_eq!((na, nd), (7, 9));
        let mut buf = vec![0.0; na * nd];
        assert_eq!(fda_adapted_pattern_db(s, buf.as_mut_ptr(), buf.len()), FdaStatus::Ok);
        // target cell (45 deg, 400 Hz) is not on this grid; values are finite
        assert!(buf.iter().all(|x| x.is_finite()));
        assert_eq!(fda_interference_spectrum_db(s, buf.as_mut_ptr(), buf.len()), FdaStatus::Ok);
        assert!(buf.iter().all(|x| x.is_finite()));
        fda_scenario_free(s);
    }
}

#[test]
fn mvdr_weights_are_distortionless() {
    let s = small();
    unsafe {
        let mut dim = 0;
        assert_eq!(fda_snapshot_dim(s, &mut dim), FdaStatus::Ok);
        assert_eq!(dim, 48);
        let mut w = vec![0.0; 2 * dim];
        assert_eq!(fda_mvdr_weights(s, w.as_mut_ptr(), w.len()), FdaStatus::Ok);
        assert!(w.iter().any(|x| *x != 0.0));

        assert_eq!(fda_scenario_set_mode(s, FdaMode::PhasedArray), FdaStatus::Ok);
        assert_eq!(fda_snapshot_dim(s, &mut dim), FdaStatus::Ok);
        assert_eq!(dim, 16);
        fda_scenario_free(s);
    }
}

#[test]
fn sinr_loss_without_interference_is_zero() {
    let json = CString::new(r#"{"system": {"n_tx": 3, "n_rx": 2, "pulses": 8}, "scene": {"clutter": [], "jammers": []}}"#).unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(fda_scenario_from_json(json.as_ptr(), &mut s), FdaStatus::Ok);
        let f = [-300.0, 0.0, 250.0];
        let mut out = [1.0; 3];
        assert_eq!(fda_sinr_loss_db(s, 90.0, f.as_ptr(), 3, out.as_mut_ptr()), FdaStatus::Ok);
        assert!(out.iter().all(|x| x.abs() < 1e-9), "{out:?}");
        fda_scenario_free(s);
    }
}

#[test]
fn error_reporting() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(fda_scenario_from_json(ptr::null(), &mut s), FdaStatus::NullPointer);
        assert!(last_error().contains("json"));

        let bad = CString::new(r#"{"system": {"n_tx": 0}}"#).unwrap();
        assert_eq!(fda_scenario_from_json(bad.as_ptr(), &mut s), FdaStatus::Invalid);
        assert!(last_error().contains("system.n_tx"));
        assert!(s.is_null());

        let bad = CString::new("{ not json").unwrap();
        assert_eq!(fda_scenario_from_json(bad.as_ptr(), &mut s), FdaStatus::Invalid);
        assert!(last_error().contains("line 1"));

        let s = small();
        let mut buf = vec![0.0; 5];
        assert_eq!(fda_adapted_pattern_db(s, buf.as_mut_ptr(), buf.len()), FdaStatus::BufferSize);
        assert!(last_error().contains("need 63"));
        assert_eq!(fda_scenario_set_pulses(s, 0), FdaStatus::Invalid);
        let mut dim = 0;
        assert_eq!(fda_snapshot_dim(s, &mut dim), FdaStatus::Ok);
        assert_eq!(dim, 48, "failed update leaves the scenario unchanged");
        assert_eq!(fda_snapshot_dim(ptr::null(), &mut dim), FdaStatus::NullPointer);
        fda_scenario_free(s);
        fda_scenario_free(ptr::null_mut());
    }
}

#[test]
fn default_scenario_and_version() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(fda_scenario_new(&mut s), FdaStatus::Ok);
        let mut dim = 0;
        assert_eq!(fda_snapshot_dim(s, &mut dim), FdaStatus::Ok);
        assert_eq!(dim, 4500);
        fda_scenario_free(s);
        assert_eq!(CStr::from_ptr(fda_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fdastap.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["fda_scenario_new", "fda_adapted_pattern_db", "fda_last_error", "FDA_STATUS_OK", "typedef struct FdaScenario FdaScenario"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).output() else {
        eprintln!("cc not found, skipping compile check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
