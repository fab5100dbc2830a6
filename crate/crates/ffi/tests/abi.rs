use std::ffi::{c_char, CStr, CString};
use std::ptr;

use bulkflux_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        bf_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn load(spec: &str, sets: &[&str]) -> (BfStatus, *mut BfScenario) {
    let spec = CString::new(spec).unwrap();
    let owned: Vec<CString> = sets.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = owned.iter().map(|s| s.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { bf_scenario_load(spec.as_ptr(), ptrs.as_ptr(), ptrs.len(), &mut out) };
    (st, out)
}

#[test]
fn simulate_round_trip() {
    let (st, sc) = load("builtin:flat_linear", &["mesh.resolution=8", "solver.t_end=0.1"]);
    assert_eq!(st, BfStatus::Ok, "{}", last_error());
    let (mut cells, mut species) = (0usize, 0usize);
    assert_eq!(unsafe { bf_scenario_shape(sc, &mut cells, &mut species) }, BfStatus::Ok);
    assert_eq!((cells, species), (128, 2));

    let mut tr = ptr::null_mut();
    assert_eq!(unsafe { bf_simulate(sc, &mut tr) }, BfStatus::Ok);
    let mut len = 0usize;
    assert_eq!(unsafe { bf_trajectory_len(tr, &mut len) }, BfStatus::Ok);
    assert!(len >= 2);

    let mut t = -1.0;
    let mut buf = vec![0.0; cells * species];
    assert_eq!(unsafe { bf_trajectory_snapshot(tr, len - 1, &mut t, buf.as_mut_ptr(), buf.len()) }, BfStatus::Ok);
    assert!((t - 0.1).abs() < 1e-12);
    assert!(buf.iter().all(|v| *v >= 0.0 && v.is_finite()));

    let mut short = vec![0.0; 3];
    assert_eq!(
        unsafe { bf_trajectory_snapshot(tr, 0, &mut t, short.as_mut_ptr(), short.len()) },
        BfStatus::BufferTooSmall
    );
    assert_eq!(unsafe { bf_trajectory_snapshot(tr, len, &mut t, buf.as_mut_ptr(), buf.len()) }, BfStatus::OutOfRange);

    let (mut drift, mut defect) = (1.0, 1.0);
    assert_eq!(unsafe { bf_trajectory_diagnostics(tr, &mut drift, &mut defect) }, BfStatus::Ok);
    assert!(drift <= 1e-10);
    assert!(defect <= 1e-12);

    unsafe {
        bf_trajectory_free(tr);
        bf_scenario_free(sc);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let (st, sc) = load("/no/such/file.json", &[]);
    assert_eq!(st, BfStatus::Config);
    assert!(sc.is_null());
    assert!(last_error().contains("cannot read scenario"));

    let (st, _) = load("builtin:flat_linear", &["solver.nonsense=3"]);
    assert_eq!(st, BfStatus::Config);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bf_scenario_load(ptr::null(), ptr::null(), 0, &mut out) }, BfStatus::NullArgument);
    assert_eq!(unsafe { bf_simulate(ptr::null(), &mut ptr::null_mut()) }, BfStatus::NullArgument);
    let bad = [0xffu8 as c_char, 0];
    assert_eq!(unsafe { bf_scenario_load(bad.as_ptr(), ptr::null(), 0, &mut out) }, BfStatus::InvalidUtf8);

    // freeing null is a no-op
    unsafe {
        bf_scenario_free(ptr::null_mut());
        bf_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn aborted_runs_report_abort() {
    let (st, sc) = load(
        "builtin:flat_linear",
        &["solver.dt_min=0.001", "solver.max_relative_change=1e-9", "solver.t_end=0.1"],
    );
    assert_eq!(st, BfStatus::Ok);
    let mut tr = ptr::null_mut();
    assert_eq!(unsafe { bf_simulate(sc, &mut tr) }, BfStatus::Abort);
    assert!(tr.is_null());
    assert!(last_error().contains("dt_min"));
    unsafe { bf_scenario_free(sc) };
}

#[test]
fn truncation_suite_passes_and_unknown_suite_is_config() {
    let name = CString::new("truncations").unwrap();
    assert_eq!(unsafe { bf_verify(name.as_ptr(), 3) }, BfStatus::Ok, "{}", last_error());
    let name = CString::new("astrology").unwrap();
    assert_eq!(unsafe { bf_verify(name.as_ptr(), 3) }, BfStatus::Config);
}

#[test]
fn version_and_error_buffer_truncation() {
    let v = unsafe { CStr::from_ptr(bf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let _ = load("/no/such/file.json", &[]);
    let mut tiny = [1 as c_char; 4];
    let full = unsafe { bf_last_error(tiny.as_mut_ptr(), tiny.len()) };
    assert!(full > 3);
    assert_eq!(tiny[3], 0);
    assert_eq!(unsafe { bf_last_error(ptr::null_mut(), 0) }, full);
}

#[test]
fn header_declares_every_entry_point_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bulkflux.h")).unwrap();
    for f in [
        "bf_version",
        "bf_last_error",
        "bf_scenario_load",
        "bf_scenario_free",
        "bf_scenario_shape",
        "bf_simulate",
        "bf_trajectory_free",
        "bf_trajectory_len",
        "bf_trajectory_snapshot",
        "bf_trajectory_diagnostics",
        "bf_verify",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    // syntax check with the system C compiler when one is installed
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"bulkflux.h\"\nint main(void){ BfStatus s = BF_STATUS_OK; return (int)s; }\n").unwrap();
    match std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipped the syntax check"),
    }
}
