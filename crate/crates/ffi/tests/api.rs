use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use supersheaf_ffi::*;

const FLAGSHIP: &str = r#"{"n":1,"m":1,"even_twists":[0],"odd_twists":[-1]}"#;
const FLAGSHIP_COCYCLE: &str = r#"[{"row":1,"col":0,"terms":[{"z":-1,"zetas":[1],"coeff":"1"}]}]"#;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe {
        assert_eq!(ss_last_error(ptr::null_mut(), 0, &mut needed), SsStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(ss_last_error(buf.as_mut_ptr(), buf.len(), ptr::null_mut()), SsStatus::Ok);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn load(json: &str) -> Result<*mut SsDescriptor, SsStatus> {
    let text = CString::new(json).unwrap();
    let mut d = ptr::null_mut();
    match unsafe { ss_descriptor_from_json(text.as_ptr(), &mut d) } {
        SsStatus::Ok => Ok(d),
        s => Err(s),
    }
}

#[test]
fn bott_matches_closed_form() {
    let mut out = 0u64;
    unsafe {
        assert_eq!(ss_bott_dim(1, -2, 1, &mut out), SsStatus::Ok);
        assert_eq!(out, 1);
        assert_eq!(ss_bott_dim(2, 2, 0, &mut out), SsStatus::Ok);
        assert_eq!(out, 6);
        assert_eq!(ss_bott_dim(0, 0, 0, &mut out), SsStatus::InvalidInput);
        assert_eq!(ss_bott_dim(1, 0, 0, ptr::null_mut()), SsStatus::NullPointer);
    }
}

#[test]
fn flagship_through_handles() {
    let d = load(FLAGSHIP).unwrap();
    let (mut h0, mut h1, mut m) = (0u64, 0u64, 0usize);
    let (mut even, mut odd) = ([0u64; 2], [0u64; 2]);
    let cocycle = CString::new(FLAGSHIP_COCYCLE).unwrap();
    unsafe {
        assert_eq!(ss_descriptor_odd_dim(d, &mut m), SsStatus::Ok);
        assert_eq!(m, 1);
        assert_eq!(ss_obstruction_dims(d, 1, &mut h0, &mut h1), SsStatus::Ok);
        assert_eq!((h0, h1), (1, 1));
        assert_eq!(ss_obstruction_dims(d, 2, &mut h0, &mut h1), SsStatus::InvalidInput);
        assert_eq!(ss_split_cohomology(d, even.as_mut_ptr(), odd.as_mut_ptr()), SsStatus::Ok);
        assert_eq!((even, odd), ([1, 1], [0, 0]));
        assert_eq!(ss_twisted_cohomology(d, cocycle.as_ptr(), even.as_mut_ptr(), odd.as_mut_ptr()), SsStatus::Ok);
        assert_eq!((even, odd), ([0, 0], [0, 0]));
        ss_descriptor_free(d);
    }
}

#[test]
fn descriptor_from_arrays() {
    let even = [1i64, -3];
    let odd = [2i64];
    let mut d = ptr::null_mut();
    let (mut h0, mut h1) = (0u64, 0u64);
    let (mut e, mut o) = ([0u64; 2], [0u64; 2]);
    unsafe {
        assert_eq!(ss_descriptor_new(2, 1, even.as_ptr(), 2, odd.as_ptr(), 1, &mut d), SsStatus::Ok);
        assert_eq!(ss_obstruction_dims(d, 1, &mut h0, &mut h1), SsStatus::Ok);
        assert_eq!(h1, 0);
        assert_eq!(ss_split_cohomology(d, e.as_mut_ptr(), o.as_mut_ptr()), SsStatus::Unsupported);
        assert!(last_error().contains("n = 2"));
        ss_descriptor_free(d);

        assert_eq!(ss_descriptor_new(1, 1, ptr::null(), 0, ptr::null(), 0, &mut d), SsStatus::InvalidInput);
        assert_eq!(ss_descriptor_new(0, 1, even.as_ptr(), 1, ptr::null(), 0, &mut d), SsStatus::InvalidInput);
        assert_eq!(ss_descriptor_new(1, 1, ptr::null(), 3, ptr::null(), 0, &mut d), SsStatus::NullPointer);
    }
}

#[test]
fn errors_are_reported() {
    assert_eq!(load(r#"{"n":1,"m":1,"even_twists":[0],"odd_twists":[],"x":0}"#), Err(SsStatus::InvalidInput));
    assert!(last_error().contains("x"));
    let d = load(FLAGSHIP).unwrap();
    let bad = CString::new(r#"[{"row":0,"col":0,"terms":[{"z":-1,"zetas":[1],"coeff":"1"}]}]"#).unwrap();
    let (mut e, mut o) = ([0u64; 2], [0u64; 2]);
    unsafe {
        assert_eq!(ss_twisted_cohomology(d, bad.as_ptr(), e.as_mut_ptr(), o.as_mut_ptr()), SsStatus::InvalidInput);
        assert_eq!(ss_twisted_cohomology(d, ptr::null(), e.as_mut_ptr(), o.as_mut_ptr()), SsStatus::NullPointer);
        assert_eq!(ss_split_cohomology(ptr::null(), e.as_mut_ptr(), o.as_mut_ptr()), SsStatus::NullPointer);
        // A success clears the previous message.
        assert_eq!(ss_split_cohomology(d, e.as_mut_ptr(), o.as_mut_ptr()), SsStatus::Ok);
        assert_eq!(last_error(), "");
        ss_descriptor_free(d);
        ss_descriptor_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(ss_status_name(SsStatus::BufferTooSmall)).to_str().unwrap(), "buffer too small");
    }
}

#[test]
fn demo_report() {
    let mut needed = 0usize;
    let mut ok = -1i32;
    unsafe {
        assert_eq!(ss_demo_cp11(0, ptr::null_mut(), 0, &mut needed, &mut ok), SsStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(ss_demo_cp11(0, buf.as_mut_ptr(), buf.len(), ptr::null_mut(), &mut ok), SsStatus::Ok);
        assert_eq!(ok, 1);
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(text.contains("\"all_ok\": true"));
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()) else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libsupersheaf_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let exe = std::env::temp_dir().join(format!("supersheaf_smoke_{}", std::process::id()));
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok ok\n");
}
