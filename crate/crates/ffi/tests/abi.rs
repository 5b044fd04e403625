use std::ffi::{c_char, CStr, CString};
use std::ptr;

use semidec_ffi::*;

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    sd_string_free(p);
    s
}

unsafe fn last_error() -> String {
    let p = sd_last_error_message();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_str().unwrap().to_owned()
}

#[test]
fn poly_roundtrip() {
    unsafe {
        let text = CString::new("x0^2 - 2*x1^2").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(sd_poly_parse(text.as_ptr(), 2, &mut p), SdStatus::Ok);
        let mut deg = 0;
        assert_eq!(sd_poly_degree(p, &mut deg), SdStatus::Ok);
        assert_eq!(deg, 2);
        let mut s = ptr::null_mut();
        assert_eq!(sd_poly_to_string(p, &mut s), SdStatus::Ok);
        assert_eq!(take_string(s), "x0^2 - 2*x1^2");
        sd_poly_free(p);
    }
}

#[test]
fn parse_errors_set_message() {
    unsafe {
        let text = CString::new("x0 + x1^2").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(
            sd_poly_parse(text.as_ptr(), 2, &mut p),
            SdStatus::InputError
        );
        assert!(p.is_null());
        assert!(last_error().contains("homogeneous"));
        let bad = CString::new("x0 +").unwrap();
        assert_eq!(sd_poly_parse(bad.as_ptr(), 2, &mut p), SdStatus::InputError);
        assert!(last_error().contains("position"));
    }
}

#[test]
fn null_arguments() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sd_poly_parse(ptr::null(), 2, &mut p), SdStatus::NullPointer);
        let text = CString::new("x0").unwrap();
        assert_eq!(
            sd_poly_parse(text.as_ptr(), 2, ptr::null_mut()),
            SdStatus::NullPointer
        );
        let mut d = 0;
        assert_eq!(sd_poly_degree(ptr::null(), &mut d), SdStatus::NullPointer);
        sd_poly_free(ptr::null_mut());
        sd_string_free(ptr::null_mut());
    }
}

#[test]
fn delta_over_projective_line() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(sd_family_new(2, &mut fam), SdStatus::Ok);
        for m in ["x0", "x1", "x0 + x1"] {
            let c = CString::new(m).unwrap();
            assert_eq!(sd_family_push(fam, c.as_ptr()), SdStatus::Ok);
        }
        let mut len = 0;
        sd_family_len(fam, &mut len);
        assert_eq!(len, 3);
        let mut rep = ptr::null_mut();
        assert_eq!(
            sd_delta_compute(fam, ptr::null(), true, &mut rep),
            SdStatus::Ok
        );
        let mut s = ptr::null_mut();
        assert_eq!(sd_delta_report_delta(rep, &mut s), SdStatus::Ok);
        assert_eq!(take_string(s), "1/1");
        assert_eq!(sd_delta_report_json(rep, &mut s), SdStatus::Ok);
        assert!(take_string(s).contains("\"witness\""));
        sd_delta_report_free(rep);
        sd_family_free(fam);
    }
}

#[test]
fn delta_on_conic() {
    unsafe {
        let conic = CString::new("x0*x2 - x1^2").unwrap();
        let forms = [conic.as_ptr()];
        let mut v = ptr::null_mut();
        assert_eq!(sd_variety_new(3, forms.as_ptr(), 1, &mut v), SdStatus::Ok);
        let mut dim = -2;
        sd_variety_dim(v, &mut dim);
        assert_eq!(dim, 1);
        let mut fam = ptr::null_mut();
        sd_family_new(3, &mut fam);
        for m in ["x0", "x2"] {
            let c = CString::new(m).unwrap();
            sd_family_push(fam, c.as_ptr());
        }
        let mut rep = ptr::null_mut();
        assert_eq!(sd_delta_compute(fam, v, false, &mut rep), SdStatus::Ok);
        let mut s = ptr::null_mut();
        sd_delta_report_delta(rep, &mut s);
        assert_eq!(take_string(s), "1/1");
        sd_delta_report_free(rep);
        sd_family_free(fam);
        sd_variety_free(v);
    }
}

#[test]
fn empty_family_is_rejected() {
    unsafe {
        let mut fam = ptr::null_mut();
        sd_family_new(2, &mut fam);
        let mut rep = ptr::null_mut();
        assert_eq!(
            sd_delta_compute(fam, ptr::null(), true, &mut rep),
            SdStatus::InputError
        );
        sd_family_free(fam);
    }
}

#[test]
fn s_height_of_point() {
    unsafe {
        let pt = CString::new("(6,4)").unwrap();
        let primes = [2u64];
        let mut s = ptr::null_mut();
        assert_eq!(
            sd_s_height(pt.as_ptr(), primes.as_ptr(), 1, &mut s),
            SdStatus::Ok
        );
        assert_eq!(take_string(s), "3/1");
        let bad = [4u64];
        assert_eq!(
            sd_s_height(pt.as_ptr(), bad.as_ptr(), 1, &mut s),
            SdStatus::InputError
        );
    }
}

#[test]
fn run_spec_and_budget() {
    unsafe {
        let verb = CString::new("delta").unwrap();
        let spec = CString::new(r#"{"family":["x0","x0"],"num_vars":2}"#).unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(
            sd_run_spec(verb.as_ptr(), spec.as_ptr(), 0, &mut s),
            SdStatus::Ok
        );
        let json = take_string(s);
        assert!(json.contains("\"delta\": \"2/1\""));

        let verb = CString::new("search").unwrap();
        let spec = CString::new(
            r#"{"num_vars":3,"form":"x0^3 + x1^3 + x2^3","lambda":"0","bounds":["500"]}"#,
        )
        .unwrap();
        assert_eq!(
            sd_run_spec(verb.as_ptr(), spec.as_ptr(), 100, &mut s),
            SdStatus::BudgetExceeded
        );
        assert!(last_error().contains("budget"));
    }
}

#[test]
fn header_is_current() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/semidec.h")).unwrap();
    for f in [
        "sd_poly_parse",
        "sd_family_push",
        "sd_variety_dim",
        "sd_delta_compute",
        "sd_delta_report_json",
        "sd_s_height",
        "sd_run_spec",
        "sd_last_error_message",
        "SD_STATUS_BUDGET_EXCEEDED",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        return;
    };
    if !cc.status.success() {
        return;
    }
    let dir = tempdir();
    let src = dir.join("check.c");
    std::fs::write(
        &src,
        "#include \"semidec.h\"\nint main(void) { SdPoly *p = 0; return sd_poly_parse(\"x0\", 1, &p) == SD_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("semidec-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
