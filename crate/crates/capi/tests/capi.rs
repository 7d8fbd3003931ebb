//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{c_char, CString};
use std::ptr;

use mosim_capi::*;

const FREUND_JSON: &str = r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0,
    "lambda1_post": 3.0, "lambda2_post": 3.0, "grid": {"dt": 0.5, "steps": 2}}"#;

fn build(json: &str) -> *mut MosimModel {
    let cjson = CString::new(json).unwrap();
    let mut model: *mut MosimModel = ptr::null_mut();
    let status = unsafe { mosim_model_from_json(cjson.as_ptr(), &mut model) };
    assert_eq!(status, MosimStatus::Ok);
    assert!(!model.is_null());
    model
}

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let len = unsafe { mosim_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    buf.truncate(len.min(buf.len() - 1));
    String::from_utf8(buf).unwrap()
}

#[test]
fn version_is_a_nul_terminated_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(mosim_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn model_roundtrip_dim_and_survival() {
    let model = build(FREUND_JSON);
    let mut dim = 0u32;
    assert_eq!(unsafe { mosim_model_dim(model, &mut dim) }, MosimStatus::Ok);
    assert_eq!(dim, 2);

    let times = [1.0, 1.0];
    let mut p = 0.0f64;
    let status = unsafe { mosim_survival(model, times.as_ptr(), times.len(), &mut p) };
    assert_eq!(status, MosimStatus::Ok);
    assert!((p - (-2.0f64).exp()).abs() < 1e-14);

    // wrong arity is an argument error
    let status = unsafe { mosim_survival(model, times.as_ptr(), 1, &mut p) };
    assert_eq!(status, MosimStatus::InvalidArgument);
    assert!(last_error().contains("dimension"));

    unsafe { mosim_model_free(model) };
}

#[test]
fn simulate_is_deterministic_and_reports_sentinels_as_infinity() {
    let model = build(FREUND_JSON);
    let paths = 64usize;
    let mut a = vec![0.0f64; paths * 2];
    let mut b = vec![0.0f64; paths * 2];
    let status = unsafe { mosim_simulate(model, paths as u64, 7, a.as_mut_ptr(), a.len()) };
    assert_eq!(status, MosimStatus::Ok);
    let status = unsafe { mosim_simulate(model, paths as u64, 7, b.as_mut_ptr(), b.len()) };
    assert_eq!(status, MosimStatus::Ok);
    assert_eq!(a, b, "same seed must reproduce identical buffers");
    assert!(a.iter().all(|&t| t > 0.0));
    assert!(a.iter().any(|&t| t.is_infinite()), "short horizon should leave survivors");

    // short buffer is rejected before anything is written
    let mut tiny = vec![0.0f64; 3];
    let status = unsafe { mosim_simulate(model, paths as u64, 7, tiny.as_mut_ptr(), tiny.len()) };
    assert_eq!(status, MosimStatus::BufferTooSmall);

    unsafe { mosim_model_free(model) };
}

#[test]
fn invalid_inputs_produce_status_codes_and_messages() {
    let mut model: *mut MosimModel = ptr::null_mut();

    let status = unsafe { mosim_model_from_json(ptr::null(), &mut model) };
    assert_eq!(status, MosimStatus::NullPointer);

    let bad = CString::new("{ not json").unwrap();
    let status = unsafe { mosim_model_from_json(bad.as_ptr(), &mut model) };
    assert_eq!(status, MosimStatus::InvalidConfig);
    assert!(!last_error().is_empty());

    let unknown = CString::new(r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0,
        "lambda1_post": 3.0, "lambda2_post": 3.0, "oops": 1}"#).unwrap();
    let status = unsafe { mosim_model_from_json(unknown.as_ptr(), &mut model) };
    assert_eq!(status, MosimStatus::InvalidConfig);

    // double free is not exercised; freeing null is a no-op
    unsafe { mosim_model_free(ptr::null_mut()) };
}

#[test]
fn unsupported_exact_queries_report_unsupported() {
    let het = build(
        r#"{"model": "lfm_one_factor", "d": 2,
            "subordinator": {"family": "gamma", "beta": 1.0, "eta": 1.0},
            "trigger_rates": [0.5, 2.0],
            "grid": {"dt": 0.5, "steps": 4}}"#,
    );
    let times = [1.0, 1.0];
    let mut p = 0.0;
    let status = unsafe { mosim_survival(het, times.as_ptr(), 2, &mut p) };
    assert_eq!(status, MosimStatus::Unsupported);
    unsafe { mosim_model_free(het) };
}

#[test]
fn generated_header_exists_and_declares_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mosim.h");
    let text = std::fs::read_to_string(&header).expect("build.rs generates include/mosim.h");
    for symbol in [
        "MosimStatus",
        "MosimModel",
        "mosim_model_from_json",
        "mosim_model_free",
        "mosim_model_dim",
        "mosim_survival",
        "mosim_simulate",
        "mosim_last_error",
        "mosim_version",
    ] {
        assert!(text.contains(symbol), "header misses {symbol}");
    }
}
