use std::ffi::{CStr, CString};
use std::ptr;

use korobov_star_ffi::*;

fn context(n: u64, dim: usize) -> *mut KrbContext {
    let mut ctx = ptr::null_mut();
    assert_eq!(unsafe { krb_context_new(n, dim, 0, &mut ctx) }, KrbStatus::Ok);
    ctx
}

fn last_error() -> String {
    let p = krb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn primality_and_errors() {
    let mut out = false;
    unsafe {
        assert_eq!(krb_is_prime(97, &mut out), KrbStatus::Ok);
        assert!(out);
        assert!(krb_last_error_message().is_null());
        assert_eq!(krb_is_prime(1, &mut out), KrbStatus::InvalidArgument);
        assert!(last_error().contains("invalid argument"));
        assert_eq!(krb_is_prime(7, ptr::null_mut()), KrbStatus::NullPointer);
    }
}

#[test]
fn context_and_vector() {
    let ctx = context(7, 3);
    let mut v = [0u64; 3];
    unsafe {
        assert_eq!(krb_korobov_vector(ctx, 3, v.as_mut_ptr(), 3), KrbStatus::Ok);
        assert_eq!(v, [1, 3, 2]);
        assert_eq!(krb_korobov_vector(ctx, 3, v.as_mut_ptr(), 2), KrbStatus::InvalidArgument);
        assert_eq!(krb_korobov_vector(ctx, 9, v.as_mut_ptr(), 3), KrbStatus::InvalidArgument);
        let mut bad = ptr::null_mut();
        assert_eq!(krb_context_new(8, 2, 0, &mut bad), KrbStatus::InvalidArgument);
        assert!(bad.is_null());
        krb_context_free(ctx);
        krb_context_free(ptr::null_mut());
    }
}

#[test]
fn pointsets_and_discrepancy() {
    let ctx = context(5, 2);
    unsafe {
        let mut ps = ptr::null_mut();
        assert_eq!(krb_pointset_generate(ctx, 2, &mut ps), KrbStatus::Ok);
        let (mut len, mut dim, mut grid) = (0usize, 0usize, false);
        krb_pointset_len(ps, &mut len);
        krb_pointset_dim(ps, &mut dim);
        krb_pointset_is_grid(ps, &mut grid);
        assert_eq!((len, dim, grid), (5, 2, true));
        let mut coords = vec![0.0; 10];
        assert_eq!(krb_pointset_copy_coords(ps, coords.as_mut_ptr(), 10), KrbStatus::Ok);
        assert_eq!(&coords[2..4], &[0.2, 0.4]);
        let mut exact = 0.0;
        assert_eq!(krb_star_disc_exact(ps, &mut exact), KrbStatus::Ok);
        let (mut gm, mut ub) = (0.0, 0.0);
        assert_eq!(krb_star_disc_grid(ps, ctx, &mut gm, &mut ub), KrbStatus::Ok);
        assert!(gm <= exact + 1e-12 && exact <= ub + 1e-12);
        krb_pointset_free(ps);

        let mut sampled = ptr::null_mut();
        assert_eq!(krb_pointset_sample(ctx, KrbCase::RandomContinuous, 4, 0, &mut sampled), KrbStatus::Ok);
        krb_pointset_len(sampled, &mut len);
        krb_pointset_is_grid(sampled, &mut grid);
        assert_eq!((len, grid), (20, false));
        krb_pointset_free(sampled);
        krb_context_free(ctx);
    }
}

#[test]
fn bound_charsum_and_coefficients() {
    let ctx = context(31, 2);
    unsafe {
        let mut b = KrbBound::default();
        assert_eq!(krb_theorem_bound(ctx, KrbCase::FixedDiscrete, 0.5, &mut b), KrbStatus::Ok);
        assert!((b.final_bound - 0.4797).abs() < 5e-5);
        assert_eq!(krb_theorem_bound(ctx, KrbCase::FixedDiscrete, 0.0, &mut b), KrbStatus::InvalidArgument);
        krb_context_free(ctx);

        let ctx = context(7, 2);
        let k = [4i64, 1];
        let mut v = 0u8;
        assert_eq!(krb_char_sum(ctx, 3, k.as_ptr(), 2, &mut v), KrbStatus::Ok);
        assert_eq!(v, 1);
        let mut hits = 0u64;
        assert_eq!(krb_count_generator_hits(ctx, k.as_ptr(), 2, &mut hits), KrbStatus::Ok);
        assert_eq!(hits, 1);
        let zero = [0i64, 7];
        assert_eq!(krb_count_generator_hits(ctx, zero.as_ptr(), 2, &mut hits), KrbStatus::InvalidArgument);
        krb_context_free(ctx);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(krb_cont_coeff([1i64].as_ptr(), [0.5].as_ptr(), 1, &mut re, &mut im), KrbStatus::Ok);
        assert!((re.hypot(im) - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(krb_disc_coeff(5, [0u64].as_ptr(), [3u32].as_ptr(), 1, &mut re, &mut im), KrbStatus::Ok);
        assert!((re - 0.6).abs() < 1e-15 && im.abs() < 1e-15);
    }
}

#[test]
fn campaign_json_round_trip() {
    let config = CString::new(
        r#"{"spec":{"case":"fixed-discrete","failure_prob":0.5,"n_prime":7,"dim":2},"num_trials":5,"master_seed":1}"#,
    )
    .unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(krb_run_campaign_json(config.as_ptr(), &mut out), KrbStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        krb_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["num_trials"], 5);

        let bad = CString::new("{not json").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(krb_run_campaign_json(bad.as_ptr(), &mut out), KrbStatus::Parse);
        assert!(out.is_null());
        assert_eq!(krb_run_campaign_json(ptr::null(), &mut out), KrbStatus::NullPointer);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/korobov_star.h")).unwrap();
    for name in [
        "krb_last_error_message",
        "krb_is_prime",
        "krb_context_new",
        "krb_context_free",
        "krb_korobov_vector",
        "krb_pointset_generate",
        "krb_pointset_sample",
        "krb_pointset_copy_coords",
        "krb_pointset_free",
        "krb_star_disc_grid",
        "krb_star_disc_exact",
        "krb_theorem_bound",
        "krb_char_sum",
        "krb_count_generator_hits",
        "krb_cont_coeff",
        "krb_disc_coeff",
        "krb_run_campaign_json",
        "krb_string_free",
        "typedef struct KrbContext KrbContext;",
        "KRB_STATUS_CAPACITY = 2",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
