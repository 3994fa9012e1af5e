use std::ffi::{c_char, CStr};
use std::ptr;

use heavytail_ffi::*;

fn last_error() -> String {
    let p = ht_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn samplers_are_reproducible_and_validate() {
    let mut a = vec![0.0; 64];
    let mut b = vec![0.0; 64];
    unsafe {
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 0.0, 9, 2, 64, a.as_mut_ptr()),
            HtStatus::Ok
        );
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 0.0, 9, 2, 64, b.as_mut_ptr()),
            HtStatus::Ok
        );
        assert_eq!(a, b);
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 0.0, 9, 3, 64, b.as_mut_ptr()),
            HtStatus::Ok
        );
        assert_ne!(a, b);
        assert_eq!(
            ht_sample_stable(2.5, 0.0, 1.0, 0.0, 9, 2, 64, a.as_mut_ptr()),
            HtStatus::Parameter
        );
        assert!(last_error().contains("stab"), "{}", last_error());
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 0.0, 9, 2, 64, ptr::null_mut()),
            HtStatus::NullPointer
        );
        // Zero draws is rejected by the library, not treated as a null-pointer case.
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 0.0, 9, 2, 0, ptr::null_mut()),
            HtStatus::Parameter
        );

        let mut x = vec![0.0; 100];
        assert_eq!(
            ht_sample_pareto_like(2.0, 3.0, false, 1, 0, 100, x.as_mut_ptr()),
            HtStatus::Ok
        );
        assert!(x.iter().all(|&v| v >= 3.0));

        let mut k = vec![0u64; 100];
        assert_eq!(
            ht_sample_power_law_cutoff(1.5, 50, 1, 0, 100, k.as_mut_ptr()),
            HtStatus::Ok
        );
        assert!(k.iter().all(|&v| (1..=50).contains(&v)));
        assert_eq!(ht_sample_abelian(10, 0.5, 1, 0, 100, k.as_mut_ptr()), HtStatus::Ok);
        assert!(k.iter().all(|&v| (1..=10).contains(&v)));
    }
}

#[test]
fn abelian_values() {
    let mut total = 0.0;
    for b in 1..=20 {
        let mut v = 0.0;
        assert_eq!(unsafe { ht_abelian_pmf(20, 0.4, b, &mut v) }, HtStatus::Ok);
        total += v;
    }
    assert!((total - 1.0).abs() < 1e-12);
    let mut m = HtAbelianMoments::default();
    assert_eq!(unsafe { ht_abelian_moments(20, 0.4, &mut m) }, HtStatus::Ok);
    assert!((m.mean_limit - 1.0 / 0.6).abs() < 1e-12);
    assert!(m.mean > 1.0 && m.mean < m.mean_limit);
    assert!((m.variance - (m.second_moment - m.mean * m.mean)).abs() < 1e-9);
}

#[test]
fn estimator_pipeline() {
    let n = 500;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut tn = vec![0.0; n];
    unsafe {
        assert_eq!(
            ht_sample_pareto_like(2.0, 3.0, true, 4, 0, n, x.as_mut_ptr()),
            HtStatus::Ok
        );
        assert_eq!(
            ht_sample_stable(1.5, 0.0, 1.0, 1.0, 4, 1, n, y.as_mut_ptr()),
            HtStatus::Ok
        );
        assert_eq!(
            ht_compute_tn(x.as_ptr(), y.as_ptr(), n, 8.0, 1.5, tn.as_mut_ptr()),
            HtStatus::Ok
        );
        let direct = heavytail::pstable::compute_tn(&x, &y, 8.0, 1.5).unwrap();
        assert_eq!(tn, direct.values);

        let mut ecdf = ptr::null_mut();
        assert_eq!(ht_ecdf_log_from_tn(tn.as_ptr(), n, 0, &mut ecdf), HtStatus::Ok);
        let (mut lo, mut hi, mut g) = (0.0, 0.0, 0.0);
        assert_eq!(ht_ecdf_quantile(ecdf, 0.05, &mut lo), HtStatus::Ok);
        assert_eq!(ht_ecdf_quantile(ecdf, 0.95, &mut hi), HtStatus::Ok);
        assert_eq!(ht_ecdf_eval(ecdf, hi, &mut g), HtStatus::Ok);
        assert!(g >= 0.95);
        assert_eq!(ht_ecdf_quantile(ecdf, 1.5, &mut lo), HtStatus::Domain);
        let mut len = 0usize;
        assert_eq!(ht_ecdf_len(ecdf, &mut len), HtStatus::Ok);
        assert!(len > 1 && len <= n);
        ht_ecdf_free(ecdf);
        ht_ecdf_free(ptr::null_mut());

        let mut direct_ci = HtInterval::default();
        assert_eq!(
            ht_ci_mean(x.as_ptr(), y.as_ptr(), n, lo, hi, 1.5, 0.05, 0.95, &mut direct_ci),
            HtStatus::Ok
        );
        let mut full = HtInterval::default();
        assert_eq!(
            ht_pstable_ci(x.as_ptr(), y.as_ptr(), n, 8.0, 1.5, 0, 1, 0, 0.05, 0.95, &mut full),
            HtStatus::Ok
        );
        assert_eq!(direct_ci, full);
        assert_eq!(
            ht_ci_mean(x.as_ptr(), y.as_ptr(), n, hi, lo, 1.5, 0.05, 0.95, &mut full),
            HtStatus::Input
        );

        let mut clt = HtInterval::default();
        assert_eq!(ht_clt_ci(x.as_ptr(), n, 0.05, 0.95, &mut clt), HtStatus::Ok);
        assert!(clt.lower < clt.upper);
        assert_eq!(ht_clt_ci(x.as_ptr(), 1, 0.05, 0.95, &mut clt), HtStatus::Input);
    }
}

#[test]
fn alpha_interval_marks_undefined_bounds() {
    let mean = HtInterval {
        lower: -2.0,
        upper: 4.0,
        lower_defined: true,
        upper_defined: true,
        level_lo: 0.05,
        level_hi: 0.95,
    };
    let mut alpha = HtInterval::default();
    assert_eq!(unsafe { ht_ci_alpha(&mean, &mut alpha) }, HtStatus::Ok);
    assert!(!alpha.lower_defined && alpha.lower.is_nan());
    assert!(alpha.upper_defined && (alpha.upper - 0.75).abs() < 1e-15);
}

#[test]
fn instability_is_reported() {
    let x = [1.0, 2.0];
    let y = [1.0, -1.0];
    let mut ci = HtInterval::default();
    let status = unsafe { ht_ci_mean(x.as_ptr(), y.as_ptr(), 2, -1.0, 1.0, 1.5, 0.05, 0.95, &mut ci) };
    assert_eq!(status, HtStatus::Instability);
    assert_eq!(ci, HtInterval::default());
}

#[test]
fn stirling_handle() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(ht_stirling_new(30, &mut t), HtStatus::Ok);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(ht_stirling_get(t, 3, 1, &mut s), HtStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "11");
        ht_string_free(s);
        assert_eq!(ht_stirling_get(t, 31, 1, &mut s), HtStatus::Domain);

        let (mut cases, mut passed) = (0u64, false);
        for (check, bound) in [
            (HtStirlingCheck::Oracle, 10),
            (HtStirlingCheck::Structure, 0),
            (HtStirlingCheck::RisingIdentity, 6),
            (HtStirlingCheck::PDecomposition, 20),
            (HtStirlingCheck::ProductBound, 50),
            (HtStirlingCheck::Degree4, 28),
        ] {
            assert_eq!(
                ht_stirling_check(t, check, bound, &mut cases, &mut passed),
                HtStatus::Ok
            );
            assert!(passed && cases > 0, "{check:?}");
        }
        assert_eq!(
            ht_stirling_check(t, HtStirlingCheck::Degree4, 29, &mut cases, &mut passed),
            HtStatus::Domain
        );
        ht_stirling_free(t);

        assert_eq!(ht_stirling_new(HT_STIRLING_MAX_ROWS + 1, &mut t), HtStatus::Capacity);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut v = 0.0;
    assert_eq!(unsafe { ht_abelian_pmf(5, 0.5, 9, &mut v) }, HtStatus::Domain);
    let here = last_error();
    let other = std::thread::spawn(|| ht_last_error().is_null()).join().unwrap();
    assert!(other);
    assert_eq!(here, last_error());
    let version = unsafe { CStr::from_ptr(ht_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
