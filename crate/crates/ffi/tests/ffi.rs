//! Exercises the C ABI through the exported extern functions.

use std::ffi::{c_char, c_int, CString};
use std::ptr;

use discosim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { ds_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    buf.truncate(n.min(buf.len() - 1));
    String::from_utf8_lossy(&buf).into_owned()
}

#[test]
fn scalar_functions_round_trip() {
    unsafe {
        let mut q = 0.0;
        assert_eq!(ds_normal_quantile(0.975, &mut q), DsStatus::DsOk);
        assert!((q - 1.959964).abs() < 1e-5);

        assert_eq!(ds_normal_quantile(1.5, &mut q), DsStatus::DsErrArgument);
        assert!(last_error().contains("must be in (0, 1)"));

        let mut z = 0.0;
        let mut reject: c_int = 0;
        assert_eq!(ds_wald_test(2.0, 1.0, 0.0, 0.05, &mut z, &mut reject), DsStatus::DsOk);
        assert_eq!(z, 2.0);
        assert_eq!(reject, 1);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(ds_invert_ci(1.0, 0.4, 0.05, &mut lo, &mut hi), DsStatus::DsOk);
        assert!(lo < 1.0 && hi > 1.0);
        assert_eq!(ds_invert_ci(1.0, -0.4, 0.05, &mut lo, &mut hi), DsStatus::DsErrArgument);
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(ds_normal_quantile(0.5, ptr::null_mut()), DsStatus::DsErrNullPointer);
        let mut cfg: *mut DsConfig = ptr::null_mut();
        assert_eq!(
            ds_benchmark_config(ptr::null(), 42, &mut cfg),
            DsStatus::DsErrNullPointer
        );
        let mut table: *mut DsTable = ptr::null_mut();
        assert_eq!(ds_run_curve(ptr::null(), &mut table), DsStatus::DsErrNullPointer);
        assert_eq!(ds_table_num_rows(ptr::null()), 0);
        // frees tolerate null
        ds_config_free(ptr::null_mut());
        ds_table_free(ptr::null_mut());
    }
}

#[test]
fn config_parse_reports_config_errors() {
    unsafe {
        let text = CString::new("[dgp]\nscenario = rdd\n").unwrap();
        let mut cfg: *mut DsConfig = ptr::null_mut();
        let status = ds_config_parse(text.as_ptr(), 0, 0, &mut cfg);
        assert_eq!(status, DsStatus::DsErrConfig);
        assert!(last_error().contains("support"), "{}", last_error());
    }
}

#[test]
fn full_pipeline_through_the_abi() {
    let text = CString::new(
        "[dgp]\nscenario = rdd\nsupport = -1 1\njump = 1\n\n\
         [adversary]\nk = 2 100\n\n[mc]\nn = 200\nreps = 120\n",
    )
    .unwrap();
    unsafe {
        let mut cfg: *mut DsConfig = ptr::null_mut();
        assert_eq!(ds_config_parse(text.as_ptr(), 1, 42, &mut cfg), DsStatus::DsOk);
        let mut table: *mut DsTable = ptr::null_mut();
        assert_eq!(ds_run_curve(cfg, &mut table), DsStatus::DsOk);
        assert_eq!(ds_table_num_rows(table), 3);

        let mut row = DsRow {
            is_q: 0,
            k: 0,
            reject_rate: 0.0,
            cover_rate: 0.0,
            mean_ci_len: 0.0,
            mcse_reject: 0.0,
            mcse_cover: 0.0,
            n_eff_mean: 0.0,
            failures: 0,
        };
        assert_eq!(ds_table_row(table, 0, &mut row), DsStatus::DsOk);
        assert_eq!((row.is_q, row.k), (0, 2));
        assert!((row.cover_rate - (1.0 - row.reject_rate)).abs() < 1e-12);

        assert_eq!(ds_table_row(table, 2, &mut row), DsStatus::DsOk);
        assert_eq!(row.is_q, 1);
        assert!(row.reject_rate > 0.5, "power at Q is {}", row.reject_rate);

        assert_eq!(ds_table_row(table, 9, &mut row), DsStatus::DsErrArgument);
        assert!(last_error().contains("out of range"));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(
            dir.path().join("t.csv").to_str().unwrap().to_owned(),
        )
        .unwrap();
        assert_eq!(ds_table_write_csv(table, path.as_ptr()), DsStatus::DsOk);
        let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(csv.starts_with("k,reject_rate"));

        ds_table_free(table);
        ds_config_free(cfg);
    }
}

#[test]
fn benchmark_config_builds() {
    unsafe {
        let name = CString::new("rkd").unwrap();
        let mut cfg: *mut DsConfig = ptr::null_mut();
        assert_eq!(ds_benchmark_config(name.as_ptr(), 42, &mut cfg), DsStatus::DsOk);
        ds_config_free(cfg);

        let bad = CString::new("nope").unwrap();
        assert_eq!(ds_benchmark_config(bad.as_ptr(), 42, &mut cfg), DsStatus::DsErrArgument);
    }
}
