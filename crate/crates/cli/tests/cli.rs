mod common;

use common::{photonlink, reference_path, reference_value, resized, write_scenario};
use photonlink::report::{CSV_HEADER, PATH_METRICS};
use photonlink::Report;

fn reference() -> String {
    reference_path().to_str().unwrap().to_string()
}

fn json_report(args: &[&str]) -> (Report, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = photonlink(&all);
    let report: Report = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (report, out.status.code().unwrap())
}

#[test]
fn validate_reference_exits_zero() {
    let out = photonlink(&["validate", "--scenario", &reference()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("forward:as-written"));
    assert!(!text.contains('\x1b'));
}

#[test]
fn exit_codes_follow_compliance() {
    let r = reference();
    assert_eq!(
        photonlink(&["analyze", "--scenario", &r]).status.code(),
        Some(1)
    );
    assert_eq!(
        photonlink(&["analyze", "--scenario", &r, "--variant", "dm-vbg-hip"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        photonlink(&["analyze", "--scenario", &r, "--variant", "em-vbg-hip"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        photonlink(&["tradeoff", "--scenario", &r]).status.code(),
        Some(0)
    );
}

#[test]
fn input_errors_exit_two() {
    let r = reference();
    let missing = photonlink(&["analyze", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read scenario"));

    let infeasible = photonlink(&["analyze", "--scenario", &r, "--variant", "dm-vbg-si"]);
    assert_eq!(infeasible.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&infeasible.stderr).contains("infeasible"));

    let unwritable = photonlink(&[
        "analyze",
        "--scenario",
        &r,
        "--out",
        "/nonexistent/dir/out.txt",
    ]);
    assert_eq!(unwritable.status.code(), Some(2));

    let bad_bw = photonlink(&["analyze", "--scenario", &r, "--bandwidth", "-5"]);
    assert_eq!(bad_bw.status.code(), Some(2));
}

#[test]
fn every_problem_is_reported() {
    let mut v = resized(6, true);
    v["schema_version"] = 2.into();
    v["topology"]["forward"]["fojb_edfa"] = "edfa_x".into();
    v["variants"]["definitions"]["dm-vbg-hip"]["mux"] = "wdm_awg_hip".into();
    v["analysis"]["bandwidth_hz"] = 0.0.into();
    let f = write_scenario(&v);
    let out = photonlink(&["validate", "--scenario", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for needle in [
        "schema_version 2",
        "divisible by 4 (got 6)",
        "unknown component `edfa_x`",
        "`wdm_awg_hip` is AWG but the variant needs VBG",
        "analysis:",
    ] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = reference_value();
    v["analysis"]["bandwith_hz"] = 1e6.into();
    let f = write_scenario(&v);
    let out = photonlink(&["analyze", "--scenario", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bandwith_hz"));
}

#[test]
fn invalid_topology_fails_validation() {
    let mut v = reference_value();
    v["topology"]["forward"]["channels"][1]["wavelength_nm"] = 1550.4.into();
    let f = write_scenario(&v);
    let path = f.path().to_str().unwrap();
    let (report, code) = json_report(&["validate", "--scenario", path]);
    assert_eq!(code, 2);
    assert!(report.validation.iter().any(|c| !c.valid
        && c.violations
            .iter()
            .any(|x| x.message.contains("below minimum"))));

    // Analysis refuses to run on the same topology.
    let (report, code) = json_report(&["analyze", "--scenario", path]);
    assert_eq!(code, 2);
    assert!(report.variants.is_empty());
}

#[test]
fn json_round_trips() {
    let out = photonlink(&["tradeoff", "--scenario", &reference(), "--format", "json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
    assert_eq!(report.report_schema_version, 1);
    assert_eq!(report.scenario.fingerprint_sha256.len(), 64);
    assert_eq!(report.exit_code, 0);
}

#[test]
fn csv_has_one_row_per_path_metric() {
    let out = photonlink(&["analyze", "--scenario", &reference(), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 8));
    let count = |section: &str| rows.iter().filter(|r| r[0] == section).count();
    // 6 variants x 8 channels x 16 DTRMs forward, 16 return paths
    assert_eq!(count("path"), (6 * 128 + 16) * PATH_METRICS.len());
    assert_eq!(count("compliance"), 6 * 11);
    assert_eq!(count("capacity"), 4 * 3);
    assert_eq!(count("validation"), 7 * 5);
    assert_eq!(count("recommendation"), 0);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let r = reference();
    let to_file = photonlink(&[
        "tradeoff",
        "--scenario",
        &r,
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let stdout = photonlink(&["tradeoff", "--scenario", &r, "--format", "json"]).stdout;
    assert_eq!(std::fs::read(out_path).unwrap(), stdout);
}

#[test]
fn bandwidth_override_rescales_sfdr() {
    let r = reference();
    let (narrow, _) = json_report(&[
        "analyze",
        "--scenario",
        &r,
        "--variant",
        "dm-vbg-hip",
        "--bandwidth",
        "1e6",
    ]);
    let (wide, _) = json_report(&["analyze", "--scenario", &r, "--variant", "dm-vbg-hip"]);
    assert_eq!(narrow.settings.bandwidth_hz, 1e6);
    let a = narrow.variants[0].paths[0].sfdr_db.unwrap();
    let b = wide.variants[0].paths[0].sfdr_db.unwrap();
    assert!((a - b - 20.0 / 3.0).abs() < 1e-9, "{a} vs {b}");
    // The compliance row restates both at the requirement bandwidth.
    let row = |rep: &Report| {
        rep.variants[0]
            .compliance
            .row("sfdr_min")
            .unwrap()
            .value
            .unwrap()
    };
    assert!((row(&narrow) - row(&wide)).abs() < 1e-9);
}

#[test]
fn variant_flag_overrides_scenario_selection() {
    let mut v = reference_value();
    v["variants"]["selection"] = "em-awg-hip".into();
    let f = write_scenario(&v);
    let path = f.path().to_str().unwrap();
    let (report, _) = json_report(&["analyze", "--scenario", path]);
    assert_eq!(report.variants.len(), 1);
    assert_eq!(report.variants[0].variant.to_string(), "em-awg-hip");
    let (report, _) = json_report(&["analyze", "--scenario", path, "--variant", "all"]);
    assert_eq!(report.variants.len(), 6);
    // tradeoff always ranks every defined variant
    let (report, _) = json_report(&["tradeoff", "--scenario", path]);
    assert_eq!(report.recommendation.unwrap().order.len(), 6);
}

#[test]
fn undefined_variants_are_noted() {
    let mut v = reference_value();
    v["variants"]["definitions"]
        .as_object_mut()
        .unwrap()
        .remove("em-awg-si");
    let f = write_scenario(&v);
    let (report, code) = json_report(&["tradeoff", "--scenario", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report.recommendation.unwrap().order.len(), 5);
    assert!(report.notes.iter().any(|n| n.contains("em-awg-si")));
}

#[test]
fn text_report_lists_units_and_statuses() {
    let out = photonlink(&["tradeoff", "--scenario", &reference()]);
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "MB/s",
        "dBm",
        "PASS",
        "FAIL",
        "recommended: dm-vbg-hip",
        "optical ledger a0",
    ] {
        assert!(text.contains(needle), "missing `{needle}`");
    }
}

#[test]
fn reports_are_deterministic() {
    let r = reference();
    for format in ["text", "json", "csv"] {
        let a = photonlink(&["tradeoff", "--scenario", &r, "--format", format]).stdout;
        let b = photonlink(&["tradeoff", "--scenario", &r, "--format", format]).stdout;
        assert_eq!(a, b, "{format}");
    }
}
