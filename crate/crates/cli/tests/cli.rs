//! End-to-end tests of the `twc` binary: golden outputs, determinism,
//! CSV round trips and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use twc_core::io::{read_region_csv, read_scalar_csv};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn twc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twc"))
        .args(args)
        .env_remove("TWC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Runs with `--out`/`--svg` into a fresh directory and returns (csv, svg, report).
fn run_to_files(args: &[&str]) -> (String, Option<String>, String) {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let mut all: Vec<&str> = args.to_vec();
    let (c, s) = (csv.to_str().unwrap(), svg.to_str().unwrap());
    all.extend(["--out", c, "--svg", s]);
    let o = twc(&all);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    let svg_text = std::fs::read_to_string(&svg).ok();
    (std::fs::read_to_string(&csv).unwrap(), svg_text, stdout(&o))
}

#[test]
fn fig3_matches_golden() {
    let (csv, svg, _) = run_to_files(&["poisson", "fig3"]);
    assert_eq!(csv, golden("fig3.csv"));
    assert_eq!(svg.unwrap(), golden("fig3.svg"));
}

#[test]
fn bounds_matches_golden() {
    let mod2 = fixture("mod2.twc");
    let (csv, svg, _) = run_to_files(&["bounds", mod2.to_str().unwrap(), "--weights", "9"]);
    assert_eq!(csv, golden("bounds_mod2.csv"));
    assert_eq!(svg.unwrap(), golden("bounds_mod2.svg"));
}

#[test]
fn scalar_outputs_match_golden() {
    let table2 = fixture("table2.twc");
    let (csv, _, _) = run_to_files(&["isd-check", table2.to_str().unwrap(), "--samples", "2000"]);
    assert_eq!(csv, golden("isd_table2.csv"));
    let mod2 = fixture("mod2.isd");
    let (csv, _, _) = run_to_files(&["rectangle", mod2.to_str().unwrap()]);
    assert_eq!(csv, golden("rectangle_mod2.csv"));
    let (csv, _, _) = run_to_files(&["closedform", "cauchy"]);
    assert_eq!(csv, golden("cauchy.csv"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let multiplier = fixture("multiplier.twc");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "bounds",
            multiplier.to_str().unwrap(),
            "--weights",
            "5",
            "--seed",
            "17",
        ],
        vec!["poisson", "region", "--lambda0", "4", "--grid", "11"],
    ];
    for args in cases {
        let first = run_to_files(&args);
        let second = run_to_files(&args);
        assert_eq!(first, second, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_twc"))
            .args(["poisson", "fig3", "--grid", "15"])
            .env("TWC_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = run("zero");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn every_csv_reparses() {
    let mod2 = fixture("mod2.twc");
    let isd = fixture("mod2.isd");
    let region_cases: Vec<Vec<&str>> = vec![
        vec!["poisson", "fig3", "--grid", "9"],
        vec!["poisson", "region", "--grid", "9"],
        vec!["bounds", mod2.to_str().unwrap(), "--weights", "5"],
        vec!["rectangle", isd.to_str().unwrap()],
    ];
    for args in region_cases {
        let o = twc(&args);
        assert!(o.status.success(), "{args:?}");
        let rows = read_region_csv(&stdout(&o)).unwrap();
        assert!(!rows.is_empty());
    }
    let scalar_cases: Vec<Vec<&str>> = vec![
        vec!["poisson", "owc"],
        vec!["poisson", "gap"],
        vec!["closedform", "exp"],
        vec!["closedform", "cauchy"],
        vec!["closedform", "idg", "--support", "0,1,3"],
        vec!["isd-check", mod2.to_str().unwrap(), "--samples", "200"],
    ];
    for args in scalar_cases {
        let o = twc(&args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let rows = read_scalar_csv(&stdout(&o)).unwrap();
        assert!(!rows.is_empty());
    }
}

#[test]
fn fig3_groups_follow_the_dark_currents() {
    let o = twc(&["poisson", "fig3"]);
    let rows = read_region_csv(&stdout(&o)).unwrap();
    let mut groups: Vec<String> = rows.iter().map(|r| r.group.clone()).collect();
    groups.dedup();
    assert_eq!(groups, ["lambda0=2", "lambda0=4", "lambda0=8"]);
    let o = twc(&["poisson", "fig3", "--lambda0", "1,3"]);
    let rows = read_region_csv(&stdout(&o)).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.group == "lambda0=1" || r.group == "lambda0=3"));
}

#[test]
fn bounds_report_flags_the_multiplier() {
    let o = twc(&[
        "bounds",
        fixture("multiplier.twc").to_str().unwrap(),
        "--weights",
        "9",
    ]);
    assert!(o.status.success());
    assert!(
        stderr(&o).contains("inner and outer bounds differ"),
        "{}",
        stderr(&o)
    );
    let o = twc(&[
        "bounds",
        fixture("mod2.twc").to_str().unwrap(),
        "--weights",
        "9",
    ]);
    assert!(stderr(&o).contains("inner and outer bounds coincide"));
}

#[test]
fn isd_check_on_table2() {
    let o = twc(&["isd-check", fixture("table2.twc").to_str().unwrap()]);
    assert!(o.status.success());
    let rows = read_scalar_csv(&stdout(&o)).unwrap();
    let get = |k: &str| rows.iter().find(|(n, _)| n == k).unwrap().1;
    assert_eq!(get("c1_holds"), 1.0);
    assert_eq!(get("c2_counterexample"), 0.0);
    assert_eq!(get("c2_samples"), 10_000.0);
    assert!(stderr(&o).contains("C2: no counterexample"));
}

#[test]
fn isd_check_reports_the_injectivity_witness() {
    let o = twc(&[
        "isd-check",
        fixture("multiplier.twc").to_str().unwrap(),
        "--structure",
        fixture("multiplier.isd").to_str().unwrap(),
        "--samples",
        "500",
    ]);
    assert!(o.status.success());
    assert!(
        stderr(&o).contains("f1 is not injective at fixed input 0"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn bits_only_change_the_report() {
    let nats = twc(&["poisson", "owc"]);
    let bits = twc(&["poisson", "owc", "--bits"]);
    assert_eq!(nats.stdout, bits.stdout);
    assert!(stderr(&bits).contains("bits/s"));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.twc");
    let text = std::fs::read_to_string(fixture("mod2.twc"))
        .unwrap()
        .replacen("0.1 0.9", "0.3 0.9", 1);
    std::fs::write(&bad, text).unwrap();
    let o = twc(&["bounds", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let cases: Vec<Vec<&str>> = vec![
        vec!["bounds", "/nonexistent/channel.twc"],
        vec!["rectangle", "/nonexistent/structure.isd"],
        vec!["poisson", "gap", "--delta", "0.4"],
        vec!["poisson", "owc", "--sigma1", "1.5"],
        vec!["poisson", "gap", "--lambda0", "2,4"],
        vec!["closedform", "cauchy", "--a1", "0.5"],
        vec!["closedform", "idg", "--sigma-hat-sq", "1"],
        vec!["no-such-command"],
    ];
    for args in cases {
        assert_eq!(twc(&args).status.code(), Some(2), "{args:?}");
    }
    let multiplier = fixture("multiplier.isd");
    let o = twc(&["rectangle", multiplier.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not injective"));
    let o = twc(&[
        "bounds",
        fixture("mod2.twc").to_str().unwrap(),
        "--cost1",
        "1,2",
        "--budget1",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_three() {
    let o = twc(&["closedform", "exp", "--a1", "1e300"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("numeric failure"));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = twc(&[
        "poisson",
        "gap",
        "--delta",
        "0.4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
