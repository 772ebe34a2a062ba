use std::process::Command;

fn lpp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lpp")).args(args).output().unwrap()
}

fn data_lines(out: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(out)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn shape_grid_has_one_row_per_direction() {
    let out = lpp(&["shape", "--p", "0.25", "--grid", "s=0..2:40 t=0..2:40"]);
    assert!(out.status.success());
    let lines = data_lines(&out.stdout);
    assert_eq!(lines.len(), 1601);
    assert!(lines.iter().any(|l| l.contains("flat_edge")));
    let header = String::from_utf8_lossy(&out.stdout);
    assert!(header.starts_with(&format!("# lpp {}\n# config: {{", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn rate_curve_is_convex() {
    let out = lpp(&["rate", "--p", "0.5", "--s", "2", "--t", "1", "--xi", "0..3:60"]);
    assert!(out.status.success());
    let lines = data_lines(&out.stdout);
    assert_eq!(lines[0], "xi,jstar,ustar,flat,error");
    let j: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(j.len(), 60);
    for w in j.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(lpp(&["shape", "--p", "2"]).status.code(), Some(2));
    assert_eq!(lpp(&["tail", "--p", "0.25"]).status.code(), Some(2));
    assert_eq!(lpp(&["left-tail", "--p", "0.5", "--r", "1.2"]).status.code(), Some(2));
    assert_eq!(lpp(&["--version"]).status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["mgf-sim", "--p", "0.25", "--u", "0.5", "--n", "60", "--reps", "400", "--xi", "0.2", "--seed", "5"];
    let one = lpp(&[&args[..], &["--threads", "1"]].concat());
    let four = lpp(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success());
    // the echoed config differs only in the thread count
    assert_eq!(data_lines(&one.stdout), data_lines(&four.stdout));
}

#[test]
fn tail_censoring_is_explicit() {
    let out = lpp(&["tail", "--p", "0.25", "--n", "40", "--reps", "200", "--r", "1.2", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["censored"], true);
    assert_eq!(row["hits"], 0);
    assert_eq!(row["rate"], "inf");
}

#[test]
fn verify_all_exit_status_matches_its_report() {
    let out = lpp(&["verify-all", "--quick", "--seed", "3", "--p", "0.25", "--u", "0.5"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11 + 3);
    let all_passed = rows.iter().all(|r| r["passed"] == true);
    assert_eq!(out.status.code(), Some(if all_passed { 0 } else { 1 }));
    let log = String::from_utf8_lossy(&out.stderr);
    assert_eq!(log.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 14);
}
