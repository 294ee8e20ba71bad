use std::f64::consts::{LN_2, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zsa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zsa"))
        .current_dir(dir)
        .env_remove("ZSA_CACHE_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ims(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect()
}

#[test]
fn zeta2_zeros_in_a_box() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["zeros", "--n", "2", "--family", "zeta", "--rect", "-1,1,0,30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("family,n,re,im,residual,certified\n"));
    let ims = ims(&out);
    assert_eq!(ims.len(), 3);
    for (k, y) in ims.iter().enumerate() {
        assert!((y - PI * (2 * k + 1) as f64 / LN_2).abs() < 1e-10);
    }
}

#[test]
fn g4star_zeros_follow_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["zeros", "--n", "4", "--family", "Gstar", "--rect", "-1,1,0,13"]);
    assert_eq!(o.status.code(), Some(0));
    let ims = ims(&stdout(&o));
    let want = [2.0, 4.0, 8.0].map(|k| k * PI / (3.0 * LN_2));
    assert_eq!(ims.len(), 3);
    for (a, b) in ims.iter().zip(want) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn empty_box_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["zeros", "--n", "3", "--family", "G", "--rect", "5,6,0,10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn contour_through_a_zero_is_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let top = format!("-1,1,0,{}", PI / LN_2);
    let o = zsa(dir.path(), &["zeros", "--n", "2", "--family", "zeta", "--rect", &top]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(
        dir.path(),
        &["zeros", "--n", "4", "--family", "Gstar", "--rect", "-1,1,0,10", "--format", "json", "--out", "z.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("z.json")).unwrap()).unwrap();
    assert_eq!(v["complete"], true);
    assert_eq!(v["zeros"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["zeros", "--n", "3", "--family", "H", "--rect", "0,1,0,1"],
        vec!["zeros", "--n", "3", "--family", "G", "--rect", "0,1,0"],
        vec!["zeros", "--n", "3"],
        vec!["frobnicate"],
        vec!["levels", "--n", "2", "--x0", "1"],
        vec!["verify", "--theorems", "T99"],
        vec!["verify", "--theorems", "T14", "--n", "3"],
        vec!["report", "--n", "3..40"],
        vec!["zeros", "--n", "3", "--family", "G", "--rect", "0,1,0,1", "--tol", "-1"],
    ] {
        let o = zsa(dir.path(), &args);
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [vec!["--help"], vec!["--version"], vec!["zeros", "--help"]] {
        let o = zsa(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0));
        assert!(!stdout(&o).is_empty());
    }
}

#[test]
fn closed_loops_below_level_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["levels", "--n", "3", "--x0", "-1", "--svg", "l.svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("open_with_asymptote: 0"));
    assert!(out.contains("single_open_curve: 0"));
    assert!(out.contains("clipped: 0"));
    assert!(!out.contains("closed_loop: 0"));
    assert!(out.lines().filter(|l| l.starts_with("loop ")).all(|l| l.contains("winding 1, 1 certified")));
    let svg = fs::read_to_string(dir.path().join("l.svg")).unwrap();
    assert!(svg.contains("class=\"real-axis\""));
    assert!(svg.contains("data-class=\"closed_loop\""));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("levels-n3-x0m1.json")).unwrap()).unwrap();
    assert!(json["components"].as_array().unwrap().iter().all(|c| c["class"] == "ClosedLoop"));
}

#[test]
fn asymptotes_at_level_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["levels", "--n", "3", "--x0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("asymptotes:")).unwrap();
    let unit = PI / (2.0 * LN_2);
    for y in line.trim_start_matches("asymptotes: y = ").split(", ") {
        let y: f64 = y.parse().unwrap();
        let k = (y / unit - 1.0) / 2.0;
        assert!((k - k.round()).abs() * 2.0 * unit < 0.05, "{y}");
    }
}

#[test]
fn single_curve_above_level_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["levels", "--n", "4", "--x0", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("single_open_curve: 1"));
    let hit = out.lines().find(|l| l.starts_with("real-axis hits:")).unwrap();
    let x: f64 = hit.trim_start_matches("real-axis hits: ").parse().unwrap();
    assert!(x.abs() < 1e-10);
}

#[test]
fn profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["profile", "--n", "3", "--x", "-1,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    // |1 + 2^z| ranges over [|1 − 2^x|, 1 + 2^x]
    for r in rows {
        let x = r[1];
        assert!((r[2] - (1.0 - 2f64.powf(x)).abs()).abs() < 1e-9);
        assert!((r[3] - (1.0 + 2f64.powf(x))).abs() < 1e-12);
    }
}

#[test]
fn verify_axis_theorems() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["--out-dir", "o", "verify", "--theorems", "T15,C16", "--n", "3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("4 checks: 4 pass, 0 fail"));
    let csv = fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("theorem,n,verdict,detail\n"));
}

#[test]
fn verify_global_and_budgeted_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["verify", "--theorems", "factorials,drift", "--k-max", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 pass"));
    let o = zsa(dir.path(), &["verify", "--theorems", "T2", "--n", "3..8", "--height", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("6 checks"));
}

#[test]
fn report_files_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = zsa(dir.path(), &["--out-dir", "r", "report", "--n", "2..4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = dir.path().join("r");
    for n in 2..=4 {
        assert!(r.join(format!("report-n{n}.json")).exists());
    }
    let csv = fs::read_to_string(r.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["b_hat_zeta", "b_asymptotic", "a_hat_zeta_over_n", "minus_ln2", "ritt_sum_100", "ritt_sum_1000", "comparison"] {
        assert!(header.contains(&col), "{col}");
    }
    let comparison = header.iter().position(|c| *c == "comparison").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r[comparison] == "report-only"));
    assert!(rows[0].last().unwrap().contains("degenerate"));
    let n3: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(r.join("report-n3.json")).unwrap()).unwrap();
    // zeta frame: R ≈ [−1, 0.788]
    let lo = n3["projection_interval"]["x_lo"].as_f64().unwrap();
    let hi = n3["projection_interval"]["x_hi"].as_f64().unwrap();
    assert!((lo + 1.0).abs() < 1e-6 && (hi - 0.787884911).abs() < 1e-6);
    assert_eq!(n3["verdicts"]["asympt_report"], "report_only");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| vec!["--out-dir", out, "--cache-dir", "cache", "report", "--n", "3"];
    assert_eq!(zsa(dir.path(), &args("a")).status.code(), Some(0));
    assert_eq!(zsa(dir.path(), &args("b")).status.code(), Some(0));
    for f in ["report.csv", "report-n3.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let z = ["zeros", "--n", "5", "--family", "G", "--rect", "-2,3,0,40"];
    assert_eq!(stdout(&zsa(dir.path(), &z)), stdout(&zsa(dir.path(), &z)));
}

#[test]
fn cache_env_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("envcache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_zsa"))
            .current_dir(dir.path())
            .env("ZSA_CACHE_DIR", &cache)
            .args(["zeros", "--n", "3", "--family", "G", "--rect", "-1,1,0,20"])
            .output()
            .unwrap()
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0));
    let entries: Vec<_> = fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1);
    fs::write(&entries[0], "{ truncated").unwrap();
    let second = run();
    assert_eq!(second.status.code(), Some(0));
    assert!(stderr(&second).contains("corrupt"));
    assert_eq!(stdout(&first), stdout(&second));
    let third = run();
    assert!(!stderr(&third).contains("corrupt"));
    assert_eq!(stdout(&first), stdout(&third));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("zsa.conf"), "# desk settings\nout_dir = fromconf\nthreads = 1\n").unwrap();
    let o = zsa(dir.path(), &["--config", "zsa.conf", "levels", "--n", "3", "--x0", "-1", "--no-loop-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("fromconf/levels-n3-x0m1.json").exists());
    let o = zsa(
        dir.path(),
        &["--config", "zsa.conf", "--out-dir", "fromflag", "levels", "--n", "3", "--x0", "-1", "--no-loop-check"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("fromflag/levels-n3-x0m1.json").exists());
    fs::write(dir.path().join("bad.conf"), "speed = 11\n").unwrap();
    let o = zsa(dir.path(), &["--config", "bad.conf", "profile", "--n", "3", "--x", "0"]);
    assert_eq!(o.status.code(), Some(64));
}
