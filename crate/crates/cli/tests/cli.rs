use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectrum-game"))
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn fig4_is_byte_identical_across_runs() {
    let cfg = configs().join("fig4.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run(&["figure", "fig4", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let x = std::fs::read(a.path().join("fig4.csv")).unwrap();
    let y = std::fs::read(b.path().join("fig4.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn fig4_header_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig4.toml");
    let out = run(&["figure", "fig4", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--svg"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: fig4 v1"));
    assert!(lines.next().unwrap().starts_with("# config_hash: "));
    assert_eq!(lines.next(), Some("# oracle: PASS"));
    assert_eq!(lines.next(), Some("# quad_mode: feedback"));
    assert_eq!(lines.next(), Some("T,eta,x1_0,gain"));
    assert_eq!(csv_rows(&text).len(), 4 * 3 * 2);
    assert!(dir.path().join("fig4.svg").exists());
}

#[test]
fn fig5_bids_cross_at_half() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig56.toml");
    let out = run(&["figure", "fig5", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    let rows = csv_rows(&text);
    let half: Vec<_> = rows.iter().filter(|r| r[0] == "0.5").collect();
    assert_eq!(half.len(), 2);
    for r in half {
        assert_eq!(r[2], r[3]);
    }
}

#[test]
fn tables_go_to_stdout_without_out() {
    for cmd in ["revenues", "auction", "phase"] {
        let out = run(&[cmd, "--grid", "64"]);
        assert!(out.status.success(), "{cmd}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with(&format!("# schema: {cmd} v1\n")), "{cmd}");
    }
}

#[test]
fn sweep_over_t() {
    let cfg = configs().join("fig4.toml");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--axes", "T"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("T,r1_a,r2_b,gain,"));
    let gains: Vec<f64> = csv_rows(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(gains.len(), 4);
    assert!(gains.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "T_values = []\n").unwrap();
    let out = run(&["figure", "fig3", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T_values"));

    assert_eq!(run(&["verify", "--grid", "3"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--quad-mode", "bogus"]).status.code(), Some(1));
    assert_eq!(run(&["figure", "fig9"]).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge.toml");
    std::fs::write(
        &path,
        "x1_0 = 0.0\nvalidity = \"error\"\n[params]\nu0 = 10.0\neta = 0.99\nrho = 0.5\ns_lo = 5.0\ns_hi = 10.0\n",
    )
    .unwrap();
    let out = run(&["phase", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_failure_exits_3_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["figure", "fig3", "--quad-mode", "printed", "--out", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("fig3_T0.5.csv").exists());

    let out = run(&["figure", "fig3", "--quad-mode", "printed", "--allow-unverified", "--out", d]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("fig3_T0.5.csv")).unwrap();
    assert!(text.contains("# oracle: FAIL\n"));
    assert!(text.contains("# quad_mode: printed\n"));
}

#[test]
fn verify_reports_pass() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("oracle: PASS\n"));
}
