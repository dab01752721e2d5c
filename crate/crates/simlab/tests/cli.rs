use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vlc_simlab::metrics::{aggregate, read_rows};

fn vlcsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlcsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn validate_prints_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = vlcsim(&["scenario", "validate"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("VAP")).count(), 16);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[room]\nbogus = 1\n").unwrap();
    let out = vlcsim(&["--config", "bad.toml", "table2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("limits.toml"), "[led]\nupper = 1.0\nlower = 1.0\n").unwrap();
    let out = vlcsim(&["--config", "limits.toml", "scenario", "validate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = vlcsim(&["--config", "missing.toml", "table2"], dir.path());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("led.toml"), "[experiment]\npositions = [[5.0, 4.0, 3.0]]\n").unwrap();
    let out = vlcsim(&["--config", "led.toml", "table2", "--realizations", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = vlcsim(
            &["table2", "--realizations", "30", "--seed", "11", "--threads", threads, "--out", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(dir.path().join(name.replace(".csv", "_summary.csv"))).unwrap(),
        )
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a, b);
    let c = vlcsim(&["table2", "--realizations", "30", "--seed", "12", "--out", "c.csv"], dir.path());
    assert!(c.status.success());
    assert_ne!(fs::read(dir.path().join("c.csv")).unwrap(), a.0);
}

#[test]
fn rows_reaggregate_to_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = vlcsim(&["converge", "--realizations", "200", "--mode", "lcm", "--out", "conv.csv"], dir.path());
    assert!(out.status.success());
    let mut rows = read_rows(fs::File::open(dir.path().join("conv.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 600);
    assert!(rows.iter().all(|r| r.mode == "LCM"));
    let stored: Vec<f64> = rows.iter().map(|r| r.rmse).collect();
    let summary = aggregate(&mut rows);
    assert_eq!(summary.len(), 3);
    for (r, s) in rows.iter().zip(&stored) {
        assert!(((r.rmse - s) / s).abs() < 1e-7);
    }
}

#[test]
fn complexity_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = vlcsim(&["complexity", "--out", "ops.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("ops.csv")).unwrap();
    assert!(text.contains("WAoA,4,4,1.00000000e1,327,327"));
    assert!(text.contains("AoA,4,4,1.00000000e1,279,279"));
    assert!(text.contains("RSS/iteration,4,4,1.00000000e1,1059,"));
}
