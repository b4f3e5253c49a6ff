use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn relayopt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relayopt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn vcg_demo_prints_the_worked_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "a.cfg", "experiment = vcg-demo\n");
    let out = relayopt(&["vcg-demo", "--config", &cfg, "--out", "res", "--verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("res/vcg-demo.csv")).unwrap();
    assert_eq!(
        text,
        "relay,value,winner,transfer,utility\n\
         0,22,true,-12,10\n1,18,true,-12,6\n2,15,true,-12,3\n3,12,false,0,0\n4,8,false,0,0\n"
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("welfare 19") && stdout.contains("verified 1 rows"), "{stdout}");
}

#[test]
fn exaggeration_lowers_welfare() {
    let dir = TempDir::new().unwrap();
    let out = relayopt(&["exaggeration", "--out", "."], dir.path());
    assert!(out.status.success());
    let table = rows(&dir.path().join("exaggeration.csv"));
    let lying: Vec<_> = table.iter().filter(|r| r[0] == "exaggerated").collect();
    let transfers: Vec<&str> = lying.iter().map(|r| r[4].as_str()).collect();
    let utilities: Vec<&str> = lying.iter().map(|r| r[5].as_str()).collect();
    assert_eq!(transfers, ["-15", "-15", "0", "-15", "0"]);
    assert_eq!(utilities, ["7", "3", "0", "-3", "0"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("welfare 7"));
}

#[test]
fn payoff_curve_thresholds_read_from_data() {
    let dir = TempDir::new().unwrap();
    let out = relayopt(&["payoff-curve", "--out", ".", "--verify"], dir.path());
    assert!(out.status.success());
    let table = rows(&dir.path().join("payoff-curve.csv"));
    // Smallest report at which the payoff of `relay` leaves its value at zero report.
    let threshold = |relay: &str| -> f64 {
        let curve: Vec<(f64, f64)> = table
            .iter()
            .filter(|r| r[0] == relay)
            .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap()))
            .collect();
        curve.iter().find(|p| p.1 != curve[0].1).unwrap().0
    };
    // A winner keeps winning above the highest loser; a loser starts
    // winning, at a loss, above the lowest winner.
    assert_eq!(threshold("0"), 0.4567);
    assert_eq!(threshold("2"), 0.8421);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.cfg", "experiment = convergence\nseeds = 0..3\nbeta_grid = 11\n");
    let a = Command::new(env!("CARGO_BIN_EXE_relayopt"))
        .args(["run", "--config", &cfg, "--out", "a"])
        .current_dir(dir.path())
        .env("RELAYOPT_THREADS", "1")
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_relayopt"))
        .args(["run", "--config", &cfg, "--out", "b"])
        .current_dir(dir.path())
        .env("RELAYOPT_THREADS", "3")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("convergence.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn power_sweep_joint_dominates_columnwise() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "p.cfg",
        "experiment = power-sweep\nseeds = 0..3\np_max_db = 6, 10\nbeta_grid = 11\n",
    );
    let out = relayopt(&["power-sweep", "--config", &cfg, "--out", ".", "--verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("power-sweep.csv"));
    assert_eq!(table.len(), 4);
    for pair in table.chunks(2) {
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("joint", "relay-only"));
        let joint: f64 = pair[0][2].parse().unwrap();
        let fixed: f64 = pair[1][2].parse().unwrap();
        assert!(joint >= fixed - 1e-6, "{pair:?}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "b.cfg", "experiment = baselines\nseeds = 0..5\np_max_db = 10\nbeta_grid = 11\n");
    let out = relayopt(&["run", "--config", &cfg, "--seed", "7", "--out", "."], dir.path());
    assert!(out.status.success());
    let table = rows(&dir.path().join("baselines.csv"));
    assert!(!table.is_empty() && table.iter().all(|r| r[0] == "7"));
}

#[test]
fn bad_configs_fail_with_a_message() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "experiment = vcg-demo\nk = 3\nk = 2\n");
    let out = relayopt(&["run", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("duplicate key `k`") && err.contains("line 3"), "{err}");

    let cfg = write(dir.path(), "other.cfg", "experiment = convergence\n");
    let out = relayopt(&["vcg-demo", "--config", &cfg], dir.path());
    assert!(!out.status.success());

    let out = relayopt(&["run"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn solve_reads_the_text_format() {
    let dir = TempDir::new().unwrap();
    // minimize x1 + x2 subject to x >= 1 componentwise.
    let lp = write(dir.path(), "lp.txt", "conic 2 0 2\ncones l2\n1 1\n-1 0\n0 -1\n-1 -1\n");
    let out = relayopt(&["solve", &lp], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("status Optimal"), "{stdout}");
    let obj: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("objective "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((obj - 2.0).abs() < 1e-7);

    let bad = write(dir.path(), "bad.txt", "conic 2 0 2\ncones l2\n1 1\n");
    assert!(!relayopt(&["solve", &bad], dir.path()).status.success());
}
