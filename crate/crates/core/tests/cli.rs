//! Golden runs of the `prosinfo` binary.

use std::fs;
use std::process::{Command, Output};

fn prosinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosinfo"))
        .env_remove("PROSINFO_SEED")
        .args(args)
        .output()
        .expect("run prosinfo")
}

fn stdout(args: &[&str]) -> String {
    let out = prosinfo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8")
}

fn value(csv: &str, key: &str) -> f64 {
    csv.lines()
        .find_map(|l| {
            let mut parts = l.split(',');
            (parts.next() == Some(key)).then(|| parts.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no row {key} in\n{csv}"))
}

#[test]
fn complete_exponential_information() {
    let out = stdout(&[
        "fisher", "--family", "exponential", "--params", "sigma=1", "--active", "sigma", "--set-size", "6",
        "--subsets", "2", "--mode", "complete",
    ]);
    assert!((value(&out, "I[sigma:sigma]") - 6.041).abs() < 1e-3, "{out}");
    assert!((value(&out, "RE1") - 3.0205).abs() < 1e-3, "{out}");
}

#[test]
fn uniform_shannon_entropy() {
    let out = stdout(&["entropy", "--measure", "shannon", "--family", "uniform", "--set-size", "2", "--subsets", "2"]);
    assert!((value(&out, "shannon") + 0.38629).abs() < 1e-5, "{out}");
}

#[test]
fn sample_has_one_row_per_measured_unit() {
    let args = [
        "sample", "--family", "normal", "--params", "mu=0,sigma=1", "--set-size", "6", "--subsets", "2", "--cycles",
        "2", "--seed", "7",
    ];
    let out = stdout(&args);
    assert_eq!(out.lines().count(), 5, "{out}");
    assert_eq!(out, stdout(&args));
}

#[test]
fn table3_centre_cell_is_one() {
    let out = stdout(&["table", "3", "--row", "normal n=2 RE1", "--col", "p=0.50"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "row_label,col_label,estimate,mc_stderr,method");
    assert_eq!(lines[1], "normal n=2 RE1,p=0.50,1.000000,0.000000,quadrature");
}

#[test]
fn table2_markdown_layout() {
    let out = stdout(&["--format", "md", "table", "2", "--row", "exponential"]);
    assert!(out.starts_with("| |c1|c2|d0|d1|d2|"), "{out}");
    assert!(out.contains("0.4041"), "{out}");
}

#[test]
fn output_file_and_config_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("run.cfg");
    let dest = dir.path().join("out.csv");
    fs::write(&cfg, "# exponential complete run\nfamily=exponential\nactive=sigma\nmode=complete\n").unwrap();
    let out = prosinfo(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        dest.to_str().unwrap(),
        "fisher",
        "--set-size",
        "6",
        "--subsets",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = fs::read_to_string(&dest).unwrap();
    assert!((value(&written, "RE1") - 3.0205).abs() < 1e-3, "{written}");
}

#[test]
fn seed_environment_variable() {
    let base = ["sample", "--family", "normal", "--set-size", "4", "--subsets", "2"];
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_prosinfo")).env("PROSINFO_SEED", seed).args(base).output().unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
    assert_eq!(run("11"), stdout(&["--seed", "11", "sample", "--family", "normal", "--set-size", "4", "--subsets", "2"]));
}

#[test]
fn exit_codes() {
    assert_eq!(prosinfo(&["table", "9"]).status.code(), Some(2));
    assert_eq!(prosinfo(&["fisher", "--set-size", "6", "--subsets", "4"]).status.code(), Some(2));
    assert_eq!(prosinfo(&["fisher", "--alpha", "symmetric:0.5,"]).status.code(), Some(2));
    assert_eq!(prosinfo(&["fisher", "--family", "uniform", "--mode", "complete"]).status.code(), Some(3));
    assert_eq!(prosinfo(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_table_lists_valid_ids() {
    let out = prosinfo(&["table", "9"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2, 3, 4, 5, 6, 7, 8, 10"), "{err}");
}
