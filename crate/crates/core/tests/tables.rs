//! Spot cells from the misplacement and Dell–Clutter tables, checked against
//! reference values at `max(0.05, 3·SE)`, plus rerun stability.

use prosinfo::cli::tables::{to_csv, TableRow};
use prosinfo::cli::{run_table, TableSettings};
use prosinfo::{McConfig, Method};

fn rows(id: u32, method: Method, row: &str, col: &str) -> Vec<TableRow> {
    let settings = TableSettings {
        method,
        row_filter: Some(row.into()),
        col_filter: Some(col.into()),
        ..TableSettings::default()
    };
    run_table(id, &settings).expect("table")
}

fn assert_cell(id: u32, method: Method, row: &str, col: &str, reference: f64) {
    let found = rows(id, method, row, col);
    assert_eq!(found.len(), 1, "{row} / {col} should select one cell");
    let r = &found[0];
    let tol = f64::max(0.05, 3.0 * r.mc_stderr);
    assert!(
        (r.estimate - reference).abs() <= tol,
        "table {id} {row} {col}: {:.4} vs {reference} ± {tol:.3}",
        r.estimate
    );
}

#[test]
fn table4_cells() {
    assert_cell(4, Method::Quadrature, "normal n=2 RE1", "p=0.00", 3.15);
    assert_cell(4, Method::Quadrature, "normal n=2 RE2", "p=0.30", 1.12);
    assert_cell(4, Method::Quadrature, "exponential n=3 RE2", "p=0.00", 1.48);
    assert_cell(4, Method::MonteCarlo, "logistic n=2 RE1", "p=0.50", 1.000);
}

#[test]
fn table6_cells() {
    let q = Method::Quadrature;
    assert_cell(6, q, "normal S=4 n=2 N=3 vs RSS6 RE2", "rho=0.25", 0.97);
    assert_cell(6, q, "normal S=4 n=2 N=3 vs RSS6 RE2", "rho=1.00", 0.39);
    assert_cell(6, q, "exponential S=12 n=3 N=2 vs RSS6 RE2", "rho=1.00", 1.14);
    assert_cell(6, q, "normal S=12 n=4 N=3 vs RSS12 RE2", "rho=0.75", 0.83);
}

#[test]
fn table7_cells() {
    let q = Method::Quadrature;
    assert_cell(7, q, "normal S=4 n=2 N=3 RE2", "p=0.00", 1.75);
    assert_cell(7, q, "normal S=4 n=2 N=3 RE2", "p=1.00", 0.37);
    assert_cell(7, q, "logistic S=12 n=6 N=1 RE2", "p=1.00", 2.17);
    assert_cell(7, Method::MonteCarlo, "exponential S=6 n=3 N=2 RE2", "p=0.50", 0.83);
}

#[test]
fn table8_cells() {
    let q = Method::Quadrature;
    assert_cell(8, q, "normal S=6 n=2 N=6 RE2", "p=0.50", 0.36);
    assert_cell(8, q, "normal S=6 n=2 N=6 RE2", "p=1.00", 0.16);
    assert_cell(8, q, "exponential S=12 n=4 N=3 RE2", "p=0.00", 1.46);
}

#[test]
fn table10_partial_ranking_cell() {
    assert_cell(10, Method::Quadrature, "D=1-4|5-6 RE1", "rho=0.25", 1.038);
}

#[test]
fn perfect_rss_rows_are_neutral() {
    for r in rows(8, Method::Quadrature, "S=12 n=12 N=1", "") {
        assert!((r.estimate - 1.0).abs() < 1e-9, "{} {} = {}", r.row_label, r.col_label, r.estimate);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let settings = TableSettings {
        mc: McConfig {
            reps: 4000,
            ..McConfig::default()
        },
        method: Method::MonteCarlo,
        row_filter: Some("normal n=2".into()),
        col_filter: Some("S=6".into()),
        ..TableSettings::default()
    };
    let a = to_csv(&run_table(5, &settings).expect("first"));
    let b = to_csv(&run_table(5, &settings).expect("second"));
    assert_eq!(a, b);
    let other = TableSettings {
        mc: McConfig {
            seed: 7,
            ..settings.mc
        },
        ..settings.clone()
    };
    assert_ne!(a, to_csv(&run_table(5, &other).expect("reseeded")));
}
