//! Relative-efficiency tables for PROS designs.
//!
//! Each table is a list of cell groups. A group computes one or more rows
//! (typically `RE1` and `RE2` of the same design) and groups are evaluated in
//! parallel, each with a seed derived from its labels, so output does not
//! depend on the worker count or on which rows are filtered in.

use rayon::prelude::*;

use crate::designs::{make_balanced_design, make_symmetric_alpha, Design, MisplacementMatrix};
use crate::error::{Error, Result};
use crate::information::{
    efficiency_polynomial, fi_pros_marginal, fi_srs, relative_efficiency_with_error, FIResult,
    McConfig, Method, MC_BATCHES,
};
use crate::models::{Family, Model, Param};
use crate::numerics::{InfoMatrix, QuadratureSpec};
use crate::sampling::{dell_clutter_batches, DellClutterConfig};

pub const TABLE_IDS: [u32; 8] = [2, 3, 4, 5, 6, 7, 8, 10];

const P_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const RHO_GRID: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 1.0];

/// `(S, n, N)` PROS designs compared against RSS of set size 6 and 12.
const FIXED_RSS6: [(usize, usize, usize); 8] = [
    (4, 2, 3),
    (6, 2, 3),
    (6, 3, 2),
    (6, 6, 1),
    (8, 2, 3),
    (12, 2, 3),
    (12, 3, 2),
    (12, 6, 1),
];
const FIXED_RSS12: [(usize, usize, usize); 7] = [
    (6, 2, 6),
    (6, 3, 4),
    (12, 2, 6),
    (12, 3, 4),
    (12, 4, 3),
    (12, 6, 2),
    (12, 12, 1),
];

const UNBALANCED_ROWS: [&str; 14] = [
    "1-5|6",
    "1-4|5-6",
    "1-3|4-6",
    "1-2|3-6",
    "1|2-6",
    "1|2|3-6",
    "1|2-3|4-6",
    "1|2-4|5-6",
    "1|2-5|6",
    "1-2|3-5|6",
    "1-2|3-4|5-6",
    "1-3|4|5-6",
    "1-3|4-5|6",
    "1-4|5|6",
];

/// One output line: `row_label, col_label, estimate, mc_stderr, method`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub row_label: String,
    pub col_label: String,
    pub estimate: f64,
    pub mc_stderr: f64,
    pub method: String,
}

#[derive(Debug, Clone)]
pub struct TableSettings {
    pub mc: McConfig,
    /// How the information is evaluated. Dell–Clutter tables (5, 6, 10)
    /// always estimate α by simulation first.
    pub method: Method,
    pub spec: QuadratureSpec,
    /// Keep only rows whose label contains this text.
    pub row_filter: Option<String>,
    /// Keep only columns whose label contains this text.
    pub col_filter: Option<String>,
}

impl Default for TableSettings {
    fn default() -> Self {
        Self {
            mc: McConfig::default(),
            method: Method::Quadrature,
            spec: QuadratureSpec::default(),
            row_filter: None,
            col_filter: None,
        }
    }
}

impl TableSettings {
    fn keeps(&self, row: &str, col: &str) -> bool {
        self.row_filter.as_deref().is_none_or(|f| row.contains(f))
            && self.col_filter.as_deref().is_none_or(|f| col.contains(f))
    }
}

type Job = Box<dyn Fn(&TableSettings, u64) -> Result<Vec<(f64, f64)>> + Send + Sync>;

struct Group {
    labels: Vec<(String, String)>,
    method: String,
    job: Job,
}

/// Computes table `id` under `settings`.
pub fn run_table(id: u32, settings: &TableSettings) -> Result<Vec<TableRow>> {
    let groups = match id {
        2 => table2(),
        3 => imperfect_table(6),
        4 => imperfect_table(12),
        5 => dell_clutter_table(),
        6 => fixed_rss_dell_clutter_table(),
        7 => fixed_rss_table(6),
        8 => fixed_rss_table(12),
        10 => unbalanced_table(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown table {other}; valid ids are {}",
                TABLE_IDS.map(|t| t.to_string()).join(", ")
            )))
        }
    };
    let method_name = |g: &Group| match g.method.as_str() {
        "" => settings.method.name().to_string(),
        "dc" => dc_method(settings),
        other => other.to_string(),
    };
    let selected: Vec<&Group> = groups
        .iter()
        .filter(|g| g.labels.iter().any(|(r, c)| settings.keeps(r, c)))
        .collect();
    let results: Vec<Result<Vec<TableRow>>> = selected
        .par_iter()
        .map(|g| {
            let key = format!("table{id}/{}/{}", g.labels[0].0, g.labels[0].1);
            let values = (g.job)(settings, cell_seed(settings.mc.seed, &key))?;
            Ok(g.labels
                .iter()
                .zip(values)
                .filter(|((r, c), _)| settings.keeps(r, c))
                .map(|((r, c), (est, se))| TableRow {
                    row_label: r.clone(),
                    col_label: c.clone(),
                    estimate: est,
                    mc_stderr: se,
                    method: method_name(g),
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Seed for a labelled cell: FNV-1a of the key mixed into the base seed.
fn cell_seed(base: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fmt_p(v: f64) -> String {
    format!("{v:.2}")
}

/// Default activation: `(μ, σ)` for normal and logistic, `σ` for the exponential.
fn table_model(family: Family) -> Model {
    Model::standard(family)
}

fn table2() -> Vec<Group> {
    let mut rows: Vec<(String, Model)> = Vec::new();
    let ls = |f: Family, act: &[Param]| Model::new(f, &[], act).expect("valid model");
    rows.push(("exponential sigma".into(), ls(Family::Exponential, &[Param::Scale])));
    for f in [Family::Normal, Family::Logistic, Family::ExtremeValue] {
        rows.push((format!("{f} mu"), ls(f, &[Param::Location])));
        rows.push((format!("{f} sigma"), ls(f, &[Param::Scale])));
        rows.push((format!("{f} mu+sigma"), ls(f, &[Param::Location, Param::Scale])));
    }
    for k in [2.0, 3.0, 4.0, 10.0] {
        let m = Model::new(Family::Gamma, &[(Param::Shape, k)], &[Param::Scale]).expect("valid gamma");
        rows.push((format!("gamma shape={k} sigma"), m));
    }
    rows.into_iter()
        .map(|(label, model)| Group {
            labels: ["c1", "c2", "d0", "d1", "d2"]
                .iter()
                .map(|c| (label.clone(), c.to_string()))
                .collect(),
            method: "quadrature".into(),
            job: Box::new(move |s, _| {
                let p = efficiency_polynomial(&model, &s.spec)?;
                Ok([p.c1, p.c2, p.d0, p.d1, p.d2].iter().map(|v| (*v, 0.0)).collect())
            }),
        })
        .collect()
}

fn ratio(a: &FIResult, b: &FIResult) -> Result<(f64, f64)> {
    let e = relative_efficiency_with_error(a, b)?;
    Ok((e.value, e.std_error))
}

fn fi_with_alpha(model: &Model, design: &Design, alpha: &MisplacementMatrix, s: &TableSettings, seed: u64) -> Result<FIResult> {
    let mc = McConfig { seed, workers: 0, ..s.mc };
    fi_pros_marginal(model, design, Some(alpha), s.method, &mc, &s.spec)
}

fn srs_result(model: &Model, size: usize, spec: &QuadratureSpec) -> Result<FIResult> {
    let m = fi_srs(model, size, spec)?;
    Ok(FIResult {
        matrix: m,
        method: Method::Quadrature,
        entry_errors: None,
        batches: Vec::new(),
        design: format!("SRS({size})"),
        model: model.to_string(),
    })
}

fn imperfect_table(set_size: usize) -> Vec<Group> {
    let mut out = Vec::new();
    for family in [Family::Normal, Family::Exponential, Family::Logistic] {
        for n in [2usize, 3] {
            for p in P_GRID {
                let row = format!("{family} n={n}");
                let col = format!("p={}", fmt_p(p));
                let model = table_model(family);
                out.push(Group {
                    labels: vec![(format!("{row} RE1"), col.clone()), (format!("{row} RE2"), col)],
                    method: String::new(),
                    job: Box::new(move |s, seed| {
                        let alpha = make_symmetric_alpha(n, p)?;
                        let pros = fi_with_alpha(&model, &make_balanced_design(set_size, n, 1)?, &alpha, s, seed)?;
                        let rss = fi_with_alpha(&model, &make_balanced_design(n, n, 1)?, &alpha, s, seed ^ 1)?;
                        let srs = srs_result(&model, n, &s.spec)?;
                        Ok(vec![ratio(&pros, &srs)?, ratio(&pros, &rss)?])
                    }),
                });
            }
        }
    }
    out
}

fn fixed_rss_table(rss_size: usize) -> Vec<Group> {
    let grid: &[(usize, usize, usize)] = if rss_size == 6 { &FIXED_RSS6 } else { &FIXED_RSS12 };
    let mut out = Vec::new();
    for family in [Family::Normal, Family::Exponential, Family::Logistic] {
        for &(s_, n, cycles) in grid {
            for p in P_GRID {
                let model = table_model(family);
                out.push(Group {
                    labels: vec![(
                        format!("{family} S={s_} n={n} N={cycles} RE2"),
                        format!("p={}", fmt_p(p)),
                    )],
                    method: String::new(),
                    job: Box::new(move |s, seed| {
                        let pros = fi_with_alpha(
                            &model,
                            &make_balanced_design(s_, n, cycles)?,
                            &make_symmetric_alpha(n, p)?,
                            s,
                            seed,
                        )?;
                        let rss = fi_with_alpha(
                            &model,
                            &make_balanced_design(rss_size, rss_size, 1)?,
                            &make_symmetric_alpha(rss_size, p)?,
                            s,
                            seed ^ 1,
                        )?;
                        Ok(vec![ratio(&pros, &rss)?])
                    }),
                });
            }
        }
    }
    out
}

/// Dell–Clutter information of `design` plus per-batch matrices for standard
/// errors. With quadrature the batches come from stage-1 blocks; with
/// simulation they come from the information estimate itself.
fn dell_clutter_fi(model: &Model, design: &Design, rho: f64, s: &TableSettings, seed: u64) -> Result<FIResult> {
    let one = design.with_cycles(1)?;
    let cfg = DellClutterConfig::new(rho, s.mc.reps, seed)?.with_workers(0);
    let (alpha, batches) = dell_clutter_batches(model, &one, &cfg, MC_BATCHES)?;
    let mc = McConfig { seed, workers: 0, ..s.mc };
    if s.method == Method::MonteCarlo {
        return fi_pros_marginal(model, design, Some(&alpha), Method::MonteCarlo, &mc, &s.spec);
    }
    let fi = |a: &MisplacementMatrix| -> Result<InfoMatrix> {
        Ok(fi_pros_marginal(model, design, Some(a), Method::Quadrature, &mc, &s.spec)?.matrix)
    };
    let mut out = fi_pros_marginal(model, design, Some(&alpha), Method::Quadrature, &mc, &s.spec)?;
    out.batches = batches.iter().map(fi).collect::<Result<_>>()?;
    out.method = Method::MonteCarlo;
    Ok(out)
}

fn dc_method(s: &TableSettings) -> String {
    format!("dell-clutter+{}", s.method.name())
}

fn dc_families() -> Vec<(String, Model)> {
    let mut v: Vec<(String, Model)> = [Family::Normal, Family::Exponential, Family::Logistic]
        .iter()
        .map(|f| (f.to_string(), table_model(*f)))
        .collect();
    for (pi, h, label) in [
        (0.3, 1.0 / 3.0, "1/3"),
        (0.3, 1.0 / 9.0, "1/9"),
        (0.9, 1.0 / 3.0, "1/3"),
        (0.9, 1.0 / 9.0, "1/9"),
    ] {
        v.push((
            format!("exp-mixture(pi={pi} h={label})"),
            Model::exp_mixture(pi, h).expect("valid mixture"),
        ));
    }
    v
}

fn dell_clutter_table() -> Vec<Group> {
    let mut out = Vec::new();
    for (name, model) in dc_families() {
        for n in [2usize, 3] {
            for set_size in [6usize, 12] {
                for rho in RHO_GRID {
                    let row = format!("{name} n={n}");
                    let col = format!("S={set_size} rho={}", fmt_p(rho));
                    let model = model.clone();
                    out.push(Group {
                        labels: vec![(format!("{row} RE1"), col.clone()), (format!("{row} RE2"), col)],
                        method: String::from("dc"),
                        job: Box::new(move |s, seed| {
                            let pros = dell_clutter_fi(&model, &make_balanced_design(set_size, n, 1)?, rho, s, seed)?;
                            let rss = dell_clutter_fi(&model, &make_balanced_design(n, n, 1)?, rho, s, seed ^ 1)?;
                            let srs = srs_result(&model, n, &s.spec)?;
                            Ok(vec![ratio(&pros, &srs)?, ratio(&pros, &rss)?])
                        }),
                    });
                }
            }
        }
    }
    out
}

fn fixed_rss_dell_clutter_table() -> Vec<Group> {
    let mut out = Vec::new();
    for family in [Family::Normal, Family::Exponential, Family::Logistic] {
        for (rss_size, grid) in [(6usize, &FIXED_RSS6[..]), (12, &FIXED_RSS12[..])] {
            for &(s_, n, cycles) in grid {
                if rss_size == 6 && (s_, n) == (6, 6) {
                    continue;
                }
                for rho in RHO_GRID {
                    let model = table_model(family);
                    out.push(Group {
                        labels: vec![(
                            format!("{family} S={s_} n={n} N={cycles} vs RSS{rss_size} RE2"),
                            format!("rho={}", fmt_p(rho)),
                        )],
                        method: String::from("dc"),
                        job: Box::new(move |s, seed| {
                            let pros = dell_clutter_fi(&model, &make_balanced_design(s_, n, cycles)?, rho, s, seed)?;
                            // Shared comparator seed so every row of a block uses the same RSS.
                            let rss_seed = cell_seed(s.mc.seed, &format!("rss{rss_size}/{family}/{rho}"));
                            let rss =
                                dell_clutter_fi(&model, &make_balanced_design(rss_size, rss_size, 1)?, rho, s, rss_seed)?;
                            Ok(vec![ratio(&pros, &rss)?])
                        }),
                    });
                }
            }
        }
    }
    out
}

fn unbalanced_table() -> Vec<Group> {
    let mut out = Vec::new();
    for part in UNBALANCED_ROWS {
        for rho in RHO_GRID {
            let model = Model::standard(Family::Normal);
            let design = Design::from_partition_str(6, part, 1).expect("valid partition");
            let row = format!("D={part}");
            let col = format!("rho={}", fmt_p(rho));
            out.push(Group {
                labels: vec![(format!("{row} RE1"), col.clone()), (format!("{row} RE2"), col)],
                method: String::from("dc"),
                job: Box::new(move |s, seed| {
                    let n = design.n();
                    let pros = dell_clutter_fi(&model, &design, rho, s, seed)?;
                    let rss = dell_clutter_fi(&model, &make_balanced_design(n, n, 1)?, rho, s, seed ^ 1)?;
                    let srs = srs_result(&model, n, &s.spec)?;
                    Ok(vec![ratio(&pros, &srs)?, ratio(&pros, &rss)?])
                }),
            });
        }
    }
    out
}

/// Renders rows as CSV with a fixed header and fixed-precision numbers.
pub fn to_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("row_label,col_label,estimate,mc_stderr,method\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            r.row_label, r.col_label, r.estimate, r.mc_stderr, r.method
        ));
    }
    s
}

/// Renders rows as a Markdown grid: one line per row label, one column per column label.
pub fn to_markdown(rows: &[TableRow]) -> String {
    let mut row_keys: Vec<&str> = Vec::new();
    let mut col_keys: Vec<&str> = Vec::new();
    for r in rows {
        if !row_keys.contains(&r.row_label.as_str()) {
            row_keys.push(&r.row_label);
        }
        if !col_keys.contains(&r.col_label.as_str()) {
            col_keys.push(&r.col_label);
        }
    }
    let mut s = format!("| |{}|\n", col_keys.join("|"));
    s.push_str(&format!("|---|{}|\n", vec!["---"; col_keys.len()].join("|")));
    for rk in &row_keys {
        let cells: Vec<String> = col_keys
            .iter()
            .map(|ck| {
                rows.iter()
                    .find(|r| r.row_label == *rk && r.col_label == *ck)
                    .map_or(String::new(), |r| {
                        if r.mc_stderr >= 5e-5 {
                            format!("{:.4} ± {:.4}", r.estimate, r.mc_stderr)
                        } else {
                            format!("{:.4}", r.estimate)
                        }
                    })
            })
            .collect();
        s.push_str(&format!("|{rk}|{}|\n", cells.join("|")));
    }
    s
}
