//! Command-line front end.

pub mod tables;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::designs::{make_balanced_design, make_symmetric_alpha, Design, MisplacementMatrix, UnbalancedDesign};
use crate::entropy::{kl_chain, kl_pros_srs, renyi, shannon, shifted_reference, DesignKind, EntropyReport};
use crate::error::{Error, Result};
use crate::information::{
    fi_complete_mc, fi_pros_complete, fi_pros_marginal, fi_rss_complete, fi_srs, fi_unbalanced,
    relative_efficiency_with_error, FIResult, McConfig, Method, MC_BATCHES,
};
use crate::models::Model;
use crate::numerics::QuadratureSpec;
use crate::sampling::{dell_clutter_batches, draw_pros, draw_unbalanced_pros, DellClutterConfig};

pub use tables::{run_table, TableRow, TableSettings, TABLE_IDS};

#[derive(Debug, Parser)]
#[command(name = "prosinfo", version, about = "Information content of partially rank-ordered set samples")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed for every simulated quantity.
    #[arg(long, global = true, env = "PROSINFO_SEED", default_value_t = 20240101)]
    pub seed: u64,
    /// Monte Carlo replications (sets for Dell–Clutter stage 1).
    #[arg(long, global = true, default_value_t = 50_000)]
    pub reps: usize,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// quadrature or mc.
    #[arg(long, global = true, default_value = "quadrature")]
    pub method: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// File of `key=value` lines mirroring the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "normal")]
    pub family: String,
    /// e.g. `mu=0,sigma=1`; omitted parameters take family defaults.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Unknown parameters, e.g. `mu,sigma`; empty means all that can be.
    #[arg(long, default_value = "")]
    pub active: String,
}

impl ModelArgs {
    fn model(&self) -> Result<Model> {
        Model::parse(&self.family, &self.params, &self.active)
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 6)]
    pub set_size: usize,
    #[arg(long, default_value_t = 2)]
    pub subsets: usize,
    #[arg(long, default_value_t = 1)]
    pub cycles: usize,
    /// Explicit subsets such as `1-3|4-5|6` (overrides --subsets).
    #[arg(long)]
    pub partition: Option<String>,
    /// Unbalanced design file with `cycle;partition;measured` lines.
    #[arg(long)]
    pub design_file: Option<PathBuf>,
}

impl DesignArgs {
    fn design(&self) -> Result<Design> {
        match &self.partition {
            Some(p) => Design::from_partition_str(self.set_size, p, self.cycles),
            None => make_balanced_design(self.set_size, self.subsets, self.cycles),
        }
    }

    fn unbalanced(&self) -> Result<Option<UnbalancedDesign>> {
        self.design_file
            .as_ref()
            .map(|p| UnbalancedDesign::parse(self.set_size, &read(p)?))
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Complete,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Shannon,
    Renyi,
    Kl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Srs,
    Rss,
    Pros,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce a relative-efficiency table.
    Table {
        /// One of 2, 3, 4, 5, 6, 7, 8, 10.
        id: u32,
        /// Keep rows whose label contains this text.
        #[arg(long)]
        row: Option<String>,
        /// Keep columns whose label contains this text.
        #[arg(long)]
        col: Option<String>,
    },
    /// Fisher information of one design with RE against SRS and RSS.
    Fisher {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, value_enum, default_value_t = Mode::Marginal)]
        mode: Mode,
        /// `perfect`, `symmetric:p`, `dellclutter:rho` or a CSV file.
        #[arg(long, default_value = "perfect")]
        alpha: String,
    },
    /// Shannon or Rényi entropy, or KL information against SRS.
    Entropy {
        #[arg(long, value_enum, default_value_t = Measure::Shannon)]
        measure: Measure,
        /// Rényi order in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        order: f64,
        #[arg(long, value_enum, default_value_t = Kind::Pros)]
        kind: Kind,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 6)]
        set_size: usize,
        #[arg(long, default_value_t = 2)]
        subsets: usize,
    },
    /// Draw a PROS sample as CSV.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value = "perfect")]
        alpha: String,
    },
    /// Estimate a Dell–Clutter misplacement matrix.
    Alpha {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        rho: f64,
    },
}

/// A misplacement source as written on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSource {
    Perfect,
    Symmetric(f64),
    DellClutter(f64),
    File(PathBuf),
}

impl AlphaSource {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("perfect") {
            return Ok(Self::Perfect);
        }
        let number = |v: &str, at: usize| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(at, format!("bad number '{}'", v.trim())))
        };
        if let Some(v) = t.strip_prefix("symmetric:") {
            return Ok(Self::Symmetric(number(v, "symmetric:".len())?));
        }
        if let Some(v) = t.strip_prefix("dellclutter:") {
            return Ok(Self::DellClutter(number(v, "dellclutter:".len())?));
        }
        if t.contains(':') && !Path::new(t).exists() {
            return Err(Error::parse(
                0,
                format!("unknown alpha source '{t}' (perfect, symmetric:p, dellclutter:rho or a file)"),
            ));
        }
        Ok(Self::File(PathBuf::from(t)))
    }

    /// The matrix for `design` and, for Dell–Clutter, per-batch estimates.
    fn resolve(
        &self,
        model: &Model,
        design: &Design,
        common: &Common,
    ) -> Result<(Option<MisplacementMatrix>, Vec<MisplacementMatrix>)> {
        match self {
            Self::Perfect => Ok((None, Vec::new())),
            Self::Symmetric(p) => Ok((Some(make_symmetric_alpha(design.n(), *p)?), Vec::new())),
            Self::DellClutter(rho) => {
                let cfg = DellClutterConfig::new(*rho, common.reps, common.seed)?.with_workers(common.workers);
                let (a, b) = dell_clutter_batches(model, &design.with_cycles(1)?, &cfg, MC_BATCHES)?;
                Ok((Some(a), b))
            }
            Self::File(p) => Ok((Some(MisplacementMatrix::from_csv(&read(p)?)?), Vec::new())),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Inserts `--key value` pairs from a `--config` file right after the
/// subcommand, so explicit flags given later still win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = read(Path::new(&path))?;
    let mut extra = Vec::new();
    let mut offset = 0;
    for line in text.lines() {
        let l = line.trim();
        if !l.is_empty() && !l.starts_with('#') {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(offset, format!("expected key=value, got '{l}'")))?;
            let key = k.trim().replace('_', "-");
            if key == "config" {
                return Err(Error::parse(offset, "config files cannot nest"));
            }
            extra.push(OsString::from(format!("--{key}")));
            extra.push(OsString::from(v.trim()));
        }
        offset += line.len() + 1;
    }
    let sub = strs
        .iter()
        .position(|a| matches!(a.as_str(), "table" | "fisher" | "entropy" | "sample" | "alpha"))
        .map_or(args.len(), |i| i + 1);
    let mut out = args[..sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub..]);
    Ok(out)
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 on success, 2 for invalid input, 3 for numerical failures.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let args = match expand_config(args.into_iter().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                3
            } else {
                2
            }
        }
    }
}

/// Runs a parsed command and writes its output.
pub fn run(cli: &Cli) -> Result<()> {
    let text = render(cli)?;
    match &cli.common.output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
        .install(f)
}

/// Produces the output text of a command.
pub fn render(cli: &Cli) -> Result<String> {
    let c = &cli.common;
    let method: Method = c.method.parse()?;
    let mc = McConfig {
        reps: c.reps,
        seed: c.seed,
        workers: 0,
    };
    let spec = QuadratureSpec::default();
    match &cli.command {
        Command::Table { id, row, col } => {
            let settings = TableSettings {
                mc,
                method,
                spec,
                row_filter: row.clone(),
                col_filter: col.clone(),
            };
            let rows = with_pool(c.workers, || run_table(*id, &settings))?;
            Ok(match c.format {
                Format::Csv => tables::to_csv(&rows),
                Format::Md => tables::to_markdown(&rows),
            })
        }
        Command::Fisher {
            model,
            design,
            mode,
            alpha,
        } => {
            let model = model.model()?;
            let source = AlphaSource::parse(alpha)?;
            let rows = with_pool(c.workers, || fisher_rows(&model, design, *mode, &source, method, &mc, &spec, c))?;
            Ok(render_quantities(&rows, c.format))
        }
        Command::Entropy {
            measure,
            order,
            kind,
            model,
            set_size,
            subsets,
        } => {
            let model = model.model()?;
            let kind = match kind {
                Kind::Srs => DesignKind::Srs { n: *subsets },
                Kind::Rss => DesignKind::Rss { set_size: *set_size },
                Kind::Pros => DesignKind::Pros {
                    n: *subsets,
                    set_size: *set_size,
                },
            };
            Ok(render_quantities(&entropy_rows(&model, *measure, *order, kind, &spec)?, c.format))
        }
        Command::Sample { model, design, alpha } => {
            let model = model.model()?;
            let source = AlphaSource::parse(alpha)?;
            with_pool(c.workers, || {
                if let Some(ud) = design.unbalanced()? {
                    let alphas = ud
                        .cycles()
                        .iter()
                        .map(|d| Ok(source.resolve(&model, d, c)?.0))
                        .collect::<Result<Vec<_>>>()?;
                    return Ok(draw_unbalanced_pros(&model, &ud, &alphas, c.seed)?.to_csv());
                }
                let d = design.design()?;
                let (a, _) = source.resolve(&model, &d, c)?;
                Ok(draw_pros(&model, &d, a.as_ref(), c.seed)?.to_csv())
            })
        }
        Command::Alpha { model, design, rho } => {
            let model = model.model()?;
            let d = design.design()?;
            let (a, _) = with_pool(c.workers, || AlphaSource::DellClutter(*rho).resolve(&model, &d, c))?;
            Ok(a.expect("Dell–Clutter always yields a matrix").to_csv())
        }
    }
}

/// `(quantity, estimate, mc_stderr, method)`.
type Quantity = (String, f64, f64, String);

fn render_quantities(rows: &[Quantity], format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str("quantity,estimate,mc_stderr,method\n");
            for (q, v, e, m) in rows {
                s.push_str(&format!("{q},{v:.6},{e:.6},{m}\n"));
            }
        }
        Format::Md => {
            s.push_str("|quantity|estimate|mc_stderr|method|\n|---|---|---|---|\n");
            for (q, v, e, m) in rows {
                s.push_str(&format!("|{q}|{v:.6}|{e:.6}|{m}|\n"));
            }
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn fisher_rows(
    model: &Model,
    design_args: &DesignArgs,
    mode: Mode,
    source: &AlphaSource,
    method: Method,
    mc: &McConfig,
    spec: &QuadratureSpec,
    common: &Common,
) -> Result<Vec<Quantity>> {
    let with_batches = |mut fi: FIResult, batches: &[MisplacementMatrix], d: &Design| -> Result<FIResult> {
        if !batches.is_empty() && fi.method == Method::Quadrature {
            fi.batches = batches
                .iter()
                .map(|a| Ok(fi_pros_marginal(model, d, Some(a), Method::Quadrature, mc, spec)?.matrix))
                .collect::<Result<_>>()?;
        }
        Ok(fi)
    };
    let (fi, size, rss) = if let Some(ud) = design_args.unbalanced()? {
        if mode == Mode::Complete {
            return Err(Error::InvalidParameter(
                "complete-data information is available for balanced designs only".into(),
            ));
        }
        let alphas = ud
            .cycles()
            .iter()
            .map(|d| Ok(source.resolve(model, d, common)?.0))
            .collect::<Result<Vec<_>>>()?;
        (fi_unbalanced(model, &ud, &alphas, method, mc, spec)?, ud.total_size(), None)
    } else {
        let d = design_args.design()?;
        let n = d.n();
        match mode {
            Mode::Complete => {
                if *source != AlphaSource::Perfect {
                    return Err(Error::InvalidParameter(
                        "complete-data information assumes perfect subsetting; use --mode marginal".into(),
                    ));
                }
                if !d.is_balanced() {
                    return Err(Error::InvalidDesign("complete-data information needs equal subset sizes".into()));
                }
                let fi = match method {
                    Method::Quadrature => fi_pros_complete(model, n, d.set_size(), d.cycles(), spec)?,
                    Method::MonteCarlo => fi_complete_mc(model, &d, mc)?,
                };
                let rss = fi_rss_complete(model, n, d.cycles(), spec)?;
                (fi, d.sample_size(), Some(rss))
            }
            Mode::Marginal => {
                let (a, batches) = source.resolve(model, &d, common)?;
                let fi = with_batches(fi_pros_marginal(model, &d, a.as_ref(), method, mc, spec)?, &batches, &d)?;
                let rd = make_balanced_design(n, n, d.cycles())?;
                let rss_source = match source {
                    AlphaSource::File(_) => match &a {
                        Some(m) if m.dim() == n => Some((Some(m.clone()), Vec::new())),
                        _ => None,
                    },
                    other if n >= 2 || *other == AlphaSource::Perfect => Some(other.resolve(model, &rd, common)?),
                    _ => None,
                };
                let rss = match rss_source {
                    Some((ra, rb)) => Some(with_batches(
                        fi_pros_marginal(model, &rd, ra.as_ref(), method, mc, spec)?,
                        &rb,
                        &rd,
                    )?),
                    None => None,
                };
                (fi, d.sample_size(), rss)
            }
        }
    };
    let label = fi.method.name().to_string();
    let names: Vec<&str> = model.active().iter().map(|p| p.name()).collect();
    let mut rows = Vec::new();
    for i in 0..fi.matrix.dim() {
        for j in i..fi.matrix.dim() {
            let se = fi
                .entry_errors
                .as_ref()
                .map_or(0.0, |e| e[i * fi.matrix.dim() + j].std_error);
            rows.push((format!("I[{}:{}]", names[i], names[j]), fi.matrix.get(i, j), se, label.clone()));
        }
    }
    rows.push(("det".into(), fi.det(), 0.0, label.clone()));
    let srs = FIResult {
        matrix: fi_srs(model, size, spec)?,
        method: Method::Quadrature,
        entry_errors: None,
        batches: Vec::new(),
        design: format!("SRS({size})"),
        model: model.to_string(),
    };
    let re1 = relative_efficiency_with_error(&fi, &srs)?;
    rows.push(("RE1".into(), re1.value, re1.std_error, label.clone()));
    if let Some(rss) = rss {
        let re2 = relative_efficiency_with_error(&fi, &rss)?;
        rows.push(("RE2".into(), re2.value, re2.std_error, label));
    }
    Ok(rows)
}

fn entropy_rows(model: &Model, measure: Measure, order: f64, kind: DesignKind, spec: &QuadratureSpec) -> Result<Vec<Quantity>> {
    let q = |name: &str, v: f64| (name.to_string(), v, 0.0, "quadrature".to_string());
    let report_rows = |r: EntropyReport, name: &str| {
        let mut rows = vec![q(name, r.total)];
        for (i, c) in r.contributions.iter().enumerate() {
            rows.push(q(&format!("{name}[subset {}]", i + 1), *c));
        }
        rows.push(q("lower_bound", r.lower));
        rows.push(q("upper_bound", r.upper));
        rows
    };
    match measure {
        Measure::Shannon => Ok(report_rows(shannon(model, kind, spec)?, "shannon")),
        Measure::Renyi => Ok(report_rows(renyi(model, kind, order, spec)?, "renyi")),
        Measure::Kl => {
            let (n, s) = kind.shape();
            let mut rows = vec![q("kl_pros_srs", kl_pros_srs(model, n, s, spec)?)];
            if let Ok(g) = shifted_reference(model) {
                let chain = kl_chain(model, &g, n, s, spec)?;
                rows.push(q("kl_srs_reference", chain.srs));
                rows.push(q("kl_pros_reference", chain.pros));
                rows.push(q("kl_rss_bound_reference", chain.rss_bound));
            }
            Ok(rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    fn output(s: &str) -> String {
        let cli = Cli::try_parse_from(args(s)).unwrap();
        render(&cli).unwrap()
    }

    #[test]
    fn alpha_sources() {
        assert_eq!(AlphaSource::parse("perfect").unwrap(), AlphaSource::Perfect);
        assert_eq!(AlphaSource::parse("symmetric:0.8").unwrap(), AlphaSource::Symmetric(0.8));
        assert_eq!(AlphaSource::parse("dellclutter:0.5").unwrap(), AlphaSource::DellClutter(0.5));
        assert!(matches!(
            AlphaSource::parse("symmetric:x"),
            Err(Error::Parse { position: 10, .. })
        ));
        assert!(AlphaSource::parse("bogus:1").is_err());
    }

    #[test]
    fn fisher_complete_exponential() {
        let out = output(
            "prosinfo fisher --family exponential --params sigma=1 --active sigma --set-size 6 --subsets 2 --mode complete",
        );
        assert!(out.contains("I[sigma:sigma],6.04"), "{out}");
        assert!(out.contains("RE1,3.020"), "{out}");
    }

    #[test]
    fn entropy_uniform() {
        let out = output("prosinfo entropy --measure shannon --family uniform --set-size 2 --subsets 2");
        assert!(out.contains("shannon,-0.386294"), "{out}");
    }

    #[test]
    fn sample_rows() {
        let out = output("prosinfo sample --family normal --params mu=0,sigma=1 --set-size 6 --subsets 2 --cycles 2 --seed 7");
        assert_eq!(out.lines().count(), 5);
    }

    #[test]
    fn config_inserted_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("prosinfo-cfg-{}", std::process::id()));
        fs::write(&dir, "set_size = 4\n# comment\nsubsets=2\n").unwrap();
        let a = expand_config(args(&format!("prosinfo fisher --config {} --subsets 4", dir.display()))).unwrap();
        let s: Vec<String> = a.iter().map(|x| x.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[..6], ["prosinfo", "fisher", "--set-size", "4", "--subsets", "2"]);
        assert_eq!(s.last().unwrap(), "4");
        fs::remove_file(dir).unwrap();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(args("prosinfo table 9")), 2);
        assert_eq!(main_with_args(args("prosinfo --bogus")), 2);
        assert_eq!(
            main_with_args(args("prosinfo entropy --measure renyi --order 2 --family normal")),
            2
        );
    }
}
