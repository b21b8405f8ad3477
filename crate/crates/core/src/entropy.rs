//! Shannon and Rényi entropy and Kullback–Leibler information of SRS, RSS
//! and perfectly subsetted PROS samples. All values are in nats.

use std::fmt;

use crate::densities::Tilt;
use crate::designs::make_balanced_design;
use crate::error::{Error, Result};
use crate::models::{Family, Model, Param};
use crate::numerics::{integrate_line_vec, integrate_unit_vec, QuadratureSpec};

/// Which sampling scheme an entropy refers to (one cycle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Srs { n: usize },
    Rss { set_size: usize },
    Pros { n: usize, set_size: usize },
}

impl DesignKind {
    /// `(n, S)` with SRS as `S = 1` and RSS as `S = n`.
    pub fn shape(self) -> (usize, usize) {
        match self {
            DesignKind::Srs { n } => (n, 1),
            DesignKind::Rss { set_size } => (set_size, set_size),
            DesignKind::Pros { n, set_size } => (n, set_size),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Srs { .. } => "srs",
            DesignKind::Rss { .. } => "rss",
            DesignKind::Pros { .. } => "pros",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, s) = self.shape();
        write!(f, "{}(n={n},S={s})", self.name())
    }
}

/// An entropy with its per-subset parts and the sandwich
/// `(1/m)·H_S(rss) ≤ H ≤ H_n(srs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub kind: DesignKind,
    /// `None` for Shannon, the Rényi order otherwise.
    pub order: Option<f64>,
    pub total: f64,
    pub contributions: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl EntropyReport {
    pub fn bounds_hold(&self, slack: f64) -> bool {
        self.lower <= self.total + slack && self.total <= self.upper + slack
    }
}

fn tilts(kind: DesignKind) -> Result<Vec<Tilt>> {
    let (n, s) = kind.shape();
    if s == 1 {
        let single = Tilt::new(&make_balanced_design(1, 1, 1)?, None, 0)?;
        return Ok(vec![single; n]);
    }
    let design = make_balanced_design(s, n, 1)?;
    (0..n).map(|r| Tilt::new(&design, None, r)).collect()
}

fn divergent(e: Error, what: &str) -> Error {
    match e {
        Error::NonConvergence { .. } | Error::NonFinite { .. } => {
            Error::Divergent(format!("{what} integral does not converge ({e})"))
        }
        other => other,
    }
}

/// `∫₀¹ c(u)·h(u) du` with `c ≡ 0` treated as a zero contribution.
fn tilt_integral(tilt: &Tilt, h: impl Fn(f64, f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    let v = integrate_unit_vec(
        |u, out| {
            let c = tilt.value(u, 1.0 - u);
            out[0] = if c > 0.0 { c * h(u, c) } else { 0.0 };
        },
        1,
        spec,
    )?;
    Ok(v[0])
}

fn shannon_parts(model: &Model, kind: DesignKind, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    tilts(kind)?
        .iter()
        .map(|t| {
            tilt_integral(t, |u, c| -(model.ln_pdf(model.quantile_unchecked(u)) + c.ln()), spec)
                .map_err(|e| divergent(e, "Shannon entropy"))
        })
        .collect()
}

fn renyi_parts(model: &Model, kind: DesignKind, alpha: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let (lo, hi) = model.support();
    tilts(kind)?
        .iter()
        .map(|t| {
            let v = integrate_line_vec(
                |x, out| {
                    let f = model.pdf(x);
                    out[0] = if f > 0.0 {
                        let c = t.value(model.cdf(x), model.sf(x));
                        (f * c).powf(alpha)
                    } else {
                        0.0
                    };
                },
                lo,
                hi,
                1,
                spec,
            )
            .map_err(|e| divergent(e, "Rényi entropy"))?;
            Ok(v[0].ln() / (1.0 - alpha))
        })
        .collect()
}

fn report(
    kind: DesignKind,
    order: Option<f64>,
    parts: impl Fn(DesignKind) -> Result<Vec<f64>>,
) -> Result<EntropyReport> {
    let (n, s) = kind.shape();
    let contributions = parts(kind)?;
    let total = contributions.iter().sum();
    let upper = parts(DesignKind::Srs { n: 1 })?[0] * n as f64;
    let m = (s as f64 / n as f64).max(1.0);
    let lower = parts(DesignKind::Rss { set_size: s })?.iter().sum::<f64>() / m;
    Ok(EntropyReport {
        kind,
        order,
        total,
        contributions,
        lower,
        upper,
    })
}

fn check_kind(kind: DesignKind) -> Result<()> {
    let (n, s) = kind.shape();
    if n == 0 {
        return Err(Error::InvalidDesign("sample size must be positive".into()));
    }
    if s == 1 {
        return Ok(());
    }
    make_balanced_design(s, n, 1).map(|_| ())
}

/// Shannon entropy `−Σ_r ∫ f_(d_r) log f_(d_r)` of one cycle.
pub fn shannon(model: &Model, kind: DesignKind, spec: &QuadratureSpec) -> Result<EntropyReport> {
    check_kind(kind)?;
    report(kind, None, |k| shannon_parts(model, k, spec))
}

/// Rényi entropy `(1−α)⁻¹ Σ_r log ∫ f_(d_r)^α` for `0 < α < 1`.
pub fn renyi(model: &Model, kind: DesignKind, alpha: f64, spec: &QuadratureSpec) -> Result<EntropyReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Rényi order must lie strictly in (0, 1); got {alpha} (orders above 1 are not supported)"
        )));
    }
    check_kind(kind)?;
    report(kind, Some(alpha), |k| renyi_parts(model, k, alpha, spec))
}

/// `Σ_r ∫ f_(d_r) log(f_(d_r)/g)` for one cycle, `g = f` when `reference` is `None`.
fn kl_parts(model: &Model, kind: DesignKind, reference: Option<&Model>, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if let Some(g) = reference {
        let (lo, hi) = model.support();
        let (glo, ghi) = g.support();
        if glo > lo || ghi < hi {
            return Err(Error::InvalidParameter(format!(
                "reference support ({glo}, {ghi}) does not cover ({lo}, {hi})"
            )));
        }
    }
    tilts(kind)?
        .iter()
        .map(|t| {
            tilt_integral(
                t,
                |u, c| match reference {
                    None => c.ln(),
                    Some(g) => {
                        let x = model.quantile_unchecked(u);
                        model.ln_pdf(x) + c.ln() - g.ln_pdf(x)
                    }
                },
                spec,
            )
            .map_err(|e| divergent(e, "Kullback–Leibler"))
        })
        .collect()
}

/// `K(L_pros, L_srs) = Σ_r ∫ f_(d_r) log(f_(d_r)/f)` for one cycle of PROS(n, S).
pub fn kl_pros_srs(model: &Model, n: usize, set_size: usize, spec: &QuadratureSpec) -> Result<f64> {
    let kind = DesignKind::Pros { n, set_size };
    check_kind(kind)?;
    Ok(kl_parts(model, kind, None, spec)?.iter().sum::<f64>().max(0.0))
}

/// The chain `K(srs, g) ≤ K(pros, g) ≤ (1/m)·K(rss_S, g)` against a second density `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlChain {
    pub srs: f64,
    pub pros: f64,
    pub rss_bound: f64,
}

impl KlChain {
    pub fn holds(&self, slack: f64) -> bool {
        self.srs <= self.pros + slack && self.pros <= self.rss_bound + slack
    }
}

pub fn kl_chain(model: &Model, reference: &Model, n: usize, set_size: usize, spec: &QuadratureSpec) -> Result<KlChain> {
    check_kind(DesignKind::Pros { n, set_size })?;
    let sum = |k| -> Result<f64> { Ok(kl_parts(model, k, Some(reference), spec)?.iter().sum()) };
    let m = (set_size / n) as f64;
    Ok(KlChain {
        srs: sum(DesignKind::Srs { n: 1 })? * n as f64,
        pros: sum(DesignKind::Pros { n, set_size })?,
        rss_bound: sum(DesignKind::Rss { set_size })? / m,
    })
}

/// A second density for [`kl_chain`]: the model shifted left by half a
/// scale unit, or for the uniform family stretched to `[lo − w/4, lo + 5w/4]`,
/// so that its support covers the model's.
pub fn shifted_reference(model: &Model) -> Result<Model> {
    let (Some(mu), Some(sigma)) = (model.param(Param::Location), model.param(Param::Scale)) else {
        return Err(Error::InvalidParameter(format!(
            "no shifted reference for the {} family",
            model.family()
        )));
    };
    let (mu, sigma) = match model.family() {
        Family::Uniform => (mu - 0.25 * sigma, 1.5 * sigma),
        _ => (mu - 0.5 * sigma, sigma),
    };
    Model::new(
        model.family(),
        &[(Param::Location, mu), (Param::Scale, sigma)],
        &[],
    )
}
