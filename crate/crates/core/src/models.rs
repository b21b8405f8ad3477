//! Parametric families: density, distribution function, quantile, and the
//! parameter derivatives of the distribution function.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::{integrate_unit_vec, InfoMatrix, QuadratureSpec};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Exponential,
    Logistic,
    /// Gumbel distribution of the minimum.
    ExtremeValue,
    Gamma,
    Uniform,
    /// `π·h·e^{−hx} + (1−π)·e^{−x}` on `x ≥ 0`.
    ExpMixture,
}

/// Role of a parameter inside its family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Location,
    Scale,
    Shape,
    Weight,
    Ratio,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Location => "mu",
            Param::Scale => "sigma",
            Param::Shape => "shape",
            Param::Weight => "pi",
            Param::Ratio => "h",
        }
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mu" | "location" => Ok(Param::Location),
            "sigma" | "scale" => Ok(Param::Scale),
            "shape" | "k" => Ok(Param::Shape),
            "pi" | "weight" => Ok(Param::Weight),
            "h" | "ratio" => Ok(Param::Ratio),
            other => Err(Error::InvalidParameter(format!("unknown parameter '{other}'"))),
        }
    }
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Normal,
        Family::Exponential,
        Family::Logistic,
        Family::ExtremeValue,
        Family::Gamma,
        Family::Uniform,
        Family::ExpMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Exponential => "exponential",
            Family::Logistic => "logistic",
            Family::ExtremeValue => "extreme-value",
            Family::Gamma => "gamma",
            Family::Uniform => "uniform",
            Family::ExpMixture => "exp-mixture",
        }
    }

    /// Parameter roles in storage order.
    pub fn roles(self) -> [Param; 2] {
        match self {
            Family::Gamma => [Param::Shape, Param::Scale],
            Family::ExpMixture => [Param::Weight, Param::Ratio],
            _ => [Param::Location, Param::Scale],
        }
    }

    fn defaults(self) -> [f64; 2] {
        match self {
            Family::Gamma => [2.0, 1.0],
            Family::ExpMixture => [0.3, 1.0 / 3.0],
            _ => [0.0, 1.0],
        }
    }

    /// Roles that may be declared unknown.
    pub fn activatable(self) -> &'static [Param] {
        match self {
            Family::Normal | Family::Logistic | Family::ExtremeValue => {
                &[Param::Location, Param::Scale]
            }
            Family::Exponential | Family::Gamma | Family::Uniform => &[Param::Scale],
            Family::ExpMixture => &[Param::Weight, Param::Ratio],
        }
    }

    fn is_location_scale(self) -> bool {
        !matches!(self, Family::Gamma | Family::ExpMixture)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Family::Normal),
            "exponential" | "exp" => Ok(Family::Exponential),
            "logistic" => Ok(Family::Logistic),
            "extreme-value" | "extreme_value" | "gumbel" | "ev" => Ok(Family::ExtremeValue),
            "gamma" => Ok(Family::Gamma),
            "uniform" => Ok(Family::Uniform),
            "exp-mixture" | "exp_mixture" | "mixture" => Ok(Family::ExpMixture),
            other => Err(Error::InvalidParameter(format!(
                "unknown family '{other}' (expected one of: {})",
                Family::ALL.map(|f| f.name()).join(", ")
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Derivatives of `F(x; θ)` with respect to the active parameters.
pub type ScoreVector = Vec<f64>;

/// A parametrised distribution with a declared set of unknown parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    family: Family,
    params: [f64; 2],
    active: Vec<usize>,
}

impl Model {
    /// Builds a model; unspecified parameters take family defaults and an
    /// empty `active` list activates every activatable role.
    pub fn new(family: Family, params: &[(Param, f64)], active: &[Param]) -> Result<Self> {
        let roles = family.roles();
        let mut values = family.defaults();
        for (role, v) in params {
            let idx = roles.iter().position(|r| r == role).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "family {family} has no parameter '{}'",
                    role.name()
                ))
            })?;
            values[idx] = *v;
        }
        let wanted: Vec<Param> = if active.is_empty() {
            family.activatable().to_vec()
        } else {
            active.to_vec()
        };
        let mut idx = Vec::new();
        for role in &wanted {
            if !family.activatable().contains(role) {
                return Err(Error::InvalidParameter(format!(
                    "parameter '{}' of family {family} cannot be active",
                    role.name()
                )));
            }
            let i = roles.iter().position(|r| r == role).unwrap_or(0);
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        idx.sort_unstable();
        let model = Self {
            family,
            params: values,
            active: idx,
        };
        model.validate()?;
        Ok(model)
    }

    /// Family defaults with every activatable parameter active.
    pub fn standard(family: Family) -> Self {
        Self::new(family, &[], &[]).expect("defaults are valid")
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(
            Family::Normal,
            &[(Param::Location, mu), (Param::Scale, sigma)],
            &[],
        )
    }

    pub fn exponential(sigma: f64) -> Result<Self> {
        Self::new(Family::Exponential, &[(Param::Scale, sigma)], &[])
    }

    pub fn uniform(lo: f64, width: f64) -> Result<Self> {
        Self::new(
            Family::Uniform,
            &[(Param::Location, lo), (Param::Scale, width)],
            &[],
        )
    }

    pub fn exp_mixture(pi: f64, h: f64) -> Result<Self> {
        Self::new(
            Family::ExpMixture,
            &[(Param::Weight, pi), (Param::Ratio, h)],
            &[],
        )
    }

    /// Parses `role=value` pairs and an active list such as `mu,sigma`.
    pub fn parse(family: &str, params: &str, active: &str) -> Result<Self> {
        let family: Family = family.parse()?;
        let mut pairs = Vec::new();
        let mut offset = 0;
        for piece in params.split(',') {
            let trimmed = piece.trim();
            if !trimmed.is_empty() {
                let (k, v) = trimmed
                    .split_once('=')
                    .ok_or_else(|| Error::parse(offset, format!("expected role=value, got '{trimmed}'")))?;
                let role: Param = k.parse().map_err(|_| {
                    Error::parse(offset, format!("unknown parameter '{}'", k.trim()))
                })?;
                let value = parse_number(v.trim())
                    .ok_or_else(|| Error::parse(offset + k.len() + 1, format!("bad number '{}'", v.trim())))?;
                pairs.push((role, value));
            }
            offset += piece.len() + 1;
        }
        let mut act = Vec::new();
        for name in active.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            act.push(name.parse::<Param>()?);
        }
        Self::new(family, &pairs, &act)
    }

    fn validate(&self) -> Result<()> {
        let [a, b] = self.params;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        match self.family {
            Family::Gamma => {
                if a <= 0.0 || b <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "gamma shape and scale must be positive".into(),
                    ));
                }
            }
            Family::ExpMixture => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::InvalidProbability(a));
                }
                if b <= 0.0 {
                    return Err(Error::InvalidParameter("mixture ratio h must be positive".into()));
                }
            }
            _ => {
                if b <= 0.0 {
                    return Err(Error::InvalidParameter("scale must be positive".into()));
                }
            }
        }
        if self.active.is_empty() {
            return Err(Error::InvalidParameter("at least one parameter must be active".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Value of a parameter role, if the family has it.
    pub fn param(&self, role: Param) -> Option<f64> {
        self.family
            .roles()
            .iter()
            .position(|r| *r == role)
            .map(|i| self.params[i])
    }

    /// Active roles in storage order.
    pub fn active(&self) -> Vec<Param> {
        let roles = self.family.roles();
        self.active.iter().map(|&i| roles[i]).collect()
    }

    /// Number of active parameters.
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn active_values(&self) -> Vec<f64> {
        self.active.iter().map(|&i| self.params[i]).collect()
    }

    /// Copy with the active parameters replaced.
    pub fn with_active_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        let mut m = self.clone();
        for (k, &i) in self.active.iter().enumerate() {
            m.params[i] = values[k];
        }
        m.validate()?;
        Ok(m)
    }

    /// Natural finite-difference scale of each active parameter.
    pub fn active_scales(&self) -> Vec<f64> {
        let roles = self.family.roles();
        self.active
            .iter()
            .map(|&i| match roles[i] {
                Param::Location => self.params[1],
                Param::Weight => self.params[i].min(1.0 - self.params[i]),
                _ => self.params[i].abs(),
            })
            .collect()
    }

    /// Same family and parameters with a different active set.
    pub fn with_active(&self, active: &[Param]) -> Result<Self> {
        let roles = self.family.roles();
        let pairs: Vec<(Param, f64)> = roles.iter().copied().zip(self.params).collect();
        Self::new(self.family, &pairs, active)
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        let [a, b] = self.params;
        match self.family {
            Family::Normal | Family::Logistic | Family::ExtremeValue => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Family::Exponential => (a, f64::INFINITY),
            Family::Uniform => (a, a + b),
            Family::Gamma | Family::ExpMixture => (0.0, f64::INFINITY),
        }
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.params[0]) / self.params[1]
    }

    /// `(pdf, cdf)` at `x`; outside the support the pdf is 0 and the cdf is clamped.
    pub fn evaluate(&self, x: f64) -> (f64, f64) {
        (self.pdf(x), self.cdf(x))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let lp = self.ln_pdf(x);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            lp.exp()
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let [a, b] = self.params;
        match self.family {
            Family::Normal => {
                let z = self.z(x);
                -0.5 * z * z - LN_SQRT_2PI - b.ln()
            }
            Family::Logistic => {
                let z = self.z(x).abs();
                -z - 2.0 * (-z).exp().ln_1p() - b.ln()
            }
            Family::ExtremeValue => {
                let z = self.z(x);
                z - z.exp() - b.ln()
            }
            Family::Exponential => {
                if x < a {
                    f64::NEG_INFINITY
                } else {
                    -self.z(x) - b.ln()
                }
            }
            Family::Uniform => {
                if x < a || x > a + b {
                    f64::NEG_INFINITY
                } else {
                    -b.ln()
                }
            }
            Family::Gamma => {
                if x < 0.0 || (x == 0.0 && a > 1.0) {
                    f64::NEG_INFINITY
                } else if x == 0.0 {
                    if a == 1.0 {
                        -b.ln()
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (a - 1.0) * x.ln() - x / b - ln_gamma(a) - a * b.ln()
                }
            }
            Family::ExpMixture => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    // Factor out the slower-decaying component for stability.
                    let (c1, r1, c2, r2) = (a * b, b, 1.0 - a, 1.0);
                    let (ch, rh, cl, rl) = if r1 <= r2 { (c1, r1, c2, r2) } else { (c2, r2, c1, r1) };
                    ch.ln() - rh * x + (cl / ch * (-(rl - rh) * x).exp()).ln_1p()
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Normal => 0.5 * erfc(-self.z(x) / std::f64::consts::SQRT_2),
            Family::Logistic => logistic(self.z(x)),
            Family::ExtremeValue => -(-self.z(x).exp()).exp_m1(),
            Family::Exponential => {
                if x <= a {
                    0.0
                } else {
                    -(-self.z(x)).exp_m1()
                }
            }
            Family::Uniform => ((x - a) / b).clamp(0.0, 1.0),
            Family::Gamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(a, x / b)
                }
            }
            Family::ExpMixture => {
                if x <= 0.0 {
                    0.0
                } else {
                    -a * (-b * x).exp_m1() - (1.0 - a) * (-x).exp_m1()
                }
            }
        }
    }

    /// Survival function `1 − F(x)`, computed without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Normal => 0.5 * erfc(self.z(x) / std::f64::consts::SQRT_2),
            Family::Logistic => logistic(-self.z(x)),
            Family::ExtremeValue => (-self.z(x).exp()).exp(),
            Family::Exponential => {
                if x <= a {
                    1.0
                } else {
                    (-self.z(x)).exp()
                }
            }
            Family::Uniform => ((a + b - x) / b).clamp(0.0, 1.0),
            Family::Gamma => {
                if x <= 0.0 {
                    1.0
                } else {
                    gamma_ur(a, x / b)
                }
            }
            Family::ExpMixture => {
                if x <= 0.0 {
                    1.0
                } else {
                    a * (-b * x).exp() + (1.0 - a) * (-x).exp()
                }
            }
        }
    }

    /// Inverse distribution function for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidProbability(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Normal => a - b * std::f64::consts::SQRT_2 * erfc_inv(2.0 * u),
            Family::Logistic => a + b * (u.ln() - (-u).ln_1p()),
            Family::ExtremeValue => a + b * (-(-u).ln_1p()).ln(),
            Family::Exponential => a - b * (-u).ln_1p(),
            Family::Uniform => a + b * u,
            Family::Gamma | Family::ExpMixture => self.solve_quantile(u),
        }
    }

    /// Safeguarded Newton iteration on the cdf (lower half) or survival function.
    fn solve_quantile(&self, u: f64) -> f64 {
        let lower = u <= 0.5;
        let target = if lower { u } else { 1.0 - u };
        let resid = |x: f64| if lower { self.cdf(x) - u } else { target - self.sf(x) };
        let (mut lo, mut hi) = (0.0_f64, self.mean().max(1e-3));
        while resid(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = resid(x);
            if r == 0.0 {
                return x;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let mut next = if d > 0.0 { x - r / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn mean(&self) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Normal | Family::Logistic => a,
            Family::ExtremeValue => a - EULER_GAMMA * b,
            Family::Exponential => a + b,
            Family::Uniform => a + 0.5 * b,
            Family::Gamma => a * b,
            Family::ExpMixture => a / b + (1.0 - a),
        }
    }

    pub fn std_dev(&self) -> f64 {
        let [a, b] = self.params;
        match self.family {
            Family::Normal => b,
            Family::Logistic => b * PI / 3f64.sqrt(),
            Family::ExtremeValue => b * PI / 6f64.sqrt(),
            Family::Exponential => b,
            Family::Uniform => b / 12f64.sqrt(),
            Family::Gamma => a.sqrt() * b,
            Family::ExpMixture => {
                let m2 = 2.0 * a / (b * b) + 2.0 * (1.0 - a);
                let m = self.mean();
                (m2 - m * m).sqrt()
            }
        }
    }

    /// `−g'(z)/g(z)` for the standardised location-scale density.
    fn psi(&self, z: f64) -> f64 {
        match self.family {
            Family::Normal => z,
            Family::Logistic => (0.5 * z).tanh(),
            Family::ExtremeValue => z.exp_m1(),
            Family::Exponential => 1.0,
            _ => 0.0,
        }
    }

    /// `∂F/∂θ` for the active parameters, written into `out`.
    pub fn score_cdf_into(&self, x: f64, out: &mut [f64]) {
        let [a, b] = self.params;
        let f = self.pdf(x);
        let roles = self.family.roles();
        for (k, &i) in self.active.iter().enumerate() {
            out[k] = match (self.family, roles[i]) {
                (fam, Param::Location) if fam.is_location_scale() => -f,
                (fam, Param::Scale) if fam.is_location_scale() => -self.z(x) * f,
                (Family::Gamma, Param::Scale) => -(x / b) * f,
                (Family::ExpMixture, Param::Weight) => {
                    if x <= 0.0 {
                        0.0
                    } else {
                        (-x).exp() - (-b * x).exp()
                    }
                }
                (Family::ExpMixture, Param::Ratio) => {
                    if x <= 0.0 {
                        0.0
                    } else {
                        a * x * (-b * x).exp()
                    }
                }
                _ => 0.0,
            };
        }
    }

    pub fn score_cdf(&self, x: f64) -> ScoreVector {
        let mut out = vec![0.0; self.dim()];
        self.score_cdf_into(x, &mut out);
        out
    }

    /// `∂ log f/∂θ` for the active parameters, written into `out`.
    pub fn score_ln_pdf_into(&self, x: f64, out: &mut [f64]) {
        let [a, b] = self.params;
        let roles = self.family.roles();
        for (k, &i) in self.active.iter().enumerate() {
            out[k] = match (self.family, roles[i]) {
                (fam, Param::Location) if fam.is_location_scale() => self.psi(self.z(x)) / b,
                (fam, Param::Scale) if fam.is_location_scale() => {
                    let z = self.z(x);
                    (z * self.psi(z) - 1.0) / b
                }
                (Family::Gamma, Param::Scale) => (x / b - a) / b,
                (Family::ExpMixture, Param::Weight) => {
                    let f = self.pdf(x);
                    (b * (-b * x).exp() - (-x).exp()) / f
                }
                (Family::ExpMixture, Param::Ratio) => {
                    let f = self.pdf(x);
                    a * (-b * x).exp() * (1.0 - b * x) / f
                }
                _ => 0.0,
            };
        }
    }

    pub fn score_ln_pdf(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.score_ln_pdf_into(x, &mut out);
        out
    }

    /// Per-observation Fisher information over the active parameters.
    pub fn fisher_srs_unit(&self, spec: &QuadratureSpec) -> Result<InfoMatrix> {
        let p = self.dim();
        let roles = self.active();
        let sigma = self.params[1];
        match self.family {
            Family::Normal => {
                return Ok(InfoMatrix::from_upper(p, |i, j| {
                    if i != j {
                        0.0
                    } else if roles[i] == Param::Location {
                        1.0 / (sigma * sigma)
                    } else {
                        2.0 / (sigma * sigma)
                    }
                }))
            }
            Family::Exponential => return InfoMatrix::new(1, &[1.0 / (sigma * sigma)]),
            Family::Uniform => {
                return Err(Error::Divergent(
                    "uniform scale information: the support depends on the parameter".into(),
                ))
            }
            _ => {}
        }
        let values = integrate_unit_vec(
            |u, out| {
                let x = self.quantile_unchecked(u);
                let mut s = [0.0; 3];
                self.score_ln_pdf_into(x, &mut s[..p]);
                let mut k = 0;
                for i in 0..p {
                    for j in i..p {
                        out[k] = s[i] * s[j];
                        k += 1;
                    }
                }
            },
            p * (p + 1) / 2,
            spec,
        )?;
        Ok(upper_to_matrix(p, &values))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let roles = self.family.roles();
        let params: Vec<String> = roles
            .iter()
            .zip(self.params)
            .map(|(r, v)| format!("{}={}", r.name(), v))
            .collect();
        let active: Vec<&str> = self.active().iter().map(|r| r.name()).collect();
        write!(f, "{}({}; active={})", self.family, params.join(","), active.join(","))
    }
}

pub(crate) fn upper_to_matrix(p: usize, upper: &[f64]) -> InfoMatrix {
    let mut idx = [[0usize; 3]; 3];
    let mut k = 0;
    for i in 0..p {
        for j in i..p {
            idx[i][j] = k;
            k += 1;
        }
    }
    InfoMatrix::from_upper(p, |i, j| upper[idx[i][j]])
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn parse_number(s: &str) -> Option<f64> {
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        return (d != 0.0).then_some(n / d);
    }
    s.parse().ok()
}

/// `E[h(X)] = ∫ h(x) f(x) dx`, evaluated on the quantile domain `u ∈ (ε, 1−ε)`.
pub fn integrate_expectation<H>(model: &Model, integrand: H, spec: &QuadratureSpec) -> Result<f64>
where
    H: Fn(f64) -> f64,
{
    expectation_vec(model, 1, |x, _u, out| out[0] = integrand(x), spec).map(|v| v[0])
}

/// Vector-valued expectation; the closure also receives `u = F(x)` exactly.
pub fn expectation_vec<H>(model: &Model, dim: usize, integrand: H, spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    H: Fn(f64, f64, &mut [f64]),
{
    integrate_unit_vec(
        |u, out| {
            let x = model.quantile_unchecked(u);
            integrand(x, u, out)
        },
        dim,
        spec,
    )
}
