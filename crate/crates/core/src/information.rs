//! Fisher information of SRS, RSS and PROS samples, perfect or imperfect,
//! balanced or unbalanced, and the relative efficiencies built on it.

use rand_chacha::ChaCha8Rng;

use crate::densities::Tilt;
use crate::designs::{make_balanced_design, Design, MisplacementMatrix, UnbalancedDesign};
use crate::error::{Error, Result};
use crate::models::{expectation_vec, integrate_expectation, upper_to_matrix, Family, Model, Param};
use crate::numerics::montecarlo::column_estimates;
use crate::numerics::{integrate_unit_vec, mc_samples, InfoMatrix, MCEstimate, QuadratureSpec};
use crate::sampling::{draw_measured_unit, draw_order_statistic};

/// Number of batches used for batch-means errors of derived quantities.
pub const MC_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadrature" | "quad" => Ok(Method::Quadrature),
            "mc" | "monte-carlo" | "montecarlo" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected quadrature or mc)"
            ))),
        }
    }
}

/// Replication settings for simulated information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            reps: 50_000,
            seed: 20240101,
            workers: 0,
        }
    }
}

/// An information matrix with its provenance and, when simulated, per-entry
/// standard errors and batch means.
#[derive(Debug, Clone, PartialEq)]
pub struct FIResult {
    pub matrix: InfoMatrix,
    pub method: Method,
    /// Row-major `p×p` estimates when simulated.
    pub entry_errors: Option<Vec<MCEstimate>>,
    /// Matrices from disjoint replicate batches (simulated results only).
    pub batches: Vec<InfoMatrix>,
    pub design: String,
    pub model: String,
}

impl FIResult {
    fn exact(matrix: InfoMatrix, design: String, model: &Model) -> Self {
        Self {
            matrix,
            method: Method::Quadrature,
            entry_errors: None,
            batches: Vec::new(),
            design,
            model: model.to_string(),
        }
    }

    /// Same result with every matrix scaled by `factor` (independent cycles add).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.matrix = self.matrix.scaled(factor);
        out.batches = self.batches.iter().map(|m| m.scaled(factor)).collect();
        if let Some(e) = &mut out.entry_errors {
            for v in e.iter_mut() {
                v.value *= factor;
                v.std_error *= factor.abs();
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        self.matrix.det()
    }
}

/// `E[D_θF D_θFᵀ / (F·F̄)]`, the per-pair building block of `𝕂` and `ℍ`.
pub fn k_unit(model: &Model, spec: &QuadratureSpec) -> Result<InfoMatrix> {
    let p = model.dim();
    let v = expectation_vec(
        model,
        p * (p + 1) / 2,
        |x, u, out| {
            let mut d = [0.0; 3];
            model.score_cdf_into(x, &mut d[..p]);
            let w = 1.0 / (u * (1.0 - u));
            let mut k = 0;
            for i in 0..p {
                for j in i..p {
                    out[k] = d[i] * d[j] * w;
                    k += 1;
                }
            }
        },
        spec,
    )?;
    Ok(upper_to_matrix(p, &v))
}

/// `𝕂 = n(S−1)·E[D_θF D_θFᵀ/(F F̄)]`.
pub fn k_matrix(model: &Model, n: usize, set_size: usize, spec: &QuadratureSpec) -> Result<InfoMatrix> {
    if n == 0 || set_size == 0 {
        return Err(Error::InvalidDesign("n and S must be positive".into()));
    }
    if set_size == 1 {
        return InfoMatrix::zeros(model.dim());
    }
    Ok(k_unit(model, spec)?.scaled((n * (set_size - 1)) as f64))
}

/// `ℍ = n(S−n)·E[D_θF D_θFᵀ/(F F̄)]`.
pub fn h_matrix(model: &Model, n: usize, set_size: usize, spec: &QuadratureSpec) -> Result<InfoMatrix> {
    if set_size < n {
        return Err(Error::InvalidDesign(format!(
            "set size {set_size} is smaller than the subset count {n}"
        )));
    }
    if set_size == n {
        return InfoMatrix::zeros(model.dim());
    }
    Ok(k_unit(model, spec)?.scaled((n * (set_size - n)) as f64))
}

/// `N·n·𝕀₁`, the SRS information of `N·n` observations.
pub fn fi_srs(model: &Model, size: usize, spec: &QuadratureSpec) -> Result<InfoMatrix> {
    Ok(model.fisher_srs_unit(spec)?.scaled(size as f64))
}

/// Complete-data PROS information `N(n·𝕀₁ + 𝕂)`.
pub fn fi_pros_complete(model: &Model, n: usize, set_size: usize, cycles: usize, spec: &QuadratureSpec) -> Result<FIResult> {
    let design = make_balanced_design(set_size, n, cycles)?;
    let unit = model.fisher_srs_unit(spec)?;
    let k = k_matrix(model, n, set_size, spec)?;
    let m = unit.scaled(n as f64).add(&k)?.scaled(cycles as f64);
    Ok(FIResult::exact(m, format!("PROS(n={n},S={set_size},N={cycles}) {design}"), model))
}

/// Complete RSS information with set size `n`.
pub fn fi_rss_complete(model: &Model, n: usize, cycles: usize, spec: &QuadratureSpec) -> Result<FIResult> {
    fi_pros_complete(model, n, n, cycles, spec)
}

/// Complete-data information computed directly from the order-statistic
/// scores, without the `𝕀₁ + 𝕂` decomposition.
pub fn fi_pros_complete_direct(model: &Model, design: &Design, spec: &QuadratureSpec) -> Result<InfoMatrix> {
    let p = model.dim();
    let s = design.set_size();
    let mut total = InfoMatrix::zeros(p)?;
    for d in design.subsets() {
        for &u in d {
            let k = (u - 1) as f64;
            let l = (s - u) as f64;
            let lnc = crate::densities::ln_binom(s - 1, u - 1) + (s as f64).ln();
            let v = integrate_unit_vec(
                |q, out| {
                    let x = model.quantile_unchecked(q);
                    let qb = 1.0 - q;
                    let dens = (lnc + k * q.ln() + l * qb.ln()).exp();
                    let mut sc = [0.0; 3];
                    let mut df = [0.0; 3];
                    model.score_ln_pdf_into(x, &mut sc[..p]);
                    model.score_cdf_into(x, &mut df[..p]);
                    let c = k / q - l / qb;
                    for i in 0..p {
                        sc[i] += c * df[i];
                    }
                    let mut idx = 0;
                    for i in 0..p {
                        for j in i..p {
                            out[idx] = dens * sc[i] * sc[j];
                            idx += 1;
                        }
                    }
                },
                p * (p + 1) / 2,
                spec,
            )?;
            total = total.add(&upper_to_matrix(p, &v).scaled(1.0 / d.len() as f64))?;
        }
    }
    Ok(total.scaled(design.cycles() as f64))
}

/// One measured unit: the cycle's design, its misplacement matrix and the subset.
#[derive(Debug, Clone)]
struct Slot {
    design: Design,
    alpha: Option<MisplacementMatrix>,
    r: usize,
    tilt: Tilt,
}

fn balanced_slots(design: &Design, alpha: Option<&MisplacementMatrix>) -> Result<Vec<Slot>> {
    (0..design.n())
        .map(|r| {
            Ok(Slot {
                design: design.with_cycles(1)?,
                alpha: alpha.cloned(),
                r,
                tilt: Tilt::new(design, alpha, r)?,
            })
        })
        .collect()
}

fn unbalanced_slots(ud: &UnbalancedDesign, alphas: &[Option<MisplacementMatrix>]) -> Result<Vec<Slot>> {
    if !alphas.is_empty() && alphas.len() != ud.cycles().len() {
        return Err(Error::DimensionMismatch {
            expected: ud.cycles().len(),
            found: alphas.len(),
        });
    }
    let mut out = Vec::new();
    for (i, c) in ud.cycles().iter().enumerate() {
        let a = alphas.get(i).cloned().flatten();
        out.extend(balanced_slots(c, a.as_ref())?);
    }
    Ok(out)
}

/// `Σ_slots E_{f·g}[(s + g'/g·D_θF)(…)ᵀ]` on the quantile domain.
fn marginal_quadrature(model: &Model, slots: &[Slot], spec: &QuadratureSpec) -> Result<InfoMatrix> {
    let p = model.dim();
    let dim = p * (p + 1) / 2;
    let v = integrate_unit_vec(
        |u, out| {
            let x = model.quantile_unchecked(u);
            let mut sc = [0.0; 3];
            let mut df = [0.0; 3];
            model.score_ln_pdf_into(x, &mut sc[..p]);
            model.score_cdf_into(x, &mut df[..p]);
            out.iter_mut().for_each(|o| *o = 0.0);
            for slot in slots {
                let (g, dg) = slot.tilt.eval(u, 1.0 - u);
                if g <= 0.0 {
                    continue;
                }
                let mut v = [0.0; 3];
                for i in 0..p {
                    v[i] = sc[i] + dg / g * df[i];
                }
                let mut k = 0;
                for i in 0..p {
                    for j in i..p {
                        out[k] += g * v[i] * v[j];
                        k += 1;
                    }
                }
            }
        },
        dim,
        spec,
    )?;
    Ok(upper_to_matrix(p, &v))
}

/// Central-difference Hessian of `ℓ(θ)` around the model's active values.
struct HessianStencil {
    p: usize,
    steps: Vec<f64>,
    center: Model,
    plus: Vec<Model>,
    minus: Vec<Model>,
    cross: Vec<[Model; 4]>,
}

impl HessianStencil {
    fn new(model: &Model) -> Result<Self> {
        let p = model.dim();
        let theta = model.active_values();
        let steps: Vec<f64> = model.active_scales().iter().map(|s| 1e-4 * s).collect();
        let shifted = |deltas: &[(usize, f64)]| -> Result<Model> {
            let mut t = theta.clone();
            for &(i, d) in deltas {
                t[i] += d;
            }
            model.with_active_values(&t)
        };
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for i in 0..p {
            plus.push(shifted(&[(i, steps[i])])?);
            minus.push(shifted(&[(i, -steps[i])])?);
        }
        let mut cross = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                let (hi, hj) = (steps[i], steps[j]);
                cross.push([
                    shifted(&[(i, hi), (j, hj)])?,
                    shifted(&[(i, hi), (j, -hj)])?,
                    shifted(&[(i, -hi), (j, hj)])?,
                    shifted(&[(i, -hi), (j, -hj)])?,
                ]);
            }
        }
        Ok(Self {
            p,
            steps,
            center: model.clone(),
            plus,
            minus,
            cross,
        })
    }

    /// Adds `−∇²ℓ` (upper triangle, row-major packed) into `out`.
    fn accumulate_neg_hessian(&self, ell: impl Fn(&Model) -> f64, out: &mut [f64]) {
        let p = self.p;
        let c = ell(&self.center);
        let mut k = 0;
        let mut pair = 0;
        for i in 0..p {
            for j in i..p {
                let v = if i == j {
                    (ell(&self.plus[i]) - 2.0 * c + ell(&self.minus[i])) / (self.steps[i] * self.steps[i])
                } else {
                    let m = &self.cross[pair];
                    pair += 1;
                    (ell(&m[0]) - ell(&m[1]) - ell(&m[2]) + ell(&m[3])) / (4.0 * self.steps[i] * self.steps[j])
                };
                out[k] -= v;
                k += 1;
            }
        }
    }
}

/// Turns packed per-replicate upper triangles into an [`FIResult`].
fn mc_result(p: usize, values: &[f64], reps: usize, factor: f64, design: String, model: &Model) -> Result<FIResult> {
    let dim = p * (p + 1) / 2;
    let est = column_estimates(values, dim)?;
    let upper: Vec<f64> = est.iter().map(|e| e.value).collect();
    let matrix = upper_to_matrix(p, &upper).scaled(factor);
    let batches = (0..MC_BATCHES.min(reps))
        .map(|b| {
            let size = reps / MC_BATCHES.min(reps);
            let start = b * size;
            let end = if b + 1 == MC_BATCHES.min(reps) { reps } else { start + size };
            let mut acc = vec![0.0; dim];
            for row in values[start * dim..end * dim].chunks(dim) {
                acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
            }
            let n = (end - start) as f64;
            upper_to_matrix(p, &acc.iter().map(|a| a / n).collect::<Vec<_>>()).scaled(factor)
        })
        .collect();
    let mut full = Vec::with_capacity(p * p);
    let mut idx = [[0usize; 3]; 3];
    let mut k = 0;
    for i in 0..p {
        for j in i..p {
            idx[i][j] = k;
            idx[j][i] = k;
            k += 1;
        }
    }
    for i in 0..p {
        for j in 0..p {
            let e = est[idx[i][j]];
            full.push(MCEstimate {
                value: e.value * factor,
                std_error: e.std_error * factor.abs(),
                replications: e.replications,
            });
        }
    }
    Ok(FIResult {
        matrix,
        method: Method::MonteCarlo,
        entry_errors: Some(full),
        batches,
        design,
        model: model.to_string(),
    })
}

fn marginal_mc(model: &Model, slots: &[Slot], mc: &McConfig) -> Result<Vec<f64>> {
    let p = model.dim();
    let stencil = HessianStencil::new(model)?;
    mc_samples(
        |_, rng: &mut ChaCha8Rng, out| {
            for slot in slots {
                let (x, _) = draw_measured_unit(model, &slot.design, slot.alpha.as_ref(), slot.r, rng);
                stencil.accumulate_neg_hessian(
                    |m| {
                        let g = slot.tilt.value(m.cdf(x), m.sf(x));
                        m.ln_pdf(x) + g.ln()
                    },
                    out,
                );
            }
        },
        p * (p + 1) / 2,
        mc.reps,
        mc.seed,
        mc.workers,
    )
}

/// Marginal (measured values only) PROS information, perfect when `alpha` is `None`.
pub fn fi_pros_marginal(
    model: &Model,
    design: &Design,
    alpha: Option<&MisplacementMatrix>,
    method: Method,
    mc: &McConfig,
    spec: &QuadratureSpec,
) -> Result<FIResult> {
    let slots = balanced_slots(design, alpha)?;
    let label = format!(
        "PROS(n={},S={},N={}) {design}",
        design.n(),
        design.set_size(),
        design.cycles()
    );
    let cycles = design.cycles() as f64;
    match method {
        Method::Quadrature => Ok(FIResult::exact(
            marginal_quadrature(model, &slots, spec)?.scaled(cycles),
            label,
            model,
        )),
        Method::MonteCarlo => {
            let values = marginal_mc(model, &slots, mc)?;
            mc_result(model.dim(), &values, mc.reps, cycles, label, model)
        }
    }
}

/// Marginal RSS information of set size `n` under the same kind of misplacement.
pub fn fi_rss_marginal(
    model: &Model,
    n: usize,
    cycles: usize,
    alpha: Option<&MisplacementMatrix>,
    method: Method,
    mc: &McConfig,
    spec: &QuadratureSpec,
) -> Result<FIResult> {
    fi_pros_marginal(model, &make_balanced_design(n, n, cycles)?, alpha, method, mc, spec)
}

/// Unbalanced PROS information: the exact sum of per-unit marginal
/// informations `E[(∂ log f g_{ri})(∂ log f g_{ri})ᵀ]`.
pub fn fi_unbalanced(
    model: &Model,
    ud: &UnbalancedDesign,
    alphas: &[Option<MisplacementMatrix>],
    method: Method,
    mc: &McConfig,
    spec: &QuadratureSpec,
) -> Result<FIResult> {
    let slots = unbalanced_slots(ud, alphas)?;
    let parts: Vec<String> = ud.cycles().iter().map(|c| c.to_string()).collect();
    let label = format!("unbalanced(S={},K={}) {}", ud.set_size(), ud.total_size(), parts.join(";"));
    match method {
        Method::Quadrature => Ok(FIResult::exact(marginal_quadrature(model, &slots, spec)?, label, model)),
        Method::MonteCarlo => {
            let values = marginal_mc(model, &slots, mc)?;
            mc_result(model.dim(), &values, mc.reps, 1.0, label, model)
        }
    }
}

/// Simulated complete-data information: `−E[∇² log f^{(u:S)}(X)]` with the
/// latent rank `u` drawn uniformly inside each subset.
pub fn fi_complete_mc(model: &Model, design: &Design, mc: &McConfig) -> Result<FIResult> {
    let p = model.dim();
    let s = design.set_size();
    let stencil = HessianStencil::new(model)?;
    let values = mc_samples(
        |_, rng: &mut ChaCha8Rng, out| {
            for r in 0..design.n() {
                let (x, u) = draw_measured_unit(model, design, None, r, rng);
                let (k, l) = ((u - 1) as f64, (s - u) as f64);
                stencil.accumulate_neg_hessian(
                    |m| {
                        let mut v = m.ln_pdf(x);
                        if k > 0.0 {
                            v += k * m.cdf(x).ln();
                        }
                        if l > 0.0 {
                            v += l * m.sf(x).ln();
                        }
                        v
                    },
                    out,
                );
            }
        },
        p * (p + 1) / 2,
        mc.reps,
        mc.seed,
        mc.workers,
    )?;
    mc_result(
        p,
        &values,
        mc.reps,
        design.cycles() as f64,
        format!("complete PROS(n={},S={}) {design}", design.n(), s),
        model,
    )
}

/// `det(a) / det(b)`.
pub fn relative_efficiency(a: &InfoMatrix, b: &InfoMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: a.dim(),
        });
    }
    let db = b.det();
    if !(db > 0.0) {
        return Err(Error::Singular(db));
    }
    Ok(a.det() / db)
}

/// Relative efficiency with a batch-means standard error when either side is simulated.
pub fn relative_efficiency_with_error(a: &FIResult, b: &FIResult) -> Result<MCEstimate> {
    let value = relative_efficiency(&a.matrix, &b.matrix)?;
    let nb = a.batches.len().max(b.batches.len());
    if nb < 2 {
        return Ok(MCEstimate {
            value,
            std_error: 0.0,
            replications: 1,
        });
    }
    let pick = |r: &FIResult, i: usize| -> InfoMatrix {
        if r.batches.is_empty() {
            r.matrix.clone()
        } else {
            r.batches[i % r.batches.len()].clone()
        }
    };
    let ratios = (0..nb)
        .map(|i| relative_efficiency(&pick(a, i), &pick(b, i)))
        .collect::<Result<Vec<_>>>()?;
    let est = MCEstimate::from_values(&ratios)?;
    Ok(MCEstimate {
        value,
        std_error: est.std_error,
        replications: a
            .entry_errors
            .as_ref()
            .or(b.entry_errors.as_ref())
            .map_or(nb, |e| e[0].replications),
    })
}

/// `(𝕀_srs, 𝕂)` for the simple regression `Y = β₀ + β₁x + σε` with a PROS
/// sample of `n` units at each centred covariate value, `θ = (β₀, β₁, σ)`.
pub fn regression_fi(
    noise: &Model,
    covariates: &[f64],
    n: usize,
    set_size: usize,
    spec: &QuadratureSpec,
) -> Result<(InfoMatrix, InfoMatrix)> {
    if !matches!(noise.family(), Family::Normal | Family::Logistic) {
        return Err(Error::InvalidParameter(format!(
            "regression noise must be a symmetric location-scale family, got {}",
            noise.family()
        )));
    }
    if covariates.is_empty() || n == 0 || set_size == 0 {
        return Err(Error::InvalidParameter("need covariates, n ≥ 1 and S ≥ 1".into()));
    }
    let mean = covariates.iter().sum::<f64>() / covariates.len() as f64;
    let spread = covariates.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    if mean.abs() > 1e-9 * spread {
        return Err(Error::InvalidParameter(format!(
            "covariates must be centred (mean {mean}); subtract the mean first"
        )));
    }
    let ls = noise.with_active(&[Param::Location, Param::Scale])?;
    let unit = ls.fisher_srs_unit(spec)?;
    let ku = k_unit(&ls, spec)?;
    let map = |m: &InfoMatrix, weight: f64| -> InfoMatrix {
        let mut acc = [[0.0; 3]; 3];
        for &x in covariates {
            let j = [[1.0, x, 0.0], [0.0, 0.0, 1.0]];
            for a in 0..3 {
                for b in 0..3 {
                    let mut v = 0.0;
                    for r in 0..2 {
                        for c in 0..2 {
                            v += j[r][a] * m.get(r, c) * j[c][b];
                        }
                    }
                    acc[a][b] += weight * v;
                }
            }
        }
        InfoMatrix::from_upper(3, |a, b| acc[a][b])
    };
    let srs = map(&unit, n as f64);
    let k = map(&ku, (n * (set_size - 1)) as f64);
    Ok((srs, k))
}

/// Both sides of the expectation identity
/// `E[Σ_r Σ_{u∈d_r} φ_u(λ) δ(u) G(Y_r) / (λ + (1−2λ)F(Y_r))] = n(S−1)E[G(X)]`,
/// estimated for `λ = 0` and `λ = 1` from complete PROS data.
pub fn verify_lemma_identity<G>(
    model: &Model,
    design: &Design,
    g: G,
    mc: &McConfig,
    spec: &QuadratureSpec,
) -> Result<(MCEstimate, MCEstimate)>
where
    G: Fn(f64) -> f64 + Sync,
{
    integrate_expectation(model, |x| g(x).abs(), spec).map_err(|e| match e {
        Error::NonConvergence { .. } | Error::NonFinite { .. } => {
            Error::Divergent("E|G(X)| does not exist for this model".into())
        }
        other => other,
    })?;
    let s = design.set_size();
    let values = mc_samples(
        |_, rng: &mut ChaCha8Rng, out| {
            for r in 0..design.n() {
                let d = design.subset(r);
                let u = d[rand::Rng::random_range(rng, 0..d.len())];
                let y = draw_order_statistic(model, u, s, rng);
                let gy = g(y);
                if u > 1 {
                    out[0] += (u - 1) as f64 * gy / model.cdf(y);
                }
                if u < s {
                    out[1] += (s - u) as f64 * gy / model.sf(y);
                }
            }
        },
        2,
        mc.reps,
        mc.seed,
        mc.workers,
    )?;
    let est = column_estimates(&values, 2)?;
    let scale = design.cycles() as f64;
    let scaled = |e: MCEstimate| MCEstimate {
        value: e.value * scale,
        std_error: e.std_error * scale,
        replications: e.replications,
    };
    Ok((scaled(est[0]), scaled(est[1])))
}

/// Polynomial coefficients `c₁, c₂` with `det(𝕀₁ + t𝕂̃)/det(𝕀₁) = 1 + c₁t + c₂t²`
/// (`𝕂̃` = [`k_unit`]), plus the raw `det(𝕀₁ + t𝕂̃)` coefficients `d₀, d₁, d₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPolynomial {
    pub c1: f64,
    pub c2: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl EfficiencyPolynomial {
    /// Complete-data `RE₁` at set size `S`.
    pub fn re1(&self, set_size: usize) -> f64 {
        let t = set_size as f64 - 1.0;
        1.0 + self.c1 * t + self.c2 * t * t
    }

    /// Complete-data `RE₂` of PROS(n, S) against RSS of set size `n`.
    pub fn re2(&self, n: usize, set_size: usize) -> f64 {
        self.re1(set_size) / self.re1(n)
    }
}

pub fn efficiency_polynomial(model: &Model, spec: &QuadratureSpec) -> Result<EfficiencyPolynomial> {
    let i1 = model.fisher_srs_unit(spec)?;
    let k = k_unit(model, spec)?;
    let (d0, d1, d2) = match model.dim() {
        1 => (i1.get(0, 0), k.get(0, 0), 0.0),
        2 => {
            let (a, b, c) = (i1.get(0, 0), i1.get(0, 1), i1.get(1, 1));
            let (p, q, r) = (k.get(0, 0), k.get(0, 1), k.get(1, 1));
            (a * c - b * b, a * r + c * p - 2.0 * b * q, p * r - q * q)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "efficiency polynomials are defined for one or two parameters".into(),
            ))
        }
    };
    Ok(EfficiencyPolynomial {
        c1: d1 / d0,
        c2: d2 / d0,
        d0,
        d1,
        d2,
    })
}
