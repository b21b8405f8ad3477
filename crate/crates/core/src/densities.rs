//! Densities induced by a design: order statistics, subset marginals and the
//! misplacement tilt `g_r` with `f_[d_r] = f · g_r`.
//!
//! Subset and set indices are 0-based throughout the library; ranks `u` are
//! 1-based as in `1..=S`.

use statrs::function::gamma::ln_gamma;

use crate::designs::{Design, MisplacementMatrix, UnbalancedDesign};
use crate::error::{Error, Result};
use crate::models::Model;

pub fn ln_binom(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Bernstein basis polynomials of degree `d` at `(F, 1−F)`, written into `out[0..=d]`.
fn bernstein_into(d: usize, ln_c: &[f64], f: f64, fbar: f64, out: &mut [f64]) {
    if f <= 0.0 {
        out[..=d].iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        return;
    }
    if fbar <= 0.0 {
        out[..=d].iter_mut().for_each(|v| *v = 0.0);
        out[d] = 1.0;
        return;
    }
    let (lf, lb) = (f.ln(), fbar.ln());
    for k in 0..=d {
        out[k] = (ln_c[k] + k as f64 * lf + (d - k) as f64 * lb).exp();
    }
}

fn ln_binom_row(d: usize) -> Vec<f64> {
    (0..=d).map(|k| ln_binom(d, k)).collect()
}

/// `S·C(S−1,u−1)·F^{u−1}·(1−F)^{S−u}·f(x)`, evaluated in log space.
pub fn order_stat_pdf(model: &Model, u: usize, set_size: usize, x: f64) -> Result<f64> {
    if set_size == 0 || u == 0 || u > set_size {
        return Err(Error::InvalidDesign(format!(
            "rank {u} is outside 1..={set_size}"
        )));
    }
    let lf = model.ln_pdf(x);
    if lf == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let (f, fbar) = (model.cdf(x), model.sf(x));
    let k = u - 1;
    let d = set_size - 1;
    let mut lp = (set_size as f64).ln() + ln_binom(d, k) + lf;
    if k > 0 {
        if f <= 0.0 {
            return Ok(0.0);
        }
        lp += k as f64 * f.ln();
    }
    if d > k {
        if fbar <= 0.0 {
            return Ok(0.0);
        }
        lp += (d - k) as f64 * fbar.ln();
    }
    Ok(lp.exp())
}

/// The tilt `g(F) = Σ_u a_u C(S−1,u−1) F^{u−1}(1−F)^{S−u}` of one measured
/// subset, with its derivative in `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tilt {
    set_size: usize,
    coeffs: Vec<f64>,
    dcoeffs: Vec<f64>,
    ln_c: Vec<f64>,
    ln_c1: Vec<f64>,
}

impl Tilt {
    /// Tilt for subset `r` of `design` under misplacement `alpha`; `None` means perfect subsetting.
    pub fn new(design: &Design, alpha: Option<&MisplacementMatrix>, r: usize) -> Result<Self> {
        let n = design.n();
        if r >= n {
            return Err(Error::InvalidDesign(format!("subset index {r} is outside 0..{n}")));
        }
        if let Some(a) = alpha {
            if a.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.dim(),
                });
            }
        }
        let s = design.set_size();
        let mut coeffs = vec![0.0; s];
        for (h, d) in design.subsets().iter().enumerate() {
            let w = match alpha {
                Some(a) => a.get(r, h),
                None => {
                    if h == r {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            for &u in d {
                coeffs[u - 1] = w * s as f64 / d.len() as f64;
            }
        }
        Ok(Self::from_coeffs(coeffs))
    }

    fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let s = coeffs.len();
        let dcoeffs = (0..s.saturating_sub(1))
            .map(|k| (s - 1) as f64 * (coeffs[k + 1] - coeffs[k]))
            .collect();
        Self {
            set_size: s,
            ln_c: ln_binom_row(s - 1),
            ln_c1: ln_binom_row(s.saturating_sub(2)),
            coeffs,
            dcoeffs,
        }
    }

    /// Per-rank weights `a_u`, `u = 1..=S`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self, f: f64, fbar: f64) -> f64 {
        let mut buf = [0.0; 128];
        let d = self.set_size - 1;
        if d >= buf.len() {
            let mut v = vec![0.0; d + 1];
            bernstein_into(d, &self.ln_c, f, fbar, &mut v);
            return v.iter().zip(&self.coeffs).map(|(b, a)| a * b).sum();
        }
        bernstein_into(d, &self.ln_c, f, fbar, &mut buf);
        buf[..=d].iter().zip(&self.coeffs).map(|(b, a)| a * b).sum()
    }

    /// `dg/dF`.
    pub fn derivative(&self, f: f64, fbar: f64) -> f64 {
        if self.set_size < 2 {
            return 0.0;
        }
        let d = self.set_size - 2;
        let mut buf = [0.0; 128];
        if d >= buf.len() {
            let mut v = vec![0.0; d + 1];
            bernstein_into(d, &self.ln_c1, f, fbar, &mut v);
            return v.iter().zip(&self.dcoeffs).map(|(b, a)| a * b).sum();
        }
        bernstein_into(d, &self.ln_c1, f, fbar, &mut buf);
        buf[..=d].iter().zip(&self.dcoeffs).map(|(b, a)| a * b).sum()
    }

    /// `(g, dg/dF)` in one call.
    pub fn eval(&self, f: f64, fbar: f64) -> (f64, f64) {
        (self.value(f, fbar), self.derivative(f, fbar))
    }
}

/// `f_(d_r)(x) = (1/m) Σ_{u∈d_r} f^{(u:S)}(x)`.
pub fn subset_pdf(model: &Model, design: &Design, r: usize, x: f64) -> Result<f64> {
    let tilt = Tilt::new(design, None, r)?;
    Ok(model.pdf(x) * tilt.value(model.cdf(x), model.sf(x)))
}

/// `g_r(x)` for subset `r` under misplacement `alpha`.
pub fn g_factor(model: &Model, design: &Design, alpha: &MisplacementMatrix, r: usize, x: f64) -> Result<f64> {
    let tilt = Tilt::new(design, Some(alpha), r)?;
    Ok(tilt.value(model.cdf(x), model.sf(x)))
}

/// `f_[d_r](x) = f(x)·g_r(x)`.
pub fn imperfect_subset_pdf(
    model: &Model,
    design: &Design,
    alpha: &MisplacementMatrix,
    r: usize,
    x: f64,
) -> Result<f64> {
    Ok(model.pdf(x) * g_factor(model, design, alpha, r, x)?)
}

/// Density of the unit measured from set `r` of cycle `i`; `alpha_i = None`
/// means perfect subsetting in that cycle.
pub fn unbalanced_subset_pdf(
    model: &Model,
    ud: &UnbalancedDesign,
    r: usize,
    i: usize,
    alpha_i: Option<&MisplacementMatrix>,
    x: f64,
) -> Result<f64> {
    let cycle = ud.cycles().get(i).ok_or_else(|| {
        Error::InvalidDesign(format!("cycle index {i} is outside 0..{}", ud.cycles().len()))
    })?;
    let tilt = Tilt::new(cycle, alpha_i, r)?;
    Ok(model.pdf(x) * tilt.value(model.cdf(x), model.sf(x)))
}

/// Conditional distribution of the within-subset position given `x`, over `u ∈ d_r`.
pub fn latent_conditional(model: &Model, design: &Design, r: usize, x: f64) -> Result<Vec<f64>> {
    if r >= design.n() {
        return Err(Error::InvalidDesign(format!(
            "subset index {r} is outside 0..{}",
            design.n()
        )));
    }
    let (lo, hi) = model.support();
    if !(x >= lo && x <= hi) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} lies outside the support; the conditional is undefined"
        )));
    }
    let s = design.set_size();
    let d = s - 1;
    let mut b = vec![0.0; s];
    bernstein_into(d, &ln_binom_row(d), model.cdf(x), model.sf(x), &mut b);
    let w: Vec<f64> = design.subset(r).iter().map(|&u| b[u - 1]).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "all order-statistic densities vanish at x = {x}"
        )));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{make_balanced_design, make_symmetric_alpha};
    use crate::models::Family;
    use crate::numerics::{integrate_line_vec, QuadratureSpec};
    use proptest::prelude::*;

    fn unif() -> Model {
        Model::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn order_stat_examples() {
        assert!((order_stat_pdf(&unif(), 2, 3, 0.5).unwrap() - 1.5).abs() < 1e-14);
        let n = Model::normal(0.0, 1.0).unwrap();
        assert!((order_stat_pdf(&n, 1, 1, 0.7).unwrap() - n.pdf(0.7)).abs() < 1e-15);
        assert!((order_stat_pdf(&n, 1, 2, 0.0).unwrap() - 0.398942).abs() < 1e-6);
        assert!(order_stat_pdf(&n, 0, 2, 0.0).is_err());
        assert!(order_stat_pdf(&n, 3, 2, 0.0).is_err());
        // Large sets stay finite.
        let v = order_stat_pdf(&n, 32, 64, 0.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn subset_pdf_examples() {
        let n = Model::normal(0.0, 1.0).unwrap();
        let srs = make_balanced_design(5, 1, 1).unwrap();
        assert!((subset_pdf(&n, &srs, 0, 0.3).unwrap() - n.pdf(0.3)).abs() < 1e-14);
        let d22 = make_balanced_design(2, 2, 1).unwrap();
        assert!((subset_pdf(&unif(), &d22, 0, 0.25).unwrap() - 1.5).abs() < 1e-14);
        let d42 = make_balanced_design(4, 2, 1).unwrap();
        let mix = 0.5 * (subset_pdf(&unif(), &d42, 0, 0.3).unwrap() + subset_pdf(&unif(), &d42, 1, 0.3).unwrap());
        assert!((mix - 1.0).abs() < 1e-14);
    }

    #[test]
    fn g_factor_examples() {
        let n = Model::normal(0.0, 1.0).unwrap();
        let d = make_balanced_design(6, 3, 1).unwrap();
        let uni = MisplacementMatrix::uniform(3).unwrap();
        for r in 0..3 {
            assert!((g_factor(&n, &d, &uni, r, 0.4).unwrap() - 1.0).abs() < 1e-14);
        }
        let d22 = make_balanced_design(2, 2, 1).unwrap();
        let id = MisplacementMatrix::identity(2).unwrap();
        assert!((g_factor(&n, &d22, &id, 0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let a3 = make_symmetric_alpha(3, 0.7).unwrap();
        assert!(matches!(
            g_factor(&n, &d22, &a3, 0, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unbalanced_examples() {
        let ud = UnbalancedDesign::example();
        let v = unbalanced_subset_pdf(&unif(), &ud, 1, 1, None, 0.5).unwrap();
        // (1/4) Σ_{v=3..6} Beta(v, 7−v) density at 0.5.
        let oracle: f64 = (3..=6).map(|v| order_stat_pdf(&unif(), v, 6, 0.5).unwrap()).sum::<f64>() / 4.0;
        assert!((v - oracle).abs() < 1e-12);
        // 6·(10 + 10 + 5 + 1)/2⁵ / 4
        assert!((v - 1.21875).abs() < 1e-12);
        let n = Model::normal(0.0, 1.0).unwrap();
        let x = 0.37;
        // Random placement (probabilities proportional to subset sizes) collapses to f.
        let rand = MisplacementMatrix::random_placement(&[2, 4]).unwrap();
        let w = unbalanced_subset_pdf(&n, &ud, 1, 1, Some(&rand), x).unwrap();
        assert!((w - n.pdf(x)).abs() < 1e-12);
        assert!(unbalanced_subset_pdf(&n, &ud, 0, 2, None, x).is_err());
    }

    #[test]
    fn balanced_unbalanced_consistency() {
        let n = Model::normal(0.0, 1.0).unwrap();
        let d = make_balanced_design(6, 2, 1).unwrap();
        let ud = UnbalancedDesign::new(6, vec![d.subsets().to_vec()]).unwrap();
        for k in 0..20 {
            let x = -3.0 + 0.3 * k as f64;
            for r in 0..2 {
                let a = unbalanced_subset_pdf(&n, &ud, r, 0, None, x).unwrap();
                let b = subset_pdf(&n, &d, r, x).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn latent_conditional_examples() {
        let n = Model::normal(0.0, 1.0).unwrap();
        let rss = make_balanced_design(3, 3, 1).unwrap();
        assert_eq!(latent_conditional(&n, &rss, 1, 0.2).unwrap(), vec![1.0]);
        let d = make_balanced_design(2, 1, 1).unwrap();
        let p = latent_conditional(&unif(), &d, 0, 0.5).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let p = latent_conditional(&unif(), &d, 0, 0.25).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        assert!(latent_conditional(&unif(), &d, 0, 2.0).is_err());
    }

    #[test]
    fn subset_densities_integrate_to_one() {
        let spec = QuadratureSpec::default();
        for fam in [Family::Normal, Family::Exponential, Family::Logistic, Family::Uniform] {
            let m = Model::standard(fam);
            for (s, n) in [(6, 2), (6, 3), (12, 4)] {
                let d = make_balanced_design(s, n, 1).unwrap();
                let (lo, hi) = m.support();
                for r in 0..n {
                    let v = integrate_line_vec(|x, o| o[0] = subset_pdf(&m, &d, r, x).unwrap(), lo, hi, 1, &spec).unwrap()[0];
                    assert!((v - 1.0).abs() < 1e-8, "{fam} S={s} n={n} r={r}: {v}");
                }
            }
        }
    }

    #[test]
    fn tilt_derivative_matches_finite_difference() {
        let d = Design::new(6, vec![vec![1, 2], vec![3, 4, 5], vec![6]], 1).unwrap();
        let a = make_symmetric_alpha(3, 0.6).unwrap();
        for r in 0..3 {
            let t = Tilt::new(&d, Some(&a), r).unwrap();
            for k in 1..10 {
                let f = k as f64 / 10.0;
                let h = 1e-6;
                let fd = (t.value(f + h, 1.0 - f - h) - t.value(f - h, 1.0 - f + h)) / (2.0 * h);
                assert!((fd - t.derivative(f, 1.0 - f)).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn mixture_identity(s_idx in 0usize..5, u in 0.001f64..0.999, fam_idx in 0usize..4) {
            let (s, n) = [(2, 2), (4, 2), (6, 3), (12, 4), (12, 6)][s_idx];
            let fam = [Family::Normal, Family::Exponential, Family::Logistic, Family::Gamma][fam_idx];
            let m = Model::standard(fam);
            let x = m.quantile(u).unwrap();
            let d = make_balanced_design(s, n, 1).unwrap();
            let avg: f64 = (0..n).map(|r| subset_pdf(&m, &d, r, x).unwrap()).sum::<f64>() / n as f64;
            prop_assert!((avg - m.pdf(x)).abs() < 1e-10 * (1.0 + m.pdf(x)));
        }

        #[test]
        fn imperfect_mixture_identity(p in 0.0f64..=1.0, u in 0.001f64..0.999, n_idx in 0usize..3) {
            let (s, n) = [(6, 2), (6, 3), (12, 4)][n_idx];
            let m = Model::normal(0.0, 1.0).unwrap();
            let x = m.quantile(u).unwrap();
            let d = make_balanced_design(s, n, 1).unwrap();
            let a = make_symmetric_alpha(n, p).unwrap();
            let gs: f64 = (0..n).map(|r| g_factor(&m, &d, &a, r, x).unwrap()).sum();
            prop_assert!((gs - n as f64).abs() < 1e-10);
        }
    }
}
