//! Random SRS, RSS and PROS samples and the Dell–Clutter estimate of the
//! misplacement matrix.

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::designs::{sinkhorn, Design, MisplacementMatrix, UnbalancedDesign};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::{mc_samples, stream_rng};

/// Uniform draw on the open interval `(0, 1)`.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// One measured unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProsUnit {
    /// Cycle index (0-based).
    pub cycle: usize,
    /// Set index within the cycle (0-based).
    pub set: usize,
    /// Subset the unit was measured for (0-based).
    pub subset: usize,
    /// Subset the unit truly belongs to; differs from `subset` under misplacement.
    pub drawn_subset: usize,
    /// True rank of the unit within its set, `1..=S`.
    pub true_position: usize,
    pub value: f64,
}

/// All measured units of one PROS run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsSample {
    pub units: Vec<ProsUnit>,
}

impl ProsSample {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.value).collect()
    }

    /// CSV with header `cycle,set,subset,value,true_position` (1-based indices).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,set,subset,value,true_position\n");
        for u in &self.units {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                u.cycle + 1,
                u.set + 1,
                u.subset + 1,
                u.value,
                u.true_position
            ));
        }
        s
    }
}

/// `n` i.i.d. draws by inversion.
pub fn draw_srs(model: &Model, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..n).map(|_| model.quantile_unchecked(open_unit(&mut rng))).collect())
}

/// Picks the true subset for target `r` and a uniform position inside it.
fn pick_rank<R: RngCore + ?Sized>(design: &Design, alpha: Option<&MisplacementMatrix>, r: usize, rng: &mut R) -> (usize, usize) {
    let h = match alpha {
        None => r,
        Some(a) => {
            let v = open_unit(rng);
            let mut acc = 0.0;
            let mut chosen = design.n() - 1;
            for h in 0..design.n() {
                acc += a.get(r, h);
                if v < acc {
                    chosen = h;
                    break;
                }
            }
            // Never land on a zero-probability subset through rounding.
            while a.get(r, chosen) == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        }
    };
    let d = design.subset(h);
    let u = d[rng.random_range(0..d.len())];
    (h, u)
}

fn one_cycle<R: RngCore + ?Sized>(
    model: &Model,
    design: &Design,
    alpha: Option<&MisplacementMatrix>,
    cycle: usize,
    rng: &mut R,
    out: &mut Vec<ProsUnit>,
) {
    let s = design.set_size();
    let mut set = vec![0.0; s];
    for r in 0..design.n() {
        for v in set.iter_mut() {
            *v = model.quantile_unchecked(open_unit(rng));
        }
        set.sort_by(f64::total_cmp);
        let (h, u) = pick_rank(design, alpha, r, rng);
        out.push(ProsUnit {
            cycle,
            set: r,
            subset: r,
            drawn_subset: h,
            true_position: u,
            value: set[u - 1],
        });
    }
}

fn check_alpha(design: &Design, alpha: Option<&MisplacementMatrix>) -> Result<()> {
    if let Some(a) = alpha {
        if a.dim() != design.n() {
            return Err(Error::DimensionMismatch {
                expected: design.n(),
                found: a.dim(),
            });
        }
    }
    Ok(())
}

/// Balanced PROS sample: per set, `S` i.i.d. values are sorted and the unit
/// for subset `r` is taken from subset `h` with probability `α[r][h]`, then
/// uniformly among its positions. `alpha = None` is perfect subsetting.
pub fn draw_pros(model: &Model, design: &Design, alpha: Option<&MisplacementMatrix>, seed: u64) -> Result<ProsSample> {
    check_alpha(design, alpha)?;
    let mut rng = stream_rng(seed, 0);
    let mut units = Vec::with_capacity(design.sample_size());
    for i in 0..design.cycles() {
        one_cycle(model, design, alpha, i, &mut rng, &mut units);
    }
    Ok(ProsSample { units })
}

/// Unbalanced PROS sample following the diagonal measured-subset convention.
/// `alphas` holds one optional matrix per cycle (empty slice = all perfect).
pub fn draw_unbalanced_pros(
    model: &Model,
    ud: &UnbalancedDesign,
    alphas: &[Option<MisplacementMatrix>],
    seed: u64,
) -> Result<ProsSample> {
    if !alphas.is_empty() && alphas.len() != ud.cycles().len() {
        return Err(Error::DimensionMismatch {
            expected: ud.cycles().len(),
            found: alphas.len(),
        });
    }
    let mut rng = stream_rng(seed, 0);
    let mut units = Vec::with_capacity(ud.total_size());
    for (i, cycle) in ud.cycles().iter().enumerate() {
        let a = alphas.get(i).and_then(Option::as_ref);
        check_alpha(cycle, a)?;
        one_cycle(model, cycle, a, i, &mut rng, &mut units);
    }
    Ok(ProsSample { units })
}

/// Direct draw of the unit measured for subset `r`, using the order-statistic
/// representation `X = F⁻¹(B)`, `B ~ Beta(u, S−u+1)`. Returns `(value, rank)`.
pub fn draw_measured_unit<R: RngCore + ?Sized>(
    model: &Model,
    design: &Design,
    alpha: Option<&MisplacementMatrix>,
    r: usize,
    rng: &mut R,
) -> (f64, usize) {
    let (_, u) = pick_rank(design, alpha, r, rng);
    (draw_order_statistic(model, u, design.set_size(), rng), u)
}

/// `u`-th order statistic of `S` draws.
pub fn draw_order_statistic<R: RngCore + ?Sized>(model: &Model, u: usize, set_size: usize, rng: &mut R) -> f64 {
    let a = u as f64;
    let b = (set_size - u + 1) as f64;
    let p: f64 = if set_size == 1 {
        open_unit(rng)
    } else {
        Beta::new(a, b).expect("positive shape").sample(rng)
    };
    let p = p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    model.quantile_unchecked(p)
}

/// Stage-1 configuration of the Dell–Clutter ranking model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DellClutterConfig {
    pub rho: f64,
    /// Number of simulated sets.
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
}

impl DellClutterConfig {
    pub fn new(rho: f64, reps: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            rho,
            reps,
            seed,
            workers: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "Dell-Clutter correlation {} is outside [0, 1]",
                self.rho
            )));
        }
        if self.reps < 2 {
            return Err(Error::InvalidParameter("stage-1 needs at least two sets".into()));
        }
        Ok(())
    }
}

/// Per-set tallies `C[perceived subset][true subset]`, row-major `n×n` per set.
pub fn dell_clutter_counts(model: &Model, design: &Design, cfg: &DellClutterConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let s = design.set_size();
    let n = design.n();
    let subset_of: Vec<usize> = (1..=s).map(|u| design.subset_of_rank(u)).collect();
    let (mean, sd) = (model.mean(), model.std_dev());
    let noise = (1.0 - cfg.rho * cfg.rho).max(0.0).sqrt();
    mc_samples(
        |_, rng, out| {
            let mut x = vec![0.0; s];
            let mut w = vec![0.0; s];
            for k in 0..s {
                x[k] = model.quantile_unchecked(open_unit(rng));
                let e: f64 = StandardNormal.sample(rng);
                w[k] = cfg.rho * (x[k] - mean) / sd + noise * e;
            }
            let true_rank = ranks(&x);
            let perceived = ranks(&w);
            for k in 0..s {
                let r = subset_of[perceived[k] - 1];
                let h = subset_of[true_rank[k] - 1];
                out[r * n + h] += 1.0;
            }
        },
        n * n,
        cfg.reps,
        cfg.seed,
        cfg.workers,
    )
}

/// 1-based ranks, ties broken by index.
fn ranks(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = vec![0; v.len()];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank + 1;
    }
    out
}

/// Symmetrised, size-normalised misplacement matrix from summed tallies over `sets` sets.
pub fn alpha_from_counts(design: &Design, counts: &[f64], sets: usize) -> Result<MisplacementMatrix> {
    let n = design.n();
    let sizes = design.subset_sizes();
    let mut rows = vec![vec![0.0; n]; n];
    for r in 0..n {
        for h in 0..n {
            let sym = 0.5 * (counts[r * n + h] + counts[h * n + r]);
            rows[r][h] = sym / (sizes[r] * sets) as f64;
        }
    }
    if design.is_balanced() {
        sinkhorn(&mut rows, 100, 1e-10);
        // Clean rounding so validation sees exact stochastic rows.
        for row in rows.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        MisplacementMatrix::new(&rows)
    } else {
        MisplacementMatrix::with_sizes(&rows, &sizes)
    }
}

/// Stage 1: simulate `cfg.reps` sets ranked by `W = ρZ + √(1−ρ²)ε` and tally
/// perceived against true subsets over every unit of every set.
pub fn estimate_dell_clutter_alpha(model: &Model, design: &Design, cfg: &DellClutterConfig) -> Result<MisplacementMatrix> {
    let per_set = dell_clutter_counts(model, design, cfg)?;
    let n2 = design.n() * design.n();
    let mut total = vec![0.0; n2];
    for chunk in per_set.chunks(n2) {
        total.iter_mut().zip(chunk).for_each(|(t, c)| *t += c);
    }
    alpha_from_counts(design, &total, cfg.reps)
}

/// Misplacement matrices estimated from `batches` disjoint blocks of the same
/// stage-1 run, for batch-means standard errors of downstream quantities.
pub fn dell_clutter_batches(
    model: &Model,
    design: &Design,
    cfg: &DellClutterConfig,
    batches: usize,
) -> Result<(MisplacementMatrix, Vec<MisplacementMatrix>)> {
    let per_set = dell_clutter_counts(model, design, cfg)?;
    let n2 = design.n() * design.n();
    let batches = batches.clamp(1, cfg.reps);
    let per_batch = cfg.reps / batches;
    let mut total = vec![0.0; n2];
    let mut out = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut acc = vec![0.0; n2];
        let start = b * per_batch;
        let end = if b + 1 == batches { cfg.reps } else { start + per_batch };
        for chunk in per_set[start * n2..end * n2].chunks(n2) {
            acc.iter_mut().zip(chunk).for_each(|(t, c)| *t += c);
        }
        total.iter_mut().zip(&acc).for_each(|(t, c)| *t += c);
        out.push(alpha_from_counts(design, &acc, end - start)?);
    }
    Ok((alpha_from_counts(design, &total, cfg.reps)?, out))
}
