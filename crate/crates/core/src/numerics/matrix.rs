//! Symmetric information matrices of dimension one to three.

use std::fmt;

use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-12;

/// A symmetric, non-negative-diagonal `p×p` Fisher-information matrix, `p ∈ {1,2,3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    p: usize,
    data: [[f64; 3]; 3],
}

fn check_dim(p: usize) -> Result<()> {
    if (1..=3).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "information matrices have dimension 1 to 3, got {p}"
        )))
    }
}

impl InfoMatrix {
    /// Builds from row-major entries, checking symmetry and the diagonal.
    pub fn new(p: usize, entries: &[f64]) -> Result<Self> {
        check_dim(p)?;
        if entries.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: entries.len(),
            });
        }
        let mut data = [[0.0; 3]; 3];
        for i in 0..p {
            for j in 0..p {
                data[i][j] = entries[i * p + j];
            }
        }
        let scale = entries.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        for i in 0..p {
            if !(data[i][i] >= -SYM_TOL * scale) {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is {} (must be non-negative)",
                    data[i][i]
                )));
            }
            for j in 0..i {
                if (data[i][j] - data[j][i]).abs() > SYM_TOL * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                let avg = 0.5 * (data[i][j] + data[j][i]);
                data[i][j] = avg;
                data[j][i] = avg;
            }
        }
        Ok(Self { p, data })
    }

    /// Builds from the upper triangle, mirroring it; the caller guarantees
    /// non-negative definiteness up to rounding.
    pub(crate) fn from_upper(p: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = [[0.0; 3]; 3];
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                data[i][j] = v;
                data[j][i] = v;
            }
            data[i][i] = data[i][i].max(0.0);
        }
        Self { p, data }
    }

    pub fn zeros(p: usize) -> Result<Self> {
        check_dim(p)?;
        Ok(Self {
            p,
            data: [[0.0; 3]; 3],
        })
    }

    pub fn identity(p: usize) -> Result<Self> {
        Self::diag(&vec![1.0; p])
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let p = values.len();
        let mut entries = vec![0.0; p * p];
        for (i, v) in values.iter().enumerate() {
            entries[i * p + i] = *v;
        }
        Self::new(p, &entries)
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i][j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p * self.p);
        for i in 0..self.p {
            out.extend_from_slice(&self.data[i][..self.p]);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_upper(self.p, |i, j| factor * self.data[i][j])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self::from_upper(self.p, |i, j| self.data[i][j] + other.data[i][j]))
    }

    pub fn det(&self) -> f64 {
        det_small(self)
    }

    /// Smallest eigenvalue of `self − other`; non-negative iff `self ≥ other`
    /// in the Loewner order.
    pub fn loewner_gap(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        let mut d = [[0.0; 3]; 3];
        for i in 0..self.p {
            for j in 0..self.p {
                d[i][j] = self.data[i][j] - other.data[i][j];
            }
        }
        Ok(min_eigenvalue(self.p, &d))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self.p, &self.data)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = if self.p == other.p { 0.0 } else { f64::INFINITY };
        for i in 0..self.p.min(other.p) {
            for j in 0..self.p.min(other.p) {
                worst = worst.max((self.data[i][j] - other.data[i][j]).abs());
            }
        }
        worst
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.p,
                found: other.p,
            })
        }
    }
}

impl fmt::Display for InfoMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.p {
            let row: Vec<String> = (0..self.p).map(|j| format!("{:.6}", self.data[i][j])).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Closed-form determinant for `p ≤ 3`.
pub fn det_small(m: &InfoMatrix) -> f64 {
    let a = &m.data;
    match m.p {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

fn min_eigenvalue(p: usize, a: &[[f64; 3]; 3]) -> f64 {
    match p {
        1 => a[0][0],
        2 => {
            let mean = 0.5 * (a[0][0] + a[1][1]);
            let half = 0.5 * (a[0][0] - a[1][1]);
            mean - (half * half + a[0][1] * a[0][1]).sqrt()
        }
        _ => {
            // Trigonometric solution of the characteristic cubic.
            let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
            let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
            if p1 == 0.0 {
                return a[0][0].min(a[1][1]).min(a[2][2]);
            }
            let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2)
                + 2.0 * p1;
            let pp = (p2 / 6.0).sqrt();
            let mut b = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / pp;
                }
            }
            let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            let r = (det_b / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            q + 2.0 * pp * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
        }
    }
}
