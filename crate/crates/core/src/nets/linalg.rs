//! Row-major matrix type and the elementary operations the networks need,
//! including the feature-wise modulation and factored low-rank update
//! primitives.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// y = Aᵀ x.
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    /// self += scale · a bᵀ (outer product accumulate).
    pub fn add_outer(&mut self, a: &[f64], b: &[f64], scale: f64) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for i in 0..self.rows {
            let ai = scale * a[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                row[j] += ai * b[j];
            }
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn gaussian<R: Rng>(rows: usize, cols: usize, sd: f64, rng: &mut R) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for v in &mut m.data {
            let n: f64 = rng.sample(StandardNormal);
            *v = sd * n;
        }
        m
    }

    /// Orthogonal initialization: QR of a Gaussian matrix with the sign fix,
    /// scaled by `gain`. For wide matrices the transpose is orthogonalized.
    pub fn orthogonal<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Self {
        let transpose = rows < cols;
        let (r, c) = if transpose { (cols, rows) } else { (rows, cols) };
        // Gram-Schmidt on the columns of an r×c Gaussian (r ≥ c).
        let g = Matrix::gaussian(r, c, 1.0, rng);
        let mut q = vec![vec![0.0; r]; c];
        for j in 0..c {
            let mut v: Vec<f64> = (0..r).map(|i| g.get(i, j)).collect();
            for k in 0..j {
                let dot: f64 = (0..r).map(|i| q[k][i] * g.get(i, j)).sum();
                for i in 0..r {
                    v[i] -= dot * q[k][i];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
            for i in 0..r {
                q[j][i] = v[i] * inv;
            }
            // Sign convention from the R diagonal.
            let diag: f64 = (0..r).map(|i| q[j][i] * g.get(i, j)).sum();
            if diag < 0.0 {
                for i in 0..r {
                    q[j][i] = -q[j][i];
                }
            }
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = if transpose { q[i][j] } else { q[j][i] };
                m.set(i, j, gain * v);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Feature-wise modulation of a pre-activation vector:
/// (1 + 0.1·scale_raw) ⊙ z + 0.1·shift_raw. The caller applies the
/// activation afterwards.
pub fn film_modulate(preact: &[f64], scale_raw: &[f64], shift_raw: &[f64]) -> Result<Vec<f64>> {
    if preact.len() != scale_raw.len() || preact.len() != shift_raw.len() {
        return Err(Error::ShapeMismatch {
            op: "film_modulate",
            detail: format!(
                "preact {} scale {} shift {}",
                preact.len(),
                scale_raw.len(),
                shift_raw.len()
            ),
        });
    }
    Ok(preact
        .iter()
        .zip(scale_raw)
        .zip(shift_raw)
        .map(|((z, s), t)| (1.0 + 0.1 * s) * z + 0.1 * t)
        .collect())
}

/// Factored low-rank adapted product:
/// W·h + (1/n_r)·U·(r ⊙ (Vᵀ·h)), without materializing the dense update.
pub fn lora_apply(
    w: &Matrix,
    u: &Matrix,
    v: &Matrix,
    r: &[f64],
    h: &[f64],
) -> Result<Vec<f64>> {
    if w.cols != h.len() || v.rows != h.len() || u.cols != r.len() || v.cols != r.len() {
        return Err(Error::ShapeMismatch {
            op: "lora_apply",
            detail: format!(
                "w {}x{} u {}x{} v {}x{} r {} h {}",
                w.rows,
                w.cols,
                u.rows,
                u.cols,
                v.rows,
                v.cols,
                r.len(),
                h.len()
            ),
        });
    }
    let n_r = r.len() as f64;
    let mut c = v.t_matvec(h);
    for (ci, ri) in c.iter_mut().zip(r) {
        *ci *= ri;
    }
    let mut out = w.matvec(h);
    let update = u.matvec(&c);
    for (o, upd) in out.iter_mut().zip(update) {
        *o += upd / n_r;
    }
    Ok(out)
}
