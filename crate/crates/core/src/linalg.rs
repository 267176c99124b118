//! Dense least squares via Householder QR with column pivoting.

use crate::error::{Error, Result};

/// Relative threshold on the pivoted `R` diagonal below which the design is
/// treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Wraps column-major `data`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows} x {cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `self * v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &c) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.column(j)) {
                *o += x * c;
            }
        }
        out
    }
}

/// Solution of `min ||y - X b||^2`.
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub coeffs: Vec<f64>,
    /// False when the numerical rank is below the column count.
    pub rank_ok: bool,
    pub rank: usize,
    /// Residual sum of squares at `coeffs`.
    pub rss: f64,
    /// Householder factors, column-major `m x n`; the strict upper
    /// triangle of the pivoted `R` sits above the diagonal.
    qr: Vec<f64>,
    rows: usize,
    /// Diagonal of the pivoted `R`.
    diag: Vec<f64>,
    perm: Vec<usize>,
}

impl LsSolution {
    /// `(X'X)^{-1}` in the original column order, column-major. `None` when
    /// rank deficient.
    pub fn xtx_inverse(&self) -> Option<Vec<f64>> {
        if !self.rank_ok {
            return None;
        }
        let n = self.perm.len();
        let m = self.rows;
        let r = |i: usize, j: usize| if i == j { self.diag[j] } else { self.qr[j * m + i] };
        // R^{-1}, upper triangular
        let mut rinv = vec![0.0; n * n];
        for j in 0..n {
            rinv[j * n + j] = 1.0 / r(j, j);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in i + 1..=j {
                    s += r(i, k) * rinv[j * n + k];
                }
                rinv[j * n + i] = -s / r(i, i);
            }
        }
        // (R^{-1} R^{-T}) in pivoted order, then un-permute.
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for k in b..n {
                    s += rinv[k * n + a] * rinv[k * n + b];
                }
                let (pa, pb) = (self.perm[a], self.perm[b]);
                out[pb * n + pa] = s;
                out[pa * n + pb] = s;
            }
        }
        Some(out)
    }
}

/// Dot product with four partial sums (lets the compiler vectorise).
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Least squares by pivoted Householder QR. Rank is judged by
/// `|R_kk| > RANK_TOL * |R_00|`; on deficiency the trailing pivoted
/// coefficients are set to zero.
pub fn ls_solve(x: &Matrix, y: &[f64]) -> Result<LsSolution> {
    check_dims(x, y)?;
    let mut sol = factor_solve(x.data.clone(), x.rows, x.cols, y.to_vec());
    if !sol.rank_ok {
        let fitted = x.mul_vec(&sol.coeffs);
        sol.rss = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    }
    Ok(sol)
}

/// As [`ls_solve`], reusing the buffers of `x` and `y`, and failing with
/// [`Error::Singular`] on rank deficiency.
pub fn ls_solve_full_rank(x: Matrix, y: Vec<f64>) -> Result<LsSolution> {
    check_dims(&x, &y)?;
    let sol = factor_solve(x.data, x.rows, x.cols, y);
    if sol.rank_ok {
        Ok(sol)
    } else {
        Err(Error::Singular)
    }
}

fn check_dims(x: &Matrix, y: &[f64]) -> Result<()> {
    let (m, n) = (x.rows(), x.cols());
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "design has {m} rows, response has {}",
            y.len()
        )));
    }
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "design has fewer rows ({m}) than columns ({n})"
        )));
    }
    Ok(())
}

/// Factors `a` (column-major `m x n`) in place and solves against `qty`.
/// `rss` is only valid at full rank.
fn factor_solve(mut a: Vec<f64>, m: usize, n: usize, mut qty: Vec<f64>) -> LsSolution {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag = vec![0.0; n];
    let mut col_norm2: Vec<f64> = (0..n)
        .map(|j| a[j * m..(j + 1) * m].iter().map(|v| v * v).sum())
        .collect();

    for k in 0..n {
        // Pivot on the largest remaining column norm.
        let mut p = k;
        for j in k + 1..n {
            if col_norm2[j] > col_norm2[p] {
                p = j;
            }
        }
        if p != k {
            let (lo, hi) = a.split_at_mut(p * m);
            lo[k * m..(k + 1) * m].swap_with_slice(&mut hi[..m]);
            col_norm2.swap(k, p);
            perm.swap(k, p);
        }

        let col = &a[k * m + k..(k + 1) * m];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        // v = col - alpha e1, stored in place
        a[k * m + k] -= alpha;
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let v = &head[k * m + k..];
        let vnorm2 = dot(v, v);
        if vnorm2 > 0.0 {
            for cj in tail.chunks_exact_mut(m) {
                let cj = &mut cj[k..];
                let f = 2.0 * dot(v, cj) / vnorm2;
                cj.iter_mut().zip(v).for_each(|(q, p)| *q -= f * p);
            }
            let qk = &mut qty[k..];
            let f = 2.0 * dot(v, qk) / vnorm2;
            qk.iter_mut().zip(v).for_each(|(q, p)| *q -= f * p);
        }
        diag[k] = alpha;
        for j in k + 1..n {
            let top = a[j * m + k];
            col_norm2[j] = (col_norm2[j] - top * top).max(0.0);
            // Downdating loses accuracy; recompute when it has cancelled badly.
            if col_norm2[j] < 1e-8 * norm * norm {
                col_norm2[j] = a[j * m + k + 1..(j + 1) * m].iter().map(|v| v * v).sum();
            }
        }
    }

    let lead = diag.first().map_or(0.0, |d| d.abs());
    let rank = if lead == 0.0 {
        0
    } else {
        diag.iter()
            .take_while(|d| d.abs() > RANK_TOL * lead)
            .count()
    };

    let rss = qty[n..].iter().map(|v| v * v).sum();
    // back substitution into qty[..rank]
    for i in (0..rank).rev() {
        let mut s = qty[i];
        for j in i + 1..rank {
            s -= a[j * m + i] * qty[j];
        }
        qty[i] = s / diag[i];
    }
    let mut coeffs = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate().take(rank) {
        coeffs[p] = qty[k];
    }

    LsSolution {
        coeffs,
        rank_ok: rank == n,
        rank,
        rss,
        qr: a,
        rows: m,
        diag,
        perm,
    }
}
