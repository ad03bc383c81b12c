/*
Copyright 2026 The proxsplit Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Linear operators with adjoints, including the difference operators used
//! by total variation. Squared operator norms are estimated by power
//! iteration.
//!
//! Images are vectorized column-major: pixel `(i, j)` of an `n x m` image
//! (row `i`, column `j`) lives at index `i + j * n`.

use crate::error::{check_len, Error, Result};
use crate::vecops::{dot, norm, scale};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("dense matrix dimensions must be positive"));
        }
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len("DenseMatrix::from_rows", cols, r.len())?;
            data.extend_from_slice(r);
        }
        DenseMatrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing and no stored value is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` entries. Duplicates are
    /// summed; entries that end up exactly zero are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("sparse matrix dimensions must be positive"));
        }
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::param(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            per_row[r].push((c, v));
        }
        Ok(Self::from_row_lists(cols, per_row))
    }

    /// Builds a matrix from one `(col, value)` list per row.
    pub(crate) fn from_row_lists(cols: usize, mut per_row: Vec<Vec<(usize, f64)>>) -> Self {
        let rows = per_row.len();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for entries in per_row.iter_mut() {
            entries.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < entries.len() {
                let c = entries[k].0;
                let mut v = 0.0;
                while k < entries.len() && entries[k].0 == c {
                    v += entries[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.indptr[r]..self.indptr[r + 1];
            *o = self.indices[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    fn mul_t_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let span = self.indptr[r]..self.indptr[r + 1];
            for (&c, &v) in self.indices[span.clone()].iter().zip(&self.values[span]) {
                out[c] += v * yr;
            }
        }
    }
}

/// A bounded linear map between real coordinate spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    Identity(usize),
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
    /// `outer ∘ inner`
    Composition {
        outer: Box<LinearOperator>,
        inner: Box<LinearOperator>,
    },
    Scaled {
        factor: f64,
        op: Box<LinearOperator>,
    },
}

impl LinearOperator {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::dim("identity", 1, 0));
        }
        Ok(LinearOperator::Identity(n))
    }

    /// The `rows x cols` zero map (a sparse matrix with no entries).
    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Ok(LinearOperator::Sparse(CsrMatrix::from_triplets(rows, cols, &[])?))
    }

    pub fn compose(outer: LinearOperator, inner: LinearOperator) -> Result<Self> {
        check_len("compose", outer.cols(), inner.rows())?;
        Ok(LinearOperator::Composition {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    pub fn scaled(factor: f64, op: LinearOperator) -> Result<Self> {
        if !factor.is_finite() {
            return Err(Error::param("operator scale factor must be finite"));
        }
        Ok(LinearOperator::Scaled {
            factor,
            op: Box::new(op),
        })
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearOperator::Identity(n) => *n,
            LinearOperator::Dense(m) => m.rows,
            LinearOperator::Sparse(m) => m.rows,
            LinearOperator::Composition { outer, .. } => outer.rows(),
            LinearOperator::Scaled { op, .. } => op.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearOperator::Identity(n) => *n,
            LinearOperator::Dense(m) => m.cols,
            LinearOperator::Sparse(m) => m.cols,
            LinearOperator::Composition { inner, .. } => inner.cols(),
            LinearOperator::Scaled { op, .. } => op.cols(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("apply (input)", self.cols(), x.len())?;
        check_len("apply (output)", self.rows(), out.len())?;
        self.forward(x, out);
        Ok(())
    }

    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols()];
        self.adjoint_into(y, &mut out)?;
        Ok(out)
    }

    pub fn adjoint_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("adjoint_apply (input)", self.rows(), y.len())?;
        check_len("adjoint_apply (output)", self.cols(), out.len())?;
        self.backward(y, out);
        Ok(())
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        match self {
            LinearOperator::Identity(_) => out.copy_from_slice(x),
            LinearOperator::Dense(m) => {
                for (r, o) in out.iter_mut().enumerate() {
                    *o = dot(m.row(r), x);
                }
            }
            LinearOperator::Sparse(m) => m.mul_into(x, out),
            LinearOperator::Composition { outer, inner } => {
                let mut mid = vec![0.0; inner.rows()];
                inner.forward(x, &mut mid);
                outer.forward(&mid, out);
            }
            LinearOperator::Scaled { factor, op } => {
                op.forward(x, out);
                scale(*factor, out);
            }
        }
    }

    fn backward(&self, y: &[f64], out: &mut [f64]) {
        match self {
            LinearOperator::Identity(_) => out.copy_from_slice(y),
            LinearOperator::Dense(m) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (r, &yr) in y.iter().enumerate() {
                    for (o, a) in out.iter_mut().zip(m.row(r)) {
                        *o += a * yr;
                    }
                }
            }
            LinearOperator::Sparse(m) => m.mul_t_into(y, out),
            LinearOperator::Composition { outer, inner } => {
                let mut mid = vec![0.0; outer.cols()];
                outer.backward(y, &mut mid);
                inner.backward(&mid, out);
            }
            LinearOperator::Scaled { factor, op } => {
                op.backward(y, out);
                scale(*factor, out);
            }
        }
    }

    /// Materializes the operator column by column.
    pub fn to_dense(&self) -> DenseMatrix {
        let (rows, cols) = (self.rows(), self.cols());
        let mut data = vec![0.0; rows * cols];
        let mut e = vec![0.0; cols];
        let mut col = vec![0.0; rows];
        for c in 0..cols {
            e[c] = 1.0;
            self.forward(&e, &mut col);
            e[c] = 0.0;
            for r in 0..rows {
                data[r * cols + c] = col[r];
            }
        }
        DenseMatrix { rows, cols, data }
    }
}

/// Forward differences with a reflexive boundary: row `i < n-1` is
/// `x[i+1] - x[i]`, the last row is zero.
pub fn first_difference(n: usize) -> Result<LinearOperator> {
    if n == 0 {
        return Err(Error::dim("first_difference", 1, 0));
    }
    let rows = (0..n)
        .map(|i| {
            if i + 1 < n {
                vec![(i, -1.0), (i + 1, 1.0)]
            } else {
                Vec::new()
            }
        })
        .collect();
    Ok(LinearOperator::Sparse(CsrMatrix::from_row_lists(n, rows)))
}

/// Discrete gradient of an `n x m` column-major image, `D = [I_m ⊗ B_n; B_m ⊗ I_n]`.
///
/// The first `nm` outputs are vertical differences `u(i+1, j) - u(i, j)`,
/// the next `nm` horizontal differences `u(i, j+1) - u(i, j)`; both blocks
/// are indexed by pixel, so output `k` and `nm + k` belong to the same pixel.
pub fn tv_gradient(n: usize, m: usize) -> Result<LinearOperator> {
    if n == 0 || m == 0 {
        return Err(Error::dim("tv_gradient", 1, 0));
    }
    let nm = n * m;
    let mut rows = Vec::with_capacity(2 * nm);
    for j in 0..m {
        for i in 0..n {
            let k = i + j * n;
            rows.push(if i + 1 < n {
                vec![(k, -1.0), (k + 1, 1.0)]
            } else {
                Vec::new()
            });
        }
    }
    for j in 0..m {
        for i in 0..n {
            let k = i + j * n;
            rows.push(if j + 1 < m {
                vec![(k, -1.0), (k + n, 1.0)]
            } else {
                Vec::new()
            });
        }
    }
    Ok(LinearOperator::Sparse(CsrMatrix::from_row_lists(nm, rows)))
}

fn image_differences(u: &[f64], n: usize, m: usize) -> Result<impl Iterator<Item = (f64, f64)> + '_> {
    if n == 0 || m == 0 {
        return Err(Error::dim("total variation", 1, 0));
    }
    check_len("total variation", n * m, u.len())?;
    Ok((0..m).flat_map(move |j| {
        (0..n).map(move |i| {
            let here = u[i + j * n];
            let dx = if j + 1 < m { u[i + (j + 1) * n] - here } else { 0.0 };
            let dy = if i + 1 < n { u[i + 1 + j * n] - here } else { 0.0 };
            (dx, dy)
        })
    }))
}

/// Anisotropic total variation of an `n x m` image.
pub fn atv(u: &[f64], n: usize, m: usize) -> Result<f64> {
    Ok(image_differences(u, n, m)?
        .map(|(dx, dy)| dx.abs() + dy.abs())
        .sum())
}

/// Isotropic total variation of an `n x m` image.
pub fn itv(u: &[f64], n: usize, m: usize) -> Result<f64> {
    Ok(image_differences(u, n, m)?.map(|(dx, dy)| dx.hypot(dy)).sum())
}

/// Deterministic non-constant start vector, used when the all-ones seed
/// lies in the null space.
fn perturbed_seed(n: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * GOLDEN).fract() - 0.5)
        .collect()
}

/// Estimates `‖B‖² = λ_max(BᵀB)` by power iteration on `BᵀB`.
///
/// Starts from the normalized all-ones vector (perturbed deterministically
/// if `B` annihilates it). Stops once the change in the Rayleigh quotient,
/// together with the geometric extrapolation of the remaining changes, is
/// below `tol / 100` relative to the current estimate, or after `max_iter`
/// steps. The extrapolation underestimates while several modes still
/// compete, hence the margin. The zero operator yields 0.
pub fn op_norm_sq(op: &LinearOperator, tol: f64, max_iter: usize) -> f64 {
    let (rows, cols) = (op.rows(), op.cols());
    let mut v = vec![1.0; cols];
    let mut bv = vec![0.0; rows];
    let mut w = vec![0.0; cols];

    let unit = |v: &mut Vec<f64>| {
        let nv = norm(v);
        scale(1.0 / nv, v);
    };
    unit(&mut v);
    op.forward(&v, &mut bv);
    if norm(&bv) == 0.0 {
        v = perturbed_seed(cols);
        unit(&mut v);
        op.forward(&v, &mut bv);
        if norm(&bv) == 0.0 {
            return 0.0;
        }
    }

    let target = 0.01 * tol;
    let mut estimate = dot(&bv, &bv);
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iter {
        op.backward(&bv, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return estimate;
        }
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / nw);
        op.forward(&v, &mut bv);
        let next = dot(&bv, &bv);
        let step = (next - estimate).abs();
        estimate = next;

        // Rayleigh quotients increase geometrically toward λ_max; bound the
        // remaining gap by the tail of that series.
        let ratio = if last_step.is_finite() && last_step > 0.0 {
            step / last_step
        } else {
            0.0
        };
        let tail = if ratio < 1.0 {
            step * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        last_step = step;
        if step == 0.0 || (step < target * estimate && tail < target * estimate) {
            break;
        }
    }
    estimate
}

/// `op_norm_sq` inflated by `1 + 10 tol`; the value every step-size rule uses.
pub fn op_norm_sq_bound(op: &LinearOperator, tol: f64, max_iter: usize) -> f64 {
    op_norm_sq(op, tol, max_iter) * (1.0 + 10.0 * tol)
}

/// Tolerance and iteration cap used for every norm bound computed inside the crate.
pub const NORM_TOL: f64 = 1e-8;
pub const NORM_MAX_ITER: usize = 200_000;
