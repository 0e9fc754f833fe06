//! Minimal sparse linear algebra: a CSR matrix and an envelope (skyline)
//! Cholesky factorization.
//!
//! Every system solved in this crate is symmetric positive definite with a
//! small profile (P1 operators on a structured grid in natural ordering, or
//! small dense Gram matrices), so a skyline factorization is all we need.

use crate::error::{check_dim, Error, Result};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut iter = row.into_iter().peekable();
            while let Some((j, mut v)) = iter.next() {
                while let Some(&(j2, v2)) = iter.peek() {
                    if j2 != j {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_dim(ncols, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.ncols, x.len())?;
        Ok((0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.nrows, x.len())?;
        let ay = self.mul_vec(y)?;
        Ok(dot(x, &ay))
    }

    /// Extracts the submatrix `A[rows, cols]`, renumbering both index sets
    /// in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for &i in rows {
            let mut row: Vec<(usize, f64)> = self
                .row(i)
                .filter_map(|(j, v)| {
                    let nj = col_map[j];
                    (nj != usize::MAX).then_some((nj, v))
                })
                .collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            indptr,
            indices,
            values,
        }
    }

    /// Largest relative deviation `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let vt = if j < self.nrows { self.get(j, i) } else { 0.0 };
                worst = worst.max((v - vt).abs());
            }
        }
        worst / scale
    }

    pub fn is_identity(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let mut row = self.row(i);
                matches!(row.next(), Some((j, v)) if j == i && v == 1.0) && row.next().is_none()
            })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }
}

/// Cholesky factor `A = L Lᵀ` stored by rows over the envelope of `A`.
#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    n: usize,
    /// First stored column of each row.
    first: Vec<usize>,
    /// Offset of `L[i, first[i]]` in `data`.
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factorizes the symmetric matrix `a`, reading only its lower triangle.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        check_dim(a.nrows(), a.ncols())?;
        let n = a.nrows();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        let mut offset = 0;
        for i in 0..n {
            let f = a.row(i).map(|(j, _)| j).find(|&j| j <= i).unwrap_or(i);
            first.push(f);
            start.push(offset);
            offset += i - f + 1;
        }
        start.push(offset);
        let mut data = vec![0.0; offset];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let row_i = &data[start[i] + k0 - fi..start[i] + j - fi];
                let row_j = &data[start[j] + k0 - fj..start[j] + j - fj];
                s -= dot(row_i, row_j);
                if j < i {
                    let diag = data[start[j + 1] - 1];
                    data[start[i] + j - fi] = s / diag;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Factorization(format!(
                            "non-positive pivot {s:e} at row {i}"
                        )));
                    }
                    data[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self {
            n,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, b.len())?;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s = dot(&row[..i - fi], &x[fi..i]);
            x[i] = (x[i] - s) / row[i - fi];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (k, l) in (fi..i).zip(row.iter()) {
                x[k] -= l * xi;
            }
        }
        Ok(x)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves a small dense system with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (t, s) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= factor * s;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn skyline_solves_tridiagonal() {
        let a = laplacian_1d(6);
        let chol = SkylineCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 1.0).collect();
        let b = a.mul_vec(&x_true).unwrap();
        let x = chol.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn skyline_handles_dense_and_gapped_profiles() {
        let dense = vec![
            vec![4.0, 1.0, 0.0, 0.5],
            vec![1.0, 3.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 0.3],
            vec![0.5, 0.0, 0.3, 5.0],
        ];
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let chol = SkylineCholesky::factor(&a).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = chol.solve(&b).unwrap();
        let r = a.mul_vec(&x).unwrap();
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn skyline_rejects_indefinite() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            SkylineCholesky::factor(&a),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn submatrix_renumbers() {
        let a = laplacian_1d(5);
        let s = a.submatrix(&[1, 3, 4], &[1, 3, 4]);
        assert_eq!(
            s.to_dense(),
            vec![vec![2.0, 0.0, 0.0], vec![0.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]
        );
    }

    #[test]
    fn dense_solver_detects_singularity() {
        assert!(solve_dense(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_none());
        let x = solve_dense(vec![vec![0.0, 2.0], vec![3.0, 0.0]], vec![4.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }
}
