use std::fmt::Write as _;

use crate::exec::{self, ExecMode};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets (sorted, deduplicated here).
    pub fn from_pattern(n_cols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix { n_rows: rows.len(), n_cols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    /// Pattern of a P1 operator on `n` dofs with element dof triples.
    pub fn from_elements(n: usize, elements: impl Iterator<Item = [usize; 3]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(8); n];
        for d in elements {
            for a in d {
                rows[a].extend_from_slice(&d);
            }
        }
        CsrMatrix::from_pattern(n, rows)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CsrMatrix::from_pattern(n, (0..n).map(|i| vec![i]).collect());
        m.values.fill(1.0);
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[s..e].binary_search(&j).ok().map(|k| s + k)
    }

    /// Adds `v` to entry `(i, j)`, which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`; rows are independent so serial and parallel agree bitwise.
    pub fn spmv(&self, mode: ExecMode, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        exec::fill_indexed(mode, y, |i| {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            acc
        });
    }

    /// `r = b - A x` with error-free products and compensated row sums, so
    /// the result is accurate even when it is far smaller than `|A||x|`.
    pub fn residual(&self, mode: ExecMode, b: &[f64], x: &[f64], r: &mut [f64]) {
        exec::fill_indexed(mode, r, |i| {
            let (mut hi, mut lo) = (b[i], 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let p = -self.values[k] * x[self.col_idx[k]];
                let pe = (-self.values[k]).mul_add(x[self.col_idx[k]], -p);
                let s = hi + p;
                let bp = s - hi;
                lo += (hi - (s - bp)) + (p - bp) + pe;
                hi = s;
            }
            hi + lo
        });
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest |A_ij - A_ji| relative to the largest entry; infinite when
    /// the pattern is not symmetric.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                match self.position(j, i) {
                    Some(k) => worst = worst.max((v - self.values[k]).abs() / scale),
                    None => return f64::INFINITY,
                }
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    /// Coordinate text: one `row col value` line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(s, "{i} {j} {v:e}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let rows = (0..n).map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let mut a = CsrMatrix::from_pattern(n, rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
                a.add(i - 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn spmv_and_residual_agree_on_small_data() {
        let a = tridiag(5);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mut y = [0.0; 5];
        a.spmv(ExecMode::Serial, &x, &mut y);
        assert_eq!(y, [0.0, 0.0, 0.0, 0.0, 6.0]);
        let mut r = [0.0; 5];
        a.residual(ExecMode::Serial, &[1.0; 5], &x, &mut r);
        assert_eq!(r, [1.0, 1.0, 1.0, 1.0, -5.0]);
    }

    #[test]
    fn residual_survives_cancellation() {
        let mut a = CsrMatrix::from_pattern(3, vec![vec![0, 1, 2]]);
        a.add(0, 0, 1e16);
        a.add(0, 1, 1.0);
        a.add(0, 2, -1e16);
        let mut r = [0.0];
        a.residual(ExecMode::Serial, &[0.0], &[1.0, 1.0, 1.0], &mut r);
        assert_eq!(r[0], -1.0);
    }

    #[test]
    fn symmetry_and_dense_form() {
        let mut a = tridiag(4);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.row_sums(), vec![1.0, 0.0, 0.0, 1.0]);
        a.add(0, 1, 0.5);
        assert!((a.asymmetry() - 0.25).abs() < 1e-15);
        assert_eq!(a.to_dense()[0], vec![2.0, -0.5, 0.0, 0.0]);
        assert_eq!(a.get(0, 3), 0.0);
        assert_eq!(CsrMatrix::identity(3).diagonal(), vec![1.0; 3]);
    }

    #[test]
    #[should_panic(expected = "not in sparsity pattern")]
    fn add_outside_pattern_panics() {
        tridiag(4).add(0, 3, 1.0);
    }
}
