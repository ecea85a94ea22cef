//! Compressed sparse row storage with a fixed, fully stored symmetric pattern.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given pattern; each row's columns must be sorted
    /// and unique.
    pub fn from_pattern(n: usize, rows: &[Vec<usize>]) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::Validation(alloc::format!(
                "pattern has {} rows, expected {n}",
                rows.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        for (i, r) in rows.iter().enumerate() {
            if r.windows(2).any(|w| w[0] >= w[1]) || r.last().is_some_and(|&c| c >= n) {
                return Err(Error::Validation(alloc::format!(
                    "pattern row {i} is unsorted or out of range"
                )));
            }
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        })
    }

    /// Builds a matrix from a dense row-major array, keeping the nonzeros
    /// and the diagonal.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| i == j || dense[i * n + j] != 0.0)
                    .collect()
            })
            .collect();
        let mut m = Self::from_pattern(n, &rows).expect("dense pattern is valid");
        for i in 0..n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] = dense[i * n + m.col_idx[k]];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage position of entry `(i, j)`, if it is in the pattern.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`; fails outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let k = self
            .position(i, j)
            .ok_or_else(|| Error::Validation(alloc::format!("entry ({i}, {j}) not in pattern")))?;
        self.values[k] += v;
        Ok(())
    }

    pub fn set_zero(&mut self) {
        self.values.fill(0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
            })
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max|A − Aᵀ| / max|A|` (0 for the zero matrix).
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                defect = defect.max((v - self.get(j, i)).abs());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).0.iter().all(|&j| self.position(j, i).is_some()))
    }
}
