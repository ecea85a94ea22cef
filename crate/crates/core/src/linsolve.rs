//! Direct solvers for the symmetric (quasi-definite) systems of the Newton
//! iteration.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A factorize-then-solve backend. Implementations may cache symbolic work
/// between calls with the same sparsity pattern.
pub trait LinearSolver {
    fn factorize(&mut self, a: &CsrMatrix) -> Result<()>;
    /// Overwrites `rhs` with the solution of the last factorized system.
    fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<()>;
}

/// Reverse Cuthill–McKee ordering of the graph of `a`; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut queue = VecDeque::new();
    let mut level = vec![usize::MAX; n];

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree, &mut level);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a
                .row(v)
                .0
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Start node for one component: repeatedly jump to a minimum-degree node of
/// the last BFS level while the eccentricity grows.
fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize], level: &mut [usize]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let mut touched = vec![start];
        level[start] = 0;
        let mut frontier = vec![start];
        let mut depth = 0;
        let mut last = frontier.clone();
        while !frontier.is_empty() {
            last = frontier.clone();
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in a.row(v).0 {
                    if level[w] == usize::MAX {
                        level[w] = depth + 1;
                        touched.push(w);
                        next.push(w);
                    }
                }
            }
            if !next.is_empty() {
                depth += 1;
            }
            frontier = next;
        }
        for v in touched {
            level[v] = usize::MAX;
        }
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .unwrap_or(&start);
        if depth > ecc {
            ecc = depth;
            start = candidate;
        } else {
            break;
        }
    }
    start
}

/// Profile (skyline) LDLᵀ without pivoting after an RCM reordering. Suited to
/// small and banded problems; memory grows with the envelope.
#[derive(Debug, Clone, Default)]
pub struct EnvelopeLdlt {
    perm: Vec<usize>,
    inverse: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    pattern: Option<(Vec<usize>, Vec<usize>)>,
    work: Vec<f64>,
}

impl EnvelopeLdlt {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stored entries below the diagonal.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    fn analyse(&mut self, a: &CsrMatrix) {
        let n = a.nrows();
        self.perm = reverse_cuthill_mckee(a);
        self.inverse = vec![0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            self.inverse[old] = new;
        }
        self.first = (0..n)
            .map(|i| {
                let old = self.perm[i];
                a.row(old)
                    .0
                    .iter()
                    .map(|&j| self.inverse[j])
                    .min()
                    .unwrap_or(i)
                    .min(i)
            })
            .collect();
        self.start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            self.start.push(total);
            total += i - self.first[i];
        }
        self.start.push(total);
        self.lower = vec![0.0; total];
        self.diag = vec![0.0; n];
        self.pattern = Some((a.row_ptr().to_vec(), a.col_idx().to_vec()));
    }
}

impl LinearSolver for EnvelopeLdlt {
    fn factorize(&mut self, a: &CsrMatrix) -> Result<()> {
        let same = self
            .pattern
            .as_ref()
            .is_some_and(|(rp, ci)| rp == a.row_ptr() && ci == a.col_idx());
        if !same {
            self.analyse(a);
        }
        let n = a.nrows();
        self.lower.fill(0.0);
        self.diag.fill(0.0);
        for old in 0..n {
            let i = self.inverse[old];
            let (cols, vals) = a.row(old);
            for (&jo, &v) in cols.iter().zip(vals) {
                let j = self.inverse[jo];
                if j < i {
                    self.lower[self.start[i] + j - self.first[i]] = v;
                } else if j == i {
                    self.diag[i] = v;
                }
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = self.first[i];
            let (done, rest) = self.lower.split_at_mut(self.start[i]);
            let row_i = &mut rest[..i - fi];
            // row_i holds w_ij = l_ij d_j while it is being formed
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let row_j = &done[self.start[j]..self.start[j] + (j - fj)];
                let mut s = row_i[j - fi];
                for k in k0..j {
                    s -= row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] = s;
            }
            let mut d = self.diag[i];
            for j in fi..i {
                let w = row_i[j - fi];
                let l = w / self.diag[j];
                row_i[j - fi] = l;
                d -= w * l;
            }
            if !(d.abs() > 1e-14 * scale) || !d.is_finite() {
                return Err(Error::LinearSolver(format!(
                    "zero or invalid pivot {d:e} at row {}",
                    self.perm[i]
                )));
            }
            self.diag[i] = d;
        }
        Ok(())
    }

    fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(Error::LinearSolver(format!(
                "right-hand side has length {}, system has {n} rows",
                rhs.len()
            )));
        }
        self.work.clear();
        self.work.extend(self.perm.iter().map(|&o| rhs[o]));
        let y = &mut self.work;
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            rhs[old] = self.work[new];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_quasi_definite(n_u: usize, n_p: usize, seed: u64) -> (usize, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n_u + n_p;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(0.3) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    let v = if i >= n_u && j >= n_u { 0.1 * v } else { v };
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| d[i * n + j].abs()).sum();
            d[i * n + i] = if i < n_u { off + 1.0 } else { -(off + 1.0) };
        }
        (n, d)
    }

    #[test]
    fn solves_quasi_definite_system() {
        let (n, d) = random_quasi_definite(12, 5, 3);
        let a = CsrMatrix::from_dense(n, &d);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x);
        let mut s = EnvelopeLdlt::new();
        s.factorize(&a).unwrap();
        s.solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
        // refactorization with the same pattern reuses the ordering
        let mut a2 = a.clone();
        for v in a2.values_mut() {
            *v *= 2.0;
        }
        s.factorize(&a2).unwrap();
        let mut b2 = a2.mul_vec(&x);
        s.solve_in_place(&mut b2).unwrap();
        assert!(b2.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_dense(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            EnvelopeLdlt::new().factorize(&a),
            Err(Error::LinearSolver(_))
        ));
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_a_path() {
        // path graph numbered badly: 0-5-1-4-2-3
        let edges = [(0, 5), (5, 1), (1, 4), (4, 2), (2, 3)];
        let mut d = vec![0.0; 36];
        for i in 0..6 {
            d[i * 6 + i] = 4.0;
        }
        for (i, j) in edges {
            d[i * 6 + j] = -1.0;
            d[j * 6 + i] = -1.0;
        }
        let a = CsrMatrix::from_dense(6, &d);
        let mut p = reverse_cuthill_mckee(&a);
        let mut s = EnvelopeLdlt::new();
        s.factorize(&a).unwrap();
        assert_eq!(s.envelope_size(), 5);
        p.sort_unstable();
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }
}
