//! Supernodal sparse LDLᵀ backed by faer.

use biphasic_core::error::{Error, Result};
use biphasic_core::linsolve::LinearSolver;
use biphasic_core::sparse::CsrMatrix;
use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, LdltRef, SymbolicCholesky,
    SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};

/// Sparse LDLᵀ without pivoting, fill-reducing AMD ordering.
///
/// The symbolic analysis is reused as long as the sparsity pattern does not
/// change, so a Newton iteration only pays for numeric factorizations.
#[derive(Default)]
pub struct SparseLdlt {
    pattern: Option<(Vec<usize>, Vec<usize>)>,
    // lower triangle in compressed-column form
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    gather: Vec<usize>,
    values: Vec<f64>,
    symbolic: Option<SymbolicCholesky<usize>>,
    factor: Vec<f64>,
    factored: bool,
    stack: Option<MemBuffer>,
}

impl SparseLdlt {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stored entries of the factor, zero before the first factorization.
    pub fn factor_size(&self) -> usize {
        self.factor.len()
    }

    fn analyse(&mut self, a: &CsrMatrix) -> Result<()> {
        let n = a.nrows();
        // A symmetric CSR row i is CSC column i; keep rows j >= i.
        self.col_ptr = Vec::with_capacity(n + 1);
        self.col_ptr.push(0);
        self.row_idx.clear();
        self.gather.clear();
        for i in 0..n {
            let start = a.row_ptr()[i];
            for (k, &j) in a.row(i).0.iter().enumerate() {
                if j >= i {
                    self.row_idx.push(j);
                    self.gather.push(start + k);
                }
            }
            self.col_ptr.push(self.row_idx.len());
        }
        self.values = vec![0.0; self.row_idx.len()];
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &self.col_ptr, None, &self.row_idx);
        let symbolic = factorize_symbolic_cholesky(
            sym,
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| Error::LinearSolver(format!("symbolic analysis failed: {e:?}")))?;
        self.factor = vec![0.0; symbolic.len_val()];
        let req = StackReq::any_of(&[
            symbolic.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()),
            symbolic.solve_in_place_scratch::<f64>(1, Par::Seq),
        ]);
        self.stack = Some(MemBuffer::new(req));
        self.symbolic = Some(symbolic);
        self.pattern = Some((a.row_ptr().to_vec(), a.col_idx().to_vec()));
        Ok(())
    }
}

impl LinearSolver for SparseLdlt {
    fn factorize(&mut self, a: &CsrMatrix) -> Result<()> {
        let same = self
            .pattern
            .as_ref()
            .is_some_and(|(rp, ci)| rp == a.row_ptr() && ci == a.col_idx());
        if !same {
            self.analyse(a)?;
        }
        self.factored = false;
        let src = a.values();
        for (v, &k) in self.values.iter_mut().zip(&self.gather) {
            *v = src[k];
        }
        let n = a.nrows();
        let symbolic = self.symbolic.as_ref().expect("analysed above");
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &self.col_ptr, None, &self.row_idx);
        let mat = SparseColMatRef::new(sym, &self.values);
        let stack = MemStack::new(self.stack.as_mut().expect("analysed above"));
        symbolic
            .factorize_numeric_ldlt(
                &mut self.factor,
                mat,
                Side::Lower,
                LdltRegularization::default(),
                Par::Seq,
                stack,
                Default::default(),
            )
            .map_err(|e| Error::LinearSolver(format!("LDLᵀ factorization failed: {e:?}")))?;
        // faer does not flag tiny pivots; a non-finite factor means breakdown.
        if !self.factor.iter().all(|v| v.is_finite()) {
            return Err(Error::LinearSolver("LDLᵀ factor is not finite".into()));
        }
        self.factored = true;
        Ok(())
    }

    fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<()> {
        if !self.factored {
            return Err(Error::LinearSolver(
                "solve requested before a successful factorization".into(),
            ));
        }
        let symbolic = self.symbolic.as_ref().expect("factored");
        if rhs.len() != symbolic.nrows() {
            return Err(Error::LinearSolver(format!(
                "right-hand side has length {}, expected {}",
                rhs.len(),
                symbolic.nrows()
            )));
        }
        let ldlt = LdltRef::<'_, usize, f64>::new(symbolic, &self.factor);
        let n = rhs.len();
        let stack = MemStack::new(self.stack.as_mut().expect("factored"));
        ldlt.solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(rhs, n, 1),
            Par::Seq,
            stack,
        );
        if !rhs.iter().all(|v| v.is_finite()) {
            return Err(Error::LinearSolver("solution is not finite".into()));
        }
        Ok(())
    }
}
