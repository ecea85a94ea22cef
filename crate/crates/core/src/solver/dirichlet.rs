use alloc::collections::BTreeMap;
use alloc::vec;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Prescribed values of individual global dofs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `dof = value`; repeating an identical constraint is allowed.
    pub fn insert(&mut self, dof: usize, value: f64) -> Result<()> {
        match self.values.get(&dof) {
            Some(&old) if old != value => Err(Error::ConflictingConstraint {
                dof,
                first: old,
                second: value,
            }),
            _ => {
                self.values.insert(dof, value);
                Ok(())
            }
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut c = Self::new();
        for (d, v) in pairs {
            c.insert(d, v)?;
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    /// Same dofs, every value replaced by zero.
    pub fn homogeneous(&self) -> Self {
        Self {
            values: self.values.keys().map(|&d| (d, 0.0)).collect(),
        }
    }
}

/// Symmetric elimination: constrained rows and columns are zeroed, their
/// diagonal set to one and their known values moved to the right-hand side.
pub fn apply_dirichlet(
    a: &mut CsrMatrix,
    rhs: &mut [f64],
    constraints: &Constraints,
) -> Result<()> {
    let n = a.nrows();
    let mut fixed = vec![None; n];
    for (d, v) in constraints.iter() {
        if d >= n {
            return Err(Error::Validation(alloc::format!(
                "constraint on dof {d} outside a system of {n} rows"
            )));
        }
        fixed[d] = Some(v);
    }
    let row_ptr = a.row_ptr().to_vec();
    let cols = a.col_idx().to_vec();
    let vals = a.values_mut();
    for i in 0..n {
        for k in row_ptr[i]..row_ptr[i + 1] {
            let j = cols[k];
            match (fixed[i], fixed[j]) {
                (Some(_), _) => vals[k] = if i == j { 1.0 } else { 0.0 },
                (None, Some(g)) => {
                    rhs[i] -= vals[k] * g;
                    vals[k] = 0.0;
                }
                (None, None) => {}
            }
        }
    }
    for (d, v) in constraints.iter() {
        if a.position(d, d).is_none() {
            return Err(Error::Validation(alloc::format!(
                "dof {d} has no diagonal entry"
            )));
        }
        rhs[d] = v;
    }
    Ok(())
}
