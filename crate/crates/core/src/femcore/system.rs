use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::femcore::sparse::CsrMatrix;

/// Assembled operator and right-hand side, before constraints.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// System with Dirichlet rows and columns eliminated symmetrically.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Full index of each reduced unknown.
    pub free: Vec<usize>,
    /// Prescribed value per full index, `None` for free unknowns.
    pub prescribed: Vec<Option<f64>>,
}

impl ConstrainedSystem {
    /// Full solution vector from the reduced one.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full: Vec<f64> = self.prescribed.iter().map(|p| p.unwrap_or(0.0)).collect();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = reduced[k];
        }
        full
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }
}

/// Eliminates `(node, value)` constraints: constrained rows and columns are
/// dropped and `-A[:, c] * value` moves to the right-hand side.
pub fn impose_dirichlet(system: &SparseSystem, constraints: &[(usize, f64)]) -> Result<ConstrainedSystem> {
    let n = system.matrix.n_rows;
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    for &(node, value) in constraints {
        if node >= n {
            return Err(Error::Parameter(format!("constraint on node {node} outside 0..{n}")));
        }
        if let Some(&prev) = fixed.get(&node) {
            if prev != value {
                return Err(Error::Constraint { node, first: prev, second: value });
            }
        }
        fixed.insert(node, value);
    }
    let mut prescribed = vec![None; n];
    for (&i, &v) in &fixed {
        prescribed[i] = Some(v);
    }
    let mut reduced_index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| prescribed[i].is_none()).collect();
    for (k, &i) in free.iter().enumerate() {
        reduced_index[i] = k;
    }
    let mut rows = Vec::with_capacity(free.len());
    let mut rhs = Vec::with_capacity(free.len());
    for &i in &free {
        let (cols, vals) = system.matrix.row(i);
        let mut b = system.rhs[i];
        let mut r = Vec::with_capacity(cols.len());
        for (&j, &v) in cols.iter().zip(vals) {
            match prescribed[j] {
                Some(u) => b -= v * u,
                None => r.push(reduced_index[j]),
            }
        }
        rows.push(r);
        rhs.push(b);
    }
    let mut matrix = CsrMatrix::from_pattern(free.len(), rows);
    for (k, &i) in free.iter().enumerate() {
        let (cols, vals) = system.matrix.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if prescribed[j].is_none() {
                matrix.add(k, reduced_index[j], v);
            }
        }
    }
    Ok(ConstrainedSystem { matrix, rhs, free, prescribed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system() -> SparseSystem {
        let mut m = CsrMatrix::from_pattern(3, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        for (i, j, v) in [(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)]
        {
            m.add(i, j, v);
        }
        SparseSystem { matrix: m, rhs: vec![0.0, 1.0, 0.0] }
    }

    #[test]
    fn elimination_moves_prescribed_values_to_rhs() {
        let c = impose_dirichlet(&system(), &[(0, 3.0), (2, 1.0)]).unwrap();
        assert_eq!(c.free, vec![1]);
        assert_eq!(c.matrix.to_dense(), vec![vec![2.0]]);
        assert_eq!(c.rhs, vec![1.0 + 3.0 + 1.0]);
        assert_eq!(c.expand(&[2.5]), vec![3.0, 2.5, 1.0]);
    }

    #[test]
    fn repeated_constraints_must_agree() {
        assert!(impose_dirichlet(&system(), &[(0, 1.0), (0, 1.0)]).is_ok());
        assert!(matches!(impose_dirichlet(&system(), &[(0, 1.0), (0, 2.0)]), Err(Error::Constraint { node: 0, .. })));
        assert!(matches!(impose_dirichlet(&system(), &[(7, 1.0)]), Err(Error::Parameter(_))));
    }
}
