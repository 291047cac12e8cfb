//! Thin wrappers over the dense symmetric eigensolver.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascend;
/// `vectors` is column-major, column `j` belonging to `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    #[inline]
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

fn to_mat(dim: usize, a: &[f64]) -> Result<Mat<f64>> {
    if a.len() != dim * dim {
        return Err(Error::domain(format!(
            "matrix buffer has {} entries, expected {}",
            a.len(),
            dim * dim
        )));
    }
    Ok(Mat::from_fn(dim, dim, |i, j| a[j * dim + i]))
}

/// Full eigen-decomposition of the symmetric `dim × dim` matrix stored
/// column-major in `a`. Only the lower triangle is read.
pub fn symmetric_eigen(dim: usize, a: &[f64]) -> Result<SymmetricEigen> {
    if dim == 0 {
        return Ok(SymmetricEigen {
            dim,
            values: vec![],
            vectors: vec![],
        });
    }
    let m = to_mat(dim, a)?;
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..dim).map(|i| s[i]).collect();
    let mut vectors = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for i in 0..dim {
            vectors.push(u[(i, j)]);
        }
    }
    Ok(SymmetricEigen {
        dim,
        values,
        vectors,
    })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(dim: usize, a: &[f64]) -> Result<Vec<f64>> {
    if dim == 0 {
        return Ok(vec![]);
    }
    let m = to_mat(dim, a)?;
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}
