//! Dense Hermitian eigen-solves and a few matrix helpers on nalgebra types.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Ascending eigen-decomposition of a real symmetric matrix.
pub fn eigh_real(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let n = m.nrows();
    let mut vecs = RMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_sign_real(&mut v);
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

/// Ascending eigenvalues only.
pub fn eigvalsh_real(m: &RMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Ascending eigen-decomposition of a complex Hermitian matrix.
pub fn eigh_complex(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let n = m.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_phase_complex(&mut v);
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

pub fn eigvalsh_complex(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Generalized symmetric-definite problem `K v = λ C v`, ascending.
/// Eigenvectors are C-orthonormal: vᵀ C v = 1.
pub fn generalized_eigh(k: &RMatrix, c: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let chol = Cholesky::new(c.clone())
        .ok_or_else(|| Error::Numerical("capacitance matrix is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let a = &l_inv * k * l_inv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let (vals, y) = eigh_real(&a);
    let vecs = l_inv.transpose() * y;
    Ok((vals, vecs))
}

pub fn real_to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `Some(real part)` when every imaginary entry is exactly zero.
pub fn as_real(m: &CMatrix) -> Option<RMatrix> {
    if m.iter().all(|z| z.im == 0.0) {
        Some(m.map(|z| z.re))
    } else {
        None
    }
}

/// Max-norm of H − H†.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn ascending_order(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    idx
}

// Deterministic gauge: largest-magnitude component real and positive.
fn fix_sign_real(v: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

fn fix_phase_complex(v: &mut DVector<Complex64>) {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_matches_direct() {
        let k = RMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let c = RMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = generalized_eigh(&k, &c).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-12);
        assert!((vals[1] - 1.5).abs() < 1e-12);
        let v0 = vecs.column(0);
        assert!(((v0.transpose() * &c * v0)[(0, 0)] - 1.0).abs() < 1e-12);
    }
}
