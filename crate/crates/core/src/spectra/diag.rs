use num_complex::Complex64;

use crate::circuit::{BasisTag, HamiltonianMatrix};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

/// Lowest eigenpairs, ascending; eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
    /// Largest ‖Hv − Ev‖ over the returned pairs.
    pub max_residual: f64,
}

pub fn diagonalize(h: &HamiltonianMatrix, k: usize) -> Result<Eigenpairs> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(domain(format!("requested {k} eigenpairs from a {dim}-dimensional matrix")));
    }
    let (vals, vecs) = match linalg::as_real(&h.elements) {
        Some(re) => {
            let (v, w) = match parity_classes(&h.basis).filter(|p| conserves_parity(&re, p)) {
                Some(p) => eigh_by_parity(&re, &p),
                None => linalg::eigh_real(&re),
            };
            (v, linalg::real_to_complex(&w.columns(0, k).into_owned()))
        }
        None => {
            let (v, w) = linalg::eigh_complex(&h.elements);
            (v, w.columns(0, k).into_owned())
        }
    };
    let energies: Vec<f64> = vals[..k].to_vec();
    let norm = h.elements.norm();
    let hv = &h.elements * &vecs;
    let mut max_residual = 0.0f64;
    for (i, &e) in energies.iter().enumerate() {
        let r = (hv.column(i) - vecs.column(i) * Complex64::new(e, 0.0)).norm();
        max_residual = max_residual.max(r);
    }
    if !(max_residual <= 1e-9 * norm.max(1.0)) {
        return Err(Error::Numerical(format!(
            "eigen-solve residual {max_residual:.3e} exceeds 1e-9·‖H‖ = {:.3e}",
            1e-9 * norm
        )));
    }
    Ok(Eigenpairs { energies, vectors: vecs, max_residual })
}

/// Oscillator-quanta parity of each basis state, where φ → −φ flips the sign
/// of odd states.
fn parity_classes(basis: &BasisTag) -> Option<Vec<bool>> {
    match *basis {
        BasisTag::SingleOscillator { dim, .. } => Some((0..dim).map(|i| i % 2 == 1).collect()),
        BasisTag::ProductOscillators { dims: (d0, d1), .. } => Some((0..d0 * d1).map(|i| (i / d1 + i % d1) % 2 == 1).collect()),
        _ => None,
    }
}

/// True at flux biases where the potential is even, up to rounding in cos φ_ext.
fn conserves_parity(m: &RMatrix, odd: &[bool]) -> bool {
    let scale = m.amax();
    let mut leak = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if odd[i] != odd[j] {
                leak = leak.max(m[(i, j)].abs());
            }
        }
    }
    leak <= 1e-14 * scale
}

/// Diagonalizes the even and odd blocks separately. Near-degenerate parity
/// partners (tunnel-split doublets) then cannot mix through rounding.
fn eigh_by_parity(m: &RMatrix, odd: &[bool]) -> (Vec<f64>, RMatrix) {
    let n = m.nrows();
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for parity in [false, true] {
        let idx: Vec<usize> = (0..n).filter(|&i| odd[i] == parity).collect();
        if idx.is_empty() {
            continue;
        }
        let block = RMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        let (vals, vecs) = linalg::eigh_real(&block);
        for (c, &e) in vals.iter().enumerate() {
            let mut full = vec![0.0; n];
            for (a, &i) in idx.iter().enumerate() {
                full[i] = vecs[(a, c)];
            }
            pairs.push((e, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let vectors = RMatrix::from_fn(n, n, |i, c| pairs[c].1[i]);
    (pairs.into_iter().map(|p| p.0).collect(), vectors)
}
