//! Truncated harmonic-oscillator operators.
//!
//! Convention: φ̂ = φ_zpf(a + a†), n̂ = i·n_zpf(a† − a) with
//! φ_zpf = (8·E_C/E_L)^¼/√2 and n_zpf = 1/(2·φ_zpf), so that
//! 4·E_C·n̂² + ½·E_L·φ̂² = √(8·E_C·E_L)(a†a + ½) exactly.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::linalg::{CMatrix, RMatrix};

pub fn phase_zpf(e_c: f64, e_l: f64) -> f64 {
    (8.0 * e_c / e_l).powf(0.25) / std::f64::consts::SQRT_2
}

pub fn annihilation(dim: usize) -> RMatrix {
    let mut a = RMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

pub fn number_operator(dim: usize) -> RMatrix {
    RMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| i as f64))
}

/// Phase and charge operators of one oscillator mode.
#[derive(Debug, Clone)]
pub struct OscillatorOperators {
    pub dim: usize,
    pub phi_zpf: f64,
    pub n_zpf: f64,
    pub phase: RMatrix,
    /// n̂ is purely imaginary in this basis; `charge_im` holds n_zpf(a† − a).
    pub charge_im: RMatrix,
    /// Truncation of the exact φ̂² (not the square of truncated φ̂).
    pub phase_sq: RMatrix,
    pub charge_sq: RMatrix,
}

impl OscillatorOperators {
    pub fn new(dim: usize, e_c: f64, e_l: f64) -> Result<Self> {
        if dim < 2 {
            return Err(domain(format!("oscillator dimension must be >= 2, got {dim}")));
        }
        if !(e_c > 0.0 && e_l > 0.0) {
            return Err(domain(format!("oscillator energies must be positive (E_C={e_c}, E_L={e_l})")));
        }
        Ok(Self::with_zpf(dim, phase_zpf(e_c, e_l)))
    }

    pub fn with_zpf(dim: usize, phi_zpf: f64) -> Self {
        let n_zpf = 0.5 / phi_zpf;
        let a = annihilation(dim);
        let ad = a.transpose();
        let phase = (&a + &ad) * phi_zpf;
        let charge_im = (&ad - &a) * n_zpf;
        let mut phase_sq = RMatrix::zeros(dim, dim);
        let mut charge_sq = RMatrix::zeros(dim, dim);
        for n in 0..dim {
            let d = 2.0 * n as f64 + 1.0;
            phase_sq[(n, n)] = phi_zpf * phi_zpf * d;
            charge_sq[(n, n)] = n_zpf * n_zpf * d;
            if n + 2 < dim {
                let s = (((n + 1) * (n + 2)) as f64).sqrt();
                phase_sq[(n, n + 2)] = phi_zpf * phi_zpf * s;
                phase_sq[(n + 2, n)] = phi_zpf * phi_zpf * s;
                charge_sq[(n, n + 2)] = -n_zpf * n_zpf * s;
                charge_sq[(n + 2, n)] = -n_zpf * n_zpf * s;
            }
        }
        OscillatorOperators { dim, phi_zpf, n_zpf, phase, charge_im, phase_sq, charge_sq }
    }

    pub fn charge(&self) -> CMatrix {
        self.charge_im.map(|x| Complex64::new(0.0, x))
    }
}

/// `(phase_op, charge_op)` for a `dim`-level oscillator with energies `e_c`, `e_l` (GHz).
pub fn oscillator_operators(dim: usize, e_c: f64, e_l: f64) -> Result<(RMatrix, CMatrix)> {
    let ops = OscillatorOperators::new(dim, e_c, e_l)?;
    let charge = ops.charge();
    Ok((ops.phase, charge))
}

/// Matrix elements of cos φ̂ and sin φ̂ in the truncated Fock basis, exact
/// at every truncation.
///
/// ⟨m|e^{iφ̂}|n⟩ = i^k √(n_<!/n_>!) x^{k/2} e^{−x/2} L_{n_<}^{(k)}(x) with
/// k = |m − n| and x = φ_zpf². Even k lands in cos, odd k in sin.
pub fn phase_exponential(dim: usize, phi_zpf: f64) -> (RMatrix, RMatrix) {
    let x = phi_zpf * phi_zpf;
    let mut cos = RMatrix::zeros(dim, dim);
    let mut sin = RMatrix::zeros(dim, dim);
    let mut ln_fact = vec![0.0f64; dim + 1];
    for i in 1..=dim {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    for k in 0..dim {
        let kf = k as f64;
        // f_j = √(j!/(j+k)!) x^{k/2} e^{−x/2} L_j^{(k)}(x), by upward recurrence in j.
        let f0 = if x > 0.0 {
            (0.5 * kf * x.ln() - 0.5 * x - 0.5 * ln_fact[k]).exp()
        } else if k == 0 {
            1.0
        } else {
            0.0
        };
        let count = dim - k;
        let mut f = Vec::with_capacity(count);
        f.push(f0);
        if count > 1 {
            f.push(f0 * (1.0 + kf - x) / (kf + 1.0).sqrt());
        }
        for j in 1..count.saturating_sub(1) {
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0 + kf - x) * f[j] - (jf * (jf + kf)).sqrt() * f[j - 1])
                / ((jf + 1.0) * (jf + 1.0 + kf)).sqrt();
            f.push(next);
        }
        let (target, sign) = match k % 4 {
            0 => (&mut cos, 1.0),
            1 => (&mut sin, 1.0),
            2 => (&mut cos, -1.0),
            _ => (&mut sin, -1.0),
        };
        for (j, &val) in f.iter().enumerate() {
            let v = sign * val;
            target[(j, j + k)] = v;
            target[(j + k, j)] = v;
        }
    }
    (cos, sin)
}

/// Position-space oscillator eigenfunctions ψₙ(φ) sampled on `grid`
/// (rows: grid points, columns: n). Real, with ∫|ψₙ|²dφ = 1.
pub fn oscillator_wavefunctions(dim: usize, phi_zpf: f64, grid: &[f64]) -> RMatrix {
    let mut out = RMatrix::zeros(grid.len(), dim);
    let width = std::f64::consts::SQRT_2 * phi_zpf;
    let norm = (std::f64::consts::PI.sqrt() * width).sqrt().recip();
    for (g, &phi) in grid.iter().enumerate() {
        let x = phi / width;
        let mut prev = 0.0;
        let mut cur = norm * (-0.5 * x * x).exp();
        out[(g, 0)] = cur;
        for n in 1..dim {
            let nf = n as f64;
            let next = (2.0 / nf).sqrt() * x * cur - ((nf - 1.0) / nf).sqrt() * prev;
            prev = cur;
            cur = next;
            out[(g, n)] = cur;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh_real;

    #[test]
    fn wavefunctions_orthonormal() {
        let grid: Vec<f64> = (0..4001).map(|i| -30.0 + 60.0 * i as f64 / 4000.0).collect();
        let h = 60.0 / 4000.0;
        let psi = oscillator_wavefunctions(25, 1.3, &grid);
        let gram = psi.transpose() * &psi * h;
        for i in 0..25 {
            for j in 0..25 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zpf_closed_form() {
        let ops = OscillatorOperators::new(2, 1.0, 2.0).unwrap();
        assert!((ops.phi_zpf - 1.0).abs() < 1e-15);
        assert!((ops.n_zpf - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_energies_rejected() {
        assert!(oscillator_operators(10, 0.0, 1.0).is_err());
        assert!(oscillator_operators(10, 1.0, -2.0).is_err());
        assert!(oscillator_operators(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn canonical_commutator_on_interior() {
        for &(dim, ec, el) in &[(12usize, 0.89, 1.37), (30, 1.9, 0.53), (5, 0.3, 7.0)] {
            let (phi, n) = oscillator_operators(dim, ec, el).unwrap();
            let phi_c = crate::linalg::real_to_complex(&phi);
            let comm = &phi_c * &n - &n * &phi_c;
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j && i < dim - 1 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) };
                    if i < dim - 1 && j < dim - 1 {
                        assert!((comm[(i, j)] - expect).norm() < 1e-12, "[{i},{j}] = {}", comm[(i, j)]);
                    }
                }
            }
            // truncation defect sits entirely in the last diagonal entry
            let last = comm[(dim - 1, dim - 1)];
            assert!((last.im + (dim as f64 - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_part_is_diagonal_ladder() {
        let ops = OscillatorOperators::new(20, 0.89, 1.37).unwrap();
        let h = &ops.charge_sq * (4.0 * 0.89) + &ops.phase_sq * (0.5 * 1.37);
        let w = (8.0f64 * 0.89 * 1.37).sqrt();
        for i in 0..20 {
            for j in 0..20 {
                let expect = if i == j { w * (i as f64 + 0.5) } else { 0.0 };
                assert!((h[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    // Independent route: exponentiate a much larger truncated φ̂ by
    // eigendecomposition and compare the low block.
    #[test]
    fn displacement_matches_large_basis_exponential() {
        for &zpf in &[0.3, 1.0, 1.64] {
            let big = 220;
            let a = annihilation(big);
            let phi = (&a + a.transpose()) * zpf;
            let (vals, vecs) = eigh_real(&phi);
            let cos_d = nalgebra::DVector::from_iterator(big, vals.iter().map(|v| v.cos()));
            let sin_d = nalgebra::DVector::from_iterator(big, vals.iter().map(|v| v.sin()));
            let cos_big = &vecs * RMatrix::from_diagonal(&cos_d) * vecs.transpose();
            let sin_big = &vecs * RMatrix::from_diagonal(&sin_d) * vecs.transpose();
            let dim = 30;
            let (c, s) = phase_exponential(dim, zpf);
            for i in 0..dim {
                for j in 0..dim {
                    assert!((c[(i, j)] - cos_big[(i, j)]).abs() < 1e-10, "cos zpf={zpf} [{i},{j}]");
                    assert!((s[(i, j)] - sin_big[(i, j)]).abs() < 1e-10, "sin zpf={zpf} [{i},{j}]");
                }
            }
        }
    }

    #[test]
    fn displacement_elements_bounded_at_large_dim() {
        let (c, s) = phase_exponential(300, 0.05);
        assert!(c.iter().chain(s.iter()).all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-12));
        let (c, s) = phase_exponential(300, 2.5);
        assert!(c.iter().chain(s.iter()).all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-12));
    }
}
