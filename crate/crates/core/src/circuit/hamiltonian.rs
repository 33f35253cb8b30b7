use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{annihilation, number_operator, phase_exponential, phase_zpf, OscillatorOperators};
use super::params::{FluxBias, ResonatorParams, SingleModeParams, TwoModeParams};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

pub const DEFAULT_SINGLE_DIM: usize = 60;
pub const DEFAULT_TWO_MODE_DIMS: (usize, usize) = (40, 20);

/// Which basis a Hamiltonian is written in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisTag {
    SingleOscillator { dim: usize, phi_zpf: f64 },
    ProductOscillators { dims: (usize, usize), phi_zpf: [f64; 2] },
    QubitFock { qubit_dim: usize, n_fock: usize },
    /// Retained eigenlevels of another Hamiltonian (rotating frames, dressed bases).
    Levels { count: usize },
}

/// Hermitian H/h in GHz.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub elements: CMatrix,
    pub basis: BasisTag,
}

impl HamiltonianMatrix {
    pub fn from_real(m: RMatrix, basis: BasisTag) -> Self {
        HamiltonianMatrix { elements: linalg::real_to_complex(&m), basis }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.elements)
    }
}

/// H/h = 4·E_C·n̂² + ½·E_L·φ̂² − E_J·cos(φ̂ + φ_ext) in the oscillator basis
/// of the quadratic part.
pub fn build_single_mode_hamiltonian(p: &SingleModeParams, flux: FluxBias, dim: usize) -> Result<HamiltonianMatrix> {
    p.validate()?;
    let (m, zpf) = single_mode_real(p, flux.phi_ext, dim)?;
    Ok(HamiltonianMatrix::from_real(m, BasisTag::SingleOscillator { dim, phi_zpf: zpf }))
}

pub(crate) fn single_mode_real(p: &SingleModeParams, phi_ext: f64, dim: usize) -> Result<(RMatrix, f64)> {
    if dim < 2 {
        return Err(domain(format!("basis dimension must be >= 2, got {dim}")));
    }
    let zpf = phase_zpf(p.e_c, p.e_l);
    let w = p.plasma_frequency();
    let mut h = RMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| w * (i as f64 + 0.5)));
    if p.e_j != 0.0 {
        let (c, s) = phase_exponential(dim, zpf);
        // cos(φ + φ_ext) = cos φ_ext·cos φ − sin φ_ext·sin φ
        h -= c * (p.e_j * phi_ext.cos()) - s * (p.e_j * phi_ext.sin());
    }
    Ok((h, zpf))
}

/// Outcome of the basis-doubling convergence check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dim: usize,
    pub levels: usize,
    /// Largest change of the lowest `levels` eigenvalues between `dim` and `2·dim`, GHz.
    pub max_shift: f64,
    pub converged: bool,
}

pub fn check_single_mode_convergence(
    p: &SingleModeParams,
    flux: FluxBias,
    dim: usize,
    levels: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    let (a, _) = single_mode_real(p, flux.phi_ext, dim)?;
    let (b, _) = single_mode_real(p, flux.phi_ext, 2 * dim)?;
    let ea = linalg::eigvalsh_real(&a);
    let eb = linalg::eigvalsh_real(&b);
    let levels = levels.min(dim);
    let max_shift = (0..levels).map(|i| (ea[i] - eb[i]).abs()).fold(0.0, f64::max);
    Ok(ConvergenceReport { dim, levels, max_shift, converged: max_shift < tol })
}

/// Builds the single-mode Hamiltonian at the smallest dimension (doubling from
/// `dim`, capped at `max_dim`) whose lowest `levels` eigenvalues move by less
/// than `tol` GHz on a further doubling.
pub fn converged_single_mode(
    p: &SingleModeParams,
    flux: FluxBias,
    dim: usize,
    levels: usize,
    tol: f64,
    max_dim: usize,
) -> Result<(HamiltonianMatrix, ConvergenceReport)> {
    let mut d = dim;
    loop {
        let report = check_single_mode_convergence(p, flux, d, levels, tol)?;
        if report.converged {
            return Ok((build_single_mode_hamiltonian(p, flux, d)?, report));
        }
        if 2 * d > max_dim {
            return Err(Error::Convergence(format!(
                "lowest {} levels still shift by {:.3e} GHz at dim {} (cap {max_dim})",
                report.levels, report.max_shift, d
            )));
        }
        d *= 2;
    }
}

/// Operators of the two-mode product basis needed beyond the Hamiltonian.
#[derive(Debug, Clone)]
pub struct TwoModeOperators {
    pub dims: (usize, usize),
    pub phi_zpf: [f64; 2],
    /// Junction phase θ₀ + θ₁ (real).
    pub junction_phase: RMatrix,
    /// Imaginary part of n̂₀ + n̂₁.
    pub charge_total_im: RMatrix,
    /// Occupation of mode 1 in its basis.
    pub mode1_number: RMatrix,
}

impl TwoModeOperators {
    pub fn new(p: &TwoModeParams, dims: (usize, usize)) -> Result<Self> {
        let (m0, m1) = mode_bases(p, dims)?;
        let i0 = RMatrix::identity(dims.0, dims.0);
        let i1 = RMatrix::identity(dims.1, dims.1);
        Ok(TwoModeOperators {
            dims,
            phi_zpf: [m0.phi_zpf, m1.phi_zpf],
            junction_phase: m0.phase.kronecker(&i1) + i0.kronecker(&m1.phase),
            charge_total_im: m0.charge_im.kronecker(&i1) + i0.kronecker(&m1.charge_im),
            mode1_number: i0.kronecker(&number_operator(dims.1)),
        })
    }

    pub fn charge_total(&self) -> CMatrix {
        self.charge_total_im.map(|x| Complex64::new(0.0, x))
    }
}

// Mode 0 uses the oscillator of its own (E_C, E_L); mode 1 is confined by the
// junction as well, so its basis uses E_L + E_J.
fn mode_bases(p: &TwoModeParams, dims: (usize, usize)) -> Result<(OscillatorOperators, OscillatorOperators)> {
    if dims.0 < 2 || dims.1 < 2 {
        return Err(domain(format!("two-mode dims must both be >= 2, got {dims:?}")));
    }
    p.validate()?;
    let m0 = OscillatorOperators::new(dims.0, p.e_c(0), p.e_l(0))?;
    let m1 = OscillatorOperators::new(dims.1, p.e_c(1), p.e_l(1) + p.e_j)?;
    Ok((m0, m1))
}

/// Two-mode Hamiltonian on the product of the two oscillator bases, index
/// `i0 * dims.1 + i1`. The junction cosine uses exact single-mode
/// displacement matrix elements.
pub fn build_two_mode_hamiltonian(p: &TwoModeParams, flux: FluxBias, dims: (usize, usize)) -> Result<HamiltonianMatrix> {
    let (m0, m1) = mode_bases(p, dims)?;
    let (ec0, ec1) = (p.e_c(0), p.e_c(1));
    let (el0, el1) = (p.e_l(0), p.e_l(1));
    let [ng0, ng1] = p.q_offset;

    let i0 = RMatrix::identity(dims.0, dims.0);
    let i1 = RMatrix::identity(dims.1, dims.1);

    let quad0 = &m0.charge_sq * (4.0 * ec0) + &m0.phase_sq * (0.5 * el0) + &i0 * (4.0 * ec0 * ng0 * ng0);
    let quad1 = &m1.charge_sq * (4.0 * ec1) + &m1.phase_sq * (0.5 * el1) + &i1 * (4.0 * ec1 * ng1 * ng1);
    let mut re = quad0.kronecker(&i1) + i0.kronecker(&quad1);
    re -= m0.phase.kronecker(&m1.phase) * p.e_j;

    let (c0, s0) = phase_exponential(dims.0, m0.phi_zpf);
    let (c1, s1) = phase_exponential(dims.1, m1.phi_zpf);
    let (cf, sf) = (flux.phi_ext.cos(), flux.phi_ext.sin());
    // cos(θ₀ + θ₁ + φ) = cos φ (C₀C₁ − S₀S₁) − sin φ (C₀S₁ + S₀C₁)
    let cos_re = c0.kronecker(&c1) - s0.kronecker(&s1);
    let sin_re = c0.kronecker(&s1) + s0.kronecker(&c1);
    re -= cos_re * (p.e_j * cf) - sin_re * (p.e_j * sf);

    // −8·E_C·n_g·n̂ carries the only imaginary entries.
    let im = m0.charge_im.kronecker(&i1) * (-8.0 * ec0 * ng0) + i0.kronecker(&m1.charge_im) * (-8.0 * ec1 * ng1);
    let elements = CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
    Ok(HamiltonianMatrix {
        elements,
        basis: BasisTag::ProductOscillators { dims, phi_zpf: [m0.phi_zpf, m1.phi_zpf] },
    })
}

/// H_q ⊗ I + ω_r·I ⊗ a†a + g·n̂ ⊗ (a + a†), with `charge_op` in the basis of `h_qubit`.
pub fn couple_resonator(
    h_qubit: &HamiltonianMatrix,
    charge_op: &CMatrix,
    r: &ResonatorParams,
    n_fock: usize,
    dim_cap: usize,
) -> Result<HamiltonianMatrix> {
    r.validate()?;
    if n_fock < 2 {
        return Err(domain(format!("n_fock must be >= 2, got {n_fock}")));
    }
    let dq = h_qubit.dim();
    if charge_op.shape() != (dq, dq) {
        return Err(domain("charge operator shape does not match qubit Hamiltonian"));
    }
    let dim = dq * n_fock;
    if dim > dim_cap {
        return Err(Error::DimensionCap { dim, cap: dim_cap });
    }
    let a = linalg::real_to_complex(&annihilation(n_fock));
    let x = &a + a.transpose();
    let num = linalg::real_to_complex(&number_operator(n_fock));
    let iq = CMatrix::identity(dq, dq);
    let ir = CMatrix::identity(n_fock, n_fock);
    let g = Complex64::new(r.g, 0.0);
    let elements = h_qubit.elements.kronecker(&ir)
        + iq.kronecker(&num) * Complex64::new(r.omega_r, 0.0)
        + charge_op.kronecker(&x) * g;
    Ok(HamiltonianMatrix { elements, basis: BasisTag::QubitFock { qubit_dim: dq, n_fock } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh_complex, eigvalsh_real};

    fn spectrum(h: &HamiltonianMatrix) -> Vec<f64> {
        match linalg::as_real(&h.elements) {
            Some(r) => eigvalsh_real(&r),
            None => eigvalsh_complex(&h.elements),
        }
    }

    #[test]
    fn harmonic_limit_uniform_spacing() {
        let p = SingleModeParams::new(0.89, 1.37, 0.0).unwrap();
        let h = build_single_mode_hamiltonian(&p, FluxBias::from_pi(0.3), 40).unwrap();
        let e = spectrum(&h);
        for w in e.windows(2).take(20) {
            assert!(((w[1] - w[0]) / 3.1235 - 1.0).abs() < 1e-4);
            assert!(((w[1] - w[0]) / p.plasma_frequency() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_is_real_symmetric() {
        let h = build_single_mode_hamiltonian(&SingleModeParams::device2(), FluxBias::from_pi(-0.46), 60).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        assert!(linalg::as_real(&h.elements).is_some());
    }

    #[test]
    fn doubling_check_escalates() {
        let p = SingleModeParams::device2();
        let small = check_single_mode_convergence(&p, FluxBias::zero(), 10, 8, 1e-6).unwrap();
        assert!(!small.converged);
        let (h, rep) = converged_single_mode(&p, FluxBias::zero(), 10, 8, 1e-6, 320).unwrap();
        assert!(rep.converged && h.dim() >= 40, "{rep:?}");
        assert!(matches!(
            converged_single_mode(&p, FluxBias::zero(), 10, 8, 1e-6, 20),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn two_mode_rejects_tiny_dims() {
        let p = TwoModeParams::new([2e-14, 3e-15], [1.2e-7, 1e-8], [0.0; 2], 10.95).unwrap();
        assert!(build_two_mode_hamiltonian(&p, FluxBias::zero(), (1, 4)).is_err());
    }

    #[test]
    fn two_mode_hermitian_with_offsets() {
        let p = TwoModeParams::new([2e-14, 3e-15], [1.2e-7, 1e-8], [0.3, 0.7], 10.95).unwrap();
        let h = build_two_mode_hamiltonian(&p, FluxBias::from_pi(0.2), (12, 6)).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        assert!(linalg::as_real(&h.elements).is_none());
    }

    #[test]
    fn uncoupled_resonator_is_tensor_sum() {
        let p = SingleModeParams::device1();
        let h = build_single_mode_hamiltonian(&p, FluxBias::from_pi(-0.38), 30).unwrap();
        let (_, n) = super::super::oscillator_operators(30, p.e_c, p.e_l).unwrap();
        let r = ResonatorParams::new(6.08, 8400.0, 0.0).unwrap();
        let hc = couple_resonator(&h, &n, &r, 3, 10_000).unwrap();
        let eq = spectrum(&h);
        let mut sums: Vec<f64> = eq.iter().flat_map(|e| (0..3).map(move |m| e + m as f64 * 6.08)).collect();
        sums.sort_by(|a, b| a.total_cmp(b));
        let ec = spectrum(&hc);
        for i in 0..20 {
            assert!((ec[i] - sums[i]).abs() < 1e-9);
        }
        assert!(matches!(couple_resonator(&h, &n, &r, 3, 50), Err(Error::DimensionCap { .. })));
    }
}
