use crate::circuit::{
    build_single_mode_hamiltonian, build_two_mode_hamiltonian, oscillator_wavefunctions, FluxBias,
    HamiltonianMatrix, OscillatorOperators, SingleModeParams, TwoModeOperators, TwoModeParams,
    DEFAULT_SINGLE_DIM, DEFAULT_TWO_MODE_DIMS,
};
use crate::error::Result;
use crate::linalg::{CMatrix, RMatrix};
use num_complex::Complex64;

use super::diag::diagonalize;
use super::labels::{label_states, LabeledSpectrum};

/// A Hamiltonian family parameterized by external flux.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel {
    Single { params: SingleModeParams, dim: usize },
    TwoMode { params: TwoModeParams, dims: (usize, usize) },
}

/// Basis operators shared by labeling and matrix-element evaluation.
pub(crate) struct BasisOperators {
    pub phase: RMatrix,
    pub charge_im: RMatrix,
    pub mode1_number: Option<RMatrix>,
    /// Oscillator basis of the coordinate used for well assignment.
    pub coord_dim: usize,
    pub coord_zpf: f64,
    /// Product partner dimension (1 for single-mode).
    pub partner_dim: usize,
}

impl SpectrumModel {
    pub fn single(params: SingleModeParams) -> Self {
        SpectrumModel::Single { params, dim: DEFAULT_SINGLE_DIM }
    }

    pub fn two_mode(params: TwoModeParams) -> Self {
        SpectrumModel::TwoMode { params, dims: DEFAULT_TWO_MODE_DIMS }
    }

    pub fn hamiltonian(&self, flux: FluxBias) -> Result<HamiltonianMatrix> {
        match self {
            SpectrumModel::Single { params, dim } => build_single_mode_hamiltonian(params, flux, *dim),
            SpectrumModel::TwoMode { params, dims } => build_two_mode_hamiltonian(params, flux, *dims),
        }
    }

    /// Diagonalize and label the lowest `k` states.
    pub fn solve(&self, flux: FluxBias, k: usize) -> Result<LabeledSpectrum> {
        let h = self.hamiltonian(flux)?;
        let eig = diagonalize(&h, k)?;
        label_states(&eig, self, flux)
    }

    /// Energies with charge and phase matrix elements of the lowest `k`
    /// states, skipping the labeling pass.
    pub(crate) fn solve_unlabeled(&self, flux: FluxBias, k: usize) -> Result<(Vec<f64>, CMatrix, CMatrix)> {
        let eig = diagonalize(&self.hamiltonian(flux)?, k)?;
        let ops = self.basis_operators()?;
        let v = &eig.vectors;
        let phase = v.adjoint() * (crate::linalg::real_to_complex(&ops.phase) * v);
        let charge = v.adjoint() * (ops.charge_im.map(|x| Complex64::new(0.0, x)) * v);
        Ok((eig.energies, charge, phase))
    }

    /// Potential for well finding along the labeling coordinate:
    /// V(φ) = ½·E_L·φ² − E_J·cos(φ + φ_ext), returns (E_L, E_J).
    pub fn well_potential(&self) -> (f64, f64) {
        match self {
            SpectrumModel::Single { params, .. } => (params.e_l, params.e_j),
            SpectrumModel::TwoMode { params, .. } => {
                // mode 1 adiabatically follows θ₀ inside a well
                let (el0, el1, ej) = (params.e_l(0), params.e_l(1), params.e_j);
                let eff = el0 - ej * ej / (el1 + ej);
                (if eff > 0.0 { eff } else { el0 }, ej)
            }
        }
    }

    pub(crate) fn basis_operators(&self) -> Result<BasisOperators> {
        match self {
            SpectrumModel::Single { params, dim } => {
                let ops = OscillatorOperators::new(*dim, params.e_c, params.e_l)?;
                Ok(BasisOperators {
                    coord_zpf: ops.phi_zpf,
                    phase: ops.phase,
                    charge_im: ops.charge_im,
                    mode1_number: None,
                    coord_dim: *dim,
                    partner_dim: 1,
                })
            }
            SpectrumModel::TwoMode { params, dims } => {
                let ops = TwoModeOperators::new(params, *dims)?;
                Ok(BasisOperators {
                    coord_zpf: ops.phi_zpf[0],
                    phase: ops.junction_phase,
                    charge_im: ops.charge_total_im,
                    mode1_number: Some(ops.mode1_number),
                    coord_dim: dims.0,
                    partner_dim: dims.1,
                })
            }
        }
    }
}

impl BasisOperators {
    /// Probability density along the labeling coordinate for each column of
    /// `vectors` (marginalized over the partner mode).
    pub fn densities(&self, vectors: &CMatrix, grid: &[f64]) -> Vec<Vec<f64>> {
        let psi = oscillator_wavefunctions(self.coord_dim, self.coord_zpf, grid);
        let d1 = self.partner_dim;
        (0..vectors.ncols())
            .map(|s| {
                let col = vectors.column(s);
                let mut density = vec![0.0; grid.len()];
                for p in 0..d1 {
                    // amplitude for partner state p: Σ_i0 c[i0·d1 + p]·ψ_i0(φ)
                    for (g, d) in density.iter_mut().enumerate() {
                        let mut amp = Complex64::new(0.0, 0.0);
                        for i0 in 0..self.coord_dim {
                            amp += col[i0 * d1 + p] * psi[(g, i0)];
                        }
                        *d += amp.norm_sqr();
                    }
                }
                density
            })
            .collect()
    }

    /// Half-width of the φ range the basis can represent.
    pub fn coordinate_extent(&self) -> f64 {
        2.0 * self.coord_zpf * ((self.coord_dim as f64).sqrt() + 1.5)
    }
}
