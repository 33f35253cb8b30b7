use num_complex::Complex64;

use super::catalog::{CatalogConfig, TransitionKind, TransitionRecord};
use super::labels::LabeledSpectrum;
use crate::circuit::{couple_resonator, BasisTag, HamiltonianMatrix, ResonatorParams};
use crate::error::Result;
use crate::linalg::{self, CMatrix};

/// Qubit ⊗ resonator Hamiltonian in the retained qubit eigenbasis.
pub fn qubit_resonator_hamiltonian(s: &LabeledSpectrum, r: &ResonatorParams, n_fock: usize) -> Result<HamiltonianMatrix> {
    let k = s.len();
    let mut h = CMatrix::zeros(k, k);
    for i in 0..k {
        h[(i, i)] = Complex64::new(s.energies[i], 0.0);
    }
    let hq = HamiltonianMatrix { elements: h, basis: BasisTag::Levels { count: k } };
    couple_resonator(&hq, &s.charge_elements, r, n_fock, 1 << 14)
}

/// Joint transitions that change the qubit state and the photon number by ±1.
///
/// Dressed eigenstates are mapped to the bare |i, m⟩ with the largest
/// overlap. Blue lines start from |i, 0⟩ and end in |j, 1⟩; red lines start
/// from |i, 1⟩ and end in |j, 0⟩. Initial qubit states follow `cfg`.
pub fn sideband_lines(
    h_coupled: &HamiltonianMatrix,
    _r: &ResonatorParams,
    s: &LabeledSpectrum,
    cfg: &CatalogConfig,
) -> Result<Vec<TransitionRecord>> {
    let (dq, nf) = match h_coupled.basis {
        BasisTag::QubitFock { qubit_dim, n_fock } => (qubit_dim, n_fock),
        _ => return Err(crate::error::domain("sideband_lines expects a qubit ⊗ Fock Hamiltonian")),
    };
    if dq != s.len() {
        return Err(crate::error::domain("coupled Hamiltonian does not match the labeled spectrum"));
    }
    let (energies, vectors) = linalg::eigh_complex(&h_coupled.elements);
    // bare index → dressed index (first claim wins in energy order)
    let dim = dq * nf;
    let mut dressed_of = vec![usize::MAX; dim];
    for d in 0..dim {
        let col = vectors.column(d);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| col[b].norm_sqr().total_cmp(&col[a].norm_sqr()));
        if let Some(&bare) = order.iter().find(|&&b| dressed_of[b] == usize::MAX) {
            dressed_of[bare] = d;
        }
    }
    let bare = |q: usize, m: usize| q * nf + m;
    let mut out = Vec::new();
    for i in cfg.initial_states(&s.energies) {
        for j in 0..dq {
            if j == i {
                continue;
            }
            for (m0, m1, change) in [(0usize, 1usize, 1i32), (1, 0, -1)] {
                let a = dressed_of[bare(i, m0)];
                let b = dressed_of[bare(j, m1)];
                let f = energies[b] - energies[a];
                if f <= 0.0 {
                    continue;
                }
                out.push(TransitionRecord {
                    from_label: s.labels[i],
                    to_label: s.labels[j],
                    from_index: i,
                    to_index: j,
                    frequency: f,
                    photon_order: 1,
                    dipole_n: s.dipole_n(i, j),
                    dipole_phi: s.dipole_phi(i, j),
                    kind: TransitionKind::Sideband,
                    resonator_change: change,
                });
            }
        }
    }
    Ok(out)
}
