use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::diag::Eigenpairs;
use super::model::SpectrumModel;
use crate::circuit::FluxBias;
use crate::error::Result;
use crate::linalg::CMatrix;

/// States whose largest single-well probability is below this are delocalized.
pub const DELOCALIZED_THRESHOLD: f64 = 0.6;

const RANK_NAMES: &[&str] = &["g", "e", "f", "h", "i", "j", "k", "l", "m", "n", "o", "p"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub well_index: i32,
    /// 0 = g, 1 = e, 2 = f, 3 = h, …
    pub ladder_rank: usize,
    pub delocalized: bool,
}

impl StateLabel {
    pub fn new(well_index: i32, ladder_rank: usize) -> Self {
        StateLabel { well_index, ladder_rank, delocalized: false }
    }

    pub fn rank_name(&self) -> String {
        RANK_NAMES.get(self.ladder_rank).map(|s| s.to_string()).unwrap_or_else(|| format!("r{}_", self.ladder_rank))
    }

    /// Parses "g0", "e-1", "h2", and "r15_-3" past the named ranks.
    pub fn parse(s: &str) -> Option<(usize, i32)> {
        if let Some((rank, idx)) = s.strip_prefix('r').and_then(|t| t.split_once('_')) {
            return Some((rank.parse().ok()?, idx.parse().ok()?));
        }
        let split = s.find(|c: char| c == '-' || c.is_ascii_digit())?;
        let (name, idx) = s.split_at(split);
        let rank = RANK_NAMES.iter().position(|r| *r == name)?;
        Some((rank, idx.parse().ok()?))
    }

    pub fn matches(&self, rank: usize, well: i32) -> bool {
        self.ladder_rank == rank && self.well_index == well
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank_name(), self.well_index)
    }
}

/// A local minimum of the potential with the φ interval it owns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub index: i32,
    pub position: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Local minima of V(φ) = ½·E_L·φ² − E_J·cos(φ + φ_ext), bounded by the
/// neighbouring maxima. Minima are bracketed on a 2π/64 grid and polished by
/// damped Newton steps. Well k sits near φ = 2πk − φ_ext.
pub fn find_wells(e_l: f64, e_j: f64, phi_ext: f64) -> Vec<Well> {
    let single = vec![Well { index: 0, position: 0.0, lower: f64::NEG_INFINITY, upper: f64::INFINITY }];
    if e_j <= 0.0 {
        return single;
    }
    let dv = |x: f64| e_l * x + e_j * (x + phi_ext).sin();
    let d2v = |x: f64| e_l + e_j * (x + phi_ext).cos();
    let reach = e_j / e_l + 2.0 * PI;
    let step = 2.0 * PI / 64.0;
    let n = (2.0 * reach / step).ceil() as usize;
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 0..n {
        let a = -reach + i as f64 * step;
        let b = a + step;
        let (fa, fb) = (dv(a), dv(b));
        if fa < 0.0 && fb >= 0.0 {
            minima.push(polish_root(dv, d2v, a, b));
        } else if fa > 0.0 && fb <= 0.0 {
            maxima.push(polish_root(dv, d2v, a, b));
        }
    }
    if minima.is_empty() {
        return single;
    }
    minima
        .iter()
        .map(|&x| {
            let lower = maxima.iter().copied().filter(|m| *m < x).fold(f64::NEG_INFINITY, f64::max);
            let upper = maxima.iter().copied().filter(|m| *m > x).fold(f64::INFINITY, f64::min);
            Well { index: ((x + phi_ext) / (2.0 * PI)).round() as i32, position: x, lower, upper }
        })
        .collect()
}

// Newton with bisection fallback inside a sign-change bracket.
fn polish_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (fa0 < 0.0) {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        let next = if newton.is_finite() && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() < 1e-14 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Eigenstates with well labels, position densities and retained-level matrix elements.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub energies: Vec<f64>,
    pub labels: Vec<StateLabel>,
    pub flux: FluxBias,
    pub wells: Vec<Well>,
    /// Probability in each well, per state.
    pub well_mass: Vec<Vec<(i32, f64)>>,
    pub grid: Vec<f64>,
    /// |ψ(φ)|² on `grid` per state (marginal over the second mode for two-mode models).
    pub densities: Vec<Vec<f64>>,
    /// ⟨i|φ̂|j⟩ over retained states; for two-mode models φ̂ is the junction phase.
    pub phase_elements: CMatrix,
    /// ⟨i|n̂|j⟩ over retained states.
    pub charge_elements: CMatrix,
    /// ⟨N₁⟩ per state for two-mode models.
    pub mode1_occupation: Option<Vec<f64>>,
}

impl LabeledSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn find(&self, rank: usize, well: i32) -> Option<usize> {
        self.labels.iter().position(|l| l.matches(rank, well))
    }

    /// Index of the state labelled e.g. "f0" or "e-1".
    pub fn find_named(&self, name: &str) -> Option<usize> {
        let (rank, well) = StateLabel::parse(name)?;
        self.find(rank, well)
    }

    pub fn dipole_phi(&self, i: usize, j: usize) -> f64 {
        self.phase_elements[(i, j)].norm()
    }

    pub fn dipole_n(&self, i: usize, j: usize) -> f64 {
        self.charge_elements[(i, j)].norm()
    }
}

pub fn label_states(eig: &Eigenpairs, model: &SpectrumModel, flux: FluxBias) -> Result<LabeledSpectrum> {
    let ops = model.basis_operators()?;
    let (e_l, e_j) = model.well_potential();
    let wells = find_wells(e_l, e_j, flux.phi_ext);

    let extent = ops.coordinate_extent();
    let points = 1201;
    let grid: Vec<f64> = (0..points).map(|i| -extent + 2.0 * extent * i as f64 / (points - 1) as f64).collect();
    let dx = grid[1] - grid[0];
    let densities = ops.densities(&eig.vectors, &grid);

    let owner: Vec<Option<usize>> = grid
        .iter()
        .map(|&x| wells.iter().position(|w| x >= w.lower && x < w.upper))
        .collect();

    let k = eig.energies.len();
    let mut well_mass = Vec::with_capacity(k);
    let mut home = Vec::with_capacity(k);
    for density in &densities {
        let mut mass = vec![0.0; wells.len()];
        let mut total = 0.0;
        for (g, &d) in density.iter().enumerate() {
            total += d;
            if let Some(w) = owner[g] {
                mass[w] += d;
            }
        }
        let total = if total > 0.0 { total } else { 1.0 };
        let mass: Vec<f64> = mass.iter().map(|m| m / total).collect();
        home.push(mass.clone());
        well_mass.push(wells.iter().zip(&mass).map(|(w, &m)| (w.index, m)).collect());
    }
    let _ = dx;

    // At a symmetric bias parity partners split their weight exactly evenly;
    // tied wells take turns so a doublet reads g0, g-1 rather than g0, e0.
    let mut next_rank: BTreeMap<i32, usize> = BTreeMap::new();
    let labels = home
        .iter()
        .map(|mass| {
            let best_mass = mass.iter().cloned().fold(0.0, f64::max);
            let well = wells
                .iter()
                .zip(mass)
                .filter(|(_, &m)| m >= best_mass - 1e-9)
                .map(|(w, _)| w.index)
                .min_by_key(|i| (next_rank.get(i).copied().unwrap_or(0), std::cmp::Reverse(*i)))
                .expect("at least one well");
            let r = next_rank.entry(well).or_insert(0);
            let label = StateLabel { well_index: well, ladder_rank: *r, delocalized: best_mass < DELOCALIZED_THRESHOLD };
            *r += 1;
            label
        })
        .collect();

    let vecs = &eig.vectors;
    let phase_c = crate::linalg::real_to_complex(&ops.phase);
    let charge_c = ops.charge_im.map(|x| Complex64::new(0.0, x));
    let phase_elements = vecs.adjoint() * (&phase_c * vecs);
    let charge_elements = vecs.adjoint() * (&charge_c * vecs);
    let mode1_occupation = ops.mode1_number.as_ref().map(|n1| {
        let n1c = crate::linalg::real_to_complex(n1);
        let m = vecs.adjoint() * (&n1c * vecs);
        (0..k).map(|i| m[(i, i)].re).collect()
    });

    Ok(LabeledSpectrum {
        energies: eig.energies.clone(),
        labels,
        flux,
        wells,
        well_mass,
        grid,
        densities,
        phase_elements,
        charge_elements,
        mode1_occupation,
    })
}
