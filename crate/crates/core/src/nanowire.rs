//! Kinetic inductance of the nanowire and reduction of the distributed line
//! to effective antisymmetric-mode parameters.
//!
//! The wire is discretized into an `n_cells`-stage LC ladder. Node 0 and node
//! `n_cells` are the junction ports; each carries `c_0 + c_g` to ground (gate
//! drive nodes AC-grounded), and `c_j` (plus optionally the linearized
//! junction inductance L_J) bridges them. The network is mirror symmetric, so
//! the eigenproblem is split exactly into symmetric and antisymmetric blocks.

use serde::{Deserialize, Serialize};

use crate::circuit::TwoModeParams;
use crate::error::{domain, Error, Result};
use crate::linalg::{generalized_eigh, RMatrix};
use crate::units::{self, ELECTRON_CHARGE, ELECTRON_MASS};

pub const DEFAULT_N_CELLS: usize = 64;
pub const DEFAULT_C_J: f64 = 4e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NanowireGeometry {
    /// Full wire length.
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(rename = "width_m")]
    pub width: f64,
    #[serde(rename = "thickness_m")]
    pub thickness: f64,
    /// Cooper-pair density.
    #[serde(rename = "n_s_per_m3", default, skip_serializing_if = "Option::is_none")]
    pub n_s: Option<f64>,
}

impl NanowireGeometry {
    pub fn new(length: f64, width: f64, thickness: f64, n_s: Option<f64>) -> Result<Self> {
        let g = NanowireGeometry { length, width, thickness, n_s };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0 && self.thickness > 0.0) {
            return Err(domain("wire dimensions must be positive"));
        }
        if self.length < self.width {
            return Err(domain("wire must be at least as long as it is wide"));
        }
        Ok(())
    }

    /// length / (width · thickness), m⁻¹.
    pub fn geometric_factor(&self) -> f64 {
        self.length / (self.width * self.thickness)
    }

    /// Number of squares, length / width.
    pub fn squares(&self) -> f64 {
        self.length / self.width
    }
}

/// L_k = (m / 2e²n_s)·(length / (width·thickness)).
pub fn kinetic_inductance(g: &NanowireGeometry) -> Result<f64> {
    g.validate()?;
    let n_s = g.n_s.ok_or_else(|| domain("Cooper-pair density n_s is required"))?;
    if !(n_s > 0.0) {
        return Err(domain(format!("n_s must be positive, got {n_s}")));
    }
    Ok(ELECTRON_MASS / (2.0 * ELECTRON_CHARGE * ELECTRON_CHARGE * n_s) * g.geometric_factor())
}

/// Inverse of [`kinetic_inductance`]: the pair density giving inductance `l_k`.
pub fn sheet_density_from_inductance(l_k: f64, g: &NanowireGeometry) -> Result<f64> {
    g.validate()?;
    if !(l_k > 0.0) {
        return Err(domain(format!("inductance must be positive, got {l_k}")));
    }
    Ok(ELECTRON_MASS / (2.0 * ELECTRON_CHARGE * ELECTRON_CHARGE * l_k) * g.geometric_factor())
}

/// Inductance per square, H.
pub fn sheet_inductance(l_k: f64, g: &NanowireGeometry) -> f64 {
    l_k / g.squares()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitTopology {
    #[serde(rename = "L_nw_H")]
    pub l_nw: f64,
    #[serde(rename = "C_nw_F")]
    pub c_nw: f64,
    #[serde(rename = "C_0_F")]
    pub c_0: f64,
    #[serde(rename = "C_g_F")]
    pub c_g: f64,
    #[serde(rename = "C_J_F", default = "default_c_j")]
    pub c_j: f64,
    #[serde(default = "default_n_cells")]
    pub n_cells: usize,
}

fn default_c_j() -> f64 {
    DEFAULT_C_J
}

fn default_n_cells() -> usize {
    DEFAULT_N_CELLS
}

impl CircuitTopology {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_nw > 0.0 && self.c_nw > 0.0) {
            return Err(domain("nanowire inductance and capacitance must be positive"));
        }
        if !(self.c_0 >= 0.0 && self.c_g >= 0.0 && self.c_j >= 0.0) {
            return Err(domain("port and junction capacitances must be non-negative"));
        }
        if self.n_cells < 8 || self.n_cells % 2 != 0 {
            return Err(domain(format!("n_cells must be even and >= 8, got {}", self.n_cells)));
        }
        Ok(())
    }

    /// Topology from nanowire inductance and characteristic impedance.
    pub fn from_impedance(l_nw: f64, z_nw: f64, c_0: f64, c_g: f64, c_j: f64, n_cells: usize) -> Result<Self> {
        if !(z_nw > 0.0) {
            return Err(domain("impedance must be positive"));
        }
        let t = CircuitTopology { l_nw, c_nw: l_nw / (z_nw * z_nw), c_0, c_g, c_j, n_cells };
        t.validate()?;
        Ok(t)
    }

    pub fn nanowire(&self) -> NanowireParams {
        NanowireParams { z_nw: (self.l_nw / self.c_nw).sqrt() }
    }

    pub fn with_cells(mut self, n_cells: usize) -> Self {
        self.n_cells = n_cells;
        self
    }

    /// Device-1-like topology: 121 nH, 1.85 kΩ. Port and junction
    /// capacitances are not known from measurement; these values put the
    /// charging energy of the lowest mode near 0.9 GHz and the second
    /// antisymmetric mode in the 14–18 GHz band.
    pub fn device1() -> Self {
        CircuitTopology::from_impedance(121e-9, 1.85e3, 22e-15, 2e-15, 4e-15, DEFAULT_N_CELLS)
            .expect("valid preset")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NanowireParams {
    #[serde(rename = "Z_nw_Ohm")]
    pub z_nw: f64,
}

/// Linear network of the discretized wire.
#[derive(Debug, Clone)]
pub struct LadderNetwork {
    pub topology: CircuitTopology,
    /// Linear inductance bridging the ports, when the junction is linearized.
    pub junction_inductance: Option<f64>,
    pub capacitance: RMatrix,
    pub inverse_inductance: RMatrix,
}

impl LadderNetwork {
    pub fn node_count(&self) -> usize {
        self.topology.n_cells + 1
    }

    /// DC inductance between the two ports with the bridge removed.
    pub fn series_inductance(&self) -> f64 {
        let n = self.topology.n_cells;
        // Path graph: series inductances add; read them back off the matrix.
        (0..n).map(|j| 1.0 / -self.wire_coupling(j)).sum()
    }

    fn wire_coupling(&self, j: usize) -> f64 {
        self.inverse_inductance[(j, j + 1)]
    }
}

pub fn build_ladder(t: &CircuitTopology, junction_inductance: Option<f64>) -> Result<LadderNetwork> {
    t.validate()?;
    if let Some(lj) = junction_inductance {
        if !(lj > 0.0) {
            return Err(domain("junction inductance must be positive"));
        }
    }
    let n = t.n_cells;
    let nodes = n + 1;
    let c_cell = t.c_nw / n as f64;
    let inv_l_cell = n as f64 / t.l_nw;
    let mut c = RMatrix::zeros(nodes, nodes);
    let mut k = RMatrix::zeros(nodes, nodes);
    for j in 0..nodes {
        c[(j, j)] = if j == 0 || j == n { 0.5 * c_cell + t.c_0 + t.c_g } else { c_cell };
    }
    for j in 0..n {
        k[(j, j)] += inv_l_cell;
        k[(j + 1, j + 1)] += inv_l_cell;
        k[(j, j + 1)] -= inv_l_cell;
        k[(j + 1, j)] -= inv_l_cell;
    }
    bridge(&mut c, n, t.c_j);
    if let Some(lj) = junction_inductance {
        bridge(&mut k, n, 1.0 / lj);
    }
    Ok(LadderNetwork { topology: *t, junction_inductance, capacitance: c, inverse_inductance: k })
}

fn bridge(m: &mut RMatrix, n: usize, value: f64) {
    m[(0, 0)] += value;
    m[(n, n)] += value;
    m[(0, n)] -= value;
    m[(n, 0)] -= value;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

/// One normal mode of the linear network.
///
/// Mode shapes are normalized to vᵀCv = C_nw, making node amplitudes
/// dimensionless. For antisymmetric modes the effective elements refer to
/// the port flux difference as coordinate; symmetric modes use their
/// common port amplitude (or peak amplitude when that vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    #[serde(rename = "freq_GHz")]
    pub frequency: f64,
    pub symmetry: Symmetry,
    pub port_difference: f64,
    #[serde(rename = "C_eff_F")]
    pub c_eff: f64,
    #[serde(rename = "L_eff_H")]
    pub l_eff: f64,
}

impl ModeRecord {
    pub fn angular_frequency(&self) -> f64 {
        units::angular(self.frequency)
    }
}

/// Normal modes sorted by frequency, plus the bridge inductance they were
/// computed with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<ModeRecord>,
    #[serde(rename = "L_J_H")]
    pub junction_inductance: Option<f64>,
}

impl ModeSet {
    pub fn antisymmetric(&self) -> impl Iterator<Item = &ModeRecord> {
        self.modes.iter().filter(|m| m.symmetry == Symmetry::Antisymmetric)
    }
}

/// Solves the generalized eigenproblem K v = ω² C v separately on the
/// mirror-symmetric and antisymmetric subspaces. The uniform (zero-frequency)
/// symmetric mode is dropped.
pub fn normal_modes(ladder: &LadderNetwork) -> Result<ModeSet> {
    let mut modes = parity_block_modes(ladder, Symmetry::Antisymmetric)?;
    modes.extend(parity_block_modes(ladder, Symmetry::Symmetric)?);
    modes.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(ModeSet { modes, junction_inductance: ladder.junction_inductance })
}

fn parity_basis(nodes: usize, symmetry: Symmetry) -> RMatrix {
    let n = nodes - 1;
    let mid = n / 2;
    let cols = match symmetry {
        Symmetry::Symmetric => mid + 1,
        Symmetry::Antisymmetric => mid,
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = RMatrix::zeros(nodes, cols);
    for j in 0..mid {
        b[(j, j)] = s;
        b[(n - j, j)] = if symmetry == Symmetry::Symmetric { s } else { -s };
    }
    if symmetry == Symmetry::Symmetric {
        b[(mid, mid)] = 1.0;
    }
    b
}

fn parity_block_modes(ladder: &LadderNetwork, symmetry: Symmetry) -> Result<Vec<ModeRecord>> {
    let nodes = ladder.node_count();
    let n = nodes - 1;
    let b = parity_basis(nodes, symmetry);
    let cb = b.transpose() * &ladder.capacitance * &b;
    let kb = b.transpose() * &ladder.inverse_inductance * &b;
    let (w2, y) = generalized_eigh(&kb, &cb)
        .map_err(|e| Error::Numerical(format!("{symmetry:?} block: {e}")))?;
    let c_nw = ladder.topology.c_nw;
    let scale = c_nw.sqrt();
    let k_scale = kb.diagonal().amax() / cb.diagonal().amax();
    let mut out = Vec::with_capacity(w2.len());
    for (i, &lambda) in w2.iter().enumerate() {
        if lambda <= 1e-9 * k_scale {
            // uniform flux shift of the whole circuit
            continue;
        }
        let omega = lambda.sqrt();
        let v = &b * y.column(i) * scale;
        let (coord, port_difference) = match symmetry {
            Symmetry::Antisymmetric => {
                let d = v[n] - v[0];
                (d.abs(), d.abs())
            }
            Symmetry::Symmetric => {
                let common = 0.5 * (v[0] + v[n]);
                let a = if common.abs() > 1e-8 * v.amax() { common.abs() } else { v.amax() };
                (a, 0.0)
            }
        };
        if !(coord > 0.0) {
            return Err(Error::Numerical(format!("{symmetry:?} mode {i} has no port amplitude")));
        }
        let c_eff = c_nw / (coord * coord);
        let l_eff = 1.0 / (omega * omega * c_eff);
        out.push(ModeRecord {
            frequency: omega / units::angular(1.0),
            symmetry,
            port_difference,
            c_eff,
            l_eff,
        });
    }
    Ok(out)
}

/// Continuum-limit modes: antisymmetric mode quantities (ω² and C_eff⁻¹) from
/// ladders with `n`, `2n` and `4n` cells combined by two Richardson steps,
/// which cancels the O(1/n²) and O(1/n⁴) discretization errors.
pub fn extrapolated_modes(t: &CircuitTopology, junction_inductance: Option<f64>, count: usize) -> Result<ModeSet> {
    let levels: Vec<Vec<ModeRecord>> = [1usize, 2, 4]
        .iter()
        .map(|&f| {
            let ladder = build_ladder(&t.with_cells(t.n_cells * f), junction_inductance)?;
            parity_block_modes(&ladder, Symmetry::Antisymmetric)
        })
        .collect::<Result<_>>()?;
    let available = levels.iter().map(|l| l.len()).min().unwrap_or(0);
    let count = count.min(available);
    let richardson = |a: f64, b: f64, c: f64| {
        let r1 = (4.0 * b - a) / 3.0;
        let r2 = (4.0 * c - b) / 3.0;
        (16.0 * r2 - r1) / 15.0
    };
    let mut modes = Vec::with_capacity(count);
    for i in 0..count {
        let w2 = |m: &ModeRecord| m.angular_frequency().powi(2);
        let inv_c = |m: &ModeRecord| 1.0 / m.c_eff;
        let omega2 = richardson(w2(&levels[0][i]), w2(&levels[1][i]), w2(&levels[2][i]));
        let c_inv = richardson(inv_c(&levels[0][i]), inv_c(&levels[1][i]), inv_c(&levels[2][i]));
        if !(omega2 > 0.0 && c_inv > 0.0) {
            return Err(Error::Numerical(format!("extrapolation of antisymmetric mode {i} failed")));
        }
        let c_eff = 1.0 / c_inv;
        modes.push(ModeRecord {
            frequency: omega2.sqrt() / units::angular(1.0),
            symmetry: Symmetry::Antisymmetric,
            port_difference: (t.c_nw * c_inv).sqrt(),
            c_eff,
            l_eff: 1.0 / (omega2 * c_eff),
        });
    }
    Ok(ModeSet { modes, junction_inductance })
}

/// Effective parameters of the lowest `count` antisymmetric modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiModeParams {
    #[serde(rename = "C_eff_F")]
    pub c_eff: Vec<f64>,
    #[serde(rename = "L_eff_H")]
    pub l_eff: Vec<f64>,
    #[serde(rename = "E_J_GHz")]
    pub e_j: f64,
}

/// Maps antisymmetric modes computed *with* the linearized junction onto
/// mode coordinates whose sum is the junction phase. The junction's own
/// quadratic term is removed from each mode (1/L̃ᵢ = 1/L_eff,i − 1/L_J) and
/// reappears as the cross terms −φᵢφⱼ/L_J plus the full cosine.
pub fn reduce_to_multimode(modes: &ModeSet, count: usize, e_j: f64) -> Result<MultiModeParams> {
    if count == 0 {
        return Err(domain("mode count must be positive"));
    }
    if !(e_j > 0.0) {
        return Err(domain("E_J must be positive"));
    }
    let l_j = units::inductance_from_energy(e_j);
    match modes.junction_inductance {
        Some(l) if ((l - l_j) / l_j).abs() < 1e-9 => {}
        Some(l) => {
            return Err(domain(format!("modes computed with L_J = {l:e} H but E_J implies {l_j:e} H")));
        }
        None => return Err(domain("modes must be computed with the linearized junction inductance")),
    }
    let anti: Vec<&ModeRecord> = modes.antisymmetric().take(count).collect();
    if anti.len() < count {
        return Err(Error::Numerical(format!(
            "requested {count} antisymmetric modes, only {} available",
            anti.len()
        )));
    }
    let mut c_eff = Vec::with_capacity(count);
    let mut l_eff = Vec::with_capacity(count);
    for (i, m) in anti.iter().enumerate() {
        let inv = 1.0 / m.l_eff - 1.0 / l_j;
        if !(inv > 0.0) {
            return Err(Error::Numerical(format!(
                "antisymmetric mode {i} is stiffened entirely by the junction (1/L̃ = {inv:e})"
            )));
        }
        c_eff.push(m.c_eff);
        l_eff.push(1.0 / inv);
    }
    Ok(MultiModeParams { c_eff, l_eff, e_j })
}

pub fn reduce_to_modes(modes: &ModeSet, count: usize, e_j: f64) -> Result<TwoModeParams> {
    if count != 2 {
        return Err(domain(format!("two-mode reduction needs count = 2, got {count}")));
    }
    let m = reduce_to_multimode(modes, 2, e_j)?;
    TwoModeParams::new([m.c_eff[0], m.c_eff[1]], [m.l_eff[0], m.l_eff[1]], [0.0, 0.0], e_j)
}

/// build_ladder → continuum-extrapolated modes → two-mode reduction.
pub fn two_mode_from_topology(t: &CircuitTopology, e_j: f64) -> Result<TwoModeParams> {
    let l_j = units::inductance_from_energy(e_j);
    let modes = extrapolated_modes(t, Some(l_j), 2)?;
    reduce_to_modes(&modes, 2, e_j)
}
