use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::levels::CollapseOp;
use crate::error::{domain, Error, Result};
use crate::linalg::{eigvalsh_complex, hermiticity_defect, CMatrix};
use crate::units::GHZ;

/// Largest dt·(generator scale) accepted by [`evolve`].
pub const MAX_STEP_PHASE: f64 = 0.1;
/// Stored states per trajectory, at most (plus the initial state).
pub const MAX_STORED: usize = 1000;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub rho: CMatrix,
}

impl DensityState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(domain("density matrix must be square"));
        }
        let s = DensityState { rho };
        if (s.trace() - 1.0).abs() > 1e-9 {
            return Err(domain(format!("density matrix trace {} is not 1", s.trace())));
        }
        if hermiticity_defect(&s.rho) > 1e-12 {
            return Err(domain("density matrix is not Hermitian"));
        }
        if s.min_eigenvalue() < -1e-10 {
            return Err(domain("density matrix is not positive"));
        }
        Ok(s)
    }

    pub fn pure(dim: usize, level: usize) -> Self {
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(level, level)] = C1;
        DensityState { rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.population(k)).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        eigvalsh_complex(&herm).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn to_vec(&self) -> DVector<Complex64> {
        DVector::from_column_slice(self.rho.as_slice())
    }

    pub(crate) fn from_vec(v: &DVector<Complex64>, dim: usize) -> Self {
        DensityState { rho: CMatrix::from_column_slice(dim, dim, v.as_slice()) }
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Sum over channels of rate·(C ⊗ C̄ terms) acting on column-major vec(ρ).
fn dissipator(dim: usize, collapse: &[CollapseOp]) -> Result<CMatrix> {
    let id = CMatrix::identity(dim, dim);
    let mut l = CMatrix::zeros(dim * dim, dim * dim);
    for c in collapse {
        if c.from_index >= dim || c.to_index >= dim {
            return Err(domain(format!("collapse channel {}->{} outside {dim} levels", c.from_index, c.to_index)));
        }
        if c.rate == 0.0 {
            continue;
        }
        // C = |to⟩⟨from|: CρC† moves ρ_ff into ρ_tt; C†C = |from⟩⟨from|.
        let (f, t) = (c.from_index, c.to_index);
        l[(t + t * dim, f + f * dim)] += c.rate;
        let mut proj = CMatrix::zeros(dim, dim);
        proj[(f, f)] = C1;
        let half = Complex64::new(-0.5 * c.rate, 0.0);
        l += (kron(&id, &proj) + kron(&proj.transpose(), &id)) * half;
    }
    Ok(l)
}

/// Lindblad generator on column-major vec(ρ), in s⁻¹. `h` is in GHz.
pub fn liouvillian(h: &CMatrix, collapse: &[CollapseOp]) -> Result<CMatrix> {
    let d = h.nrows();
    if !h.is_square() {
        return Err(domain("Hamiltonian must be square"));
    }
    let id = CMatrix::identity(d, d);
    let w = h * Complex64::new(2.0 * PI * GHZ, 0.0);
    let coherent = (kron(&id, &w) - kron(&w.transpose(), &id)) * Complex64::new(0.0, -1.0);
    Ok(coherent + dissipator(d, collapse)?)
}

/// Spectral radius of H in angular units (rad/s).
pub fn angular_scale(h: &CMatrix) -> f64 {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    2.0 * PI * GHZ * eigvalsh_complex(&herm).into_iter().fold(0.0f64, |m, e| m.max(e.abs()))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityState>,
    /// Largest |Tr ρ − 1| over every step, not only the stored ones.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue of ρ over the stored states.
    pub min_eigenvalue: f64,
    pub max_hermiticity_defect: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DensityState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn population(&self, level: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(level)).collect()
    }
}

/// Time-independent Lindblad evolution with the exact one-step propagator
/// e^{L·dt}. At most [`MAX_STORED`] states are kept, evenly strided.
pub fn evolve(rho0: &DensityState, h: &CMatrix, collapse: &[CollapseOp], duration: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(domain("duration must be non-negative and dt positive"));
    }
    let d = rho0.dim();
    if h.shape() != (d, d) {
        return Err(domain("Hamiltonian and density matrix dimensions differ"));
    }
    let scale = angular_scale(h).max(collapse.iter().map(|c| c.rate).sum());
    if dt * scale >= MAX_STEP_PHASE {
        return Err(Error::StepSize { dt, suggested: 0.5 * MAX_STEP_PHASE / scale });
    }
    let steps = (duration / dt).round() as usize;
    let stride = steps.div_ceil(MAX_STORED).max(1);
    let prop = (liouvillian(h, collapse)? * Complex64::new(dt, 0.0)).exp();

    let mut v = rho0.to_vec();
    let mut out = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_trace_drift: (rho0.trace() - 1.0).abs(),
        min_eigenvalue: rho0.min_eigenvalue(),
        max_hermiticity_defect: hermiticity_defect(&rho0.rho),
    };
    let diag: Vec<usize> = (0..d).map(|k| k + k * d).collect();
    for step in 1..=steps {
        v = &prop * v;
        let tr: f64 = diag.iter().map(|&i| v[i].re).sum();
        out.max_trace_drift = out.max_trace_drift.max((tr - 1.0).abs());
        if step % stride == 0 || step == steps {
            let s = DensityState::from_vec(&v, d);
            out.min_eigenvalue = out.min_eigenvalue.min(s.min_eigenvalue());
            out.max_hermiticity_defect = out.max_hermiticity_defect.max(hermiticity_defect(&s.rho));
            out.times.push(step as f64 * dt);
            out.states.push(s);
        }
    }
    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Numerical("evolution produced non-finite entries".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityState,
    /// Second-smallest over largest singular value of the generator.
    pub gap_ratio: f64,
    pub degenerate: bool,
}

/// Relative singular-value floor below which a second null vector is assumed.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Null vector of the generator with unit trace. One balance equation is
/// replaced by the trace condition and the system solved by LU.
pub fn steady_state(h: &CMatrix, collapse: &[CollapseOp]) -> Result<SteadyState> {
    let d = h.nrows();
    let l = liouvillian(h, collapse)?;
    let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let largest = sv.last().copied().unwrap_or(0.0);
    let gap_ratio = if largest > 0.0 { sv.get(1).copied().unwrap_or(0.0) / largest } else { 0.0 };
    let degenerate = gap_ratio < DEGENERACY_RATIO;

    let mut a = l;
    let mut rhs = DVector::from_element(d * d, C0);
    let row = 0;
    for j in 0..d * d {
        a[(row, j)] = C0;
    }
    for k in 0..d {
        a[(row, k + k * d)] = C1;
    }
    rhs[row] = C1;
    let v = match a.clone().lu().solve(&rhs) {
        Some(v) if !degenerate => v,
        // Any member of a degenerate null space will do; the caller sees the flag.
        _ => a
            .svd(true, true)
            .solve(&rhs, 1e-12 * largest)
            .map_err(|e| Error::Numerical(format!("steady-state solve failed: {e}")))?,
    };
    let mut s = DensityState::from_vec(&v, d);
    s.rho = (&s.rho + s.rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(SteadyState { state: s, gap_ratio, degenerate })
}

/// Right-hand side of the master equation, with `h` already in rad/s.
pub(crate) fn lindblad_rhs(h: &CMatrix, rho: &CMatrix, collapse: &[CollapseOp]) -> CMatrix {
    let mut out = (h * rho - rho * h) * Complex64::new(0.0, -1.0);
    for c in collapse {
        if c.rate == 0.0 {
            continue;
        }
        let (f, t) = (c.from_index, c.to_index);
        out[(t, t)] += rho[(f, f)] * c.rate;
        let d = rho.nrows();
        for k in 0..d {
            out[(f, k)] -= rho[(f, k)] * (0.5 * c.rate);
            out[(k, f)] -= rho[(k, f)] * (0.5 * c.rate);
        }
    }
    out
}

/// Classic RK4 for a time-dependent Hamiltonian `h_at(t)` (rad/s).
pub(crate) fn rk4<F>(rho: &mut CMatrix, t0: f64, dt: f64, steps: usize, collapse: &[CollapseOp], mut h_at: F)
where
    F: FnMut(f64) -> CMatrix,
{
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let h0 = h_at(t);
        let hm = h_at(t + 0.5 * dt);
        let h1 = h_at(t + dt);
        let k1 = lindblad_rhs(&h0, rho, collapse);
        let k2 = lindblad_rhs(&hm, &(&*rho + &k1 * half), collapse);
        let k3 = lindblad_rhs(&hm, &(&*rho + &k2 * half), collapse);
        let k4 = lindblad_rhs(&h1, &(&*rho + &k3 * full), collapse);
        *rho += (k1 + (k2 + k3) * two + k4) * sixth;
    }
}
