use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

use super::dataset::{DataPoint, SpectroscopyDataset};
use super::simplex::{nelder_mead, SimplexOptions, SimplexResult};
use crate::circuit::{FluxBias, SingleModeParams, TwoModeParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::nanowire::{two_mode_from_topology, CircuitTopology};
use crate::spectra::{allowed_lines, CatalogConfig, Line, SpectrumModel};

/// Objective value used when the model cannot be built at a trial point.
const INVALID_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    /// Standard deviation of the log-space jitter applied to restarts after the first.
    pub jitter: f64,
    pub seed: u64,
    /// Co-fit φ_model = scale·φ_data + offset.
    pub flux_cal: bool,
    /// Assignment gate in GHz; farther points cost a flat gate².
    pub gate: f64,
    pub levels: usize,
    pub catalog: CatalogConfig,
    pub single_dim: usize,
    pub two_mode_dims: (usize, usize),
    pub two_mode_levels: usize,
    /// Ladder size for the two-mode pipeline (continuum-extrapolated).
    pub n_cells: usize,
    pub simplex: SimplexOptions,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 8,
            jitter: 0.05,
            seed: 0,
            flux_cal: true,
            gate: 0.5,
            levels: 10,
            catalog: CatalogConfig::default(),
            single_dim: 60,
            two_mode_dims: (20, 6),
            two_mode_levels: 15,
            n_cells: 16,
            simplex: SimplexOptions::default(),
            exec: Execution::default(),
        }
    }
}

/// Free topology parameters of a two-mode fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyParam {
    LNw,
    CNw,
    C0,
    Cg,
    Cj,
    Ej,
}

impl TopologyParam {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "l_nw" => TopologyParam::LNw,
            "c_nw" => TopologyParam::CNw,
            "c_0" => TopologyParam::C0,
            "c_g" => TopologyParam::Cg,
            "c_j" => TopologyParam::Cj,
            "e_j" => TopologyParam::Ej,
            _ => return None,
        })
    }

    fn get(self, t: &CircuitTopology, e_j: f64) -> f64 {
        match self {
            TopologyParam::LNw => t.l_nw,
            TopologyParam::CNw => t.c_nw,
            TopologyParam::C0 => t.c_0,
            TopologyParam::Cg => t.c_g,
            TopologyParam::Cj => t.c_j,
            TopologyParam::Ej => e_j,
        }
    }

    fn set(self, t: &mut CircuitTopology, e_j: &mut f64, v: f64) {
        match self {
            TopologyParam::LNw => t.l_nw = v,
            TopologyParam::CNw => t.c_nw = v,
            TopologyParam::C0 => t.c_0 = v,
            TopologyParam::Cg => t.c_g = v,
            TopologyParam::Cj => t.c_j = v,
            TopologyParam::Ej => *e_j = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCalibration {
    pub scale: f64,
    #[serde(rename = "offset_rad")]
    pub offset: f64,
}

impl FluxCalibration {
    pub fn identity() -> Self {
        FluxCalibration { scale: 1.0, offset: 0.0 }
    }

    pub fn apply(&self, phi_data: f64) -> f64 {
        self.scale * phi_data + self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Single {
        params: SingleModeParams,
    },
    TwoMode {
        topology: CircuitTopology,
        params: TwoModeParams,
        #[serde(rename = "L_nw_H")]
        l_nw: f64,
        #[serde(rename = "Z_nw_Ohm")]
        z_nw: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    /// Assigned model line in GHz (tone frequency), if any.
    #[serde(rename = "model_GHz")]
    pub model: Option<f64>,
    /// f_meas − f_model in GHz.
    #[serde(rename = "residual_GHz")]
    pub residual: Option<f64>,
    pub within_gate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fit: FittedModel,
    pub flux_calibration: FluxCalibration,
    pub objective: f64,
    /// Weighted RMS of the assigned residuals, GHz.
    #[serde(rename = "residual_rms_GHz")]
    pub residual_rms: f64,
    /// In input row order.
    pub residuals: Vec<PointResidual>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub restart_objectives: Vec<f64>,
    /// Best objective after each simplex iteration of the selected restart.
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn single_params(&self) -> Option<&SingleModeParams> {
        match &self.fit {
            FittedModel::Single { params } => Some(params),
            _ => None,
        }
    }
}

/// Dataset in a canonical order with flux groups, so the objective does not
/// depend on row order.
struct Problem<'a> {
    points: Vec<DataPoint>,
    original_index: Vec<usize>,
    /// (start, end) ranges of equal flux.
    groups: Vec<(usize, usize)>,
    total_weight: f64,
    levels: usize,
    opts: &'a FitOptions,
}

impl<'a> Problem<'a> {
    fn new(data: &SpectroscopyDataset, levels: usize, opts: &'a FitOptions) -> Result<Self> {
        data.validate()?;
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.sort_by(|&a, &b| data.points[a].canonical_cmp(&data.points[b]).then(a.cmp(&b)));
        let points: Vec<DataPoint> = idx.iter().map(|&i| data.points[i].clone()).collect();
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=points.len() {
            if i == points.len() || points[i].phi_ext != points[start].phi_ext {
                groups.push((start, i));
                start = i;
            }
        }
        let total_weight = points.iter().map(|p| p.weight).sum();
        Ok(Problem { points, original_index: idx, groups, total_weight, levels, opts })
    }

    /// Assigned model line per canonical point.
    fn assign(&self, model: &SpectrumModel, cal: FluxCalibration) -> Result<Vec<Option<f64>>> {
        let mut out = vec![None; self.points.len()];
        for &(a, b) in &self.groups {
            let flux = FluxBias::new(cal.apply(self.points[a].phi_ext))?;
            let hinted = self.points[a..b].iter().any(|p| p.label_hint.is_some());
            let (lines, names): (Vec<Line>, Option<Vec<String>>) = if hinted {
                let s = model.solve(flux, self.levels)?;
                let lines = allowed_lines(&s.energies, &s.charge_elements, &s.phase_elements, &self.opts.catalog);
                (lines, Some(s.labels.iter().map(|l| l.to_string()).collect()))
            } else {
                let (e, n, phi) = model.solve_unlabeled(flux, self.levels)?;
                (allowed_lines(&e, &n, &phi, &self.opts.catalog), None)
            };
            for (slot, p) in out[a..b].iter_mut().zip(&self.points[a..b]) {
                let same_order = lines.iter().filter(|l| l.order == p.photon_order);
                *slot = match (p.hint_pair(), &names) {
                    (Some((from, to)), Some(names)) => {
                        same_order.clone().find(|l| names[l.from] == from && names[l.to] == to).map(|l| l.frequency)
                    }
                    _ => same_order
                        .min_by(|x, y| (x.frequency - p.freq).abs().total_cmp(&(y.frequency - p.freq).abs()))
                        .map(|l| l.frequency),
                };
            }
        }
        Ok(out)
    }

    fn objective_of(&self, assigned: &[Option<f64>]) -> f64 {
        let cap = self.opts.gate * self.opts.gate;
        let sum: f64 = self
            .points
            .iter()
            .zip(assigned)
            .map(|(p, m)| p.weight * m.map_or(cap, |m| (p.freq - m).powi(2).min(cap)))
            .sum();
        sum / self.total_weight
    }

    fn residuals(&self, assigned: &[Option<f64>]) -> (Vec<PointResidual>, f64) {
        let mut out = vec![PointResidual { model: None, residual: None, within_gate: false }; self.points.len()];
        let (mut sw, mut swr) = (0.0, 0.0);
        for (k, (p, m)) in self.points.iter().zip(assigned).enumerate() {
            let r = m.map(|m| p.freq - m);
            if let Some(r) = r {
                sw += p.weight;
                swr += p.weight * r * r;
            }
            out[self.original_index[k]] = PointResidual {
                model: *m,
                residual: r,
                within_gate: r.is_some_and(|r| r.abs() <= self.opts.gate),
            };
        }
        (out, if sw > 0.0 { (swr / sw).sqrt() } else { f64::NAN })
    }
}

/// Shared restart driver. `n_model` leading coordinates are log-parameters;
/// with flux calibration two more follow (offset, ln scale).
struct Search<'a, B: Fn(&[f64]) -> Result<SpectrumModel> + Sync> {
    problem: Problem<'a>,
    build: B,
    n_model: usize,
}

struct Outcome {
    x: Vec<f64>,
    run: SimplexResult,
    restart_objectives: Vec<f64>,
}

impl<'a, B: Fn(&[f64]) -> Result<SpectrumModel> + Sync> Search<'a, B> {
    fn calibration(&self, x: &[f64]) -> FluxCalibration {
        if self.problem.opts.flux_cal {
            FluxCalibration { offset: x[self.n_model], scale: x[self.n_model + 1].exp() }
        } else {
            FluxCalibration::identity()
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let model = match (self.build)(&x[..self.n_model]) {
            Ok(m) => m,
            Err(_) => return INVALID_PENALTY,
        };
        match self.problem.assign(&model, self.calibration(x)) {
            Ok(a) => self.problem.objective_of(&a),
            Err(_) => INVALID_PENALTY,
        }
    }

    fn run(&self, x0: &[f64]) -> Outcome {
        let opts = self.problem.opts;
        let mut x0 = x0.to_vec();
        let mut step = vec![0.05; self.n_model];
        if opts.flux_cal {
            x0.extend([0.0, 0.0]);
            step.extend([0.02, 0.01]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1))
            .map(|r| {
                let mut x = x0.clone();
                if r > 0 {
                    for (k, v) in x.iter_mut().enumerate() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        let width = if k < self.n_model { opts.jitter } else { 0.4 * step[k] };
                        *v += width * z;
                    }
                }
                x
            })
            .collect();

        let runs = opts.exec.map(&starts, |x| {
            let first = nelder_mead(|x| self.objective(x), x, &step, &opts.simplex);
            // restart once from the result with a fresh simplex to guard against collapse
            let fine: Vec<f64> = step.iter().map(|s| 0.1 * s).collect();
            let second = nelder_mead(|x| self.objective(x), &first.x, &fine, &opts.simplex);
            let mut history = first.history;
            history.extend(second.history.iter().map(|&f| f.min(first.f)));
            SimplexResult {
                x: second.x,
                f: second.f.min(first.f),
                evaluations: first.evaluations + second.evaluations,
                iterations: first.iterations + second.iterations,
                converged: second.converged,
                history,
            }
        });
        let restart_objectives: Vec<f64> = runs.iter().map(|r| r.f).collect();
        let best = runs
            .into_iter()
            .min_by(|a, b| {
                a.f.total_cmp(&b.f).then_with(|| {
                    a.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
                })
            })
            .expect("at least one restart");
        Outcome { x: best.x.clone(), run: best, restart_objectives }
    }

    fn report(&self, out: Outcome, fit: FittedModel, model: &SpectrumModel, mut warnings: Vec<String>) -> Result<FitReport> {
        let cal = self.calibration(&out.x);
        let assigned = self.problem.assign(model, cal)?;
        let objective = self.problem.objective_of(&assigned);
        let (residuals, residual_rms) = self.problem.residuals(&assigned);
        let outside = residuals.iter().filter(|r| !r.within_gate).count();
        if outside > 0 {
            warnings.push(format!("{outside} point(s) outside the {} GHz assignment gate", self.problem.opts.gate));
        }
        // well labels swap freely between degenerate wells, so hints there
        // make the objective jump under tiny parameter changes
        let at_symmetry = self
            .problem
            .points
            .iter()
            .filter(|pt| pt.label_hint.is_some())
            .filter(|pt| {
                let phi = cal.apply(pt.phi_ext);
                (phi - PI * (phi / PI).round()).abs() < 0.02
            })
            .count();
        if at_symmetry > 0 {
            warnings.push(format!("{at_symmetry} hinted point(s) sit at a symmetry point where well labels are ambiguous"));
        }
        if !out.run.converged {
            warnings.push("simplex stopped at the evaluation limit".into());
        }
        Ok(FitReport {
            fit,
            flux_calibration: cal,
            objective,
            residual_rms,
            residuals,
            iterations: out.run.iterations,
            evaluations: out.run.evaluations,
            converged: out.run.converged,
            restart_objectives: out.restart_objectives,
            history: out.run.history,
            warnings,
        })
    }
}

/// Fits (E_C, E_L, E_J) of the single-mode model to a spectroscopy dataset.
/// Each point is matched to the label-hinted line or else the nearest
/// cataloged line of the same photon order.
pub fn fit_single_mode(data: &SpectroscopyDataset, init: SingleModeParams, opts: &FitOptions) -> Result<FitReport> {
    init.validate()?;
    data.validate()?;
    if data.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", data.len())));
    }
    let span = data.flux_span();
    if span < 0.3 * std::f64::consts::TAU {
        return Err(Error::Fit(format!("flux span {span:.3} rad is below 0.3 periods")));
    }
    let dim = opts.single_dim;
    let build = |x: &[f64]| -> Result<SpectrumModel> {
        Ok(SpectrumModel::Single { params: SingleModeParams::new(x[0].exp(), x[1].exp(), x[2].exp())?, dim })
    };
    let search = Search { problem: Problem::new(data, opts.levels, opts)?, build, n_model: 3 };
    let out = search.run(&[init.e_c.ln(), init.e_l.ln(), init.e_j.ln()]);
    let params = SingleModeParams::new(out.x[0].exp(), out.x[1].exp(), out.x[2].exp())?;
    let model = SpectrumModel::Single { params, dim };
    search.report(out, FittedModel::Single { params }, &model, Vec::new())
}

/// Fits free topology parameters through the full ladder → modes → two-mode
/// Hamiltonian pipeline. Parameters not in `free` stay at their `topo0`/`e_j`
/// values.
pub fn fit_two_mode(
    data: &SpectroscopyDataset,
    topo0: &CircuitTopology,
    e_j: f64,
    free: &[TopologyParam],
    opts: &FitOptions,
) -> Result<FitReport> {
    data.validate()?;
    let mut free = free.to_vec();
    free.sort();
    free.dedup();
    if free.is_empty() {
        return Err(Error::Fit("no free parameters".into()));
    }
    if let Some(p) = free.iter().find(|p| p.get(topo0, e_j) <= 0.0) {
        return Err(Error::Fit(format!("free parameter {p:?} must start positive")));
    }
    let base = topo0.with_cells(opts.n_cells);
    base.validate()?;
    let dims = opts.two_mode_dims;
    let assemble = |x: &[f64]| -> Result<(CircuitTopology, f64, TwoModeParams)> {
        let (mut t, mut ej) = (base, e_j);
        for (p, v) in free.iter().zip(x) {
            p.set(&mut t, &mut ej, v.exp());
        }
        t.validate()?;
        let params = two_mode_from_topology(&t, ej)?;
        Ok((t, ej, params))
    };

    let (_, _, p0) = assemble(&free.iter().map(|p| p.get(&base, e_j).ln()).collect::<Vec<_>>())?;
    let (_, top) = data.gap_window();
    if top < 0.75 * p0.linear_frequency(1) {
        return Err(Error::Fit(format!(
            "no data on the high-frequency branch: highest gap {top:.3} GHz, second mode near {:.3} GHz",
            p0.linear_frequency(1)
        )));
    }

    let build = |x: &[f64]| -> Result<SpectrumModel> { Ok(SpectrumModel::TwoMode { params: assemble(x)?.2, dims }) };
    let search = Search { problem: Problem::new(data, opts.two_mode_levels, opts)?, build, n_model: free.len() };
    let x0: Vec<f64> = free.iter().map(|p| p.get(&base, e_j).ln()).collect();
    let out = search.run(&x0);
    let (topology, _, params) = assemble(&out.x[..free.len()])?;
    let mut warnings = Vec::new();
    let (lo, hi) = data.gap_window();
    let f1 = params.linear_frequency(1);
    if f1 < lo || f1 > 1.1 * hi {
        warnings.push(format!("second antisymmetric mode at {f1:.3} GHz lies outside the data window {lo:.3}-{hi:.3} GHz"));
    }
    let model = SpectrumModel::TwoMode { params, dims };
    let fit = FittedModel::TwoMode { topology, params, l_nw: topology.l_nw, z_nw: topology.nanowire().z_nw };
    search.report(out, fit, &model, warnings)
}

/// Objective of the single-mode model at fixed parameters and calibration.
pub fn single_mode_objective(
    data: &SpectroscopyDataset,
    params: SingleModeParams,
    cal: FluxCalibration,
    opts: &FitOptions,
) -> Result<f64> {
    let problem = Problem::new(data, opts.levels, opts)?;
    let model = SpectrumModel::Single { params, dim: opts.single_dim };
    Ok(problem.objective_of(&problem.assign(&model, cal)?))
}

/// Objective of the two-mode pipeline at a fixed topology and E_J.
pub fn two_mode_objective(
    data: &SpectroscopyDataset,
    topology: &CircuitTopology,
    e_j: f64,
    cal: FluxCalibration,
    opts: &FitOptions,
) -> Result<f64> {
    let problem = Problem::new(data, opts.two_mode_levels, opts)?;
    let params = two_mode_from_topology(&topology.with_cells(opts.n_cells), e_j)?;
    let model = SpectrumModel::TwoMode { params, dims: opts.two_mode_dims };
    Ok(problem.objective_of(&problem.assign(&model, cal)?))
}
