use std::io::Write;

use serde::Serialize;

use super::drive::{effective_hamiltonian, DrivePlan};
use super::levels::{CollapseOp, LevelSystem};
use super::lindblad::steady_state;
use crate::error::{domain, Result};
use crate::exec::Execution;

pub const MAP_CSV_HEADER: &str = "axis1_GHz,axis2_GHz,population";

/// Two swept tones: tone `tone1` over `grid1` (rows) and `tone2` over
/// `grid2` (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSweep {
    pub tone1: usize,
    pub grid1: Vec<f64>,
    pub tone2: usize,
    pub grid2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationMap {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// values[i][j] at (axis1[i], axis2[j]).
    pub values: Vec<Vec<f64>>,
    /// Cells whose steady state was not unique or could not be solved.
    pub flagged: Vec<(usize, usize)>,
    pub target: String,
}

impl PopulationMap {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MAP_CSV_HEADER}")?;
        for (i, x) in self.axis1.iter().enumerate() {
            for (j, y) in self.axis2.iter().enumerate() {
                writeln!(w, "{x},{y},{}", self.values[i][j])?;
            }
        }
        Ok(())
    }

    /// Row slice along axis1 at column j.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Ridge of the population maximum, one point per row or per column,
    /// refined by a parabola through the neighbours. Points are returned as
    /// (axis1, axis2). Scanning across the axis that a competing
    /// single-tone band runs along keeps that band from capturing the
    /// argmax: a band at fixed axis1 only ever wins inside its own row.
    pub fn ridge(&self, scan: RidgeScan) -> Vec<(f64, f64)> {
        match scan {
            RidgeScan::AlongAxis1 => (0..self.axis2.len())
                .filter_map(|j| peak_position(&self.axis1, &self.column(j)).map(|p| (p, self.axis2[j])))
                .collect(),
            RidgeScan::AlongAxis2 => (0..self.axis1.len())
                .filter_map(|i| peak_position(&self.axis2, &self.values[i]).map(|p| (self.axis1[i], p)))
                .collect(),
        }
    }
}

/// Direction in which [`PopulationMap::ridge`] searches for the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RidgeScan {
    /// Argmax over axis1 for every axis2 value.
    AlongAxis1,
    /// Argmax over axis2 for every axis1 value.
    AlongAxis2,
}

/// Location of the largest finite sample, parabola-refined.
pub fn peak_position(x: &[f64], y: &[f64]) -> Option<f64> {
    let (i, _) = y.iter().enumerate().filter(|(_, v)| v.is_finite()).max_by(|a, b| a.1.total_cmp(b.1))?;
    Some(refine(x, y, i))
}

fn refine(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() || !y[i - 1].is_finite() || !y[i + 1].is_finite() {
        return x[i];
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return x[i];
    }
    let off = 0.5 * (a - c) / den;
    let h = if off >= 0.0 { x[i + 1] - x[i] } else { x[i] - x[i - 1] };
    x[i] + off.clamp(-0.5, 0.5) * h
}

/// All strict local maxima, parabola-refined, in descending height.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| (refine(x, y, i), y[i]))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Ordinary least squares y = slope·x + intercept; returns (slope, intercept, R²).
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

/// Steady-state population of `target` across a two-tone frequency grid.
pub fn drive_map(
    sys: &LevelSystem,
    base: &DrivePlan,
    sweep: &MapSweep,
    collapse: &[CollapseOp],
    target: &str,
    exec: Execution,
) -> Result<PopulationMap> {
    let nt = base.tones.len();
    if sweep.tone1 >= nt || sweep.tone2 >= nt {
        return Err(domain("swept tone index outside the plan"));
    }
    if sweep.tone1 == sweep.tone2 {
        return Err(domain("the two swept tones must differ"));
    }
    if sweep.grid1.is_empty() || sweep.grid2.is_empty() {
        return Err(domain("sweep grids must be non-empty"));
    }
    let t = sys.index_of(target)?;
    // Validates the assignment once so that plan errors surface immediately.
    effective_hamiltonian(sys, base)?;
    let n2 = sweep.grid2.len();
    let cells = exec.map_indexed(sweep.grid1.len() * n2, |c| -> Result<(f64, bool)> {
        let mut plan = base.clone();
        plan.tones[sweep.tone1].frequency = sweep.grid1[c / n2];
        plan.tones[sweep.tone2].frequency = sweep.grid2[c % n2];
        let h = effective_hamiltonian(sys, &plan)?;
        Ok(match steady_state(&h, collapse) {
            Ok(ss) => (ss.state.population(t), ss.degenerate),
            Err(_) => (f64::NAN, true),
        })
    });
    let mut values = vec![vec![0.0; n2]; sweep.grid1.len()];
    let mut flagged = Vec::new();
    for (c, cell) in cells.into_iter().enumerate() {
        let (v, bad) = cell?;
        let (i, j) = (c / n2, c % n2);
        values[i][j] = v;
        if bad {
            flagged.push((i, j));
        }
    }
    Ok(PopulationMap { axis1: sweep.grid1.clone(), axis2: sweep.grid2.clone(), values, flagged, target: target.to_owned() })
}

/// n points evenly spaced on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
