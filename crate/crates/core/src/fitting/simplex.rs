//! Nelder–Mead downhill simplex.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop when every vertex lies within `xtol` of the best one (max norm)...
    pub xtol: f64,
    /// ...and the objective spread is below `ftol_abs + ftol_rel·|f_best|`.
    pub ftol_abs: f64,
    pub ftol_rel: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_evals: 3000, xtol: 1e-8, ftol_abs: 1e-18, ftol_rel: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective after each iteration.
    pub history: Vec<f64>,
}

/// Minimizes `f` from `x0` with initial edge lengths `step`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        // stable sort keeps the incumbent ahead of equal newcomers
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        history.push(vals[0]);

        let spread_x = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread_f = (vals[n] - vals[0]).abs();
        if spread_x <= opts.xtol && spread_f <= opts.ftol_abs + opts.ftol_rel * vals[0].abs() {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(vals[n]) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            for k in 0..n {
                pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }

    SimplexResult { x: pts[0].clone(), f: vals[0], evaluations: evals, iterations, converged, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], &SimplexOptions { max_evals: 10_000, ..Default::default() });
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_bowl_in_four_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.3).powi(2)).sum();
        let r = nelder_mead(f, &[0.0; 4], &[0.5; 4], &SimplexOptions::default());
        assert!(r.converged);
        assert!(r.x.iter().all(|v| (v - 0.3).abs() < 1e-7));
    }
}
