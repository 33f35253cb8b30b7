use std::f64::consts::PI;

use fluxonium::circuit::{ResonatorParams, SingleModeParams};
use fluxonium::loss::*;
use fluxonium::Execution;
use proptest::prelude::*;

fn device3_curve(points: usize) -> T1Curve {
    let grid: Vec<f64> = (0..points).map(|i| -PI + 0.8 * PI * i as f64 / (points - 1) as f64).collect();
    t1_curve(&SingleModeParams::device3(), &LossModel::default(), &grid, None, 80, Execution::Parallel).unwrap()
}

#[test]
fn device3_series_resistance() {
    let r = series_resistance(0.55, 309e-9, 39_000.0);
    assert!((r - 27.4e-3).abs() < 0.05e-3, "{r}");
    assert!((r / 27e-3 - 1.0).abs() < 0.05);
}

#[test]
fn device3_crossover() {
    let p = SingleModeParams::device3();
    let m = LossModel::default();
    let fx = crossover_frequency(p.e_c, p.e_l, &m);
    assert!((fx / 1.77 - 1.0).abs() < 0.01, "{fx}");
    let gi = gamma_inductive(p.e_l, fx, 0.3, &m).unwrap();
    let gc = gamma_capacitive(p.e_c, fx, 0.3, &m).unwrap();
    assert!((gi / gc - 1.0).abs() < 1e-12);
}

#[test]
fn zero_temperature_doubles() {
    let m = LossModel::new(39_000.0, 15_100.0, 0.0).unwrap();
    let bare = 2.0 * PI * 0.53e9 / 39_000.0 * 0.4;
    let g = gamma_inductive(0.53, 0.3, 0.4, &m).unwrap();
    assert!((g / (2.0 * bare) - 1.0).abs() < 1e-14);
}

#[test]
fn capacitive_scales_quadratically() {
    let m = LossModel::new(1e4, 1e4, 0.0).unwrap();
    let a = gamma_capacitive(1.9, 1.0, 0.2, &m).unwrap();
    let b = gamma_capacitive(1.9, 4.0, 0.2, &m).unwrap();
    assert!((b / a - 16.0).abs() < 1e-12);
}

#[test]
fn purcell_scaling() {
    assert_eq!(gamma_purcell(0.0, 0.3, 5e-4).unwrap(), 0.0);
    let a = gamma_purcell(0.05, 0.4, 5e-4).unwrap();
    let b = gamma_purcell(0.05, 0.2, 5e-4).unwrap();
    assert!((b / a - 4.0).abs() < 1e-12);
    assert!(gamma_purcell(0.05, 0.0, 5e-4).is_err());
}

#[test]
fn device3_curve_peaks_between_regimes() {
    let curve = device3_curve(33);
    assert!(curve.skipped.is_empty());
    let peak = curve.peak().unwrap();
    assert!(peak.freq > 1.7 && peak.freq < 3.5, "{}", peak.freq);
    assert!(peak.rates.t1_total > 3.5e-6 && peak.rates.t1_total < 14e-6, "{}", peak.rates.t1_total);
    let first = &curve.points[0];
    let last = curve.points.last().unwrap();
    assert!(first.rates.gamma_ind > first.rates.gamma_cap);
    assert!(last.rates.gamma_cap > last.rates.gamma_ind);
}

#[test]
fn purcell_negligible_away_from_resonator_up_to_t1_peak() {
    let p = SingleModeParams::device3();
    let m = LossModel::default();
    let curve = device3_curve(33);
    let f_peak = curve.peak().unwrap().freq;
    for pt in curve.points.iter().filter(|pt| pt.freq <= f_peak) {
        for delta in [0.3, -0.3, 0.6] {
            let r = ResonatorParams::new(pt.freq + delta, 14_800.0, 0.1).unwrap();
            let rr = rates(&p, pt.freq, pt.mat_elem_sq, pt.charge_elem_sq, &m, Some(&r)).unwrap();
            assert!(rr.gamma_purcell < 0.01 * rr.total_rate(), "f={} Δ={delta}", pt.freq);
        }
    }
}

#[test]
fn curve_is_schedule_and_order_independent() {
    let p = SingleModeParams::device3();
    let m = LossModel::default();
    let grid = [-0.9 * PI, -0.7 * PI, -0.5 * PI];
    let rev: Vec<f64> = grid.iter().rev().copied().collect();
    let a = t1_curve(&p, &m, &grid, None, 60, Execution::Parallel).unwrap();
    let b = t1_curve(&p, &m, &rev, None, 60, Execution::Sequential).unwrap();
    for (x, y) in a.points.iter().zip(b.points.iter().rev()) {
        assert_eq!(x, y);
    }
}

fn synthetic(truth: &LossModel, table: &MatrixElementTable, noise: &[f64]) -> Vec<T1Sample> {
    let p = SingleModeParams::device3();
    let freqs = [0.6, 0.9, 1.3, 1.8, 2.4, 3.0, 3.8, 4.6, 5.4, 6.2];
    freqs
        .iter()
        .zip(noise.iter().cycle())
        .map(|(&f, &eps)| {
            let me = table.at(f).unwrap();
            let r = rates(&p, f, me, 0.0, truth, None).unwrap();
            T1Sample { freq: f, t1: r.t1_total * (1.0 + eps), sigma: None }
        })
        .collect()
}

#[test]
fn quality_factor_fit_round_trips() {
    let p = SingleModeParams::device3();
    let table = MatrixElementTable::build(&p, 81, 80, Execution::Parallel).unwrap();
    let truth = LossModel::default();
    let start = LossModel::new(10_000.0, 50_000.0, truth.temperature).unwrap();

    let exact = fit_quality_factors(&synthetic(&truth, &table, &[0.0]), &p, &start, &table).unwrap();
    assert!((exact.model.q_l / truth.q_l - 1.0).abs() < 1e-6, "{:?}", exact.model);
    assert!((exact.model.q_c / truth.q_c - 1.0).abs() < 1e-6);
    assert!(!exact.degenerate);

    let noise = [0.05, -0.04, 0.03, -0.05, 0.02, 0.04, -0.03, -0.02, 0.05, -0.01];
    let data = synthetic(&truth, &table, &noise);
    let noisy = fit_quality_factors(&data, &p, &start, &table).unwrap();
    assert!((noisy.model.q_l / truth.q_l - 1.0).abs() < 0.10, "{:?}", noisy.model);
    assert!((noisy.model.q_c / truth.q_c - 1.0).abs() < 0.10);
    assert!(noisy.covariance[0][0] > 0.0 && noisy.covariance[1][1] > 0.0);

    let mut shuffled = data.clone();
    shuffled.reverse();
    shuffled.swap(1, 4);
    let again = fit_quality_factors(&shuffled, &p, &start, &table).unwrap();
    assert!((again.model.q_l / noisy.model.q_l - 1.0).abs() < 1e-9);
    assert!((again.model.q_c / noisy.model.q_c - 1.0).abs() < 1e-9);
}

#[test]
fn one_sided_data_is_flagged() {
    let p = SingleModeParams::device3();
    let table = MatrixElementTable::build(&p, 81, 80, Execution::Parallel).unwrap();
    let truth = LossModel::default();
    let data: Vec<T1Sample> = synthetic(&truth, &table, &[0.0]).into_iter().filter(|d| d.freq > 2.0).collect();
    let fit = fit_quality_factors(&data, &p, &truth, &table).unwrap();
    assert!(fit.degenerate);
}

proptest! {
    #[test]
    fn quotient_identity(
        e_c in 0.1f64..5.0, e_l in 0.1f64..5.0, f in 0.05f64..12.0, me in 1e-6f64..10.0,
        q_l in 1e3f64..1e6, q_c in 1e3f64..1e6, t in 0.0f64..0.2,
    ) {
        let m = LossModel::new(q_l, q_c, t).unwrap();
        let gi = gamma_inductive(e_l, f, me, &m).unwrap();
        let gc = gamma_capacitive(e_c, f, me, &m).unwrap();
        let expected = f * f * q_l / (8.0 * e_c * e_l * q_c);
        prop_assert!((gc / gi / expected - 1.0).abs() < 1e-12);
        prop_assert!(gi >= 0.0 && gc >= 0.0);
        let r = RateResult::new(gi, gc, 0.0);
        prop_assert!((r.t1_total * (gi + gc) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn warmer_is_never_slower(f in 0.05f64..12.0, t in 0.0f64..0.2, dt in 0.0f64..0.1) {
        let m1 = LossModel::new(4e4, 1.5e4, t).unwrap();
        let m2 = LossModel::new(4e4, 1.5e4, t + dt).unwrap();
        prop_assert!(gamma_inductive(0.5, f, 0.3, &m2).unwrap() >= gamma_inductive(0.5, f, 0.3, &m1).unwrap());
    }
}
