mod common;

use std::f64::consts::PI;

use fluxonium::circuit::SingleModeParams;
use fluxonium::fitting::*;
use fluxonium::nanowire::{two_mode_from_topology, CircuitTopology};
use fluxonium::spectra::SpectrumModel;
use fluxonium::Error;
use proptest::prelude::*;

/// Half a flux period including both symmetry points.
fn half_period(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

fn synth(p: SingleModeParams, n_flux: usize, sigma: f64, seed: u64) -> SpectroscopyDataset {
    synthesize_spectroscopy(&SpectrumModel::single(p), &half_period(n_flux), sigma, seed, &SynthesisConfig::default()).unwrap()
}

fn nudged(p: SingleModeParams) -> SingleModeParams {
    SingleModeParams::new(p.e_c * 1.04, p.e_l * 0.96, p.e_j * 1.03).unwrap()
}

/// One restart, no coil calibration: cheap enough for invariance checks.
fn quick() -> FitOptions {
    FitOptions { restarts: 1, flux_cal: false, ..Default::default() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn noiseless_points_match_grid_solver() {
    let p = SingleModeParams::device1();
    let data = synth(p, 5, 0.0, 1);
    assert!(data.len() > 10);
    for pt in &data.points {
        let e = common::grid_levels(p.e_c, p.e_l, p.e_j, pt.phi_ext, 4000, 10);
        let gap = pt.gap();
        let nearest = (0..e.len())
            .flat_map(|i| (i + 1..e.len()).map(move |j| (i, j)))
            .map(|(i, j)| (e[j] - e[i] - gap).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-4, "point {pt:?} is {nearest:e} GHz from every grid gap");
    }
}

#[test]
fn synthesis_is_seed_deterministic() {
    let p = SingleModeParams::device3();
    let a = synth(p, 6, 0.01, 42);
    let b = synth(p, 6, 0.01, 42);
    let c = synth(p, 6, 0.01, 43);
    assert_eq!(a, b);
    assert!(a.points.iter().zip(&b.points).all(|(x, y)| x.freq.to_bits() == y.freq.to_bits()));
    assert_ne!(a, c);
}

#[test]
fn synthetic_noise_has_requested_rms() {
    let p = SingleModeParams::device3();
    let clean = synth(p, 40, 0.0, 5);
    let noisy = synth(p, 40, 0.01, 5);
    assert!(clean.len() >= 200, "{} points", clean.len());
    let rms = (clean.points.iter().zip(&noisy.points).map(|(a, b)| (a.freq - b.freq).powi(2)).sum::<f64>()
        / clean.len() as f64)
        .sqrt();
    assert!(rel(rms, 0.01) < 0.1, "rms {rms}");
}

#[test]
fn csv_round_trip_keeps_hints_and_weights() {
    let mut data = synth(SingleModeParams::device1(), 3, 0.01, 2);
    data.points[0].label_hint = Some("g0->e0".into());
    data.points[1].weight = 2.5;
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(DATASET_CSV_HEADER));
    assert_eq!(SpectroscopyDataset::read_csv(buf.as_slice()).unwrap(), data);
}

#[test]
fn csv_rejects_bad_rows() {
    let bad_order = "phi_ext_rad,freq_GHz,photon_order,label_hint,weight\n0.1,5.0,0,,1\n";
    assert!(matches!(SpectroscopyDataset::read_csv(bad_order.as_bytes()), Err(Error::Schema(_))));
    let bad_weight = "phi_ext_rad,freq_GHz,photon_order,label_hint,weight\n0.1,5.0,1,,-1\n";
    assert!(matches!(SpectroscopyDataset::read_csv(bad_weight.as_bytes()), Err(Error::Schema(_))));
    let missing = "phi_ext_rad,photon_order\n0.1,1\n";
    assert!(matches!(SpectroscopyDataset::read_csv(missing.as_bytes()), Err(Error::Schema(_))));
    let minimal = "phi_ext_rad,freq_GHz,photon_order\n0.1,5.0,1\n";
    let d = SpectroscopyDataset::read_csv(minimal.as_bytes()).unwrap();
    assert_eq!(d.points[0].weight, 1.0);
    assert_eq!(d.points[0].label_hint, None);
}

#[test]
fn preconditions_are_enforced() {
    let p = SingleModeParams::device1();
    let data = synth(p, 6, 0.0, 1);
    let few = SpectroscopyDataset::new(data.points[..4].to_vec()).unwrap();
    assert!(matches!(fit_single_mode(&few, p, &quick()), Err(Error::Fit(_))));
    let narrow = synthesize_spectroscopy(&SpectrumModel::single(p), &[0.5, 0.6, 0.7], 0.0, 1, &SynthesisConfig::default()).unwrap();
    assert!(matches!(fit_single_mode(&narrow, p, &quick()), Err(Error::Fit(_))));
}

#[test]
fn noiseless_fit_recovers_truth_to_optimizer_tolerance() {
    let p = SingleModeParams::device1();
    let data = synth(p, 6, 0.0, 1);
    let r = fit_single_mode(&data, nudged(p), &quick()).unwrap();
    let q = r.single_params().unwrap();
    assert!(r.converged);
    for (a, b) in [(q.e_c, p.e_c), (q.e_l, p.e_l), (q.e_j, p.e_j)] {
        assert!(rel(a, b) < 1e-6, "{q:?}");
    }
    assert!(r.residual_rms < 1e-6);
    assert!(r.history.windows(2).all(|w| w[1] <= w[0]), "history must be non-increasing");
}

#[test]
fn permutation_and_weight_scaling_leave_fit_unchanged() {
    let p = SingleModeParams::device3();
    let data = synth(p, 6, 0.01, 3);
    let opts = FitOptions { restarts: 2, ..Default::default() };
    let base = fit_single_mode(&data, nudged(p), &opts).unwrap();

    let mut shuffled = data.clone();
    shuffled.points.reverse();
    shuffled.points.rotate_left(7);
    let perm = fit_single_mode(&shuffled, nudged(p), &opts).unwrap();
    assert_eq!(base.fit, perm.fit);
    assert_eq!(base.flux_calibration, perm.flux_calibration);
    // residuals follow their rows
    let n = data.len();
    for (i, r) in base.residuals.iter().enumerate() {
        let j = (2 * n - 1 - i - 7) % n;
        assert_eq!(*r, perm.residuals[j]);
    }

    let mut heavy = data.clone();
    heavy.points.iter_mut().for_each(|pt| pt.weight *= 3.7);
    let scaled = fit_single_mode(&heavy, nudged(p), &opts).unwrap();
    let (a, b) = (base.single_params().unwrap(), scaled.single_params().unwrap());
    for (x, y) in [(a.e_c, b.e_c), (a.e_l, b.e_l), (a.e_j, b.e_j)] {
        assert!(rel(x, y) < 1e-6, "{a:?} vs {b:?}");
    }
    assert!(rel(base.objective, scaled.objective) < 1e-9);
}

#[test]
fn hard_device_round_trip_with_noise() {
    // the smallest E_L makes the flux scale and E_L nearly interchangeable,
    // so this also exercises the coil calibration
    let p = SingleModeParams::device2();
    // the grid has to cross a symmetry point or the scale absorbs E_L
    let grid: Vec<f64> = (0..13).map(|i| PI * (-0.2 + 0.1 * i as f64)).collect();
    let data = synthesize_spectroscopy(&SpectrumModel::single(p), &grid, 0.01, 8, &SynthesisConfig::default()).unwrap();
    let r = fit_single_mode(&data, nudged(p), &FitOptions::default()).unwrap();
    let q = r.single_params().unwrap();
    for (a, b) in [(q.e_c, p.e_c), (q.e_l, p.e_l), (q.e_j, p.e_j)] {
        assert!(rel(a, b) < 0.01, "{q:?}");
    }
    assert_eq!(r.restart_objectives.len(), 8);
    assert!(r.residual_rms < 0.015);
}

#[test]
fn label_hints_pin_the_assignment() {
    let p = SingleModeParams::device1();
    let cfg = SynthesisConfig { label_hints: true, ..Default::default() };
    // well labels are ambiguous at 0 and π, so keep the hinted grid off them
    let grid: Vec<f64> = (0..5).map(|i| PI * (0.1 + 0.2 * i as f64)).collect();
    let data = synthesize_spectroscopy(&SpectrumModel::single(p), &grid, 0.0, 1, &cfg).unwrap();
    assert!(data.points.iter().all(|pt| pt.hint_pair().is_some()));
    let r = fit_single_mode(&data, nudged(p), &quick()).unwrap();
    let q = r.single_params().unwrap();
    assert!(rel(q.e_j, p.e_j) < 1e-5, "{q:?}");
    assert!(r.warnings.iter().all(|w| !w.contains("symmetry")));

    let at_pi = synthesize_spectroscopy(&SpectrumModel::single(p), &[0.3, 1.2, 2.0, 2.6, PI], 0.0, 1, &cfg).unwrap();
    let r = fit_single_mode(&at_pi, p, &FitOptions { simplex: SimplexOptions { max_evals: 1, ..Default::default() }, ..quick() })
        .unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("symmetry")));

    // a hint naming a transition the model does not have costs the full gate
    let mut wrong = data.clone();
    wrong.points[0].label_hint = Some("g0->p7".into());
    let r = fit_single_mode(&wrong, p, &FitOptions { simplex: SimplexOptions { max_evals: 1, ..Default::default() }, ..quick() })
        .unwrap();
    assert_eq!(r.residuals[0].residual, None);
    assert!(!r.residuals[0].within_gate);
}

#[test]
fn spurious_point_is_capped_not_chased() {
    let p = SingleModeParams::device1();
    let mut data = synth(p, 6, 0.0, 1);
    // far above every line, so no parameter change can pull one into the gate
    data.points.push(DataPoint::new(0.3, 80.0, 1));
    let r = fit_single_mode(&data, nudged(p), &quick()).unwrap();
    let q = r.single_params().unwrap();
    assert!(rel(q.e_l, p.e_l) < 1e-6, "{q:?}");
    let last = r.residuals.last().unwrap();
    assert!(!last.within_gate);
    assert!(r.warnings.iter().any(|w| w.contains("gate")));
}

fn two_mode_truth() -> (CircuitTopology, f64, SpectroscopyDataset) {
    let topo = CircuitTopology::device1().with_cells(16);
    let e_j = 10.95;
    let opts = FitOptions::default();
    let model = SpectrumModel::TwoMode { params: two_mode_from_topology(&topo, e_j).unwrap(), dims: opts.two_mode_dims };
    let cfg = SynthesisConfig { levels: opts.two_mode_levels, ..Default::default() };
    let data = synthesize_spectroscopy(&model, &half_period(8), 0.01, 9, &cfg).unwrap();
    (topo, e_j, data)
}

#[test]
fn two_mode_round_trip_recovers_wire() {
    let (topo, e_j, data) = two_mode_truth();
    let start = CircuitTopology { l_nw: topo.l_nw * 1.05, c_nw: topo.c_nw * 0.95, ..topo };
    let free = [TopologyParam::LNw, TopologyParam::CNw, TopologyParam::Ej];
    let r = fit_two_mode(&data, &start, e_j * 1.03, &free, &FitOptions { restarts: 2, ..Default::default() }).unwrap();
    let FittedModel::TwoMode { l_nw, z_nw, .. } = r.fit else { panic!("wrong model") };
    assert!(rel(l_nw, topo.l_nw) < 0.02, "l_nw {l_nw:e}");
    assert!(rel(z_nw, topo.nanowire().z_nw) < 0.05, "z_nw {z_nw}");
    assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
}

/// Independent 1D minimizer over ln E_J.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[test]
fn junction_only_fit_matches_golden_section_scan() {
    let (topo, e_j, data) = two_mode_truth();
    let opts = FitOptions { restarts: 1, flux_cal: false, ..Default::default() };
    let r = fit_two_mode(&data, &topo, e_j * 1.05, &[TopologyParam::Ej], &opts).unwrap();
    let FittedModel::TwoMode { params, .. } = r.fit else { panic!("wrong model") };

    let cal = FluxCalibration::identity();
    let objective = |ln_ej: f64| two_mode_objective(&data, &topo, ln_ej.exp(), cal, &opts).unwrap();
    let scan = golden_section(objective, (e_j * 0.9).ln(), (e_j * 1.1).ln(), 1e-7).exp();
    assert!(rel(params.e_j, scan) < 1e-5, "simplex {} vs scan {scan}", params.e_j);
}

#[test]
fn two_mode_needs_high_branch_data() {
    let (topo, e_j, data) = two_mode_truth();
    let low: Vec<DataPoint> = data.points.iter().filter(|p| p.gap() < 8.0).cloned().collect();
    let low = SpectroscopyDataset::new(low).unwrap();
    let err = fit_two_mode(&low, &topo, e_j, &[TopologyParam::Ej], &quick()).unwrap_err();
    assert!(matches!(err, Error::Fit(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dataset_csv_round_trip(rows in prop::collection::vec((-10.0f64..10.0, 0.1f64..30.0, 1u32..4, 0.01f64..10.0, any::<bool>()), 1..20)) {
        let points: Vec<DataPoint> = rows
            .iter()
            .map(|&(phi, f, order, w, hint)| {
                let p = DataPoint::new(phi, f, order).with_weight(w);
                if hint { p.with_hint("g0->e-1") } else { p }
            })
            .collect();
        let d = SpectroscopyDataset::new(points).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        prop_assert_eq!(SpectroscopyDataset::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn simplex_history_never_increases(a in 0.5f64..3.0, b in -2.0f64..2.0, x0 in -3.0f64..3.0) {
        let f = |x: &[f64]| a * (x[0] - b).powi(2) + (x[1] + 0.5 * x[0]).powi(2) + (x[0] * x[1]).sin().abs();
        let r = nelder_mead(f, &[x0, -x0], &[0.3, 0.3], &SimplexOptions { max_evals: 500, ..Default::default() });
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(r.f <= f(&[x0, -x0]));
    }
}
