//! Command-line driver: file-based inputs, provenance-framed outputs.

pub mod error;
pub mod experiment;
pub mod provenance;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use fluxonium::config::DeviceConfig;
use fluxonium::dynamics::{drive_map, linspace, pulse_sequence_t1, MapSweep};
use fluxonium::fitting::{
    fit_single_mode, fit_two_mode, synthesize_spectroscopy, FitOptions, SimplexOptions, SpectroscopyDataset,
    SynthesisConfig, TopologyParam,
};
use fluxonium::loss::{fit_quality_factors, t1_curve, MatrixElementTable, T1Sample};
use fluxonium::nanowire::{build_ladder, extrapolated_modes, kinetic_inductance, normal_modes, sheet_inductance};
use fluxonium::spectra::{flux_sweep, CatalogConfig, SpectrumModel};
use fluxonium::units::inductance_from_energy;
use fluxonium::Execution;

use error::{CliError, CliResult};
use experiment::{level_system, DriveMapConfig, PulseT1Config};
use provenance::{frame_csv, frame_json, sha256_hex, Provenance};

#[derive(Parser, Debug)]
#[command(name = "fluxonium", version, about = "Nanowire fluxonium modelling: spectra, fits, loss and driven dynamics")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for synthetic noise and fit restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Device JSON file, or one of the presets device-1, device-2, device-3.
    #[arg(long, global = true)]
    pub device: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FluxArgs {
    /// First flux point, radians.
    #[arg(long, default_value_t = -PI, allow_hyphen_values = true)]
    pub flux_start: f64,
    /// Last flux point, radians.
    #[arg(long, default_value_t = PI, allow_hyphen_values = true)]
    pub flux_stop: f64,
    #[arg(long, default_value_t = 101)]
    pub flux_points: usize,
}

impl FluxArgs {
    fn grid(&self) -> CliResult<Vec<f64>> {
        if self.flux_points == 0 || !self.flux_start.is_finite() || !self.flux_stop.is_finite() {
            return Err(CliError::config("flux grid needs finite bounds and at least one point"));
        }
        if self.flux_points > 1 && self.flux_stop <= self.flux_start {
            return Err(CliError::config("--flux-stop must exceed --flux-start"));
        }
        Ok(linspace(self.flux_start, self.flux_stop, self.flux_points))
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    /// Single-mode if the device has one, else two-mode.
    Auto,
    Single,
    TwoMode,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Transition catalog over a flux sweep (CSV).
    Spectrum {
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, default_value_t = 2)]
        max_photon: u32,
        #[arg(long, value_enum, default_value_t = ModelChoice::Auto)]
        model: ModelChoice,
        /// Only transitions out of the ground state.
        #[arg(long)]
        no_thermal: bool,
    },
    /// Synthetic spectroscopy dataset with Gaussian frequency noise (CSV).
    Synth {
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long, default_value_t = 0.01)]
        noise_ghz: f64,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = ModelChoice::Auto)]
        model: ModelChoice,
        /// Attach transition labels as hints.
        #[arg(long)]
        hints: bool,
    },
    /// Fit a spectroscopy dataset (FitReport JSON).
    Fit {
        /// Dataset CSV: phi_ext_rad, freq_GHz, photon_order, label_hint, weight.
        #[arg(long)]
        #[serde(skip)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelChoice::Auto)]
        model: ModelChoice,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Keep the flux axis as given instead of co-fitting offset and scale.
        #[arg(long)]
        no_flux_cal: bool,
        /// Free parameters of a two-mode fit.
        #[arg(long, value_delimiter = ',', default_value = "l_nw,c_nw,e_j")]
        free: Vec<String>,
        #[arg(long, default_value_t = 3000)]
        max_evals: usize,
    },
    /// Normal modes of the nanowire ladder (CSV).
    Modes {
        #[arg(long)]
        n_cells: Option<usize>,
        /// Bridge the ports with the linearized junction inductance.
        #[arg(long)]
        with_junction: bool,
        /// Continuum-extrapolated antisymmetric modes instead of the raw ladder.
        #[arg(long)]
        extrapolate: bool,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Kinetic inductance of the nanowire from its geometry (CSV).
    Kinetic {
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        thickness: Option<f64>,
        /// Cooper-pair density, m⁻³.
        #[arg(long)]
        n_s: Option<f64>,
    },
    /// Fluxon T1 and its loss channels versus flux (CSV).
    T1Curve {
        #[command(flatten)]
        flux: FluxArgs,
    },
    /// Fit Q_L and Q_C to measured lifetimes (JSON).
    LossFit {
        /// CSV with freq_GHz, t1_s and optionally sigma_t1_s.
        #[arg(long)]
        #[serde(skip)]
        data: PathBuf,
        #[arg(long, default_value_t = 201)]
        table_points: usize,
    },
    /// Steady-state population map over two swept tones (CSV).
    DriveMap {
        #[arg(long)]
        #[serde(skip)]
        config: PathBuf,
        /// Grid size as ROWSxCOLS, overriding the config.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Pulsed relaxation protocol: readout trace (CSV) and fitted T1.
    PulseT1 {
        #[arg(long)]
        #[serde(skip)]
        config: PathBuf,
        #[arg(long)]
        wait_points: Option<usize>,
        /// Where to write the fit JSON; summary on standard error otherwise.
        #[arg(long)]
        #[serde(skip)]
        fit_out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Synth { .. } => "synth",
            Command::Fit { .. } => "fit",
            Command::Modes { .. } => "modes",
            Command::Kinetic { .. } => "kinetic",
            Command::T1Curve { .. } => "t1-curve",
            Command::LossFit { .. } => "loss-fit",
            Command::DriveMap { .. } => "drive-map",
            Command::PulseT1 { .. } => "pulse-t1",
        }
    }
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_bytes(path)?).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn load_device(spec: Option<&str>) -> CliResult<DeviceConfig> {
    let spec = spec.ok_or_else(|| CliError::config("--device is required for this command"))?;
    if let Some(d) = DeviceConfig::preset(spec) {
        return Ok(d);
    }
    let text = read_text(Path::new(spec))?;
    Ok(DeviceConfig::from_json(&text).map_err(|e| CliError::config(format!("{spec}: {e}")))?)
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn pick_model(device: &DeviceConfig, choice: ModelChoice) -> CliResult<SpectrumModel> {
    Ok(match choice {
        ModelChoice::Auto => device.default_model()?,
        ModelChoice::Single => device.single_model()?,
        ModelChoice::TwoMode => device.two_mode_model()?,
    })
}

fn uses_two_mode(device: &DeviceConfig, choice: ModelChoice) -> bool {
    choice == ModelChoice::TwoMode || (choice == ModelChoice::Auto && device.single_mode.is_none())
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| CliError::config("--grid must look like 41x41"))?;
    let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0);
    match (parse(a), parse(b)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CliError::config("--grid must look like 41x41")),
    }
}

/// Produced artifacts, keyed by destination (None = standard output).
pub struct Outputs {
    pub primary: Vec<u8>,
    pub extra: Vec<(PathBuf, Vec<u8>)>,
    pub notes: Vec<String>,
}

impl Outputs {
    fn primary(bytes: Vec<u8>) -> Self {
        Outputs { primary: bytes, extra: Vec::new(), notes: Vec::new() }
    }
}

fn csv_body(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

/// Runs one command and returns its artifacts without touching the output path.
pub fn execute(cli: &Cli) -> CliResult<Outputs> {
    let exec = Execution::Parallel;
    let seed = cli.seed;
    let name = cli.command.name();
    let options = serde_json::to_value(&cli.command).expect("options serialize");
    let provenance = |device: Option<&DeviceConfig>, inputs: serde_json::Value| {
        Provenance::new(name, &json!({ "command": name, "options": options, "device": device, "inputs": inputs, "seed": seed }), seed)
    };

    match &cli.command {
        Command::Spectrum { flux, levels, max_photon, model, no_thermal } => {
            let device = load_device(cli.device.as_deref())?;
            let model = pick_model(&device, *model)?;
            let cfg = CatalogConfig {
                max_photon: *max_photon,
                include_thermal: !no_thermal,
                temperature: device.loss.temperature,
                ..Default::default()
            };
            let sweep = flux_sweep(&model, &flux.grid()?, *levels, &cfg, exec);
            let p = provenance(Some(&device), json!(null));
            let out = Outputs::primary(frame_csv(&p, &csv_body(|w| sweep.write_csv(w))));
            if sweep.failures() > 0 {
                let failed: Vec<_> =
                    sweep.points.iter().filter_map(|pt| pt.error.as_ref().map(|e| json!({ "phi_ext_rad": pt.phi_ext, "error": e }))).collect();
                return Err(partial_failure(cli, out, format!("{} flux points failed", failed.len()), json!({ "failed_points": failed })));
            }
            Ok(out)
        }
        Command::Synth { flux, noise_ghz, levels, model, hints } => {
            let device = load_device(cli.device.as_deref())?;
            let model = pick_model(&device, *model)?;
            let cfg = SynthesisConfig { levels: *levels, label_hints: *hints, ..Default::default() };
            let data = synthesize_spectroscopy(&model, &flux.grid()?, *noise_ghz, seed, &cfg)?;
            let mut body = Vec::new();
            data.write_csv(&mut body)?;
            Ok(Outputs::primary(frame_csv(&provenance(Some(&device), json!(null)), &body)))
        }
        Command::Fit { data, model, restarts, no_flux_cal, free, max_evals } => {
            let device = load_device(cli.device.as_deref())?;
            let bytes = read_bytes(data)?;
            let dataset = SpectroscopyDataset::read_csv(bytes.as_slice())
                .map_err(|e| CliError::config(format!("{}: {e}", data.display())))?;
            if *restarts == 0 {
                return Err(CliError::config("--restarts must be at least 1"));
            }
            let opts = FitOptions {
                restarts: *restarts,
                seed,
                flux_cal: !no_flux_cal,
                catalog: CatalogConfig { temperature: device.loss.temperature, ..Default::default() },
                single_dim: device.basis_dim,
                simplex: SimplexOptions { max_evals: *max_evals, ..Default::default() },
                exec,
                ..Default::default()
            };
            let report = if uses_two_mode(&device, *model) {
                let spec = device.two_mode_spec()?;
                let free = free
                    .iter()
                    .map(|f| TopologyParam::parse(f.trim()).ok_or_else(|| CliError::config(format!("unknown free parameter {f:?}"))))
                    .collect::<CliResult<Vec<_>>>()?;
                let opts = FitOptions { two_mode_dims: spec.dims, ..opts };
                fit_two_mode(&dataset, &spec.topology, spec.e_j, &free, &opts)?
            } else {
                fit_single_mode(&dataset, device.single()?, &opts)?
            };
            let mut out = Outputs::primary(frame_json(&provenance(Some(&device), json!({ "data_sha256": sha256_hex(&bytes) })), &report));
            out.notes.extend(report.warnings.iter().cloned());
            Ok(out)
        }
        Command::Modes { n_cells, with_junction, extrapolate, count } => {
            let device = load_device(cli.device.as_deref())?;
            let spec = device.two_mode_spec()?;
            let topo = n_cells.map_or(spec.topology, |n| spec.topology.with_cells(n));
            let lj = with_junction.then(|| inductance_from_energy(spec.e_j));
            let modes = if *extrapolate {
                extrapolated_modes(&topo, lj, *count)?
            } else {
                let mut m = normal_modes(&build_ladder(&topo, lj)?)?;
                m.modes.truncate(*count);
                m
            };
            let body = csv_body(|w| {
                writeln!(w, "index,symmetry,freq_GHz,port_difference,C_eff_F,L_eff_H")?;
                for (i, m) in modes.modes.iter().enumerate() {
                    let sym = serde_json::to_value(m.symmetry).expect("symmetry serializes");
                    writeln!(w, "{i},{},{},{},{:e},{:e}", sym.as_str().unwrap_or(""), m.frequency, m.port_difference, m.c_eff, m.l_eff)?;
                }
                Ok(())
            });
            Ok(Outputs::primary(frame_csv(&provenance(Some(&device), json!(null)), &body)))
        }
        Command::Kinetic { length, width, thickness, n_s } => {
            let device = match &cli.device {
                Some(d) => Some(load_device(Some(d))?),
                None => None,
            };
            let base = device.as_ref().and_then(|d| d.geometry);
            let pick = |flag: Option<f64>, from: Option<f64>, what: &str| {
                flag.or(from).ok_or_else(|| CliError::config(format!("missing --{what} (no device geometry)")))
            };
            let g = fluxonium::nanowire::NanowireGeometry::new(
                pick(*length, base.map(|g| g.length), "length")?,
                pick(*width, base.map(|g| g.width), "width")?,
                pick(*thickness, base.map(|g| g.thickness), "thickness")?,
                n_s.or(base.and_then(|g| g.n_s)),
            )?;
            let l_k = kinetic_inductance(&g)?;
            let body = csv_body(|w| {
                writeln!(w, "length_m,width_m,thickness_m,n_s_per_m3,squares,L_k_H,L_sheet_H_per_square")?;
                writeln!(w, "{:e},{:e},{:e},{:e},{},{:e},{:e}", g.length, g.width, g.thickness, g.n_s.unwrap_or(f64::NAN), g.squares(), l_k, sheet_inductance(l_k, &g))
            });
            Ok(Outputs::primary(frame_csv(&provenance(device.as_ref(), json!({ "geometry": g })), &body)))
        }
        Command::T1Curve { flux } => {
            let device = load_device(cli.device.as_deref())?;
            let curve = t1_curve(&device.single()?, &device.loss, &flux.grid()?, device.resonator.as_ref(), device.basis_dim, exec)?;
            if curve.points.is_empty() {
                return Err(CliError::numerical("no flux point produced a fluxon transition", json!({ "skipped": curve.skipped })));
            }
            let mut out = Outputs::primary(frame_csv(&provenance(Some(&device), json!(null)), &csv_body(|w| curve.write_csv(w))));
            out.notes.extend(curve.skipped.iter().map(|(phi, e)| format!("skipped phi_ext={phi}: {e}")));
            Ok(out)
        }
        Command::LossFit { data, table_points } => {
            let device = load_device(cli.device.as_deref())?;
            let bytes = read_bytes(data)?;
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(bytes.as_slice());
            let samples = rdr
                .deserialize()
                .collect::<Result<Vec<T1Sample>, _>>()
                .map_err(|e| CliError::config(format!("{}: {e}", data.display())))?;
            let p = device.single()?;
            let table = MatrixElementTable::build(&p, *table_points, device.basis_dim, exec)?;
            let report = fit_quality_factors(&samples, &p, &device.loss, &table)?;
            let mut out = Outputs::primary(frame_json(&provenance(Some(&device), json!({ "data_sha256": sha256_hex(&bytes) })), &report));
            if report.degenerate {
                out.notes.push("data lie on one side of the crossover; one quality factor is poorly constrained".into());
            }
            Ok(out)
        }
        Command::DriveMap { config, grid } => {
            let device = load_device(cli.device.as_deref())?;
            let cfg: DriveMapConfig = parse_json(config)?;
            let p = device.single()?;
            let sys = level_system(p, device.basis_dim, cfg.phi_ext_rad, cfg.levels)?;
            let plan = cfg.plan(&sys)?;
            let collapse = cfg.collapse.build(&sys, &p, &device.loss)?;
            let points = match grid {
                Some(g) => parse_grid(g)?,
                None => (cfg.sweep[0].points, cfg.sweep[1].points),
            };
            let axis = |k: usize, n: usize| -> CliResult<(usize, Vec<f64>)> {
                let a = &cfg.sweep[k];
                let tone = plan.tones.get(a.tone).ok_or_else(|| CliError::config(format!("sweep tone {} not in the plan", a.tone)))?;
                let c = a.center.unwrap_or(tone.frequency);
                Ok((a.tone, linspace(c - 0.5 * a.span, c + 0.5 * a.span, n)))
            };
            let ((tone1, grid1), (tone2, grid2)) = (axis(0, points.0)?, axis(1, points.1)?);
            let map = drive_map(&sys, &plan, &MapSweep { tone1, grid1, tone2, grid2 }, &collapse, &cfg.target, exec)?;
            let p = provenance(Some(&device), json!({ "config": cfg }));
            let mut out = Outputs::primary(frame_csv(&p, &csv_body(|w| map.write_csv(w))));
            if !map.flagged.is_empty() {
                out.notes.push(format!("{} cells have a degenerate or failed steady state", map.flagged.len()));
            }
            Ok(out)
        }
        Command::PulseT1 { config, wait_points, fit_out } => {
            let device = load_device(cli.device.as_deref())?;
            let cfg: PulseT1Config = parse_json(config)?;
            let p = device.single()?;
            let sys = level_system(p, device.basis_dim, cfg.phi_ext_rad, cfg.levels)?;
            let pulses = cfg.pulses(&sys)?;
            let collapse = cfg.collapse.build(&sys, &p, &device.loss)?;
            let n = wait_points.unwrap_or(cfg.wait.points);
            if n < 2 || !(cfg.wait.stop_s > cfg.wait.start_s) {
                return Err(CliError::config("wait grid needs at least 2 points and stop > start"));
            }
            let waits = linspace(cfg.wait.start_s, cfg.wait.stop_s, n);
            let r = pulse_sequence_t1(&sys, &pulses, &collapse, &cfg.readout, &waits, cfg.fit_from_s, exec)?;
            let prov = provenance(Some(&device), json!({ "config": cfg }));
            let mut out = Outputs::primary(frame_csv(&prov, &csv_body(|w| r.write_csv(w))));
            let fit = json!({ "fit": r.fit, "prepared_populations": r.prepared.populations(), "levels": sys.labels });
            match fit_out {
                Some(path) => out.extra.push((path.clone(), frame_json(&prov, &fit))),
                None => out.notes.push(format!("fit: {}", serde_json::to_string(&r.fit).expect("fit serializes"))),
            }
            Ok(out)
        }
    }
}

/// A numerical failure that still produced a partial artifact.
fn partial_failure(cli: &Cli, out: Outputs, message: String, diagnostics: serde_json::Value) -> CliError {
    if let Err(e) = write_outputs(cli, &out) {
        return e;
    }
    CliError::numerical(message, diagnostics)
}

fn diagnostics_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".diagnostics.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("fluxonium-diagnostics.json"),
    }
}

fn write_outputs(cli: &Cli, out: &Outputs) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, &out.primary).map_err(|e| CliError::io(path, e))?,
        None => std::io::stdout().write_all(&out.primary).map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    for (path, bytes) in &out.extra {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// Parses arguments, runs the command on a pool of `--threads` workers and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.threads == 0 {
        eprintln!("configuration error: --threads must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: thread pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| execute(&cli)).and_then(|out| {
        write_outputs(&cli, &out)?;
        for n in &out.notes {
            eprintln!("note: {n}");
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            if let CliError::Numerical { diagnostics, .. } = &e {
                let path = diagnostics_path(cli.out.as_deref());
                let body = serde_json::to_vec_pretty(&json!({ "command": cli.command.name(), "error": e.to_string(), "diagnostics": diagnostics }))
                    .expect("diagnostics serialize");
                match std::fs::write(&path, body) {
                    Ok(()) => eprintln!("diagnostics written to {}", path.display()),
                    Err(w) => eprintln!("could not write diagnostics to {}: {w}", path.display()),
                }
            }
            e.exit_code()
        }
    }
}
