use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use phasespace::dynamics::{
    self, monitor, propagate_characteristic, propagate_moyal_exact, propagate_moyal_truncated, propagate_schrodinger,
    steps_to, EvolutionReport, Potential,
};
use phasespace::observables::{self, MomentReport};
use phasespace::tomography::{forward_tomogram, inverse_tomogram, relative_l2};
use phasespace::wigner::{
    factorize_characteristic, marginal_momentum, marginal_position, reconstruct_wavefunction, to_characteristic,
    wigner_transform,
};
use phasespace::{io, Error, ErrorKind, PhaseGrid, Wavefunction};

use crate::config::{Experiment, Format, Route, ScenarioConfig, Timeline};

/// Name of the one artifact whose bytes are allowed to differ between runs.
pub const RUNTIME_FILE: &str = "runtime.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug)]
pub enum RunError {
    /// Malformed or inconsistent scenario document.
    Config(String),
    /// A library error: physics precondition or numerical monitor.
    Physics(Error),
    /// Artifacts could not be written.
    Output(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Output(_) => 2,
            RunError::Physics(e) => match e.kind() {
                ErrorKind::Precondition => 3,
                ErrorKind::Numerical => 4,
                ErrorKind::Io => 2,
            },
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config: {m}"),
            RunError::Physics(e) => write!(f, "{e}"),
            RunError::Output(e) => write!(f, "output: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { module: "cli", .. } => RunError::Config(e.to_string()),
            e => RunError::Physics(e),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Output(e)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Value,
    pub warnings: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    formats: Vec<Format>,
    artifacts: Vec<String>,
}

impl Writer {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> std::io::Result<()> {
        if self.wants(Format::Json) {
            let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
            text.push('\n');
            self.put(name, text.as_bytes())?;
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, text: impl FnOnce() -> String) -> std::io::Result<()> {
        if self.wants(Format::Csv) {
            self.put(name, text().as_bytes())?;
        }
        Ok(())
    }

    fn binary(&mut self, name: &str, field: impl FnOnce() -> io::Field) -> std::io::Result<()> {
        if self.wants(Format::Binary) {
            self.put(name, &io::encode(&field()))?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Summary {
    metrics: Map<String, Value>,
    boundary: f64,
    norm_drift: f64,
    warnings: Vec<String>,
}

impl Summary {
    fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.to_string(), json!(value));
    }
    fn watch(&mut self, boundary: f64, norm_drift: f64) {
        self.boundary = self.boundary.max(boundary);
        self.norm_drift = self.norm_drift.max(norm_drift);
    }
}

/// Everything a scenario needs, validated before any work starts.
struct Prepared {
    grid: PhaseGrid,
    psi: Wavefunction,
    potential: Potential,
    timeline: Option<Timeline>,
}

fn prepare(config: &ScenarioConfig) -> Result<Prepared, RunError> {
    let grid = config.grid.build()?;
    let psi = config.state.build(&grid)?;
    config.potential.validate()?;
    let timeline = match &config.experiment {
        Experiment::Evolve {
            t_final,
            dt,
            steps,
            sample_times,
            samples,
            ..
        }
        | Experiment::Validate {
            t_final,
            dt,
            steps,
            sample_times,
            samples,
        }
        | Experiment::Ehrenfest {
            t_final,
            dt,
            steps,
            sample_times,
            samples,
        } => Some(Timeline::resolve(
            *t_final,
            *dt,
            *steps,
            sample_times.as_deref(),
            *samples,
        )?),
        Experiment::Tomo { angles, .. } if *angles < 1 => {
            return Err(RunError::Config("experiment.angles must be at least 1".into()));
        }
        _ => None,
    };
    Ok(Prepared {
        grid,
        psi,
        potential: config.potential.clone(),
        timeline,
    })
}

/// Output directory of `config` under `root`.
pub fn output_dir(config: &ScenarioConfig, root: &Path) -> PathBuf {
    root.join(config.output.dir.as_deref().unwrap_or(&config.name))
}

/// Run a scenario on the current rayon pool and write its artifacts.
pub fn run_scenario(config: &ScenarioConfig, root: &Path) -> Result<RunOutcome, RunError> {
    let started = Instant::now();
    let prepared = prepare(config)?;
    let dir = output_dir(config, root);
    fs::create_dir_all(&dir)?;
    let mut out = Writer {
        dir: dir.clone(),
        formats: config.output.formats.clone(),
        artifacts: Vec::new(),
    };
    let summary = execute(&config.experiment, &prepared, &mut out)?;

    let manifest = json!({
        "scenario": config.name,
        "description": config.description,
        "toolkit": { "name": "phasespace", "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "metrics": summary.metrics,
        "monitors": {
            "boundary": summary.boundary,
            "boundary_flagged": summary.boundary > monitor::BOUNDARY_FLAG,
            "norm_drift": summary.norm_drift,
        },
        "warnings": summary.warnings,
        "artifacts": out.artifacts,
        "runtime": RUNTIME_FILE,
    });
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    let runtime = json!({
        "wall_seconds": started.elapsed().as_secs_f64(),
        "workers": rayon::current_num_threads(),
    });
    fs::write(
        dir.join(RUNTIME_FILE),
        format!("{}\n", serde_json::to_string_pretty(&runtime).unwrap()),
    )?;
    Ok(RunOutcome {
        dir,
        manifest,
        warnings: summary.warnings,
    })
}

/// [`run_scenario`] on a dedicated pool of `workers` threads.
pub fn run_scenario_with_workers(config: &ScenarioConfig, root: &Path, workers: usize) -> Result<RunOutcome, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_scenario(config, root))
}

fn execute(experiment: &Experiment, s: &Prepared, out: &mut Writer) -> Result<Summary, RunError> {
    match experiment {
        Experiment::Wigner {} => run_wigner(s, out),
        Experiment::Evolve { route, n_max, .. } => run_evolve(s, *route, *n_max, out),
        Experiment::Validate { .. } => run_validate(s, out),
        Experiment::Tomo { angles, reconstruct } => run_tomo(s, *angles, *reconstruct, out),
        Experiment::Moments {} => run_moments(s, out),
        Experiment::Ehrenfest { .. } => run_ehrenfest(s, out),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_wigner(s: &Prepared, out: &mut Writer) -> Result<Summary, RunError> {
    let psi = &s.psi;
    let w = wigner_transform(psi)?;
    let mut sum = Summary::default();
    let position = marginal_position(&w);
    let momentum = marginal_momentum(&w);
    let neg = observables::negativity(&w);
    let rebuilt = reconstruct_wavefunction(&w)?;
    sum.metric("integral", w.integral());
    sum.metric("purity", observables::purity(&w));
    sum.metric(
        "max_value",
        w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    sum.metric("min_value", neg.min_value);
    sum.metric("negative_volume", neg.negative_volume);
    sum.metric(
        "position_marginal_error",
        max_abs_diff(&position, &psi.position_density()),
    );
    sum.metric(
        "momentum_marginal_error",
        max_abs_diff(&momentum, &psi.momentum_density()),
    );
    sum.metric("reconstruction_infidelity", 1.0 - rebuilt.fidelity(psi));
    sum.watch(monitor::wigner_boundary(&w), (w.integral() - 1.0).abs());

    out.csv("state.csv", || io::wavefunction_csv(psi))?;
    out.binary("state.bin", || psi.clone().into())?;
    out.csv("wigner.csv", || io::wigner_csv(&w))?;
    out.csv("marginals.csv", || {
        let g = w.grid();
        let mut text = String::from("x,position,p,momentum\n");
        for k in 0..g.n() {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                g.x(k),
                position[k],
                g.p(k),
                momentum[k]
            ));
        }
        text
    })?;
    out.binary("wigner.bin", || w.clone().into())?;
    Ok(sum)
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    #[serde(flatten)]
    moments: MomentReport,
    norm: f64,
    energy: f64,
    boundary: f64,
}

fn series_csv(rows: &[SeriesRow]) -> String {
    let mut text =
        String::from("t,mean_x,mean_p,var_x,var_p,cov_xp,uncertainty_product,blob_area,norm,energy,boundary\n");
    for r in rows {
        let m = &r.moments;
        let cells = [
            r.t,
            m.mean_x,
            m.mean_p,
            m.var_x,
            m.var_p,
            m.cov_xp,
            m.uncertainty_product,
            m.blob_area,
            r.norm,
            r.energy,
            r.boundary,
        ];
        let line: Vec<String> = cells.iter().map(|v| format!("{v:.16e}")).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    text
}

fn run_evolve(s: &Prepared, route: Route, n_max: usize, out: &mut Writer) -> Result<Summary, RunError> {
    let tl = s.timeline.as_ref().expect("evolve has a timeline");
    let v = &s.potential;
    let mass = s.grid.mass();
    let mut sum = Summary::default();
    let mut rows = Vec::with_capacity(tl.sample_times.len());
    let mut done = 0usize;

    let mut psi = s.psi.clone();
    let mut w = wigner_transform(&s.psi)?;
    let mut z = to_characteristic(&w);
    let norm0 = match route {
        Route::Schrodinger => psi.norm_sqr(),
        Route::MoyalExact | Route::MoyalTruncated => w.integral(),
        Route::Characteristic => z.trace(),
    };
    let energy0 = observables::energy(&s.psi, v)?;
    let mut worst_residual = 0.0f64;

    for (i, &t) in tl.sample_times.iter().enumerate() {
        let k = steps_to(t, tl.dt)?;
        let step = k
            .checked_sub(done)
            .ok_or_else(|| RunError::Config("sample_times must be ascending".into()))?;
        done = k;
        let name = format!("snapshot_{i:03}.bin");
        let (moments, norm, energy, boundary) = match route {
            Route::Schrodinger => {
                psi = propagate_schrodinger(&psi, v, tl.dt, step)?;
                out.binary(&name, || psi.clone().into())?;
                (
                    observables::moments(&psi)?,
                    psi.norm_sqr(),
                    observables::energy(&psi, v)?,
                    monitor::wave_boundary(&psi),
                )
            }
            Route::MoyalExact | Route::MoyalTruncated => {
                w = if route == Route::MoyalExact {
                    propagate_moyal_exact(&w, v, tl.dt, step)?
                } else {
                    propagate_moyal_truncated(&w, v, tl.dt, step, n_max)?
                };
                out.binary(&name, || w.clone().into())?;
                (
                    observables::moments(&w)?,
                    w.integral(),
                    observables::phase_space_energy(&w, v, mass),
                    monitor::wigner_boundary(&w),
                )
            }
            Route::Characteristic => {
                z = propagate_characteristic(&z, v, tl.dt, step)?;
                out.binary(&name, || z.clone().into())?;
                let fac = factorize_characteristic(&z)?;
                worst_residual = worst_residual.max(fac.residual);
                (
                    observables::moments(&fac.state)?,
                    z.trace(),
                    observables::energy(&fac.state, v)?,
                    monitor::kernel_boundary(&z),
                )
            }
        };
        sum.watch(boundary, (norm - norm0).abs());
        rows.push(SeriesRow {
            t,
            moments,
            norm,
            energy,
            boundary,
        });
    }

    let energy_drift = rows
        .iter()
        .map(|r| (r.energy - energy0).abs() / energy0.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if let Some(last) = rows.last() {
        sum.metric("final_mean_x", last.moments.mean_x);
        sum.metric("final_mean_p", last.moments.mean_p);
        sum.metric("final_var_x", last.moments.var_x);
        sum.metric("final_var_p", last.moments.var_p);
    }
    sum.metric(
        "min_uncertainty_product",
        rows.iter()
            .map(|r| r.moments.uncertainty_product)
            .fold(f64::INFINITY, f64::min),
    );
    sum.metric("max_energy_drift", energy_drift);
    if route == Route::Characteristic {
        sum.metric("max_factorization_residual", worst_residual);
    }
    if sum.boundary > monitor::BOUNDARY_FLAG {
        sum.warnings
            .push(format!("boundary density {:.3e} exceeds the flag level", sum.boundary));
    }
    out.json("series.json", &rows)?;
    out.csv("series.csv", || series_csv(&rows))?;
    Ok(sum)
}

fn report_csv(r: &EvolutionReport) -> String {
    let mut text = String::from(
        "t,ab,ac,bc,boundary,boundary_flagged,norm_drift_a,norm_drift_b,norm_drift_c,energy_drift_a,energy_drift_b,energy_drift_c,factorization_residual\n",
    );
    let m = &r.monitors;
    for i in 0..r.len() {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.times[i],
            r.ab[i],
            r.ac[i],
            r.bc[i],
            m.boundary[i],
            m.boundary_flagged[i],
            m.norm_drift.a[i],
            m.norm_drift.b[i],
            m.norm_drift.c[i],
            m.energy_drift.a[i],
            m.energy_drift.b[i],
            m.energy_drift.c[i],
            m.factorization_residual[i],
        ));
    }
    text
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn run_validate(s: &Prepared, out: &mut Writer) -> Result<Summary, RunError> {
    let tl = s.timeline.as_ref().expect("validate has a timeline");
    let report = dynamics::cross_validate(&s.psi, &s.potential, tl.t_final, tl.dt, &tl.sample_times)?;
    let m = &report.monitors;
    let mut sum = Summary::default();
    sum.metric("max_discrepancy", report.max_discrepancy());
    sum.metric("max_ab", fold_max(&report.ab));
    sum.metric("max_ac", fold_max(&report.ac));
    sum.metric("max_bc", fold_max(&report.bc));
    sum.metric("max_factorization_residual", fold_max(&m.factorization_residual));
    sum.metric("max_energy_drift_a", fold_max(&m.energy_drift.a));
    sum.metric("max_energy_drift_b", fold_max(&m.energy_drift.b));
    let drift = fold_max(&m.norm_drift.a)
        .max(fold_max(&m.norm_drift.b))
        .max(fold_max(&m.norm_drift.c));
    sum.watch(fold_max(&m.boundary), drift);
    if report.any_boundary_flag() {
        sum.warnings
            .push(format!("boundary density {:.3e} exceeds the flag level", sum.boundary));
    }
    out.json("report.json", &report)?;
    out.csv("report.csv", || report_csv(&report))?;
    Ok(sum)
}

fn run_tomo(s: &Prepared, count: usize, reconstruct: bool, out: &mut Writer) -> Result<Summary, RunError> {
    let w = wigner_transform(&s.psi)?;
    let angles: Vec<f64> = (0..count).map(|i| i as f64 * PI / count as f64).collect();
    let tomo = forward_tomogram(&w, &angles)?;
    let m = observables::moments(&s.psi)?;
    let mut sum = Summary::default();
    let integral_err = (0..tomo.len())
        .map(|i| (tomo.frame_integral(i) - 1.0).abs())
        .fold(0.0, f64::max);
    let mean_err = angles
        .iter()
        .enumerate()
        .map(|(i, th)| (tomo.frame_mean(i) - (th.cos() * m.mean_x + th.sin() * m.mean_p)).abs())
        .fold(0.0, f64::max);
    sum.metric("frames", count);
    sum.metric("max_frame_integral_error", integral_err);
    sum.metric("max_quadrature_mean_error", mean_err);
    sum.metric("min_before_clip", tomo.min_before_clip());
    sum.watch(monitor::wigner_boundary(&w), integral_err);
    out.csv("tomogram.csv", || io::tomogram_csv(&tomo))?;
    out.binary("tomogram.bin", || tomo.clone().into())?;
    if reconstruct {
        let rec = inverse_tomogram(&tomo, &s.grid)?;
        sum.metric("reconstruction_relative_l2", relative_l2(&rec.wigner, &w));
        sum.metric(
            "reconstruction_min_value",
            rec.wigner.values().iter().copied().fold(f64::INFINITY, f64::min),
        );
        sum.metric(
            "source_min_value",
            w.values().iter().copied().fold(f64::INFINITY, f64::min),
        );
        sum.warnings.extend(rec.warnings.iter().cloned());
        out.binary("reconstruction.bin", || rec.wigner.clone().into())?;
        out.csv("reconstruction.csv", || io::wigner_csv(&rec.wigner))?;
    }
    Ok(sum)
}

fn moment_gap(a: &MomentReport, b: &MomentReport) -> f64 {
    [
        a.mean_x - b.mean_x,
        a.mean_p - b.mean_p,
        a.var_x - b.var_x,
        a.var_p - b.var_p,
        a.cov_xp - b.cov_xp,
    ]
    .iter()
    .map(|d| d.abs())
    .fold(0.0, f64::max)
}

fn run_moments(s: &Prepared, out: &mut Writer) -> Result<Summary, RunError> {
    let w = wigner_transform(&s.psi)?;
    let op = observables::moments(&s.psi)?;
    let ps = observables::moments(&w)?;
    let mut sum = Summary::default();
    sum.metric("uncertainty_product", op.uncertainty_product);
    sum.metric("blob_area", op.blob_area);
    sum.metric("route_gap", moment_gap(&op, &ps));
    sum.metric("energy", observables::energy(&s.psi, &s.potential)?);
    sum.metric("purity", observables::purity(&w));
    sum.watch(monitor::wave_boundary(&s.psi), (s.psi.norm_sqr() - 1.0).abs());
    out.json("moments.json", &json!({ "operator": op, "phase_space": ps }))?;
    out.csv("moments.csv", || {
        let op_csv = io::moments_csv(&op);
        let ps_csv = io::moments_csv(&ps);
        let mut lines = op_csv.lines();
        let header = lines.next().unwrap_or_default();
        format!(
            "route,{header}\noperator,{}\nphase_space,{}\n",
            lines.next().unwrap_or_default(),
            ps_csv.lines().nth(1).unwrap_or_default()
        )
    })?;
    Ok(sum)
}

fn run_ehrenfest(s: &Prepared, out: &mut Writer) -> Result<Summary, RunError> {
    let tl = s.timeline.as_ref().expect("ehrenfest has a timeline");
    let mut times = vec![0.0];
    times.extend(tl.sample_times.iter().copied().filter(|&t| t > 0.0));
    let table = observables::ehrenfest_track(&s.psi, &s.potential, &times, tl.dt)?;
    let last = propagate_schrodinger(&s.psi, &s.potential, tl.dt, steps_to(tl.t_final, tl.dt)?)?;
    let mut sum = Summary::default();
    sum.metric("max_velocity_residual", table.max_velocity_residual());
    sum.metric("max_force_residual", table.max_force_residual());
    sum.metric("max_classical_deviation", table.max_classical_deviation());
    sum.metric("max_force_gap", table.max_force_gap());
    sum.watch(
        monitor::wave_boundary(&last),
        (last.norm_sqr() - s.psi.norm_sqr()).abs(),
    );
    out.json("ehrenfest.json", &table)?;
    out.csv("ehrenfest.csv", || io::ehrenfest_csv(&table))?;
    Ok(sum)
}
