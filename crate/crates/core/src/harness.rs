//! Experiment plumbing: physical scales, the ε-convergence study, and the
//! config-driven runners behind the command line tool.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coupled::{norms, simulate_coupled, FieldState, ModeState, ModeStepper, SurfaceSpec};
use crate::dispersion::solve_dispersion;
use crate::error::{domain, Error, Result};
use crate::fracwave::simulate_fractional;
use crate::halfline::ZGrid;
use crate::kernels::FracOrder;

/// Dimensional coefficients of the membrane and the bulk fluid (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Surface mass density, kg/m².
    pub rho_memb: f64,
    /// Volume mass density, kg/m³.
    pub rho_bulk: f64,
    /// Dynamic viscosity, Pa·s.
    pub mu: f64,
    /// Membrane stiffness, N/m.
    pub kappa: f64,
}

/// Scale factors `x̂ = a x`, `t̂ = b t`, `ẑ = c z` and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eps: f64,
    /// Time at which the diffusion length equals the membrane thickness.
    pub t_star: f64,
    pub l_thick: f64,
    /// Undamped membrane travel length over `t_star`.
    pub l_trav: f64,
    /// Diffusion length over `t_star`.
    pub l_diff: f64,
}

pub fn nondimensionalize(p: &PhysicalParams) -> Result<ScalingReport> {
    let all = [p.rho_memb, p.rho_bulk, p.mu, p.kappa];
    if all.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return domain(format!("physical parameters must be positive, got {p:?}"));
    }
    let a = p.rho_bulk * p.mu / (p.rho_memb * (p.rho_memb * p.kappa).sqrt());
    let b = p.rho_bulk * p.mu / (p.rho_memb * p.rho_memb);
    let c = p.rho_bulk / p.rho_memb;
    let t_star = p.rho_memb * p.rho_memb / (p.mu * p.rho_bulk);
    Ok(ScalingReport {
        a,
        b,
        c,
        eps: p.mu / (p.rho_memb * p.kappa).sqrt(),
        t_star,
        l_thick: p.rho_memb / p.rho_bulk,
        l_trav: t_star * (p.kappa / p.rho_memb).sqrt(),
        l_diff: (p.mu * t_star / p.rho_bulk).sqrt(),
    })
}

/// Slope of the least-squares line through `(ln x, ln y)`. `None` when fewer
/// than two points are given or a value is not positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Right-hand side of the O(ε) error bound: `ε √t (2.3 + t)² ‖w0‖_𝐙`.
pub fn convergence_bound(eps: f64, t: f64, z_norm: f64) -> f64 {
    eps * t.sqrt() * (2.3 + t).powi(2) * z_norm
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub eps_values: Vec<f64>,
    /// `‖w^ε(T) − w^0(T)‖_𝐇` per ε.
    pub errors: Vec<f64>,
    /// `None` when an error vanishes.
    pub fitted_slope: Option<f64>,
    /// `error / (ε √T (2.3 + T)² ‖w0‖_𝐙)` per ε (zero for zero data).
    pub bound_margins: Vec<f64>,
    pub z_norm: f64,
    /// 𝐇 distance between the ε = 0 references at `(dt, dz)` and `(dt/2, dz/2)`.
    pub reference_shift: f64,
    /// A tenth of the smallest ε-gap; the shift must stay below it.
    pub precheck_threshold: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    /// `gap_series[i][n]`: 𝐇 gap for `eps_values[i]` at `times[n]`.
    #[serde(skip)]
    pub gap_series: Vec<Vec<f64>>,
}

fn difference(a: &FieldState, b: &FieldState) -> FieldState {
    FieldState {
        modes: a
            .modes
            .iter()
            .zip(&b.modes)
            .map(|(x, y)| ModeState {
                k: x.k,
                displacement: x.displacement - y.displacement,
                velocity: x.velocity - y.velocity,
                bulk: x.bulk.iter().zip(&y.bulk).map(|(p, q)| p - q).collect(),
            })
            .collect(),
    }
}

/// Linear interpolation of every bulk profile onto `grid.refined()`.
fn prolong(state: &FieldState) -> FieldState {
    let mut out = state.clone();
    for m in &mut out.modes {
        let coarse = std::mem::take(&mut m.bulk);
        let mut fine = Vec::with_capacity(2 * coarse.len() - 1);
        for w in coarse.windows(2) {
            fine.push(w[0]);
            fine.push(0.5 * (w[0] + w[1]));
        }
        fine.push(*coarse.last().unwrap());
        m.bulk = fine;
    }
    out
}

/// Every other bulk node of a state on `grid.refined()`.
fn restrict(state: &FieldState) -> FieldState {
    let mut out = state.clone();
    for m in &mut out.modes {
        m.bulk = m.bulk.iter().step_by(2).copied().collect();
    }
    out
}

fn gap_series(
    spec: &SurfaceSpec,
    grid: &ZGrid,
    w0: &FieldState,
    eps: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let steppers = |e: f64| {
        w0.modes
            .iter()
            .map(|m| ModeStepper::new(m.k, e, dt, grid))
            .collect::<Result<Vec<_>>>()
    };
    let (perturbed, limit) = (steppers(eps)?, steppers(0.0)?);
    let (mut a, mut b) = (w0.clone(), w0.clone());
    let mut gaps = Vec::with_capacity(steps + 1);
    gaps.push(0.0);
    for _ in 0..steps {
        for (m, s) in a.modes.iter_mut().zip(&perturbed) {
            s.step(m);
        }
        for (m, s) in b.modes.iter_mut().zip(&limit) {
            s.step(m);
        }
        gaps.push(norms(&difference(&a, &b), spec, grid).h_norm);
    }
    Ok(gaps)
}

/// Runs the coupled model for every ε in `eps_list` next to the ε = 0
/// reference and fits the rate at which the gap closes.
///
/// The reference is rerun with `dt/2` and `dz/2`; if it moves by more than a
/// tenth of the smallest gap the discretization cannot resolve the ε effect
/// and the study fails with [`Error::Validity`].
pub fn convergence_study(
    spec: &SurfaceSpec,
    grid: &ZGrid,
    w0: &FieldState,
    eps_list: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<ConvergenceReport> {
    if eps_list.len() < 2 {
        return domain("a rate needs at least two eps values");
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return domain("eps values must be positive");
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return domain("eps values must be strictly decreasing");
    }
    if w0.modes.len() != spec.n_modes() || w0.modes.iter().any(|m| m.bulk.len() != grid.n_nodes()) {
        return domain("initial state does not match the surface and grid");
    }
    w0.check_no_slip(1e-12)?;
    if !(dt > 0.0) || !(t_end > 0.0) {
        return domain(format!("need dt > 0 and T > 0, got dt = {dt}, T = {t_end}"));
    }
    let steps = (t_end / dt).round() as usize;

    let (series, shift) = std::thread::scope(|scope| {
        let runs: Vec<_> = eps_list
            .iter()
            .map(|&eps| scope.spawn(move || gap_series(spec, grid, w0, eps, dt, steps)))
            .collect();
        let precheck = scope.spawn(|| -> Result<f64> {
            let coarse = simulate_coupled(spec, grid, w0, 0.0, dt, t_end)?.final_state;
            let fine_grid = grid.refined();
            let fine = simulate_coupled(spec, &fine_grid, &prolong(w0), 0.0, 0.5 * dt, t_end)?;
            Ok(norms(&difference(&restrict(&fine.final_state), &coarse), spec, grid).h_norm)
        });
        let series = runs
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect::<Result<Vec<_>>>();
        (series, precheck.join().expect("precheck worker panicked"))
    });
    let series = series?;
    let reference_shift = shift?;

    let errors: Vec<f64> = series.iter().map(|s| *s.last().unwrap()).collect();
    let smallest_gap = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    let precheck_threshold = 0.1 * smallest_gap;
    if reference_shift > precheck_threshold {
        return Err(Error::Validity(format!(
            "halving dt and dz moves the reference by {reference_shift:e}, \
             more than a tenth of the smallest eps gap {smallest_gap:e}"
        )));
    }
    let z_norm = norms(w0, spec, grid).z_norm;
    let bound_margins = eps_list
        .iter()
        .zip(&errors)
        .map(|(&eps, &err)| {
            let bound = convergence_bound(eps, t_end, z_norm);
            if bound == 0.0 {
                0.0
            } else {
                err / bound
            }
        })
        .collect();
    Ok(ConvergenceReport {
        eps_values: eps_list.to_vec(),
        fitted_slope: loglog_slope(eps_list, &errors),
        errors,
        bound_margins,
        z_norm,
        reference_shift,
        precheck_threshold,
        times: (0..=steps).map(|n| n as f64 * dt).collect(),
        gap_series: series,
    })
}

// ---------------------------------------------------------------------------
// Config-driven experiments

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SimulateCoupled,
    SimulateFractional,
    Dispersion,
    EnergyAudit,
    Converge,
    Nondim,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::SimulateCoupled,
        Experiment::SimulateFractional,
        Experiment::Dispersion,
        Experiment::EnergyAudit,
        Experiment::Converge,
        Experiment::Nondim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SimulateCoupled => "simulate-coupled",
            Experiment::SimulateFractional => "simulate-fractional",
            Experiment::Dispersion => "dispersion",
            Experiment::EnergyAudit => "energy-audit",
            Experiment::Converge => "converge",
            Experiment::Nondim => "nondim",
        }
    }

    fn file_stem(self) -> String {
        self.name().replace('-', "_")
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> std::result::Result<Self, HarnessError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

/// Failures of a config-driven run, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("cannot write output to {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl HarnessError {
    /// 2 malformed or invalid config, 3 failed validity precheck,
    /// 4 unknown experiment, 5 unwritable output.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(Error::Validity(_)) => 3,
            HarnessError::Numerical(_) => 2,
            HarnessError::UnknownExperiment(_) => 4,
            HarnessError::Output { .. } => 5,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub ell: f64,
    pub n_modes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridConfig {
    #[serde(rename = "L_z")]
    pub l_z: f64,
    pub n_z: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

/// A mode amplitude, either real or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Initial membrane amplitudes per mode, missing trailing modes are zero.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub displacement: Vec<Amplitude>,
    #[serde(default)]
    pub velocity: Vec<Amplitude>,
}

/// Wavenumbers `10^{log10_k_min} … 10^{log10_k_max}`, `n_k` points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "SweepConfig::default_min")]
    pub log10_k_min: f64,
    #[serde(default = "SweepConfig::default_max")]
    pub log10_k_max: f64,
    #[serde(default = "SweepConfig::default_n")]
    pub n_k: usize,
}

impl SweepConfig {
    fn default_min() -> f64 {
        -4.0
    }
    fn default_max() -> f64 {
        2.0
    }
    fn default_n() -> usize {
        61
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        if self.n_k == 1 {
            return vec![10f64.powf(self.log10_k_min)];
        }
        let span = self.log10_k_max - self.log10_k_min;
        (0..self.n_k)
            .map(|i| 10f64.powf(self.log10_k_min + span * i as f64 / (self.n_k - 1) as f64))
            .collect()
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            log10_k_min: Self::default_min(),
            log10_k_max: Self::default_max(),
            n_k: Self::default_n(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub surface: Option<SurfaceConfig>,
    pub zgrid: Option<ZGridConfig>,
    pub time: Option<TimeConfig>,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub initial: Option<InitialConfig>,
    pub output_dir: Option<PathBuf>,
    pub physical: Option<PhysicalParams>,
    pub sweep: Option<SweepConfig>,
}

fn missing(field: &str) -> HarnessError {
    HarnessError::Config(format!("missing field `{field}`"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn surface(&self) -> HarnessResult<SurfaceSpec> {
        let s = self.surface.as_ref().ok_or_else(|| missing("surface"))?;
        Ok(SurfaceSpec::new(s.ell, s.n_modes)?)
    }

    fn grid(&self) -> HarnessResult<ZGrid> {
        let g = self.zgrid.as_ref().ok_or_else(|| missing("zgrid"))?;
        Ok(ZGrid::new(g.l_z, g.n_z)?)
    }

    fn time(&self) -> HarnessResult<(f64, f64)> {
        let t = self.time.as_ref().ok_or_else(|| missing("time"))?;
        if !(t.dt > 0.0) || !(t.t_end >= 0.0) {
            return Err(HarnessError::Config(format!(
                "need dt > 0 and T >= 0, got dt = {}, T = {}",
                t.dt, t.t_end
            )));
        }
        Ok((t.dt, t.t_end))
    }

    fn alpha(&self) -> HarnessResult<FracOrder> {
        Ok(FracOrder::new(self.alpha.unwrap_or(0.5))?)
    }

    /// `eps_list` if given, otherwise the single `eps`, otherwise `default`.
    fn eps_values(&self, default: &[f64]) -> HarnessResult<Vec<f64>> {
        let list = match (&self.eps_list, self.eps) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give either `eps` or `eps_list`".into()))
            }
            (Some(list), None) => list.clone(),
            (None, Some(eps)) => vec![eps],
            (None, None) => default.to_vec(),
        };
        if list.is_empty() {
            return Err(missing("eps"));
        }
        if list.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return Err(HarnessError::Config("eps values must be nonnegative".into()));
        }
        Ok(list)
    }

    fn amplitudes(&self, n_modes: usize) -> HarnessResult<(Vec<Complex64>, Vec<Complex64>)> {
        let init = self.initial.clone().unwrap_or_default();
        let pad = |v: &[Amplitude], what: &str| -> HarnessResult<Vec<Complex64>> {
            if v.len() > n_modes {
                return Err(HarnessError::Config(format!(
                    "{} {what} amplitudes for {n_modes} modes",
                    v.len()
                )));
            }
            let mut out: Vec<Complex64> = v.iter().map(|a| a.value()).collect();
            out.resize(n_modes, Complex64::new(0.0, 0.0));
            Ok(out)
        };
        Ok((pad(&init.displacement, "displacement")?, pad(&init.velocity, "velocity")?))
    }
}

/// Files written by an experiment and its summary.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub experiment: Experiment,
    pub csv: Option<PathBuf>,
    pub json: PathBuf,
    pub summary: serde_json::Value,
}

/// Column-oriented table written as CSV.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn output_error(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(path: &Path, table: &Table) -> HarnessResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| HarnessError::Output {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
    let to_io = |e: csv::Error| -> io::Error { e.into() };
    w.write_record(&table.header)
        .map_err(to_io)
        .map_err(output_error(path))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_number(x)))
            .map_err(to_io)
            .map_err(output_error(path))?;
    }
    w.flush().map_err(output_error(path))
}

fn write_json(path: &Path, value: &serde_json::Value) -> HarnessResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    fs::write(path, text).map_err(output_error(path))
}

fn membrane_columns(n_modes: usize) -> Vec<String> {
    (0..n_modes)
        .flat_map(|m| {
            [
                format!("U{m}_re"),
                format!("U{m}_im"),
                format!("V{m}_re"),
                format!("V{m}_im"),
            ]
        })
        .collect()
}

fn push_membrane(row: &mut Vec<f64>, pairs: impl Iterator<Item = (Complex64, Complex64)>) {
    for (u, v) in pairs {
        row.extend([u.re, u.im, v.re, v.im]);
    }
}

fn run_simulate_coupled(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let spec = cfg.surface()?;
    let grid = cfg.grid()?;
    let (dt, t_end) = cfg.time()?;
    let eps = match cfg.eps_values(&[])?.as_slice() {
        [e] => *e,
        _ => return Err(HarnessError::Config("simulate-coupled takes a single `eps`".into())),
    };
    let (u0, v0) = cfg.amplitudes(spec.n_modes())?;
    let w0 = FieldState::from_amplitudes(&spec, &grid, &u0, &v0)?;
    let run = simulate_coupled(&spec, &grid, &w0, eps, dt, t_end)?;
    let mut header = vec!["t".to_string(), "energy".into(), "dissipation".into()];
    header.extend(membrane_columns(spec.n_modes()));
    let rows = run
        .times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let mut row = vec![t, run.audit.energy[n], run.audit.dissipation[n]];
            push_membrane(&mut row, run.membrane[n].iter().copied());
            row
        })
        .collect();
    let n0 = norms(&w0, &spec, &grid);
    let increase = run.audit.max_relative_increase();
    let summary = json!({
        "eps": eps,
        "steps": run.times.len() - 1,
        "initial_energy": run.audit.energy.first(),
        "final_energy": run.audit.energy.last(),
        "max_relative_energy_increase": increase,
        "max_balance_residual": run.audit.max_residual(),
        "initial_h_norm": n0.h_norm,
        "initial_z_norm": n0.z_norm,
        "final_h_norm": norms(&run.final_state, &spec, &grid).h_norm,
        "energy_nonincreasing": increase <= 1e-10,
    });
    Ok((Some(Table { header, rows }), summary))
}

fn run_simulate_fractional(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let spec = cfg.surface()?;
    let (dt, t_end) = cfg.time()?;
    let alpha = cfg.alpha()?;
    let (u0, v0) = cfg.amplitudes(spec.n_modes())?;
    let run = simulate_fractional(&spec, &u0, &v0, alpha, dt, t_end)?;
    let mut header = vec!["t".to_string(), "energy".into(), "dissipation".into()];
    header.extend(membrane_columns(spec.n_modes()));
    let rows = run
        .times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let mut row = vec![t, run.audit.energy[n], run.audit.dissipation[n]];
            push_membrane(
                &mut row,
                run.modes.iter().map(|m| (m.displacement[n], m.velocity()[n])),
            );
            row
        })
        .collect();
    let increase = run.audit.max_relative_increase();
    let summary = json!({
        "alpha": alpha.value(),
        "steps": run.times.len() - 1,
        "initial_energy": run.audit.energy.first(),
        "final_energy": run.audit.energy.last(),
        "max_balance_residual": run.audit.max_residual(),
        "max_relative_balance_residual": run.audit.max_relative_residual(),
        "max_relative_energy_increase": increase,
        "energy_nonincreasing": increase <= 1e-10,
    });
    Ok((Some(Table { header, rows }), summary))
}

fn run_dispersion(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let eps_list = cfg.eps_values(&[0.0, 0.1, 1.0])?;
    let sweep = cfg.sweep.clone().unwrap_or_default();
    if sweep.n_k == 0 {
        return Err(HarnessError::Config("sweep needs n_k >= 1".into()));
    }
    let header = ["k", "eps", "mu_re", "mu_im", "gamma_re", "gamma_im", "residual"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for &eps in &eps_list {
        for k in sweep.wavenumbers() {
            for r in solve_dispersion(k, eps)? {
                worst = worst.max(r.residual / (1.0 + r.mu.norm().powi(4)));
                if r.admissible {
                    rows.push(vec![k, eps, r.mu.re, r.mu.im, r.gamma.re, r.gamma.im, r.residual]);
                }
            }
        }
    }
    let summary = json!({
        "eps_values": eps_list,
        "n_k": sweep.n_k,
        "admissible_roots": rows.len(),
        "max_scaled_residual": worst,
        "residuals_ok": worst < 1e-10,
        "all_admissible_stable": rows.iter().all(|r| r[2] <= 1e-12 * (1.0 + r[2].hypot(r[3]))),
    });
    Ok((Some(Table { header, rows }), summary))
}

fn run_energy_audit(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let spec = cfg.surface()?;
    let grid = cfg.grid()?;
    let (dt, t_end) = cfg.time()?;
    let alpha = cfg.alpha()?;
    let eps_list = cfg.eps_values(&[0.0, 0.1, 1.0])?;
    let (u0, v0) = cfg.amplitudes(spec.n_modes())?;
    let w0 = FieldState::from_amplitudes(&spec, &grid, &u0, &v0)?;
    let coupled = eps_list
        .iter()
        .map(|&eps| simulate_coupled(&spec, &grid, &w0, eps, dt, t_end))
        .collect::<Result<Vec<_>>>()?;
    let fractional = simulate_fractional(&spec, &u0, &v0, alpha, dt, t_end)?;

    let mut header = vec!["t".to_string()];
    header.extend(eps_list.iter().map(|e| format!("energy_eps_{}", format_number(*e))));
    header.extend(["fractional_energy".into(), "fractional_dissipation".into()]);
    let rows = fractional
        .times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let mut row = vec![t];
            row.extend(coupled.iter().map(|r| r.audit.energy[n]));
            row.extend([fractional.audit.energy[n], fractional.audit.dissipation[n]]);
            row
        })
        .collect();
    let coupled_summary: Vec<_> = eps_list
        .iter()
        .zip(&coupled)
        .map(|(&eps, r)| {
            let inc = r.audit.max_relative_increase();
            json!({"eps": eps, "max_relative_energy_increase": inc, "lyapunov_ok": inc <= 1e-10})
        })
        .collect();
    let inc = fractional.audit.max_relative_increase();
    let summary = json!({
        "coupled": coupled_summary,
        "fractional": {
            "alpha": alpha.value(),
            "max_balance_residual": fractional.audit.max_residual(),
            "max_relative_balance_residual": fractional.audit.max_relative_residual(),
            "max_relative_energy_increase": inc,
            "energy_nonincreasing": inc <= 1e-10,
        },
    });
    Ok((Some(Table { header, rows }), summary))
}

fn run_converge(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let spec = cfg.surface()?;
    let grid = cfg.grid()?;
    let (dt, t_end) = cfg.time()?;
    let eps_list = cfg
        .eps_list
        .clone()
        .ok_or_else(|| missing("eps_list"))?;
    let (u0, v0) = cfg.amplitudes(spec.n_modes())?;
    let w0 = FieldState::from_amplitudes(&spec, &grid, &u0, &v0)?;
    let report = convergence_study(&spec, &grid, &w0, &eps_list, dt, t_end)?;
    let mut header = vec!["t".to_string()];
    header.extend(eps_list.iter().map(|e| format!("gap_eps_{}", format_number(*e))));
    header.extend(eps_list.iter().map(|e| format!("bound_eps_{}", format_number(*e))));
    let rows = report
        .times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let mut row = vec![t];
            row.extend(report.gap_series.iter().map(|s| s[n]));
            row.extend(eps_list.iter().map(|&e| convergence_bound(e, t, report.z_norm)));
            row
        })
        .collect();
    let mut summary = serde_json::to_value(&report).expect("report serializes");
    let slope_ok = report.fitted_slope.is_some_and(|s| (0.8..=1.2).contains(&s));
    let bound_ok = report.bound_margins.iter().all(|&m| m <= 1.1);
    summary["slope_in_range"] = json!(slope_ok);
    summary["bound_holds"] = json!(bound_ok);
    Ok((Some(Table { header, rows }), summary))
}

fn run_nondim(cfg: &ExperimentConfig) -> HarnessResult<(Option<Table>, serde_json::Value)> {
    let p = cfg.physical.ok_or_else(|| missing("physical"))?;
    let r = nondimensionalize(&p)?;
    let summary = json!({
        "physical": p,
        "scaling": r,
        "normalization": [
            p.kappa * r.a * r.a / (p.rho_memb * r.b * r.b),
            p.mu * r.c / (p.rho_memb * r.b),
            p.mu * r.c * r.c / (p.rho_bulk * r.b),
        ],
    });
    Ok((None, summary))
}

/// Runs `experiment` with `cfg` and writes `<name>.csv` / `<name>.json`
/// into `out_dir`.
pub fn run_with(experiment: Experiment, cfg: &ExperimentConfig, out_dir: &Path) -> HarnessResult<ExperimentOutcome> {
    if let Some(name) = &cfg.experiment {
        let named = Experiment::from_str(name)?;
        if named != experiment {
            return Err(HarnessError::Config(format!(
                "config is for `{name}`, not `{}`",
                experiment.name()
            )));
        }
    }
    log::info!("running {}", experiment.name());
    let (table, body) = match experiment {
        Experiment::SimulateCoupled => run_simulate_coupled(cfg)?,
        Experiment::SimulateFractional => run_simulate_fractional(cfg)?,
        Experiment::Dispersion => run_dispersion(cfg)?,
        Experiment::EnergyAudit => run_energy_audit(cfg)?,
        Experiment::Converge => run_converge(cfg)?,
        Experiment::Nondim => run_nondim(cfg)?,
    };
    fs::create_dir_all(out_dir).map_err(output_error(out_dir))?;
    let stem = experiment.file_stem();
    let csv = match table {
        Some(t) => {
            let path = out_dir.join(format!("{stem}.csv"));
            write_csv(&path, &t)?;
            log::info!("wrote {}", path.display());
            Some(path)
        }
        None => None,
    };
    let summary = json!({ "experiment": experiment.name(), "result": body });
    let json_path = out_dir.join(format!("{stem}.json"));
    write_json(&json_path, &summary)?;
    log::info!("wrote {}", json_path.display());
    Ok(ExperimentOutcome {
        experiment,
        csv,
        json: json_path,
        summary,
    })
}

/// Loads a config file and runs the experiment it names. `output` overrides
/// the config's `output_dir`; the fallback is `./output`.
pub fn run_experiment(config: &Path, output: Option<&Path>) -> HarnessResult<ExperimentOutcome> {
    let cfg = ExperimentConfig::load(config)?;
    let name = cfg.experiment.as_deref().ok_or_else(|| missing("experiment"))?;
    let experiment = Experiment::from_str(name)?;
    let out = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("output"));
    run_with(experiment, &cfg, &out)
}
