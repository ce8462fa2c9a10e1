//! Python bindings for `memwave`.

use std::path::PathBuf;

use memwave::coupled::{self, FieldState, SurfaceSpec};
use memwave::harness::{self, HarnessError, PhysicalParams};
use memwave::halfline::{self, ZGrid};
use memwave::{dispersion, energetics, fracwave, kernels};
use memwave::{Error, FracOrder, KernelOrder, SampledSignal};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(memwave, ValidityError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Validity(_) => ValidityError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn harness_to_py(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Numerical(inner) => to_py(inner),
        HarnessError::Output { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn order(j: u8) -> PyResult<KernelOrder> {
    KernelOrder::try_from(j).map_err(to_py)
}

fn frac(alpha: f64) -> PyResult<FracOrder> {
    FracOrder::new(alpha).map_err(to_py)
}

fn signal(dt: f64, values: Vec<f64>) -> PyResult<SampledSignal> {
    SampledSignal::new(dt, values).map_err(to_py)
}

fn surface(ell: f64, n_modes: usize) -> PyResult<SurfaceSpec> {
    SurfaceSpec::new(ell, n_modes).map_err(to_py)
}

/// `M_j(r, s)`.
#[pyfunction]
fn memory_kernel_m(j: u8, r: f64, s: f64) -> PyResult<f64> {
    kernels::memory_kernel_m(order(j)?, r, s).map_err(to_py)
}

/// `N^α_j(r, s)`.
#[pyfunction]
fn frac_kernel_n(j: u8, alpha: f64, r: f64, s: f64) -> PyResult<f64> {
    kernels::frac_kernel_n(order(j)?, frac(alpha)?, r, s).map_err(to_py)
}

/// `K_j(t, z)` for `z <= 0`.
#[pyfunction]
fn boundary_kernel(j: u8, t: f64, z: f64) -> PyResult<f64> {
    kernels::boundary_kernel(order(j)?, t, z).map_err(to_py)
}

/// Caputo derivative of samples `values[n] = φ(n dt)` with `φ(0) = 0`.
#[pyfunction]
fn caputo_derivative(alpha: f64, dt: f64, values: Vec<f64>) -> PyResult<Vec<f64>> {
    let out = kernels::caputo_derivative(frac(alpha)?, &signal(dt, values)?).map_err(to_py)?;
    Ok(out.values().to_vec())
}

/// Boundary flux `∂_z v(t, 0)` of the half-line problem driven by `v(t, 0) = φ(t)`.
#[pyfunction]
fn dtn_flux(dt: f64, values: Vec<f64>) -> PyResult<Vec<f64>> {
    let out = halfline::dtn_flux(&signal(dt, values)?).map_err(to_py)?;
    Ok(out.values().to_vec())
}

/// Finite-difference boundary flux at `t_end` for zero initial data.
#[pyfunction]
#[pyo3(signature = (dt, values, depth, n_z))]
fn fd_flux(dt: f64, values: Vec<f64>, depth: f64, n_z: usize) -> PyResult<f64> {
    let phi = signal(dt, values)?;
    let grid = ZGrid::new(depth, n_z).map_err(to_py)?;
    let t_end = phi.time(phi.len() - 1);
    let sol = halfline::solve_fd(&vec![0.0; grid.n_nodes()], &phi, &grid, dt, t_end).map_err(to_py)?;
    Ok(sol.last_flux())
}

#[pyclass(frozen, get_all, module = "memwave")]
struct DispersionRoot {
    k: f64,
    eps: f64,
    mu: Complex64,
    gamma: Complex64,
    residual: f64,
    admissible: bool,
}

#[pymethods]
impl DispersionRoot {
    fn __repr__(&self) -> String {
        format!(
            "DispersionRoot(k={}, eps={}, mu={}, admissible={})",
            self.k, self.eps, self.mu, self.admissible
        )
    }
}

/// All four roots of the coupled dispersion relation.
#[pyfunction]
fn solve_dispersion(k: f64, eps: f64) -> PyResult<Vec<DispersionRoot>> {
    Ok(dispersion::solve_dispersion(k, eps)
        .map_err(to_py)?
        .into_iter()
        .map(|r| DispersionRoot {
            k: r.k,
            eps: r.eps,
            mu: r.mu,
            gamma: r.gamma,
            residual: r.residual,
            admissible: r.admissible,
        })
        .collect())
}

/// Admissible roots of the fractional relation `μ² + μ^{3/2} + k² = 0`.
#[pyfunction]
fn fractional_dispersion(k: f64) -> PyResult<Vec<Complex64>> {
    dispersion::fractional_dispersion(k).map_err(to_py)
}

#[pyclass(frozen, get_all, module = "memwave")]
struct ScalingReport {
    a: f64,
    b: f64,
    c: f64,
    eps: f64,
    t_star: f64,
    l_thick: f64,
    l_trav: f64,
    l_diff: f64,
}

/// Scale factors for membrane density, bulk density, viscosity and stiffness (SI).
#[pyfunction]
fn nondimensionalize(rho_memb: f64, rho_bulk: f64, mu: f64, kappa: f64) -> PyResult<ScalingReport> {
    let r = harness::nondimensionalize(&PhysicalParams {
        rho_memb,
        rho_bulk,
        mu,
        kappa,
    })
    .map_err(to_py)?;
    Ok(ScalingReport {
        a: r.a,
        b: r.b,
        c: r.c,
        eps: r.eps,
        t_star: r.t_star,
        l_thick: r.l_thick,
        l_trav: r.l_trav,
        l_diff: r.l_diff,
    })
}

/// Membrane trajectory and energy record of a simulation.
#[pyclass(frozen, get_all, module = "memwave")]
struct Trajectory {
    times: Vec<f64>,
    /// `displacement[n][m]`: amplitude of mode `m` at `times[n]`.
    displacement: Vec<Vec<Complex64>>,
    velocity: Vec<Vec<Complex64>>,
    energy: Vec<f64>,
    dissipation: Vec<f64>,
    max_relative_increase: f64,
    max_relative_residual: f64,
}

impl Trajectory {
    fn new(
        times: Vec<f64>,
        displacement: Vec<Vec<Complex64>>,
        velocity: Vec<Vec<Complex64>>,
        audit: &energetics::EnergyAudit,
    ) -> Self {
        Trajectory {
            times,
            displacement,
            velocity,
            energy: audit.energy.clone(),
            dissipation: audit.dissipation.clone(),
            max_relative_increase: audit.max_relative_increase(),
            max_relative_residual: audit.max_relative_residual(),
        }
    }
}

/// Coupled membrane/bulk run from rest in the bulk, `v(0, z) = V e^z` per mode.
#[pyfunction]
#[pyo3(signature = (ell, n_modes, depth, n_z, displacement, velocity, eps, dt, t_end))]
#[allow(clippy::too_many_arguments)]
fn simulate_coupled(
    ell: f64,
    n_modes: usize,
    depth: f64,
    n_z: usize,
    displacement: Vec<Complex64>,
    velocity: Vec<Complex64>,
    eps: f64,
    dt: f64,
    t_end: f64,
) -> PyResult<Trajectory> {
    let spec = surface(ell, n_modes)?;
    let grid = ZGrid::new(depth, n_z).map_err(to_py)?;
    let w0 = FieldState::from_amplitudes(&spec, &grid, &displacement, &velocity).map_err(to_py)?;
    let run = coupled::simulate_coupled(&spec, &grid, &w0, eps, dt, t_end).map_err(to_py)?;
    let (u, v) = run
        .membrane
        .iter()
        .map(|row| row.iter().cloned().unzip())
        .unzip();
    Ok(Trajectory::new(run.times.clone(), u, v, &run.audit))
}

/// Fractional membrane run released from rest with displacement amplitudes.
#[pyfunction]
#[pyo3(signature = (ell, displacement, alpha, dt, t_end))]
fn simulate_fractional(
    ell: f64,
    displacement: Vec<Complex64>,
    alpha: f64,
    dt: f64,
    t_end: f64,
) -> PyResult<Trajectory> {
    let spec = surface(ell, displacement.len())?;
    let v0 = vec![Complex64::new(0.0, 0.0); displacement.len()];
    let run = fracwave::simulate_fractional(&spec, &displacement, &v0, frac(alpha)?, dt, t_end)
        .map_err(to_py)?;
    let per_time = |pick: &dyn Fn(&fracwave::FractionalModeRun, usize) -> Complex64| {
        (0..run.times.len())
            .map(|n| run.modes.iter().map(|m| pick(m, n)).collect())
            .collect()
    };
    let u = per_time(&|m, n| m.displacement[n]);
    let v = per_time(&|m, n| m.velocity()[n]);
    Ok(Trajectory::new(run.times.clone(), u, v, &run.audit))
}

/// `(eps_values, errors, fitted_slope, bound_margins)` against the ε = 0 reference.
#[pyfunction]
#[pyo3(signature = (ell, n_modes, depth, n_z, displacement, eps_list, dt, t_end))]
#[allow(clippy::too_many_arguments)]
fn convergence_study(
    ell: f64,
    n_modes: usize,
    depth: f64,
    n_z: usize,
    displacement: Vec<Complex64>,
    eps_list: Vec<f64>,
    dt: f64,
    t_end: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Option<f64>, Vec<f64>)> {
    let spec = surface(ell, n_modes)?;
    let grid = ZGrid::new(depth, n_z).map_err(to_py)?;
    let zero = vec![Complex64::new(0.0, 0.0); displacement.len()];
    let w0 = FieldState::from_amplitudes(&spec, &grid, &displacement, &zero).map_err(to_py)?;
    let r = harness::convergence_study(&spec, &grid, &w0, &eps_list, dt, t_end).map_err(to_py)?;
    Ok((r.eps_values, r.errors, r.fitted_slope, r.bound_margins))
}

/// Largest residual of the discrete fractional energy identity for `φ`.
#[pyfunction]
fn identity_residual(alpha: f64, dt: f64, values: Vec<f64>) -> PyResult<f64> {
    let report = energetics::identity_check(&signal(dt, values)?, frac(alpha)?).map_err(to_py)?;
    Ok(report.max_residual)
}

/// `(min_eig, max_eig)` of the normalized Gram matrix of `N^α_j` on `times`.
#[pyfunction]
fn psd_certificate(j: u8, alpha: f64, times: Vec<f64>) -> PyResult<(f64, f64)> {
    let cert = energetics::psd_certificate(order(j)?, frac(alpha)?, &times).map_err(to_py)?;
    Ok((cert.min_eig, cert.max_eig))
}

/// Runs the experiment described by a JSON config; returns the written paths.
#[pyfunction]
#[pyo3(signature = (config, output=None))]
fn run_experiment(config: PathBuf, output: Option<PathBuf>) -> PyResult<(Option<PathBuf>, PathBuf)> {
    let outcome = harness::run_experiment(&config, output.as_deref()).map_err(harness_to_py)?;
    Ok((outcome.csv, outcome.json))
}

#[pymodule]
#[pyo3(name = "memwave")]
fn memwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ValidityError", m.py().get_type::<ValidityError>())?;
    m.add_class::<DispersionRoot>()?;
    m.add_class::<ScalingReport>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(memory_kernel_m, m)?)?;
    m.add_function(wrap_pyfunction!(frac_kernel_n, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(caputo_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(dtn_flux, m)?)?;
    m.add_function(wrap_pyfunction!(fd_flux, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(nondimensionalize, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coupled, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_fractional, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(identity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(psd_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
