//! Integrator for the nondimensional membrane/bulk system
//!
//! ```text
//! Ü = ΔU - ∂_z v|₀,   U̇ = v|₀,   v̇ = ε²Δ_x v + ∂_z² v
//! ```
//!
//! on a periodic membrane. The system is diagonal in the horizontal Fourier
//! variable, so every retained mode `k` is advanced on its own: the bulk is a
//! finite-difference profile in `z`, and `ε` enters only through the
//! zeroth-order term `-ε²k²v`.
//!
//! The semi-discretization closes the membrane equation with the half-cell
//! balance at `z = 0`,
//!
//! ```text
//! (1 + dz/2) V̇ = -k²U - (V - v₁)/dz - (dz/2) ε²k² V,
//! ```
//!
//! which is second-order consistent with the flux `∂_z v(0)` and makes the
//! trapezoidal energy `½|V|² + ½k²|U|² + ½∫|v|²` an exact Lyapunov function.
//! Time stepping is the implicit midpoint rule, which inherits that decay
//! step by step.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::energetics::EnergyAudit;
use crate::error::{domain, precondition, Result};
use crate::halfline::ZGrid;
use crate::linalg::{Tridiagonal, TridiagonalLu};

/// Periodic membrane `ℝ/(ℓℤ)` with Fourier modes `k_m = 2πm/ℓ`,
/// `m = 0..n_modes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    period: f64,
    n_modes: usize,
}

impl SurfaceSpec {
    pub fn new(period: f64, n_modes: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return domain(format!("period must be positive, got {period}"));
        }
        if n_modes == 0 {
            return domain("at least one Fourier mode is required");
        }
        Ok(SurfaceSpec { period, n_modes })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.period
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_modes).map(|m| self.wavenumber(m)).collect()
    }
}

/// One Fourier mode `(U_k, V_k, v_k(z))` of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub k: f64,
    pub displacement: Complex64,
    pub velocity: Complex64,
    /// Bulk velocity on the nodes of a [`ZGrid`]; `bulk[0]` equals `velocity`.
    pub bulk: Vec<Complex64>,
}

impl ModeState {
    pub fn new(
        k: f64,
        displacement: Complex64,
        velocity: Complex64,
        bulk: Vec<Complex64>,
    ) -> Result<Self> {
        if !(k >= 0.0) {
            return domain(format!("wavenumber must be nonnegative, got {k}"));
        }
        if bulk.len() < 4 {
            return domain("bulk profile needs at least 4 nodes");
        }
        let state = ModeState {
            k,
            displacement,
            velocity,
            bulk,
        };
        state.check_no_slip(1e-12)?;
        Ok(state)
    }

    /// Membrane displaced by `u`, at rest, over a fluid at rest.
    pub fn at_rest(k: f64, u: Complex64, grid: &ZGrid) -> Result<Self> {
        Self::new(k, u, Complex64::new(0.0, 0.0), vec![Complex64::new(0.0, 0.0); grid.n_nodes()])
    }

    pub fn no_slip_defect(&self) -> f64 {
        (self.bulk[0] - self.velocity).norm()
    }

    pub fn check_no_slip(&self, tol: f64) -> Result<()> {
        let defect = self.no_slip_defect();
        if defect > tol * (1.0 + self.velocity.norm()) {
            return precondition(format!("no-slip condition violated by {defect:e}"));
        }
        Ok(())
    }

    /// `½|V|² + ½k²|U|² + ½∫|v|² dz` per unit membrane length.
    pub fn energy_density(&self, grid: &ZGrid) -> f64 {
        0.5 * self.velocity.norm_sqr()
            + 0.5 * self.k * self.k * self.displacement.norm_sqr()
            + 0.5 * bulk_l2_sqr(&self.bulk, grid)
    }

    /// `(1+k²)|U|² + |V|² + ∫|v|² dz`, the squared 𝐇 norm per unit length.
    pub fn h_norm_sqr_density(&self, grid: &ZGrid) -> f64 {
        (1.0 + self.k * self.k) * self.displacement.norm_sqr()
            + self.velocity.norm_sqr()
            + bulk_l2_sqr(&self.bulk, grid)
    }

    /// Dissipation rate `ε²k²∫|v|² + ∫|∂_z v|²` of the discrete scheme, per
    /// unit length.
    pub fn dissipation_density(&self, grid: &ZGrid, eps: f64) -> f64 {
        let dz = grid.dz();
        let grad: f64 = self
            .bulk
            .windows(2)
            .map(|w| (w[1] - w[0]).norm_sqr())
            .sum::<f64>()
            / dz;
        eps * eps * self.k * self.k * bulk_l2_sqr(&self.bulk, grid) + grad
    }
}

fn bulk_l2_sqr(bulk: &[Complex64], grid: &ZGrid) -> f64 {
    assert_eq!(bulk.len(), grid.n_nodes(), "bulk profile does not match the grid");
    let sq: Vec<f64> = bulk.iter().map(|c| c.norm_sqr()).collect();
    grid.trapezoid(&sq)
}

/// All retained modes of a state on a [`SurfaceSpec`].
///
/// The amplitudes describe the complex field `Σ_m Ŵ_m e^{ik_m x}`; energies
/// and norms are its Parseval sums `ℓ Σ_m (…)`. A real field with the same
/// energy is `Ŵ_0 + √2 Σ_{m≥1} Re(Ŵ_m e^{ik_m x})`, see [`FieldState::synthesize_real`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub modes: Vec<ModeState>,
}

/// Real-space samples of a synthesized field.
#[derive(Debug, Clone)]
pub struct RealField {
    pub x: Vec<f64>,
    pub displacement: Vec<f64>,
    pub displacement_dx: Vec<f64>,
    pub velocity: Vec<f64>,
    /// `bulk[i][j]`: node `i` in `x`, node `j` in `z`.
    pub bulk: Vec<Vec<f64>>,
    pub bulk_dx: Vec<Vec<f64>>,
}

/// 𝐇 and 𝐙 norms of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub h_norm: f64,
    pub z_norm: f64,
}

impl FieldState {
    pub fn zero(spec: &SurfaceSpec, grid: &ZGrid) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        FieldState {
            modes: spec
                .wavenumbers()
                .into_iter()
                .map(|k| ModeState {
                    k,
                    displacement: zero,
                    velocity: zero,
                    bulk: vec![zero; grid.n_nodes()],
                })
                .collect(),
        }
    }

    /// Membrane amplitudes per mode with the fluid profile `V_m e^{z}`
    /// (which satisfies no-slip and decays with depth).
    pub fn from_amplitudes(
        spec: &SurfaceSpec,
        grid: &ZGrid,
        displacement: &[Complex64],
        velocity: &[Complex64],
    ) -> Result<Self> {
        if displacement.len() != spec.n_modes() || velocity.len() != spec.n_modes() {
            return domain(format!(
                "expected {} amplitudes per component",
                spec.n_modes()
            ));
        }
        let nodes = grid.nodes();
        let modes = spec
            .wavenumbers()
            .into_iter()
            .enumerate()
            .map(|(m, k)| {
                let v = velocity[m];
                let mut bulk: Vec<Complex64> = nodes.iter().map(|z| v * z.exp()).collect();
                bulk[grid.n_z()] = Complex64::new(0.0, 0.0);
                ModeState::new(k, displacement[m], v, bulk)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldState { modes })
    }

    pub fn check_no_slip(&self, tol: f64) -> Result<()> {
        self.modes.iter().try_for_each(|m| m.check_no_slip(tol))
    }

    /// Real field sampled at `n_x` equispaced points of one period.
    ///
    /// The zero mode must be real, since it is its own conjugate partner.
    pub fn synthesize_real(&self, spec: &SurfaceSpec, grid: &ZGrid, n_x: usize) -> Result<RealField> {
        if let Some(m0) = self.modes.iter().find(|m| m.k == 0.0) {
            let imag = m0.displacement.im.abs()
                + m0.velocity.im.abs()
                + m0.bulk.iter().map(|c| c.im.abs()).sum::<f64>();
            if imag > 0.0 {
                return precondition("zero mode of a real field must have real amplitudes");
            }
        }
        let ell = spec.period();
        let x: Vec<f64> = (0..n_x).map(|i| ell * i as f64 / n_x as f64).collect();
        let nz = grid.n_nodes();
        let mut out = RealField {
            displacement: vec![0.0; n_x],
            displacement_dx: vec![0.0; n_x],
            velocity: vec![0.0; n_x],
            bulk: vec![vec![0.0; nz]; n_x],
            bulk_dx: vec![vec![0.0; nz]; n_x],
            x,
        };
        for mode in &self.modes {
            let weight = if mode.k == 0.0 { 1.0 } else { std::f64::consts::SQRT_2 };
            for (i, &xi) in out.x.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, mode.k * xi);
                let dphase = Complex64::new(0.0, mode.k) * phase;
                out.displacement[i] += weight * (mode.displacement * phase).re;
                out.displacement_dx[i] += weight * (mode.displacement * dphase).re;
                out.velocity[i] += weight * (mode.velocity * phase).re;
                for j in 0..nz {
                    out.bulk[i][j] += weight * (mode.bulk[j] * phase).re;
                    out.bulk_dx[i][j] += weight * (mode.bulk[j] * dphase).re;
                }
            }
        }
        Ok(out)
    }
}

/// `𝓔₀ = ℓ Σ_m (½|V_m|² + ½k_m²|U_m|² + ½∫|v_m|² dz)`.
pub fn energy_e0(state: &FieldState, spec: &SurfaceSpec, grid: &ZGrid) -> f64 {
    spec.period()
        * state
            .modes
            .iter()
            .map(|m| m.energy_density(grid))
            .sum::<f64>()
}

/// Discrete 𝐇 norm and 𝐙 norm `‖w‖_𝐇 + ‖∇_x w‖_𝐇`.
pub fn norms(state: &FieldState, spec: &SurfaceSpec, grid: &ZGrid) -> NormReport {
    let ell = spec.period();
    let (mut h, mut g) = (0.0, 0.0);
    for m in &state.modes {
        let d = m.h_norm_sqr_density(grid);
        h += d;
        g += m.k * m.k * d;
    }
    let h_norm = (ell * h).sqrt();
    NormReport {
        h_norm,
        z_norm: h_norm + (ell * g).sqrt(),
    }
}

/// Whether the membrane feels the bulk shear stress. Disabling it leaves an
/// undamped oscillator for the membrane, which is only useful for testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Full,
    Disabled,
}

/// Factorized implicit-midpoint step for one wavenumber.
#[derive(Debug, Clone)]
pub struct ModeStepper {
    k: f64,
    eps: f64,
    dt: f64,
    grid: ZGrid,
    coupling: Coupling,
    lu: TridiagonalLu,
    explicit: Tridiagonal,
}

impl ModeStepper {
    pub fn new(k: f64, eps: f64, dt: f64, grid: &ZGrid) -> Result<Self> {
        Self::with_coupling(k, eps, dt, grid, Coupling::Full)
    }

    pub fn with_coupling(
        k: f64,
        eps: f64,
        dt: f64,
        grid: &ZGrid,
        coupling: Coupling,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        if !(eps >= 0.0) || !(k >= 0.0) {
            return domain(format!("need eps >= 0 and k >= 0, got eps = {eps}, k = {k}"));
        }
        let n = grid.n_z();
        let h = grid.dz();
        let beta = 0.5 * dt;
        let decay = eps * eps * k * k;
        let lap = beta / (h * h);

        // unknowns (V, v_1, …, v_{n-1}); U is eliminated via U⁺ = U + β(V⁺ + V)
        let mut implicit = Tridiagonal {
            sub: vec![-lap; n - 1],
            diag: vec![1.0 + beta * decay + 2.0 * lap; n],
            sup: vec![-lap; n - 1],
        };
        let mut explicit = Tridiagonal {
            sub: vec![lap; n - 1],
            diag: vec![1.0 - beta * decay - 2.0 * lap; n],
            sup: vec![lap; n - 1],
        };
        match coupling {
            Coupling::Full => {
                let mass = 1.0 + 0.5 * h;
                let c = beta * beta * k * k + beta / h + beta * 0.5 * h * decay;
                implicit.diag[0] = mass + c;
                implicit.sup[0] = -beta / h;
                explicit.diag[0] = mass - c;
                explicit.sup[0] = beta / h;
            }
            Coupling::Disabled => {
                let c = beta * beta * k * k;
                implicit.diag[0] = 1.0 + c;
                implicit.sup[0] = 0.0;
                explicit.diag[0] = 1.0 - c;
                explicit.sup[0] = 0.0;
            }
        }
        let lu = implicit
            .factor()
            .ok_or_else(|| crate::Error::Domain("singular midpoint system".into()))?;
        Ok(ModeStepper {
            k,
            eps,
            dt,
            grid: *grid,
            coupling,
            lu,
            explicit,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Advances `state` by one step in place.
    pub fn step(&self, state: &mut ModeState) {
        let n = self.grid.n_z();
        debug_assert_eq!(state.bulk.len(), n + 1);
        let beta = 0.5 * self.dt;
        let u_old = state.displacement;
        let v_old = state.velocity;
        // bulk[0] is the membrane velocity by no-slip, bulk[n] = 0
        let mut rhs = self.explicit.apply(&state.bulk[..n]);
        rhs[0] -= 2.0 * beta * self.k * self.k * u_old;
        self.lu.solve_in_place(&mut rhs);
        let v_new = rhs[0];
        state.bulk[..n].copy_from_slice(&rhs);
        state.bulk[n] = Complex64::new(0.0, 0.0);
        state.velocity = v_new;
        state.displacement = u_old + beta * (v_new + v_old);
    }
}

/// One implicit-midpoint step for a single mode.
pub fn step_mode(state: &ModeState, eps: f64, dt: f64, grid: &ZGrid) -> Result<ModeState> {
    state.check_no_slip(1e-12)?;
    if state.bulk.len() != grid.n_nodes() {
        return domain("bulk profile does not match the grid");
    }
    let stepper = ModeStepper::new(state.k, eps, dt, grid)?;
    let mut next = state.clone();
    stepper.step(&mut next);
    Ok(next)
}

/// Membrane history and energy record of a coupled run.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub times: Vec<f64>,
    /// `membrane[n][m] = (U_m, V_m)` at `times[n]`.
    pub membrane: Vec<Vec<(Complex64, Complex64)>>,
    pub final_state: FieldState,
    pub audit: EnergyAudit,
}

impl CoupledRun {
    pub fn mode_displacement(&self, m: usize) -> Vec<Complex64> {
        self.membrane.iter().map(|row| row[m].0).collect()
    }

    pub fn mode_velocity(&self, m: usize) -> Vec<Complex64> {
        self.membrane.iter().map(|row| row[m].1).collect()
    }
}

/// Advances every mode of `w0` to `t_end` with step `dt`, recording the
/// membrane amplitudes and `𝓔₀` at every step.
pub fn simulate_coupled(
    spec: &SurfaceSpec,
    grid: &ZGrid,
    w0: &FieldState,
    eps: f64,
    dt: f64,
    t_end: f64,
) -> Result<CoupledRun> {
    if w0.modes.len() != spec.n_modes() {
        return domain(format!(
            "state has {} modes, surface has {}",
            w0.modes.len(),
            spec.n_modes()
        ));
    }
    if !(t_end >= 0.0) {
        return domain(format!("horizon must be nonnegative, got {t_end}"));
    }
    w0.check_no_slip(1e-12)?;
    let steps = (t_end / dt).round() as usize;
    let ell = spec.period();
    let steppers = w0
        .modes
        .iter()
        .map(|m| ModeStepper::new(m.k, eps, dt, grid))
        .collect::<Result<Vec<_>>>()?;

    let mut state = w0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut membrane = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut dissipation = Vec::with_capacity(steps + 1);
    let record = |state: &FieldState,
                  t: f64,
                  times: &mut Vec<f64>,
                  membrane: &mut Vec<Vec<(Complex64, Complex64)>>,
                  energy: &mut Vec<f64>,
                  dissipation: &mut Vec<f64>| {
        times.push(t);
        membrane.push(
            state
                .modes
                .iter()
                .map(|m| (m.displacement, m.velocity))
                .collect(),
        );
        energy.push(energy_e0(state, spec, grid));
        dissipation.push(
            ell * state
                .modes
                .iter()
                .map(|m| m.dissipation_density(grid, eps))
                .sum::<f64>(),
        );
    };
    record(&state, 0.0, &mut times, &mut membrane, &mut energy, &mut dissipation);
    for step in 1..=steps {
        for (mode, stepper) in state.modes.iter_mut().zip(&steppers) {
            stepper.step(mode);
        }
        record(
            &state,
            step as f64 * dt,
            &mut times,
            &mut membrane,
            &mut energy,
            &mut dissipation,
        );
    }
    let audit = EnergyAudit::from_series(times.clone(), energy, dissipation);
    Ok(CoupledRun {
        times,
        membrane,
        final_state: state,
        audit,
    })
}
