//! Fractionally damped wave equation `Ü + ᶜD^α U̇ = ΔU` per Fourier mode,
//! with the full memory of the acceleration history.
//!
//! The acceleration is the unknown and is constant on each time cell, so the
//! velocity is piecewise linear and the displacement piecewise quadratic.
//! The equation is collocated at cell midpoints: the damping integral
//! `(1/Γ(1-α)) ∫_0^t (t-τ)^{-α} Ü(τ) dτ` is integrated exactly over every
//! cell, including the half cell that carries the unknown, which leaves one
//! scalar linear equation per step. Without damping the scheme reduces to a
//! second-order, energy-neutral oscillator update.

use num_complex::Complex64;

use crate::coupled::SurfaceSpec;
use crate::energetics::{balance_audit, EnergyAudit};
use crate::error::{domain, precondition, Result};
use crate::halfline::{solve_analytic_boundary, ZGrid};
use crate::kernels::{FracOrder, SampledSignal};

/// Acceleration cells and velocity nodes of one mode, starting from rest.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    dt: f64,
    accel: Vec<Complex64>,
    vel: Vec<Complex64>,
}

impl HistoryBuffer {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        Ok(HistoryBuffer {
            dt,
            accel: Vec::new(),
            vel: vec![Complex64::new(0.0, 0.0)],
        })
    }

    /// Builds a buffer from recorded samples, `vel.len() == accel.len() + 1`.
    pub fn from_samples(dt: f64, accel: Vec<Complex64>, vel: Vec<Complex64>) -> Result<Self> {
        let buf = HistoryBuffer { dt, accel, vel };
        if !(dt > 0.0) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        buf.check()?;
        Ok(buf)
    }

    pub fn check(&self) -> Result<()> {
        if self.vel.len() != self.accel.len() + 1 {
            return domain("history needs one more velocity node than acceleration cells");
        }
        if self.vel[0] != Complex64::new(0.0, 0.0) {
            return precondition("history must start from zero velocity");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn accel(&self) -> &[Complex64] {
        &self.accel
    }

    pub fn velocity(&self) -> &[Complex64] {
        &self.vel
    }

    pub fn n_cells(&self) -> usize {
        self.accel.len()
    }

    pub fn time(&self) -> f64 {
        self.accel.len() as f64 * self.dt
    }

    /// Cell averages of the (piecewise-linear) velocity.
    pub fn velocity_cells(&self) -> Vec<Complex64> {
        self.vel.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn push(&mut self, a: Complex64) {
        let v = *self.vel.last().expect("history holds the initial node") + self.dt * a;
        self.accel.push(a);
        self.vel.push(v);
    }
}

/// Membrane state of one mode with its memory.
#[derive(Debug, Clone, PartialEq)]
pub struct FracWaveState {
    pub k: f64,
    pub displacement: Complex64,
    pub velocity: Complex64,
    pub history: HistoryBuffer,
}

impl FracWaveState {
    /// Displaced membrane released from rest.
    pub fn released(k: f64, displacement: Complex64, dt: f64) -> Result<Self> {
        if !(k >= 0.0) {
            return domain(format!("wavenumber must be nonnegative, got {k}"));
        }
        Ok(FracWaveState {
            k,
            displacement,
            velocity: Complex64::new(0.0, 0.0),
            history: HistoryBuffer::new(dt)?,
        })
    }
}

/// Whether the memory term acts; without it the membrane is an undamped
/// oscillator, which is only useful for testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    Fractional,
    Disabled,
}

/// Precomputed kernel weights for repeated steps of one mode.
#[derive(Debug, Clone)]
pub struct FractionalStepper {
    k: f64,
    dt: f64,
    damping: Damping,
    /// Kernel mass of the cell that ended `m` cells before the midpoint cell.
    past_weights: Vec<f64>,
    /// Kernel mass of the current half cell.
    current_weight: f64,
    scale: f64,
    alpha: f64,
}

impl FractionalStepper {
    pub fn new(k: f64, alpha: FracOrder, dt: f64, damping: Damping) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        let a = alpha.value();
        // Γ(1-α)(1-α) = Γ(2-α)
        let scale = dt.powf(1.0 - a) / libm::tgamma(2.0 - a);
        Ok(FractionalStepper {
            k,
            dt,
            damping,
            past_weights: Vec::new(),
            current_weight: scale * 0.5f64.powf(1.0 - a),
            scale,
            alpha: a,
        })
    }

    fn ensure_weights(&mut self, n: usize) {
        let p = 1.0 - self.alpha;
        while self.past_weights.len() < n {
            // cell ending (m + 1/2)·dt before the collocation point
            let m = self.past_weights.len() as f64;
            let w = self.scale * ((m + 1.5).powf(p) - (m + 0.5).powf(p));
            self.past_weights.push(w);
        }
    }

    /// Acceleration of the next cell.
    pub fn solve_acceleration(&mut self, state: &FracWaveState) -> Complex64 {
        let dt = self.dt;
        let k2 = self.k * self.k;
        let hist = &state.history;
        let n = hist.n_cells();
        let (memory, current) = match self.damping {
            Damping::Fractional => {
                self.ensure_weights(n);
                let mem: Complex64 = hist
                    .accel
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * self.past_weights[n - 1 - j])
                    .sum();
                (mem, self.current_weight)
            }
            Damping::Disabled => (Complex64::new(0.0, 0.0), 0.0),
        };
        // U(t + dt/2) = U + (dt/2) V + (dt²/8) a
        let rhs = -k2 * (state.displacement + 0.5 * dt * state.velocity) - memory;
        rhs / (1.0 + current + k2 * dt * dt / 8.0)
    }

    pub fn step(&mut self, state: &mut FracWaveState) {
        let a = self.solve_acceleration(state);
        let dt = self.dt;
        state.displacement += dt * state.velocity + 0.5 * dt * dt * a;
        state.history.push(a);
        state.velocity = *state.history.vel.last().unwrap();
    }
}

/// One step of the fractional wave equation for a single mode.
pub fn step_fractional(state: &FracWaveState, alpha: FracOrder, dt: f64) -> Result<FracWaveState> {
    state.history.check()?;
    if (state.history.dt() - dt).abs() > 1e-14 * dt {
        return domain(format!(
            "step {dt} does not match the history step {}",
            state.history.dt()
        ));
    }
    let mut stepper = FractionalStepper::new(state.k, alpha, dt, Damping::Fractional)?;
    let mut next = state.clone();
    stepper.step(&mut next);
    Ok(next)
}

/// Trajectory of one mode.
#[derive(Debug, Clone)]
pub struct FractionalModeRun {
    pub k: f64,
    pub displacement: Vec<Complex64>,
    pub history: HistoryBuffer,
}

impl FractionalModeRun {
    pub fn velocity(&self) -> &[Complex64] {
        self.history.velocity()
    }
}

/// Trajectories of all modes with the reduced energy audit.
#[derive(Debug, Clone)]
pub struct FractionalRun {
    pub period: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub modes: Vec<FractionalModeRun>,
    pub audit: EnergyAudit,
}

/// Runs every mode from `U(0) = u0`, `U̇(0) = v0 = 0` to `t_end`.
pub fn simulate_fractional(
    spec: &SurfaceSpec,
    u0: &[Complex64],
    v0: &[Complex64],
    alpha: FracOrder,
    dt: f64,
    t_end: f64,
) -> Result<FractionalRun> {
    simulate_fractional_with(spec, u0, v0, alpha, dt, t_end, Damping::Fractional)
}

pub fn simulate_fractional_with(
    spec: &SurfaceSpec,
    u0: &[Complex64],
    v0: &[Complex64],
    alpha: FracOrder,
    dt: f64,
    t_end: f64,
    damping: Damping,
) -> Result<FractionalRun> {
    if u0.len() != spec.n_modes() || v0.len() != spec.n_modes() {
        return domain(format!("expected {} initial amplitudes", spec.n_modes()));
    }
    if v0.iter().any(|v| v.norm() != 0.0) {
        return precondition("the memory formulation requires zero initial velocity");
    }
    if !(t_end >= 0.0) {
        return domain(format!("horizon must be nonnegative, got {t_end}"));
    }
    let steps = (t_end / dt).round() as usize;
    let modes = spec
        .wavenumbers()
        .into_iter()
        .zip(u0)
        .map(|(k, &u)| {
            let mut state = FracWaveState::released(k, u, dt)?;
            let mut stepper = FractionalStepper::new(k, alpha, dt, damping)?;
            let mut displacement = Vec::with_capacity(steps + 1);
            displacement.push(u);
            for _ in 0..steps {
                stepper.step(&mut state);
                displacement.push(state.displacement);
            }
            Ok(FractionalModeRun {
                k,
                displacement,
                history: state.history,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut run = FractionalRun {
        period: spec.period(),
        dt,
        times: (0..=steps).map(|n| n as f64 * dt).collect(),
        modes,
        audit: EnergyAudit::from_series(Vec::new(), Vec::new(), Vec::new()),
    };
    run.audit = balance_audit(&run, alpha)?;
    Ok(run)
}

/// Bulk velocity rebuilt from the membrane velocity history.
#[derive(Debug, Clone)]
pub struct BulkReconstruction {
    pub grid: ZGrid,
    pub times: Vec<f64>,
    pub profiles: Vec<Vec<Complex64>>,
    /// `∂_z v(t, 0)` at every time.
    pub boundary_flux: Vec<Complex64>,
}

/// `v(t,z) = ∫_0^t 2∂_z H(t-τ,z) U̇(τ) dτ`, the diffusion field driven by the
/// membrane velocity through no-slip.
pub fn reconstruct_bulk(history: &HistoryBuffer, grid: &ZGrid) -> Result<BulkReconstruction> {
    history.check()?;
    let dt = history.dt();
    let re = SampledSignal::new(dt, history.vel.iter().map(|c| c.re).collect())?;
    let im = SampledSignal::new(dt, history.vel.iter().map(|c| c.im).collect())?;
    let (re, im) = if history.vel.len() < 2 {
        return Ok(BulkReconstruction {
            grid: *grid,
            times: vec![0.0],
            profiles: vec![vec![Complex64::new(0.0, 0.0); grid.n_nodes()]],
            boundary_flux: vec![Complex64::new(0.0, 0.0)],
        });
    } else {
        (
            solve_analytic_boundary(&re, grid)?,
            solve_analytic_boundary(&im, grid)?,
        )
    };
    let profiles = re
        .profiles
        .iter()
        .zip(&im.profiles)
        .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect())
        .collect();
    let boundary_flux = re
        .boundary_flux
        .iter()
        .zip(&im.boundary_flux)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    Ok(BulkReconstruction {
        grid: *grid,
        times: re.times,
        profiles,
        boundary_flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let mut s = FracWaveState::released(1.0, c(0.0), 0.01).unwrap();
        for _ in 0..50 {
            s = step_fractional(&s, FracOrder::HALF, 0.01).unwrap();
        }
        assert_eq!(s.displacement, c(0.0));
        assert!(s.history.accel().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn undamped_limit_is_cosine() {
        let dt = 1e-3;
        let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
        let run = simulate_fractional_with(
            &spec,
            &[c(0.0), c(1.0)],
            &[c(0.0), c(0.0)],
            FracOrder::HALF,
            dt,
            2.0,
            Damping::Disabled,
        )
        .unwrap();
        let mode = &run.modes[1];
        for (t, u) in run.times.iter().zip(&mode.displacement) {
            assert!((u.re - t.cos()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn velocity_is_integrated_acceleration() {
        let mut s = FracWaveState::released(2.0, c(1.0), 0.01).unwrap();
        for _ in 0..100 {
            s = step_fractional(&s, FracOrder::new(0.3).unwrap(), 0.01).unwrap();
        }
        let integral: Complex64 = s.history.accel().iter().map(|a| a * 0.01).sum();
        assert_relative_eq!(s.velocity.re, integral.re, max_relative = 1e-12);
    }

    #[test]
    fn nonzero_initial_velocity_is_rejected() {
        let spec = SurfaceSpec::new(1.0, 1).unwrap();
        let err = simulate_fractional(&spec, &[c(1.0)], &[c(0.1)], FracOrder::HALF, 0.01, 0.1);
        assert!(matches!(err, Err(crate::Error::Precondition(_))));
    }

    #[test]
    fn step_must_match_history() {
        let s = FracWaveState::released(1.0, c(1.0), 0.01).unwrap();
        assert!(step_fractional(&s, FracOrder::HALF, 0.02).is_err());
    }

    #[test]
    fn zero_history_reconstructs_zero_bulk() {
        let grid = ZGrid::new(4.0, 20).unwrap();
        let hist =
            HistoryBuffer::from_samples(0.1, vec![c(0.0); 5], vec![c(0.0); 6]).unwrap();
        let bulk = reconstruct_bulk(&hist, &grid).unwrap();
        assert!(bulk.profiles.iter().flatten().all(|v| v.norm() == 0.0));
        let empty = HistoryBuffer::new(0.1).unwrap();
        assert_eq!(reconstruct_bulk(&empty, &grid).unwrap().profiles.len(), 1);
    }
}
