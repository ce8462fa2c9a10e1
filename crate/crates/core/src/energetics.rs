//! Non-local energy and dissipation of the fractionally damped wave equation
//! and the checks that tie them together.
//!
//! The memory terms are quadratic forms
//!
//! ```text
//! ∫_0^t ∫_0^t N(2t - r - s) ψ(r) ψ(s) dr ds
//! ```
//!
//! with a kernel that depends only on `u = 2t - r - s`. For samples that are
//! constant on uniform cells, the kernel mass of cell pair `(p, q)` counted
//! back from `t` depends only on `p + q` and has a closed form (second
//! differences of the twice-integrated kernel), so the singular corner
//! `r = s = t` is integrated exactly and never sampled.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fracwave::{FractionalRun, HistoryBuffer};
use crate::kernels::{caputo_derivative, frac_kernel_n, FracOrder, KernelOrder, SampledSignal};

/// Energy, dissipation and balance residual along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `|dE/dt + D|` at the interior nodes `times[1..n-1]`, with a centred
    /// difference for `dE/dt`.
    pub balance_residual: Vec<f64>,
}

impl EnergyAudit {
    pub fn from_series(times: Vec<f64>, energy: Vec<f64>, dissipation: Vec<f64>) -> Self {
        assert_eq!(times.len(), energy.len());
        assert_eq!(times.len(), dissipation.len());
        let balance_residual = (1..times.len().saturating_sub(1))
            .map(|n| {
                let rate = (energy[n + 1] - energy[n - 1]) / (times[n + 1] - times[n - 1]);
                (rate + dissipation[n]).abs()
            })
            .collect();
        EnergyAudit {
            times,
            energy,
            dissipation,
            balance_residual,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.balance_residual.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest residual relative to the largest energy on record.
    pub fn max_relative_residual(&self) -> f64 {
        let scale = self.energy.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        if scale == 0.0 {
            0.0
        } else {
            self.max_residual() / scale
        }
    }

    /// Largest step-to-step energy increase relative to the initial energy.
    pub fn max_relative_increase(&self) -> f64 {
        let scale = self.energy.first().copied().unwrap_or(0.0).abs();
        let worst = self
            .energy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0_f64, f64::max);
        if worst == 0.0 {
            0.0
        } else if scale == 0.0 {
            f64::INFINITY
        } else {
            worst / scale
        }
    }

    pub fn is_nonincreasing(&self, rel_tol: f64) -> bool {
        self.max_relative_increase() <= rel_tol
    }
}

/// `(m+2)^β - 2(m+1)^β + m^β`, evaluated without the catastrophic
/// cancellation of the naive formula for large `m`.
fn power_second_difference(beta: f64, m: usize) -> f64 {
    if m == 0 {
        return 2f64.powf(beta) - 2.0;
    }
    let c = (m + 1) as f64;
    let x = 1.0 / c;
    let up = (beta * x.ln_1p()).exp_m1();
    let down = (beta * (-x).ln_1p()).exp_m1();
    c.powf(beta) * (up + down)
}

/// Kernel mass of the cell pairs with `p + q = m`, `m = 0..len`.
fn cell_weights(len: usize, power: f64, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|m| scale * power_second_difference(power, m))
        .collect()
}

/// Weights for `∫∫ ½ N_0^α(2t-r-s) ψ ψ` on cells of width `dt`.
pub(crate) fn energy_weights(alpha: FracOrder, dt: f64, len: usize) -> Vec<f64> {
    let a = alpha.value();
    let scale = -dt.powf(1.0 - a) / (2.0 * libm::tgamma(2.0 - a));
    cell_weights(len, 1.0 - a, scale)
}

/// Weights for `∫∫ N_1^α(2t-r-s) ψ ψ` on cells of width `dt`.
pub(crate) fn dissipation_weights(alpha: FracOrder, dt: f64, len: usize) -> Vec<f64> {
    let a = alpha.value();
    let scale = dt.powf(2.0 - a) / libm::tgamma(3.0 - a);
    cell_weights(len, 2.0 - a, scale)
}

/// Running autocorrelation `A_s = Σ_{i+j=s} Re(c_i c̄_j)` of cell values, so
/// that the memory form at the current time is `Σ_s W(2n-2-s) A_s`.
#[derive(Debug, Clone, Default)]
pub struct MemoryForm {
    cells: Vec<Complex64>,
    autocorr: Vec<f64>,
}

impl MemoryForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn push(&mut self, c: Complex64) {
        let last = self.cells.len();
        self.cells.push(c);
        self.autocorr.resize(2 * last + 1, 0.0);
        for (i, ci) in self.cells[..last].iter().enumerate() {
            self.autocorr[i + last] += 2.0 * (c * ci.conj()).re;
        }
        self.autocorr[2 * last] += c.norm_sqr();
    }

    /// Evaluates the form with pair weights `weights[p + q]`.
    pub fn evaluate(&self, weights: &[f64]) -> f64 {
        let n = self.cells.len();
        if n == 0 {
            return 0.0;
        }
        let top = 2 * n - 2;
        assert!(weights.len() > top, "not enough kernel weights");
        self.autocorr
            .iter()
            .enumerate()
            .map(|(s, a)| a * weights[top - s])
            .sum()
    }
}

/// `∫∫ ½ N_0^α(2t-r-s) ψ(r) ψ(s)` for piecewise-constant `ψ`.
pub fn memory_energy(cells: &[Complex64], dt: f64, alpha: FracOrder) -> f64 {
    let mut form = MemoryForm::new();
    cells.iter().for_each(|&c| form.push(c));
    form.evaluate(&energy_weights(alpha, dt, 2 * cells.len().max(1)))
}

/// `∫∫ N_1^α(2t-r-s) ψ(r) ψ(s)` for piecewise-constant `ψ`.
pub fn memory_dissipation(cells: &[Complex64], dt: f64, alpha: FracOrder) -> f64 {
    let mut form = MemoryForm::new();
    cells.iter().for_each(|&c| form.push(c));
    form.evaluate(&dissipation_weights(alpha, dt, 2 * cells.len().max(1)))
}

/// Reduced energy `𝐄^α` of one mode, scaled by the period `ell`: local
/// kinetic and potential terms plus the memory of the velocity history
/// (cell averages of the nodal velocities).
pub fn reduced_energy(
    history: &HistoryBuffer,
    displacement: Complex64,
    velocity: Complex64,
    k: f64,
    alpha: FracOrder,
    ell: f64,
) -> Result<f64> {
    history.check()?;
    let memory = memory_energy(&history.velocity_cells(), history.dt(), alpha);
    Ok(ell * (0.5 * velocity.norm_sqr() + 0.5 * k * k * displacement.norm_sqr() + memory))
}

/// Reduced dissipation `𝐃^α` of one mode, scaled by the period `ell`.
pub fn reduced_dissipation(history: &HistoryBuffer, alpha: FracOrder, ell: f64) -> Result<f64> {
    history.check()?;
    Ok(ell * memory_dissipation(history.accel(), history.dt(), alpha))
}

/// `𝐄^α` and `𝐃^α` at every step of a fractional run, summed over modes.
pub fn balance_audit(run: &FractionalRun, alpha: FracOrder) -> Result<EnergyAudit> {
    let steps = run.times.len().saturating_sub(1);
    let ell = run.period;
    let dt = run.dt;
    let e_weights = energy_weights(alpha, dt, 2 * steps.max(1));
    let d_weights = dissipation_weights(alpha, dt, 2 * steps.max(1));
    let mut energy = vec![0.0; steps + 1];
    let mut dissipation = vec![0.0; steps + 1];
    for mode in &run.modes {
        mode.history.check()?;
        let vel = mode.history.velocity();
        let acc = mode.history.accel();
        let mut e_form = MemoryForm::new();
        let mut d_form = MemoryForm::new();
        for n in 0..=steps {
            if n > 0 {
                e_form.push(0.5 * (vel[n - 1] + vel[n]));
                d_form.push(acc[n - 1]);
            }
            let local = 0.5 * vel[n].norm_sqr() + 0.5 * mode.k * mode.k * mode.displacement[n].norm_sqr();
            energy[n] += ell * (local + e_form.evaluate(&e_weights));
            dissipation[n] += ell * d_form.evaluate(&d_weights);
        }
    }
    Ok(EnergyAudit::from_series(run.times.clone(), energy, dissipation))
}

/// Per-node residuals of the identity
/// `d/dt ∫∫ ½N_0^α φφ = φ·ᶜD^α φ - ∫∫ N_1^α φ̇φ̇`.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Evaluates both sides of the fractional energy identity on the samples of
/// `φ` (centred difference on the left, L1 Caputo derivative on the right)
/// and reports the residual at interior nodes.
pub fn identity_check(phi: &SampledSignal, alpha: FracOrder) -> Result<IdentityReport> {
    phi.require_causal()?;
    if phi.len() < 3 {
        return domain("identity check needs at least 3 samples");
    }
    let dt = phi.dt();
    let vals = phi.values();
    let steps = vals.len() - 1;
    let e_weights = energy_weights(alpha, dt, 2 * steps);
    let d_weights = dissipation_weights(alpha, dt, 2 * steps);
    let caputo = caputo_derivative(alpha, phi)?;

    let mut e_form = MemoryForm::new();
    let mut d_form = MemoryForm::new();
    let mut stored = vec![0.0; steps + 1];
    let mut dissipated = vec![0.0; steps + 1];
    for n in 1..=steps {
        e_form.push(Complex64::new(0.5 * (vals[n - 1] + vals[n]), 0.0));
        d_form.push(Complex64::new((vals[n] - vals[n - 1]) / dt, 0.0));
        stored[n] = e_form.evaluate(&e_weights);
        dissipated[n] = d_form.evaluate(&d_weights);
    }
    let mut times = Vec::with_capacity(steps);
    let mut residuals = Vec::with_capacity(steps);
    for n in 1..steps {
        let lhs = (stored[n + 1] - stored[n - 1]) / (2.0 * dt);
        let rhs = vals[n] * caputo.values()[n] - dissipated[n];
        times.push(phi.time(n));
        residuals.push((lhs - rhs).abs());
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(IdentityReport {
        times,
        residuals,
        max_residual,
    })
}

/// Extreme eigenvalues of a kernel Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCertificate {
    pub min_eig: f64,
    pub max_eig: f64,
}

impl PsdCertificate {
    pub fn is_psd(&self, rel_tol: f64) -> bool {
        self.min_eig >= -rel_tol * self.max_eig
    }
}

/// Extreme eigenvalues of `[√w_a N_j^α(t_a, t_b) √w_b]` for quadrature
/// weights `w` on the time nodes (cell sizes, normalized to mean one; a
/// single node carries weight one).
pub fn psd_certificate(j: KernelOrder, alpha: FracOrder, times: &[f64]) -> Result<PsdCertificate> {
    let n = times.len();
    if n == 0 || n > 512 {
        return domain(format!("need 1..=512 time nodes, got {n}"));
    }
    if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return domain("time nodes must be positive");
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return domain("duplicate time nodes");
    }
    let weights: Vec<f64> = if n == 1 {
        vec![1.0]
    } else {
        let raw: Vec<f64> = (0..n)
            .map(|a| {
                let left = if a == 0 { 0.0 } else { sorted[a - 1] };
                sorted[a] - left
            })
            .collect();
        let mean = raw.iter().sum::<f64>() / n as f64;
        raw.into_iter().map(|w| w / mean).collect()
    };
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in 0..=a {
            let value =
                weights[a].sqrt() * frac_kernel_n(j, alpha, sorted[a], sorted[b])? * weights[b].sqrt();
            gram[(a, b)] = value;
            gram[(b, a)] = value;
        }
    }
    let eig = gram.symmetric_eigenvalues();
    Ok(PsdCertificate {
        min_eig: eig.min(),
        max_eig: eig.max(),
    })
}
