//! Plane-wave solutions `e^{μt + ikx + γz}` of the coupled system and of its
//! fractional limit.
//!
//! Eliminating `γ` leaves the quartic
//! `Γ(μ,k) = (μ² + k²)² − ε²μ²k² − μ³`, whose roots are found as companion
//! matrix eigenvalues. The decay rate is recovered from the membrane equation,
//! `γ = −(μ² + k²)/μ`, which also fixes the sign that squaring discarded.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{domain, Result};

/// Roots with `Re μ` below this multiple of `max(1, |μ|)` count as non-growing.
const STABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoot {
    pub k: f64,
    pub eps: f64,
    /// Temporal factor `μ = iω`.
    pub mu: Complex64,
    /// Vertical decay rate, `γ² = μ + ε²k²`.
    pub gamma: Complex64,
    /// `|Γ(μ,k)|`.
    pub residual: f64,
    pub admissible: bool,
}

/// `Γ(μ,k) = (μ² + k²)² − ε²μ²k² − μ³`.
pub fn gamma_residual(mu: Complex64, k: f64, eps: f64) -> Complex64 {
    let mu2 = mu * mu;
    let s = mu2 + k * k;
    s * s - eps * eps * k * k * mu2 - mu2 * mu
}

fn gamma_derivative(mu: Complex64, k: f64, eps: f64) -> Complex64 {
    let k2 = k * k;
    4.0 * mu * mu * mu - 3.0 * mu * mu + 2.0 * (2.0 - eps * eps) * k2 * mu
}

/// Roots of the monic quartic `x⁴ + c[3]x³ + c[2]x² + c[1]x + c[0]`.
fn quartic_roots(c: [f64; 4]) -> [Complex64; 4] {
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -c[0],
        1.0, 0.0, 0.0, -c[1],
        0.0, 1.0, 0.0, -c[2],
        0.0, 0.0, 1.0, -c[3],
    );
    let ev = companion.complex_eigenvalues();
    [ev[0], ev[1], ev[2], ev[3]]
}

fn polish(
    mu: Complex64,
    f: impl Fn(Complex64) -> Complex64,
    df: impl Fn(Complex64) -> Complex64,
) -> Complex64 {
    let d = df(mu);
    if d.norm() == 0.0 {
        return mu;
    }
    let next = mu - f(mu) / d;
    if next.is_finite() && f(next).norm() <= f(mu).norm() {
        next
    } else {
        mu
    }
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("wavenumber must be positive, got {k}"));
    }
    Ok(())
}

/// All four roots of `Γ(·,k) = 0`, tagged with `γ` and admissibility.
pub fn solve_dispersion(k: f64, eps: f64) -> Result<Vec<DispersionRoot>> {
    check_wavenumber(k)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return domain(format!("eps must be nonnegative, got {eps}"));
    }
    let k2 = k * k;
    let c2 = 2.0 - eps * eps;
    let seeds: Vec<Complex64> = if k >= 1.0 {
        // μ = k ξ keeps the companion entries of order one for short waves
        quartic_roots([1.0, 0.0, c2, -1.0 / k]).iter().map(|x| x * k).collect()
    } else {
        // three roots cluster like k^{4/3}; with μ = k^{4/3}/η they become
        // well separated roots of η⁴ + (2-ε²)k^{2/3}η² − η + k^{4/3}
        let s = k.powf(4.0 / 3.0);
        quartic_roots([s, -1.0, c2 * k.powf(2.0 / 3.0), 0.0])
            .iter()
            .map(|&eta| s / eta)
            .collect()
    };
    Ok(seeds
        .into_iter()
        .map(|seed| {
            let mu = polish(
                seed,
                |m| gamma_residual(m, k, eps),
                |m| gamma_derivative(m, k, eps),
            );
            let gamma = -(mu * mu + k2) / mu;
            let admissible = mu.re <= STABILITY_TOL * mu.norm().max(1.0) && gamma.re > 0.0;
            DispersionRoot {
                k,
                eps,
                mu,
                gamma,
                residual: gamma_residual(mu, k, eps).norm(),
                admissible,
            }
        })
        .collect())
}

/// Admissible roots only.
pub fn admissible_roots(k: f64, eps: f64) -> Result<Vec<DispersionRoot>> {
    Ok(solve_dispersion(k, eps)?
        .into_iter()
        .filter(|r| r.admissible)
        .collect())
}

/// `μ² + μ^{3/2} + k²` on the principal branch.
pub fn fractional_residual(mu: Complex64, k: f64) -> Complex64 {
    mu * mu + mu.powf(1.5) + k * k
}

/// Solutions of `μ² + μ^{3/2} + k² = 0` with `μ^{1/2}` the principal root.
///
/// With `ν = μ^{1/2}` the relation is the quartic `ν⁴ + ν³ + k² = 0`; only
/// roots with `Re ν > 0` (or `Re ν = 0`, `Im ν ≥ 0`) are principal square roots.
pub fn fractional_dispersion(k: f64) -> Result<Vec<Complex64>> {
    check_wavenumber(k)?;
    let k2 = k * k;
    let seeds: Vec<Complex64> = if k >= 1.0 {
        let s = k.sqrt();
        quartic_roots([1.0, 0.0, 0.0, 1.0 / s]).iter().map(|x| x * s).collect()
    } else {
        // ν = k^{2/3}/η turns the small-root cluster into η⁴ + η + k^{2/3}
        let s = k.powf(2.0 / 3.0);
        quartic_roots([s, 1.0, 0.0, 0.0]).iter().map(|&eta| s / eta).collect()
    };
    Ok(seeds
        .into_iter()
        .map(|seed| {
            polish(
                seed,
                |n| n * n * n * n + n * n * n + k2,
                |n| 4.0 * n * n * n + 3.0 * n * n,
            )
        })
        .filter(|nu| nu.re > 0.0 || (nu.re == 0.0 && nu.im >= 0.0))
        .map(|nu| nu * nu)
        .filter(|mu| mu.re <= STABILITY_TOL * mu.norm().max(1.0))
        .collect())
}

/// Leading-order long-wave pair `μ = −(1/2 ± i√3/2)|k|^{4/3}`.
pub fn longwave_asymptote(k: f64) -> [Complex64; 2] {
    let scale = k.abs().powf(4.0 / 3.0);
    let h = 3f64.sqrt() / 2.0;
    [
        -Complex64::new(0.5, h) * scale,
        -Complex64::new(0.5, -h) * scale,
    ]
}

/// Leading-order short-wave root `μ = −i|k| − (|k|/2)(ε² − i/|k|)^{1/2}`.
pub fn shortwave_asymptote(k: f64, eps: f64) -> Complex64 {
    let k = k.abs();
    let i = Complex64::i();
    -i * k - 0.5 * k * (eps * eps - i / k).sqrt()
}
