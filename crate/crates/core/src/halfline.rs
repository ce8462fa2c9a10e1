//! Diffusion `v̇ = ∂_z² v` on the half-line `z < 0` with Dirichlet data at
//! `z = 0`: closed-form solution formulas, a Crank–Nicolson reference
//! solver, and the Dirichlet-to-Neumann map.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, precondition, Result};
use crate::kernels::{caputo_derivative, FracOrder, SampledSignal};
use crate::linalg::Tridiagonal;

/// Uniform grid on `[-depth, 0]`. Node `0` is the membrane `z = 0`, node
/// `n_z` the truncation depth where homogeneous Dirichlet data are imposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZGrid {
    depth: f64,
    n_z: usize,
}

impl ZGrid {
    pub fn new(depth: f64, n_z: usize) -> Result<Self> {
        if !(depth > 0.0 && depth.is_finite()) {
            return domain(format!("truncation depth must be positive, got {depth}"));
        }
        if n_z < 3 {
            return domain(format!("need at least 3 cells in z, got {n_z}"));
        }
        Ok(ZGrid { depth, n_z })
    }

    /// Grid whose depth `10·√T` keeps the heat-kernel mass beyond the cutoff
    /// negligible over `[0, T]`.
    pub fn for_horizon(t_end: f64, n_z: usize) -> Result<Self> {
        if !(t_end > 0.0) {
            return domain(format!("horizon must be positive, got {t_end}"));
        }
        Self::new(10.0 * t_end.sqrt(), n_z)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Number of cells.
    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_nodes(&self) -> usize {
        self.n_z + 1
    }

    pub fn dz(&self) -> f64 {
        self.depth / self.n_z as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        -(i as f64) * self.dz()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.z(i)).collect()
    }

    /// Same depth, twice the resolution.
    pub fn refined(&self) -> ZGrid {
        ZGrid {
            depth: self.depth,
            n_z: 2 * self.n_z,
        }
    }

    /// Trapezoidal rule over the nodal values.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n_nodes());
        let inner: f64 = f[1..self.n_z].iter().sum();
        self.dz() * (inner + 0.5 * (f[0] + f[self.n_z]))
    }

    /// Samples `f` on the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| f(self.z(i))).collect()
    }
}

/// Time series of half-line profiles.
#[derive(Debug, Clone)]
pub struct HalflineSolution {
    pub grid: ZGrid,
    pub times: Vec<f64>,
    pub profiles: Vec<Vec<f64>>,
    /// `∂_z v(t, 0)` at every recorded time.
    pub boundary_flux: Vec<f64>,
    /// `∂_z v(t, z)` on the grid, when the solver provides it in closed form.
    pub gradients: Option<Vec<Vec<f64>>>,
}

impl HalflineSolution {
    pub fn last_profile(&self) -> &[f64] {
        self.profiles.last().expect("solution has at least one profile")
    }

    pub fn last_flux(&self) -> f64 {
        *self.boundary_flux.last().expect("solution has at least one time")
    }
}

/// `∫_0^u erfc(a / (2√s)) ds`, `a >= 0`.
fn erfc_primitive(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return u;
    }
    let x = a / (2.0 * u.sqrt());
    (u + 0.5 * a * a) * libm::erfc(x) - a * (u / PI).sqrt() * (-x * x).exp()
}

/// `∫_0^u 2 H(s, a) ds`, `a >= 0`.
fn gauss_primitive(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return 2.0 * (u / PI).sqrt();
    }
    let x = a / (2.0 * u.sqrt());
    2.0 * (u / PI).sqrt() * (-x * x).exp() - a * libm::erfc(x)
}

/// Closed-form solution for zero initial data and piecewise-linear boundary
/// data `φ`, evaluated at the sample times of `φ` and every grid node.
///
/// With `φ` piecewise linear, `v(t,z) = ∫_0^t φ̇(s) erfc(|z|/(2√(t-s))) ds`
/// and `∂_z v(t,z) = ∫_0^t 2H(t-s,z) φ̇(s) ds` are integrated exactly on every
/// time cell, so the kernel is never sampled at `s = t`.
pub fn solve_analytic_boundary(phi: &SampledSignal, grid: &ZGrid) -> Result<HalflineSolution> {
    phi.require_causal()?;
    let dt = phi.dt();
    let steps = phi.len() - 1;
    let depths: Vec<f64> = grid.nodes().iter().map(|z| z.abs()).collect();
    let slopes: Vec<f64> = phi.values().windows(2).map(|w| (w[1] - w[0]) / dt).collect();

    // primitives depend on the elapsed time m·dt only
    let value_table: Vec<Vec<f64>> = (0..=steps)
        .map(|m| depths.iter().map(|&a| erfc_primitive(m as f64 * dt, a)).collect())
        .collect();
    let grad_table: Vec<Vec<f64>> = (0..=steps)
        .map(|m| depths.iter().map(|&a| gauss_primitive(m as f64 * dt, a)).collect())
        .collect();

    let n_nodes = grid.n_nodes();
    let mut profiles = Vec::with_capacity(steps + 1);
    let mut gradients = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let mut v = vec![0.0; n_nodes];
        let mut g = vec![0.0; n_nodes];
        for (k, &s) in slopes[..n].iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let (hi, lo) = (n - k, n - k - 1);
            for i in 0..n_nodes {
                v[i] += s * (value_table[hi][i] - value_table[lo][i]);
                g[i] += s * (grad_table[hi][i] - grad_table[lo][i]);
            }
        }
        profiles.push(v);
        gradients.push(g);
    }
    let boundary_flux = gradients.iter().map(|g| g[0]).collect();
    Ok(HalflineSolution {
        grid: *grid,
        times: phi.times().collect(),
        profiles,
        boundary_flux,
        gradients: Some(gradients),
    })
}

/// Closed-form `(v, ∂_z v)` at a single point `(t_n, z)`, `t_n = n·dt`.
pub fn analytic_boundary_at(phi: &SampledSignal, n: usize, z: f64) -> Result<(f64, f64)> {
    phi.require_causal()?;
    if z > 0.0 {
        return domain(format!("half-line points satisfy z <= 0, got {z}"));
    }
    if n >= phi.len() {
        return domain(format!("time index {n} beyond the {} samples", phi.len()));
    }
    let dt = phi.dt();
    let a = z.abs();
    let vals = phi.values();
    let (mut v, mut g) = (0.0, 0.0);
    for k in 0..n {
        let s = (vals[k + 1] - vals[k]) / dt;
        let (hi, lo) = ((n - k) as f64 * dt, (n - k - 1) as f64 * dt);
        v += s * (erfc_primitive(hi, a) - erfc_primitive(lo, a));
        g += s * (gauss_primitive(hi, a) - gauss_primitive(lo, a));
    }
    Ok((v, g))
}

/// `Φ(b) - Φ(a)` for the standard normal distribution, without cancellation
/// in the upper tail.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (libm::erfc(a / SQRT_2) - libm::erfc(b / SQRT_2))
    } else {
        0.5 * (libm::erfc(-b / SQRT_2) - libm::erfc(-a / SQRT_2))
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `∫_lo^hi N(y; mean, σ²) (p + q·y) dy`.
fn gaussian_linear_moment(mean: f64, sigma: f64, lo: f64, hi: f64, p: f64, q: f64) -> f64 {
    let (a, b) = ((lo - mean) / sigma, (hi - mean) / sigma);
    (p + q * mean) * normal_mass(a, b) - q * sigma * (normal_pdf(b) - normal_pdf(a))
}

/// Free evolution of initial data under homogeneous Dirichlet data:
/// `v(t,z) = ∫ K_Dir(t,z,y) v0(y) dy`, with `v0` piecewise linear on the grid
/// (and zero below the truncation depth) integrated exactly against the
/// Gaussian kernels.
pub fn solve_homogeneous_ic(v0: &[f64], grid: &ZGrid, t: f64) -> Result<Vec<f64>> {
    if v0.len() != grid.n_nodes() {
        return domain(format!(
            "profile has {} values for {} nodes",
            v0.len(),
            grid.n_nodes()
        ));
    }
    if !(t > 0.0) {
        return domain(format!("evolution time must be positive, got {t}"));
    }
    let scale = v0.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    if v0[0].abs() > 1e-12 * scale {
        return precondition(format!(
            "initial profile must vanish at z = 0 (compatibility), got {}",
            v0[0]
        ));
    }
    let sigma = (2.0 * t).sqrt();
    let nodes = grid.nodes();
    let out = nodes
        .iter()
        .map(|&z| {
            let mut acc = 0.0;
            for i in 0..grid.n_z() {
                let (y_hi, y_lo) = (nodes[i], nodes[i + 1]);
                let (f_hi, f_lo) = (v0[i], v0[i + 1]);
                if f_hi == 0.0 && f_lo == 0.0 {
                    continue;
                }
                let q = (f_hi - f_lo) / (y_hi - y_lo);
                let p = f_lo - q * y_lo;
                // H(t, z-y) is the N(z, 2t) density in y, H(t, z+y) the N(-z, 2t) density
                acc += gaussian_linear_moment(z, sigma, y_lo, y_hi, p, q)
                    - gaussian_linear_moment(-z, sigma, y_lo, y_hi, p, q);
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Crank–Nicolson reference solver. Every step is recorded; see
/// [`solve_fd_strided`] to thin the stored profiles on long runs.
pub fn solve_fd(
    v0: &[f64],
    phi: &SampledSignal,
    grid: &ZGrid,
    dt: f64,
    t_end: f64,
) -> Result<HalflineSolution> {
    solve_fd_strided(v0, phi, grid, dt, t_end, 1)
}

/// Crank–Nicolson in time, central differences in `z`, `φ` imposed at
/// `z = 0` (linearly interpolated between its samples) and `v = 0` at the
/// truncation depth. Profiles are stored every `stride` steps and at the
/// final time; the boundary flux uses the one-sided second-order stencil.
pub fn solve_fd_strided(
    v0: &[f64],
    phi: &SampledSignal,
    grid: &ZGrid,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<HalflineSolution> {
    if v0.len() != grid.n_nodes() {
        return domain(format!(
            "profile has {} values for {} nodes",
            v0.len(),
            grid.n_nodes()
        ));
    }
    if !(dt > 0.0 && t_end > 0.0) {
        return domain(format!("need dt > 0 and T > 0, got dt = {dt}, T = {t_end}"));
    }
    let stride = stride.max(1);
    let steps = (t_end / dt).round() as usize;
    let boundary = |t: f64| interpolate(phi, t);
    let phi0 = boundary(0.0)?;
    if (v0[0] - phi0).abs() > 1e-12 * (1.0 + phi0.abs()) {
        return precondition(format!(
            "compatibility v0(0) = phi(0) violated: {} vs {phi0}",
            v0[0]
        ));
    }

    let n = grid.n_z();
    let dz = grid.dz();
    let r = dt / (dz * dz);
    let m = n - 1;
    let implicit = Tridiagonal {
        sub: vec![-0.5 * r; m - 1],
        diag: vec![1.0 + r; m],
        sup: vec![-0.5 * r; m - 1],
    }
    .factor()
    .expect("Crank-Nicolson matrix is diagonally dominant");

    let flux = |v: &[f64]| (3.0 * v[0] - 4.0 * v[1] + v[2]) / (2.0 * dz);

    let mut v = v0.to_vec();
    v[n] = 0.0;
    let mut times = vec![0.0];
    let mut profiles = vec![v.clone()];
    let mut fluxes = vec![flux(&v)];
    let mut rhs = vec![0.0; m];
    for step in 1..=steps {
        let t_new = step as f64 * dt;
        let b_new = boundary(t_new)?;
        for i in 1..n {
            rhs[i - 1] = v[i] + 0.5 * r * (v[i + 1] - 2.0 * v[i] + v[i - 1]);
        }
        rhs[0] += 0.5 * r * b_new;
        implicit.solve_in_place(&mut rhs);
        v[0] = b_new;
        v[1..n].copy_from_slice(&rhs);
        if step % stride == 0 || step == steps {
            times.push(t_new);
            fluxes.push(flux(&v));
            profiles.push(v.clone());
        }
    }
    Ok(HalflineSolution {
        grid: *grid,
        times,
        profiles,
        boundary_flux: fluxes,
        gradients: None,
    })
}

/// Piecewise-linear interpolation of a sampled signal, constant beyond its end.
fn interpolate(phi: &SampledSignal, t: f64) -> Result<f64> {
    let vals = phi.values();
    if vals.is_empty() {
        return domain("empty boundary signal");
    }
    let x = t / phi.dt();
    let i = x.floor() as usize;
    if i + 1 >= vals.len() {
        let last = vals.len() - 1;
        if x > last as f64 + 1e-9 {
            return domain(format!(
                "boundary signal ends at t = {}, requested t = {t}",
                phi.time(last)
            ));
        }
        return Ok(vals[last]);
    }
    let w = x - i as f64;
    Ok(vals[i] * (1.0 - w) + vals[i + 1] * w)
}

/// Parabolic Dirichlet-to-Neumann map: `∂_z v(·, 0)` for zero initial data,
/// which is the Caputo derivative of order 1/2 of the boundary data.
pub fn dtn_flux(phi: &SampledSignal) -> Result<SampledSignal> {
    caputo_derivative(FracOrder::HALF, phi)
}
