//! Closed-form heat, boundary and memory kernels, and the L1 quadrature for
//! the Caputo derivative.
//!
//! All kernels are expressed in the nondimensional variables of the coupled
//! system: time `t`, depth `z <= 0` below the membrane.

use std::f64::consts::PI;

use crate::error::{domain, precondition, Error, Result};

/// Index of the boundary/memory kernel pair: `Zero` maps boundary values to
/// the bulk field, `One` maps boundary velocities to the bulk shear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelOrder {
    Zero,
    One,
}

impl KernelOrder {
    pub fn index(self) -> u8 {
        match self {
            KernelOrder::Zero => 0,
            KernelOrder::One => 1,
        }
    }
}

impl TryFrom<u8> for KernelOrder {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            0 => Ok(KernelOrder::Zero),
            1 => Ok(KernelOrder::One),
            _ => domain(format!("kernel order must be 0 or 1, got {j}")),
        }
    }
}

/// Order of a fractional derivative, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub const HALF: FracOrder = FracOrder(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(FracOrder(alpha))
        } else {
            domain(format!("fractional order must lie in (0,1), got {alpha}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `Γ(1-α)`.
    pub fn gamma_one_minus(self) -> f64 {
        libm::tgamma(1.0 - self.0)
    }
}

/// Uniformly sampled scalar signal `φ(0), φ(Δt), φ(2Δt), …`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        Ok(SampledSignal { dt, values })
    }

    /// Samples `f` at `t = 0, dt, …, n_steps·dt`.
    pub fn from_fn(dt: f64, n_steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..=n_steps).map(|i| f(i as f64 * dt)).collect();
        Self::new(dt, values)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.time(i))
    }

    /// Checks the standing assumptions of every memory operation:
    /// at least two samples and `φ(0) = 0`.
    pub fn require_causal(&self) -> Result<()> {
        if self.values.len() < 2 {
            return domain("a sampled signal needs at least 2 samples");
        }
        if self.values[0] != 0.0 {
            return precondition(format!(
                "signal must start at zero, got phi(0) = {}",
                self.values[0]
            ));
        }
        Ok(())
    }
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        domain(format!("kernel time argument must be positive, got {t}"))
    }
}

/// One-dimensional heat kernel `(4πt)^{-1/2} exp(-z²/(4t))`.
pub fn heat_kernel(t: f64, z: f64) -> Result<f64> {
    require_positive_time(t)?;
    Ok(heat_kernel_unchecked(t, z))
}

#[inline]
pub(crate) fn heat_kernel_unchecked(t: f64, z: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Reflected heat kernel for homogeneous Dirichlet data at `z = 0`.
pub fn dirichlet_kernel(t: f64, z: f64, y: f64) -> Result<f64> {
    require_positive_time(t)?;
    Ok(heat_kernel_unchecked(t, z - y) - heat_kernel_unchecked(t, z + y))
}

/// Distribution function of `H(1, ·)`, a centred Gaussian of variance 2.
pub fn gauss_cdf(y: f64) -> f64 {
    0.5 * libm::erfc(-0.5 * y)
}

/// Boundary kernels `K_0 = 2∂_z H = -(z/t) H` and `K_1 = 2H`.
pub fn boundary_kernel(j: KernelOrder, t: f64, z: f64) -> Result<f64> {
    require_positive_time(t)?;
    if z > 0.0 {
        return domain(format!("boundary kernels live on z <= 0, got z = {z}"));
    }
    let h = heat_kernel_unchecked(t, z);
    Ok(match j {
        KernelOrder::Zero => -(z / t) * h,
        KernelOrder::One => 2.0 * h,
    })
}

/// Memory kernel `M_j(r,s) = ∫ K_j(r,z) K_j(s,z) dz = 2^j / (√(4π) (r+s)^{3/2-j})`.
pub fn memory_kernel_m(j: KernelOrder, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0 && s > 0.0) {
        return domain(format!("memory kernel needs r, s > 0, got ({r}, {s})"));
    }
    let sum = r + s;
    Ok(match j {
        KernelOrder::Zero => 1.0 / ((4.0 * PI).sqrt() * sum.powf(1.5)),
        KernelOrder::One => 2.0 / ((4.0 * PI).sqrt() * sum.sqrt()),
    })
}

/// Fractional memory kernels
/// `N_0^α = α / (Γ(1-α)(r+s)^{1+α})` and `N_1^α = 1 / (Γ(1-α)(r+s)^α)`.
pub fn frac_kernel_n(j: KernelOrder, alpha: FracOrder, r: f64, s: f64) -> Result<f64> {
    if r < 0.0 || s < 0.0 {
        return domain(format!("fractional kernel needs r, s >= 0, got ({r}, {s})"));
    }
    let sum = r + s;
    if sum <= 0.0 {
        return domain("fractional kernel is singular at r + s = 0");
    }
    let a = alpha.value();
    let g = alpha.gamma_one_minus();
    Ok(match j {
        KernelOrder::Zero => a / (g * sum.powf(1.0 + a)),
        KernelOrder::One => 1.0 / (g * sum.powf(a)),
    })
}

/// L1 weights `b_m = (m+1)^{1-α} - m^{1-α}`, `m = 0..n`.
pub(crate) fn l1_weights(alpha: f64, n: usize) -> Vec<f64> {
    let p = 1.0 - alpha;
    (0..n)
        .map(|m| {
            let m = m as f64;
            (m + 1.0).powf(p) - m.powf(p)
        })
        .collect()
}

/// Caputo derivative of order `α` by the L1 scheme: `φ` is reconstructed
/// piecewise linearly and the singular kernel is integrated exactly on
/// every cell.
pub fn caputo_derivative(alpha: FracOrder, phi: &SampledSignal) -> Result<SampledSignal> {
    phi.require_causal()?;
    let a = alpha.value();
    let n = phi.len();
    let dt = phi.dt();
    let slopes: Vec<f64> = phi.values().windows(2).map(|w| w[1] - w[0]).collect();
    let weights = l1_weights(a, n);
    // Γ(1-α)(1-α) = Γ(2-α)
    let scale = dt.powf(-a) / libm::tgamma(2.0 - a);
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let acc: f64 = slopes[..i]
            .iter()
            .enumerate()
            .map(|(k, d)| d * weights[i - 1 - k])
            .sum();
        *slot = scale * acc;
    }
    SampledSignal::new(dt, out)
}
