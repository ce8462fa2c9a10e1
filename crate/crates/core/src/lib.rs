//! Membrane waves coupled to a diffusive half-space, their fractionally
//! damped scaling limit, and the energy bookkeeping that links the two.
//!
//! Modules, bottom-up:
//!
//! - [`kernels`]: heat, boundary and memory kernels; L1 Caputo quadrature.
//! - [`halfline`]: half-line diffusion, Crank–Nicolson reference solver, and
//!   the parabolic Dirichlet-to-Neumann map.
//! - [`coupled`]: per-Fourier-mode integrator of the membrane/bulk system.
//! - [`fracwave`]: the fractionally damped wave equation with full memory.
//! - [`dispersion`]: plane-wave dispersion relations and their asymptotics.
//! - [`energetics`]: non-local energy and dissipation, identity and
//!   positivity checks.
//! - [`harness`]: nondimensionalization, ε-convergence studies, experiment
//!   configs and report files.

pub mod coupled;
pub mod dispersion;
pub mod energetics;
pub mod error;
pub mod fracwave;
pub mod halfline;
pub mod harness;
pub mod kernels;
pub mod linalg;

pub use error::{Error, Result};
pub use kernels::{FracOrder, KernelOrder, SampledSignal};
