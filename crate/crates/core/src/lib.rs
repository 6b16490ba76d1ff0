//! Numerical workbench for 1D stochastic evolution equations
//!
//!   du = d/dx( a(x, omega) du/dx ) dt + f(u) dt + G(u) dW(x, t)
//!
//! on (0,1) with homogeneous Dirichlet boundaries, where the diffusion
//! coefficient a = eps * exp(z) is a log-Gaussian field with Whittle-Matérn
//! covariance and W is a truncated Q-Wiener process. The crate provides the
//! field sampler (circulant embedding with padding), the P1 finite element /
//! semi-implicit Euler-Maruyama stepper, and coupled-path Monte Carlo
//! machinery for strong-convergence studies.

pub mod bessel;
pub mod covariance;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod grf;
pub mod noise;
pub mod quadrature;
pub mod rng;
pub mod stepper;

pub use error::{Error, Result};
