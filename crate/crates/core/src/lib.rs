//! Line-of-sight MIMO between uniform linear arrays.
//!
//! The crate is organised bottom-up:
//!
//! - [`numkit`]: dense complex matrices, arbitrary-length FFT, Jacobi
//!   Hermitian eigensolver, Gram-route SVD, fast Toeplitz products, Lambert W
//!   and a bracketing root finder.
//! - [`channel`]: geometry-driven channel synthesis (exact spherical distances,
//!   the factored small-aperture form, the Vandermonde core and the
//!   configuration parameter `eta`).
//! - [`capacity`]: water-filling capacity and the equal-gain rate model.
//! - [`bound`]: the capacity upper bound over all antenna arrangements.
//! - [`planner`]: SNR-driven rotation angles and radial ULA banks.
//! - [`transceiver`]: phase banks, Fourier precoder, MRC receiver and the
//!   `O(N log N)` receive path.
//! - [`experiments`]: table and sweep drivers used by the CLI.

pub mod bound;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod numkit;
pub mod planner;
pub mod transceiver;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
