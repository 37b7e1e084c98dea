//! Self-contained numerical kernel.

pub mod eig;
pub mod fft;
pub mod lambert;
pub mod matrix;
pub mod root;
pub mod svd;
pub mod toeplitz;

pub use eig::{hermitian_eig, hermitian_eigvals, EigenSpectrum};
pub use fft::fft;
pub use lambert::lambert_w0;
pub use matrix::ComplexMat;
pub use root::bisect_root;
pub use svd::{singular_values, svd_via_gram, Svd};
pub use toeplitz::toeplitz_apply;
