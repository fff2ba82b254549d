//! Tensor-network Fourier transforms.
//!
//! The QFT without its final bit reversal has exponentially decaying operator
//! Schmidt coefficients, so it compresses into a matrix product operator of
//! small, `n`-independent bond dimension. Applying that operator to a
//! low-bond-dimension MPS costs time linear in the number of qubits: the
//! "superfast Fourier transform" of [`sft`].
//!
//! # Conventions
//!
//! * Qubit 1 is the most significant bit of a basis index; a function
//!   argument is the binary fraction `x = 0.q_1 q_2 .. q_n`.
//! * The DFT uses a `+i` exponent and `1/sqrt(N)` normalization everywhere,
//!   including the [`fft`] baseline.
//! * Tensor index orders are documented in [`tn`].

pub mod dense;
pub mod error;
pub mod fft;
pub mod functions;
pub mod linalg;
pub mod qft;
pub mod sft;
pub mod spectrum;
pub mod tn;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::C64;
pub use spectrum::SchmidtSpectrum;
