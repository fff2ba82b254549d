//! Matrix product states and operators.
//!
//! Index conventions used throughout:
//!
//! * Site `i` (0-based) carries qubit `i + 1`; qubit 1 is the most significant
//!   bit of a basis index, so row-major flattening of the physical legs gives
//!   the dense index directly.
//! * MPS site tensors are `(left bond, physical = 2, right bond)`.
//! * MPO site tensors are `(left bond, out = 2, in = 2, right bond)`; they are
//!   stored as rank-3 `(left, out * 2 + in, right)` so that states and
//!   operators share one chain type.
//! * Cut `j` (1 <= j <= n - 1) is the bond between sites `j - 1` and `j`,
//!   i.e. qubits `1..=j` versus `j+1..=n`.

mod chain;
pub mod io;
mod merge;
mod mpo;
mod mps;
mod zipup;

pub use chain::{Canonical, Chain, Direction, Truncation, TruncationPolicy};
pub use merge::{zipup_merge_layers, FoldRecord, MergeOptions, MergeResult};
pub use mpo::{mpo_to_dense, Mpo, MAX_MPO_DENSE_QUBITS};
pub use mps::{mps_to_vector, reverse_sites, vector_to_mps, Mps, MAX_DECODE_QUBITS};
pub use zipup::{apply_mpo_zipup, apply_mpo_zipup_with, mpo_product_zipup, ZipupOptions, ZipupReport};

use crate::error::Result;
use crate::spectrum::SchmidtSpectrum;

/// Shared surface of [`Mps`] and [`Mpo`].
pub trait TensorChain: Clone + Sized {
    fn chain(&self) -> &Chain;
    fn into_chain(self) -> Chain;
    #[doc(hidden)]
    fn wrap(chain: Chain) -> Self;

    fn n_sites(&self) -> usize {
        self.chain().len()
    }

    fn bond_dims(&self) -> Vec<usize> {
        self.chain().bond_dims()
    }

    fn max_bond(&self) -> usize {
        self.chain().max_bond()
    }

    fn canonical(&self) -> Canonical {
        self.chain().canonical()
    }
}

/// Fresh QR sweep making every site but the last (left) or first (right) an
/// isometry.
pub fn canonicalize<T: TensorChain>(m: &T, direction: Direction) -> T {
    let mut c = m.chain().clone();
    c.canonicalize(direction);
    T::wrap(c)
}

/// Moves the orthogonality center to `site`.
pub fn mixed_canonical<T: TensorChain>(m: &T, site: usize) -> T {
    let mut c = m.chain().clone();
    c.move_center(site);
    T::wrap(c)
}

/// Normalized Schmidt spectrum across cut `j`.
pub fn schmidt_spectrum_at<T: TensorChain>(m: &T, j: usize) -> Result<SchmidtSpectrum> {
    m.chain().schmidt_spectrum_at(j)
}

/// Spectra at every cut `1..n`, from a single sweep.
pub fn all_schmidt_spectra<T: TensorChain>(m: &T) -> Result<Vec<SchmidtSpectrum>> {
    m.chain().all_spectra()
}

/// Truncates the bond at cut `j`, moving the orthogonality center there first.
pub fn truncate_bond<T: TensorChain>(
    m: &T,
    j: usize,
    policy: &TruncationPolicy,
) -> Result<(T, Truncation)> {
    let mut c = m.chain().clone();
    let t = c.truncate_bond(j, policy)?;
    Ok((T::wrap(c), t))
}

/// Optimal sweep compression of every bond; returns the per-cut truncations.
pub fn compress<T: TensorChain>(m: &T, policy: &TruncationPolicy) -> Result<(T, Vec<Truncation>)> {
    let mut c = m.chain().clone();
    c.move_center(c.len() - 1);
    let t = c.sweep_truncate_leftward(policy)?;
    Ok((T::wrap(c), t))
}

/// Frobenius distance `|a - b|`, computed without forming `|a|^2 + |b|^2 - 2 Re<a, b>`.
pub fn distance<T: TensorChain>(a: &T, b: &T) -> Result<f64> {
    Ok(a.chain().difference(b.chain())?.swept_norm())
}
