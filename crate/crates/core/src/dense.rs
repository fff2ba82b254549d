//! Exact dense operators over `2^n`-dimensional qubit registers.
//!
//! These are ground truth for everything in the tensor-network modules and are
//! only meant for small registers (`n <= MAX_DENSE_QUBITS`).

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use faer::Mat;
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::spectrum::SchmidtSpectrum;

/// Largest register handled by dense constructors.
pub const MAX_DENSE_QUBITS: usize = 14;

/// `exp(2*pi*i * m / 2^bits)`, with `m` reduced modulo `2^bits` in integer
/// arithmetic. The angle is folded into the first octant so quarter turns are
/// exact and conjugate pairs stay exactly conjugate.
pub fn unit_phase(m: u64, bits: u32) -> C64 {
    if bits == 0 {
        return C64::new(1.0, 0.0);
    }
    if bits == 1 {
        return C64::new(if m & 1 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    let bits = bits.min(120);
    let reduced = u128::from(m) & ((1u128 << bits) - 1);
    let quarter = (reduced >> (bits - 2)) as u8;
    let quarter_len = 1u128 << (bits - 2);
    let rem = reduced & (quarter_len - 1);
    let scale = 2f64.powi(bits as i32);
    let (c, s) = if 2 * rem == quarter_len {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if 2 * rem > quarter_len {
        let (s, c) = (TAU * (quarter_len - rem) as f64 / scale).sin_cos();
        (s, c)
    } else {
        let (s, c) = (TAU * rem as f64 / scale).sin_cos();
        (c, s)
    };
    match quarter {
        0 => C64::new(c, s),
        1 => C64::new(-s, c),
        2 => C64::new(-c, -s),
        _ => C64::new(s, -c),
    }
}

/// Reverses the low `n` bits of `x`.
pub fn reverse_bits(x: usize, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    x.reverse_bits() >> (usize::BITS as usize - n)
}

/// Index map `q_1..q_n -> q_n..q_1`, where qubit 1 is the most significant bit.
pub fn bit_reversal_permutation(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|x| reverse_bits(x, n)).collect()
}

pub(crate) fn check_dense_size(what: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::TooSmall { what, got: n, min: 1 });
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            what,
            got: n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Square complex matrix acting on `n` qubits, stored row-major.
///
/// Constructors in this module always produce unitaries; operators contracted
/// from truncated tensor networks generally are not.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: Array2<C64>,
}

impl DenseOperator {
    pub fn from_matrix(n: usize, matrix: Array2<C64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.dim() != (dim, dim) {
            return Err(Error::Validation(format!(
                "matrix shape {:?} does not match n = {n}",
                matrix.dim()
            )));
        }
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dense_size("identity", n)?;
        Ok(Self {
            n,
            matrix: Array2::eye(1 << n),
        })
    }

    /// Permutation operator sending basis state `|x>` to `|perm[x]>`.
    pub fn permutation(n: usize, perm: &[usize]) -> Result<Self> {
        check_dense_size("permutation", n)?;
        let dim = 1usize << n;
        if perm.len() != dim {
            return Err(Error::Validation(format!(
                "permutation has {} entries, expected {dim}",
                perm.len()
            )));
        }
        let mut matrix = Array2::zeros((dim, dim));
        for (x, &y) in perm.iter().enumerate() {
            matrix[[y, x]] = C64::new(1.0, 0.0);
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[[row, col]]
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        if self.n != rhs.n {
            return Err(Error::SiteMismatch {
                operator: self.n,
                state: rhs.n,
            });
        }
        Ok(Self {
            n: self.n,
            matrix: self.matrix.dot(&rhs.matrix),
        })
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self {
            n: self.n,
            matrix: self.matrix.t().mapv(|z| z.conj()),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::Validation(format!(
                "vector length {} does not match operator dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self.matrix.dot(&Array1::from(v.to_vec())).to_vec())
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(self.matrix.view())
    }

    pub fn frobenius_distance(&self, other: &DenseOperator) -> f64 {
        linalg::frobenius((&self.matrix - &other.matrix).view())
    }

    /// Max-abs deviation of `U U^dagger` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.dot(&self.matrix.t().mapv(|z| z.conj()));
        prod.indexed_iter()
            .map(|((i, j), z)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (z - C64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// The unitary DFT on `n` qubits: entry `(q, q') = exp(+2*pi*i*q*q'/2^n) / sqrt(2^n)`.
pub fn dft_matrix(n: usize) -> Result<DenseOperator> {
    check_dense_size("dft_matrix", n)?;
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let matrix =
        Array2::from_shape_fn((dim, dim), |(q, qp)| unit_phase((q * qp) as u64, n as u32) * scale);
    Ok(DenseOperator { n, matrix })
}

/// Operator Schmidt spectrum of `u` across the cut between qubits `j` and `j+1`.
///
/// The matrix is regrouped as `(row bits 1..j, col bits 1..j) x (row bits
/// j+1..n, col bits j+1..n)`; the singular values of that `4^j x 4^(n-j)`
/// matrix are normalized to unit l2 norm, which absorbs the `sqrt(N)`
/// prefactor of the decomposition.
pub fn operator_schmidt(u: &DenseOperator, j: usize) -> Result<SchmidtSpectrum> {
    let n = u.n;
    if j == 0 || j >= n {
        return Err(Error::Cut { j, n });
    }
    let b_bits = n - j;
    let a_dim = 1usize << j;
    let b_dim = 1usize << b_bits;
    let b_mask = b_dim - 1;
    let m = &u.matrix;
    let regrouped = Mat::<C64>::from_fn(a_dim * a_dim, b_dim * b_dim, |a, b| {
        let (ra, ca) = (a / a_dim, a % a_dim);
        let (rb, cb) = (b / b_dim, b & b_mask);
        m[[(ra << b_bits) | rb, (ca << b_bits) | cb]]
    });
    let sv = linalg::singular_values(regrouped.as_ref())?;
    SchmidtSpectrum::from_singular_values(n, j, sv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(n: usize) -> Array2<C64> {
        let dim = 1usize << n;
        let mut out = Array2::zeros((dim, dim));
        for q in 0..dim {
            for qp in 0..dim {
                let angle = TAU * ((q * qp) % dim) as f64 / dim as f64;
                out[[q, qp]] = C64::new(angle.cos(), angle.sin()) / (dim as f64).sqrt();
            }
        }
        out
    }

    #[test]
    fn unit_phase_quarter_turns_are_exact() {
        assert_eq!(unit_phase(0, 5), C64::new(1.0, 0.0));
        assert_eq!(unit_phase(8, 5), C64::new(0.0, 1.0));
        assert_eq!(unit_phase(16, 5), C64::new(-1.0, 0.0));
        assert_eq!(unit_phase(24, 5), C64::new(0.0, -1.0));
        assert_eq!(unit_phase(3, 1), C64::new(-1.0, 0.0));
        assert_eq!(unit_phase(7, 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn unit_phase_matches_direct_angle() {
        for bits in 2..20u32 {
            for m in (0..1u64 << bits).step_by(1 + (1usize << bits) / 97) {
                let angle = TAU * m as f64 / 2f64.powi(bits as i32);
                let want = C64::new(angle.cos(), angle.sin());
                let got = unit_phase(m, bits);
                assert!((got - want).norm() < 1e-15, "m={m} bits={bits}");
                let neg = unit_phase((1u64 << bits) - m, bits);
                assert_eq!(neg, got.conj());
            }
        }
        assert_eq!(unit_phase(1 << 40 | 5, 3), unit_phase(5, 3));
    }

    #[test]
    fn one_qubit_dft_is_hadamard() {
        let f = dft_matrix(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[h, h], [h, -h]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((f.get(r, c) - C64::new(expect[r][c], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_qubit_entry_is_i_over_two() {
        let f = dft_matrix(2).unwrap();
        assert!((f.get(1, 1) - C64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn three_qubit_dft_matches_double_loop() {
        let f = dft_matrix(3).unwrap();
        let oracle = naive_dft(3);
        for (a, b) in f.matrix().iter().zip(oracle.iter()) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn dft_is_unitary_up_to_ten_qubits() {
        for n in 1..=10 {
            let defect = dft_matrix(n).unwrap().unitarity_defect();
            assert!(defect <= 1e-12, "n={n} defect {defect}");
        }
    }

    #[test]
    fn dense_size_cap() {
        assert!(matches!(dft_matrix(0), Err(Error::TooSmall { .. })));
        assert!(matches!(dft_matrix(15), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn bit_reversal_examples() {
        let p = bit_reversal_permutation(3);
        assert_eq!(p[1], 4);
        assert_eq!(p[6], 3);
    }

    #[test]
    fn bit_reversal_is_an_involution() {
        for n in 1..=20 {
            let p = bit_reversal_permutation(n);
            assert!(p.iter().enumerate().all(|(x, &y)| p[y] == x), "n={n}");
        }
    }

    #[test]
    fn unit_phase_reduces_exactly() {
        let a = unit_phase(3, 4);
        let b = unit_phase(3 + (1 << 4) * 12345, 4);
        assert_eq!(a, b);
        assert!((unit_phase(1, 2) - C64::new(0.0, 1.0)).norm() < 1e-16);
    }

    #[test]
    fn product_operator_has_rank_one_spectrum() {
        // A (x) B with A on qubit 1 and B on qubits 2..3.
        let a = dft_matrix(1).unwrap();
        let b = dft_matrix(2).unwrap();
        let kron = ndarray::linalg::kron(a.matrix(), b.matrix());
        let u = DenseOperator::from_matrix(3, kron).unwrap();
        let s = operator_schmidt(&u, 1).unwrap();
        assert!((s.sigmas()[0] - 1.0).abs() < 1e-12);
        assert!(s.sigmas()[1..].iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn two_qubit_dft_spectrum_is_uniform() {
        let s = operator_schmidt(&dft_matrix(2).unwrap(), 1).unwrap();
        assert_eq!(s.len(), 4);
        for &x in s.sigmas() {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cut_out_of_range() {
        let f = dft_matrix(3).unwrap();
        assert!(matches!(operator_schmidt(&f, 0), Err(Error::Cut { .. })));
        assert!(matches!(operator_schmidt(&f, 3), Err(Error::Cut { .. })));
    }

    #[test]
    fn dft_spectra_are_uniform_at_every_cut() {
        for n in 2..=8 {
            let f = dft_matrix(n).unwrap();
            for j in 1..n {
                let s = operator_schmidt(&f, j).unwrap();
                let spread = s.sigmas()[0] - s.sigmas()[s.len() - 1];
                assert!(spread <= 1e-10, "n={n} j={j} spread {spread}");
                assert_eq!(s.len(), 1 << (2 * j.min(n - j)));
            }
        }
    }

    #[test]
    fn spectra_are_independent_of_qubit_order_convention() {
        // Conjugating by the bit reversal mirrors every cut.
        let n = 5;
        let u = crate::qft::build_qn_dense(n).unwrap();
        let p = DenseOperator::permutation(n, &bit_reversal_permutation(n)).unwrap();
        let mirrored = p.compose(&u).unwrap().compose(&p).unwrap();
        for j in 1..n {
            let a = operator_schmidt(&u, j).unwrap();
            let b = operator_schmidt(&mirrored, n - j).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-10, "j={j}");
        }
    }
}
