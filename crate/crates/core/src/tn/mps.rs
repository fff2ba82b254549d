use ndarray::{Array2, Array3};
use rand::Rng;

use super::chain::{Canonical, Chain, TruncationPolicy};
use super::TensorChain;
use crate::error::{Error, Result};
use crate::fft::log2_len;
use crate::linalg::{self, Svd, C64};

/// Largest register [`mps_to_vector`] will expand.
pub const MAX_DECODE_QUBITS: usize = 26;

/// Matrix product state over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Mps(Chain);

impl TensorChain for Mps {
    fn chain(&self) -> &Chain {
        &self.0
    }

    fn into_chain(self) -> Chain {
        self.0
    }

    fn wrap(chain: Chain) -> Self {
        Mps(chain)
    }
}

impl Mps {
    /// Site tensors `(left, 2, right)`.
    pub fn from_tensors(tensors: Vec<Array3<C64>>) -> Result<Self> {
        Ok(Mps(Chain::new(tensors, 2)?))
    }

    /// Bond-dimension-1 state `f_1 (x) f_2 (x) ... (x) f_n`.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let tensors = factors
            .iter()
            .map(|f| Array3::from_shape_vec((1, 2, 1), f.to_vec()).expect("2 entries"))
            .collect();
        Self::from_tensors(tensors)
    }

    /// Computational basis state `|index>` on `n` qubits.
    pub fn basis_state(n: usize, index: u128) -> Result<Self> {
        if n < 128 && index >> n != 0 {
            return Err(Error::Domain(format!("index {index} does not fit in {n} qubits")));
        }
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let factors: Vec<[C64; 2]> = (0..n)
            .map(|i| {
                if (index >> (n - 1 - i)) & 1 == 1 {
                    [zero, one]
                } else {
                    [one, zero]
                }
            })
            .collect();
        Self::product(&factors)
    }

    /// Random state with interior bonds `min(chi, 2^j, 2^(n-j))`, normalized.
    pub fn random<R: Rng + ?Sized>(n: usize, chi: usize, rng: &mut R) -> Result<Self> {
        let bonds: Vec<usize> = (0..=n)
            .map(|j| {
                let limit = if j.min(n - j) >= usize::BITS as usize - 1 {
                    usize::MAX
                } else {
                    1usize << j.min(n - j)
                };
                chi.max(1).min(limit)
            })
            .collect();
        let tensors = (0..n)
            .map(|i| {
                Array3::from_shape_fn((bonds[i], 2, bonds[i + 1]), |_| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let m = Self::from_tensors(tensors)?;
        let norm = m.norm();
        Ok(m.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn tensors(&self) -> &[Array3<C64>] {
        self.0.tensors()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Multiplies the state by `c`, applied at the orthogonality center when
    /// there is one so the gauge flag stays valid.
    pub fn scaled(&self, c: C64) -> Self {
        let mut chain = self.0.clone();
        let n = chain.len();
        let (site, flag) = match chain.canonical() {
            Canonical::Mixed(k) => (k, Canonical::Mixed(k)),
            Canonical::LeftUpTo(k) if k < n => (k, Canonical::LeftUpTo(k)),
            Canonical::LeftUpTo(_) => (n - 1, Canonical::LeftUpTo(n - 1)),
            Canonical::RightUpTo(0) => (0, Canonical::RightUpTo(1)),
            Canonical::RightUpTo(k) => (k - 1, Canonical::RightUpTo(k)),
            Canonical::None => (0, Canonical::None),
        };
        chain.scale_site(site, c);
        chain.set_canonical(flag);
        Mps(chain)
    }

    pub fn normalized(&self) -> Self {
        self.scaled(C64::new(1.0 / self.norm(), 0.0))
    }
}

/// Left-to-right reshape/SVD sweep; site 0 carries the most significant bit.
///
/// The policy cutoff is a budget for the whole decomposition: each of the
/// `n - 1` bonds gets `cutoff / sqrt(n - 1)`, so the relative error of the
/// result stays within `cutoff`.
pub fn vector_to_mps(v: &[C64], policy: &TruncationPolicy) -> Result<Mps> {
    let n = log2_len(v.len())?;
    if n == 0 {
        return Err(Error::TooSmall {
            what: "vector_to_mps",
            got: 0,
            min: 1,
        });
    }
    let per_bond = if n > 1 {
        TruncationPolicy::new(policy.cutoff() / ((n - 1) as f64).sqrt(), policy.max_chi())?
    } else {
        *policy
    };
    let mut tensors = Vec::with_capacity(n);
    let mut rest = Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("length matches");
    for _ in 0..n - 1 {
        let (r, cols) = rest.dim();
        let m = rest
            .into_shape_with_order((r * 2, cols / 2))
            .expect("row-major reshape");
        let dec = linalg::svd(m.view())?;
        let t = per_bond.choose(&dec.s);
        let Svd { u, s, mut vt } = dec.truncated(t.kept);
        let k = s.len();
        tensors.push(u.into_shape_with_order((r, 2, k)).expect("shape"));
        for (mut row, &sv) in vt.rows_mut().into_iter().zip(&s) {
            row.mapv_inplace(|z| z * sv);
        }
        rest = vt;
    }
    let r = rest.nrows();
    tensors.push(rest.into_shape_with_order((r, 2, 1)).expect("shape"));
    let chain = Chain::from_parts(tensors, 2, Canonical::Mixed(n - 1));
    Ok(Mps(chain))
}

/// Full contraction to a dense vector.
pub fn mps_to_vector(m: &Mps) -> Result<Vec<C64>> {
    let n = m.n();
    if n > MAX_DECODE_QUBITS {
        return Err(Error::TooLarge {
            what: "mps_to_vector",
            got: n,
            max: MAX_DECODE_QUBITS,
        });
    }
    let mut acc = Array2::<C64>::from_elem((1, 1), C64::new(1.0, 0.0));
    for t in m.tensors() {
        let (l, d, r) = t.dim();
        let rows = acc.nrows();
        let site = t.view().into_shape_with_order((l, d * r)).expect("standard layout");
        acc = acc
            .dot(&site)
            .into_shape_with_order((rows * d, r))
            .expect("row-major reshape");
    }
    Ok(acc.into_iter().collect())
}

/// The bit-reversed state: site order reversed, bond legs swapped.
pub fn reverse_sites(m: &Mps) -> Mps {
    Mps(m.0.reversed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::bit_reversal_permutation;
    use crate::tn::{all_schmidt_spectra, canonicalize, distance, schmidt_spectrum_at, Direction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vector(len: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        (0..len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_vector_has_unit_bonds() {
        let a = [c(0.6, 0.0), c(0.0, 0.8)];
        let b = [c(1.0, 0.0), c(0.0, 0.0)];
        let cc = [c(0.5f64.sqrt(), 0.0), c(-(0.5f64.sqrt()), 0.0)];
        let mut v = Vec::new();
        for x in a {
            for y in b {
                for z in cc {
                    v.push(x * y * z);
                }
            }
        }
        let m = vector_to_mps(&v, &TruncationPolicy::new(1e-14, None).unwrap()).unwrap();
        assert_eq!(m.bond_dims(), vec![1, 1, 1, 1]);
        assert!(rel_err(&mps_to_vector(&m).unwrap(), &v) < 1e-14);
    }

    #[test]
    fn delta_vector_has_unit_bonds() {
        let mut v = vec![c(0.0, 0.0); 64];
        v[37] = c(1.0, 0.0);
        let m = vector_to_mps(&v, &TruncationPolicy::exact()).unwrap();
        assert!(m.bond_dims().iter().all(|&d| d == 1));
        assert_eq!(mps_to_vector(&m).unwrap(), v);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_vector(256, &mut rng);
        let m = vector_to_mps(&v, &TruncationPolicy::exact()).unwrap();
        assert!(rel_err(&mps_to_vector(&m).unwrap(), &v) <= 1e-12);
        for _ in 0..50 {
            let v = random_vector(256, &mut rng);
            let m = vector_to_mps(&v, &TruncationPolicy::exact()).unwrap();
            assert!(rel_err(&mps_to_vector(&m).unwrap(), &v) <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let v = vec![c(1.0, 0.0); 12];
        assert!(matches!(
            vector_to_mps(&v, &TruncationPolicy::exact()),
            Err(Error::NotPowerOfTwo(12))
        ));
    }

    #[test]
    fn zero_state_decodes_to_delta() {
        let m = Mps::basis_state(5, 0).unwrap();
        let v = mps_to_vector(&m).unwrap();
        assert_eq!(v[0], c(1.0, 0.0));
        assert!(v[1..].iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn decode_ceiling() {
        let m = Mps::basis_state(27, 0).unwrap();
        assert!(matches!(mps_to_vector(&m), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn reversal_of_product_state() {
        let m = Mps::basis_state(3, 0b110).unwrap();
        let r = reverse_sites(&m);
        let v = mps_to_vector(&r).unwrap();
        assert_eq!(v[0b011], c(1.0, 0.0));
        assert_eq!(reverse_sites(&r), m);
    }

    #[test]
    fn reversal_matches_dense_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = Mps::random(8, 4, &mut rng).unwrap();
        let v = mps_to_vector(&m).unwrap();
        let rv = mps_to_vector(&reverse_sites(&m)).unwrap();
        let perm = bit_reversal_permutation(8);
        for (x, &y) in perm.iter().enumerate() {
            assert!((rv[y] - v[x]).norm() < 1e-15);
        }
    }

    #[test]
    fn reversal_mirrors_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = Mps::random(7, 6, &mut rng).unwrap();
        let r = reverse_sites(&m);
        let a = all_schmidt_spectra(&m).unwrap();
        let b = all_schmidt_spectra(&r).unwrap();
        for j in 1..7 {
            assert!(a[j - 1].max_abs_diff(&b[7 - j - 1]) <= 1e-12);
        }
    }

    #[test]
    fn ghz_spectrum() {
        let n = 6;
        let mut v = vec![c(0.0, 0.0); 1 << n];
        v[0] = c(0.5f64.sqrt(), 0.0);
        v[(1 << n) - 1] = c(0.5f64.sqrt(), 0.0);
        let m = vector_to_mps(&v, &TruncationPolicy::new(1e-14, None).unwrap()).unwrap();
        for j in 1..n {
            let s = schmidt_spectrum_at(&m, j).unwrap();
            assert_eq!(s.len(), 2);
            for &x in s.sigmas() {
                assert!((x - 0.5f64.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn product_spectrum_is_trivial() {
        let m = Mps::basis_state(5, 9).unwrap();
        for j in 1..5 {
            assert_eq!(schmidt_spectrum_at(&m, j).unwrap().sigmas(), &[1.0]);
        }
    }

    #[test]
    fn canonicalize_installs_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Mps::random(6, 4, &mut rng).unwrap();
        let v = mps_to_vector(&m).unwrap();
        for dir in [Direction::Left, Direction::Right] {
            let c = canonicalize(&m, dir);
            assert!(c.chain().canonical_defect() <= 1e-10, "{dir:?}");
            assert!(rel_err(&mps_to_vector(&c).unwrap(), &v) <= 1e-12);
            // canonicalizing again leaves the state alone
            let cc = canonicalize(&c, dir);
            assert!(rel_err(&mps_to_vector(&cc).unwrap(), &v) <= 1e-12);
        }
    }

    #[test]
    fn distance_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [1usize, 2, 5, 7] {
            let a = Mps::random(n, 3, &mut rng).unwrap();
            let b = Mps::random(n, 2, &mut rng).unwrap();
            let (va, vb) = (mps_to_vector(&a).unwrap(), mps_to_vector(&b).unwrap());
            let want: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            assert!((distance(&a, &b).unwrap() - want).abs() < 1e-13);
            assert!(distance(&a, &a).unwrap() < 1e-14);
        }
        let a = Mps::random(3, 2, &mut rng).unwrap();
        let b = Mps::random(4, 2, &mut rng).unwrap();
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn distance_resolves_tiny_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let a = Mps::random(10, 4, &mut rng).unwrap();
        let mut t = a.tensors().to_vec();
        t[4][[0, 1, 0]] += C64::new(1e-12, 0.0);
        let b = Mps::from_tensors(t).unwrap();
        let (va, vb) = (mps_to_vector(&a).unwrap(), mps_to_vector(&b).unwrap());
        let want: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let got = distance(&a, &b).unwrap();
        assert!((got - want).abs() < 1e-3 * want, "got {got:e} want {want:e}");
    }
}
