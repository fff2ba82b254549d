//! Radix-2 iterative FFT baseline.
//!
//! Uses the same conventions as [`crate::dense::dft_matrix`]: `+i` exponent
//! and `1/sqrt(N)` normalization, so its output is directly comparable with
//! the tensor-network transform.

use crate::dense::{bit_reversal_permutation, unit_phase};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Precomputed twiddles and bit-reversal table for one transform size.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<C64>,
    reversal: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        let half = (1usize << n) / 2;
        let twiddles = (0..half as u64).map(|k| unit_phase(k, n as u32)).collect();
        Self {
            n,
            twiddles,
            reversal: bit_reversal_permutation(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn process(&self, data: &mut [C64]) -> Result<()> {
        let len = self.len();
        if data.len() != len {
            return Err(Error::Validation(format!(
                "buffer length {} does not match plan length {len}",
                data.len()
            )));
        }
        for (i, &r) in self.reversal.iter().enumerate() {
            if i < r {
                data.swap(i, r);
            }
        }
        let mut size = 2;
        while size <= len {
            let half = size / 2;
            let stride = len / size;
            for block in data.chunks_exact_mut(size) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = self.twiddles[k * stride] * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            size *= 2;
        }
        let scale = 1.0 / (len as f64).sqrt();
        data.iter_mut().for_each(|z| *z *= scale);
        Ok(())
    }
}

/// Power-of-two transform length as a qubit count.
pub fn log2_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

pub fn fft(v: &[C64]) -> Result<Vec<C64>> {
    let n = log2_len(v.len())?;
    let mut out = v.to_vec();
    FftPlan::new(n).process(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dft_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn delta_maps_to_uniform() {
        let v = [1.0, 0.0, 0.0, 0.0].map(|x| C64::new(x, 0.0));
        let out = fft(&v).unwrap();
        for z in out {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn uniform_maps_to_delta() {
        let v = [C64::new(0.5, 0.0); 4];
        let out = fft(&v).unwrap();
        assert!((out[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(out[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn plane_wave_maps_to_mirrored_delta() {
        let n = 6;
        let len = 1usize << n;
        for k in [1usize, 5, 17] {
            let v: Vec<C64> = (0..len)
                .map(|x| unit_phase((k * x) as u64, n as u32) / (len as f64).sqrt())
                .collect();
            let out = fft(&v).unwrap();
            let peak = (len - k) % len;
            for (i, z) in out.iter().enumerate() {
                let want = if i == peak { 1.0 } else { 0.0 };
                assert!((z - C64::new(want, 0.0)).norm() < 1e-13, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(fft(&[C64::default(); 6]), Err(Error::NotPowerOfTwo(6))));
        assert!(matches!(fft(&[]), Err(Error::NotPowerOfTwo(0))));
    }

    #[test]
    fn agrees_with_dense_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=12 {
            let f = dft_matrix(n).unwrap();
            for _ in 0..100 {
                let v: Vec<C64> = (0..1usize << n)
                    .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let want = f.apply(&v).unwrap();
                let got = fft(&v).unwrap();
                let err = rel_err(&got, &want);
                assert!(err <= 1e-12, "n={n} err {err}");
            }
        }
    }
}
