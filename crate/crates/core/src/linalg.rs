//! Thin wrappers over `faer` decompositions, operating on `ndarray` storage.

use faer::{Mat, MatRef};
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Thin singular value decomposition `m = u * diag(s) * vt`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Array2<C64>,
    /// Non-negative, non-increasing.
    pub s: Vec<f64>,
    /// Right singular vectors, already conjugate-transposed.
    pub vt: Array2<C64>,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Array2<C64> {
        let mut us = self.u.clone();
        for (mut col, &s) in us.columns_mut().into_iter().zip(&self.s) {
            col.mapv_inplace(|z| z * s);
        }
        us.dot(&self.vt)
    }

    /// Keeps the leading `r` triplets.
    pub fn truncated(mut self, r: usize) -> Self {
        let r = r.min(self.s.len());
        self.s.truncate(r);
        self.u = self.u.slice(ndarray::s![.., ..r]).to_owned();
        self.vt = self.vt.slice(ndarray::s![..r, ..]).to_owned();
        self
    }
}

pub(crate) fn to_faer(m: ArrayView2<'_, C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

pub(crate) fn from_faer(m: MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn check_finite(m: ArrayView2<'_, C64>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("matrix has non-finite entries".into()))
    }
}

/// Thin SVD of a complex matrix.
pub fn svd(m: ArrayView2<'_, C64>) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: Array2::zeros((rows, 0)),
            s: Vec::new(),
            vt: Array2::zeros((0, cols)),
        });
    }
    let fm = to_faer(m);
    let dec = fm.thin_svd().map_err(|_| Error::NoConvergence {
        routine: "svd",
        rows,
        cols,
    })?;
    let s = dec.S().column_vector().iter().map(|z| z.re.max(0.0)).collect();
    let u = from_faer(dec.U());
    let v = dec.V();
    let vt = Array2::from_shape_fn((v.ncols(), v.nrows()), |(i, j)| v[(j, i)].conj());
    Ok(Svd { u, s, vt })
}

/// Singular values only, descending.
///
/// Non-square matrices are first reduced by a QR factorization of the tall
/// orientation; the square `R` factor has the same singular values.
pub fn singular_values(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let no_conv = |_| Error::NoConvergence {
        routine: "singular values",
        rows,
        cols,
    };
    // Non-square inputs are first reduced by a column-pivoted QR of the tall
    // orientation. Pivoting keeps the absolute error in the small singular
    // values near machine precision, where an unpivoted reduction of very
    // tall matrices loses one to two digits.
    let mut s = if rows != cols {
        let tall = if rows > cols {
            m.to_owned()
        } else {
            m.adjoint().to_owned()
        };
        let r = tall.col_piv_qr().thin_R().to_owned();
        r.singular_values().map_err(no_conv)?
    } else {
        m.singular_values().map_err(no_conv)?
    };
    for x in &mut s {
        *x = x.max(0.0);
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Thin QR: `m = q * r` with `q` having orthonormal columns.
pub(crate) fn qr(m: ArrayView2<'_, C64>) -> (Array2<C64>, Array2<C64>) {
    let fm = to_faer(m);
    let dec = fm.qr();
    (from_faer(dec.compute_thin_Q().as_ref()), from_faer(dec.thin_R()))
}

pub(crate) fn frobenius(m: ArrayView2<'_, C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let id = Array2::<C64>::eye(4);
        let dec = svd(id.view()).unwrap();
        for s in dec.s {
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_singular_values_are_sorted() {
        let mut m = Array2::<C64>::zeros((3, 3));
        m[[0, 0]] = C64::new(1.0, 0.0);
        m[[1, 1]] = C64::new(0.0, 3.0);
        m[[2, 2]] = C64::new(2.0, 0.0);
        let dec = svd(m.view()).unwrap();
        let expect = [3.0, 2.0, 1.0];
        for (s, e) in dec.s.iter().zip(expect) {
            assert!((s - e).abs() < 1e-14);
        }
    }

    #[test]
    fn random_rectangular_round_trip() {
        let m = random_matrix(8, 5, 7);
        let dec = svd(m.view()).unwrap();
        let back = dec.reconstruct();
        let err = frobenius((&back - &m).view()) / frobenius(m.view());
        assert!(err <= 1e-11, "reconstruction error {err}");
        assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(dec.s.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 1]] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd(m.view()), Err(Error::Domain(_))));
    }

    #[test]
    fn qr_reduced_singular_values_match_direct() {
        for &(r, c) in &[(40, 6), (6, 40), (9, 7), (12, 12)] {
            let m = random_matrix(r, c, (r * 100 + c) as u64);
            let direct = svd(m.view()).unwrap().s;
            let reduced = singular_values(to_faer(m.view()).as_ref()).unwrap();
            for (a, b) in direct.iter().zip(&reduced) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_factors_reconstruct() {
        let m = random_matrix(9, 4, 3);
        let (q, r) = qr(m.view());
        let back = q.dot(&r);
        assert!(frobenius((&back - &m).view()) < 1e-12);
        let qq = q.t().mapv(|z| z.conj()).dot(&q);
        assert!(frobenius((&qq - &Array2::<C64>::eye(4)).view()) < 1e-12);
    }
}
