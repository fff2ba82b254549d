//! Zip-up application of an MPO to an MPS or to another MPO.
//!
//! The left-to-right pass contracts one site pair at a time into a running
//! carry and splits it by SVD, truncating with a relaxed policy since the
//! carry is not in canonical gauge. The emitted left factors are isometries,
//! so the right-to-left return pass sees a proper mixed-canonical chain and
//! enforces the requested policy optimally at every bond.

use ndarray::{Array2, Array3};

use super::chain::{Canonical, Chain, Truncation, TruncationPolicy};
use super::mpo::Mpo;
use super::mps::Mps;
use super::TensorChain;
use crate::error::{Error, Result};
use crate::linalg::{self, Svd, C64};

/// Knobs for the left-to-right pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZipupOptions {
    /// The sweep uses `cutoff / cutoff_relax`.
    pub cutoff_relax: f64,
    /// The sweep caps ranks at `max_chi * chi_relax`.
    pub chi_relax: usize,
}

impl Default for ZipupOptions {
    fn default() -> Self {
        Self {
            cutoff_relax: 10.0,
            chi_relax: 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZipupReport {
    /// Relative weights discarded by the left-to-right pass, one per split.
    pub sweep_discarded: Vec<f64>,
    /// Relative weights discarded by the canonical return pass, per cut.
    pub final_discarded: Vec<f64>,
    /// Largest bond dimension seen during the left-to-right pass.
    pub peak_bond: usize,
    /// Norm of the product after the left-to-right pass. The emitted sites
    /// are isometries there, so this is exact rather than estimated.
    pub sweep_norm: f64,
}

impl ZipupReport {
    pub fn total_discarded(&self) -> f64 {
        self.sweep_discarded.iter().chain(&self.final_discarded).sum()
    }

    /// Bound on `1 - |out|^2 / |in|^2` when the operator is an isometry: the
    /// measured loss of the first pass plus the canonical-pass weights, which
    /// are exact fractions of the norm there. The first-pass weights are
    /// relative to a non-canonical carry and do not account for norm.
    pub fn accounted_deficit(&self, input_norm: f64) -> f64 {
        let kept = (self.sweep_norm / input_norm).powi(2);
        (1.0 - kept).max(0.0) + self.final_discarded.iter().sum::<f64>()
    }
}

/// `op * state` for an MPS.
pub fn apply_mpo_zipup(o: &Mpo, m: &Mps, policy: &TruncationPolicy) -> Result<Mps> {
    Ok(apply_mpo_zipup_with(o, m, policy, &ZipupOptions::default())?.0)
}

pub fn apply_mpo_zipup_with(
    o: &Mpo,
    m: &Mps,
    policy: &TruncationPolicy,
    opts: &ZipupOptions,
) -> Result<(Mps, ZipupReport)> {
    let (chain, report) = zip(o.chain(), m.chain(), policy, opts)?;
    Ok((Mps::wrap(chain), report))
}

/// `top * bottom` for two MPOs (`bottom` acts first).
pub fn mpo_product_zipup(
    top: &Mpo,
    bottom: &Mpo,
    policy: &TruncationPolicy,
    opts: &ZipupOptions,
) -> Result<(Mpo, ZipupReport)> {
    let (chain, report) = zip(top.chain(), bottom.chain(), policy, opts)?;
    Ok((Mpo::wrap(chain), report))
}

fn zip(
    op: &Chain,
    state: &Chain,
    policy: &TruncationPolicy,
    opts: &ZipupOptions,
) -> Result<(Chain, ZipupReport)> {
    let n = op.len();
    if state.len() != n {
        return Err(Error::SiteMismatch {
            operator: n,
            state: state.len(),
        });
    }
    debug_assert_eq!(op.phys(), 4);
    // State physical index is (contracted m, passive p).
    let p = state.phys() / 2;
    let sweep = policy.relaxed(opts.cutoff_relax, opts.chi_relax);
    let mut report = ZipupReport {
        peak_bond: 1,
        ..Default::default()
    };

    let mut carry = Array2::<C64>::from_elem((1, 1), C64::new(1.0, 0.0));
    let mut out: Vec<Array3<C64>> = Vec::with_capacity(n);
    for i in 0..n {
        let w = op.site(i);
        let s = state.site(i);
        let (dl, _, dr) = w.dim();
        let (sl, _, sr) = s.dim();
        let r = carry.nrows();

        // x[r, a, m, p, beta] = sum_alpha carry[r, (a, alpha)] s[alpha, (m, p, beta)]
        let c2 = carry
            .into_shape_with_order((r * dl, sl))
            .expect("carry columns are (op bond, state bond)");
        let s2 = s.view().into_shape_with_order((sl, 2 * p * sr)).expect("standard layout");
        let x = c2.dot(&s2);
        let x = x
            .into_shape_with_order((r, dl, 2, p, sr))
            .expect("shape")
            .permuted_axes([0, 3, 4, 1, 2])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((r * p * sr, dl * 2))
            .expect("shape");
        // w as (a, m) x (o, b)
        let wm = w
            .view()
            .into_shape_with_order((dl, 2, 2, dr))
            .expect("standard layout")
            .permuted_axes([0, 2, 1, 3])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((dl * 2, 2 * dr))
            .expect("shape");
        // y[r, p, beta, o, b] -> t[(r, o, p), (b, beta)]
        let y = x.dot(&wm);
        let t = y
            .into_shape_with_order((r, p, sr, 2, dr))
            .expect("shape")
            .permuted_axes([0, 3, 1, 4, 2])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((r * 2 * p, dr * sr))
            .expect("shape");

        if i + 1 == n {
            out.push(t.into_shape_with_order((r, 2 * p, 1)).expect("boundary bond"));
            break;
        }
        let dec = linalg::svd(t.view())?;
        let trunc = sweep.choose(&dec.s);
        report.sweep_discarded.push(trunc.discarded_weight);
        let Svd { u, s: sv, mut vt } = dec.truncated(trunc.kept);
        let k = sv.len();
        report.peak_bond = report.peak_bond.max(k);
        out.push(u.into_shape_with_order((r, 2 * p, k)).expect("shape"));
        for (mut row, &x) in vt.rows_mut().into_iter().zip(&sv) {
            row.mapv_inplace(|z| z * x);
        }
        carry = vt;
    }

    report.sweep_norm = out[n - 1].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut chain = Chain::from_parts(out, 2 * p, Canonical::LeftUpTo(n - 1));
    let final_pass: Vec<Truncation> = chain.sweep_truncate_leftward(policy)?;
    report.final_discarded = final_pass.iter().map(|t| t.discarded_weight).collect();
    Ok((chain, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseOperator;
    use crate::tn::{mpo_to_dense, mps_to_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mpo(n: usize, chi: usize, rng: &mut ChaCha8Rng) -> Mpo {
        let tensors = (0..n)
            .map(|i| {
                let l = if i == 0 { 1 } else { chi };
                let r = if i + 1 == n { 1 } else { chi };
                ndarray::Array4::from_shape_fn((l, 2, 2, r), |_| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        Mpo::from_tensors(tensors).unwrap()
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn identity_leaves_state_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Mps::random(7, 5, &mut rng).unwrap();
        let id = Mpo::identity(7).unwrap();
        let out = apply_mpo_zipup(&id, &m, &TruncationPolicy::exact()).unwrap();
        let err = rel_err(&mps_to_vector(&out).unwrap(), &mps_to_vector(&m).unwrap());
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn exact_application_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=7 {
            let o = random_mpo(n, 3, &mut rng);
            let m = Mps::random(n, 4, &mut rng).unwrap();
            let out = apply_mpo_zipup(&o, &m, &TruncationPolicy::exact()).unwrap();
            let want = mpo_to_dense(&o).unwrap().apply(&mps_to_vector(&m).unwrap()).unwrap();
            let err = rel_err(&mps_to_vector(&out).unwrap(), &want);
            assert!(err <= 1e-11, "n={n} err {err}");
        }
    }

    #[test]
    fn exact_product_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 5;
        let a = random_mpo(n, 2, &mut rng);
        let b = random_mpo(n, 3, &mut rng);
        let (ab, _) =
            mpo_product_zipup(&a, &b, &TruncationPolicy::exact(), &ZipupOptions::default()).unwrap();
        let want = mpo_to_dense(&a).unwrap().compose(&mpo_to_dense(&b).unwrap()).unwrap();
        let got: DenseOperator = mpo_to_dense(&ab).unwrap();
        assert!(got.frobenius_distance(&want) / want.frobenius_norm() <= 1e-12);
    }

    #[test]
    fn site_mismatch() {
        let o = Mpo::identity(4).unwrap();
        let m = Mps::basis_state(5, 0).unwrap();
        assert!(matches!(
            apply_mpo_zipup(&o, &m, &TruncationPolicy::exact()),
            Err(Error::SiteMismatch { operator: 4, state: 5 })
        ));
    }

    #[test]
    fn result_is_right_canonical_from_site_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let o = random_mpo(6, 2, &mut rng);
        let m = Mps::random(6, 3, &mut rng).unwrap();
        let out = apply_mpo_zipup(&o, &m, &TruncationPolicy::exact()).unwrap();
        assert_eq!(out.canonical(), Canonical::Mixed(0));
        assert!(out.chain().canonical_defect() <= 1e-10);
    }

    #[test]
    fn capped_application_respects_max_chi() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let o = random_mpo(8, 4, &mut rng);
        let m = Mps::random(8, 4, &mut rng).unwrap();
        let policy = TruncationPolicy::new(0.0, Some(5)).unwrap();
        let out = apply_mpo_zipup(&o, &m, &policy).unwrap();
        assert!(out.max_bond() <= 5);
    }
}
