use ndarray::{s, Array2, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{self, Svd, C64};
use crate::spectrum::SchmidtSpectrum;

/// Singular values closer than this (relative to the largest) count as a tie.
const TIE_TOLERANCE: f64 = 1e-14;

/// Which isometry conditions a chain is known to satisfy.
///
/// The flag is a claim maintained by the operations in this module; any
/// operation that produces new tensors without re-establishing a gauge resets
/// it to `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Canonical {
    #[default]
    None,
    /// Sites `0..c` are left isometries.
    LeftUpTo(usize),
    /// Sites `c..n` are right isometries.
    RightUpTo(usize),
    /// Sites `0..c` are left and `c+1..n` right isometries; `c` is the center.
    Mixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Rank-selection rule for every SVD split.
///
/// `cutoff` bounds the discarded squared weight relative to the total squared
/// weight by `cutoff^2`, i.e. it is the relative Frobenius error allowed per
/// bond. `max_chi` caps the kept rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    cutoff: f64,
    max_chi: Option<usize>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

impl TruncationPolicy {
    pub fn new(cutoff: f64, max_chi: Option<usize>) -> Result<Self> {
        if !(0.0..1.0).contains(&cutoff) {
            return Err(Error::Domain(format!("cutoff {cutoff} outside [0, 1)")));
        }
        if max_chi == Some(0) {
            return Err(Error::Domain("max_chi must be at least 1".into()));
        }
        Ok(Self { cutoff, max_chi })
    }

    /// Drops only exactly-zero singular values.
    pub fn exact() -> Self {
        Self {
            cutoff: 0.0,
            max_chi: None,
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn max_chi(&self) -> Option<usize> {
        self.max_chi
    }

    /// Looser policy: cutoff divided by `cutoff_factor`, cap multiplied by
    /// `chi_factor`.
    pub fn relaxed(&self, cutoff_factor: f64, chi_factor: usize) -> Self {
        Self {
            cutoff: self.cutoff / cutoff_factor,
            max_chi: self.max_chi.map(|c| c.saturating_mul(chi_factor.max(1))),
        }
    }

    /// Rank to keep for descending singular values `s`.
    pub fn choose(&self, s: &[f64]) -> Truncation {
        if s.is_empty() {
            return Truncation {
                kept: 0,
                discarded_weight: 0.0,
            };
        }
        // tail[r] = sum_{k >= r} s_k^2
        let mut tail = vec![0.0; s.len() + 1];
        for k in (0..s.len()).rev() {
            tail[k] = tail[k + 1] + s[k] * s[k];
        }
        let total = tail[0];
        if total == 0.0 {
            return Truncation {
                kept: 1,
                discarded_weight: 0.0,
            };
        }
        let budget = self.cutoff * self.cutoff * total;
        let mut r = (1..=s.len()).find(|&r| tail[r] <= budget).unwrap_or(s.len());
        let tie = TIE_TOLERANCE * s[0];
        while r < s.len() && s[r] > 0.0 && s[r - 1] - s[r] <= tie {
            r += 1;
        }
        if let Some(cap) = self.max_chi {
            r = r.min(cap);
        }
        Truncation {
            kept: r,
            discarded_weight: tail[r] / total,
        }
    }
}

/// Outcome of one bond truncation. `discarded_weight` is relative to the
/// squared norm of the object at the time of truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub kept: usize,
    pub discarded_weight: f64,
}

/// Open-boundary chain of rank-3 site tensors `(left, phys, right)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    tensors: Vec<Array3<C64>>,
    phys: usize,
    canonical: Canonical,
}

fn left_matrix(t: &Array3<C64>) -> ArrayView2<'_, C64> {
    let (l, d, r) = t.dim();
    t.view().into_shape_with_order((l * d, r)).expect("standard layout")
}

fn right_matrix(t: &Array3<C64>) -> ArrayView2<'_, C64> {
    let (l, d, r) = t.dim();
    t.view().into_shape_with_order((l, d * r)).expect("standard layout")
}

fn to_site(m: Array2<C64>, l: usize, d: usize, r: usize) -> Array3<C64> {
    m.as_standard_layout()
        .into_owned()
        .into_shape_with_order((l, d, r))
        .expect("shape matches")
}

impl Chain {
    pub fn new(tensors: Vec<Array3<C64>>, phys: usize) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::TooSmall {
                what: "chain",
                got: 0,
                min: 1,
            });
        }
        let n = tensors.len();
        for (i, t) in tensors.iter().enumerate() {
            let (l, d, r) = t.dim();
            if d != phys {
                return Err(Error::Validation(format!(
                    "site {i} has physical dimension {d}, expected {phys}"
                )));
            }
            if i == 0 && l != 1 {
                return Err(Error::Validation("left boundary bond must be 1".into()));
            }
            if i == n - 1 && r != 1 {
                return Err(Error::Validation("right boundary bond must be 1".into()));
            }
            if i + 1 < n && tensors[i + 1].dim().0 != r {
                return Err(Error::Validation(format!(
                    "bond mismatch between sites {i} and {}",
                    i + 1
                )));
            }
        }
        let tensors = tensors
            .into_iter()
            .map(|t| t.as_standard_layout().into_owned())
            .collect();
        Ok(Self {
            tensors,
            phys,
            canonical: Canonical::None,
        })
    }

    pub(crate) fn from_parts(tensors: Vec<Array3<C64>>, phys: usize, canonical: Canonical) -> Self {
        Self {
            tensors,
            phys,
            canonical,
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn tensors(&self) -> &[Array3<C64>] {
        &self.tensors
    }

    pub fn site(&self, i: usize) -> &Array3<C64> {
        &self.tensors[i]
    }

    pub fn canonical(&self) -> Canonical {
        self.canonical
    }

    pub(crate) fn set_canonical(&mut self, c: Canonical) {
        self.canonical = c;
    }

    /// `n + 1` bond dimensions including the two boundary bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.len() + 1);
        dims.push(self.tensors[0].dim().0);
        dims.extend(self.tensors.iter().map(|t| t.dim().2));
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Multiplies site `i` by `scale`, invalidating nothing but norms.
    pub(crate) fn scale_site(&mut self, i: usize, scale: C64) {
        self.tensors[i].mapv_inplace(|z| z * scale);
    }

    /// Squared Frobenius norm by transfer-matrix contraction.
    pub fn norm_sqr(&self) -> f64 {
        let mut env = Array2::<C64>::from_elem((1, 1), C64::new(1.0, 0.0));
        for t in &self.tensors {
            let (l, d, r) = t.dim();
            let mut next = Array2::<C64>::zeros((r, r));
            // next[b, b'] = sum conj(t[a, s, b]) env[a, a'] t[a', s, b']
            let et = env.dot(&right_matrix(t)); // (l, d*r)
            let et = et.into_shape_with_order((l, d, r)).unwrap();
            for s in 0..d {
                let conj = t.slice(s![.., s, ..]).mapv(|z| z.conj());
                next = next + conj.t().dot(&et.slice(s![.., s, ..]));
            }
            env = next;
        }
        env[[0, 0]].re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().max(0.0).sqrt()
    }

    fn left_orthogonalize_site(&mut self, i: usize) {
        let (l, d, _) = self.tensors[i].dim();
        let (q, r) = linalg::qr(left_matrix(&self.tensors[i]));
        let k = q.ncols();
        self.tensors[i] = to_site(q, l, d, k);
        let next = &self.tensors[i + 1];
        let (_, dn, rn) = next.dim();
        let merged = r.dot(&right_matrix(next));
        self.tensors[i + 1] = to_site(merged, k, dn, rn);
    }

    fn right_orthogonalize_site(&mut self, i: usize) {
        let (_, d, r) = self.tensors[i].dim();
        // A = R^dagger Q^dagger from the QR of A^dagger.
        let adj = right_matrix(&self.tensors[i]).t().mapv(|z| z.conj());
        let (q, rr) = linalg::qr(adj.view());
        let k = q.ncols();
        self.tensors[i] = to_site(q.t().mapv(|z| z.conj()), k, d, r);
        let prev = &self.tensors[i - 1];
        let (lp, dp, _) = prev.dim();
        let merged = left_matrix(prev).dot(&rr.t().mapv(|z| z.conj()));
        self.tensors[i - 1] = to_site(merged, lp, dp, k);
    }

    pub fn canonicalize(&mut self, direction: Direction) {
        let n = self.len();
        match direction {
            Direction::Left => {
                for i in 0..n - 1 {
                    self.left_orthogonalize_site(i);
                }
                self.canonical = Canonical::LeftUpTo(n - 1);
            }
            Direction::Right => {
                for i in (1..n).rev() {
                    self.right_orthogonalize_site(i);
                }
                self.canonical = Canonical::RightUpTo(1);
            }
        }
    }

    fn known_left(&self) -> usize {
        match self.canonical {
            Canonical::LeftUpTo(c) | Canonical::Mixed(c) => c,
            _ => 0,
        }
    }

    fn known_right(&self) -> usize {
        match self.canonical {
            Canonical::RightUpTo(c) => c,
            Canonical::Mixed(c) => c + 1,
            _ => self.len(),
        }
    }

    /// Installs mixed-canonical form with the center at `center`, reusing any
    /// isometries the flag already guarantees.
    pub fn move_center(&mut self, center: usize) {
        assert!(center < self.len(), "center {center} out of range");
        let (left_ok, right_ok) = (self.known_left(), self.known_right());
        for i in left_ok..center {
            self.left_orthogonalize_site(i);
        }
        for i in (center + 1..right_ok).rev() {
            self.right_orthogonalize_site(i);
        }
        self.canonical = Canonical::Mixed(center);
    }

    /// Largest deviation from the isometry conditions the flag claims.
    pub fn canonical_defect(&self) -> f64 {
        let n = self.len();
        let (left, right) = match self.canonical {
            Canonical::None => (0, n),
            Canonical::LeftUpTo(c) => (c, n),
            Canonical::RightUpTo(c) => (0, c),
            Canonical::Mixed(c) => (c, c + 1),
        };
        let mut worst: f64 = 0.0;
        for t in &self.tensors[..left] {
            let m = left_matrix(t);
            let g = m.t().mapv(|z| z.conj()).dot(&m);
            worst = worst.max(identity_defect(&g));
        }
        for t in &self.tensors[right.min(n)..] {
            let m = right_matrix(t);
            let g = m.dot(&m.t().mapv(|z| z.conj()));
            worst = worst.max(identity_defect(&g));
        }
        worst
    }

    fn check_cut(&self, j: usize) -> Result<()> {
        let n = self.len();
        if j == 0 || j >= n {
            return Err(Error::Cut { j, n });
        }
        Ok(())
    }

    pub fn schmidt_spectrum_at(&self, j: usize) -> Result<SchmidtSpectrum> {
        self.check_cut(j)?;
        let mut c = self.clone();
        c.move_center(j - 1);
        let dec = linalg::svd(left_matrix(&c.tensors[j - 1]))?;
        SchmidtSpectrum::from_singular_values(self.len(), j, dec.s)
    }

    pub fn all_spectra(&self) -> Result<Vec<SchmidtSpectrum>> {
        let n = self.len();
        let mut c = self.clone();
        c.move_center(0);
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for j in 1..n {
            let (dec, _) = c.split_center_rightward(j - 1, &TruncationPolicy::exact())?;
            out.push(SchmidtSpectrum::from_singular_values(n, j, dec)?);
        }
        Ok(out)
    }

    /// SVD-splits the center at `site` and moves the center to `site + 1`.
    /// Returns the full singular values before truncation.
    fn split_center_rightward(
        &mut self,
        site: usize,
        policy: &TruncationPolicy,
    ) -> Result<(Vec<f64>, Truncation)> {
        let (l, d, _) = self.tensors[site].dim();
        let dec = linalg::svd(left_matrix(&self.tensors[site]))?;
        let all = dec.s.clone();
        let t = policy.choose(&dec.s);
        let Svd { u, s, vt } = dec.truncated(t.kept);
        let k = s.len();
        self.tensors[site] = to_site(u, l, d, k);
        let mut svt = vt;
        for (mut row, &sv) in svt.rows_mut().into_iter().zip(&s) {
            row.mapv_inplace(|z| z * sv);
        }
        let next = &self.tensors[site + 1];
        let (_, dn, rn) = next.dim();
        self.tensors[site + 1] = to_site(svt.dot(&right_matrix(next)), k, dn, rn);
        self.canonical = Canonical::Mixed(site + 1);
        Ok((all, t))
    }

    /// SVD-splits the center at `site` and moves the center to `site - 1`.
    fn split_center_leftward(&mut self, site: usize, policy: &TruncationPolicy) -> Result<Truncation> {
        let (_, d, r) = self.tensors[site].dim();
        let dec = linalg::svd(right_matrix(&self.tensors[site]))?;
        let t = policy.choose(&dec.s);
        let Svd { u, s, vt } = dec.truncated(t.kept);
        let k = s.len();
        self.tensors[site] = to_site(vt, k, d, r);
        let mut us = u;
        for (mut col, &sv) in us.columns_mut().into_iter().zip(&s) {
            col.mapv_inplace(|z| z * sv);
        }
        let prev = &self.tensors[site - 1];
        let (lp, dp, _) = prev.dim();
        self.tensors[site - 1] = to_site(left_matrix(prev).dot(&us), lp, dp, k);
        self.canonical = Canonical::Mixed(site - 1);
        Ok(t)
    }

    pub fn truncate_bond(&mut self, j: usize, policy: &TruncationPolicy) -> Result<Truncation> {
        self.check_cut(j)?;
        self.move_center(j - 1);
        Ok(self.split_center_rightward(j - 1, policy)?.1)
    }

    /// Right-to-left SVD sweep from a center at the last site. Every split
    /// happens in canonical gauge, so each truncation is optimal for its bond.
    /// Entry `j - 1` of the result describes cut `j`.
    pub(crate) fn sweep_truncate_leftward(&mut self, policy: &TruncationPolicy) -> Result<Vec<Truncation>> {
        let n = self.len();
        debug_assert_eq!(self.known_left(), n - 1);
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for site in (1..n).rev() {
            out.push(self.split_center_leftward(site, policy)?);
        }
        out.reverse();
        self.canonical = Canonical::Mixed(0);
        Ok(out)
    }

    /// `self - other` as a chain whose bonds are the direct sums of the inputs.
    pub fn difference(&self, other: &Chain) -> Result<Chain> {
        if self.len() != other.len() || self.phys != other.phys {
            return Err(Error::Validation(format!(
                "cannot subtract a {}-site chain (phys {}) from a {}-site chain (phys {})",
                other.len(),
                other.phys,
                self.len(),
                self.phys
            )));
        }
        let n = self.len();
        let d = self.phys;
        if n == 1 {
            let t = &self.tensors[0] - &other.tensors[0];
            return Ok(Chain::from_parts(vec![t], d, Canonical::None));
        }
        let tensors = (0..n)
            .map(|i| {
                let (a, b) = (&self.tensors[i], &other.tensors[i]);
                let (la, _, ra) = a.dim();
                let (lb, _, rb) = b.dim();
                if i == 0 {
                    let mut t = Array3::zeros((1, d, ra + rb));
                    t.slice_mut(s![.., .., ..ra]).assign(a);
                    t.slice_mut(s![.., .., ra..]).assign(b);
                    t
                } else if i == n - 1 {
                    let mut t = Array3::zeros((la + lb, d, 1));
                    t.slice_mut(s![..la, .., ..]).assign(a);
                    t.slice_mut(s![la.., .., ..]).assign(&b.mapv(|z| -z));
                    t
                } else {
                    let mut t = Array3::zeros((la + lb, d, ra + rb));
                    t.slice_mut(s![..la, .., ..ra]).assign(a);
                    t.slice_mut(s![la.., .., ra..]).assign(b);
                    t
                }
            })
            .collect();
        Ok(Chain::from_parts(tensors, d, Canonical::None))
    }

    /// Frobenius norm read off the last site after a QR sweep. Unlike
    /// [`Chain::norm`] this does not cancel when the chain encodes a small
    /// difference of large terms.
    pub fn swept_norm(&self) -> f64 {
        let mut c = self.clone();
        c.canonicalize(Direction::Left);
        linalg::frobenius(left_matrix(&c.tensors[c.len() - 1]))
    }

    /// Reverses site order, transposing the bond legs of each tensor.
    pub(crate) fn reversed(&self) -> Chain {
        let n = self.len();
        let tensors = self
            .tensors
            .iter()
            .rev()
            .map(|t| t.view().permuted_axes([2, 1, 0]).as_standard_layout().into_owned())
            .collect();
        let canonical = match self.canonical {
            Canonical::None => Canonical::None,
            Canonical::LeftUpTo(c) => Canonical::RightUpTo(n - c),
            Canonical::RightUpTo(c) => Canonical::LeftUpTo(n - c),
            Canonical::Mixed(c) => Canonical::Mixed(n - 1 - c),
        };
        Chain {
            tensors,
            phys: self.phys,
            canonical,
        }
    }
}

fn identity_defect(g: &Array2<C64>) -> f64 {
    g.indexed_iter()
        .map(|((i, j), z)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (z - C64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}
