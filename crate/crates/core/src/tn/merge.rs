//! Folding a gate list into one MPO, one staircase stage at a time.

use ndarray::Array4;

use super::chain::TruncationPolicy;
use super::mpo::Mpo;
use super::zipup::{mpo_product_zipup, ZipupOptions};
use super::{all_schmidt_spectra, TensorChain};
use crate::dense::unit_phase;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qft::GateLayer;
use crate::spectrum::SchmidtSpectrum;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MergeOptions {
    pub zipup: ZipupOptions,
    /// Record the Schmidt spectrum at every cut after every fold.
    pub record_spectra: bool,
}


/// Diagnostics for one fold.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldRecord {
    /// 1-based qubit the folded stage pivots on.
    pub pivot: usize,
    pub gates: usize,
    pub bond_dims: Vec<usize>,
    /// Sum of relative weights discarded while folding this stage.
    pub discarded_weight: f64,
    /// One spectrum per cut; empty unless recording was requested.
    pub spectra: Vec<SchmidtSpectrum>,
}

#[derive(Clone, Debug)]
pub struct MergeResult {
    pub mpo: Mpo,
    pub folds: Vec<FoldRecord>,
}

/// Either a lone Hadamard, or consecutive controlled phases sharing a control
/// qubit (the pivot). A phase stage is an exact bond-dimension-2 MPO.
#[derive(Debug)]
struct Stage {
    pivot: usize,
    hadamard: bool,
    /// Per-site phase applied to `|1>` when the pivot bit is 1.
    phases: Vec<C64>,
    touched: Vec<bool>,
    gates: usize,
}

impl Stage {
    fn new(n: usize, pivot: usize, hadamard: bool) -> Self {
        let mut touched = vec![false; n];
        touched[pivot] = true;
        Self {
            pivot,
            hadamard,
            phases: vec![C64::new(1.0, 0.0); n],
            touched,
            gates: 0,
        }
    }

    fn to_mpo(&self) -> Result<Mpo> {
        let n = self.phases.len();
        let lo = self.touched.iter().position(|&t| t).expect("pivot is touched");
        let hi = self.touched.iter().rposition(|&t| t).expect("pivot is touched");
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let op = |site: usize, b: usize| -> [[C64; 2]; 2] {
            if site == self.pivot {
                let mut m = [[zero; 2]; 2];
                for i in 0..2 {
                    m[b][i] = if self.hadamard {
                        C64::new(if b == 1 && i == 1 { -h } else { h }, 0.0)
                    } else if i == b {
                        one
                    } else {
                        zero
                    };
                }
                m
            } else {
                let ph = if b == 1 { self.phases[site] } else { one };
                [[one, zero], [zero, ph]]
            }
        };
        let tensors = (0..n)
            .map(|s| {
                if s < lo || s > hi {
                    let id = op(s, 0);
                    return Array4::from_shape_fn((1, 2, 2, 1), |(_, o, i, _)| id[o][i]);
                }
                let l = if s == lo { 1 } else { 2 };
                let r = if s == hi { 1 } else { 2 };
                let mut w = Array4::<C64>::zeros((l, 2, 2, r));
                for b in 0..2 {
                    let m = op(s, b);
                    let (a, c) = (if l == 1 { 0 } else { b }, if r == 1 { 0 } else { b });
                    for o in 0..2 {
                        for i in 0..2 {
                            w[[a, o, i, c]] += m[o][i];
                        }
                    }
                }
                w
            })
            .collect();
        Mpo::from_tensors(tensors)
    }
}

fn group_stages(n: usize, layers: &[GateLayer]) -> Result<Vec<Stage>> {
    let check_site = |s: usize| {
        if s == 0 || s > n {
            Err(Error::MalformedLayer(format!("site {s} outside 1..={n}")))
        } else {
            Ok(s - 1)
        }
    };
    let mut stages: Vec<Stage> = Vec::new();
    for layer in layers {
        match *layer {
            GateLayer::Hadamard { site } => {
                let s = check_site(site)?;
                let mut st = Stage::new(n, s, true);
                st.gates = 1;
                stages.push(st);
            }
            GateLayer::ControlledPhase { control, target, k } => {
                let c = check_site(control)?;
                let t = check_site(target)?;
                if c == t {
                    return Err(Error::MalformedLayer(format!(
                        "controlled phase with control = target = {control}"
                    )));
                }
                if k == 0 {
                    return Err(Error::MalformedLayer("controlled phase with k = 0".into()));
                }
                if stages.last().is_none_or(|st| st.hadamard || st.pivot != c) {
                    stages.push(Stage::new(n, c, false));
                }
                let st = stages.last_mut().expect("just ensured");
                st.phases[t] *= unit_phase(1, k);
                st.touched[t] = true;
                st.gates += 1;
            }
        }
    }
    Ok(stages)
}

/// Folds `layers` (applied first to last) into a single MPO.
///
/// Gates are grouped into staircase stages; each stage is multiplied onto the
/// accumulated MPO by zip-up with truncation, so the accumulated bond
/// dimension never exceeds what `policy` allows.
pub fn zipup_merge_layers(
    n: usize,
    layers: &[GateLayer],
    policy: &TruncationPolicy,
    opts: &MergeOptions,
) -> Result<MergeResult> {
    if n == 0 {
        return Err(Error::TooSmall {
            what: "zipup_merge_layers",
            got: 0,
            min: 1,
        });
    }
    let stages = group_stages(n, layers)?;
    let mut acc: Option<Mpo> = None;
    let mut folds = Vec::with_capacity(stages.len());
    for stage in &stages {
        let layer = stage.to_mpo()?;
        let (next, discarded) = match acc.take() {
            None => (layer, 0.0),
            Some(prev) => {
                let (m, report) = mpo_product_zipup(&layer, &prev, policy, &opts.zipup)?;
                (m, report.total_discarded())
            }
        };
        let spectra = if opts.record_spectra && n > 1 {
            all_schmidt_spectra(&next)?
        } else {
            Vec::new()
        };
        folds.push(FoldRecord {
            pivot: stage.pivot + 1,
            gates: stage.gates,
            bond_dims: next.bond_dims(),
            discarded_weight: discarded,
            spectra,
        });
        acc = Some(next);
    }
    let mpo = match acc {
        Some(m) => m,
        None => Mpo::identity(n)?,
    };
    Ok(MergeResult { mpo, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qft::{build_qn_dense, qft_layers};
    use crate::tn::mpo_to_dense;

    #[test]
    fn hadamard_on_every_site() {
        let n = 3;
        let layers: Vec<_> = (1..=n).map(|site| GateLayer::Hadamard { site }).collect();
        let res = zipup_merge_layers(n, &layers, &TruncationPolicy::exact(), &MergeOptions::default())
            .unwrap();
        assert!(res.mpo.bond_dims().iter().all(|&d| d == 1));
        let d = mpo_to_dense(&res.mpo).unwrap();
        let h = crate::dense::dft_matrix(1).unwrap();
        let hh = ndarray::linalg::kron(h.matrix(), h.matrix());
        let hhh = ndarray::linalg::kron(&hh, h.matrix());
        assert!(d.matrix().iter().zip(hhh.iter()).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn four_qubit_staircase_is_exact() {
        let res = zipup_merge_layers(4, &qft_layers(4), &TruncationPolicy::exact(), &MergeOptions::default())
            .unwrap();
        let d = mpo_to_dense(&res.mpo).unwrap();
        let q = build_qn_dense(4).unwrap();
        assert!(d.frobenius_distance(&q) / q.frobenius_norm() <= 1e-12);
        assert_eq!(res.folds.len(), 7);
    }

    #[test]
    fn malformed_layers() {
        let p = TruncationPolicy::exact();
        let o = MergeOptions::default();
        let bad_site = [GateLayer::Hadamard { site: 5 }];
        assert!(matches!(zipup_merge_layers(4, &bad_site, &p, &o), Err(Error::MalformedLayer(_))));
        let same = [GateLayer::ControlledPhase { control: 2, target: 2, k: 2 }];
        assert!(matches!(zipup_merge_layers(4, &same, &p, &o), Err(Error::MalformedLayer(_))));
        let zero = [GateLayer::Hadamard { site: 0 }];
        assert!(matches!(zipup_merge_layers(4, &zero, &p, &o), Err(Error::MalformedLayer(_))));
    }

    #[test]
    fn controlled_phase_with_target_left_of_control() {
        let layers = [
            GateLayer::Hadamard { site: 3 },
            GateLayer::ControlledPhase { control: 3, target: 1, k: 3 },
        ];
        let res = zipup_merge_layers(3, &layers, &TruncationPolicy::exact(), &MergeOptions::default())
            .unwrap();
        let d = mpo_to_dense(&res.mpo).unwrap();
        // Column |000>: H on qubit 3 gives (|000> + |001>)/sqrt2; the phase
        // needs qubit 1 set, so nothing changes.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.get(0b000, 0b000).re - h).abs() < 1e-15);
        // Column |100>: the |101> branch picks up exp(2 pi i / 8).
        let want = unit_phase(1, 3) * h;
        assert!((d.get(0b101, 0b100) - want).norm() < 1e-15);
    }
}
