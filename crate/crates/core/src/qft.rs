//! The QFT in dense and tensor-network form.
//!
//! `F_n = R_n Q_n`, where `R_n` reverses the qubit order and `Q_n` sends
//! `|q_1 .. q_n>` to the product state whose `i`-th factor is
//! `(|0> + exp(2 pi i 0.q_i..q_n)|1>)/sqrt(2)`. Only `Q_n` has a compressible
//! operator Schmidt spectrum, so the MPO always represents `Q_n` and the
//! reversal is applied to states with [`crate::tn::reverse_sites`].

use crate::dense::{check_dense_size, unit_phase, DenseOperator};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spectrum::SchmidtSpectrum;
use crate::tn::{zipup_merge_layers, FoldRecord, MergeOptions, Mpo, TruncationPolicy};

/// Controlled phases with `k` above this rotate by less than `2 pi / 2^53`
/// and are dropped from the circuit.
pub const MAX_PHASE_EXPONENT: u32 = 53;

/// One gate of the QFT staircase. Sites are 1-based qubit labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateLayer {
    Hadamard { site: usize },
    /// `diag(1, 1, 1, exp(2 pi i / 2^k))` on the two qubits.
    ControlledPhase { control: usize, target: usize, k: u32 },
}

/// Gate list for `Q_n`, in application order: for each qubit `i`, a Hadamard
/// on `i` followed by controlled phases to every later qubit `t` with
/// `k = t - i + 1`, in ascending `t`.
pub fn qft_layers(n: usize) -> Vec<GateLayer> {
    let mut layers = Vec::with_capacity(n * (n + 1) / 2);
    for i in 1..=n {
        layers.push(GateLayer::Hadamard { site: i });
        for target in i + 1..=n {
            let k = (target - i + 1) as u32;
            if k > MAX_PHASE_EXPONENT {
                break;
            }
            layers.push(GateLayer::ControlledPhase { control: i, target, k });
        }
    }
    layers
}

/// Dense `Q_n`: column `x` is the product state with phases `0.q_i..q_n`.
pub fn build_qn_dense(n: usize) -> Result<DenseOperator> {
    check_dense_size("build_qn_dense", n)?;
    let dim = 1usize << n;
    let mask = dim - 1;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut matrix = ndarray::Array2::<C64>::zeros((dim, dim));
    let mut coeff = vec![0usize; n];
    for x in 0..dim {
        // Output qubit i (1-based) contributes y_i * (x mod 2^(n-i+1)) / 2^(n-i+1)
        // turns, i.e. (x mod 2^(n-i+1)) * 2^(i-1) in units of 2^-n.
        for (idx, c) in coeff.iter_mut().enumerate() {
            let i = idx + 1;
            let low = x & ((1usize << (n - i + 1)) - 1);
            *c = (low << (i - 1)) & mask;
        }
        for y in 0..dim {
            let mut m = 0usize;
            for (idx, c) in coeff.iter().enumerate() {
                if (y >> (n - 1 - idx)) & 1 == 1 {
                    m += c;
                }
            }
            matrix[[y, x]] = unit_phase(m as u64, n as u32) * scale;
        }
    }
    DenseOperator::from_matrix(n, matrix)
}

/// Upper bound on the `k`-th normalized Schmidt coefficient of `Q_n`,
/// valid for `k >= 2` at every `n` and cut:
/// `k^(-1/2) exp(-((2k + 1)/2) ln((4k + 4)/(e pi)))`.
pub fn theorem_bound(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("bound holds only for k >= 2, got k = {k}")));
    }
    let kf = k as f64;
    let ratio = (4.0 * kf + 4.0) / (std::f64::consts::E * std::f64::consts::PI);
    Ok((-(2.0 * kf + 1.0) / 2.0 * ratio.ln()).exp() / kf.sqrt())
}

/// `theorem_bound(k)` for `k = 2..=kmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    values: Vec<(usize, f64)>,
}

impl BoundCurve {
    pub fn new(kmax: usize) -> Result<Self> {
        if kmax < 2 {
            return Err(Error::Domain(format!("kmax must be at least 2, got {kmax}")));
        }
        let values = (2..=kmax)
            .map(|k| theorem_bound(k).map(|b| (k, b)))
            .collect::<Result<_>>()?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[(usize, f64)] {
        &self.values
    }
}

/// Compressed MPO for `Q_n` (never `F_n`).
pub fn build_qft_mpo(n: usize, policy: &TruncationPolicy) -> Result<Mpo> {
    Ok(zipup_merge_layers(n, &qft_layers(n), policy, &MergeOptions::default())?.mpo)
}

/// `-sum sigma^2 ln sigma^2` in nats.
pub fn operator_entanglement_entropy(s: &SchmidtSpectrum) -> Result<f64> {
    let total: f64 = s.sigmas().iter().map(|x| x * x).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Validation(format!(
            "spectrum is not normalized: sum of squares = {total}"
        )));
    }
    Ok(s.sigmas()
        .iter()
        .map(|x| x * x)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Spectra at every cut after every fold of the `Q_n` construction.
pub fn intermediate_spectra_report(n: usize, policy: &TruncationPolicy) -> Result<Vec<FoldRecord>> {
    let opts = MergeOptions {
        record_spectra: true,
        ..Default::default()
    };
    Ok(zipup_merge_layers(n, &qft_layers(n), policy, &opts)?.folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{bit_reversal_permutation, dft_matrix, operator_schmidt};
    use crate::tn::{all_schmidt_spectra, mpo_to_dense, TensorChain};

    #[test]
    fn layer_lists() {
        assert_eq!(qft_layers(1), vec![GateLayer::Hadamard { site: 1 }]);
        assert_eq!(
            qft_layers(2),
            vec![
                GateLayer::Hadamard { site: 1 },
                GateLayer::ControlledPhase { control: 1, target: 2, k: 2 },
                GateLayer::Hadamard { site: 2 },
            ]
        );
        let l4 = qft_layers(4);
        let h = l4.iter().filter(|g| matches!(g, GateLayer::Hadamard { .. })).count();
        assert_eq!((h, l4.len() - h), (4, 6));
    }

    #[test]
    fn tiny_phases_are_flushed() {
        let n = 60;
        let layers = qft_layers(n);
        assert!(layers.iter().all(|g| match g {
            GateLayer::ControlledPhase { k, .. } => *k <= MAX_PHASE_EXPONENT,
            _ => true,
        }));
        let cp = layers.len() - n;
        // Qubit i talks to min(n - i, 52) later qubits.
        let want: usize = (1..=n).map(|i| (n - i).min(52)).sum();
        assert_eq!(cp, want);
    }

    #[test]
    fn one_qubit_core_is_hadamard() {
        let q = build_qn_dense(1).unwrap();
        assert!(q.frobenius_distance(&dft_matrix(1).unwrap()) < 1e-15);
    }

    #[test]
    fn column_five_of_three_qubit_core() {
        // x = 5 = 101: factors carry 0.101, 0.01, 0.1 turns.
        let q = build_qn_dense(3).unwrap();
        let f = [0.625, 0.25, 0.5];
        let factor = |i: usize, bit: usize| {
            if bit == 0 {
                C64::new(1.0, 0.0)
            } else {
                let a = std::f64::consts::TAU * f[i];
                C64::new(a.cos(), a.sin())
            }
        };
        for y in 0..8 {
            let want = (0..3).map(|i| factor(i, (y >> (2 - i)) & 1)).product::<C64>()
                / 8f64.sqrt();
            assert!((q.get(y, 5) - want).norm() < 1e-15, "y={y}");
        }
    }

    #[test]
    fn reversal_times_core_is_dft() {
        for n in 1..=8 {
            let p = DenseOperator::permutation(n, &bit_reversal_permutation(n)).unwrap();
            let prod = p.compose(&build_qn_dense(n).unwrap()).unwrap();
            let f = dft_matrix(n).unwrap();
            assert!(prod.frobenius_distance(&f) / f.frobenius_norm() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn core_is_unitary() {
        for n in 1..=8 {
            assert!(build_qn_dense(n).unwrap().unitarity_defect() <= 1e-12);
        }
    }

    #[test]
    fn bound_values() {
        // 30-digit mpmath evaluation of the closed form.
        assert!((theorem_bound(2).unwrap() - 0.302_094_468_739_521_3).abs() < 1e-15);
        assert!((theorem_bound(4).unwrap() - 0.010_860_119_886_870_505).abs() < 1e-16);
        assert!((theorem_bound(15).unwrap() / 7.137_601_053_213_669e-15 - 1.0).abs() < 1e-12);
        assert!(matches!(theorem_bound(1), Err(Error::Domain(_))));
        for k in 2..=64 {
            assert!(theorem_bound(k + 1).unwrap() < theorem_bound(k).unwrap());
        }
    }

    #[test]
    fn bound_curve() {
        let c = BoundCurve::new(5).unwrap();
        assert_eq!(c.values().len(), 4);
        assert_eq!(c.values()[0].0, 2);
        assert!(BoundCurve::new(1).is_err());
    }

    #[test]
    fn exact_mpo_matches_dense_core() {
        for n in 2..=8 {
            let m = build_qft_mpo(n, &TruncationPolicy::exact()).unwrap();
            let d = mpo_to_dense(&m).unwrap();
            let q = build_qn_dense(n).unwrap();
            let err = d.frobenius_distance(&q) / q.frobenius_norm();
            assert!(err <= 1e-12, "n={n} err {err}");
        }
    }

    #[test]
    fn mpo_spectra_match_dense_spectra() {
        for n in 2..=8 {
            let m = build_qft_mpo(n, &TruncationPolicy::exact()).unwrap();
            let q = build_qn_dense(n).unwrap();
            for (j, s) in (1..n).zip(all_schmidt_spectra(&m).unwrap()) {
                let dense = operator_schmidt(&q, j).unwrap();
                assert!(s.max_abs_diff(&dense) <= 1e-10, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn entropy_examples() {
        let one = SchmidtSpectrum::from_normalized(4, 2, vec![1.0], 1e-12).unwrap();
        assert_eq!(operator_entanglement_entropy(&one).unwrap(), 0.0);
        for n in 2..=6 {
            let f = dft_matrix(n).unwrap();
            for j in 1..n {
                let s = operator_schmidt(&f, j).unwrap();
                let want = 2.0 * j.min(n - j) as f64 * std::f64::consts::LN_2;
                assert!((operator_entanglement_entropy(&s).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn entropy_of_core_saturates() {
        let mut values = Vec::new();
        for n in 6..=10 {
            let s = operator_schmidt(&build_qn_dense(n).unwrap(), n / 2).unwrap();
            values.push(operator_entanglement_entropy(&s).unwrap());
        }
        // Bounded by a constant far below the 2 ln 2 * n/2 of the full DFT,
        // and still creeping up only in the third digit.
        assert!(values.iter().all(|&v| v < 0.6), "{values:?}");
        assert!(values.windows(2).all(|w| (w[1] - w[0]).abs() < 5e-3), "{values:?}");
    }

    #[test]
    fn intermediate_report_shapes() {
        let r = intermediate_spectra_report(2, &TruncationPolicy::exact()).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].spectra.len(), 1);
        assert_eq!(r[0].spectra[0].sigmas(), &[1.0]);

        let r = intermediate_spectra_report(8, &TruncationPolicy::exact()).unwrap();
        let q = build_qn_dense(8).unwrap();
        let last = r.last().unwrap();
        for (j, s) in (1..8).zip(&last.spectra) {
            assert!(s.max_abs_diff(&operator_schmidt(&q, j).unwrap()) <= 1e-10);
        }
        assert_eq!(last.bond_dims, build_qft_mpo(8, &TruncationPolicy::exact()).unwrap().bond_dims());
    }

    #[test]
    fn unnormalized_entropy_input_is_rejected() {
        let s = SchmidtSpectrum::from_normalized(2, 1, vec![0.9, 0.1], 1.0).unwrap();
        assert!(matches!(operator_entanglement_entropy(&s), Err(Error::Validation(_))));
    }
}
