use crate::error::{Error, Result};

/// Normalized, descending Schmidt coefficients at one bipartition.
///
/// `j` counts the qubits on the left side of the cut: qubits `1..=j` versus
/// `j+1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    n: usize,
    j: usize,
    sigmas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Sorts and l2-normalizes raw singular values.
    pub fn from_singular_values(n: usize, j: usize, mut raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Validation(
                "singular values must be finite and non-negative".into(),
            ));
        }
        raw.sort_by(|a, b| b.total_cmp(a));
        let norm = raw.iter().map(|s| s * s).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Validation("spectrum has zero norm".into()));
        }
        raw.iter_mut().for_each(|s| *s /= norm);
        Ok(Self { n, j, sigmas: raw })
    }

    /// Wraps coefficients that are expected to already be normalized and sorted.
    pub fn from_normalized(n: usize, j: usize, sigmas: Vec<f64>, tol: f64) -> Result<Self> {
        if sigmas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation("spectrum is not descending".into()));
        }
        let total: f64 = sigmas.iter().map(|s| s * s).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Validation(format!(
                "spectrum is not normalized: sum of squares = {total}"
            )));
        }
        Ok(Self { n, j, sigmas })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// `sigma_k`, zero past the stored length.
    pub fn get(&self, k: usize) -> f64 {
        self.sigmas.get(k).copied().unwrap_or(0.0)
    }

    /// `sqrt(sum_{k >= chi} sigma_k^2)`, accumulated from the small end.
    pub fn tail_norm(&self, chi: usize) -> f64 {
        self.sigmas
            .iter()
            .skip(chi)
            .rev()
            .fold(0.0, |acc, s| acc + s * s)
            .sqrt()
    }

    /// Number of coefficients strictly above `tol`.
    pub fn rank_above(&self, tol: f64) -> usize {
        self.sigmas.iter().take_while(|&&s| s > tol).count()
    }

    /// Largest coefficient-wise difference, zero-padding the shorter spectrum.
    pub fn max_abs_diff(&self, other: &SchmidtSpectrum) -> f64 {
        let len = self.len().max(other.len());
        (0..len)
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn mirrored(&self) -> SchmidtSpectrum {
        Self {
            n: self.n,
            j: self.n - self.j,
            sigmas: self.sigmas.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_sorts() {
        let s = SchmidtSpectrum::from_singular_values(4, 2, vec![1.0, 3.0, 0.0]).unwrap();
        let norm = 10f64.sqrt();
        assert_eq!(s.sigmas(), &[3.0 / norm, 1.0 / norm, 0.0]);
        assert!((s.tail_norm(1) - 1.0 / norm).abs() < 1e-15);
        assert_eq!(s.rank_above(1e-14), 2);
    }

    #[test]
    fn rejects_zero_and_unsorted() {
        assert!(SchmidtSpectrum::from_singular_values(2, 1, vec![0.0, 0.0]).is_err());
        assert!(SchmidtSpectrum::from_normalized(2, 1, vec![0.6, 0.8], 1e-12).is_err());
        assert!(SchmidtSpectrum::from_normalized(2, 1, vec![0.8, 0.5], 1e-12).is_err());
        assert!(SchmidtSpectrum::from_normalized(2, 1, vec![0.8, 0.6], 1e-12).is_ok());
    }

    #[test]
    fn padded_difference() {
        let a = SchmidtSpectrum::from_normalized(2, 1, vec![1.0], 1e-12).unwrap();
        let b = SchmidtSpectrum::from_normalized(2, 1, vec![0.8, 0.6], 1e-12).unwrap();
        assert!((a.max_abs_diff(&b) - 0.6).abs() < 1e-15);
    }
}
