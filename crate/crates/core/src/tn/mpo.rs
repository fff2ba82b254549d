use ndarray::{Array2, Array3, Array4, ArrayView4};

use super::chain::Chain;
use super::TensorChain;
use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest operator [`mpo_to_dense`] will expand.
pub const MAX_MPO_DENSE_QUBITS: usize = 12;

/// Matrix product operator over `n` qubits. Site tensors are
/// `(left, out, in, right)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mpo(Chain);

impl TensorChain for Mpo {
    fn chain(&self) -> &Chain {
        &self.0
    }

    fn into_chain(self) -> Chain {
        self.0
    }

    fn wrap(chain: Chain) -> Self {
        Mpo(chain)
    }
}

impl Mpo {
    pub fn from_tensors(tensors: Vec<Array4<C64>>) -> Result<Self> {
        let sites = tensors
            .into_iter()
            .map(|t| {
                let (l, o, i, r) = t.dim();
                if o != 2 || i != 2 {
                    return Err(Error::Validation(format!(
                        "MPO site has physical legs ({o}, {i}), expected (2, 2)"
                    )));
                }
                Ok(t
                    .as_standard_layout()
                    .into_owned()
                    .into_shape_with_order((l, 4, r))
                    .expect("standard layout"))
            })
            .collect::<Result<Vec<Array3<C64>>>>()?;
        Ok(Mpo(Chain::new(sites, 4)?))
    }

    /// Bond-dimension-1 operator `A_1 (x) ... (x) A_n`; `ops[i][out][in]`.
    pub fn product(ops: &[[[C64; 2]; 2]]) -> Result<Self> {
        let tensors = ops
            .iter()
            .map(|op| Array4::from_shape_fn((1, 2, 2, 1), |(_, o, i, _)| op[o][i]))
            .collect();
        Self::from_tensors(tensors)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let id = [[one, zero], [zero, one]];
        Self::product(&vec![id; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Site `i` viewed as `(left, out, in, right)`.
    pub fn site(&self, i: usize) -> ArrayView4<'_, C64> {
        let t = self.0.site(i);
        let (l, _, r) = t.dim();
        t.view().into_shape_with_order((l, 2, 2, r)).expect("standard layout")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Full contraction to a `2^n x 2^n` matrix, rows indexed by output bits.
pub fn mpo_to_dense(o: &Mpo) -> Result<DenseOperator> {
    let n = o.n();
    if n > MAX_MPO_DENSE_QUBITS {
        return Err(Error::TooLarge {
            what: "mpo_to_dense",
            got: n,
            max: MAX_MPO_DENSE_QUBITS,
        });
    }
    // acc[(out, in), bond] with out/in each spanning the sites seen so far.
    let mut acc = Array2::<C64>::from_elem((1, 1), C64::new(1.0, 0.0));
    let mut side = 1usize;
    for t in o.chain().tensors() {
        let (l, _, r) = t.dim();
        let site = t.view().into_shape_with_order((l, 4 * r)).expect("standard layout");
        let prod = acc.dot(&site); // (out, in, o, i, r)
        let next = prod
            .into_shape_with_order((side, side, 2, 2, r))
            .expect("shape")
            .permuted_axes([0, 2, 1, 3, 4])
            .as_standard_layout()
            .into_owned();
        side *= 2;
        acc = next
            .into_shape_with_order((side * side, r))
            .expect("shape");
    }
    let matrix = acc.into_shape_with_order((side, side)).expect("square");
    DenseOperator::from_matrix(n, matrix)
}
