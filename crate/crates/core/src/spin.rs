//! Collective spin operators of an N-qubit cluster and the excitation-sorted
//! product basis they are stored in.
//!
//! Product states are labelled by N bits, qubit 1 most significant, with a set
//! bit meaning the qubit is excited. The storage order groups states by
//! excitation number k (ascending) and sorts each group by bit pattern, so the
//! block of k-excitation states is the contiguous range
//! `offset(k)..offset(k) + C(N, k)`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SparseMatrix, C64, ZERO};

pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Binomial coefficient, exact for all `n <= 64`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Excitation-block sizes `[C(N,0), ..., C(N,N)]`.
pub fn block_sizes(n: usize) -> Vec<usize> {
    (0..=n).map(|k| binomial(n, k)).collect()
}

/// Permutation between binary product-state indices and storage indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisOrdering {
    n: usize,
    to_binary: Vec<usize>,
    to_storage: Vec<usize>,
    offsets: Vec<usize>,
}

impl BasisOrdering {
    pub fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let mut to_binary: Vec<usize> = (0..dim).collect();
        to_binary.sort_by_key(|&b| (b.count_ones(), b));
        let mut to_storage = vec![0; dim];
        for (s, &b) in to_binary.iter().enumerate() {
            to_storage[b] = s;
        }
        let mut offsets = Vec::with_capacity(n + 2);
        let mut acc = 0;
        for size in block_sizes(n) {
            offsets.push(acc);
            acc += size;
        }
        offsets.push(acc);
        BasisOrdering { n, to_binary, to_storage, offsets }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.to_binary.len()
    }

    pub fn binary_of(&self, storage: usize) -> usize {
        self.to_binary[storage]
    }

    pub fn storage_of(&self, binary: usize) -> usize {
        self.to_storage[binary]
    }

    pub fn excitation(&self, storage: usize) -> usize {
        self.to_binary[storage].count_ones() as usize
    }

    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Product-state label such as `"egg"` (qubit 1 first).
    pub fn label(&self, storage: usize) -> String {
        let b = self.to_binary[storage];
        (0..self.n).rev().map(|q| if b >> q & 1 == 1 { 'e' } else { 'g' }).collect()
    }

    /// Storage index of a label like `"ge"`.
    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        if label.len() != self.n {
            return None;
        }
        let mut b = 0;
        for ch in label.chars() {
            b = (b << 1)
                | match ch {
                    'e' => 1,
                    'g' => 0,
                    _ => return None,
                };
        }
        Some(self.to_storage[b])
    }
}

/// J± and their second-order products in the excitation-sorted basis.
#[derive(Debug, Clone)]
pub struct CollectiveOps {
    pub basis: BasisOrdering,
    pub j_plus: SparseMatrix,
    pub j_minus: SparseMatrix,
    pub j_plus_j_minus: SparseMatrix,
    pub j_minus_j_plus: SparseMatrix,
    pub j_minus_sq: SparseMatrix,
}

impl CollectiveOps {
    pub fn qubits(&self) -> usize {
        self.basis.qubits()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// J_z = ½ Σ σᶻ, diagonal with entries k − N/2.
    pub fn j_z(&self) -> SparseMatrix {
        let mut jz = SparseMatrix::new(self.dim(), self.dim());
        let half_n = self.qubits() as f64 / 2.0;
        for s in 0..self.dim() {
            let v = self.basis.excitation(s) as f64 - half_n;
            if v != 0.0 {
                jz.push(s, s, C64::new(v, 0.0));
            }
        }
        jz
    }
}

pub fn build_collective_ops(n: usize) -> Result<CollectiveOps> {
    build_collective_ops_with_max(n, DEFAULT_MAX_QUBITS)
}

pub fn build_collective_ops_with_max(n: usize, max: usize) -> Result<CollectiveOps> {
    if n == 0 {
        return Err(Error::range("N", "need at least one bath qubit"));
    }
    if n > max {
        return Err(Error::TooManyQubits { n, max });
    }
    let basis = BasisOrdering::new(n);
    let dim = basis.dim();
    // σᵢ⁻ clears bit i: column = state with the bit set, row = state without it.
    let mut j_minus = SparseMatrix::new(dim, dim);
    for col in 0..dim {
        let b = basis.binary_of(col);
        for q in 0..n {
            if b >> q & 1 == 1 {
                j_minus.push(basis.storage_of(b & !(1 << q)), col, C64::new(1.0, 0.0));
            }
        }
    }
    let j_plus = j_minus.adjoint();
    let j_plus_j_minus = j_plus.matmul(&j_minus)?;
    let j_minus_j_plus = j_minus.matmul(&j_plus)?;
    let j_minus_sq = j_minus.matmul(&j_minus)?;
    Ok(CollectiveOps { basis, j_plus, j_minus, j_plus_j_minus, j_minus_j_plus, j_minus_sq })
}

/// Fully symmetric Dicke state with `k` excitations, in storage order.
pub fn symmetric_dicke_vector(n: usize, k: usize) -> Result<Vec<C64>> {
    if k > n {
        return Err(Error::range("k", format!("{k} excitations for {n} qubits")));
    }
    let basis = BasisOrdering::new(n);
    let mut v = vec![ZERO; basis.dim()];
    let range = basis.block_range(k);
    let amp = C64::new(1.0 / (range.len() as f64).sqrt(), 0.0);
    for s in range {
        v[s] = amp;
    }
    Ok(v)
}

/// Isometry whose column `k` is the symmetric Dicke state with `k` excitations.
pub fn dicke_ladder_transform(n: usize) -> ComplexMatrix {
    let basis = BasisOrdering::new(n);
    let mut t = ComplexMatrix::zeros(basis.dim(), n + 1);
    for k in 0..=n {
        let range = basis.block_range(k);
        let amp = C64::new(1.0 / (range.len() as f64).sqrt(), 0.0);
        for s in range {
            t[(s, k)] = amp;
        }
    }
    t
}
