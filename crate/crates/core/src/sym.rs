//! Symmetric powers: multiset bases and induced actions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::linalg::{LinearMap, SparseVec};
use crate::rational::Rational;

/// Basis of `Sym^k(V)` for `dim V = dim`: non-decreasing index sequences of
/// length `k` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymBasis {
    dim: usize,
    k: usize,
    elements: Vec<Vec<usize>>,
    index: BTreeMap<Vec<usize>, usize>,
}

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

impl SymBasis {
    pub fn new(dim: usize, k: usize) -> Self {
        let mut elements = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..dim {
                cur.push(i);
                rec(dim, k, i, cur, out);
                cur.pop();
            }
        }
        rec(dim, k, 0, &mut cur, &mut elements);
        let index = elements.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        SymBasis {
            dim,
            k,
            elements,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &[usize] {
        &self.elements[i]
    }

    /// Index of a multiset given in any order.
    pub fn index_of(&self, multiset: &[usize]) -> Option<usize> {
        let mut m = multiset.to_vec();
        m.sort_unstable();
        self.index.get(&m).copied()
    }
}

/// Extension of a linear action `a: V → V` to `Sym^k(V)` as a derivation:
/// `a(v_1 ⊙ … ⊙ v_k) = Σ_j v_1 ⊙ … ⊙ a(v_j) ⊙ … ⊙ v_k`.
pub fn derivation_action(a: &LinearMap, basis: &SymBasis) -> LinearMap {
    let columns = basis
        .elements()
        .iter()
        .map(|m| {
            let mut pairs: Vec<(usize, Rational)> = Vec::new();
            let mut buf = m.clone();
            for pos in 0..m.len() {
                for (b, coeff) in a.column(m[pos]).iter() {
                    buf.copy_from_slice(m);
                    buf[pos] = b;
                    let idx = basis.index_of(&buf).expect("same degree");
                    pairs.push((idx, coeff.clone()));
                }
            }
            SparseVec::from_pairs(pairs)
        })
        .collect();
    LinearMap::from_columns(basis.len(), columns)
}
