//! Finite cochain complexes over the rationals and their cohomology.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{ColumnReduction, Echelon, LinearMap, SparseVec};

/// `dims[q]` with differentials `d_q: C^q → C^{q+1}` for `q + 1 < dims.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    dims: Vec<usize>,
    differentials: Vec<LinearMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyGroup {
    pub dim: usize,
    /// Cocycles whose classes form a basis, in cochain coordinates.
    pub representatives: Vec<SparseVec>,
}

/// Result of checking `d_{q+1} ∘ d_q = 0` along a sequence of maps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NilpotencyReport {
    /// Degrees `q` where `d_{q+1} ∘ d_q ≠ 0`.
    pub failures: Vec<usize>,
}

impl NilpotencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_failing_degree(&self) -> Option<usize> {
        self.failures.iter().copied().max()
    }
}

/// Composes consecutive maps and records where the square is nonzero.
pub fn nilpotency_check(maps: &[LinearMap]) -> Result<NilpotencyReport> {
    let mut report = NilpotencyReport::default();
    for (q, pair) in maps.windows(2).enumerate() {
        if pair[1].cols() != pair[0].rows() {
            return Err(Error::mismatch("maps", pair[0].rows(), pair[1].cols()));
        }
        if !pair[1].compose(&pair[0])?.is_zero() {
            report.failures.push(q);
        }
    }
    Ok(report)
}

impl CochainComplex {
    /// Checks composability only; nilpotency is checked where cohomology is taken.
    pub fn new(dims: Vec<usize>, differentials: Vec<LinearMap>) -> Result<Self> {
        if differentials.len() + 1 != dims.len() && !(dims.is_empty() && differentials.is_empty()) {
            return Err(Error::mismatch(
                "differentials",
                dims.len().saturating_sub(1),
                differentials.len(),
            ));
        }
        for (q, d) in differentials.iter().enumerate() {
            if d.cols() != dims[q] {
                return Err(Error::mismatch("differential cols", dims[q], d.cols()));
            }
            if d.rows() != dims[q + 1] {
                return Err(Error::mismatch("differential rows", dims[q + 1], d.rows()));
            }
        }
        Ok(CochainComplex {
            dims,
            differentials,
        })
    }

    /// Complex with every differential zero.
    pub fn zero(dims: Vec<usize>) -> Self {
        let differentials = dims.windows(2).map(|w| LinearMap::zero(w[1], w[0])).collect();
        CochainComplex {
            dims,
            differentials,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn differentials(&self) -> &[LinearMap] {
        &self.differentials
    }

    /// `d_q`, or a zero map past either end.
    pub fn differential(&self, q: usize) -> LinearMap {
        match self.differentials.get(q) {
            Some(d) => d.clone(),
            None => LinearMap::zero(0, self.dims.get(q).copied().unwrap_or(0)),
        }
    }

    pub fn check_nilpotent(&self) -> Result<()> {
        let rep = nilpotency_check(&self.differentials)?;
        match rep.failures.first() {
            Some(&q) => Err(Error::NotNilpotent { degree: q }),
            None => Ok(()),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(q, &d)| if q % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Ranks of all differentials.
    pub fn ranks(&self) -> Vec<usize> {
        self.differentials.iter().map(LinearMap::rank).collect()
    }

    pub fn betti(&self) -> Result<Vec<usize>> {
        self.check_nilpotent()?;
        let ranks = self.ranks();
        Ok((0..self.dims.len())
            .map(|q| {
                let out = ranks.get(q).copied().unwrap_or(0);
                let inc = if q == 0 { 0 } else { ranks[q - 1] };
                self.dims[q] - out - inc
            })
            .collect())
    }

    /// Cohomology with representatives from the deterministic contraction.
    pub fn cohomology(&self) -> Result<Vec<CohomologyGroup>> {
        self.check_nilpotent()?;
        let c = Contraction::new(self);
        Ok((0..self.dims.len())
            .map(|q| {
                let representatives: Vec<SparseVec> =
                    (0..c.harmonic_dim(q)).map(|s| c.include(q, s)).collect();
                CohomologyGroup {
                    dim: representatives.len(),
                    representatives,
                }
            })
            .collect())
    }
}

/// Per-degree splitting data for one cochain space `C^q = B ⊕ H ⊕ C'`.
#[derive(Clone, Debug)]
struct DegreeSplit {
    /// Position of each cochain coordinate among the kernel coordinates
    /// (coordinates that are not pivot columns of `d_q`).
    zpos: Vec<Option<usize>>,
    /// Kernel coordinate list: `kernel_cols[z]` is the cochain index.
    kernel_cols: Vec<usize>,
    /// Kernel vector `k_j` for each kernel coordinate.
    kernel_vecs: Vec<SparseVec>,
    /// `im d_{q-1}` in kernel coordinates, tagged with preimages in `C^{q-1}`.
    boundary: Echelon,
    /// Kernel coordinates spanning the chosen cohomology complement.
    harmonic: Vec<usize>,
    /// Inverse of `harmonic`.
    harmonic_pos: Vec<Option<usize>>,
}

/// A strong deformation retraction of a complex onto its cohomology:
/// maps `ι`, `π`, `h` with `πι = 1`, `1 - ιπ = dh + hd`, and
/// `hι = 0`, `πh = 0`, `hh = 0`.
///
/// Built from column reduction of each differential: pivot columns `J`
/// give the complement `C' = span{e_j : j ∈ J}`, the non-pivot columns give
/// kernel vectors `k_j = e_j + (terms in J)`, and boundaries are reduced in
/// kernel coordinates to pick the cohomology basis.
#[derive(Clone, Debug)]
pub struct Contraction {
    splits: Vec<DegreeSplit>,
}

impl Contraction {
    pub fn new(complex: &CochainComplex) -> Self {
        Self::from_differentials(complex.dims(), complex.differentials())
    }

    /// `differentials[q]: C^q → C^{q+1}`; missing trailing maps are zero.
    pub fn from_differentials(dims: &[usize], differentials: &[LinearMap]) -> Self {
        let reductions: Vec<ColumnReduction> = (0..dims.len())
            .map(|q| match differentials.get(q) {
                Some(d) => ColumnReduction::new(d),
                None => ColumnReduction::new(&LinearMap::zero(0, dims[q])),
            })
            .collect();
        let mut splits = Vec::with_capacity(dims.len());
        for q in 0..dims.len() {
            let red = &reductions[q];
            let mut zpos = vec![None; dims[q]];
            let mut kernel_cols = Vec::new();
            let mut kernel_vecs = Vec::new();
            for (j, k) in &red.kernel_by_column {
                zpos[*j] = Some(kernel_cols.len());
                kernel_cols.push(*j);
                kernel_vecs.push(k.clone());
            }
            let mut boundary = Echelon::new(kernel_cols.len());
            if q > 0 {
                let prev = &reductions[q - 1].image;
                for (b, pre) in prev.vectors().iter().zip(prev.tags()) {
                    let restricted = b.reindex(|i| zpos[i]);
                    let inserted = boundary.insert_tagged(restricted, pre.clone());
                    debug_assert!(inserted.is_ok(), "restriction to kernel coordinates is injective on cocycles");
                }
            }
            let harmonic: Vec<usize> = (0..kernel_cols.len()).filter(|&z| !boundary.is_pivot(z)).collect();
            let mut harmonic_pos = vec![None; kernel_cols.len()];
            for (s, &z) in harmonic.iter().enumerate() {
                harmonic_pos[z] = Some(s);
            }
            splits.push(DegreeSplit {
                zpos,
                kernel_cols,
                kernel_vecs,
                boundary,
                harmonic,
                harmonic_pos,
            });
        }
        Contraction { splits }
    }

    pub fn degrees(&self) -> usize {
        self.splits.len()
    }

    pub fn harmonic_dim(&self, q: usize) -> usize {
        self.splits.get(q).map_or(0, |s| s.harmonic.len())
    }

    /// `ι(e_s)`: the representative cocycle of the `s`-th basis class.
    pub fn include(&self, q: usize, s: usize) -> SparseVec {
        let sp = &self.splits[q];
        sp.kernel_vecs[sp.harmonic[s]].clone()
    }

    pub fn include_vec(&self, q: usize, coeffs: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (s, c) in coeffs.iter() {
            out.axpy(c, &self.include(q, s));
        }
        out
    }

    fn split_cocycle(&self, q: usize, v: &SparseVec) -> (SparseVec, SparseVec) {
        let sp = &self.splits[q];
        let z = v.reindex(|i| sp.zpos[i]);
        sp.boundary.full_reduce(&z)
    }

    /// `π(v)` in cohomology-basis coordinates.
    pub fn project(&self, q: usize, v: &SparseVec) -> SparseVec {
        let sp = &self.splits[q];
        let (rem, _) = self.split_cocycle(q, v);
        rem.reindex(|z| sp.harmonic_pos[z])
    }

    /// `h(v) ∈ C^{q-1}`.
    pub fn homotopy(&self, q: usize, v: &SparseVec) -> SparseVec {
        if q == 0 {
            return SparseVec::new();
        }
        let (_, coeffs) = self.split_cocycle(q, v);
        self.splits[q].boundary.tag_of(&coeffs)
    }

    /// Cochain index of a kernel coordinate, for diagnostics.
    pub fn kernel_column(&self, q: usize, z: usize) -> usize {
        self.splits[q].kernel_cols[z]
    }
}

/// Human-readable summary used in reports: `"H^0=1 H^1=0 ..."`.
pub fn format_dims(dims: &[usize]) -> alloc::string::String {
    let parts: Vec<alloc::string::String> =
        dims.iter().enumerate().map(|(q, d)| format!("H^{q}={d}")).collect();
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn circle(m: usize) -> CochainComplex {
        let mut trip = Vec::new();
        for e in 0..m {
            trip.push((e, (e + 1) % m, q(1)));
            trip.push((e, e, q(-1)));
        }
        CochainComplex::new(vec![m, m], vec![LinearMap::from_triplets(m, m, trip).unwrap()]).unwrap()
    }

    #[test]
    fn circle_cohomology() {
        let h = circle(3).cohomology().unwrap();
        assert_eq!(h.iter().map(|g| g.dim).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn zero_complex_keeps_dims() {
        let c = CochainComplex::zero(vec![5, 0]);
        assert_eq!(c.betti().unwrap(), vec![5, 0]);
    }

    #[test]
    fn non_nilpotent_is_rejected() {
        let d0 = LinearMap::from_dense(&[vec![q(1)]]);
        let d1 = LinearMap::from_dense(&[vec![q(1)]]);
        let c = CochainComplex::new(vec![1, 1, 1], vec![d0, d1]).unwrap();
        assert_eq!(c.cohomology().unwrap_err(), Error::NotNilpotent { degree: 0 });
    }

    #[test]
    fn shape_errors() {
        let d = LinearMap::zero(2, 3);
        assert!(CochainComplex::new(vec![2, 2], vec![d]).is_err());
    }

    #[test]
    fn contraction_identities_on_small_complex() {
        // C^0 = Q^2 -> C^1 = Q^3 -> C^2 = Q^1
        let d0 = LinearMap::from_dense(&[vec![q(1), q(1)], vec![q(1), q(1)], vec![q(0), q(0)]]);
        let d1 = LinearMap::from_dense(&[vec![q(1), q(-1), q(0)]]);
        let c = CochainComplex::new(vec![2, 3, 1], vec![d0, d1]).unwrap();
        let k = Contraction::new(&c);
        assert_eq!(c.betti().unwrap(), vec![1, 1, 0]);
        for deg in 0..3 {
            for i in 0..c.dims()[deg] {
                let v = SparseVec::unit(i);
                // v - ιπ v == d h v + h d v
                let mut lhs = v.clone();
                lhs.axpy(&q(-1), &k.include_vec(deg, &k.project(deg, &v)));
                let hv = k.homotopy(deg, &v);
                let mut rhs = if deg > 0 { c.differential(deg - 1).apply(&hv) } else { SparseVec::new() };
                if deg + 1 < c.len() {
                    rhs = rhs.add(&k.homotopy(deg + 1, &c.differential(deg).apply(&v)));
                }
                assert_eq!(lhs, rhs, "degree {deg}, basis {i}");
            }
        }
    }
}
