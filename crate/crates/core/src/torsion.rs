//! Torsion terms of Spencer cohomology: the closed-form sum over curvature
//! powers, the filtration definition from `E_∞`, and the classical part.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::derham::{BaseModel, CurvatureMode};
use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::spencer::invariants_dimension;
use crate::specseq::SpectralSequence;

/// One `(i, j)` term `H^i ⊗ (Sym^j 𝔤*)^𝔤 ⊗ [Ω]^j` with `i + 2j = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionTerm {
    pub i: usize,
    pub j: usize,
    pub b_i: usize,
    pub inv_dim_j: usize,
    pub marker_nonzero: bool,
    pub contribution: usize,
}

/// One `p < k` term `H^p ⊗ (Sym^{k-p} 𝔤*)^𝔤` of the unreindexed sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofFormTerm {
    pub p: usize,
    pub b_p: usize,
    pub inv_dim: usize,
    pub contribution: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionReport {
    pub k: usize,
    pub mode: CurvatureMode,
    pub terms: Vec<TorsionTerm>,
    pub total_dim: usize,
    pub classical_dim: usize,
    pub proof_form: Vec<ProofFormTerm>,
    pub proof_form_total: usize,
}

impl TorsionReport {
    /// The two closed forms disagree.
    pub fn discrepancy(&self) -> bool {
        self.total_dim != self.proof_form_total
    }
}

/// `Σ_{i+2j=k, j≥1, i≤n} b_i · dim (Sym^j 𝔤*)^𝔤 · [[Ω]^j ≠ 0]`, with the
/// sum `Σ_{p<k} b_p · dim (Sym^{k-p} 𝔤*)^𝔤` alongside.
pub fn torsion_case1(base: &BaseModel, alg: &LieAlgebra, k: usize, mode: CurvatureMode) -> Result<TorsionReport> {
    if mode == CurvatureMode::Ring && base.curvature_class().is_none() {
        return Err(Error::input(
            "curvature_class",
            format!("ring mode needs a curvature class on base {}", base.name),
        ));
    }
    let betti = base.betti();
    let b = |i: usize| betti.get(i).copied().unwrap_or(0);
    let mut terms = Vec::new();
    for j in 1..=k / 2 {
        let i = k - 2 * j;
        if i > base.n {
            continue;
        }
        let inv = invariants_dimension(alg, j);
        let marker = base.cup_power(j, mode)?;
        terms.push(TorsionTerm {
            i,
            j,
            b_i: b(i),
            inv_dim_j: inv,
            marker_nonzero: marker,
            contribution: if marker { b(i) * inv } else { 0 },
        });
    }
    terms.sort_by_key(|t| t.i);
    let proof_form: Vec<ProofFormTerm> = (0..k.min(base.n + 1))
        .map(|p| {
            let inv = invariants_dimension(alg, k - p);
            ProofFormTerm {
                p,
                b_p: b(p),
                inv_dim: inv,
                contribution: b(p) * inv,
            }
        })
        .collect();
    Ok(TorsionReport {
        k,
        mode,
        total_dim: terms.iter().map(|t| t.contribution).sum(),
        classical_dim: b(k),
        proof_form_total: proof_form.iter().map(|t| t.contribution).sum(),
        terms,
        proof_form,
    })
}

/// `Σ_{p<k} dim E_∞^{p,k-p}`, summed over all slices.
pub fn torsion_case2(seqs: &[SpectralSequence], k: usize) -> Result<usize> {
    let top = seqs.iter().map(SpectralSequence::max_total_degree).max().unwrap_or(0);
    if seqs.is_empty() || k > top {
        return Err(Error::input("k", format!("total degree {k} exceeds available range 0..={top}")));
    }
    Ok(seqs
        .iter()
        .map(|s| {
            (0..k.min(s.pmax + 1))
                .filter(|&p| k - p <= s.qmax)
                .map(|p| s.stable().dim(p, k - p))
                .sum::<usize>()
        })
        .sum())
}

/// `E_∞^{k,0}` summed over slices.
pub fn edge_term(seqs: &[SpectralSequence], k: usize) -> usize {
    seqs.iter().map(|s| if k <= s.pmax { s.stable().dim(k, 0) } else { 0 }).sum()
}

/// `b_k`.
pub fn classical_part(base: &BaseModel, k: usize) -> Result<usize> {
    if k > base.n {
        return Err(Error::input("k", format!("k = {k} exceeds base dimension {}", base.n)));
    }
    Ok(base.betti()[k])
}

/// `Σ_{p<k} b_p · dim H^{k-p}` summed over slices: the torsion predicted by
/// an `E_2 = H(base) ⊗ H(vertical)` page that degenerates.
pub fn e2_torsion_sum(base: &BaseModel, vertical_cohomology: &[Vec<usize>], k: usize) -> usize {
    let betti = base.betti();
    vertical_cohomology
        .iter()
        .map(|h| {
            (0..k.min(betti.len()))
                .filter_map(|p| h.get(k - p).map(|&d| betti[p] * d))
                .sum::<usize>()
        })
        .sum()
}

/// Case 1 contributions grouped by the curvature weight `j`.
pub fn weight_decomposition(report: &TorsionReport) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for t in &report.terms {
        *out.entry(t.j).or_insert(0) += t.contribution;
    }
    out
}
