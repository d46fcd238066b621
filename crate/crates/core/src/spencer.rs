//! Vertical complexes on `Sym^*(𝔤)`: the Spencer operator δ_𝔤 and the
//! Chevalley–Eilenberg complexes `Λ^q 𝔤* ⊗ Sym^k`, with cohomology and
//! invariant-polynomial dimensions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{nilpotency_check, CochainComplex, NilpotencyReport};
use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::linalg::{LinearMap, SparseVec};
use crate::rational::Rational;
use crate::sym::{derivation_action, SymBasis};

/// How the free index `i` in `Σ_i e_i ⊙ … [e_i, X_j] …` is paired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairingMode {
    /// The literal formula in the given basis.
    Raw,
    /// `e_i` is replaced by its Killing dual `ě_i`, making the operator basis-independent.
    KillingDual,
}

impl PairingMode {
    /// Killing-dual for semisimple algebras, raw otherwise.
    pub fn default_for(alg: &LieAlgebra) -> Self {
        if alg.is_semisimple() {
            PairingMode::KillingDual
        } else {
            PairingMode::Raw
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairingMode::Raw => "raw",
            PairingMode::KillingDual => "killing_dual",
        }
    }
}

impl core::str::FromStr for PairingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(PairingMode::Raw),
            "killing_dual" | "killing-dual" => Ok(PairingMode::KillingDual),
            _ => Err(Error::input("pairing_mode", format!("unknown mode {s:?}"))),
        }
    }
}

pub fn sym_power_basis(alg: &LieAlgebra, k: usize) -> SymBasis {
    SymBasis::new(alg.dim(), k)
}

/// Rows `i` of the pairing partner of `e_i`: `ě_i = Σ_l w[i][l] e_l`.
fn pairing_weights(alg: &LieAlgebra, mode: PairingMode) -> Result<Vec<Vec<Rational>>> {
    let d = alg.dim();
    match mode {
        PairingMode::Raw => Ok((0..d)
            .map(|i| (0..d).map(|l| if i == l { Rational::one() } else { Rational::zero() }).collect())
            .collect()),
        PairingMode::KillingDual => alg.killing_form().inverse().ok_or_else(|| {
            Error::UnsupportedAlgebra(format!(
                "{}: Killing form is degenerate; killing_dual pairing unavailable",
                alg.name()
            ))
        }),
    }
}

/// Matrix of `δ_𝔤: Sym^k(𝔤) → Sym^{k+1}(𝔤)`,
/// `δ(X_1 ⊙ … ⊙ X_k) = Σ_i Σ_j ě_i ⊙ X_1 ⊙ … ⊙ [e_i, X_j] ⊙ … ⊙ X_k`.
pub fn spencer_differential(alg: &LieAlgebra, k: usize, mode: PairingMode) -> Result<LinearMap> {
    if k == 0 {
        return Err(Error::input("k", "Spencer differential is defined for k >= 1"));
    }
    spencer_map(alg, k, mode)
}

/// Same formula but also accepting `k = 0`, where the sum is empty.
pub(crate) fn spencer_map(alg: &LieAlgebra, k: usize, mode: PairingMode) -> Result<LinearMap> {
    let weights = pairing_weights(alg, mode)?;
    let src = sym_power_basis(alg, k);
    let dst = sym_power_basis(alg, k + 1);
    let d = alg.dim();
    let mut columns = Vec::with_capacity(src.len());
    let mut buf = Vec::with_capacity(k + 1);
    for m in src.elements() {
        let mut pairs = Vec::new();
        for i in 0..d {
            for pos in 0..m.len() {
                for (n, c) in alg.bracket_basis(i, m[pos]) {
                    for (l, w) in weights[i].iter().enumerate() {
                        if w.is_zero() {
                            continue;
                        }
                        buf.clear();
                        buf.extend_from_slice(m);
                        buf[pos] = n;
                        buf.push(l);
                        let row = dst.index_of(&buf).expect("degree k+1");
                        pairs.push((row, c * w));
                    }
                }
            }
        }
        columns.push(SparseVec::from_pairs(pairs));
    }
    Ok(LinearMap::from_columns(dst.len(), columns)
        .with_tags(format!("Sym^{k}({})", alg.name()), format!("Sym^{}({})", k + 1, alg.name())))
}

/// Chain `δ: Sym^1 → Sym^2 → … → Sym^{kmax+1}`.
pub fn spencer_chain(alg: &LieAlgebra, kmax: usize, mode: PairingMode) -> Result<Vec<LinearMap>> {
    (1..=kmax).map(|k| spencer_differential(alg, k, mode)).collect()
}

/// Verdict on `δ² = 0` for one algebra and mode, cross-checked against a
/// symmetric-tensor evaluation that shares no code with the matrix assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpencerNilpotencyFinding {
    pub algebra: String,
    pub mode: PairingMode,
    pub kmax: usize,
    pub matrix_report: NilpotencyReport,
    /// Degrees where the tensor oracle finds `δ² ≠ 0`.
    pub oracle_failures: Vec<usize>,
    /// Degrees where the two routes disagree on the value of `δ²`.
    pub disagreements: Vec<usize>,
    /// Frobenius norm squared of `δ_{k+1} δ_k` per degree `k = 1..kmax-1`.
    pub square_norms: Vec<Rational>,
}

impl SpencerNilpotencyFinding {
    pub fn verdict(&self) -> &'static str {
        if !self.disagreements.is_empty() {
            "implementation bug"
        } else if self.matrix_report.passed() {
            "nilpotent"
        } else {
            "nilpotency claim violated"
        }
    }
}

pub fn spencer_nilpotency_finding(alg: &LieAlgebra, kmax: usize, mode: PairingMode) -> Result<SpencerNilpotencyFinding> {
    let chain = spencer_chain(alg, kmax, mode)?;
    let matrix_report = nilpotency_check(&chain)?;
    let weights = pairing_weights(alg, mode)?;
    let mut oracle_failures = Vec::new();
    let mut disagreements = Vec::new();
    let mut square_norms = Vec::new();
    for k in 1..kmax {
        let sq = chain[k].compose(&chain[k - 1])?;
        let norm = sq.triplets().fold(Rational::zero(), |acc, (_, _, v)| &acc + &(v * v));
        square_norms.push(norm);
        let src = sym_power_basis(alg, k);
        let dst = sym_power_basis(alg, k + 2);
        let mut failed = false;
        let mut disagree = false;
        for (col, m) in src.elements().iter().enumerate() {
            let t = symmetrize(&[(m.clone(), Rational::one())]);
            let t2 = tensor_spencer(alg, &weights, &tensor_spencer(alg, &weights, &t));
            if !t2.is_empty() {
                failed = true;
            }
            // Compare against the symmetrized image of the matrix result.
            let image: Vec<(Vec<usize>, Rational)> = sq
                .column(col)
                .iter()
                .map(|(r, v)| (dst.element(r).to_vec(), v.clone()))
                .collect();
            if symmetrize(&image) != t2 {
                disagree = true;
            }
        }
        if failed {
            oracle_failures.push(k - 1);
        }
        if disagree {
            disagreements.push(k - 1);
        }
    }
    Ok(SpencerNilpotencyFinding {
        algebra: alg.name().into(),
        mode,
        kmax,
        matrix_report,
        oracle_failures,
        disagreements,
        square_norms,
    })
}

type Tensor = BTreeMap<Vec<usize>, Rational>;

fn add_into(t: &mut Tensor, key: Vec<usize>, v: Rational) {
    if v.is_zero() {
        return;
    }
    use alloc::collections::btree_map::Entry;
    match t.entry(key) {
        Entry::Vacant(e) => {
            e.insert(v);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += &v;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Image of monomials under `Sym^k → T^k`, `m ↦ (1/k!) Σ_σ e_{m_σ(1)} ⊗ … ⊗ e_{m_σ(k)}`.
fn symmetrize(poly: &[(Vec<usize>, Rational)]) -> Tensor {
    let mut out = Tensor::new();
    for (m, c) in poly {
        let perms = permutations(m.len());
        let w = c / &Rational::from_int(factorial(m.len()));
        for p in &perms {
            let key: Vec<usize> = p.iter().map(|&i| m[i]).collect();
            add_into(&mut out, key, w.clone());
        }
    }
    out
}

/// Tensor-level operator `t ↦ Sym(Σ_i ě_i ⊗ D_i t)` with `D_i` the
/// derivation extension of `ad e_i`.
fn tensor_spencer(alg: &LieAlgebra, weights: &[Vec<Rational>], t: &Tensor) -> Tensor {
    let d = alg.dim();
    let mut raw = Tensor::new();
    for (key, c) in t {
        for i in 0..d {
            for pos in 0..key.len() {
                for (n, s) in alg.bracket_basis(i, key[pos]) {
                    for (l, w) in weights[i].iter().enumerate() {
                        if w.is_zero() {
                            continue;
                        }
                        let mut out = Vec::with_capacity(key.len() + 1);
                        out.push(l);
                        out.extend_from_slice(key);
                        out[pos + 1] = n;
                        add_into(&mut raw, out, &(c * s) * w);
                    }
                }
            }
        }
    }
    // Symmetrize the result (average over permutations of positions).
    let mut out = Tensor::new();
    for (key, c) in &raw {
        let perms = permutations(key.len());
        let w = c / &Rational::from_int(factorial(key.len()));
        for p in &perms {
            let k2: Vec<usize> = p.iter().map(|&i| key[i]).collect();
            add_into(&mut out, k2, w.clone());
        }
    }
    out
}

/// Action of `𝔤` on a coefficient module, one matrix per basis element.
#[derive(Clone, Debug)]
pub struct Module {
    pub name: String,
    pub dim: usize,
    pub action: Vec<LinearMap>,
}

impl Module {
    /// `Sym^k(𝔤)` with the adjoint-induced action.
    pub fn sym_adjoint(alg: &LieAlgebra, k: usize) -> Self {
        let basis = sym_power_basis(alg, k);
        Module {
            name: format!("Sym^{k}({})", alg.name()),
            dim: basis.len(),
            action: (0..alg.dim()).map(|i| derivation_action(&alg.ad_map(i), &basis)).collect(),
        }
    }

    /// `Sym^k(𝔤*)` with the coadjoint-induced action.
    pub fn sym_coadjoint(alg: &LieAlgebra, k: usize) -> Self {
        let basis = sym_power_basis(alg, k);
        Module {
            name: format!("Sym^{k}({}*)", alg.name()),
            dim: basis.len(),
            action: (0..alg.dim()).map(|i| derivation_action(&alg.coad_map(i), &basis)).collect(),
        }
    }
}

/// Sorted `q`-subsets of `0..n` in lexicographic order, as bitmasks.
fn subsets(n: usize, q: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..(1u32 << n)).filter(|m| m.count_ones() as usize == q).collect();
    out.sort_by_key(|m| {
        let mut v: Vec<usize> = (0..n).filter(|i| m & (1 << i) != 0).collect();
        v.resize(n, usize::MAX);
        v
    });
    out
}

/// Number of set bits of `mask` strictly below `bit`.
fn rank_below(mask: u32, bit: usize) -> usize {
    (mask & ((1u32 << bit) - 1)).count_ones() as usize
}

/// Chevalley–Eilenberg complex `C^q = Λ^q 𝔤* ⊗ V` with
/// `(dω)(x_0..x_q) = Σ_i (-1)^i x_i·ω(…x̂_i…) + Σ_{i<l} (-1)^{i+l} ω([x_i,x_l], …x̂_i…x̂_l…)`.
/// Coordinates are `subset_index * dim V + module_index`.
pub fn ce_complex_with_module(alg: &LieAlgebra, module: &Module) -> Result<CochainComplex> {
    let n = alg.dim();
    if n > 16 {
        return Err(Error::input("algebra", "CE complex supports dim <= 16"));
    }
    if module.action.len() != n {
        return Err(Error::mismatch("module action", n, module.action.len()));
    }
    let dv = module.dim;
    let levels: Vec<Vec<u32>> = (0..=n).map(|q| subsets(n, q)).collect();
    let pos: Vec<BTreeMap<u32, usize>> = levels
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, &m)| (m, i)).collect())
        .collect();
    let sign = |k: usize| if k.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    let mut differentials = Vec::with_capacity(n);
    for q in 0..n {
        let rows = levels[q + 1].len() * dv;
        let mut trip: Vec<(usize, usize, Rational)> = Vec::new();
        for (si, &mask) in levels[q].iter().enumerate() {
            // Term 1: J = I ∪ {a}, coefficient (-1)^{pos of a in J} ρ(e_a).
            for a in 0..n {
                if mask & (1 << a) != 0 {
                    continue;
                }
                let j = mask | (1 << a);
                let sgn = sign(rank_below(j, a));
                let jrow = pos[q + 1][&j] * dv;
                for m in 0..dv {
                    for (mp, c) in module.action[a].column(m).iter() {
                        trip.push((jrow + mp, si * dv + m, &sgn * c));
                    }
                }
            }
            // Term 2: remove c from I (ω(e_c, rest) = (-1)^{pos of c} ω(I)), then
            // J = rest ∪ {x, y} with [e_x, e_y] having an e_c component.
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let rest = mask & !(1 << c);
                let s_c = sign(rank_below(mask, c));
                for x in 0..n {
                    if rest & (1 << x) != 0 {
                        continue;
                    }
                    for y in x + 1..n {
                        if rest & (1 << y) != 0 {
                            continue;
                        }
                        let coeff = alg.constant(x, y, c);
                        if coeff.is_zero() {
                            continue;
                        }
                        let j = rest | (1 << x) | (1 << y);
                        let (ix, iy) = (rank_below(j, x), rank_below(j, y));
                        let total = &(&sign(ix + iy) * coeff) * &s_c;
                        let jrow = pos[q + 1][&j] * dv;
                        for m in 0..dv {
                            trip.push((jrow + m, si * dv + m, total.clone()));
                        }
                    }
                }
            }
        }
        let d = LinearMap::from_triplets(rows, levels[q].len() * dv, trip)?
            .with_tags(format!("Λ^{q}⊗{}", module.name), format!("Λ^{}⊗{}", q + 1, module.name));
        differentials.push(d);
    }
    let dims = levels.iter().map(|l| l.len() * dv).collect();
    let complex = CochainComplex::new(dims, differentials)?;
    if let Err(Error::NotNilpotent { degree }) = complex.check_nilpotent() {
        panic!("CE differential not nilpotent at degree {degree} for {}", module.name);
    }
    Ok(complex)
}

/// `Λ^* 𝔤* ⊗ Sym^k(𝔤)` with the adjoint-induced action.
pub fn ce_complex(alg: &LieAlgebra, k: usize) -> Result<CochainComplex> {
    ce_complex_with_module(alg, &Module::sym_adjoint(alg, k))
}

/// `Λ^* 𝔤* ⊗ Sym^k(𝔤*)` with the coadjoint-induced action.
pub fn ce_complex_dual(alg: &LieAlgebra, k: usize) -> Result<CochainComplex> {
    ce_complex_with_module(alg, &Module::sym_coadjoint(alg, k))
}

/// `dim (Sym^j 𝔤*)^𝔤`: nullity of all coadjoint-induced actions stacked.
pub fn invariants_dimension(alg: &LieAlgebra, j: usize) -> usize {
    let module = Module::sym_coadjoint(alg, j);
    let mut stacked = LinearMap::zero(0, module.dim);
    for a in &module.action {
        stacked = stacked.vstack(a).expect("same domain");
    }
    module.dim - stacked.rank()
}

/// Which vertical differential a Spencer double complex uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerticalMode {
    /// `Sym^q(𝔤)` with `δ_𝔤`.
    Spencer,
    /// `Λ^q 𝔤* ⊗ Sym^k(𝔤)` with the CE differential, one slice per `k`.
    Ce,
}

impl VerticalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerticalMode::Spencer => "spencer",
            VerticalMode::Ce => "ce",
        }
    }
}

impl core::str::FromStr for VerticalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spencer" => Ok(VerticalMode::Spencer),
            "ce" => Ok(VerticalMode::Ce),
            _ => Err(Error::input("vertical_mode", format!("unknown mode {s:?}"))),
        }
    }
}

/// Cohomology summary for one vertical complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub mode: VerticalMode,
    pub k: usize,
    pub dims: Vec<usize>,
    pub euler: i64,
}

/// The vertical complex on its own: CE with `Sym^k` coefficients, or the
/// Spencer chain `Sym^0 → … → Sym^{kmax}` (then `k` is the top degree).
pub fn vertical_complex(alg: &LieAlgebra, k: usize, mode: VerticalMode, pairing: PairingMode) -> Result<CochainComplex> {
    match mode {
        VerticalMode::Ce => ce_complex(alg, k),
        VerticalMode::Spencer => {
            let dims: Vec<usize> = (0..=k).map(|q| sym_power_basis(alg, q).len()).collect();
            let maps = (0..k).map(|q| spencer_map(alg, q, pairing)).collect::<Result<Vec<_>>>()?;
            CochainComplex::new(dims, maps)
        }
    }
}

pub fn cohomology_report(alg: &LieAlgebra, k: usize, mode: VerticalMode, pairing: PairingMode) -> Result<CohomologyReport> {
    let complex = vertical_complex(alg, k, mode, pairing)?;
    let dims = complex.betti()?;
    Ok(CohomologyReport {
        mode,
        k,
        euler: complex.euler_characteristic(),
        dims,
    })
}
