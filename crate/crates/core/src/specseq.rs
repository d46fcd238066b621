//! Double complexes and their column-filtration spectral sequences.
//!
//! Pages are computed on a small model: each column is contracted onto its
//! vertical cohomology, the horizontal differential is transferred by the
//! zig-zag `δ_r = π d_h (-h d_h)^{r-1} ι`, and the filtered complex so
//! obtained is quasi-isomorphic to the total complex as a filtered complex.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{CochainComplex, Contraction};
use crate::derham::BaseModel;
use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::linalg::{rank_of, Echelon, LinearMap, SparseVec};
use crate::rational::Rational;
use crate::spencer::{ce_complex, vertical_complex, PairingMode, VerticalMode};

/// `K^{p,q} = C^p(base) ⊗ V^q` with `d_h = d ⊗ 1` and `d_v = (-1)^p 1 ⊗ d_V`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ProductStructure {
    vertical: CochainComplex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleComplex {
    pub label: String,
    /// Conserved `Sym` degree of a CE slice.
    pub slice: Option<usize>,
    pmax: usize,
    qmax: usize,
    dims: Vec<Vec<usize>>,
    dh: Vec<Vec<LinearMap>>,
    dv: Vec<Vec<LinearMap>>,
    product: Option<ProductStructure>,
}

/// Outcome of checking `d_h² = 0`, `d_v² = 0`, `d_h d_v + d_v d_h = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BicomplexReport {
    /// `(identity, p, q)` for every failing bidegree, in scan order.
    pub failures: Vec<(&'static str, usize, usize)>,
    pub checked: usize,
}

impl BicomplexReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<(&'static str, usize, usize)> {
        self.failures.first().copied()
    }
}

pub const ID_DH2: &str = "d_h^2 = 0";
pub const ID_DV2: &str = "d_v^2 = 0";
pub const ID_ANTI: &str = "d_h d_v + d_v d_h = 0";

impl DoubleComplex {
    /// `dh[p][q]: K^{p,q} → K^{p+1,q}` for `p < pmax`, `dv[p][q]: K^{p,q} → K^{p,q+1}`
    /// for `q < qmax`. Shapes are checked; the bicomplex identities are not.
    pub fn from_parts(
        label: impl Into<String>,
        dims: Vec<Vec<usize>>,
        dh: Vec<Vec<LinearMap>>,
        dv: Vec<Vec<LinearMap>>,
    ) -> Result<Self> {
        if dims.is_empty() || dims[0].is_empty() {
            return Err(Error::input("dims", "double complex needs at least one bidegree"));
        }
        let pmax = dims.len() - 1;
        let qmax = dims[0].len() - 1;
        if dims.iter().any(|c| c.len() != qmax + 1) {
            return Err(Error::input("dims", "ragged bidegree table"));
        }
        if dh.len() != pmax || dv.len() != pmax + 1 {
            return Err(Error::mismatch("differential columns", pmax, dh.len()));
        }
        for p in 0..=pmax {
            for q in 0..=qmax {
                if p < pmax {
                    let m = dh[p].get(q).ok_or_else(|| Error::mismatch("d_h rows", qmax + 1, dh[p].len()))?;
                    if m.cols() != dims[p][q] || m.rows() != dims[p + 1][q] {
                        return Err(Error::input("d_h", format!("wrong shape at ({p}, {q})")));
                    }
                }
                if q < qmax {
                    let m = dv[p].get(q).ok_or_else(|| Error::mismatch("d_v rows", qmax, dv[p].len()))?;
                    if m.cols() != dims[p][q] || m.rows() != dims[p][q + 1] {
                        return Err(Error::input("d_v", format!("wrong shape at ({p}, {q})")));
                    }
                }
            }
        }
        Ok(DoubleComplex {
            label: label.into(),
            slice: None,
            pmax,
            qmax,
            dims,
            dh,
            dv,
            product: None,
        })
    }

    /// `C^* ⊗ V^*` with the sign `(-1)^p` on the vertical differential.
    pub fn product(label: impl Into<String>, base: &CochainComplex, vertical: &CochainComplex) -> Result<Self> {
        let bd = base.dims();
        let vd = vertical.dims();
        if bd.is_empty() || vd.is_empty() {
            return Err(Error::input("complex", "empty factor"));
        }
        let dims: Vec<Vec<usize>> = bd.iter().map(|&a| vd.iter().map(|&b| a * b).collect()).collect();
        let dh = (0..bd.len() - 1)
            .map(|p| {
                let d = base.differential(p);
                (0..vd.len()).map(|q| d.kron(&LinearMap::identity(vd[q]))).collect()
            })
            .collect();
        let dv = (0..bd.len())
            .map(|p| {
                let sign = if p % 2 == 0 { Rational::one() } else { -Rational::one() };
                (0..vd.len() - 1)
                    .map(|q| LinearMap::identity(bd[p]).kron(&vertical.differential(q)).scaled(&sign))
                    .collect()
            })
            .collect();
        let mut k = Self::from_parts(label, dims, dh, dv)?;
        k.product = Some(ProductStructure {
            vertical: vertical.clone(),
        });
        Ok(k)
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    pub fn qmax(&self) -> usize {
        self.qmax
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.dims.get(p).and_then(|c| c.get(q)).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &[Vec<usize>] {
        &self.dims
    }

    pub fn dh(&self, p: usize, q: usize) -> &LinearMap {
        &self.dh[p][q]
    }

    pub fn dv(&self, p: usize, q: usize) -> &LinearMap {
        &self.dv[p][q]
    }

    pub fn max_total_degree(&self) -> usize {
        self.pmax + self.qmax
    }

    pub fn check(&self) -> BicomplexReport {
        let mut rep = BicomplexReport::default();
        for p in 0..=self.pmax {
            for q in 0..=self.qmax {
                if p + 2 <= self.pmax {
                    rep.checked += 1;
                    if !self.dh[p + 1][q].compose(&self.dh[p][q]).expect("shapes").is_zero() {
                        rep.failures.push((ID_DH2, p, q));
                    }
                }
                if q + 2 <= self.qmax {
                    rep.checked += 1;
                    if !self.dv[p][q + 1].compose(&self.dv[p][q]).expect("shapes").is_zero() {
                        rep.failures.push((ID_DV2, p, q));
                    }
                }
                if p < self.pmax && q < self.qmax {
                    rep.checked += 1;
                    let a = self.dv[p + 1][q].compose(&self.dh[p][q]).expect("shapes");
                    let b = self.dh[p][q + 1].compose(&self.dv[p][q]).expect("shapes");
                    if !a.add(&b).expect("shapes").is_zero() {
                        rep.failures.push((ID_ANTI, p, q));
                    }
                }
            }
        }
        rep
    }

    fn tot_offset(&self, n: usize, p: usize) -> usize {
        (0..p).filter(|&i| n >= i && n - i <= self.qmax).map(|i| self.dims[i][n - i]).sum()
    }

    pub fn tot_dim(&self, n: usize) -> usize {
        (0..=self.pmax.min(n)).filter(|&p| n - p <= self.qmax).map(|p| self.dims[p][n - p]).sum()
    }

    /// Coordinates of `v ∈ K^{p,q}` inside `Tot^{p+q}`.
    pub fn embed(&self, p: usize, q: usize, v: &SparseVec) -> SparseVec {
        v.shifted(self.tot_offset(p + q, p))
    }

    /// `D = d_h + d_v: Tot^n → Tot^{n+1}`.
    pub fn total_differential(&self, n: usize) -> LinearMap {
        let rows = self.tot_dim(n + 1);
        let mut trip = Vec::new();
        for p in 0..=self.pmax.min(n) {
            let q = n - p;
            if q > self.qmax {
                continue;
            }
            let src = self.tot_offset(n, p);
            if p < self.pmax {
                let dst = self.tot_offset(n + 1, p + 1);
                for (r, c, v) in self.dh[p][q].triplets() {
                    trip.push((dst + r, src + c, v.clone()));
                }
            }
            if q < self.qmax {
                let dst = self.tot_offset(n + 1, p);
                for (r, c, v) in self.dv[p][q].triplets() {
                    trip.push((dst + r, src + c, v.clone()));
                }
            }
        }
        LinearMap::from_triplets(rows, self.tot_dim(n), trip).expect("in range")
    }

    pub fn total_complex(&self) -> CochainComplex {
        let top = self.max_total_degree();
        let dims = (0..=top).map(|n| self.tot_dim(n)).collect();
        let maps = (0..top).map(|n| self.total_differential(n)).collect();
        CochainComplex::new(dims, maps).expect("consistent shapes")
    }
}

/// Builds the Spencer double complexes over `base`: a single complex with
/// `q ≤ kmax` in Spencer mode, one slice per `k = 0..=kmax` in CE mode.
/// Consumes only the cochain complex of `base`.
pub fn build_spencer_double(
    base: &BaseModel,
    alg: &LieAlgebra,
    kmax: usize,
    mode: VerticalMode,
    pairing: PairingMode,
) -> Result<Vec<DoubleComplex>> {
    if kmax == 0 {
        return Err(Error::input("kmax", "kmax must be at least 1"));
    }
    let verticals: Vec<(Option<usize>, CochainComplex)> = match mode {
        VerticalMode::Spencer => vec![(None, vertical_complex(alg, kmax, VerticalMode::Spencer, pairing)?)],
        VerticalMode::Ce => (0..=kmax).map(|k| Ok((Some(k), ce_complex(alg, k)?))).collect::<Result<_>>()?,
    };
    let mut out = Vec::with_capacity(verticals.len());
    for (slice, v) in verticals {
        let label = match slice {
            Some(k) => format!("{} x CE({}, Sym^{k})", base.name, alg.name()),
            None => format!("{} x Spencer({}, kmax={kmax}, {})", base.name, alg.name(), pairing.as_str()),
        };
        let mut k = DoubleComplex::product(label, base.complex(), &v)?;
        k.slice = slice;
        if let Some((identity, p, q)) = k.check().first_failure() {
            return Err(Error::Construction { identity, p, q });
        }
        out.push(k);
    }
    Ok(out)
}

pub fn check_bicomplex(k: &DoubleComplex) -> BicomplexReport {
    k.check()
}

/// Cohomology dimensions of the total complex, by direct rank computation.
pub fn total_cohomology(k: &DoubleComplex) -> Result<Vec<usize>> {
    k.total_complex().betti()
}

/// Vertical contraction of one column `K^{p,*}`.
enum ColumnContraction<'a> {
    Generic(Contraction),
    /// `1 ⊗ c` on `C^p ⊗ V`, with `h` negated for odd `p`.
    Product {
        inner: &'a Contraction,
        vdims: &'a [usize],
        odd: bool,
    },
}

impl ColumnContraction<'_> {
    fn harmonic_dim(&self, width: usize, q: usize) -> usize {
        match self {
            ColumnContraction::Generic(c) => c.harmonic_dim(q),
            ColumnContraction::Product { inner, .. } => width * inner.harmonic_dim(q),
        }
    }

    fn include(&self, q: usize, s: usize) -> SparseVec {
        match self {
            ColumnContraction::Generic(c) => c.include(q, s),
            ColumnContraction::Product { inner, vdims, .. } => {
                let hq = inner.harmonic_dim(q);
                let (a, t) = (s / hq, s % hq);
                inner.include(q, t).shifted(a * vdims[q])
            }
        }
    }

    /// Applies `f` blockwise to `v ∈ C^p ⊗ V^q`, writing into blocks of size `out_block`.
    fn blockwise(v: &SparseVec, block: usize, out_block: usize, f: impl Fn(&SparseVec) -> SparseVec) -> SparseVec {
        let mut out: Vec<(usize, Rational)> = Vec::new();
        let entries = v.entries();
        let mut i = 0;
        while i < entries.len() {
            let a = entries[i].0 / block;
            let mut j = i;
            let mut local = Vec::new();
            while j < entries.len() && entries[j].0 / block == a {
                local.push((entries[j].0 - a * block, entries[j].1.clone()));
                j += 1;
            }
            for (r, c) in f(&SparseVec::from_pairs(local)).iter() {
                out.push((a * out_block + r, c.clone()));
            }
            i = j;
        }
        SparseVec::from_pairs(out)
    }

    fn project(&self, q: usize, v: &SparseVec) -> SparseVec {
        match self {
            ColumnContraction::Generic(c) => c.project(q, v),
            ColumnContraction::Product { inner, vdims, .. } => {
                Self::blockwise(v, vdims[q], inner.harmonic_dim(q), |w| inner.project(q, w))
            }
        }
    }

    fn homotopy(&self, q: usize, v: &SparseVec) -> SparseVec {
        match self {
            ColumnContraction::Generic(c) => c.homotopy(q, v),
            ColumnContraction::Product { inner, vdims, odd } => {
                if q == 0 {
                    return SparseVec::new();
                }
                let h = Self::blockwise(v, vdims[q], vdims[q - 1], |w| inner.homotopy(q, w));
                if *odd {
                    h.scaled(&-Rational::one())
                } else {
                    h
                }
            }
        }
    }
}

/// Generator `(p, q, s)` of the reduced complex: the `s`-th class of `E_1^{p,q}`.
pub type Generator = (usize, usize, usize);

/// The filtered complex on `E_1` obtained by homotopy transfer.
#[derive(Clone, Debug)]
pub struct Transfer {
    pmax: usize,
    qmax: usize,
    e1: Vec<Vec<usize>>,
    /// Generators of each total degree, sorted by `p` then `s`.
    gens: Vec<Vec<Generator>>,
    /// `col_start[n][p]`: first index in degree `n` with column `≥ p` (length `pmax + 2`).
    col_start: Vec<Vec<usize>>,
    /// `D_T: T^n → T^{n+1}`.
    d: Vec<LinearMap>,
    /// `ι_∞: T^n → Tot^n`.
    lift: Vec<LinearMap>,
}

impl Transfer {
    pub fn new(k: &DoubleComplex) -> Self {
        let pmax = k.pmax;
        let qmax = k.qmax;
        let product_inner = k
            .product
            .as_ref()
            .map(|s| (Contraction::new(&s.vertical), s.vertical.dims().to_vec()));
        let columns: Vec<ColumnContraction> = (0..=pmax)
            .map(|p| match &product_inner {
                Some((inner, vdims)) => ColumnContraction::Product {
                    inner,
                    vdims,
                    odd: p % 2 == 1,
                },
                None => ColumnContraction::Generic(Contraction::from_differentials(&k.dims[p], &k.dv[p])),
            })
            .collect();
        let widths: Vec<usize> = match &product_inner {
            Some((_, vdims)) => (0..=pmax)
                .map(|p| {
                    (0..=qmax)
                        .find(|&q| vdims[q] > 0)
                        .map_or(0, |q| k.dims[p][q] / vdims[q])
                })
                .collect(),
            None => vec![0; pmax + 1],
        };
        let e1: Vec<Vec<usize>> = (0..=pmax)
            .map(|p| (0..=qmax).map(|q| columns[p].harmonic_dim(widths[p], q)).collect())
            .collect();
        let top = pmax + qmax;
        let mut gens = vec![Vec::new(); top + 2];
        let mut col_start = vec![vec![0; pmax + 2]; top + 2];
        let mut index: BTreeMap<Generator, usize> = BTreeMap::new();
        for n in 0..=top + 1 {
            for p in 0..=pmax {
                col_start[n][p] = gens[n].len();
                if n < p || n - p > qmax {
                    continue;
                }
                for s in 0..e1[p][n - p] {
                    index.insert((p, n - p, s), gens[n].len());
                    gens[n].push((p, n - p, s));
                }
            }
            col_start[n][pmax + 1] = gens[n].len();
        }
        let mut d = Vec::with_capacity(top + 1);
        let mut lift = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut dcols = Vec::with_capacity(gens[n].len());
            let mut lcols = Vec::with_capacity(gens[n].len());
            for &(p, q, s) in &gens[n] {
                let mut a = columns[p].include(q, s);
                let mut lifted = k.embed(p, q, &a);
                let mut image: Vec<(usize, Rational)> = Vec::new();
                let mut r = 1;
                while !a.is_zero() && p + r <= pmax && q + 1 >= r {
                    let (col, row) = (p + r, q + 1 - r);
                    let y = k.dh[col - 1][row].apply(&a);
                    for (t, c) in columns[col].project(row, &y).iter() {
                        image.push((index[&(col, row, t)], c.clone()));
                    }
                    if row == 0 {
                        break;
                    }
                    a = columns[col].homotopy(row, &y).scaled(&-Rational::one());
                    lifted = lifted.add(&k.embed(col, row - 1, &a));
                    r += 1;
                }
                dcols.push(SparseVec::from_pairs(image));
                lcols.push(lifted);
            }
            d.push(LinearMap::from_columns(gens[n + 1].len(), dcols));
            lift.push(LinearMap::from_columns(k.tot_dim(n), lcols));
        }
        Transfer {
            pmax,
            qmax,
            e1,
            gens,
            col_start,
            d,
            lift,
        }
    }

    pub fn e1_dims(&self) -> &[Vec<usize>] {
        &self.e1
    }

    pub fn degree_dim(&self, n: usize) -> usize {
        self.gens.get(n).map_or(0, Vec::len)
    }

    pub fn differential(&self, n: usize) -> &LinearMap {
        &self.d[n]
    }

    pub fn lift(&self, n: usize, v: &SparseVec) -> SparseVec {
        self.lift[n].apply(v)
    }

    /// Checks `D_T² = 0` and `D ι_∞ = ι_∞ D_T` against the total complex.
    pub fn verify(&self, k: &DoubleComplex) -> Result<()> {
        let top = self.pmax + self.qmax;
        for n in 0..top {
            if !self.d[n + 1].compose(&self.d[n])?.is_zero() {
                return Err(Error::NotNilpotent { degree: n });
            }
        }
        for n in 0..top {
            let lhs = k.total_differential(n).compose(&self.lift[n])?;
            let rhs = self.lift[n + 1].compose(&self.d[n])?;
            if lhs != rhs {
                return Err(Error::Construction {
                    identity: "D lift = lift D_T",
                    p: n,
                    q: 0,
                });
            }
        }
        Ok(())
    }
}

/// One page `E_r`: dimensions, ranks of `d_r` leaving each bidegree, and a
/// basis of representatives in the reduced complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralPage {
    pub r: usize,
    pub dims: BTreeMap<(usize, usize), usize>,
    pub dr_ranks: BTreeMap<(usize, usize), usize>,
    representatives: BTreeMap<(usize, usize), Vec<SparseVec>>,
}

impl SpectralPage {
    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.dims.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn dr_rank(&self, p: usize, q: usize) -> usize {
        self.dr_ranks.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn differential_vanishes(&self) -> bool {
        self.dr_ranks.values().all(|&r| r == 0)
    }

    /// `Σ_{p+q=n} dim E_r^{p,q}`.
    pub fn total(&self, n: usize) -> usize {
        self.dims.iter().filter(|((p, q), _)| p + q == n).map(|(_, d)| d).sum()
    }
}

/// All pages of one double complex.
#[derive(Clone, Debug)]
pub struct SpectralSequence {
    pub label: String,
    pub slice: Option<usize>,
    pub pmax: usize,
    pub qmax: usize,
    /// `E_1, …, E_N`.
    pub pages: Vec<SpectralPage>,
    /// Smallest `r ≥ 2` with `d_s = 0` for every `s ≥ r`.
    pub stable_index: usize,
    transfer: Transfer,
}

impl SpectralSequence {
    pub fn stable(&self) -> &SpectralPage {
        self.pages.last().expect("at least one page")
    }

    pub fn page(&self, r: usize) -> Option<&SpectralPage> {
        self.pages.get(r.checked_sub(1)?)
    }

    /// Representatives of `E_r^{p,q}` as cocycle-level elements of `Tot^{p+q}`
    /// (the `F^p` part of a zig-zag).
    pub fn representatives(&self, r: usize, p: usize, q: usize) -> Vec<SparseVec> {
        match self.page(r).and_then(|pg| pg.representatives.get(&(p, q))) {
            Some(reps) => reps.iter().map(|v| self.transfer.lift(p + q, v)).collect(),
            None => Vec::new(),
        }
    }

    pub fn transfer(&self) -> &Transfer {
        &self.transfer
    }

    pub fn max_total_degree(&self) -> usize {
        self.pmax + self.qmax
    }

    /// `Σ_{p+q=n} dim E_∞^{p,q}` for every `n`.
    pub fn e_infinity_totals(&self) -> Vec<usize> {
        (0..=self.max_total_degree()).map(|n| self.stable().total(n)).collect()
    }
}

/// Memoized cycle spaces `Z_r^p` of the reduced complex.
struct Cycles<'a> {
    t: &'a Transfer,
    memo: BTreeMap<(usize, usize, usize), Vec<SparseVec>>,
}

impl<'a> Cycles<'a> {
    /// `Z_r^p(n) = {x ∈ F^p T^n : D x ∈ F^{p+r}}` for integer `p`, `r`.
    fn z(&mut self, n: usize, p: isize, r: isize) -> Vec<SparseVec> {
        let t = self.t;
        let start = p.max(0) as usize;
        if start > t.pmax || n >= t.gens.len() {
            return Vec::new();
        }
        let bound = (p + r).clamp(0, t.pmax as isize + 1) as usize;
        let lo = t.col_start[n][start];
        let hi = t.col_start[n][t.pmax + 1];
        if bound <= start + 1 || n >= t.d.len() {
            return (lo..hi).map(SparseVec::unit).collect();
        }
        let key = (n, start, bound);
        if let Some(z) = self.memo.get(&key) {
            return z.clone();
        }
        let row_bound = t.col_start[n + 1][bound.min(t.pmax + 1)];
        let columns: Vec<SparseVec> = (lo..hi)
            .map(|j| {
                let col = t.d[n].column(j);
                SparseVec::from_pairs(col.iter().filter(|(i, _)| *i < row_bound).map(|(i, c)| (i, c.clone())).collect())
            })
            .collect();
        let m = LinearMap::from_columns(row_bound, columns);
        let z: Vec<SparseVec> = m.kernel().into_iter().map(|v| v.shifted(lo)).collect();
        self.memo.insert(key, z.clone());
        z
    }

    fn boundaries(&mut self, n: usize, p: isize, r: isize) -> Vec<SparseVec> {
        if n == 0 {
            return Vec::new();
        }
        let src = self.z(n - 1, p - r + 1, r - 1);
        src.iter().map(|v| self.t.d[n - 1].apply(v)).filter(|v| !v.is_zero()).collect()
    }
}

/// Computes `E_1, …, E_N` by the zig-zag construction.
pub fn compute_pages(k: &DoubleComplex) -> Result<SpectralSequence> {
    if let Some((identity, p, q)) = k.check().first_failure() {
        return Err(Error::input(
            "double complex",
            format!("{identity} fails at ({p}, {q}); pages need a bicomplex"),
        ));
    }
    let transfer = Transfer::new(k);
    let (pmax, qmax) = (k.pmax, k.qmax);
    let last = (pmax + 1).max(2);
    let mut cyc = Cycles {
        t: &transfer,
        memo: BTreeMap::new(),
    };
    let mut pages: Vec<SpectralPage> = Vec::with_capacity(last);
    for r in 1..=last {
        let ri = r as isize;
        let mut page = SpectralPage {
            r,
            dims: BTreeMap::new(),
            dr_ranks: BTreeMap::new(),
            representatives: BTreeMap::new(),
        };
        for p in 0..=pmax {
            for q in 0..=qmax {
                let n = p + q;
                let pi = p as isize;
                let dim_t = transfer.degree_dim(n);
                let mut den = Echelon::new(dim_t);
                for v in cyc.z(n, pi + 1, ri - 1) {
                    den.insert(v);
                }
                for v in cyc.boundaries(n, pi, ri) {
                    den.insert(v);
                }
                let den_dim = den.rank();
                let zr = cyc.z(n, pi, ri);
                let mut quotient = den.clone();
                let mut reps = Vec::new();
                for v in &zr {
                    if quotient.insert(v.clone()).is_some() {
                        reps.push(v.clone());
                    }
                }
                let dim = reps.len();
                let zr_next = cyc.z(n, pi, ri + 1);
                let ker_dim = rank_of(zr_next.into_iter().chain(cyc.z(n, pi + 1, ri - 1)), dim_t) - den_dim;
                let rank = dim - ker_dim;
                if rank > 0 && (p + r > pmax || q + 1 < r) {
                    return Err(Error::Construction {
                        identity: "d_r vanishes outside the bidegree range",
                        p,
                        q,
                    });
                }
                page.dims.insert((p, q), dim);
                page.dr_ranks.insert((p, q), rank);
                page.representatives.insert((p, q), reps);
            }
        }
        if let Some(prev) = pages.last() {
            for (&(p, q), &dim) in &page.dims {
                let ker = prev.dim(p, q) - prev.dr_rank(p, q);
                let incoming = match (p.checked_sub(r - 1), q + r >= 2) {
                    (Some(sp), true) if q + r - 2 <= qmax => prev.dr_rank(sp, q + r - 2),
                    _ => 0,
                };
                if dim + incoming != ker || dim > prev.dim(p, q) {
                    return Err(Error::Construction {
                        identity: "E_{r+1} = ker d_r / im d_r",
                        p,
                        q,
                    });
                }
            }
        }
        pages.push(page);
    }
    let mut stable_index = 2;
    for (i, page) in pages.iter().enumerate() {
        let r = i + 1;
        if r >= 2 && !page.differential_vanishes() {
            stable_index = r + 1;
        }
    }
    pages.truncate(stable_index);
    drop(cyc);
    Ok(SpectralSequence {
        label: k.label.clone(),
        slice: k.slice,
        pmax,
        qmax,
        pages,
        stable_index,
        transfer,
    })
}

/// Stability bounds and the induced filtration on total cohomology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub n_manifold: usize,
    pub stable_index: usize,
    pub n_le_n_plus_1: bool,
    /// Every `d_r` with `r ≥ 2` vanishes.
    pub e2_degenerate: bool,
    /// `n ≤ 4 ⇒ E_2 = E_∞`.
    pub low_dim_flag: bool,
    /// `filtration[m][p] = dim F^p H^m = Σ_{i ≥ p} dim E_∞^{i, m-i}`.
    pub filtration: Vec<Vec<usize>>,
}

pub fn convergence_report(seq: &SpectralSequence, n_manifold: usize) -> ConvergenceReport {
    let e2_degenerate = seq.pages.iter().skip(1).all(SpectralPage::differential_vanishes);
    let stable = seq.stable();
    let filtration = (0..=seq.max_total_degree())
        .map(|m| {
            (0..=seq.pmax)
                .map(|p| {
                    (p..=seq.pmax.min(m))
                        .filter(|&i| m - i <= seq.qmax)
                        .map(|i| stable.dim(i, m - i))
                        .sum()
                })
                .collect()
        })
        .collect();
    ConvergenceReport {
        n_manifold,
        stable_index: seq.stable_index,
        n_le_n_plus_1: seq.stable_index <= n_manifold + 1,
        e2_degenerate,
        low_dim_flag: n_manifold > 4 || e2_degenerate,
        filtration,
    }
}

/// Sum of per-slice page dimensions (CE mode aggregation).
pub fn aggregate_dims(seqs: &[SpectralSequence], r: usize) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    for s in seqs {
        let page = s.page(r.min(s.pages.len())).expect("page");
        for (&key, &d) in &page.dims {
            *out.entry(key).or_insert(0) += d;
        }
    }
    out
}
