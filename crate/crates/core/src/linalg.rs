//! Sparse exact linear algebra over [`Rational`].
//!
//! Vectors are sorted `(index, value)` lists with no explicit zeros. Matrices
//! are stored column-major because nearly every consumer applies a map to
//! basis vectors or reduces columns.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(i, v)| (i, v)))
            .finish()
    }
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        SparseVec {
            entries: vec![(i, Rational::one())],
        }
    }

    /// Builds from arbitrary `(index, value)` pairs, summing duplicates.
    pub fn from_pairs(mut pairs: Vec<(usize, Rational)>) -> Self {
        pairs.sort_by_key(|e| e.0);
        let mut entries: Vec<(usize, Rational)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += &v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|e| !e.1.is_zero());
        SparseVec { entries }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Largest index with a nonzero entry.
    #[inline]
    pub fn low(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.low()
    }

    pub fn scale(&mut self, c: &Rational) {
        if c.is_zero() {
            self.entries.clear();
            return;
        }
        for e in &mut self.entries {
            e.1 = &e.1 * c;
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &Rational, other: &SparseVec) {
        if c.is_zero() || other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, c * y));
                        b.next();
                    } else {
                        let s = x + &(c * y);
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, c * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        self.entries = out;
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.axpy(&Rational::one(), other);
        out
    }

    pub fn dot(&self, other: &SparseVec) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            if i < j {
                a.next();
            } else if j < i {
                b.next();
            } else {
                acc += &(x * y);
                a.next();
                b.next();
            }
        }
        acc
    }

    /// Keeps entries whose index maps to `Some(new)`; `f` must be monotone on
    /// kept indices for the result to stay sorted, which is checked.
    pub fn reindex(&self, f: impl Fn(usize) -> Option<usize>) -> SparseVec {
        let mut pairs: Vec<(usize, Rational)> = self
            .entries
            .iter()
            .filter_map(|(i, v)| f(*i).map(|j| (j, v.clone())))
            .collect();
        if !pairs.windows(2).all(|w| w[0].0 < w[1].0) {
            pairs.sort_by_key(|e| e.0);
        }
        SparseVec { entries: pairs }
    }

    pub fn shifted(&self, offset: usize) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (i + offset, v.clone())).collect(),
        }
    }

    pub(crate) fn push_unchecked(&mut self, i: usize, v: Rational) {
        debug_assert!(self.low().is_none_or(|l| l < i));
        if !v.is_zero() {
            self.entries.push((i, v));
        }
    }
}

/// A linear map between finite-dimensional coordinate spaces.
#[derive(Clone, PartialEq, Eq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
    pub domain: String,
    pub codomain: String,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LinearMap({} -> {}, {}x{}, nnz {})",
            self.domain,
            self.codomain,
            self.rows,
            self.cols,
            self.nnz()
        )
    }
}

impl LinearMap {
    pub fn zero(rows: usize, cols: usize) -> Self {
        LinearMap {
            rows,
            cols,
            columns: vec![SparseVec::new(); cols],
            domain: String::new(),
            codomain: String::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            rows: n,
            cols: n,
            columns: (0..n).map(SparseVec::unit).collect(),
            domain: String::new(),
            codomain: String::new(),
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVec>) -> Self {
        debug_assert!(columns.iter().all(|c| c.low().is_none_or(|l| l < rows)));
        LinearMap {
            rows,
            cols: columns.len(),
            columns,
            domain: String::new(),
            codomain: String::new(),
        }
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut per_col: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            if r >= rows {
                return Err(Error::input("row", "index out of range"));
            }
            if c >= cols {
                return Err(Error::input("col", "index out of range"));
            }
            per_col[c].push((r, v));
        }
        Ok(Self::from_columns(
            rows,
            per_col.into_iter().map(SparseVec::from_pairs).collect(),
        ))
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let columns = (0..ncols)
            .map(|c| {
                let mut v = SparseVec::new();
                for (r, row) in rows.iter().enumerate() {
                    v.push_unchecked(r, row[c].clone());
                }
                v
            })
            .collect();
        Self::from_columns(nrows, columns)
    }

    pub fn with_tags(mut self, domain: impl Into<String>, codomain: impl Into<String>) -> Self {
        self.domain = domain.into();
        self.codomain = codomain.into();
        self
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &SparseVec {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVec::nnz).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVec::is_zero)
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.columns[c].get(r)
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v.clone();
        }
        out
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (c, x) in v.iter() {
            out.axpy(x, &self.columns[c]);
        }
        out
    }

    /// Same as [`apply`](Self::apply) but accumulates through a dense buffer;
    /// faster when the image has many entries.
    pub fn apply_dense_acc(&self, v: &SparseVec, buf: &mut Vec<Rational>) -> SparseVec {
        buf.clear();
        buf.resize(self.rows, Rational::zero());
        let mut touched: Vec<usize> = Vec::new();
        for (c, x) in v.iter() {
            for (r, y) in self.columns[c].iter() {
                if buf[r].is_zero() {
                    touched.push(r);
                }
                buf[r] += &(x * y);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut out = SparseVec::new();
        for r in touched {
            let v = core::mem::take(&mut buf[r]);
            out.push_unchecked(r, v);
        }
        out
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &LinearMap) -> Result<LinearMap> {
        if self.cols != rhs.rows {
            return Err(Error::mismatch("compose", self.cols, rhs.rows));
        }
        if !self.domain.is_empty() && !rhs.codomain.is_empty() && self.domain != rhs.codomain {
            return Err(Error::input("compose", "space tags do not match"));
        }
        let mut buf = Vec::new();
        let columns = rhs
            .columns
            .iter()
            .map(|c| self.apply_dense_acc(c, &mut buf))
            .collect();
        Ok(LinearMap {
            rows: self.rows,
            cols: rhs.cols,
            columns,
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    pub fn add(&self, rhs: &LinearMap) -> Result<LinearMap> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::mismatch("add", self.rows * self.cols, rhs.rows * rhs.cols));
        }
        let columns = self
            .columns
            .iter()
            .zip(&rhs.columns)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(LinearMap {
            rows: self.rows,
            cols: self.cols,
            columns,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    pub fn scaled(&self, c: &Rational) -> LinearMap {
        let mut out = self.clone();
        for col in &mut out.columns {
            col.scale(c);
        }
        out
    }

    pub fn transpose(&self) -> LinearMap {
        let mut per_row: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.rows];
        for (r, c, v) in self.triplets() {
            per_row[r].push((c, v.clone()));
        }
        LinearMap {
            rows: self.cols,
            cols: self.rows,
            columns: per_row
                .into_iter()
                .map(|entries| SparseVec { entries })
                .collect(),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        }
    }

    /// Kronecker product `self ⊗ rhs` with index `(a, b) ↦ a * dim_b + b`.
    pub fn kron(&self, rhs: &LinearMap) -> LinearMap {
        let mut columns = Vec::with_capacity(self.cols * rhs.cols);
        for ca in &self.columns {
            for cb in &rhs.columns {
                let mut v = SparseVec::new();
                for (ra, x) in ca.iter() {
                    for (rb, y) in cb.iter() {
                        v.push_unchecked(ra * rhs.rows + rb, x * y);
                    }
                }
                columns.push(v);
            }
        }
        LinearMap::from_columns(self.rows * rhs.rows, columns)
    }

    /// Rows of `self` stacked over rows of `rhs` (same domain).
    pub fn vstack(&self, rhs: &LinearMap) -> Result<LinearMap> {
        if self.cols != rhs.cols {
            return Err(Error::mismatch("vstack", self.cols, rhs.cols));
        }
        let columns = self
            .columns
            .iter()
            .zip(&rhs.columns)
            .map(|(a, b)| {
                let mut v = a.clone();
                for (r, x) in b.iter() {
                    v.push_unchecked(r + self.rows, x.clone());
                }
                v
            })
            .collect();
        Ok(LinearMap::from_columns(self.rows + rhs.rows, columns))
    }

    pub fn rank(&self) -> usize {
        rank_of(self.columns.iter().cloned(), self.rows)
    }

    /// Basis of the kernel from column reduction (one vector per non-pivot column).
    pub fn kernel(&self) -> Vec<SparseVec> {
        ColumnReduction::new(self).kernel
    }
}

/// An incrementally built basis in echelon form keyed by each vector's
/// largest index ("low"). Pivot entries are normalized to one.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    pivot_at: Vec<Option<usize>>,
    vectors: Vec<SparseVec>,
    /// Optional coordinates of each basis vector in some other space.
    tags: Vec<SparseVec>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            pivot_at: vec![None; dim],
            vectors: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[SparseVec] {
        &self.vectors
    }

    pub fn tags(&self) -> &[SparseVec] {
        &self.tags
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.pivot_at[i].is_some()
    }

    /// Pivot positions in insertion order of the basis vectors.
    pub fn pivots(&self) -> Vec<usize> {
        self.vectors.iter().map(|v| v.low().unwrap()).collect()
    }

    /// Cancels the low entry repeatedly until it is not a pivot. `tag`
    /// receives the same combination of tags.
    fn reduce_low(&self, v: &mut SparseVec, tag: &mut SparseVec) {
        while let Some(low) = v.low() {
            match self.pivot_at[low] {
                Some(k) => {
                    let c = -v.get(low);
                    v.axpy(&c, &self.vectors[k]);
                    tag.axpy(&c, &self.tags[k]);
                }
                None => break,
            }
        }
    }

    /// Inserts `v`; returns the new pivot or `None` if `v` was dependent.
    pub fn insert(&mut self, v: SparseVec) -> Option<usize> {
        self.insert_tagged(v, SparseVec::new()).ok().map(|(p, _)| p)
    }

    /// Like [`insert`](Self::insert) with a tag carried along. When `v` is
    /// dependent, returns `Err` with the reduced tag: `tag - Σ c_k tag_k`,
    /// the witness of the dependency.
    pub fn insert_tagged(
        &mut self,
        mut v: SparseVec,
        mut tag: SparseVec,
    ) -> core::result::Result<(usize, usize), SparseVec> {
        self.reduce_low(&mut v, &mut tag);
        match v.low() {
            None => Err(tag),
            Some(low) => {
                let inv = v.get(low).recip();
                v.scale(&inv);
                tag.scale(&inv);
                let k = self.vectors.len();
                self.pivot_at[low] = Some(k);
                self.vectors.push(v);
                self.tags.push(tag);
                Ok((low, k))
            }
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        let mut w = v.clone();
        let mut t = SparseVec::new();
        self.reduce_low(&mut w, &mut t);
        w.is_zero()
    }

    /// Eliminates every pivot position from `v`, returning the remainder and
    /// the coefficients used (indexed by basis-vector number): `v = rem + Σ β_k b_k`.
    pub fn full_reduce(&self, v: &SparseVec) -> (SparseVec, SparseVec) {
        let mut w = v.clone();
        let mut coeffs: Vec<(usize, Rational)> = Vec::new();
        // Walk downward; eliminating pivot i only creates entries below i.
        let mut cursor = w.low();
        while let Some(i) = cursor {
            if let Some(k) = self.pivot_at[i] {
                let c = w.get(i);
                if !c.is_zero() {
                    w.axpy(&-c.clone(), &self.vectors[k]);
                    coeffs.push((k, c));
                }
            }
            cursor = w.entries().iter().rev().map(|e| e.0).find(|&j| j < i);
        }
        (w, SparseVec::from_pairs(coeffs))
    }

    /// Combination of tags for an element of the span: `Σ β_k tag_k`.
    pub fn tag_of(&self, coeffs: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, c) in coeffs.iter() {
            out.axpy(c, &self.tags[k]);
        }
        out
    }
}

/// Rank of a set of vectors in a space of dimension `dim`.
pub fn rank_of(vectors: impl IntoIterator<Item = SparseVec>, dim: usize) -> usize {
    let mut ech = Echelon::new(dim);
    let mut rank = 0;
    for v in vectors {
        if ech.insert(v).is_some() {
            rank += 1;
        }
    }
    rank
}

/// Column reduction of a map with column-combination tracking.
///
/// Produces the image in echelon form (each basis vector tagged with a
/// preimage), the set `J` of pivot columns, and for each non-pivot column `j`
/// a kernel vector `k_j = e_j + (combination of columns in J)`.
#[derive(Clone, Debug)]
pub struct ColumnReduction {
    pub image: Echelon,
    pub pivot_columns: Vec<bool>,
    /// `(column, kernel vector)` for each non-pivot column, ascending.
    pub kernel_by_column: Vec<(usize, SparseVec)>,
    pub kernel: Vec<SparseVec>,
}

impl ColumnReduction {
    pub fn new(map: &LinearMap) -> Self {
        let mut image = Echelon::new(map.rows());
        let mut pivot_columns = vec![false; map.cols()];
        let mut kernel_by_column = Vec::new();
        for (j, col) in map.columns().iter().enumerate() {
            match image.insert_tagged(col.clone(), SparseVec::unit(j)) {
                Ok(_) => pivot_columns[j] = true,
                Err(witness) => kernel_by_column.push((j, witness)),
            }
        }
        let kernel = kernel_by_column.iter().map(|(_, k)| k.clone()).collect();
        ColumnReduction {
            image,
            pivot_columns,
            kernel_by_column,
            kernel,
        }
    }

    pub fn rank(&self) -> usize {
        self.image.rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn m(rows: &[&[i64]]) -> LinearMap {
        LinearMap::from_dense(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rank_and_kernel_of_small_matrix() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ker = a.kernel();
        assert_eq!(ker.len(), 1);
        assert!(a.apply(&ker[0]).is_zero());
    }

    #[test]
    fn compose_checks_shapes_and_tags() {
        let a = m(&[&[1, 0]]).with_tags("A", "B");
        let b = m(&[&[1], &[1]]).with_tags("C", "A");
        assert_eq!(a.compose(&b).unwrap().get(0, 0), q(1));
        let c = m(&[&[1], &[1]]).with_tags("C", "X");
        assert!(a.compose(&c).is_err());
        assert!(a.compose(&m(&[&[1]])).is_err());
    }

    #[test]
    fn full_reduce_clears_all_pivots() {
        let mut e = Echelon::new(4);
        e.insert(SparseVec::from_dense(&[q(1), q(1), q(0), q(0)]));
        e.insert(SparseVec::from_dense(&[q(0), q(1), q(1), q(1)]));
        let v = SparseVec::from_dense(&[q(3), q(5), q(2), q(7)]);
        let (rem, coeffs) = e.full_reduce(&v);
        for p in e.pivots() {
            assert!(rem.get(p).is_zero());
        }
        let mut back = rem.clone();
        for (k, c) in coeffs.iter() {
            back.axpy(c, &e.vectors()[k]);
        }
        assert_eq!(back, v);
    }

    #[test]
    fn kron_matches_dense_definition() {
        let a = m(&[&[1, 2], &[0, 1]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        let k = a.kron(&b);
        assert_eq!(k.get(0, 3), q(2));
        assert_eq!(k.get(1, 2), q(2));
        assert_eq!(k.get(3, 2), q(1));
        assert_eq!(k.get(2, 2), q(0));
    }

    #[test]
    fn transpose_twice_is_identity() {
        let a = m(&[&[1, 2, 0], &[0, 0, 5]]);
        assert_eq!(a.transpose().transpose(), a);
    }
}
