//! Finite-dimensional Lie algebras given by exact structure constants.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::rational::Rational;

const SL3_DATA: &str = include_str!("../data/sl3.txt");

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    name: String,
    labels: Vec<String>,
    c: Vec<Rational>,
}

/// Coefficients of an element of the algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraVector(pub Vec<Rational>);

/// Coefficients of a linear form on the algebra, in the dual basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoVector(pub Vec<Rational>);

impl AlgebraVector {
    pub fn zero(dim: usize) -> Self {
        AlgebraVector(vec![Rational::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        AlgebraVector(xs.iter().map(|&x| Rational::from_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn lin_comb(a: &Rational, x: &Self, b: &Rational, y: &Self) -> Self {
        AlgebraVector(
            x.0.iter()
                .zip(&y.0)
                .map(|(p, q)| &(a * p) + &(b * q))
                .collect(),
        )
    }
}

impl CoVector {
    pub fn zero(dim: usize) -> Self {
        CoVector(vec![Rational::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    /// `⟨self, x⟩`.
    pub fn pair(&self, x: &AlgebraVector) -> Rational {
        self.0
            .iter()
            .zip(&x.0)
            .fold(Rational::zero(), |acc, (a, b)| &acc + &(a * b))
    }
}

/// Violations of the Lie algebra axioms found by [`LieAlgebra::check_structure`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub antisymmetry: Vec<(usize, usize, usize)>,
    pub jacobi: Vec<(usize, usize, usize, usize)>,
}

impl StructureReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KillingForm {
    pub matrix: Vec<Vec<Rational>>,
    pub rank: usize,
}

impl KillingForm {
    pub fn is_degenerate(&self) -> bool {
        self.rank < self.matrix.len()
    }

    pub fn eval(&self, x: &AlgebraVector, y: &AlgebraVector) -> Rational {
        let mut acc = Rational::zero();
        for (i, xi) in x.0.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.0.iter().enumerate() {
                acc += &(&(xi * yj) * &self.matrix[i][j]);
            }
        }
        acc
    }

    /// Inverse matrix; `None` when degenerate.
    pub fn inverse(&self) -> Option<Vec<Vec<Rational>>> {
        invert_dense(&self.matrix)
    }
}

/// An orthonormal basis for a compact-type algebra, kept exact.
///
/// `orthogonal` is the algebra in a Killing-orthogonal rational basis `f_i`
/// (rows of `change_of_basis`, in original coordinates) with
/// `K(f_i, f_i) = -norm_sq[i]`. The orthonormal basis is `u_i = f_i / sqrt(norm_sq[i])`,
/// so `[u_i, u_j] = Σ_k c'[i][j][k] sqrt(norm_sq[k] / (norm_sq[i] norm_sq[j])) u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthonormalBasis {
    pub orthogonal: LieAlgebra,
    pub change_of_basis: Vec<Vec<Rational>>,
    pub norm_sq: Vec<Rational>,
}

impl OrthonormalBasis {
    /// Structure constant of the orthonormal basis as `(coefficient, radicand)`,
    /// meaning `coefficient * sqrt(radicand)`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> (Rational, Rational) {
        let coeff = self.orthogonal.constant(i, j, k).clone();
        let rad = &self.norm_sq[k] / &(&self.norm_sq[i] * &self.norm_sq[j]);
        (coeff, rad)
    }

    pub fn structure_constant_f64(&self, i: usize, j: usize, k: usize) -> f64 {
        let (c, r) = self.structure_constant(i, j, k);
        c.to_f64() * libm::sqrt(r.to_f64())
    }

    /// Common squared scale when every basis vector has the same Killing norm;
    /// then the orthonormal constants are `c' * sqrt(scale_sq)`.
    pub fn global_scale_sq(&self) -> Option<Rational> {
        let first = self.norm_sq.first()?;
        if self.norm_sq.iter().all(|n| n == first) {
            Some(first.recip())
        } else {
            None
        }
    }
}

impl LieAlgebra {
    /// Builds from `i < j` brackets; the `j > i` half is filled antisymmetrically.
    pub fn from_brackets(
        name: impl Into<String>,
        labels: Vec<String>,
        brackets: impl IntoIterator<Item = (usize, usize, usize, Rational)>,
    ) -> Result<Self> {
        let dim = labels.len();
        if dim == 0 {
            return Err(Error::input("dim", "must be positive"));
        }
        let mut c = vec![Rational::zero(); dim * dim * dim];
        for (i, j, k, v) in brackets {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::input("brackets", format!("index ({i},{j},{k}) out of range")));
            }
            if i >= j {
                return Err(Error::input("brackets", format!("entry ({i},{j}) must have i < j")));
            }
            c[(i * dim + j) * dim + k] = v.clone();
            c[(j * dim + i) * dim + k] = -v;
        }
        Ok(LieAlgebra {
            name: name.into(),
            labels,
            c,
        })
    }

    /// Uses the given constants verbatim with no completion or validation.
    pub fn from_raw_constants(name: impl Into<String>, labels: Vec<String>, c: Vec<Rational>) -> Result<Self> {
        let dim = labels.len();
        if c.len() != dim * dim * dim {
            return Err(Error::mismatch("constants", dim * dim * dim, c.len()));
        }
        Ok(LieAlgebra {
            name: name.into(),
            labels,
            c,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        let d = self.dim();
        &self.c[(i * d + j) * d + k]
    }

    pub fn set_constant(&mut self, i: usize, j: usize, k: usize, v: Rational) {
        let d = self.dim();
        self.c[(i * d + j) * d + k] = v;
    }

    /// `[e_i, e_j]` as a sparse list of `(k, c)`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        let d = self.dim();
        let base = (i * d + j) * d;
        self.c[base..base + d]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
    }

    /// `(i, j, k, c)` for every nonzero bracket with `i < j`.
    pub fn nonzero_brackets(&self) -> Vec<(usize, usize, usize, Rational)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for (k, v) in self.bracket_basis(i, j) {
                    out.push((i, j, k, v.clone()));
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Rational::is_zero)
    }

    fn check_dim(&self, param: &'static str, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::mismatch(param, self.dim(), len));
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_dim("x", x.dim())?;
        self.check_dim("y", y.dim())?;
        let d = self.dim();
        let mut out = vec![Rational::zero(); d];
        for (i, xi) in x.0.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.0.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let w = xi * yj;
                for (k, c) in self.bracket_basis(i, j) {
                    out[k] += &(&w * c);
                }
            }
        }
        Ok(AlgebraVector(out))
    }

    pub fn check_structure(&self) -> StructureReport {
        let d = self.dim();
        let mut report = StructureReport::default();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if self.constant(i, j, k) != &-self.constant(j, i, k) {
                        report.antisymmetry.push((i, j, k));
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut s = Rational::zero();
                        for m in 0..d {
                            s += &(self.constant(i, j, m) * self.constant(m, k, l));
                            s += &(self.constant(j, k, m) * self.constant(m, i, l));
                            s += &(self.constant(k, i, m) * self.constant(m, j, l));
                        }
                        if !s.is_zero() {
                            report.jacobi.push((i, j, k, l));
                        }
                    }
                }
            }
        }
        report
    }

    /// Matrix of `ad e_i`: column `j` holds the coordinates of `[e_i, e_j]`.
    pub fn ad_matrix(&self, i: usize) -> Vec<Vec<Rational>> {
        let d = self.dim();
        let mut m = vec![vec![Rational::zero(); d]; d];
        for j in 0..d {
            for (k, c) in self.bracket_basis(i, j) {
                m[k][j] = c.clone();
            }
        }
        m
    }

    pub fn ad_map(&self, i: usize) -> LinearMap {
        LinearMap::from_dense(&self.ad_matrix(i))
    }

    /// Matrix of the coadjoint action `ad*_{e_i}` on dual coordinates:
    /// `⟨ad*_{e_i} λ, e_c⟩ = -⟨λ, [e_i, e_c]⟩`, so column `b` has entry `-c[i][c][b]` at row `c`.
    pub fn coad_map(&self, i: usize) -> LinearMap {
        let d = self.dim();
        let mut trip = Vec::new();
        for cidx in 0..d {
            for (b, v) in self.bracket_basis(i, cidx) {
                trip.push((cidx, b, -v.clone()));
            }
        }
        LinearMap::from_triplets(d, d, trip).expect("indices in range")
    }

    pub fn killing_form(&self) -> KillingForm {
        let d = self.dim();
        let ads: Vec<Vec<Vec<Rational>>> = (0..d).map(|i| self.ad_matrix(i)).collect();
        let mut matrix = vec![vec![Rational::zero(); d]; d];
        for i in 0..d {
            for j in i..d {
                let mut tr = Rational::zero();
                for a in 0..d {
                    for b in 0..d {
                        if !ads[i][a][b].is_zero() && !ads[j][b][a].is_zero() {
                            tr += &(&ads[i][a][b] * &ads[j][b][a]);
                        }
                    }
                }
                matrix[i][j] = tr.clone();
                matrix[j][i] = tr;
            }
        }
        let rank = LinearMap::from_dense(&matrix).rank();
        KillingForm { matrix, rank }
    }

    pub fn is_semisimple(&self) -> bool {
        !self.killing_form().is_degenerate()
    }

    /// `μ` with `⟨μ, Y⟩ = -⟨λ, [ξ, Y]⟩` for every `Y`.
    pub fn coadjoint_apply(&self, xi: &AlgebraVector, lam: &CoVector) -> Result<CoVector> {
        self.check_dim("xi", xi.dim())?;
        self.check_dim("lam", lam.dim())?;
        let d = self.dim();
        let mut out = vec![Rational::zero(); d];
        for (a, xa) in xi.0.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (y, slot) in out.iter_mut().enumerate() {
                for (b, c) in self.bracket_basis(a, y) {
                    *slot -= &(&(xa * c) * &lam.0[b]);
                }
            }
        }
        Ok(CoVector(out))
    }

    /// Orthonormal basis for `K = -I` via Gram–Schmidt on the Killing form.
    pub fn orthonormalize_basis(&self) -> Result<OrthonormalBasis> {
        let kf = self.killing_form();
        if kf.is_degenerate() {
            return Err(Error::UnsupportedAlgebra(format!(
                "{}: Killing form is degenerate (rank {} < {})",
                self.name,
                kf.rank,
                self.dim()
            )));
        }
        let d = self.dim();
        let mut fs: Vec<AlgebraVector> = Vec::with_capacity(d);
        let mut norms: Vec<Rational> = Vec::with_capacity(d);
        for i in 0..d {
            let mut v = AlgebraVector::basis(d, i);
            for (f, n) in fs.iter().zip(&norms) {
                // n = -K(f, f)
                let coeff = &kf.eval(&v, f) / &-n.clone();
                v = AlgebraVector::lin_comb(&Rational::one(), &v, &-coeff, f);
            }
            let kvv = kf.eval(&v, &v);
            if kvv.signum() >= 0 {
                return Err(Error::UnsupportedAlgebra(format!(
                    "{}: Killing form is not negative definite",
                    self.name
                )));
            }
            norms.push(-kvv);
            fs.push(v);
        }
        // Structure constants in the f basis: solve [f_i, f_j] = Σ c'_k f_k.
        let basis_rows: Vec<Vec<Rational>> = fs.iter().map(|f| f.0.clone()).collect();
        let cols = transpose_dense(&basis_rows);
        let inv = invert_dense(&cols).expect("orthogonal basis is invertible");
        let mut c = vec![Rational::zero(); d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = self.bracket(&fs[i], &fs[j])?;
                for k in 0..d {
                    let mut s = Rational::zero();
                    for (l, bl) in br.0.iter().enumerate() {
                        s += &(&inv[k][l] * bl);
                    }
                    c[(i * d + j) * d + k] = s;
                }
            }
        }
        let labels = self.labels.iter().map(|l| format!("{l}'")).collect();
        Ok(OrthonormalBasis {
            orthogonal: LieAlgebra::from_raw_constants(format!("{}-orthogonal", self.name), labels, c)?,
            change_of_basis: basis_rows,
            norm_sq: norms,
        })
    }

    pub fn abelian(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dim", "abelian algebra needs d >= 1"));
        }
        Self::from_brackets(
            format!("abelian({d})"),
            (1..=d).map(|i| format!("e{i}")).collect(),
            core::iter::empty(),
        )
    }

    pub fn su2() -> Self {
        let one = Rational::one();
        Self::from_brackets(
            "su2",
            labels(&["e1", "e2", "e3"]),
            [(0, 1, 2, one.clone()), (1, 2, 0, one.clone()), (0, 2, 1, -one)],
        )
        .expect("valid preset")
    }

    /// Basis `(h, e, f)` with `[h,e] = 2e`, `[h,f] = -2f`, `[e,f] = h`.
    pub fn sl2() -> Self {
        Self::from_brackets(
            "sl2",
            labels(&["h", "e", "f"]),
            [
                (0, 1, 1, Rational::from_int(2)),
                (0, 2, 2, Rational::from_int(-2)),
                (1, 2, 0, Rational::one()),
            ],
        )
        .expect("valid preset")
    }

    pub fn heisenberg3() -> Self {
        Self::from_brackets(
            "heisenberg3",
            labels(&["e1", "e2", "e3"]),
            [(0, 1, 2, Rational::one())],
        )
        .expect("valid preset")
    }

    /// Loaded from the bundled table of traceless-matrix commutators.
    pub fn sl3() -> Self {
        let (labels, brackets) = parse_constant_table(SL3_DATA).expect("bundled sl3 table is valid");
        Self::from_brackets("sl3", labels, brackets).expect("valid preset")
    }

    /// `abelian(d)` / `abelian:d`, `su2`, `so3`, `sl2`, `sl3`, `heisenberg3`.
    pub fn catalog(name: &str) -> Result<Self> {
        let n = name.trim();
        if let Some(rest) = n.strip_prefix("abelian") {
            let digits = rest.trim_start_matches(['(', ':']).trim_end_matches(')');
            let d: usize = digits
                .parse()
                .map_err(|_| Error::input("algebra", format!("cannot parse dimension in {n:?}")))?;
            return Self::abelian(d);
        }
        match n {
            "su2" => Ok(Self::su2()),
            "so3" => {
                let mut a = Self::su2();
                a.name = "so3".to_string();
                Ok(a)
            }
            "sl2" => Ok(Self::sl2()),
            "sl3" => Ok(Self::sl3()),
            "heisenberg3" => Ok(Self::heisenberg3()),
            _ => Err(Error::input("algebra", format!("unknown preset {n:?}"))),
        }
    }
}

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Parses the plain-text constant table: `# labels: a b c` plus `i j k p/q` lines.
pub fn parse_constant_table(text: &str) -> Result<(Vec<String>, Vec<(usize, usize, usize, Rational)>)> {
    let mut labels = Vec::new();
    let mut brackets = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# labels:") {
            labels = rest.split_whitespace().map(|s| s.to_string()).collect();
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::input("table", format!("malformed line {line:?}")));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::input("table", format!("bad index {s:?}")))
        };
        let v: Rational = parts[3]
            .parse()
            .map_err(|_| Error::input("table", format!("bad rational {:?}", parts[3])))?;
        brackets.push((idx(parts[0])?, idx(parts[1])?, idx(parts[2])?, v));
    }
    if labels.is_empty() {
        return Err(Error::input("table", "missing `# labels:` line"));
    }
    Ok((labels, brackets))
}

pub(crate) fn transpose_dense(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let r = m.len();
    let c = m.first().map_or(0, |x| x.len());
    (0..c).map(|j| (0..r).map(|i| m[i][j].clone()).collect()).collect()
}

/// Gauss–Jordan inverse of a square rational matrix.
pub(crate) fn invert_dense(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x = &*x * &p;
        }
        for x in inv[col].iter_mut() {
            *x = &*x * &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..n {
                    let t = &a[col][k] * &f;
                    a[r][k] -= &t;
                    let t = &inv[col][k] * &f;
                    inv[r][k] -= &t;
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn su2_bracket_and_self_bracket() {
        let g = LieAlgebra::su2();
        let e = |i| AlgebraVector::basis(3, i);
        assert_eq!(g.bracket(&e(0), &e(1)).unwrap(), e(2));
        let x = AlgebraVector::from_ints(&[3, -1, 7]);
        assert!(g.bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn sl2_bracket_e_f_is_h() {
        let g = LieAlgebra::sl2();
        let br = g
            .bracket(&AlgebraVector::basis(3, 1), &AlgebraVector::basis(3, 2))
            .unwrap();
        assert_eq!(br, AlgebraVector::basis(3, 0));
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let g = LieAlgebra::su2();
        let err = g
            .bracket(&AlgebraVector::zero(2), &AlgebraVector::zero(3))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn catalog_presets_are_valid() {
        for name in ["su2", "so3", "sl2", "sl3", "heisenberg3", "abelian(4)", "abelian:6"] {
            let g = LieAlgebra::catalog(name).unwrap();
            assert!(g.check_structure().is_valid(), "{name}");
        }
        assert_eq!(LieAlgebra::catalog("sl3").unwrap().dim(), 8);
        assert!(LieAlgebra::catalog("abelian(4)").unwrap().is_abelian());
        assert!(LieAlgebra::catalog("e8").is_err());
    }

    #[test]
    fn su2_preset_constants() {
        let g = LieAlgebra::su2();
        assert_eq!(g.constant(0, 1, 2), &q(1));
        assert_eq!(g.constant(1, 2, 0), &q(1));
        assert_eq!(g.constant(2, 0, 1), &q(1));
        assert_eq!(g.constant(1, 0, 2), &q(-1));
    }

    #[test]
    fn heisenberg_jacobi_by_enumeration() {
        // Every quadruple, independently of check_structure.
        let g = LieAlgebra::heisenberg3();
        let e = |i| AlgebraVector::basis(3, i);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let a = g.bracket(&g.bracket(&e(i), &e(j)).unwrap(), &e(k)).unwrap();
                    let b = g.bracket(&g.bracket(&e(j), &e(k)).unwrap(), &e(i)).unwrap();
                    let c = g.bracket(&g.bracket(&e(k), &e(i)).unwrap(), &e(j)).unwrap();
                    let s = AlgebraVector::lin_comb(&q(1), &a, &q(1), &b);
                    assert!(AlgebraVector::lin_comb(&q(1), &s, &q(1), &c).is_zero());
                }
            }
        }
        assert!(g.check_structure().is_valid());
    }

    #[test]
    fn one_sided_flip_is_reported() {
        let mut g = LieAlgebra::su2();
        g.set_constant(0, 1, 2, q(-1));
        let rep = g.check_structure();
        assert!(rep.antisymmetry.contains(&(0, 1, 2)));
        assert!(!rep.is_valid());
    }

    #[test]
    fn killing_forms() {
        let su2 = LieAlgebra::su2().killing_form();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(su2.matrix[i][j], if i == j { q(-2) } else { q(0) });
            }
        }
        let sl2 = LieAlgebra::sl2().killing_form();
        assert_eq!(sl2.matrix[0][0], q(8));
        assert_eq!(sl2.matrix[1][2], q(4));
        assert_eq!(sl2.matrix[2][1], q(4));
        assert_eq!(sl2.matrix[1][1], q(0));
        assert_eq!(sl2.matrix[0][1], q(0));
        let h = LieAlgebra::heisenberg3().killing_form();
        assert_eq!(h.rank, 0);
        assert!(h.matrix.iter().flatten().all(Rational::is_zero));
        assert_eq!(LieAlgebra::sl3().killing_form().rank, 8);
        assert_eq!(LieAlgebra::abelian(3).unwrap().killing_form().rank, 0);
    }

    #[test]
    fn coadjoint_examples() {
        let g = LieAlgebra::su2();
        let mu = g
            .coadjoint_apply(&AlgebraVector::basis(3, 0), &CoVector::basis(3, 2))
            .unwrap();
        assert_eq!(mu, CoVector(vec![q(0), q(-1), q(0)]));
        let lam = CoVector(vec![q(2), q(5), q(-3)]);
        assert!(g.coadjoint_apply(&AlgebraVector::zero(3), &lam).unwrap().is_zero());
        let ab = LieAlgebra::abelian(3).unwrap();
        assert!(ab
            .coadjoint_apply(&AlgebraVector::from_ints(&[1, 2, 3]), &lam)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn coad_map_matches_coadjoint_apply() {
        let g = LieAlgebra::sl3();
        let lam = CoVector((0..8).map(|i| q(i * i - 3)).collect());
        for i in 0..8 {
            let mu = g.coadjoint_apply(&AlgebraVector::basis(8, i), &lam).unwrap();
            let via_map = g
                .coad_map(i)
                .apply(&crate::linalg::SparseVec::from_dense(&lam.0))
                .to_dense(8);
            assert_eq!(mu.0, via_map);
        }
    }

    #[test]
    fn orthonormalize_su2_scales_by_inverse_sqrt2() {
        let on = LieAlgebra::su2().orthonormalize_basis().unwrap();
        assert_eq!(on.norm_sq, vec![q(2), q(2), q(2)]);
        assert_eq!(on.global_scale_sq(), Some(Rational::new(1, 2)));
        let (c, r) = on.structure_constant(0, 1, 2);
        assert_eq!((c, r), (q(1), Rational::new(1, 2)));
        assert!((on.structure_constant_f64(0, 1, 2) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn orthonormalize_rejects_non_compact() {
        for g in [
            LieAlgebra::abelian(2).unwrap(),
            LieAlgebra::heisenberg3(),
            LieAlgebra::sl2(),
        ] {
            assert!(matches!(
                g.orthonormalize_basis(),
                Err(Error::UnsupportedAlgebra(_))
            ));
        }
    }

    #[test]
    fn sl3_table_matches_matrix_commutators() {
        // Independent derivation: commutators of the traceless basis matrices.
        type M = [[i64; 3]; 3];
        let unit = |i: usize, j: usize| {
            let mut m: M = [[0; 3]; 3];
            m[i][j] = 1;
            m
        };
        let sub = |a: M, b: M| {
            let mut m: M = [[0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = a[i][j] - b[i][j];
                }
            }
            m
        };
        let mul = |a: M, b: M| {
            let mut m: M = [[0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        m[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            m
        };
        let basis: [M; 8] = [
            sub(unit(0, 0), unit(1, 1)),
            sub(unit(1, 1), unit(2, 2)),
            unit(0, 1),
            unit(0, 2),
            unit(1, 2),
            unit(1, 0),
            unit(2, 0),
            unit(2, 1),
        ];
        let g = LieAlgebra::sl3();
        for i in 0..8 {
            for j in 0..8 {
                let comm = sub(mul(basis[i], basis[j]), mul(basis[j], basis[i]));
                let mut rebuilt: M = [[0; 3]; 3];
                for k in 0..8 {
                    let c = g.constant(i, j, k).to_i64().unwrap();
                    for a in 0..3 {
                        for b in 0..3 {
                            rebuilt[a][b] += c * basis[k][a][b];
                        }
                    }
                }
                assert_eq!(rebuilt, comm, "[b{i}, b{j}]");
            }
        }
    }

    fn small_vec(d: usize) -> impl Strategy<Value = AlgebraVector> {
        proptest::collection::vec((-20i64..20, 1i64..5), d)
            .prop_map(|v| AlgebraVector(v.into_iter().map(|(n, m)| Rational::new(n, m)).collect()))
    }

    proptest! {
        #[test]
        fn bracket_is_bilinear(x in small_vec(8), y in small_vec(8), z in small_vec(8), a in -5i64..5, b in 1i64..4) {
            let g = LieAlgebra::sl3();
            let (a, b) = (q(a), Rational::new(1, b));
            let lhs = g.bracket(&AlgebraVector::lin_comb(&a, &x, &b, &y), &z).unwrap();
            let rhs = AlgebraVector::lin_comb(&a, &g.bracket(&x, &z).unwrap(), &b, &g.bracket(&y, &z).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn coadjoint_duality(lam in small_vec(3), xi in 0usize..3, y in 0usize..3) {
            for g in [LieAlgebra::su2(), LieAlgebra::sl2(), LieAlgebra::heisenberg3()] {
                let lam = CoVector(lam.0.clone());
                let (x, yv) = (AlgebraVector::basis(3, xi), AlgebraVector::basis(3, y));
                let lhs = g.coadjoint_apply(&x, &lam).unwrap().pair(&yv);
                let rhs = lam.pair(&g.bracket(&x, &yv).unwrap());
                prop_assert!((&lhs + &rhs).is_zero());
            }
        }

        #[test]
        fn killing_form_is_associative(x in small_vec(8), y in small_vec(8), z in small_vec(8)) {
            let g = LieAlgebra::sl3();
            let k = g.killing_form();
            let lhs = k.eval(&g.bracket(&x, &y).unwrap(), &z);
            let rhs = k.eval(&x, &g.bracket(&y, &z).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
