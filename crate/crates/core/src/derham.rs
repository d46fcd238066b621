//! Finite cochain models of base manifolds: simplicial circles, product
//! tori, formal (zero-differential) models, and abstract cup-product rings.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::CochainComplex;
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::rational::Rational;

/// A basis class of cohomology: `(degree, index)`.
pub type ClassId = (usize, usize);

/// Cup products on a chosen cohomology basis. `(0, 0)` is the unit and is
/// never stored. Missing products are zero unless the swapped product is
/// present, in which case graded commutativity fills them in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CupRing {
    betti: Vec<usize>,
    table: BTreeMap<(ClassId, ClassId), Vec<Rational>>,
}

impl CupRing {
    pub fn new(betti: Vec<usize>, entries: impl IntoIterator<Item = (ClassId, ClassId, Vec<Rational>)>) -> Result<Self> {
        let n = betti.len().saturating_sub(1);
        let mut table = BTreeMap::new();
        for (a, b, v) in entries {
            for c in [a, b] {
                if c.0 >= betti.len() || c.1 >= betti[c.0] {
                    return Err(Error::input("ring", format!("class {c:?} outside the cohomology grading")));
                }
            }
            let deg = a.0 + b.0;
            if deg > n {
                if v.iter().any(|x| !x.is_zero()) {
                    return Err(Error::input("ring", format!("product {a:?}·{b:?} lands above degree {n}")));
                }
                continue;
            }
            if v.len() != betti[deg] {
                return Err(Error::input(
                    "ring",
                    format!("product {a:?}·{b:?} needs {} coefficients, got {}", betti[deg], v.len()),
                ));
            }
            table.insert((a, b), v);
        }
        Ok(CupRing { betti, table })
    }

    /// Exterior algebra on one degree-1 generator: the ring of a circle.
    pub fn circle() -> Self {
        CupRing {
            betti: vec![1, 1],
            table: BTreeMap::new(),
        }
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ClassId, &ClassId, &Vec<Rational>)> {
        self.table.iter().map(|((a, b), v)| (a, b, v))
    }

    fn basis_product(&self, a: ClassId, b: ClassId) -> Vec<Rational> {
        let deg = a.0 + b.0;
        let len = self.betti.get(deg).copied().unwrap_or(0);
        if deg >= self.betti.len() {
            return Vec::new();
        }
        if a == (0, 0) {
            let mut v = vec![Rational::zero(); len];
            v[b.1] = Rational::one();
            return v;
        }
        if b == (0, 0) {
            let mut v = vec![Rational::zero(); len];
            v[a.1] = Rational::one();
            return v;
        }
        if let Some(v) = self.table.get(&(a, b)) {
            return v.clone();
        }
        if let Some(v) = self.table.get(&(b, a)) {
            if (a.0 * b.0) % 2 == 1 {
                return v.iter().map(|x| -x.clone()).collect();
            }
            return v.clone();
        }
        vec![Rational::zero(); len]
    }

    /// Product of homogeneous elements given by coefficient vectors.
    pub fn multiply(&self, da: usize, x: &[Rational], db: usize, y: &[Rational]) -> Vec<Rational> {
        let deg = da + db;
        if deg >= self.betti.len() {
            return Vec::new();
        }
        let mut out = vec![Rational::zero(); self.betti[deg]];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (o, p) in out.iter_mut().zip(self.basis_product((da, i), (db, j))) {
                    *o += &(&c * &p);
                }
            }
        }
        out
    }

    /// Ring of a tensor product, on the Künneth basis of [`tensor_betti`]:
    /// `(a⊗b)(a'⊗b') = (-1)^{|b||a'|} aa' ⊗ bb'`.
    pub fn tensor(&self, other: &CupRing) -> CupRing {
        let betti = tensor_betti(&self.betti, &other.betti);
        let layout = KunnethLayout::new(&self.betti, &other.betti);
        let mut table = BTreeMap::new();
        let classes: Vec<ClassId> = (0..betti.len()).flat_map(|d| (0..betti[d]).map(move |i| (d, i))).collect();
        for &x in &classes {
            for &y in &classes {
                if x == (0, 0) || y == (0, 0) || x.0 + y.0 >= betti.len() {
                    continue;
                }
                let (xa, xb) = layout.split(x);
                let (ya, yb) = layout.split(y);
                let left = self.basis_product(xa, ya);
                let right = other.basis_product(xb, yb);
                let da = xa.0 + ya.0;
                let db = xb.0 + yb.0;
                let mut v = vec![Rational::zero(); betti[x.0 + y.0]];
                if da < self.betti.len() && db < other.betti.len() {
                    let sign = if (xb.0 * ya.0) % 2 == 1 { -Rational::one() } else { Rational::one() };
                    for (i, l) in left.iter().enumerate() {
                        if l.is_zero() {
                            continue;
                        }
                        for (j, r) in right.iter().enumerate() {
                            if r.is_zero() {
                                continue;
                            }
                            let idx = layout.join((da, i), (db, j));
                            v[idx.1] += &(&(l * r) * &sign);
                        }
                    }
                }
                if v.iter().any(|c| !c.is_zero()) {
                    table.insert((x, y), v);
                }
            }
        }
        CupRing { betti, table }
    }
}

/// `b_k(A⊗B) = Σ_i b_i(A) b_{k-i}(B)`.
pub fn tensor_betti(a: &[usize], b: &[usize]) -> Vec<usize> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Ordering of degree-`k` tensor coordinates: blocks for `i = 0..=k`
/// ascending (`i` the degree on the left), each block indexed `a * dim_b + b`.
struct KunnethLayout {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl KunnethLayout {
    fn new(a: &[usize], b: &[usize]) -> Self {
        KunnethLayout {
            a: a.to_vec(),
            b: b.to_vec(),
        }
    }

    fn offset(&self, k: usize, i: usize) -> usize {
        (0..i)
            .filter(|&i2| k >= i2 && k - i2 < self.b.len() && i2 < self.a.len())
            .map(|i2| self.a[i2] * self.b[k - i2])
            .sum()
    }

    fn join(&self, x: ClassId, y: ClassId) -> ClassId {
        let k = x.0 + y.0;
        (k, self.offset(k, x.0) + x.1 * self.b[y.0] + y.1)
    }

    fn split(&self, c: ClassId) -> (ClassId, ClassId) {
        let k = c.0;
        let mut rest = c.1;
        for i in 0..=k {
            if i >= self.a.len() || k - i >= self.b.len() {
                continue;
            }
            let block = self.a[i] * self.b[k - i];
            if rest < block {
                let nb = self.b[k - i];
                return ((i, rest / nb), (k - i, rest % nb));
            }
            rest -= block;
        }
        unreachable!("class index within degree")
    }
}

/// Which value the marker `[Ω]^j` takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurvatureMode {
    /// Every power is treated as alive.
    Formal,
    /// Powers are evaluated in the cup-product ring.
    Ring,
}

impl CurvatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CurvatureMode::Formal => "formal",
            CurvatureMode::Ring => "ring",
        }
    }
}

impl core::str::FromStr for CurvatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formal" => Ok(CurvatureMode::Formal),
            "ring" => Ok(CurvatureMode::Ring),
            _ => Err(Error::input("curvature_mode", format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseModel {
    pub name: String,
    pub n: usize,
    complex: CochainComplex,
    betti: Vec<usize>,
    ring: Option<CupRing>,
    curvature_class: Option<Vec<Rational>>,
}

impl BaseModel {
    fn from_complex(name: String, n: usize, complex: CochainComplex) -> Result<Self> {
        if complex.len() != n + 1 {
            return Err(Error::mismatch("complex length", n + 1, complex.len()));
        }
        let betti = complex.betti()?;
        Ok(BaseModel {
            name,
            n,
            complex,
            betti,
            ring: None,
            curvature_class: None,
        })
    }

    /// Simplicial cochains of the `m`-gon.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::input("m", format!("circle needs at least 3 vertices, got {m}")));
        }
        let mut trip = Vec::with_capacity(2 * m);
        for e in 0..m {
            trip.push((e, (e + 1) % m, Rational::one()));
            trip.push((e, e, -Rational::one()));
        }
        let d = LinearMap::from_triplets(m, m, trip)?.with_tags("C^0", "C^1");
        let mut model = Self::from_complex(format!("circle:{m}"), 1, CochainComplex::new(vec![m, m], vec![d])?)?;
        model.ring = Some(CupRing::circle());
        Ok(model)
    }

    /// Tensor product with Koszul signs, `d(a⊗b) = da⊗b + (-1)^{|a|} a⊗db`.
    /// Rings are tensored when both factors carry one.
    pub fn tensor(a: &BaseModel, b: &BaseModel) -> Result<Self> {
        let complex = tensor_complex(&a.complex, &b.complex)?;
        let n = a.n + b.n;
        let mut model = Self::from_complex(format!("{}*{}", a.name, b.name), n, complex)?;
        if let (Some(ra), Some(rb)) = (&a.ring, &b.ring) {
            let ring = ra.tensor(rb);
            if ring.betti != model.betti {
                return Err(Error::input("ring", "tensor ring grading disagrees with Künneth"));
            }
            model.ring = Some(ring);
        }
        Ok(model)
    }

    /// `n`-fold product of `m`-gon circles. For even `n` the curvature class
    /// is `Σ_i x_{2i} x_{2i+1}` on the degree-one basis.
    pub fn torus(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("n", "torus needs n >= 1"));
        }
        let circle = Self::circle(m)?;
        let mut model = circle.clone();
        for _ in 1..n {
            model = Self::tensor(&model, &circle)?;
        }
        model.name = format!("torus:{n}:{m}");
        if n >= 2 {
            let ring = model.ring.as_ref().expect("circle rings tensor");
            let unit = |i: usize| {
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::one();
                v
            };
            let mut class = vec![Rational::zero(); model.betti[2]];
            for i in 0..n / 2 {
                let p = ring.multiply(1, &unit(2 * i), 1, &unit(2 * i + 1));
                for (c, x) in class.iter_mut().zip(p) {
                    *c += &x;
                }
            }
            model.curvature_class = Some(class);
        }
        Ok(model)
    }

    /// Zero differentials with `dims = betti`.
    pub fn formal(betti: Vec<usize>, n: usize, ring: Option<CupRing>) -> Result<Self> {
        if betti.len() != n + 1 {
            return Err(Error::input("betti", format!("expected {} entries for n = {n}, got {}", n + 1, betti.len())));
        }
        if betti[0] == 0 {
            return Err(Error::input("betti", "b_0 must be at least 1"));
        }
        if let Some(r) = &ring {
            if r.betti != betti {
                return Err(Error::input("ring", "ring grading does not match betti numbers"));
            }
        }
        let name = format!(
            "formal:{}",
            betti.iter().map(|b| format!("{b}")).collect::<Vec<_>>().join(",")
        );
        let mut model = Self::from_complex(name, n, CochainComplex::zero(betti))?;
        model.ring = ring;
        Ok(model)
    }

    /// Formal model of a Calabi–Yau threefold with `h^{1,1} = 1`: `H` spans
    /// `H^2`, `H·H = deg·g_4`, `H·g_4 = g_6`, and `H^3` carries the
    /// symplectic basis `a_i·b_i = g_6` for `i < 1 + h^{2,1}`.
    pub fn calabi_yau3(h21: usize, degree: i64) -> Result<Self> {
        let half = 1 + h21;
        let betti = vec![1, 0, 1, 2 * half, 1, 0, 1];
        let mut entries = vec![
            ((2, 0), (2, 0), vec![Rational::from_int(degree)]),
            ((2, 0), (4, 0), vec![Rational::one()]),
        ];
        for i in 0..half {
            entries.push(((3, i), (3, half + i), vec![Rational::one()]));
        }
        let ring = CupRing::new(betti.clone(), entries)?;
        let mut model = Self::formal(betti, 6, Some(ring))?;
        model.curvature_class = Some(vec![Rational::one()]);
        Ok(model)
    }

    /// Quintic threefold: `h^{1,1} = 1`, `h^{2,1} = 101`, `H^3 = 5`.
    pub fn quintic() -> Self {
        let mut m = Self::calabi_yau3(101, 5).expect("fixed data");
        m.name = "quintic".into();
        m
    }

    /// `"torus:n:m"`, `"formal:b0,b1,..."` or `"quintic"`.
    pub fn from_preset(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::input("base", format!("invalid integer {s:?} in {spec:?}")))
        };
        match parts.as_slice() {
            ["torus", n, m] => Self::torus(parse(n)?, parse(m)?),
            ["circle", m] => Self::circle(parse(m)?),
            ["formal", list] => {
                let betti = list.split(',').map(parse).collect::<Result<Vec<_>>>()?;
                if betti.is_empty() {
                    return Err(Error::input("base", "empty betti list"));
                }
                let n = betti.len() - 1;
                Self::formal(betti, n, None)
            }
            ["quintic"] => Ok(Self::quintic()),
            _ => Err(Error::input("base", format!("unknown base preset {spec:?}"))),
        }
    }

    pub fn complex(&self) -> &CochainComplex {
        &self.complex
    }

    pub fn dims(&self) -> &[usize] {
        self.complex.dims()
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    pub fn ring(&self) -> Option<&CupRing> {
        self.ring.as_ref()
    }

    pub fn curvature_class(&self) -> Option<&[Rational]> {
        self.curvature_class.as_deref()
    }

    pub fn with_ring(mut self, ring: CupRing) -> Result<Self> {
        if ring.betti != self.betti {
            return Err(Error::input("ring", "ring grading does not match betti numbers"));
        }
        self.ring = Some(ring);
        Ok(self)
    }

    /// Sets the class `[Ω] ∈ H^2` by its coefficients on the `H^2` basis.
    pub fn with_curvature_class(mut self, class: Vec<Rational>) -> Result<Self> {
        let b2 = self.betti.get(2).copied().unwrap_or(0);
        if class.len() != b2 {
            return Err(Error::input(
                "curvature_class",
                format!("class must lie in H^2 (dimension {b2}), got {} coefficients", class.len()),
            ));
        }
        self.curvature_class = Some(class);
        Ok(self)
    }

    pub fn without_curvature_class(mut self) -> Self {
        self.curvature_class = None;
        self
    }

    /// `b_k = b_{n-k}` for all `k`.
    pub fn poincare_symmetric(&self) -> bool {
        (0..=self.n).all(|k| self.betti[k] == self.betti[self.n - k])
    }

    /// `[Ω]^j` as a coefficient vector in `H^{2j}` (empty when `2j > n`).
    pub fn curvature_power(&self, j: usize) -> Result<Vec<Rational>> {
        let ring = self
            .ring
            .as_ref()
            .ok_or_else(|| Error::input("ring", format!("base {} has no ring table", self.name)))?;
        let class = self
            .curvature_class
            .as_ref()
            .ok_or_else(|| Error::input("curvature_class", format!("base {} has no curvature class", self.name)))?;
        if 2 * j > self.n {
            return Ok(Vec::new());
        }
        let mut acc = vec![Rational::one()];
        for step in 0..j {
            acc = ring.multiply(2 * step, &acc, 2, class);
        }
        Ok(acc)
    }

    /// Whether `[Ω]^j` is nonzero. Formal mode: always.
    pub fn cup_power(&self, j: usize, mode: CurvatureMode) -> Result<bool> {
        match mode {
            CurvatureMode::Formal => Ok(true),
            CurvatureMode::Ring => Ok(self.curvature_power(j)?.iter().any(|c| !c.is_zero())),
        }
    }
}

/// Total complex of `A ⊗ B` on the block layout of [`tensor_betti`].
pub fn tensor_complex(a: &CochainComplex, b: &CochainComplex) -> Result<CochainComplex> {
    let da = a.dims();
    let db = b.dims();
    let dims = tensor_betti(da, db);
    let layout = KunnethLayout::new(da, db);
    let mut maps = Vec::with_capacity(dims.len().saturating_sub(1));
    for k in 0..dims.len().saturating_sub(1) {
        let mut trip = Vec::new();
        for i in 0..=k {
            if i >= da.len() || k - i >= db.len() {
                continue;
            }
            let j = k - i;
            let src = layout.offset(k, i);
            if i + 1 < da.len() {
                let dst = layout.offset(k + 1, i + 1);
                let map = a.differential(i);
                for (r, c, v) in map.triplets() {
                    for y in 0..db[j] {
                        trip.push((dst + r * db[j] + y, src + c * db[j] + y, v.clone()));
                    }
                }
            }
            if j + 1 < db.len() {
                let dst = layout.offset(k + 1, i);
                let map = b.differential(j);
                let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
                for x in 0..da[i] {
                    for (r, c, v) in map.triplets() {
                        trip.push((dst + x * db[j + 1] + r, src + x * db[j] + c, v * &sign));
                    }
                }
            }
        }
        maps.push(LinearMap::from_triplets(dims[k + 1], dims[k], trip)?);
    }
    CochainComplex::new(dims, maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circles() {
        for m in [3, 4, 7] {
            let c = BaseModel::circle(m).unwrap();
            assert_eq!(c.dims(), &[m, m]);
            assert_eq!(c.betti(), &[1, 1]);
        }
        assert_eq!(BaseModel::circle(3).unwrap().complex().differential(0).rank(), 2);
        assert!(BaseModel::circle(2).is_err());
    }

    #[test]
    fn tori_betti() {
        assert_eq!(BaseModel::torus(2, 3).unwrap().betti(), &[1, 2, 1]);
        assert_eq!(BaseModel::torus(3, 3).unwrap().betti(), &[1, 3, 3, 1]);
        let t4 = BaseModel::torus(4, 3).unwrap();
        assert_eq!(t4.betti(), &[1, 4, 6, 4, 1]);
        assert_eq!(t4.dims(), &[81, 324, 486, 324, 81]);
        assert!(t4.complex().check_nilpotent().is_ok());
    }

    #[test]
    fn kunneth_on_mixed_pairs() {
        let bases = [
            BaseModel::circle(3).unwrap(),
            BaseModel::torus(2, 4).unwrap(),
            BaseModel::formal(vec![1, 0, 2, 0, 1], 4, None).unwrap(),
            BaseModel::formal(vec![1, 3], 1, None).unwrap(),
        ];
        for a in &bases {
            for b in &bases {
                let t = BaseModel::tensor(a, b).unwrap();
                assert_eq!(t.betti(), &tensor_betti(a.betti(), b.betti())[..]);
            }
        }
    }

    #[test]
    fn formal_unit_and_round_trip() {
        let unit = BaseModel::formal(vec![1], 0, None).unwrap();
        let x = BaseModel::torus(2, 3).unwrap();
        let t = BaseModel::tensor(&unit, &x).unwrap();
        assert_eq!(t.dims(), x.dims());
        let f = BaseModel::formal(vec![1, 2, 1], 2, None).unwrap();
        assert_eq!(f.betti(), &[1, 2, 1]);
        assert!(BaseModel::formal(vec![0, 1], 1, None).is_err());
        assert!(BaseModel::formal(vec![1, 1], 2, None).is_err());
    }

    #[test]
    fn quintic_numbers() {
        let q = BaseModel::quintic();
        assert_eq!(q.betti(), &[1, 0, 1, 204, 1, 0, 1]);
        assert!(q.poincare_symmetric());
        assert!(q.cup_power(3, CurvatureMode::Ring).unwrap());
        assert_eq!(q.curvature_power(3).unwrap(), vec![Rational::from_int(5)]);
        assert!(!q.cup_power(4, CurvatureMode::Ring).unwrap());
    }

    #[test]
    fn torus_cup_powers() {
        let t2 = BaseModel::torus(2, 3).unwrap();
        assert!(t2.cup_power(0, CurvatureMode::Ring).unwrap());
        assert!(t2.cup_power(1, CurvatureMode::Ring).unwrap());
        assert!(!t2.cup_power(2, CurvatureMode::Ring).unwrap());
        assert!(t2.cup_power(2, CurvatureMode::Formal).unwrap());
        let t4 = BaseModel::torus(4, 3).unwrap();
        assert!(t4.cup_power(2, CurvatureMode::Ring).unwrap());
        assert!(!t4.cup_power(3, CurvatureMode::Ring).unwrap());
        let f = BaseModel::formal(vec![1, 2, 1], 2, None).unwrap();
        assert!(f.cup_power(1, CurvatureMode::Ring).is_err());
    }

    #[test]
    fn exterior_ring_is_graded_commutative() {
        let r = BaseModel::torus(3, 3).unwrap().ring().unwrap().clone();
        let e = |i: usize| {
            let mut v = vec![Rational::zero(); 3];
            v[i] = Rational::one();
            v
        };
        for i in 0..3 {
            assert!(r.multiply(1, &e(i), 1, &e(i)).iter().all(Rational::is_zero));
            for j in 0..3 {
                let xy = r.multiply(1, &e(i), 1, &e(j));
                let yx = r.multiply(1, &e(j), 1, &e(i));
                assert!(xy.iter().zip(&yx).all(|(a, b)| a == &-b.clone()));
            }
        }
        let x01 = r.multiply(1, &e(0), 1, &e(1));
        assert!(!r.multiply(2, &x01, 1, &e(2)).iter().all(Rational::is_zero));
    }

    #[test]
    fn ring_validation() {
        assert!(CupRing::new(vec![1, 0, 1], [((2, 0), (0, 0), vec![])]).is_err());
        assert!(CupRing::new(vec![1, 1, 1], [((1, 0), (1, 0), vec![Rational::one(), Rational::one()])]).is_err());
        let base = BaseModel::torus(2, 3).unwrap();
        assert!(base.clone().with_curvature_class(vec![Rational::one(); 2]).is_err());
        assert!(base.with_curvature_class(vec![Rational::one()]).is_ok());
    }

    #[test]
    fn presets() {
        assert_eq!(BaseModel::from_preset("torus:2:3").unwrap().betti(), &[1, 2, 1]);
        assert_eq!(BaseModel::from_preset("formal:1,0,1").unwrap().n, 2);
        assert!(BaseModel::from_preset("sphere").is_err());
        assert!(BaseModel::from_preset("torus:x:3").is_err());
    }
}
