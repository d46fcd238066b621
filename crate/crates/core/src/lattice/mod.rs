//! Floating-point laboratory on a trivial principal bundle over a periodic
//! lattice torus: connection and co-moment fields, curvature, the modified
//! Cartan equation, the variational solver, identity checks and evolution.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;

mod checks;
mod compat;
mod evolve;

pub use checks::*;
pub use compat::*;
pub use evolve::*;

/// Structure constants in `f64`, with the nonzero entries listed.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatAlgebra {
    pub name: String,
    pub dim: usize,
    /// `c[(i * dim + j) * dim + k] = c_{ij}^k`.
    pub c: Vec<f64>,
    nonzero: Vec<(usize, usize, usize, f64)>,
}

impl FloatAlgebra {
    pub fn new(alg: &LieAlgebra) -> Self {
        let d = alg.dim();
        let mut c = vec![0.0; d * d * d];
        let mut nonzero = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = alg.constant(i, j, k).to_f64();
                    if v != 0.0 {
                        c[(i * d + j) * d + k] = v;
                        nonzero.push((i, j, k, v));
                    }
                }
            }
        }
        FloatAlgebra {
            name: alg.name().into(),
            dim: d,
            c,
            nonzero,
        }
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.nonzero.is_empty()
    }

    /// `out += s · [x, y]`.
    pub fn bracket_acc(&self, x: &[f64], y: &[f64], s: f64, out: &mut [f64]) {
        for &(i, j, k, v) in &self.nonzero {
            out[k] += s * v * x[i] * y[j];
        }
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.bracket_acc(x, y, 1.0, &mut out);
        out
    }

    /// `out += s · ad*_ξ λ`, `(ad*_ξ λ)_c = -Σ_{a,b} ξ_a λ_b c_{ac}^b`.
    pub fn coadjoint_acc(&self, xi: &[f64], lam: &[f64], s: f64, out: &mut [f64]) {
        for &(a, c, b, v) in &self.nonzero {
            out[c] -= s * v * xi[a] * lam[b];
        }
    }

    pub fn coadjoint(&self, xi: &[f64], lam: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.coadjoint_acc(xi, lam, 1.0, &mut out);
        out
    }

    /// `out += s · (ad*_ξ)^T r`, the transpose in `λ` of [`coadjoint_acc`](Self::coadjoint_acc).
    pub fn coadjoint_transpose_acc(&self, xi: &[f64], r: &[f64], s: f64, out: &mut [f64]) {
        for &(a, c, b, v) in &self.nonzero {
            out[b] -= s * v * xi[a] * r[c];
        }
    }

    /// `ad_ξ` as a dense row-major matrix.
    pub fn ad_matrix(&self, xi: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for &(i, j, k, v) in &self.nonzero {
            m[k * d + j] += v * xi[i];
        }
        m
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Periodic lattice `(ℤ/N)^n` with spacing `h = 1/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub n: usize,
    pub sites_per_axis: usize,
    pub h: f64,
    pub alg: FloatAlgebra,
    components: Vec<Vec<Vec<usize>>>,
}

impl LatticeSpec {
    pub fn new(n: usize, sites_per_axis: usize, alg: &LieAlgebra) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(Error::input("n", format!("base dimension must be 1..=4, got {n}")));
        }
        if sites_per_axis < 4 {
            return Err(Error::input("N", format!("need at least 4 sites per axis, got {sites_per_axis}")));
        }
        let components = (0..=n).map(|p| subsets(n, p)).collect();
        Ok(LatticeSpec {
            n,
            sites_per_axis,
            h: 1.0 / sites_per_axis as f64,
            alg: FloatAlgebra::new(alg),
            components,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites_per_axis.pow(self.n as u32)
    }

    pub fn dim(&self) -> usize {
        self.alg.dim
    }

    /// `h^n`, the volume element.
    pub fn volume(&self) -> f64 {
        libm::pow(self.h, self.n as f64)
    }

    /// Axis-ordered index tuples of degree `p`, lexicographic.
    pub fn components(&self, p: usize) -> &[Vec<usize>] {
        &self.components[p]
    }

    pub fn component_index(&self, axes: &[usize]) -> Option<usize> {
        self.components.get(axes.len())?.iter().position(|c| c == axes)
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        let mut s = site;
        for _ in 0..self.n {
            out.push(s % self.sites_per_axis);
            s /= self.sites_per_axis;
        }
        out
    }

    /// Position `x_i = index · h` of a site.
    pub fn position(&self, site: usize) -> Vec<f64> {
        self.coords(site).into_iter().map(|c| c as f64 * self.h).collect()
    }

    /// `x + e_axis`, periodic.
    pub fn shift(&self, site: usize, axis: usize) -> usize {
        let stride = self.sites_per_axis.pow(axis as u32);
        let c = (site / stride) % self.sites_per_axis;
        if c + 1 == self.sites_per_axis {
            site - c * stride
        } else {
            site + stride
        }
    }

    /// `x - e_axis`, periodic.
    pub fn shift_back(&self, site: usize, axis: usize) -> usize {
        let stride = self.sites_per_axis.pow(axis as u32);
        let c = (site / stride) % self.sites_per_axis;
        if c == 0 {
            site + (self.sites_per_axis - 1) * stride
        } else {
            site - stride
        }
    }
}

fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, p, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, p, 0, &mut Vec::new(), &mut out);
    out
}

/// A `p`-cochain with `width` real values per component and site.
/// Layout: `data[(site * ncomp + comp) * width + v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub width: usize,
    pub ncomp: usize,
    pub data: Vec<f64>,
}

/// Connection `ω`: a 1-cochain of algebra vectors.
pub type ConnectionField = Cochain;
/// Curvature `Ω`: a 2-cochain of algebra vectors.
pub type CurvatureField = Cochain;
/// Co-moment `λ`: a 0-cochain of covectors.
pub type CoMomentField = Cochain;

impl Cochain {
    pub fn zeros(spec: &LatticeSpec, degree: usize, width: usize) -> Self {
        let ncomp = spec.components(degree).len();
        Cochain {
            degree,
            width,
            ncomp,
            data: vec![0.0; spec.sites() * ncomp * width],
        }
    }

    /// Same value at every site and component.
    pub fn constant(spec: &LatticeSpec, degree: usize, values: &[Vec<f64>]) -> Result<Self> {
        let width = values.first().map_or(0, Vec::len);
        let mut out = Self::zeros(spec, degree, width);
        if values.len() != out.ncomp || values.iter().any(|v| v.len() != width) {
            return Err(Error::input("values", "one value per component, all of equal width"));
        }
        for s in 0..spec.sites() {
            for (c, v) in values.iter().enumerate() {
                out.at_mut(s, c).copy_from_slice(v);
            }
        }
        Ok(out)
    }

    pub fn from_fn(spec: &LatticeSpec, degree: usize, width: usize, f: impl Fn(&[f64], usize) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(spec, degree, width);
        for s in 0..spec.sites() {
            let x = spec.position(s);
            for c in 0..out.ncomp {
                let v = f(&x, c);
                out.at_mut(s, c).copy_from_slice(&v);
            }
        }
        out
    }

    pub fn at(&self, site: usize, comp: usize) -> &[f64] {
        let o = (site * self.ncomp + comp) * self.width;
        &self.data[o..o + self.width]
    }

    pub fn at_mut(&mut self, site: usize, comp: usize) -> &mut [f64] {
        let o = (site * self.ncomp + comp) * self.width;
        &mut self.data[o..o + self.width]
    }

    pub fn sites(&self) -> usize {
        self.data.len() / (self.ncomp * self.width).max(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
    }

    /// Largest Euclidean norm over all `(site, component)` values.
    pub fn max_norm(&self) -> f64 {
        self.data.chunks(self.width.max(1)).fold(0.0, |m, v| m.max(norm(v)))
    }

    pub fn l2_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn axpy(&mut self, a: f64, other: &Cochain) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, a: f64) -> Cochain {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= a);
        out
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    fn check(&self, spec: &LatticeSpec, degree: usize, width: usize, param: &'static str) -> Result<()> {
        if self.degree != degree || self.width != width || self.data.len() != spec.sites() * spec.components(degree).len() * width {
            return Err(Error::input(
                param,
                format!("expected a degree-{degree} cochain of width {width} on {} sites", spec.sites()),
            ));
        }
        Ok(())
    }
}

/// `(dα)_{D}(x) = Σ_m (-1)^m (α_{D∖d_m}(x + h e_{d_m}) - α_{D∖d_m}(x)) / h`.
pub fn discrete_d(spec: &LatticeSpec, alpha: &Cochain) -> Result<Cochain> {
    let p = alpha.degree;
    if p >= spec.n {
        return Err(Error::input("degree", format!("cannot differentiate a {p}-cochain on an {}-torus", spec.n)));
    }
    alpha.check(spec, p, alpha.width, "alpha")?;
    let mut out = Cochain::zeros(spec, p + 1, alpha.width);
    let faces: Vec<Vec<(usize, usize, f64)>> = spec
        .components(p + 1)
        .iter()
        .map(|axes| {
            (0..axes.len())
                .map(|m| {
                    let mut rest = axes.clone();
                    let d = rest.remove(m);
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    (d, spec.component_index(&rest).expect("face"), sign)
                })
                .collect()
        })
        .collect();
    let inv_h = 1.0 / spec.h;
    for s in 0..spec.sites() {
        for (c, face) in faces.iter().enumerate() {
            for &(d, fc, sign) in face {
                let t = spec.shift(s, d);
                for v in 0..alpha.width {
                    let diff = alpha.at(t, fc)[v] - alpha.at(s, fc)[v];
                    out.at_mut(s, c)[v] += sign * diff * inv_h;
                }
            }
        }
    }
    Ok(out)
}

/// Parsed `"random:seed=<int>:amp=<float>"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomFieldSpec {
    pub seed: u64,
    pub amp: f64,
}

impl core::str::FromStr for RandomFieldSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        if parts.next() != Some("random") {
            return Err(Error::input("field", format!("expected random:seed=<int>:amp=<float>, got {s:?}")));
        }
        let mut seed = None;
        let mut amp = None;
        for kv in parts {
            match kv.split_once('=') {
                Some(("seed", v)) => seed = v.parse().ok(),
                Some(("amp", v)) => amp = v.parse().ok().filter(|a: &f64| a.is_finite() && *a >= 0.0),
                _ => return Err(Error::input("field", format!("unknown key in {s:?}"))),
            }
        }
        match (seed, amp) {
            (Some(seed), Some(amp)) => Ok(RandomFieldSpec { seed, amp }),
            _ => Err(Error::input("field", format!("need seed=<int> and amp=<nonnegative float> in {s:?}"))),
        }
    }
}

/// Entries uniform in `[-amp, amp]` from a seeded ChaCha8 stream.
pub fn random_cochain(spec: &LatticeSpec, degree: usize, width: usize, rnd: RandomFieldSpec) -> Cochain {
    let mut rng = ChaCha8Rng::seed_from_u64(rnd.seed);
    let mut out = Cochain::zeros(spec, degree, width);
    for x in out.data.iter_mut() {
        *x = rnd.amp * (2.0 * rng.gen::<f64>() - 1.0);
    }
    out
}

/// Sum of a few low Fourier modes with seeded amplitudes and phases; the
/// same seed gives the same continuum field at every resolution.
pub fn smooth_cochain(spec: &LatticeSpec, degree: usize, width: usize, seed: u64, amp: f64, modes: usize) -> Cochain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ncomp = spec.components(degree).len();
    let mut terms: Vec<(usize, usize, Vec<f64>, f64, f64)> = Vec::new();
    for c in 0..ncomp {
        for v in 0..width {
            for _ in 0..modes {
                let k: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
                let a = amp * (2.0 * rng.gen::<f64>() - 1.0) / modes as f64;
                let phase = 2.0 * core::f64::consts::PI * rng.gen::<f64>();
                terms.push((c, v, k, a, phase));
            }
        }
    }
    let mut out = Cochain::zeros(spec, degree, width);
    for s in 0..spec.sites() {
        let x = spec.position(s);
        for (c, v, k, a, phase) in &terms {
            let arg = 2.0 * core::f64::consts::PI * dot(k, &x) + phase;
            out.at_mut(s, *c)[*v] += a * libm::cos(arg);
        }
    }
    out
}
