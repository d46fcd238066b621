//! Pointwise identities on lattice fields and their refinement behaviour.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compat::{
    cartan_residual, compatibility_functional, curvature, curvature_component, functional_gradient, integrability_obstruction,
    solve_lambda, SolveConfig,
};
use super::{
    discrete_d, dot, random_cochain, smooth_cochain, Cochain, CoMomentField, ConnectionField, FloatAlgebra, LatticeSpec,
    RandomFieldSpec,
};
use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticReport {
    /// `max_x max_{d1<d2} |E_{d1 d2}(x)|`.
    pub max_error: f64,
    pub cartan_residual_max: f64,
    /// `max |⟨λ, Ω⟩|`, the size of the leading term.
    pub pairing_max: f64,
}

/// Checks `dθ = ⟨λ, Ω⟩ + ⟨λ, [ω_{d1}, ω_{d2}]⟩` for `θ_d = ⟨λ, ω_d⟩`.
///
/// The defect of the discrete Leibniz rule for `⟨λ, ω⟩` is the Cartan
/// residual paired with the shifted connection,
/// `C = ⟨R_{d1}(x), ω_{d2}(x + h e_{d1})⟩ - ⟨R_{d2}(x), ω_{d1}(x + h e_{d2})⟩`,
/// and is subtracted so that `E = dθ - ⟨λ,Ω⟩ - ⟨λ,[ω_{d1},ω_{d2}]⟩ - C`
/// vanishes for abelian algebras and is `O(h)` otherwise.
pub fn symplectic_check(spec: &LatticeSpec, omega: &ConnectionField, lam: &CoMomentField) -> Result<SymplecticReport> {
    let big = curvature(spec, omega)?;
    let res = cartan_residual(spec, omega, lam)?;
    let mut theta = Cochain::zeros(spec, 1, 1);
    for s in 0..spec.sites() {
        for d in 0..spec.n {
            theta.at_mut(s, d)[0] = dot(lam.at(s, 0), omega.at(s, d));
        }
    }
    let mut max_error: f64 = 0.0;
    let mut pairing_max: f64 = 0.0;
    if spec.n >= 2 {
        let dtheta = discrete_d(spec, &theta)?;
        for s in 0..spec.sites() {
            let l = lam.at(s, 0);
            for (c, pair) in spec.components(2).iter().enumerate() {
                let (a, b) = (pair[0], pair[1]);
                let pairing = dot(l, big.at(s, c));
                let br = dot(l, &spec.alg.bracket(omega.at(s, a), omega.at(s, b)));
                let corr = dot(res.at(s, a), omega.at(spec.shift(s, a), b)) - dot(res.at(s, b), omega.at(spec.shift(s, b), a));
                let e = dtheta.at(s, c)[0] - pairing - br - corr;
                max_error = max_error.max(libm::fabs(e));
                pairing_max = pairing_max.max(libm::fabs(pairing));
            }
        }
    }
    Ok(SymplecticReport {
        max_error,
        cartan_residual_max: res.max_norm(),
        pairing_max,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementStudy {
    pub sizes: Vec<usize>,
    pub hs: Vec<f64>,
    pub symplectic_errors: Vec<f64>,
    pub frobenius_defects: Vec<f64>,
    pub symplectic_order: f64,
    pub frobenius_order: f64,
}

/// Symplectic error and plaquette defect on smooth fields over `n = 2`
/// lattices of the given sizes. `λ` is the `α = 1` minimizer anchored at a
/// smooth field.
pub fn refinement_study(alg: &LieAlgebra, sizes: &[usize], seed: u64) -> Result<RefinementStudy> {
    if sizes.len() < 2 {
        return Err(Error::input("sizes", "need at least two lattice sizes"));
    }
    let mut hs = Vec::new();
    let mut symplectic_errors = Vec::new();
    let mut frobenius_defects = Vec::new();
    for &nn in sizes {
        let s = LatticeSpec::new(2, nn, alg)?;
        let w = smooth_cochain(&s, 1, s.dim(), seed, 1.0, 3);
        let anchor = smooth_cochain(&s, 0, s.dim(), seed + 1, 1.0, 3);
        let cfg = SolveConfig {
            alpha: 1.0,
            tol: 1e-10,
            maxiter: 5000,
            pin_site: 0,
        };
        let lam = solve_lambda(&s, &w, &anchor, &anchor, cfg)?.lambda;
        hs.push(s.h);
        symplectic_errors.push(symplectic_check(&s, &w, &lam)?.max_error);
        frobenius_defects.push(frobenius_check(&s, &w)?.max_defect);
    }
    Ok(RefinementStudy {
        sizes: sizes.to_vec(),
        symplectic_order: refinement_order(&hs, &symplectic_errors),
        frobenius_order: refinement_order(&hs, &frobenius_defects),
        hs,
        symplectic_errors,
        frobenius_defects,
    })
}

/// Max relative error between `⟨∇I, v⟩` and the central difference
/// `(I(λ + εv) - I(λ - εv)) / 2ε` over random unit directions `v`.
pub fn gradient_check(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    anchor: &CoMomentField,
    alpha: f64,
    directions: usize,
    seed: u64,
) -> Result<f64> {
    let g = functional_gradient(spec, omega, lam, anchor, alpha)?;
    let eps = 1e-3;
    let mut worst: f64 = 0.0;
    for k in 0..directions {
        let mut v = random_cochain(spec, 0, spec.dim(), RandomFieldSpec { seed: seed.wrapping_add(k as u64), amp: 1.0 });
        let nv = libm::sqrt(v.l2_sq());
        v = v.scaled(1.0 / nv);
        let mut plus = lam.clone();
        plus.axpy(eps, &v);
        let mut minus = lam.clone();
        minus.axpy(-eps, &v);
        let fd = (compatibility_functional(spec, omega, &plus, anchor, alpha)?
            - compatibility_functional(spec, omega, &minus, anchor, alpha)?)
            / (2.0 * eps);
        let exact = dot(&g.data, &v.data);
        worst = worst.max(libm::fabs(fd - exact) / libm::fabs(exact).max(1e-12));
    }
    Ok(worst)
}

/// Least-squares slope of `log error` against `log h`.
pub fn refinement_order(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| libm::log(*h)).collect();
    let ys: Vec<f64> = errors.iter().map(|e| libm::log(*e)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Max error of `⟨ad*_X λ, Y⟩ - ⟨ad*_Y λ, X⟩ + 2⟨λ, [X, Y]⟩ = 0` over
/// random `λ, X, Y` with entries uniform in `[-1, 1]`.
pub fn step4_identity_sample(alg: &LieAlgebra, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::input("trials", "need at least one trial"));
    }
    let f = FloatAlgebra::new(alg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |d: usize| -> Vec<f64> { (0..d).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect() };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (l, x, y) = (draw(f.dim), draw(f.dim), draw(f.dim));
        let e = dot(&f.coadjoint(&x, &l), &y) - dot(&f.coadjoint(&y, &l), &x) + 2.0 * dot(&l, &f.bracket(&x, &y));
        worst = worst.max(libm::fabs(e));
    }
    Ok(worst)
}

/// `exp(A)` for a small dense row-major matrix, by scaling and squaring.
pub fn expm(a: &[f64], d: usize) -> Vec<f64> {
    let nrm = a.iter().fold(0.0, |m: f64, x| m.max(libm::fabs(*x))) * d as f64;
    let mut squarings = 0;
    let mut scale = 1.0;
    while nrm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x: Vec<f64> = a.iter().map(|v| v * scale).collect();
    let mut out = identity(d);
    let mut term = identity(d);
    for k in 1..=18 {
        term = matmul(&term, &x, d);
        term.iter_mut().for_each(|t| *t /= k as f64);
        out.iter_mut().zip(&term).for_each(|(o, t)| *o += t);
    }
    for _ in 0..squarings {
        out = matmul(&out, &out, d);
    }
    out
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

pub(crate) fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// `log(M)` for `M` near the identity, by the Mercator series.
fn logm_near_identity(m: &[f64], d: usize) -> Vec<f64> {
    let x: Vec<f64> = m.iter().zip(identity(d)).map(|(a, i)| a - i).collect();
    let mut out = vec![0.0; d * d];
    let mut power = identity(d);
    for k in 1..=30 {
        power = matmul(&power, &x, d);
        let s = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        out.iter_mut().zip(&power).for_each(|(o, p)| *o += s * p);
    }
    out
}

/// Coordinates `ζ` with `ad_ζ ≈ M`, by least squares over the `ad` basis.
fn ad_inverse(alg: &FloatAlgebra, m: &[f64]) -> Vec<f64> {
    let d = alg.dim;
    let basis: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            alg.ad_matrix(&e)
        })
        .collect();
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            gram[i * d + j] = dot(&basis[i], &basis[j]);
        }
        rhs[i] = dot(&basis[i], m);
    }
    solve_dense(gram, rhs, d)
}

fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, d: usize) -> Vec<f64> {
    for col in 0..d {
        let p = (col..d).max_by(|&x, &y| libm::fabs(a[x * d + col]).total_cmp(&libm::fabs(a[y * d + col]))).unwrap();
        for j in 0..d {
            a.swap(col * d + j, p * d + j);
        }
        b.swap(col, p);
        let piv = a[col * d + col];
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r * d + col] / piv;
            for j in col..d {
                a[r * d + j] -= f * a[col * d + j];
            }
            b[r] -= f * b[col];
        }
    }
    (0..d).map(|i| b[i] / a[i * d + i]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusReport {
    /// `max_x ‖log(hol_x)/h² + Ω_{12}(x)‖` over plaquettes in the first two axes.
    pub max_defect: f64,
    pub curvature_max: f64,
}

/// Vertical part of the commutator of the horizontal lifts of `∂_1`, `∂_2`
/// around each plaquette, compared with the curvature.
///
/// Parallel transport along a link is `exp(-h ω_d)` in the adjoint
/// representation; the plaquette holonomy `g_b^{-1} g_a` with
/// `g_a = exp(-h ω_2(x+e_1)) exp(-h ω_1(x))` and
/// `g_b = exp(-h ω_1(x+e_2)) exp(-h ω_2(x))` satisfies
/// `log(g_b^{-1} g_a) = -h² ad Ω_{12}(x) + O(h³)`, i.e. `ω([X, Y]) = -Ω(X, Y)`
/// for the horizontal lifts.
pub fn frobenius_check(spec: &LatticeSpec, omega: &ConnectionField) -> Result<FrobeniusReport> {
    if spec.n < 2 {
        return Err(Error::input("n", "plaquettes need at least two axes"));
    }
    let alg = &spec.alg;
    let d = alg.dim;
    let basis_rank = {
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                alg.ad_matrix(&e)
            })
            .collect();
        super::compat::numerical_rank(&rows, 1e-12)
    };
    if basis_rank < d {
        return Err(Error::UnsupportedAlgebra(alloc::format!(
            "{}: adjoint representation is not faithful",
            alg.name
        )));
    }
    let big = curvature(spec, omega)?;
    let link = |site: usize, axis: usize| -> Vec<f64> {
        let a: Vec<f64> = alg.ad_matrix(omega.at(site, axis)).iter().map(|v| -spec.h * v).collect();
        expm(&a, d)
    };
    let inverse = |m: &[f64]| -> Vec<f64> {
        // Links are orthogonal-like only for compact algebras; invert directly.
        let mut out = Vec::with_capacity(d * d);
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                solve_dense(m.to_vec(), e, d)
            })
            .collect();
        for i in 0..d {
            for c in &cols {
                out.push(c[i]);
            }
        }
        out
    };
    let mut max_defect: f64 = 0.0;
    let mut curvature_max: f64 = 0.0;
    let inv_h2 = 1.0 / (spec.h * spec.h);
    for s in 0..spec.sites() {
        let ga = matmul(&link(spec.shift(s, 0), 1), &link(s, 0), d);
        let gb = matmul(&link(spec.shift(s, 1), 0), &link(s, 1), d);
        let hol = matmul(&inverse(&gb), &ga, d);
        let zeta = ad_inverse(alg, &logm_near_identity(&hol, d));
        let om = curvature_component(spec, &big, s, 0, 1);
        let defect: Vec<f64> = zeta.iter().zip(&om).map(|(z, o)| z * inv_h2 + o).collect();
        max_defect = max_defect.max(super::norm(&defect));
        curvature_max = curvature_max.max(super::norm(&om));
    }
    Ok(FrobeniusReport {
        max_defect,
        curvature_max,
    })
}

/// `|I(gauge-shifted fields) - I(fields)|` for the first-order shift by a
/// constant `ξ` with step `dt`: `ω → ω + dt[ω, ξ]`, `λ → λ - dt ad*_ξ λ`,
/// and the anchor transformed like `λ`.
pub fn gauge_shift_defect(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    anchor: &CoMomentField,
    alpha: f64,
    xi: &[f64],
    dt: f64,
) -> Result<f64> {
    let base = compatibility_functional(spec, omega, lam, anchor, alpha)?;
    let mut w = omega.clone();
    for s in 0..spec.sites() {
        for d in 0..spec.n {
            let v = omega.at(s, d).to_vec();
            spec.alg.bracket_acc(&v, xi, dt, w.at_mut(s, d));
        }
    }
    let shift = |f: &CoMomentField| {
        let mut out = f.clone();
        for s in 0..spec.sites() {
            let v = f.at(s, 0).to_vec();
            spec.alg.coadjoint_acc(xi, &v, -dt, out.at_mut(s, 0));
        }
        out
    };
    let moved = compatibility_functional(spec, &w, &shift(lam), &shift(anchor), alpha)?;
    Ok(libm::fabs(moved - base))
}

/// Premise and conclusion of "small Cartan residual implies small pairing".
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyCheck {
    pub residual: f64,
    pub obstruction: f64,
    pub curvature_max: f64,
    pub premise: bool,
    /// `obstruction ≤ c · tol · ‖Ω‖` (vacuous when the premise fails).
    pub holds: bool,
}

pub fn consistency_check(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    tol: f64,
    c: f64,
) -> Result<ConsistencyCheck> {
    let residual = cartan_residual(spec, omega, lam)?.max_norm();
    let obs = integrability_obstruction(spec, omega, lam, tol)?;
    let curvature_max = curvature(spec, omega)?.max_norm();
    let premise = residual < tol;
    Ok(ConsistencyCheck {
        residual,
        obstruction: obs.max,
        curvature_max,
        premise,
        holds: !premise || obs.max <= c * tol * curvature_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step4_identity() {
        assert!(step4_identity_sample(&LieAlgebra::su2(), 1000, 1).unwrap() < 1e-12);
        assert!(step4_identity_sample(&LieAlgebra::sl3(), 1000, 1).unwrap() < 1e-11);
        assert_eq!(step4_identity_sample(&LieAlgebra::abelian(4).unwrap(), 50, 1).unwrap(), 0.0);
        assert!(step4_identity_sample(&LieAlgebra::su2(), 0, 1).is_err());
    }

    #[test]
    fn symplectic_vanishes_when_flat_or_abelian() {
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let lam = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 1, amp: 1.0 });
        let rep = symplectic_check(&s, &Cochain::zeros(&s, 1, 3), &lam).unwrap();
        assert_eq!(rep.max_error, 0.0);
        let ab = LatticeSpec::new(2, 8, &LieAlgebra::abelian(3).unwrap()).unwrap();
        let w = random_cochain(&ab, 1, 3, RandomFieldSpec { seed: 2, amp: 1.0 });
        let rep = symplectic_check(&ab, &w, &lam).unwrap();
        assert!(rep.max_error < 1e-12, "{}", rep.max_error);
    }

    #[test]
    fn refinement_orders_are_first_order() {
        let st = refinement_study(&LieAlgebra::su2(), &[8, 16, 32], 21).unwrap();
        assert!((st.symplectic_order - 1.0).abs() <= 0.3, "{st:?}");
        assert!((st.frobenius_order - 1.0).abs() <= 0.3, "{st:?}");
        assert!(refinement_study(&LieAlgebra::su2(), &[8], 1).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let w = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 1, amp: 0.7 });
        let l = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 2, amp: 1.0 });
        let a = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 3, amp: 1.0 });
        assert!(gradient_check(&s, &w, &l, &a, 0.5, 20, 7).unwrap() < 1e-6);
    }

    #[test]
    fn expm_of_rotation() {
        let t = 0.3f64;
        let a = [0.0, -t, t, 0.0];
        let e = expm(&a, 2);
        assert!((e[0] - libm::cos(t)).abs() < 1e-15 && (e[2] - libm::sin(t)).abs() < 1e-15);
    }

    #[test]
    fn gauge_shift_is_second_order() {
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let w = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 3, amp: 0.5 });
        let l = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 4, amp: 1.0 });
        let a = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 5, amp: 1.0 });
        let xi = [0.3, -0.2, 0.5];
        let dts = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = dts.iter().map(|&dt| gauge_shift_defect(&s, &w, &l, &a, 0.3, &xi, dt).unwrap()).collect();
        assert!(refinement_order(&dts, &errs) >= 1.9, "{errs:?}");
    }

    #[test]
    fn consistency_condition_fails_for_abelian_direction() {
        // ω along e3 only: λ = e3* solves the Cartan equation exactly while
        // pairing nontrivially with the curvature.
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let two_pi = 2.0 * core::f64::consts::PI;
        let w = Cochain::from_fn(&s, 1, 3, |x, c| if c == 0 { vec![0.0, 0.0, libm::sin(two_pi * x[1])] } else { vec![0.0; 3] });
        let lam = Cochain::constant(&s, 0, &[vec![0.0, 0.0, 1.0]]).unwrap();
        let rep = consistency_check(&s, &w, &lam, 1e-10, 10.0).unwrap();
        assert!(rep.premise);
        assert_eq!(rep.residual, 0.0);
        assert!(rep.obstruction > 1.0);
        assert!(!rep.holds);
        let o = integrability_obstruction(&s, &w, &lam, 1e-10).unwrap();
        assert_eq!(o.coadjoint_max, 0.0);
    }
}
