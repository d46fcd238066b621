//! Curvature, the modified Cartan equation, constraint distributions, and
//! the variational construction of co-moment fields.

use alloc::vec;
use alloc::vec::Vec;

use super::{discrete_d, dot, norm, Cochain, CoMomentField, ConnectionField, CurvatureField, LatticeSpec};
use crate::error::{Error, Result};

/// `Ω_{d1 d2} = (dω)_{d1 d2} + [ω_{d1}, ω_{d2}]`, pointwise.
pub fn curvature(spec: &LatticeSpec, omega: &ConnectionField) -> Result<CurvatureField> {
    omega.check(spec, 1, spec.dim(), "omega")?;
    if spec.n < 2 {
        return Ok(Cochain::zeros(spec, 2, spec.dim()));
    }
    let mut out = discrete_d(spec, omega)?;
    let pairs: Vec<Vec<usize>> = spec.components(2).to_vec();
    for s in 0..spec.sites() {
        for (c, pair) in pairs.iter().enumerate() {
            let (a, b) = (omega.at(s, pair[0]).to_vec(), omega.at(s, pair[1]).to_vec());
            spec.alg.bracket_acc(&a, &b, 1.0, out.at_mut(s, c));
        }
    }
    Ok(out)
}

/// `Ω_{ab}` for any ordered axis pair, antisymmetric in `(a, b)`.
pub fn curvature_component(spec: &LatticeSpec, omega2: &CurvatureField, site: usize, a: usize, b: usize) -> Vec<f64> {
    if a == b {
        return vec![0.0; spec.dim()];
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let c = spec.component_index(&[lo, hi]).expect("axis pair");
    omega2.at(site, c).iter().map(|x| sign * x).collect()
}

/// `L(λ)_d = (dλ)_d + ad*_{ω_d} λ`.
fn apply_l(spec: &LatticeSpec, omega: &ConnectionField, lam: &CoMomentField) -> Cochain {
    let mut out = discrete_d(spec, lam).expect("0-cochain");
    for s in 0..spec.sites() {
        for d in 0..spec.n {
            let w = omega.at(s, d).to_vec();
            spec.alg.coadjoint_acc(&w, lam.at(s, 0), 1.0, out.at_mut(s, d));
        }
    }
    out
}

/// `L^T R`, assembled as the exact transpose of [`apply_l`].
fn apply_lt(spec: &LatticeSpec, omega: &ConnectionField, r: &Cochain) -> CoMomentField {
    let dim = spec.dim();
    let mut out = Cochain::zeros(spec, 0, dim);
    let inv_h = 1.0 / spec.h;
    for s in 0..spec.sites() {
        for d in 0..spec.n {
            let back = spec.shift_back(s, d);
            for v in 0..dim {
                out.at_mut(s, 0)[v] += (r.at(back, d)[v] - r.at(s, d)[v]) * inv_h;
            }
            let w = omega.at(s, d).to_vec();
            let rv = r.at(s, d).to_vec();
            spec.alg.coadjoint_transpose_acc(&w, &rv, 1.0, out.at_mut(s, 0));
        }
    }
    out
}

/// Residual of the discrete modified Cartan equation.
pub fn cartan_residual(spec: &LatticeSpec, omega: &ConnectionField, lam: &CoMomentField) -> Result<Cochain> {
    omega.check(spec, 1, spec.dim(), "omega")?;
    lam.check(spec, 0, spec.dim(), "lambda")?;
    Ok(apply_l(spec, omega, lam))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    /// `s(x) = max_{d1<d2} |⟨λ(x), Ω_{d1 d2}(x)⟩|`.
    pub field: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// `max_x max_{d1<d2} ‖ad*_{Ω_{d1 d2}} λ‖`.
    pub coadjoint_max: f64,
    pub holonomic: bool,
}

pub fn integrability_obstruction(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    tol: f64,
) -> Result<ObstructionReport> {
    lam.check(spec, 0, spec.dim(), "lambda")?;
    let big = curvature(spec, omega)?;
    let mut field = vec![0.0f64; spec.sites()];
    let mut coadjoint_max: f64 = 0.0;
    for (s, slot) in field.iter_mut().enumerate() {
        for c in 0..big.ncomp {
            *slot = slot.max(libm::fabs(dot(lam.at(s, 0), big.at(s, c))));
            coadjoint_max = coadjoint_max.max(norm(&spec.alg.coadjoint(big.at(s, c), lam.at(s, 0))));
        }
    }
    let max = field.iter().cloned().fold(0.0, f64::max);
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    Ok(ObstructionReport {
        field,
        max,
        mean,
        coadjoint_max,
        holonomic: max < tol,
    })
}

/// Kernel of `(v, ξ) ↦ ⟨λ(x), Σ_d v_d ω_d(x) + ξ⟩` in `ℝ^n ⊕ 𝔤`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSubspaceReport {
    pub site: usize,
    /// Orthonormal basis, each vector of length `n + dim 𝔤`.
    pub basis: Vec<Vec<f64>>,
    pub dim_d: usize,
    pub dim_d_cap_v: usize,
    pub dim_d_plus_v: usize,
    pub ambient: usize,
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn numerical_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).max_by(|&a, &b| libm::fabs(m[a][col]).total_cmp(&libm::fabs(m[b][col])));
        let Some(pr) = pivot else { break };
        if libm::fabs(m[pr][col]) <= tol {
            continue;
        }
        m.swap(rank, pr);
        for r in 0..m.len() {
            if r != rank {
                let f = m[r][col] / m[rank][col];
                if f != 0.0 {
                    for c in col..ncols {
                        let v = m[rank][c];
                        m[r][c] -= f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn constraint_distribution(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    site: usize,
) -> Result<ConstraintSubspaceReport> {
    omega.check(spec, 1, spec.dim(), "omega")?;
    lam.check(spec, 0, spec.dim(), "lambda")?;
    if site >= spec.sites() {
        return Err(Error::input("site", "site index out of range"));
    }
    let (n, g) = (spec.n, spec.dim());
    let l = lam.at(site, 0);
    if norm(l) == 0.0 {
        return Err(Error::DegenerateConstraint { site });
    }
    let mut f = Vec::with_capacity(n + g);
    for d in 0..n {
        f.push(dot(l, omega.at(site, d)));
    }
    f.extend_from_slice(l);
    let fnorm = norm(&f);
    let fhat: Vec<f64> = f.iter().map(|x| x / fnorm).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut candidates: Vec<Vec<f64>> = (0..n + g)
        .map(|i| {
            let mut e = vec![0.0; n + g];
            e[i] = 1.0;
            e
        })
        .collect();
    // Process the coordinates least aligned with f first for stability.
    candidates.sort_by(|a, b| libm::fabs(dot(a, &fhat)).total_cmp(&libm::fabs(dot(b, &fhat))));
    for mut v in candidates {
        let c = dot(&v, &fhat);
        v.iter_mut().zip(&fhat).for_each(|(x, y)| *x -= c * y);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 && basis.len() < n + g - 1 {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    let vertical: Vec<Vec<f64>> = (0..g)
        .map(|a| {
            let mut e = vec![0.0; n + g];
            e[n + a] = 1.0;
            e
        })
        .collect();
    let mut both = basis.clone();
    both.extend(vertical.iter().cloned());
    let dim_d_plus_v = numerical_rank(&both, 1e-10);
    let dim_d = basis.len();
    let dim_d_cap_v = dim_d + g - dim_d_plus_v;
    Ok(ConstraintSubspaceReport {
        site,
        basis,
        dim_d,
        dim_d_cap_v,
        dim_d_plus_v,
        ambient: n + g,
    })
}

/// `½ h^n Σ ‖R‖² + α h^n Σ ‖λ - λ_anchor‖²`.
pub fn compatibility_functional(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    anchor: &CoMomentField,
    alpha: f64,
) -> Result<f64> {
    anchor.check(spec, 0, spec.dim(), "lambda_anchor")?;
    let r = cartan_residual(spec, omega, lam)?;
    let diff = lam.sub(anchor);
    Ok(spec.volume() * (0.5 * r.l2_sq() + alpha * diff.l2_sq()))
}

/// `h^n (L^T R + 2α(λ - λ_anchor))`.
pub fn functional_gradient(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam: &CoMomentField,
    anchor: &CoMomentField,
    alpha: f64,
) -> Result<CoMomentField> {
    anchor.check(spec, 0, spec.dim(), "lambda_anchor")?;
    let r = cartan_residual(spec, omega, lam)?;
    let mut g = apply_lt(spec, omega, &r);
    g.axpy(2.0 * alpha, &lam.sub(anchor));
    Ok(g.scaled(spec.volume()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub alpha: f64,
    /// Stop when the normal-equation residual is below `tol · max(1, ‖b‖)`.
    pub tol: f64,
    pub maxiter: usize,
    /// Site whose values are held fixed when `alpha == 0`.
    pub pin_site: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub lambda: CoMomentField,
    /// Functional values, starting with the initial guess.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub normal_residual: f64,
    pub cartan_residual_max: f64,
    pub functional: f64,
}

impl SolveReport {
    /// No step increased the functional beyond `slack` (relative).
    pub fn monotone(&self, slack: f64) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs().max(1e-300))
    }
}

/// Conjugate gradients on `(L^T L + 2α) λ = 2α λ_anchor`, starting at `λ0`.
/// With `α = 0` the values at `pin_site` stay at those of `λ0`.
pub fn solve_lambda(
    spec: &LatticeSpec,
    omega: &ConnectionField,
    lam0: &CoMomentField,
    anchor: &CoMomentField,
    cfg: SolveConfig,
) -> Result<SolveReport> {
    if !(cfg.tol > 0.0) {
        return Err(Error::input("tol", "tolerance must be positive"));
    }
    if !(cfg.alpha >= 0.0) || !cfg.alpha.is_finite() {
        return Err(Error::input("alpha", "alpha must be a finite nonnegative number"));
    }
    omega.check(spec, 1, spec.dim(), "omega")?;
    lam0.check(spec, 0, spec.dim(), "lambda0")?;
    anchor.check(spec, 0, spec.dim(), "lambda_anchor")?;
    if cfg.pin_site >= spec.sites() {
        return Err(Error::input("pin_site", "site index out of range"));
    }
    let dim = spec.dim();
    let pinned = |i: usize| cfg.alpha == 0.0 && i / dim == cfg.pin_site;
    let op = |v: &Cochain| -> Cochain {
        let mut out = apply_lt(spec, omega, &apply_l(spec, omega, v));
        out.axpy(2.0 * cfg.alpha, v);
        out
    };
    let mask = |v: &mut Cochain| {
        for (i, x) in v.data.iter_mut().enumerate() {
            if pinned(i) {
                *x = 0.0;
            }
        }
    };
    let functional = |l: &Cochain| compatibility_functional(spec, omega, l, anchor, cfg.alpha).expect("checked");
    let mut x = lam0.clone();
    let mut b = anchor.scaled(2.0 * cfg.alpha);
    mask(&mut b);
    let bnorm = libm::sqrt(b.l2_sq());
    let mut r = b.sub(&op(&x));
    mask(&mut r);
    let mut p = r.clone();
    let mut rr = r.l2_sq();
    let mut history = vec![functional(&x)];
    let threshold = cfg.tol * bnorm.max(1.0);
    let mut iterations = 0;
    while libm::sqrt(rr) > threshold && iterations < cfg.maxiter {
        let mut ap = op(&p);
        mask(&mut ap);
        let pap = dot(&p.data, &ap.data);
        if !(pap > 0.0) {
            break;
        }
        let step = rr / pap;
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        let rr_new = r.l2_sq();
        let beta = rr_new / rr;
        for (pi, ri) in p.data.iter_mut().zip(&r.data) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        iterations += 1;
        history.push(functional(&x));
    }
    let res = cartan_residual(spec, omega, &x)?;
    Ok(SolveReport {
        functional: *history.last().expect("initial value"),
        cartan_residual_max: res.max_norm(),
        normal_residual: libm::sqrt(rr),
        converged: libm::sqrt(rr) <= threshold,
        iterations,
        history,
        lambda: x,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{random_cochain, RandomFieldSpec};
    use super::*;
    use crate::liealg::LieAlgebra;

    fn su2(n: usize, nn: usize) -> LatticeSpec {
        LatticeSpec::new(n, nn, &LieAlgebra::su2()).unwrap()
    }

    fn constant_connection(spec: &LatticeSpec, a: f64) -> Cochain {
        Cochain::constant(spec, 1, &[vec![a, 0.0, 0.0], vec![0.0, a, 0.0]]).unwrap()
    }

    #[test]
    fn curvature_examples() {
        let s = su2(2, 8);
        assert_eq!(curvature(&s, &Cochain::zeros(&s, 1, 3)).unwrap().max_abs(), 0.0);
        let ab = LatticeSpec::new(2, 8, &LieAlgebra::abelian(2).unwrap()).unwrap();
        let w = Cochain::constant(&ab, 1, &[vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        assert_eq!(curvature(&ab, &w).unwrap().max_abs(), 0.0);
        let a = 0.7;
        let big = curvature(&s, &constant_connection(&s, a)).unwrap();
        for site in 0..s.sites() {
            let v = big.at(site, 0);
            assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
            assert!((v[2] - a * a).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_examples() {
        let s = su2(2, 6);
        let lam = Cochain::constant(&s, 0, &[vec![0.3, -1.0, 2.0]]).unwrap();
        assert_eq!(cartan_residual(&s, &Cochain::zeros(&s, 1, 3), &lam).unwrap().max_abs(), 0.0);
        let ab = LatticeSpec::new(2, 6, &LieAlgebra::abelian(3).unwrap()).unwrap();
        let w = random_cochain(&ab, 1, 3, RandomFieldSpec { seed: 1, amp: 1.0 });
        assert_eq!(cartan_residual(&ab, &w, &lam).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn obstruction_examples() {
        let s = su2(2, 8);
        let a = 0.5;
        let w = constant_connection(&s, a);
        let e1 = Cochain::constant(&s, 0, &[vec![1.0, 0.0, 0.0]]).unwrap();
        let e3 = Cochain::constant(&s, 0, &[vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(integrability_obstruction(&s, &w, &e1, 1e-12).unwrap().max, 0.0);
        let o = integrability_obstruction(&s, &w, &e3, 1e-12).unwrap();
        assert!((o.max - a * a).abs() < 1e-15 && (o.mean - a * a).abs() < 1e-15);
        assert!(!o.holonomic);
        let flat = integrability_obstruction(&s, &Cochain::zeros(&s, 1, 3), &e3, 1e-12).unwrap();
        assert!(flat.holonomic && flat.max == 0.0);
    }

    #[test]
    fn distribution_dimensions() {
        let s = su2(2, 4);
        let e3 = Cochain::constant(&s, 0, &[vec![0.0, 0.0, 1.0]]).unwrap();
        let rep = constraint_distribution(&s, &Cochain::zeros(&s, 1, 3), &e3, 0).unwrap();
        assert_eq!((rep.dim_d, rep.dim_d_cap_v, rep.dim_d_plus_v), (4, 2, 5));
        for b in &rep.basis {
            assert!(b[4].abs() < 1e-12);
        }
        let w = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 2, amp: 1.0 });
        let rep = constraint_distribution(&s, &w, &e3, 5).unwrap();
        assert_eq!((rep.dim_d, rep.dim_d_cap_v, rep.dim_d_plus_v), (4, 2, 5));
        for (i, a) in rep.basis.iter().enumerate() {
            for (j, b) in rep.basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-12);
            }
        }
        assert!(matches!(
            constraint_distribution(&s, &w, &Cochain::zeros(&s, 0, 3), 3),
            Err(Error::DegenerateConstraint { site: 3 })
        ));
        let one = LatticeSpec::new(2, 4, &LieAlgebra::abelian(1).unwrap()).unwrap();
        let l1 = Cochain::constant(&one, 0, &[vec![1.0]]).unwrap();
        let rep = constraint_distribution(&one, &Cochain::zeros(&one, 1, 1), &l1, 0).unwrap();
        assert_eq!(rep.dim_d_cap_v, 0);
    }

    #[test]
    fn transpose_is_adjoint() {
        let s = su2(2, 5);
        let w = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 11, amp: 0.8 });
        let l = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 12, amp: 1.0 });
        let r = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 13, amp: 1.0 });
        let lhs = dot(&apply_l(&s, &w, &l).data, &r.data);
        let rhs = dot(&l.data, &apply_lt(&s, &w, &r).data);
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn functional_zero_cases() {
        let s = su2(2, 8);
        let zero = Cochain::zeros(&s, 1, 3);
        let lam = Cochain::constant(&s, 0, &[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(compatibility_functional(&s, &zero, &lam, &lam, 1.0).unwrap(), 0.0);
        let other = Cochain::zeros(&s, 0, 3);
        assert_eq!(compatibility_functional(&s, &zero, &lam, &other, 0.0).unwrap(), 0.0);
        assert_eq!(functional_gradient(&s, &zero, &lam, &other, 0.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn abelian_gradient_is_laplacian() {
        let s = LatticeSpec::new(2, 6, &LieAlgebra::abelian(2).unwrap()).unwrap();
        let w = random_cochain(&s, 1, 2, RandomFieldSpec { seed: 5, amp: 1.0 });
        let l = random_cochain(&s, 0, 2, RandomFieldSpec { seed: 6, amp: 1.0 });
        let g = functional_gradient(&s, &w, &l, &l, 0.0).unwrap();
        let inv_h2 = 1.0 / (s.h * s.h);
        for site in 0..s.sites() {
            for v in 0..2 {
                let mut lap = 0.0;
                for d in 0..2 {
                    lap += (2.0 * l.at(site, 0)[v] - l.at(s.shift(site, d), 0)[v] - l.at(s.shift_back(site, d), 0)[v]) * inv_h2;
                }
                assert!((g.at(site, 0)[v] - s.volume() * lap).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn flat_solve_recovers_anchor() {
        let s = su2(2, 8);
        let anchor = Cochain::constant(&s, 0, &[vec![0.2, -0.5, 1.0]]).unwrap();
        let lam0 = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 9, amp: 1.0 });
        let cfg = SolveConfig {
            alpha: 1.0,
            tol: 1e-13,
            maxiter: 2000,
            pin_site: 0,
        };
        let rep = solve_lambda(&s, &Cochain::zeros(&s, 1, 3), &lam0, &anchor, cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.lambda.sub(&anchor).max_abs() < 1e-10);
        assert!(rep.functional < 1e-20);
        assert!(rep.monotone(1e-12));
    }

    #[test]
    fn pinned_solve_without_regularization() {
        let s = su2(2, 6);
        let w = Cochain::constant(&s, 1, &[vec![0.0, 0.0, 0.4], vec![0.0, 0.0, -0.3]]).unwrap();
        let lam0 = Cochain::constant(&s, 0, &[vec![0.0, 0.0, 1.0]]).unwrap();
        let cfg = SolveConfig {
            alpha: 0.0,
            tol: 1e-12,
            maxiter: 2000,
            pin_site: 0,
        };
        let rep = solve_lambda(&s, &w, &lam0, &lam0, cfg).unwrap();
        assert_eq!(rep.lambda.at(0, 0), lam0.at(0, 0));
        assert!(rep.cartan_residual_max < 1e-9);
    }
}
