//! Explicit integrator for `∂_t ω_d = (dξ)_d + [ω_d, ξ] - Σ_{d'} X_{d'} Ω_{d' d}`.

use alloc::format;
use alloc::vec::Vec;

use super::compat::{curvature, curvature_component};
use super::{discrete_d, Cochain, ConnectionField, LatticeSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMethod {
    Euler,
    Rk4,
}

impl StepMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            StepMethod::Euler => "euler",
            StepMethod::Rk4 => "rk4",
        }
    }
}

impl core::str::FromStr for StepMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(StepMethod::Euler),
            "rk4" => Ok(StepMethod::Rk4),
            _ => Err(Error::input("method", format!("unknown method {s:?}; use euler or rk4"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `ω` at steps `0..=steps`.
    pub states: Vec<ConnectionField>,
    /// `max ‖Ω‖` at each stored state.
    pub curvature_norms: Vec<f64>,
}

/// Right-hand side of the evolution law. `xi` is a 0-cochain of algebra
/// vectors, `x` a 0-cochain of base vectors (width `n`).
pub fn evolution_rhs(spec: &LatticeSpec, omega: &ConnectionField, xi: &Cochain, x: &Cochain) -> Result<ConnectionField> {
    let mut out = discrete_d(spec, xi)?;
    let big = if spec.n >= 2 { Some(curvature(spec, omega)?) } else { None };
    for s in 0..spec.sites() {
        let xs = x.at(s, 0).to_vec();
        let xi_s = xi.at(s, 0).to_vec();
        for d in 0..spec.n {
            let w = omega.at(s, d).to_vec();
            spec.alg.bracket_acc(&w, &xi_s, 1.0, out.at_mut(s, d));
            if let Some(big) = &big {
                for (dp, &xv) in xs.iter().enumerate() {
                    if xv == 0.0 || dp == d {
                        continue;
                    }
                    let om = curvature_component(spec, big, s, dp, d);
                    for (o, v) in out.at_mut(s, d).iter_mut().zip(&om) {
                        *o -= xv * v;
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn evolve_connection(
    spec: &LatticeSpec,
    omega0: &ConnectionField,
    xi: &Cochain,
    x: &Cochain,
    dt: f64,
    steps: usize,
    method: StepMethod,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::input("dt", "time step must be positive and finite"));
    }
    omega0.check(spec, 1, spec.dim(), "omega0")?;
    xi.check(spec, 0, spec.dim(), "xi")?;
    x.check(spec, 0, spec.n, "x")?;
    let norm_of = |w: &ConnectionField| -> Result<f64> { Ok(curvature(spec, w)?.max_norm()) };
    let mut states = Vec::with_capacity(steps + 1);
    let mut curvature_norms = Vec::with_capacity(steps + 1);
    curvature_norms.push(norm_of(omega0)?);
    states.push(omega0.clone());
    let mut w = omega0.clone();
    for step in 1..=steps {
        let f = |v: &ConnectionField| evolution_rhs(spec, v, xi, x);
        w = match method {
            StepMethod::Euler => {
                let mut next = w.clone();
                next.axpy(dt, &f(&w)?);
                next
            }
            StepMethod::Rk4 => {
                let k1 = f(&w)?;
                let mut t = w.clone();
                t.axpy(0.5 * dt, &k1);
                let k2 = f(&t)?;
                let mut t = w.clone();
                t.axpy(0.5 * dt, &k2);
                let k3 = f(&t)?;
                let mut t = w.clone();
                t.axpy(dt, &k3);
                let k4 = f(&t)?;
                let mut next = w.clone();
                next.axpy(dt / 6.0, &k1);
                next.axpy(dt / 3.0, &k2);
                next.axpy(dt / 3.0, &k3);
                next.axpy(dt / 6.0, &k4);
                next
            }
        };
        if !w.is_finite() {
            return Err(Error::BlowUp { step });
        }
        curvature_norms.push(norm_of(&w)?);
        states.push(w.clone());
    }
    Ok(Trajectory {
        states,
        curvature_norms,
    })
}

/// `ω_d(t) = exp(-t ad_ξ) ω_d(0)` for constant `ξ`: the exact flow of the law
/// when `Ω` vanishes identically along the trajectory.
pub fn gauge_rotation(spec: &LatticeSpec, omega0: &ConnectionField, xi: &[f64], t: f64) -> ConnectionField {
    let d = spec.dim();
    let a: Vec<f64> = spec.alg.ad_matrix(xi).iter().map(|v| -t * v).collect();
    let m = super::checks::expm(&a, d);
    let mut out = omega0.clone();
    for s in 0..spec.sites() {
        for dir in 0..spec.n {
            let v = omega0.at(s, dir).to_vec();
            let target = out.at_mut(s, dir);
            for i in 0..d {
                target[i] = (0..d).map(|j| m[i * d + j] * v[j]).sum();
            }
        }
    }
    out
}
