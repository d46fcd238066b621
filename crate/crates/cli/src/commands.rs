use std::collections::BTreeMap;

use serde_json::{json, Value};

use spencer_core::derham::BaseModel;
use spencer_core::lattice::{
    consistency_check, constraint_distribution, evolve_connection, frobenius_check, gauge_rotation, gradient_check,
    integrability_obstruction, solve_lambda, step4_identity_sample, symplectic_check, cartan_residual,
    compatibility_functional, Cochain, ConsistencyCheck, ConstraintSubspaceReport, LatticeSpec, ObstructionReport,
    SolveConfig, SolveReport,
};
use spencer_core::specseq::{
    aggregate_dims, build_spencer_double, check_bicomplex, compute_pages, convergence_report, total_cohomology,
    ConvergenceReport, SpectralSequence,
};
use spencer_core::spencer::{ce_complex, cohomology_report, vertical_complex, PairingMode, VerticalMode};
use spencer_core::torsion::{
    classical_part, e2_torsion_sum, edge_term, torsion_case1, torsion_case2, weight_decomposition, TorsionReport,
};
use spencer_core::{Error, LieAlgebra};

use crate::args::*;
use crate::error::CliError;
use crate::input::{load_algebra, load_base, load_field, save_field, FieldKind};
use crate::report::{fmt_list, pq_map, sequence_json, Outcome};

fn config<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("config serializes")
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn algebra_check(args: &AlgebraCheckArgs) -> Result<Outcome, CliError> {
    let alg = match (&args.preset, &args.file) {
        (Some(p), None) => LieAlgebra::catalog(p)?,
        (None, Some(f)) => crate::input::algebra_from_file(f)?,
        _ => return Err(CliError::input("preset", "give exactly one of --preset or --file")),
    };
    let rep = alg.check_structure();
    let result = json!({
        "name": alg.name(),
        "dim": alg.dim(),
        "labels": alg.labels(),
        "antisymmetry_violations": rep.antisymmetry.iter().map(|&(i, j, k)| [i, j, k]).collect::<Vec<_>>(),
        "jacobi_violations": rep.jacobi.iter().map(|&(i, j, k, l)| [i, j, k, l]).collect::<Vec<_>>(),
        "abelian": alg.is_abelian(),
        "semisimple": alg.is_semisimple(),
    });
    Ok(Outcome {
        command: "algebra check",
        config: config(args),
        passed: rep.is_valid(),
        summary: vec![
            row("algebra", alg.name()),
            row("dim", alg.dim()),
            row("antisymmetry violations", rep.antisymmetry.len()),
            row("jacobi violations", rep.jacobi.len()),
            row("semisimple", alg.is_semisimple()),
        ],
        result,
    })
}

pub fn cohomology(args: &CohomologyArgs) -> Result<Outcome, CliError> {
    let alg = load_algebra(&args.algebra)?;
    let pairing = args.pairing.resolve(&alg);
    let rep = cohomology_report(&alg, args.k, args.vertical.into(), pairing)?;
    let result = json!({
        "mode": rep.mode.as_str(),
        "k": rep.k,
        "H": rep.dims,
        "euler": rep.euler,
        "algebra": alg.name(),
        "pairing": pairing.as_str(),
    });
    Ok(Outcome {
        command: "cohomology",
        config: config(args),
        passed: true,
        summary: vec![
            row("algebra", alg.name()),
            row("mode", rep.mode.as_str()),
            row("k", rep.k),
            row("H", fmt_list(&rep.dims)),
            row("euler", rep.euler),
        ],
        result,
    })
}

/// One slice of a spectral run together with its checks.
#[derive(Debug, Clone)]
pub struct SliceRun {
    pub seq: SpectralSequence,
    pub conv: ConvergenceReport,
    /// Cohomology of the total complex, computed directly.
    pub total: Vec<usize>,
    pub identities_checked: usize,
}

impl SliceRun {
    pub fn oracle_match(&self) -> bool {
        self.seq.e_infinity_totals() == self.total
    }
}

#[derive(Debug, Clone)]
pub struct SpectralRun {
    pub base: BaseModel,
    pub algebra: String,
    pub mode: VerticalMode,
    pub pairing: PairingMode,
    pub kmax: usize,
    pub slices: Vec<SliceRun>,
}

impl SpectralRun {
    pub fn seqs(&self) -> Vec<SpectralSequence> {
        self.slices.iter().map(|s| s.seq.clone()).collect()
    }

    pub fn stable_index(&self) -> usize {
        self.slices.iter().map(|s| s.seq.stable_index).max().unwrap_or(0)
    }

    pub fn bound_holds(&self) -> bool {
        self.slices.iter().all(|s| s.conv.n_le_n_plus_1)
    }

    pub fn degenerate(&self) -> bool {
        self.slices.iter().all(|s| s.conv.e2_degenerate)
    }

    pub fn low_dim_ok(&self) -> bool {
        self.slices.iter().all(|s| s.conv.low_dim_flag)
    }

    pub fn oracle_match(&self) -> bool {
        self.slices.iter().all(SliceRun::oracle_match)
    }

    pub fn total_cohomology(&self) -> Vec<usize> {
        let len = self.slices.iter().map(|s| s.total.len()).max().unwrap_or(0);
        (0..len).map(|m| self.slices.iter().map(|s| s.total.get(m).copied().unwrap_or(0)).sum()).collect()
    }

    pub fn passed(&self) -> bool {
        self.bound_holds() && self.low_dim_ok() && self.oracle_match()
    }

    pub fn to_json(&self) -> Value {
        let pages_len = self.slices.iter().map(|s| s.seq.pages.len()).max().unwrap_or(0);
        let seqs = self.seqs();
        let pages: Vec<Value> = (1..=pages_len)
            .map(|r| {
                let mut ranks = BTreeMap::new();
                for s in &self.slices {
                    if let Some(p) = s.seq.page(r) {
                        for (&key, &v) in &p.dr_ranks {
                            *ranks.entry(key).or_insert(0) += v;
                        }
                    }
                }
                json!({"r": r, "dims": pq_map(&aggregate_dims(&seqs, r)), "dr_ranks": pq_map(&ranks)})
            })
            .collect();
        json!({
            "mode": self.mode.as_str(),
            "k": self.kmax,
            "base": self.base.name,
            "n": self.base.n,
            "algebra": self.algebra,
            "pairing": self.pairing.as_str(),
            "pages": pages,
            "N": self.stable_index(),
            "bounds": {
                "N_le_n_plus_1": self.bound_holds(),
                "E2_degenerate": self.degenerate(),
                "low_dim_degenerate": self.low_dim_ok(),
            },
            "total_cohomology": self.total_cohomology(),
            "oracle_match": self.oracle_match(),
            "slices": self.slices.iter().map(|s| sequence_json(&s.seq, &s.conv, &s.total)).collect::<Vec<_>>(),
        })
    }
}

pub fn spectral_run(
    base: &BaseModel,
    alg: &LieAlgebra,
    kmax: usize,
    mode: VerticalMode,
    pairing: PairingMode,
) -> Result<SpectralRun, CliError> {
    let ks = build_spencer_double(base, alg, kmax, mode, pairing)?;
    let mut slices = Vec::with_capacity(ks.len());
    for k in &ks {
        let check = check_bicomplex(k);
        if let Some((id, p, q)) = check.first_failure() {
            return Err(CliError::Invariant(format!("{id} violated at ({p}, {q})")));
        }
        let seq = compute_pages(k)?;
        let conv = convergence_report(&seq, base.n);
        let total = total_cohomology(k)?;
        slices.push(SliceRun {
            seq,
            conv,
            total,
            identities_checked: check.checked,
        });
    }
    Ok(SpectralRun {
        base: base.clone(),
        algebra: alg.name().to_string(),
        mode,
        pairing,
        kmax,
        slices,
    })
}

pub fn spectral(args: &SpectralArgs) -> Result<Outcome, CliError> {
    let base = load_base(&args.base)?;
    let alg = load_algebra(&args.algebra)?;
    let pairing = args.pairing.resolve(&alg);
    let run = spectral_run(&base, &alg, args.kmax, args.vertical.into(), pairing)?;
    Ok(Outcome {
        command: "spectral",
        config: config(args),
        passed: run.passed(),
        summary: vec![
            row("base", &base.name),
            row("algebra", alg.name()),
            row("mode", run.mode.as_str()),
            row("slices", run.slices.len()),
            row("N", run.stable_index()),
            row("N <= n+1", run.bound_holds()),
            row("E2 degenerate", run.degenerate()),
            row("total cohomology", fmt_list(&run.total_cohomology())),
            row("E_inf = H(Tot)", run.oracle_match()),
        ],
        result: run.to_json(),
    })
}

pub fn torsion_json(rep: &TorsionReport) -> Value {
    json!({
        "k": rep.k,
        "mode": rep.mode.as_str(),
        "terms": rep.terms.iter().map(|t| json!({
            "i": t.i, "j": t.j, "b_i": t.b_i, "inv_dim_j": t.inv_dim_j,
            "marker_nonzero": t.marker_nonzero, "contribution": t.contribution,
        })).collect::<Vec<_>>(),
        "total_dim": rep.total_dim,
        "classical_dim": rep.classical_dim,
        "weights": weight_decomposition(rep).into_iter().map(|(j, d)| (j.to_string(), json!(d))).collect::<serde_json::Map<_, _>>(),
        "proof_form": rep.proof_form.iter().map(|t| json!({
            "p": t.p, "b_p": t.b_p, "inv_dim": t.inv_dim, "contribution": t.contribution,
        })).collect::<Vec<_>>(),
        "proof_form_total": rep.proof_form_total,
        "discrepancy": rep.discrepancy(),
    })
}

/// Vertical cohomology per slice, in the layout of a spectral run.
pub fn vertical_cohomology(alg: &LieAlgebra, run: &SpectralRun) -> Result<Vec<Vec<usize>>, CliError> {
    match run.mode {
        VerticalMode::Ce => (0..=run.kmax).map(|s| Ok(ce_complex(alg, s)?.betti()?)).collect(),
        VerticalMode::Spencer => Ok(vec![vertical_complex(alg, run.kmax, VerticalMode::Spencer, run.pairing)?.betti()?]),
    }
}

/// Filtration form of the torsion from a spectral run, with its cross-checks.
pub fn case2_json(base: &BaseModel, alg: &LieAlgebra, run: &SpectralRun, k: usize) -> Result<(Value, bool), CliError> {
    let seqs = run.seqs();
    let case2 = torsion_case2(&seqs, k)?;
    let edge = edge_term(&seqs, k);
    let e_inf: usize = seqs.iter().map(|s| s.e_infinity_totals().get(k).copied().unwrap_or(0)).sum();
    let classical = if k <= base.n { Some(classical_part(base, k)?) } else { None };
    let e2_sum = e2_torsion_sum(base, &vertical_cohomology(alg, run)?, k);
    let degenerate = run.degenerate();
    let matches = !degenerate || case2 == e2_sum;
    Ok((
        json!({
            "k": k,
            "kmax": run.kmax,
            "mode": run.mode.as_str(),
            "torsion_case2": case2,
            "edge_term": edge,
            "E_inf_total": e_inf,
            "classical": classical,
            "e2_sum": e2_sum,
            "degenerate": degenerate,
            "matches_e2_sum": matches,
            "edge_partition_holds": edge + case2 == e_inf,
            "classical_partition_holds": classical.map(|c| c + case2 == e_inf),
        }),
        matches,
    ))
}

pub fn torsion(args: &TorsionArgs) -> Result<Outcome, CliError> {
    let base = load_base(&args.base)?;
    let alg = load_algebra(&args.algebra)?;
    let rep = torsion_case1(&base, &alg, args.k, args.curvature.into())?;
    let mut result = torsion_json(&rep);
    let mut passed = true;
    let mut summary = vec![
        row("base", &base.name),
        row("algebra", alg.name()),
        row("k", rep.k),
        row("curvature", rep.mode.as_str()),
        row("total_dim", rep.total_dim),
        row("proof_form_total", rep.proof_form_total),
        row("discrepancy", rep.discrepancy()),
    ];
    if args.case2 {
        let pairing = args.pairing.resolve(&alg);
        let run = spectral_run(&base, &alg, args.kmax, args.vertical.into(), pairing)?;
        let (c2, ok) = case2_json(&base, &alg, &run, args.k)?;
        summary.push(row("case2", &c2["torsion_case2"]));
        summary.push(row("case2 = E2 sum", ok));
        result["case2"] = c2;
        passed &= ok;
    }
    Ok(Outcome {
        command: "torsion",
        config: config(args),
        passed,
        summary,
        result,
    })
}

fn lattice_spec(l: &LatticeArgs) -> Result<(LieAlgebra, LatticeSpec), CliError> {
    let alg = load_algebra(&l.algebra)?;
    let spec = LatticeSpec::new(l.n, l.sites, &alg)?;
    Ok((alg, spec))
}

pub fn obstruction_json(o: &ObstructionReport) -> Value {
    json!({"max": o.max, "mean": o.mean, "coadjoint_max": o.coadjoint_max, "holonomic": o.holonomic})
}

pub fn consistency_json(c: &ConsistencyCheck) -> Value {
    json!({
        "residual": c.residual,
        "obstruction": c.obstruction,
        "curvature_max": c.curvature_max,
        "premise": c.premise,
        "holds": c.holds,
    })
}

pub fn distribution_json(r: Result<ConstraintSubspaceReport, Error>) -> Value {
    match r {
        Ok(d) => json!({
            "site": d.site,
            "dim_D": d.dim_d,
            "dim_D_cap_V": d.dim_d_cap_v,
            "dim_D_plus_V": d.dim_d_plus_v,
            "ambient": d.ambient,
        }),
        Err(e) => json!({"error": e.to_string()}),
    }
}

pub fn solve_json(spec: &LatticeSpec, rep: &SolveReport, anchor: &Cochain) -> Value {
    json!({
        "iterations": rep.iterations,
        "converged": rep.converged,
        "functional": rep.functional,
        "history": rep.history,
        "monotone": rep.monotone(1e-10),
        "normal_residual": rep.normal_residual,
        "cartan_residual_max": rep.cartan_residual_max,
        "anchor_distance_max": rep.lambda.sub(anchor).max_abs(),
        "sites": spec.sites(),
    })
}

pub fn lattice_solve(args: &LatticeSolveArgs) -> Result<Outcome, CliError> {
    let (_, spec) = lattice_spec(&args.lattice)?;
    let omega = load_field("omega", &args.omega, &spec, FieldKind::Connection)?;
    let lam0 = load_field("lambda0", &args.lambda0, &spec, FieldKind::CoMoment)?;
    let anchor = load_field("anchor", &args.anchor, &spec, FieldKind::CoMoment)?;
    let cfg = SolveConfig {
        alpha: args.alpha,
        tol: args.tol,
        maxiter: args.maxiter,
        pin_site: args.pin_site,
    };
    let rep = solve_lambda(&spec, &omega, &lam0, &anchor, cfg)?;
    let obs = integrability_obstruction(&spec, &omega, &rep.lambda, args.tol)?;
    let cons = consistency_check(&spec, &omega, &rep.lambda, args.tol, 10.0)?;
    let mut result = solve_json(&spec, &rep, &anchor);
    result["obstruction"] = obstruction_json(&obs);
    result["consistency"] = consistency_json(&cons);
    result["distribution"] = distribution_json(constraint_distribution(&spec, &omega, &rep.lambda, 0));
    if let Some(path) = &args.save_lambda {
        save_field(path, &spec, FieldKind::CoMoment, &rep.lambda)?;
    }
    let passed = rep.converged && rep.monotone(1e-10);
    Ok(Outcome {
        command: "lattice solve",
        config: config(args),
        passed,
        summary: vec![
            row("iterations", rep.iterations),
            row("converged", rep.converged),
            row("functional", format!("{:.6e}", rep.functional)),
            row("cartan residual", format!("{:.6e}", rep.cartan_residual_max)),
            row("obstruction max", format!("{:.6e}", obs.max)),
            row("monotone", rep.monotone(1e-10)),
        ],
        result,
    })
}

pub fn lattice_check(args: &LatticeCheckArgs) -> Result<Outcome, CliError> {
    let (alg, spec) = lattice_spec(&args.lattice)?;
    let omega = load_field("omega", &args.omega, &spec, FieldKind::Connection)?;
    let lam = load_field("lambda", &args.lambda, &spec, FieldKind::CoMoment)?;
    let anchor = load_field("anchor", &args.anchor, &spec, FieldKind::CoMoment)?;
    let residual = cartan_residual(&spec, &omega, &lam)?.max_norm();
    let obs = integrability_obstruction(&spec, &omega, &lam, args.tol)?;
    let identity = step4_identity_sample(&alg, args.trials, args.seed)?;
    let gradient = gradient_check(&spec, &omega, &lam, &anchor, args.alpha, args.directions, args.seed)?;
    let symplectic = if spec.n >= 2 {
        let s = symplectic_check(&spec, &omega, &lam)?;
        json!({"max_error": s.max_error, "pairing_max": s.pairing_max, "cartan_residual_max": s.cartan_residual_max})
    } else {
        Value::Null
    };
    let frobenius = if spec.n >= 2 {
        match frobenius_check(&spec, &omega) {
            Ok(f) => json!({"max_defect": f.max_defect, "curvature_max": f.curvature_max}),
            Err(e @ Error::UnsupportedAlgebra(_)) => json!({"skipped": e.to_string()}),
            Err(e) => return Err(e.into()),
        }
    } else {
        Value::Null
    };
    let cons = consistency_check(&spec, &omega, &lam, args.tol, 10.0)?;
    let identity_ok = identity < 1e-10;
    let gradient_ok = gradient < 1e-6;
    let result = json!({
        "cartan_residual_max": residual,
        "obstruction": obstruction_json(&obs),
        "functional": compatibility_functional(&spec, &omega, &lam, &anchor, args.alpha)?,
        "coadjoint_identity_max_error": identity,
        "gradient_max_rel_error": gradient,
        "symplectic": symplectic,
        "frobenius": frobenius,
        "consistency": consistency_json(&cons),
        "distribution": distribution_json(constraint_distribution(&spec, &omega, &lam, 0)),
    });
    Ok(Outcome {
        command: "lattice check",
        config: config(args),
        passed: identity_ok && gradient_ok,
        summary: vec![
            row("cartan residual", format!("{residual:.6e}")),
            row("obstruction max", format!("{:.6e}", obs.max)),
            row("coadjoint identity", format!("{identity:.3e}")),
            row("gradient rel error", format!("{gradient:.3e}")),
            row("consistency holds", cons.holds),
        ],
        result,
    })
}

/// `Some(v)` when every site carries the same value `v`.
fn constant_value(c: &Cochain) -> Option<Vec<f64>> {
    let first = c.at(0, 0).to_vec();
    (0..c.sites()).all(|s| c.at(s, 0) == first.as_slice()).then_some(first)
}

pub fn lattice_evolve(args: &LatticeEvolveArgs) -> Result<Outcome, CliError> {
    let (_, spec) = lattice_spec(&args.lattice)?;
    let omega = load_field("omega", &args.omega, &spec, FieldKind::Connection)?;
    let xi = load_field("xi", &args.xi, &spec, FieldKind::AlgebraScalar)?;
    let x = load_field("x", &args.x, &spec, FieldKind::BaseVector)?;
    let tr = evolve_connection(&spec, &omega, &xi, &x, args.dt, args.steps, args.method.into())?;
    let flat_reference = match constant_value(&xi) {
        Some(v) if tr.curvature_norms[0] < 1e-14 => {
            let mut worst_step: f64 = 0.0;
            let mut worst_total: f64 = 0.0;
            let mut prev = 0.0;
            for (i, st) in tr.states.iter().enumerate() {
                let err = st.sub(&gauge_rotation(&spec, &omega, &v, i as f64 * args.dt)).max_abs();
                worst_step = worst_step.max(err - prev);
                worst_total = worst_total.max(err);
                prev = err;
            }
            json!({"max_step_error": worst_step, "max_error": worst_total})
        }
        _ => Value::Null,
    };
    let last = tr.states.last().expect("initial state is stored");
    if let Some(path) = &args.save_omega {
        save_field(path, &spec, FieldKind::Connection, last)?;
    }
    let result = json!({
        "method": args.method,
        "steps": args.steps,
        "dt": args.dt,
        "curvature_norms": tr.curvature_norms,
        "final_max_abs": last.max_abs(),
        "final_l2_sq": last.l2_sq(),
        "initial_l2_sq": omega.l2_sq(),
        "flat_reference": flat_reference,
    });
    Ok(Outcome {
        command: "lattice evolve",
        config: config(args),
        passed: true,
        summary: vec![
            row("steps", args.steps),
            row("initial curvature", format!("{:.6e}", tr.curvature_norms[0])),
            row("final curvature", format!("{:.6e}", tr.curvature_norms.last().unwrap())),
            row("final max |omega|", format!("{:.6e}", last.max_abs())),
        ],
        result,
    })
}
