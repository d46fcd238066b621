//! Acceptance criteria. Each criterion prints one PASS/FAIL line with the
//! measured values next to the pinned tolerances.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use spencer_cli::commands::{spectral_run, vertical_cohomology, SpectralRun};
use spencer_core::derham::{BaseModel, CurvatureMode};
use spencer_core::lattice::{
    evolve_connection, gauge_rotation, gradient_check, random_cochain, refinement_study, step4_identity_sample, Cochain,
    LatticeSpec, RandomFieldSpec, StepMethod,
};
use spencer_core::spencer::{
    ce_complex, ce_complex_dual, invariants_dimension, spencer_nilpotency_finding, PairingMode, VerticalMode,
};
use spencer_core::specseq::{build_spencer_double, check_bicomplex};
use spencer_core::torsion::{e2_torsion_sum, torsion_case1, torsion_case2};
use spencer_core::LieAlgebra;

const BIN: &str = env!("CARGO_BIN_EXE_spencer");

const STRUCTURE_ALGEBRAS: [&str; 10] = [
    "su2", "sl2", "sl3", "abelian:1", "abelian:2", "abelian:3", "abelian:4", "abelian:5", "abelian:6", "heisenberg3",
];
const BASES: [&str; 4] = ["torus:2:3", "torus:4:3", "formal:1,2,1", "quintic"];
const ALGEBRAS: [&str; 3] = ["su2", "sl2", "abelian:2"];
const MODES: [VerticalMode; 2] = [VerticalMode::Spencer, VerticalMode::Ce];
const KMAX: usize = 2;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

struct Board {
    rows: Vec<(String, bool)>,
}

impl Board {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let line = format!(
            "{} | {name} | {} | {:.2}s\n",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        self.rows.push((name.to_string(), v.passed));
    }
}

fn spencer(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct GridRun {
    base: String,
    algebra: String,
    run: SpectralRun,
    elapsed: Duration,
}

fn grid() -> Vec<GridRun> {
    let mut out = Vec::new();
    for b in BASES {
        let base = BaseModel::from_preset(b).unwrap();
        for a in ALGEBRAS {
            let alg = LieAlgebra::catalog(a).unwrap();
            for mode in MODES {
                let start = Instant::now();
                let run = spectral_run(&base, &alg, KMAX, mode, PairingMode::default_for(&alg)).unwrap();
                out.push(GridRun {
                    base: b.into(),
                    algebra: a.into(),
                    run,
                    elapsed: start.elapsed(),
                });
            }
        }
    }
    out
}

#[test]
fn acceptance() {
    let mut board = Board { rows: Vec::new() };
    let dir = tempfile::tempdir().unwrap();

    board.run("structure validity", || {
        let start = Instant::now();
        let mut bad = Vec::new();
        for a in STRUCTURE_ALGEBRAS {
            if !LieAlgebra::catalog(a).unwrap().check_structure().is_valid() {
                bad.push(a);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let mut cli_ok = true;
        for a in STRUCTURE_ALGEBRAS {
            let out = dir.path().join(format!("algebra-{}.json", a.replace(':', "_")));
            let (code, _) = spencer(&["algebra", "check", "--preset", a, "--out", out.to_str().unwrap(), "--quiet"]);
            let r = read(&out);
            cli_ok &= code == 0
                && r["result"]["jacobi_violations"].as_array().unwrap().is_empty()
                && r["result"]["antisymmetry_violations"].as_array().unwrap().is_empty();
        }
        verdict(
            bad.is_empty() && cli_ok && secs < 1.0,
            format!("{} algebras, violations in {bad:?}, cli exit/lists ok = {cli_ok}, {secs:.3}s < 1s", STRUCTURE_ALGEBRAS.len()),
        )
    });

    board.run("bicomplex identities", || {
        let start = Instant::now();
        let mut checked = 0;
        let mut failures = Vec::new();
        for b in BASES {
            let base = BaseModel::from_preset(b).unwrap();
            for a in ALGEBRAS {
                let alg = LieAlgebra::catalog(a).unwrap();
                for mode in MODES {
                    match build_spencer_double(&base, &alg, KMAX, mode, PairingMode::default_for(&alg)) {
                        Ok(ks) => {
                            for k in &ks {
                                let rep = check_bicomplex(k);
                                checked += rep.checked;
                                failures.extend(rep.failures.iter().map(|f| format!("{b}/{a}/{}: {f:?}", mode.as_str())));
                            }
                        }
                        Err(e) => failures.push(format!("{b}/{a}/{}: {e}", mode.as_str())),
                    }
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        verdict(
            failures.is_empty() && secs < 60.0,
            format!("{checked} identity checks, failures {failures:?}, {secs:.1}s < 60s"),
        )
    });

    board.run("spencer differential nilpotency", || {
        let mut ok = true;
        let mut notes = Vec::new();
        for a in ["su2", "sl2"] {
            let f = spencer_nilpotency_finding(&LieAlgebra::catalog(a).unwrap(), 4, PairingMode::KillingDual).unwrap();
            ok &= f.verdict() == "nilpotent";
            notes.push(format!("{a}/killing_dual: {}", f.verdict()));
        }
        for (a, k) in [("su2", 4), ("sl2", 4), ("sl3", 3), ("abelian:3", 4), ("heisenberg3", 4)] {
            let f = spencer_nilpotency_finding(&LieAlgebra::catalog(a).unwrap(), k, PairingMode::Raw).unwrap();
            ok &= f.verdict() != "implementation bug";
            notes.push(format!("{a}/raw: {}", f.verdict()));
        }
        let out = dir.path().join("nil-cohomology.json");
        let (code, err) = spencer(&[
            "cohomology", "--algebra", "heisenberg3", "--k", "3", "--vertical", "spencer", "--pairing", "raw", "--out",
            out.to_str().unwrap(),
        ]);
        ok &= code == 2 && err.contains("not nilpotent");
        notes.push(format!("cli raw heisenberg3 exit {code}"));
        verdict(ok, notes.join(", "))
    });

    board.run("whitehead vanishing", || {
        let start = Instant::now();
        let mut ok = true;
        let mut worst = (0, 0);
        for a in ["su2", "sl2"] {
            let alg = LieAlgebra::catalog(a).unwrap();
            for k in 0..=3 {
                let h = ce_complex(&alg, k).unwrap().betti().unwrap();
                worst = (worst.0.max(h[1]), worst.1.max(h[2]));
                ok &= h[1] == 0 && h[2] == 0;
            }
        }
        let heis = ce_complex(&LieAlgebra::heisenberg3(), 0).unwrap().betti().unwrap();
        let secs = start.elapsed().as_secs_f64();
        verdict(
            ok && heis[1] >= 1 && secs < 120.0,
            format!("max H^1 = {}, max H^2 = {} (want 0); heisenberg3 H^1 = {} (want >= 1); {secs:.2}s < 120s", worst.0, worst.1, heis[1]),
        )
    });

    let runs = grid();

    board.run("E2 kunneth identity", || {
        let torus = BaseModel::torus(2, 3).unwrap();
        let mut mismatches = Vec::new();
        let mut compared = 0;
        for g in runs.iter().filter(|g| g.base == "torus:2:3" && g.run.mode == VerticalMode::Ce) {
            let alg = LieAlgebra::catalog(&g.algebra).unwrap();
            for s in &g.run.slices {
                let k = s.seq.slice.unwrap();
                let h = ce_complex(&alg, k).unwrap().betti().unwrap();
                let e2 = s.seq.page(2).unwrap_or_else(|| s.seq.stable());
                for p in 0..=s.seq.pmax {
                    for (q, hq) in h.iter().enumerate() {
                        compared += 1;
                        if e2.dim(p, q) != torus.betti()[p] * hq {
                            mismatches.push((g.algebra.clone(), k, p, q));
                        }
                    }
                }
            }
        }
        verdict(mismatches.is_empty() && compared > 0, format!("{compared} (p,q,k) entries, mismatches {mismatches:?}"))
    });

    board.run("convergence bound", || {
        let mut bad = Vec::new();
        let mut worst_n = 0;
        let mut torus4 = 0.0f64;
        for g in &runs {
            worst_n = worst_n.max(g.run.stable_index());
            if !g.run.bound_holds() || (g.run.base.n <= 4 && !g.run.degenerate()) {
                bad.push(format!("{}/{}/{}", g.base, g.algebra, g.run.mode.as_str()));
            }
            if g.base == "torus:4:3" {
                torus4 = torus4.max(g.elapsed.as_secs_f64());
            }
        }
        verdict(
            bad.is_empty() && torus4 < 300.0,
            format!("{} runs, max N = {worst_n}, violations {bad:?}, slowest torus^4 run {torus4:.1}s < 300s", runs.len()),
        )
    });

    board.run("spectral oracle identity", || {
        let mut bad = Vec::new();
        let mut slices = 0;
        for g in &runs {
            for s in &g.run.slices {
                slices += 1;
                if s.seq.e_infinity_totals() != s.total {
                    bad.push(format!("{}/{}/{}/{:?}", g.base, g.algebra, g.run.mode.as_str(), s.seq.slice));
                }
            }
        }
        verdict(bad.is_empty(), format!("{slices} slices compared exactly, mismatches {bad:?}"))
    });

    board.run("torsion consistency", || {
        let mut ok = true;
        let mut compared = 0;
        for g in runs.iter().filter(|g| g.run.degenerate()) {
            let base = BaseModel::from_preset(&g.base).unwrap();
            let alg = LieAlgebra::catalog(&g.algebra).unwrap();
            let seqs = g.run.seqs();
            let vc = vertical_cohomology(&alg, &g.run).unwrap();
            let top = seqs.iter().map(|s| s.max_total_degree()).max().unwrap();
            for k in 0..=top {
                compared += 1;
                ok &= torsion_case2(&seqs, k).unwrap() == e2_torsion_sum(&base, &vc, k);
            }
        }
        let su2 = LieAlgebra::su2();
        let oracle_ok = (0..=4).all(|j| invariants_dimension(&su2, j) == ce_complex_dual(&su2, j).unwrap().betti().unwrap()[0]);
        let t2 = BaseModel::torus(2, 3).unwrap();
        let k4 = torsion_case1(&t2, &su2, 4, CurvatureMode::Formal).unwrap();
        let k2 = torsion_case1(&t2, &su2, 2, CurvatureMode::Formal).unwrap();
        let out = dir.path().join("torsion.json");
        let (code, _) = spencer(&["torsion", "--base", "torus:2:3", "--algebra", "su2", "--k", "4", "--out", out.to_str().unwrap(), "--quiet"]);
        let r = read(&out)["result"].clone();
        let emitted = code == 0 && r["discrepancy"].is_boolean() && r["proof_form_total"].is_u64() && r["terms"].is_array();
        verdict(
            ok && oracle_ok && k4.total_dim == 1 && k2.total_dim == 0 && emitted,
            format!(
                "case2 = E2 sum on {compared} degrees: {ok}; invariant oracle {oracle_ok}; case1 k=4 -> {} (want 1), k=2 -> {} (want 0); discrepancy report emitted: {emitted} (statement {} vs proof form {})",
                k4.total_dim, k2.total_dim, r["total_dim"], r["proof_form_total"]
            ),
        )
    });

    board.run("coadjoint identity sampling", || {
        let su2 = step4_identity_sample(&LieAlgebra::su2(), 1000, 2024).unwrap();
        let sl3 = step4_identity_sample(&LieAlgebra::sl3(), 1000, 2024).unwrap();
        verdict(su2 < 1e-11 && sl3 < 1e-11, format!("su2 {su2:.2e}, sl3 {sl3:.2e} (< 1e-11, 1000 trials)"))
    });

    board.run("functional gradient", || {
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let mut worst: f64 = 0.0;
        for c in 0..3u64 {
            let w = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 100 + c, amp: 0.7 });
            let l = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 200 + c, amp: 1.0 });
            let a = random_cochain(&s, 0, 3, RandomFieldSpec { seed: 300 + c, amp: 1.0 });
            worst = worst.max(gradient_check(&s, &w, &l, &a, 0.5, 20, 400 + c).unwrap());
        }
        verdict(worst < 1e-6, format!("max relative error {worst:.2e} (< 1e-6, 3 configs x 20 directions)"))
    });

    let st1 = dir.path().join("selftest-1.json");
    let st2 = dir.path().join("selftest-2.json");
    let started = Instant::now();
    let (st_code, _) = spencer(&["selftest", "--out", st1.to_str().unwrap(), "--quiet"]);
    let st_secs = started.elapsed().as_secs_f64();

    board.run("inverse construction", || {
        let r = read(&st1)["result"]["inverse_construction"].clone();
        let flat = r["flat"]["anchor_distance"].as_f64().unwrap();
        let small = &r["small_curvature"]["solve"];
        let strong = &r["strong_obstruction"]["solve"];
        let floor = strong["functional"].as_f64().unwrap();
        let obs = strong["obstruction"]["max"].as_f64().unwrap();
        let ok = flat < 1e-10
            && small["converged"] == true
            && small["monotone"] == true
            && floor > 1e-6
            && obs > 1e-6
            && st_secs < 120.0;
        verdict(
            ok,
            format!(
                "flat anchor distance {flat:.1e} (< 1e-10); small curvature converged {} monotone {}; strong floor {floor:.3e} with obstruction {obs:.3e} (> 0); selftest exit {st_code} in {st_secs:.1}s < 120s",
                small["converged"], small["monotone"]
            ),
        )
    });

    board.run("mesh refinement orders", || {
        let st = refinement_study(&LieAlgebra::su2(), &[8, 16, 32], 21).unwrap();
        let ok = st.symplectic_order >= 1.0 - 0.3 && st.frobenius_order >= 1.0 - 0.3;
        verdict(
            ok,
            format!(
                "symplectic order {:.3}, plaquette defect order {:.3} (>= 1.0 within 0.3) over N = 8,16,32",
                st.symplectic_order, st.frobenius_order
            ),
        )
    });

    board.run("evolution law", || {
        let s = LatticeSpec::new(2, 8, &LieAlgebra::su2()).unwrap();
        let w = Cochain::constant(&s, 1, &[vec![0.0, 0.0, 0.8], vec![0.0, 0.0, -0.4]]).unwrap();
        let xi_v = [0.3, 0.7, -0.2];
        let xi = Cochain::constant(&s, 0, &[xi_v.to_vec()]).unwrap();
        let x = Cochain::constant(&s, 0, &[vec![1.0, -2.0]]).unwrap();
        let dt = 1e-3;
        let tr = evolve_connection(&s, &w, &xi, &x, dt, 200, StepMethod::Rk4).unwrap();
        let mut worst: f64 = 0.0;
        let mut prev = 0.0;
        for (i, st) in tr.states.iter().enumerate() {
            let err = st.sub(&gauge_rotation(&s, &w, &xi_v, i as f64 * dt)).max_abs();
            worst = worst.max(err - prev);
            prev = err;
        }
        let w0 = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 11, amp: 1.0 });
        let still = evolve_connection(&s, &w0, &Cochain::zeros(&s, 0, 3), &Cochain::zeros(&s, 0, 2), dt, 50, StepMethod::Rk4).unwrap();
        let stationary = still.states.iter().all(|st| st == &w0);
        verdict(
            worst < 1e-8 && stationary,
            format!("max per-step error {worst:.2e} (< 1e-8 at dt = 1e-3); zero input stationary: {stationary}"),
        )
    });

    board.run("determinism", || {
        let (code2, _) = spencer(&["selftest", "--out", st2.to_str().unwrap(), "--quiet"]);
        let a = std::fs::read(&st1).unwrap();
        let b = std::fs::read(&st2).unwrap();
        let replay = dir.path().join("replay.json");
        let (rc, _) = spencer(&["selftest", "--replay", st1.to_str().unwrap(), "--out", replay.to_str().unwrap(), "--quiet"]);
        verdict(
            a == b && st_code == 0 && code2 == 0 && rc == 0,
            format!("selftest exits {st_code}/{code2}, {} bytes, identical: {}; replay exit {rc}", a.len(), a == b),
        )
    });

    let failed: Vec<&String> = board.rows.iter().filter(|(_, p)| !p).map(|(n, _)| n).collect();
    let line = format!("acceptance: {}/{} criteria passed\n", board.rows.len() - failed.len(), board.rows.len());
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
