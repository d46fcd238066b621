use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spencer");

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(BIN).args(args).arg("--out").arg(out).output().unwrap();
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks `type`, `const`, `enum`, `required`, `properties`, `items`,
/// `additionalProperties`: the keywords the shipped schemas use.
fn conforms(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{at}: expected {types:?}, found {v}"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}"));
        }
    }
    if let Some(Value::Array(e)) = schema.get("enum") {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in {e:?}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if v.as_f64().is_some_and(|x| x < min) {
            return Err(format!("{at}: below minimum"));
        }
    }
    if let Value::Object(obj) = v {
        if let Some(Value::Array(req)) = schema.get("required") {
            for r in req {
                if !obj.contains_key(r.as_str().unwrap()) {
                    return Err(format!("{at}: missing {r}"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, val) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => conforms(s, val, &format!("{at}.{k}"))?,
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{at}: unexpected key {k}")),
                    Some(s @ Value::Object(_)) => conforms(s, val, &format!("{at}.{k}"))?,
                    _ => {}
                },
            }
        }
    }
    if let (Value::Array(items), Some(s)) = (v, schema.get("items")) {
        for (i, it) in items.iter().enumerate() {
            conforms(s, it, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_schema(name: &str, report: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(manifest().join("schemas").join(format!("{name}.schema.json"))).unwrap())
            .unwrap();
    if let Err(e) = conforms(&schema, report, "$") {
        panic!("{name}: {e}");
    }
}

#[test]
fn algebra_check_preset_and_file() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("a.json");
    let (code, stdout, _) = run(&["algebra", "check", "--preset", "su2"], &out);
    assert_eq!(code, 0);
    assert!(stdout.contains("jacobi violations"));
    let r = read(&out);
    assert_schema("algebra-check", &r);
    assert_eq!(r["result"]["jacobi_violations"], Value::Array(vec![]));

    let file = manifest().join("presets").join("sl2.json");
    let (code, _, _) = run(&["algebra", "check", "--file", file.to_str().unwrap()], &out);
    assert_eq!(code, 0);
    assert_eq!(read(&out)["result"]["semisimple"], true);
}

#[test]
fn broken_algebra_file_fails_the_check() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{"dim": 3, "labels": ["a","b","c"], "brackets": [{"i":0,"j":1,"coeffs":{"2":"1"}}, {"i":1,"j":2,"coeffs":{"1":"1"}}]}"#,
    )
    .unwrap();
    let out = d.path().join("a.json");
    let (code, stdout, _) = run(&["algebra", "check", "--file", file.to_str().unwrap()], &out);
    assert_eq!(code, 2);
    assert!(stdout.contains("FAILED"));
    assert!(!read(&out)["result"]["jacobi_violations"].as_array().unwrap().is_empty());
}

#[test]
fn input_errors_exit_one_and_name_the_parameter() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("x.json");
    let (code, _, err) = run(&["spectral", "--base", "torus:2", "--algebra", "su2"], &out);
    assert_eq!(code, 1);
    assert!(err.contains("base"));
    let (code, _, err) = run(&["cohomology", "--algebra", "e8", "--k", "1"], &out);
    assert_eq!(code, 1);
    assert!(err.contains("algebra"));
    let (code, _, err) = run(&["lattice", "solve", "--N", "2"], &out);
    assert_eq!(code, 1);
    assert!(err.contains("N") || err.contains("sites"), "{err}");
    let (code, _, err) = run(&["lattice", "solve", "--omega", "random:seed=x:amp=1"], &out);
    assert_eq!(code, 1);
    assert!(err.contains("omega"), "{err}");
    let (code, _, _) = run(&["spectral", "--nonsense"], &out);
    assert_eq!(code, 1);
    assert!(!out.exists());
}

#[test]
fn spectral_example_report() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("s.json");
    let (code, _, _) = run(&["spectral", "--base", "torus:2:3", "--algebra", "su2", "--kmax", "2", "--vertical", "ce"], &out);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("spectral", &r);
    let res = &r["result"];
    assert_eq!(res["N"], 2);
    assert_eq!(res["bounds"]["N_le_n_plus_1"], true);
    assert_eq!(res["bounds"]["E2_degenerate"], true);
    assert_eq!(res["slices"].as_array().unwrap().len(), 3);
    assert_eq!(r["config"]["kmax"], 2);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn torsion_example_and_case2() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("t.json");
    let (code, _, _) = run(&["torsion", "--base", "formal:1,2,1", "--algebra", "su2", "--k", "4", "--curvature", "formal"], &out);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("torsion", &r);
    assert_eq!(r["result"]["total_dim"], 1);

    let (code, _, _) = run(&["torsion", "--base", "torus:2:3", "--algebra", "su2", "--k", "3", "--case2"], &out);
    assert_eq!(code, 0);
    let c2 = &read(&out)["result"]["case2"];
    assert_eq!(c2["matches_e2_sum"], true);
    assert_eq!(c2["edge_partition_holds"], true);
}

#[test]
fn quintic_file_matches_preset() {
    let d = tempfile::tempdir().unwrap();
    let file = manifest().join("presets").join("quintic.json");
    let a = d.path().join("a.json");
    let b = d.path().join("b.json");
    for k in [2, 4, 6] {
        let ks = k.to_string();
        let (c1, _, _) = run(&["torsion", "--base", "quintic", "--algebra", "su2", "--k", &ks, "--curvature", "ring"], &a);
        let (c2, _, _) =
            run(&["torsion", "--base", file.to_str().unwrap(), "--algebra", "su2", "--k", &ks, "--curvature", "ring"], &b);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(read(&a)["result"], read(&b)["result"]);
    }
}

#[test]
fn cohomology_report_shape() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("c.json");
    let (code, _, _) = run(&["cohomology", "--algebra", "su2", "--k", "1"], &out);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("cohomology", &r);
    assert_eq!(r["result"]["H"], serde_json::json!([0, 0, 0, 0]));
    assert_eq!(r["result"]["mode"], "ce");
}

#[test]
fn lattice_commands_and_field_files() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("l.json");
    let lam = d.path().join("lambda.json");
    let (code, _, _) = run(
        &["lattice", "solve", "--omega", "zero", "--anchor", "const:0.2,-0.5,1", "--tol", "1e-13", "--save-lambda", lam.to_str().unwrap()],
        &out,
    );
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("lattice-solve", &r);
    assert!(r["result"]["anchor_distance_max"].as_f64().unwrap() < 1e-10);
    assert!(r["config"].get("save_lambda").is_none());

    let (code, _, _) = run(&["lattice", "check", "--omega", "zero", "--lambda", lam.to_str().unwrap()], &out);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("lattice-check", &r);
    assert!(r["result"]["cartan_residual_max"].as_f64().unwrap() < 1e-10);

    let (code, _, _) = run(&["lattice", "check", "--N", "6", "--lambda", lam.to_str().unwrap()], &out);
    assert_eq!(code, 1, "header mismatch is an input error");

    let (code, _, _) = run(
        &["lattice", "evolve", "--omega", "const:0,0,0.8/0,0,-0.4", "--xi", "const:0.3,0.7,-0.2", "--x", "const:1,-2", "--steps", "20"],
        &out,
    );
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("lattice-evolve", &r);
    assert!(r["result"]["flat_reference"]["max_step_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["result"]["curvature_norms"].as_array().unwrap().len(), 21);
}

#[test]
fn blow_up_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("e.json");
    let (code, _, err) = run(
        &["lattice", "evolve", "--omega", "const:1e300,0,0/0,1e300,0", "--xi", "const:1e300,1e300,0", "--dt", "1", "--method", "euler"],
        &out,
    );
    assert_eq!(code, 2);
    assert!(err.contains("step 1"), "{err}");
}

#[test]
fn default_output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["algebra", "check", "--preset", "sl3", "--quiet"])
        .env("SPENCER_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("algebra-check.json").exists());
}

#[test]
fn replay_round_trip_and_unknown_keys() {
    let d = tempfile::tempdir().unwrap();
    let rep = d.path().join("c.json");
    let (code, _, _) = run(&["cohomology", "--algebra", "sl2", "--k", "2", "--vertical", "spencer"], &rep);
    assert_eq!(code, 0);
    let out = d.path().join("r.json");
    let (code, _, _) = run(&["selftest", "--replay", rep.to_str().unwrap()], &out);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_schema("selftest-replay", &r);
    assert_eq!(r["result"]["identical_result"], true);

    let mut tampered = read(&rep);
    tampered["result"]["H"] = serde_json::json!([9, 9, 9]);
    std::fs::write(&rep, serde_json::to_string(&tampered).unwrap()).unwrap();
    let (code, _, _) = run(&["selftest", "--replay", rep.to_str().unwrap()], &out);
    assert_eq!(code, 2);
    assert_eq!(read(&out)["result"]["mismatched_keys"], serde_json::json!(["H"]));

    tampered["config"]["bogus"] = serde_json::json!(1);
    std::fs::write(&rep, serde_json::to_string(&tampered).unwrap()).unwrap();
    let (code, _, err) = run(&["selftest", "--replay", rep.to_str().unwrap()], &out);
    assert_eq!(code, 1);
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn selftest_report_conforms() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("s.json");
    let (code, stdout, _) = run(&["selftest", "--seed", "3"], &out);
    assert_eq!(code, 0, "{stdout}");
    let r = read(&out);
    assert_schema("selftest", &r);
    assert_eq!(r["config"]["seed"], 3);
    let findings = r["result"]["spencer_nilpotency"]["findings"].as_array().unwrap();
    assert!(findings.iter().any(|f| f["algebra"] == "heisenberg3"));
}
