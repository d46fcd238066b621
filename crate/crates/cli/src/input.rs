use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use spencer_core::derham::{BaseModel, CupRing};
use spencer_core::lattice::{random_cochain, smooth_cochain, Cochain, LatticeSpec, RandomFieldSpec};
use spencer_core::{LieAlgebra, Rational};

use crate::error::CliError;

fn looks_like_file(s: &str) -> bool {
    s.ends_with(".json") || Path::new(s).is_file()
}

fn read_json<T: for<'de> Deserialize<'de>>(param: &'static str, path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(param, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(param, format!("{}: {e}", path.display())))
}

fn rational(param: &'static str, s: &str) -> Result<Rational, CliError> {
    s.parse().map_err(|_| CliError::input(param, format!("invalid rational {s:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    pub labels: Vec<String>,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, String>,
}

pub fn algebra_from_file(path: &Path) -> Result<LieAlgebra, CliError> {
    let f: AlgebraFile = read_json("algebra", path)?;
    if f.labels.len() != f.dim {
        return Err(CliError::input("labels", format!("{} labels for dim {}", f.labels.len(), f.dim)));
    }
    let mut brackets = Vec::new();
    for b in &f.brackets {
        for (k, v) in &b.coeffs {
            let k: usize = k.parse().map_err(|_| CliError::input("brackets", format!("invalid index {k:?}")))?;
            brackets.push((b.i, b.j, k, rational("brackets", v)?));
        }
    }
    let name = f.name.clone().unwrap_or_else(|| path.display().to_string());
    Ok(LieAlgebra::from_brackets(name, f.labels, brackets)?)
}

pub fn load_algebra(spec: &str) -> Result<LieAlgebra, CliError> {
    if looks_like_file(spec) {
        algebra_from_file(Path::new(spec))
    } else {
        Ok(LieAlgebra::catalog(spec)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseFile {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub betti: Vec<usize>,
    #[serde(default)]
    pub ring: Option<Vec<RingEntry>>,
    #[serde(default)]
    pub curvature_class: Option<Vec<String>>,
}

/// `a · b = product` for basis classes `a = [deg, idx]`, `b = [deg, idx]`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingEntry {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub product: Vec<String>,
}

pub fn base_from_file(path: &Path) -> Result<BaseModel, CliError> {
    let f: BaseFile = read_json("base", path)?;
    let ring = match &f.ring {
        Some(entries) => {
            let mut out = Vec::new();
            for e in entries {
                let prod = e.product.iter().map(|s| rational("ring", s)).collect::<Result<Vec<_>, _>>()?;
                out.push((e.a, e.b, prod));
            }
            Some(CupRing::new(f.betti.clone(), out)?)
        }
        None => None,
    };
    let mut base = BaseModel::formal(f.betti.clone(), f.n, ring)?;
    if let Some(c) = &f.curvature_class {
        let class = c.iter().map(|s| rational("curvature_class", s)).collect::<Result<Vec<_>, _>>()?;
        base = base.with_curvature_class(class)?;
    }
    if let Some(name) = f.name {
        base.name = name;
    }
    Ok(base)
}

pub fn load_base(spec: &str) -> Result<BaseModel, CliError> {
    if looks_like_file(spec) {
        base_from_file(Path::new(spec))
    } else {
        Ok(BaseModel::from_preset(spec)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Connection,
    CoMoment,
    AlgebraScalar,
    BaseVector,
}

impl FieldKind {
    fn degree(self) -> usize {
        match self {
            FieldKind::Connection => 1,
            _ => 0,
        }
    }

    fn width(self, spec: &LatticeSpec) -> usize {
        match self {
            FieldKind::BaseVector => spec.n,
            _ => spec.dim(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub sites_per_axis: usize,
    pub alg_dim: usize,
    pub field_kind: FieldKind,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub header: FieldHeader,
    /// Site-major, then component, then algebra index.
    pub data: Vec<f64>,
}

pub fn save_field(path: &Path, spec: &LatticeSpec, kind: FieldKind, field: &Cochain) -> Result<(), CliError> {
    let f = FieldFile {
        header: FieldHeader {
            n: spec.n,
            sites_per_axis: spec.sites_per_axis,
            alg_dim: spec.dim(),
            field_kind: kind,
        },
        data: field.data.clone(),
    };
    let text = serde_json::to_string(&f).expect("plain data");
    std::fs::write(path, text + "\n").map_err(|e| CliError::input("output", format!("{}: {e}", path.display())))
}

fn parse_numbers(param: &'static str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::input(param, format!("invalid number {t:?}"))))
        .collect()
}

fn kv<'a>(param: &'static str, parts: &[&'a str]) -> Result<BTreeMap<&'a str, &'a str>, CliError> {
    parts
        .iter()
        .map(|p| p.split_once('=').ok_or_else(|| CliError::input(param, format!("expected key=value, got {p:?}"))))
        .collect()
}

/// Builds a field from a spec string:
/// `zero`, `const:v,...[/v,...]` (one group per component), `basis:<i|last>`,
/// `random:seed=S:amp=A`, `smooth:seed=S:amp=A`, `obstruction:a=A`,
/// or a path to a field file.
pub fn load_field(param: &'static str, s: &str, spec: &LatticeSpec, kind: FieldKind) -> Result<Cochain, CliError> {
    let degree = kind.degree();
    let width = kind.width(spec);
    if looks_like_file(s) {
        let f: FieldFile = read_json(param, Path::new(s))?;
        let h = &f.header;
        if h.n != spec.n || h.sites_per_axis != spec.sites_per_axis || h.alg_dim != spec.dim() || h.field_kind != kind {
            return Err(CliError::input(param, "field header does not match the lattice or field kind"));
        }
        let mut c = Cochain::zeros(spec, degree, width);
        if f.data.len() != c.data.len() {
            return Err(CliError::input(param, format!("expected {} values, found {}", c.data.len(), f.data.len())));
        }
        c.data = f.data;
        return Ok(c);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["zero"] => Ok(Cochain::zeros(spec, degree, width)),
        ["const", values] => {
            let groups = values.split('/').map(|g| parse_numbers(param, g)).collect::<Result<Vec<_>, _>>()?;
            if let Some(g) = groups.iter().find(|g| g.len() != width) {
                return Err(CliError::input(param, format!("const group has {} values, expected {width}", g.len())));
            }
            Ok(Cochain::constant(spec, degree, &groups).map_err(|e| CliError::input(param, e.to_string()))?)
        }
        ["basis", which] => {
            if degree != 0 {
                return Err(CliError::input(param, "basis fields are 0-cochains"));
            }
            let i = if *which == "last" {
                width - 1
            } else {
                which.parse::<usize>().map_err(|_| CliError::input(param, format!("invalid index {which:?}")))?
            };
            if i >= width {
                return Err(CliError::input(param, format!("index {i} out of range for width {width}")));
            }
            let mut v = vec![0.0; width];
            v[i] = 1.0;
            Ok(Cochain::constant(spec, 0, &[v])?)
        }
        ["random", ..] => {
            let r: RandomFieldSpec = s.parse().map_err(|e: spencer_core::Error| CliError::input(param, e.to_string()))?;
            Ok(random_cochain(spec, degree, width, r))
        }
        ["smooth", rest @ ..] => {
            let m = kv(param, rest)?;
            let seed = m.get("seed").ok_or_else(|| CliError::input(param, "smooth needs seed="))?;
            let amp = m.get("amp").ok_or_else(|| CliError::input(param, "smooth needs amp="))?;
            let seed: u64 = seed.parse().map_err(|_| CliError::input(param, "invalid seed"))?;
            let amp: f64 = amp.parse().map_err(|_| CliError::input(param, "invalid amp"))?;
            Ok(smooth_cochain(spec, degree, width, seed, amp, 3))
        }
        ["obstruction", rest @ ..] => {
            let m = kv(param, rest)?;
            let a: f64 = m
                .get("a")
                .ok_or_else(|| CliError::input(param, "obstruction needs a="))?
                .parse()
                .map_err(|_| CliError::input(param, "invalid a"))?;
            if kind != FieldKind::Connection || spec.n < 2 || width < 2 {
                return Err(CliError::input(param, "obstruction fields are connections with n ≥ 2 and dim ≥ 2"));
            }
            Ok(strong_obstruction_connection(spec, a))
        }
        _ => Err(CliError::input(param, format!("unrecognized field spec {s:?}"))),
    }
}

/// `ω_1 = a e_1`, `ω_2 = a e_2`, zero in other directions.
pub fn strong_obstruction_connection(spec: &LatticeSpec, a: f64) -> Cochain {
    let d = spec.dim();
    Cochain::from_fn(spec, 1, d, |_, c| {
        let mut v = vec![0.0; d];
        if c < 2 {
            v[c] = a;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> LatticeSpec {
        LatticeSpec::new(2, 4, &LieAlgebra::su2()).unwrap()
    }

    #[test]
    fn field_specs() {
        let s = lattice();
        let z = load_field("omega", "zero", &s, FieldKind::Connection).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let c = load_field("omega", "const:1,2,3/4,5,6", &s, FieldKind::Connection).unwrap();
        assert_eq!(c.at(7, 1), &[4.0, 5.0, 6.0]);
        let b = load_field("anchor", "basis:last", &s, FieldKind::CoMoment).unwrap();
        assert_eq!(b.at(3, 0), &[0.0, 0.0, 1.0]);
        let x = load_field("x", "const:1,-2", &s, FieldKind::BaseVector).unwrap();
        assert_eq!(x.width, 2);
        let r1 = load_field("l", "random:seed=4:amp=0.5", &s, FieldKind::CoMoment).unwrap();
        let r2 = load_field("l", "random:seed=4:amp=0.5", &s, FieldKind::CoMoment).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.max_abs() <= 0.5);
        let o = load_field("omega", "obstruction:a=0.5", &s, FieldKind::Connection).unwrap();
        assert_eq!(o.at(0, 0), &[0.5, 0.0, 0.0]);
        assert_eq!(o.at(0, 1), &[0.0, 0.5, 0.0]);
        assert!(load_field("omega", "smooth:seed=1:amp=0.3", &s, FieldKind::Connection).is_ok());
    }

    #[test]
    fn bad_field_specs_name_the_parameter() {
        let s = lattice();
        for (spec, kind) in [
            ("const:1,2", FieldKind::CoMoment),
            ("basis:3", FieldKind::CoMoment),
            ("basis:0", FieldKind::Connection),
            ("obstruction:a=1", FieldKind::CoMoment),
            ("smooth:seed=1", FieldKind::CoMoment),
            ("wobble", FieldKind::CoMoment),
        ] {
            match load_field("anchor", spec, &s, kind) {
                Err(CliError::Input { param, .. }) => assert_eq!(param, "anchor", "{spec}"),
                other => panic!("{spec}: {other:?}"),
            }
        }
    }

    #[test]
    fn field_file_round_trip() {
        let s = lattice();
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("f.json");
        let f = random_cochain(&s, 1, 3, RandomFieldSpec { seed: 9, amp: 1.0 });
        save_field(&p, &s, FieldKind::Connection, &f).unwrap();
        let g = load_field("omega", p.to_str().unwrap(), &s, FieldKind::Connection).unwrap();
        assert_eq!(f, g);
        assert!(load_field("lambda", p.to_str().unwrap(), &s, FieldKind::CoMoment).is_err());
    }

    #[test]
    fn algebra_and_base_files() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("h.json");
        std::fs::write(
            &p,
            r#"{"name": "heis", "dim": 3, "labels": ["x","y","z"], "brackets": [{"i":0,"j":1,"coeffs":{"2":"1"}}]}"#,
        )
        .unwrap();
        let a = load_algebra(p.to_str().unwrap()).unwrap();
        assert_eq!(a.name(), "heis");
        assert_eq!(a.nonzero_brackets(), LieAlgebra::heisenberg3().nonzero_brackets());

        std::fs::write(&p, r#"{"dim": 2, "labels": ["x"], "brackets": []}"#).unwrap();
        assert!(matches!(load_algebra(p.to_str().unwrap()), Err(CliError::Input { .. })));
        std::fs::write(&p, r#"{"dim": 1, "labels": ["x"], "brackets": [], "extra": 1}"#).unwrap();
        assert!(load_algebra(p.to_str().unwrap()).is_err());

        let b = d.path().join("b.json");
        std::fs::write(
            &b,
            r#"{"n": 2, "betti": [1, 0, 1], "ring": [], "curvature_class": ["3/2"]}"#,
        )
        .unwrap();
        let base = load_base(b.to_str().unwrap()).unwrap();
        assert_eq!(base.betti(), &[1, 0, 1]);
        assert_eq!(base.curvature_class().unwrap(), &[Rational::new(3, 2)]);
    }
}
