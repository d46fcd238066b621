use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spencer_core::derham::CurvatureMode;
use spencer_core::lattice::StepMethod;
use spencer_core::spencer::{PairingMode, VerticalMode};
use spencer_core::LieAlgebra;

#[derive(Parser, Debug)]
#[command(name = "spencer", version, about = "Spencer complexes, spectral sequences and a compatible-pair lattice lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report file; defaults to `$SPENCER_OUT_DIR/<command>.json` or `./<command>.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Skip the summary table.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structure-constant checks.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Cohomology of the Chevalley–Eilenberg or Spencer complex in one degree.
    Cohomology(CohomologyArgs),
    /// Spectral sequence of the Spencer double complex.
    Spectral(SpectralArgs),
    /// Torsion terms of Spencer cohomology.
    Torsion(TorsionArgs),
    /// Floating-point lattice experiments.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Full invariant suite, or re-validation of a saved report.
    Selftest(SelftestArgs),
}

#[derive(Subcommand, Debug)]
pub enum AlgebraCmd {
    /// Antisymmetry and Jacobi in exact arithmetic.
    Check(AlgebraCheckArgs),
}

#[derive(Subcommand, Debug)]
pub enum LatticeCmd {
    /// Minimize the compatibility functional for λ.
    Solve(LatticeSolveArgs),
    /// Residuals, obstruction, symplectic and identity checks.
    Check(LatticeCheckArgs),
    /// Integrate the connection evolution law.
    Evolve(LatticeEvolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerticalArg {
    Ce,
    Spencer,
}

impl From<VerticalArg> for VerticalMode {
    fn from(v: VerticalArg) -> Self {
        match v {
            VerticalArg::Ce => VerticalMode::Ce,
            VerticalArg::Spencer => VerticalMode::Spencer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingArg {
    /// killing_dual for semisimple algebras, raw otherwise.
    Auto,
    Raw,
    #[value(name = "killing_dual")]
    KillingDual,
}

impl PairingArg {
    pub fn resolve(self, alg: &LieAlgebra) -> PairingMode {
        match self {
            PairingArg::Auto => PairingMode::default_for(alg),
            PairingArg::Raw => PairingMode::Raw,
            PairingArg::KillingDual => PairingMode::KillingDual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureArg {
    Formal,
    Ring,
}

impl From<CurvatureArg> for CurvatureMode {
    fn from(c: CurvatureArg) -> Self {
        match c {
            CurvatureArg::Formal => CurvatureMode::Formal,
            CurvatureArg::Ring => CurvatureMode::Ring,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Euler,
    Rk4,
}

impl From<MethodArg> for StepMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Euler => StepMethod::Euler,
            MethodArg::Rk4 => StepMethod::Rk4,
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraCheckArgs {
    /// Catalog name: su2, so3, sl2, sl3, heisenberg3, abelian:<d>.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub preset: Option<String>,
    /// Algebra JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyArgs {
    /// Catalog name or algebra JSON file.
    #[arg(long)]
    pub algebra: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "ce")]
    pub vertical: VerticalArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub pairing: PairingArg,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralArgs {
    /// Base preset (torus:n:m, circle:m, formal:b0,b1,..., quintic) or base JSON file.
    #[arg(long)]
    pub base: String,
    #[arg(long)]
    pub algebra: String,
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value = "ce")]
    pub vertical: VerticalArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub pairing: PairingArg,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionArgs {
    #[arg(long)]
    pub base: String,
    #[arg(long)]
    pub algebra: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "formal")]
    pub curvature: CurvatureArg,
    /// Also compute the filtration form from a spectral sequence run.
    #[arg(long)]
    pub case2: bool,
    /// Symmetric-degree cutoff for the spectral run behind `--case2`.
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value = "ce")]
    pub vertical: VerticalArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub pairing: PairingArg,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeArgs {
    #[arg(long, default_value = "su2")]
    pub algebra: String,
    /// Base dimension, 1..=4.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Sites per axis.
    #[arg(long = "N", default_value_t = 8)]
    #[serde(rename = "N")]
    pub sites: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSolveArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Connection field spec or file.
    #[arg(long, default_value = "random:seed=1:amp=0.05")]
    pub omega: String,
    /// Initial co-moment field.
    #[arg(long, default_value = "random:seed=2:amp=1")]
    pub lambda0: String,
    #[arg(long, default_value = "basis:last")]
    pub anchor: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub maxiter: usize,
    #[arg(long, default_value_t = 0)]
    pub pin_site: usize,
    /// Write the solved λ as a field file.
    #[arg(long)]
    #[serde(skip)]
    pub save_lambda: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCheckArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long, default_value = "random:seed=1:amp=0.5")]
    pub omega: String,
    #[arg(long, default_value = "random:seed=2:amp=1")]
    pub lambda: String,
    #[arg(long, default_value = "random:seed=3:amp=1")]
    pub anchor: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Random trials for the coadjoint identity.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Random directions for the gradient check.
    #[arg(long, default_value_t = 20)]
    pub directions: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance for the holonomic flag and the consistency premise.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeEvolveArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long, default_value = "random:seed=1:amp=0.1")]
    pub omega: String,
    /// Algebra-valued 0-cochain ξ.
    #[arg(long, default_value = "random:seed=2:amp=0.1")]
    pub xi: String,
    /// Base vector field X (width n).
    #[arg(long, default_value = "zero")]
    pub x: String,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "rk4")]
    pub method: MethodArg,
    /// Write the final connection as a field file.
    #[arg(long)]
    #[serde(skip)]
    pub save_omega: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Re-run the command recorded in a report and compare results.
    #[arg(long)]
    #[serde(skip)]
    pub replay: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags_and_round_trips_config() {
        let cli = Cli::try_parse_from([
            "spencer", "lattice", "solve", "--N", "16", "--alpha", "0", "--pairing-is-not-a-flag",
        ]);
        assert!(cli.is_err());
        let cli = Cli::try_parse_from(["spencer", "lattice", "solve", "--N", "16", "--alpha", "0"]).unwrap();
        let Command::Lattice(LatticeCmd::Solve(a)) = cli.command else { panic!() };
        assert_eq!(a.lattice.sites, 16);
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["lattice"]["N"], 16);
        let back: LatticeSolveArgs = serde_json::from_value(v).unwrap();
        assert_eq!(back, a);
        let cli = Cli::try_parse_from(["spencer", "cohomology", "--algebra", "su2", "--k", "2", "--pairing", "killing_dual"]).unwrap();
        let Command::Cohomology(c) = cli.command else { panic!() };
        assert_eq!(c.pairing.resolve(&LieAlgebra::heisenberg3()), PairingMode::KillingDual);
        assert_eq!(PairingArg::Auto.resolve(&LieAlgebra::heisenberg3()), PairingMode::Raw);
        assert_eq!(PairingArg::Auto.resolve(&LieAlgebra::su2()), PairingMode::KillingDual);
    }
}
