//! Command-line front end. Every report is a JSON object
//! `{"manifest": RunManifest, "result": ...}`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curves::CurveConfig;
use crate::determining::{
    determine, equivalence_witness, gfda_check, renormed_images, DiagnosticOptions, GfdaReport, QueryDescription,
};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::linmap::{LinearMap, MapVerdict, OperatorNorm};
use crate::scalar::Scalar;
use crate::space::{cap_dim, NormedSpace, SpaceDescription};
use crate::systems::{CompatibleVector, RuleDescription, StageVerdict, System, SystemDescription};

/// Exit code for input and runtime errors.
pub const EXIT_ERROR: i32 = 3;
pub const DEFAULT_TOL: &str = "1/1000000";

#[derive(Parser, Debug)]
#[command(name = "banach-limits", version, about = "Finite-dimensional normed spaces and their inverse and direct limits")]
pub struct Cli {
    /// Seed for randomized search.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the number of stages (or the evaluation stage of a query).
    #[arg(long, global = true)]
    pub max_stage: Option<usize>,
    /// Shared tolerance, as a rational (`1/1000`) or decimal.
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check `‖θ_i‖ <= 1` and the quotient/isometry flags of a system.
    Validate { path: PathBuf },
    /// Write the dual system.
    Dualize { path: PathBuf },
    /// Norms, dual norms and attaining functionals in one space.
    Norms { path: PathBuf },
    /// Operator norm of a map.
    Opnorm { path: PathBuf },
    /// Quotient-map verdict for a map.
    QuotientCheck { path: PathBuf },
    /// ε-determining search and certification; exit 0/1/2.
    Determine { path: PathBuf },
    /// Restricted-projection quotient checks plus the determining verdict.
    GfdaCheck { path: PathBuf },
    /// Norm-convergence and uniformity diagnostics for a sequence.
    AnpDp { path: PathBuf },
    /// Difference-quotient scans of coordinate curves.
    Curves { path: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Dualize { .. } => "dualize",
            Command::Norms { .. } => "norms",
            Command::Opnorm { .. } => "opnorm",
            Command::QuotientCheck { .. } => "quotient-check",
            Command::Determine { .. } => "determine",
            Command::GfdaCheck { .. } => "gfda-check",
            Command::AnpDp { .. } => "anp-dp",
            Command::Curves { .. } => "curves",
        }
    }

    fn path(&self) -> &Path {
        match self {
            Command::Validate { path }
            | Command::Dualize { path }
            | Command::Norms { path }
            | Command::Opnorm { path }
            | Command::QuotientCheck { path }
            | Command::Determine { path }
            | Command::GfdaCheck { path }
            | Command::AnpDp { path }
            | Command::Curves { path } => path,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub dim: usize,
    pub max_stage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub caps: Caps,
    pub tol: Scalar,
    pub out: Option<String>,
    pub version: String,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: T,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Write via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_tol(s: Option<&str>) -> Result<Scalar> {
    let s = s.unwrap_or(DEFAULT_TOL);
    let t: Scalar = s.parse().map_err(|_| Error::Parse(format!("bad tolerance {s:?}")))?;
    if !t.is_positive() {
        return Err(Error::Parse("tolerance must be positive".to_string()));
    }
    Ok(t)
}

#[derive(Deserialize)]
struct NormsInput {
    space: SpaceDescription,
    #[serde(default)]
    vectors: Vec<Vector>,
    #[serde(default)]
    functionals: Vec<Vector>,
}

#[derive(Serialize)]
struct VectorNorm {
    x: Vector,
    norm: Scalar,
    exact: bool,
    functional: Option<Vector>,
}

#[derive(Serialize)]
struct FunctionalNorm {
    functional: Vector,
    dual_norm: Scalar,
}

#[derive(Serialize)]
struct NormsResult {
    space: SpaceDescription,
    dual: SpaceDescription,
    vectors: Vec<VectorNorm>,
    functionals: Vec<FunctionalNorm>,
}

#[derive(Deserialize)]
struct MapInput {
    source: SpaceDescription,
    target: SpaceDescription,
    matrix: Matrix,
}

impl MapInput {
    fn build(self) -> Result<LinearMap> {
        LinearMap::new(
            Arc::new(NormedSpace::try_from(self.source)?),
            Arc::new(NormedSpace::try_from(self.target)?),
            self.matrix,
        )
    }
}

#[derive(Serialize)]
struct QuotientResult {
    operator_norm: OperatorNorm,
    quotient: MapVerdict,
}

#[derive(Serialize)]
struct ValidateResult {
    system: SystemDescription,
    pass: bool,
    stages: Vec<StageVerdict>,
}

#[derive(Deserialize)]
struct GfdaInput {
    query: QueryDescription,
    stages: Option<usize>,
    #[serde(default)]
    renorm: bool,
}

#[derive(Serialize)]
struct GfdaResult {
    original: GfdaReport,
    renormed: Option<GfdaReport>,
}

#[derive(Deserialize)]
struct AnpDpInput {
    system: SystemDescription,
    /// Stage-`M` components of the terms.
    sequence: Vec<Vector>,
    #[serde(default)]
    tail_from: Option<usize>,
    #[serde(default)]
    horizon: Option<usize>,
}

fn override_stages(d: &mut SystemDescription, m: Option<usize>) {
    if let (Some(m), RuleDescription::Builtin { .. } | RuleDescription::Random { .. }) = (m, &d.rule) {
        d.stages = Some(m);
    }
}

struct Output {
    text: String,
    code: i32,
}

fn report<T: Serialize>(manifest: &RunManifest, result: T, code: i32) -> Result<Output> {
    let mut text = serde_json::to_string_pretty(&Report { manifest, result })?;
    text.push('\n');
    Ok(Output { text, code })
}

fn dispatch(cli: &Cli, manifest: &mut RunManifest) -> Result<Output> {
    let tol = manifest.tol.clone();
    match &cli.command {
        Command::Validate { path } => {
            let mut d: SystemDescription = read_json(path)?;
            override_stages(&mut d, cli.max_stage);
            let system = System::from_description(&d)?;
            let stages = system.validate_standard();
            let pass = stages.iter().all(|s| s.pass);
            report(manifest, ValidateResult { system: system.describe(), pass, stages }, i32::from(!pass))
        }
        Command::Dualize { path } => {
            let mut d: SystemDescription = read_json(path)?;
            override_stages(&mut d, cli.max_stage);
            let dual = System::from_description(&d)?.dualize().describe();
            let mut text = serde_json::to_string_pretty(&dual)?;
            text.push('\n');
            Ok(Output { text, code: 0 })
        }
        Command::Norms { path } => {
            let input: NormsInput = read_json(path)?;
            let space = NormedSpace::try_from(input.space)?;
            let vectors = input
                .vectors
                .into_iter()
                .map(|x| {
                    let norm = space.norm(&x)?;
                    let functional = match space.attaining_functional(&x) {
                        Ok((phi, _)) => Some(phi),
                        Err(Error::Unsupported(_)) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(VectorNorm { x, norm, exact: space.norm_is_exact(), functional })
                })
                .collect::<Result<_>>()?;
            let functionals = input
                .functionals
                .into_iter()
                .map(|f| Ok(FunctionalNorm { dual_norm: space.dual_norm(&f)?, functional: f }))
                .collect::<Result<_>>()?;
            let result = NormsResult {
                space: SpaceDescription::from(&space),
                dual: SpaceDescription::from(&*space.dual()),
                vectors,
                functionals,
            };
            report(manifest, result, 0)
        }
        Command::Opnorm { path } => {
            let map = read_json::<MapInput>(path)?.build()?;
            report(manifest, map.operator_norm()?, 0)
        }
        Command::QuotientCheck { path } => {
            let map = read_json::<MapInput>(path)?.build()?;
            let quotient = map.is_quotient_map()?;
            let code = i32::from(!quotient.pass);
            report(manifest, QuotientResult { operator_norm: map.operator_norm()?, quotient }, code)
        }
        Command::Determine { path } => {
            let mut d: QueryDescription = read_json(path)?;
            if let Some(s) = cli.seed {
                d.search.seed = s;
            }
            if cli.max_stage.is_some() {
                d.eval_stage = cli.max_stage;
            }
            let q = d.build()?;
            record_query_caps(manifest, &q);
            let r = determine(&q)?;
            let code = r.verdict.exit_code();
            report(manifest, r, code)
        }
        Command::GfdaCheck { path } => {
            let mut input: GfdaInput = read_json(path)?;
            if let Some(s) = cli.seed {
                input.query.search.seed = s;
            }
            let q = input.query.build()?;
            record_query_caps(manifest, &q);
            let stages = input.stages.unwrap_or(q.eval_stage);
            let original = gfda_check(&q, stages)?;
            let renormed = if input.renorm {
                let rq = renormed_images(&q)?.query(&q)?;
                Some(gfda_check(&rq, stages)?)
            } else {
                None
            };
            let code = i32::from(!original.pass);
            report(manifest, GfdaResult { original, renormed }, code)
        }
        Command::AnpDp { path } => {
            let mut input: AnpDpInput = read_json(path)?;
            override_stages(&mut input.system, cli.max_stage);
            let System::Inverse(system) = System::from_description(&input.system)? else {
                return Err(Error::InvalidQuery("sequences live in an inverse system".to_string()));
            };
            let seq = input
                .sequence
                .into_iter()
                .map(|t| system.compatible_from_tail(t))
                .collect::<Result<Vec<CompatibleVector>>>()?;
            let opts = DiagnosticOptions { tol, tail_from: input.tail_from, horizon: input.horizon };
            let w = equivalence_witness(&seq, &opts)?;
            let code = i32::from(!w.agree);
            report(manifest, w, code)
        }
        Command::Curves { path } => {
            let mut config: CurveConfig = read_json(path)?;
            if let Some(m) = cli.max_stage {
                config.stage = m;
            }
            let reports = config.run()?;
            if let Some(out) = &cli.out {
                let csv: String = reports
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let body = r.to_csv();
                        if i == 0 {
                            body
                        } else {
                            body.lines().skip(1).map(|l| format!("{l}\n")).collect()
                        }
                    })
                    .collect();
                write_atomic(&out.with_extension("csv"), &csv)?;
            }
            report(manifest, reports, 0)
        }
    }
}

fn record_query_caps(manifest: &mut RunManifest, q: &crate::determining::DeterminingQuery) {
    manifest.seed = q.search.seed;
    manifest.caps.max_stage = Some(q.eval_stage);
    manifest.caps.search_starts = Some(q.search.starts);
    manifest.caps.search_budget = Some(q.search.budget);
    manifest.caps.max_cells = Some(q.certify.max_cells);
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let tol = match parse_tol(cli.tol.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let mut manifest = RunManifest {
        command: cli.command.name().to_string(),
        inputs: vec![cli.command.path().display().to_string()],
        seed: cli.seed.unwrap_or(0),
        caps: Caps { dim: cap_dim(), max_stage: cli.max_stage, search_starts: None, search_budget: None, max_cells: None },
        tol,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let out = match dispatch(&cli, &mut manifest) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &out.text) {
                eprintln!("error: {e}");
                return EXIT_ERROR;
            }
        }
        None => print!("{}", out.text),
    }
    out.code
}
