//! Standard inverse and direct systems of finite-dimensional spaces.
//!
//! Stages are numbered from 1. An inverse system has bonds
//! `θ_i : W_{i+1} → W_i`; a direct system has bonds `ι_i : E_i → E_{i+1}`.
//! Stages and bonds are produced lazily by a rule and memoized, so a rule
//! can be extended past its declared truncation with [`InverseSystem::with_max_stage`].

mod compatible;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compatible::{
    extract_convergent_subsequence, invlim_convergence, CompatibleVector, ConvergenceOptions, ConvergenceReport,
    CoordinateSequence, PairingVerdict, StageConvergence, StageNorms, SubspaceGenerator,
};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::linmap::{LinearMap, MapVerdict};
use crate::random;
use crate::scalar::Scalar;
use crate::space::{NormedSpace, PNorm, SpaceDescription};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    L1Drop,
    LinfDrop,
    L2Drop,
    L1Pad,
    LinfPad,
    L2Pad,
}

impl Builtin {
    pub fn p(self) -> PNorm {
        match self {
            Builtin::L1Drop | Builtin::L1Pad => PNorm::One,
            Builtin::LinfDrop | Builtin::LinfPad => PNorm::Inf,
            Builtin::L2Drop | Builtin::L2Pad => PNorm::Two,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Builtin::L1Drop | Builtin::LinfDrop | Builtin::L2Drop => Direction::Inverse,
            _ => Direction::Direct,
        }
    }

    fn dual(self) -> Builtin {
        match self {
            Builtin::L1Drop => Builtin::LinfPad,
            Builtin::LinfDrop => Builtin::L1Pad,
            Builtin::L2Drop => Builtin::L2Pad,
            Builtin::L1Pad => Builtin::LinfDrop,
            Builtin::LinfPad => Builtin::L1Drop,
            Builtin::L2Pad => Builtin::L2Drop,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Inverse,
    Direct,
}

/// Parameters of the seeded random quotient-system generator. `dual`
/// selects the direct system of duals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomRule {
    pub seed: u64,
    pub base_dim: usize,
    #[serde(default)]
    pub dual: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Rule {
    Builtin(Builtin),
    Random(RandomRule),
    Explicit {
        spaces: Vec<Arc<NormedSpace>>,
        bonds: Vec<Matrix>,
    },
}

/// Shared lazily-generated tower of spaces and bond matrices. For inverse
/// towers bond `i` maps stage `i + 1` to stage `i`; for direct towers it
/// maps stage `i` to stage `i + 1`.
struct Tower {
    rule: Rule,
    direction: Direction,
    max_stage: usize,
    quotient: bool,
    spaces: Mutex<BTreeMap<usize, Arc<NormedSpace>>>,
    bonds: Mutex<BTreeMap<usize, Arc<LinearMap>>>,
    random_stages: Mutex<Vec<(Arc<NormedSpace>, Option<Matrix>)>>,
    quotient_ok: Mutex<BTreeMap<usize, bool>>,
}

impl Tower {
    fn new(rule: Rule, direction: Direction, max_stage: usize, quotient: bool) -> Tower {
        Tower {
            rule,
            direction,
            max_stage,
            quotient,
            spaces: Mutex::new(BTreeMap::new()),
            bonds: Mutex::new(BTreeMap::new()),
            random_stages: Mutex::new(Vec::new()),
            quotient_ok: Mutex::new(BTreeMap::new()),
        }
    }

    fn direction(&self) -> Direction {
        self.direction
    }

    fn check_stage(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.max_stage {
            return Err(Error::StageOutOfRange { stage: i, max: self.max_stage });
        }
        Ok(())
    }

    fn stage(&self, i: usize) -> Result<Arc<NormedSpace>> {
        self.check_stage(i)?;
        if let Some(s) = self.spaces.lock().unwrap().get(&i) {
            return Ok(s.clone());
        }
        let space = match &self.rule {
            Rule::Builtin(b) => {
                let ones = vec![Scalar::one(); i];
                Arc::new(NormedSpace::lp(b.p(), ones)?.with_label(format!("l{}^{i}", b.p())))
            }
            Rule::Explicit { spaces, .. } => spaces[i - 1].clone(),
            Rule::Random(r) => {
                let (w, _) = self.random_stage(r, i);
                if r.dual {
                    w.dual()
                } else {
                    w
                }
            }
        };
        Ok(self.spaces.lock().unwrap().entry(i).or_insert(space).clone())
    }

    /// Stage `i` of the random quotient system with the bond
    /// `θ_{i-1} : W_i → W_{i-1}` (absent at stage 1).
    fn random_stage(&self, r: &RandomRule, i: usize) -> (Arc<NormedSpace>, Option<Matrix>) {
        let mut cache = self.random_stages.lock().unwrap();
        while cache.len() < i {
            let k = cache.len() + 1;
            let mut rng = random::rng(r.seed, k as u64);
            let entry = if k == 1 {
                let w = random::vpoly_space(&mut rng, r.base_dim);
                (Arc::new(w.with_label("W1")), None)
            } else {
                let prev = cache[k - 2].0.clone();
                let (w, theta) = random::quotient_onto(&mut rng, &prev);
                let w = Arc::new((*w).clone().with_label(format!("W{k}")));
                (w, Some(theta))
            };
            cache.push(entry);
        }
        cache[i - 1].clone()
    }

    fn bond_matrix(&self, i: usize) -> Result<Matrix> {
        Ok(match &self.rule {
            Rule::Builtin(b) => {
                let drop = Matrix::from_columns(
                    &(0..=i).map(|j| if j < i { crate::linalg::unit(i, j) } else { crate::linalg::zeros(i) }).collect::<Vec<_>>(),
                    i,
                );
                match b.direction() {
                    Direction::Inverse => drop,
                    Direction::Direct => drop.transpose(),
                }
            }
            Rule::Explicit { bonds, .. } => bonds[i - 1].clone(),
            Rule::Random(r) => {
                let theta = self.random_stage(r, i + 1).1.expect("bond above stage 1");
                if r.dual {
                    theta.transpose()
                } else {
                    theta
                }
            }
        })
    }

    fn bond(&self, i: usize) -> Result<Arc<LinearMap>> {
        if i == 0 || i >= self.max_stage {
            return Err(Error::StageOutOfRange { stage: i, max: self.max_stage.saturating_sub(1) });
        }
        if let Some(b) = self.bonds.lock().unwrap().get(&i) {
            return Ok(b.clone());
        }
        let (lo, hi) = (self.stage(i)?, self.stage(i + 1)?);
        let m = self.bond_matrix(i)?;
        let map = match self.direction() {
            Direction::Inverse => LinearMap::new(hi, lo, m)?,
            Direction::Direct => LinearMap::new(lo, hi, m)?,
        };
        let map = Arc::new(map);
        Ok(self.bonds.lock().unwrap().entry(i).or_insert(map).clone())
    }

    fn validate(&self) -> Vec<StageVerdict> {
        (1..self.max_stage)
            .into_par_iter()
            .map(|i| {
                let bond = match self.bond(i) {
                    Ok(b) => b,
                    Err(e) => return StageVerdict::error(i, e),
                };
                let lipschitz = match bond.operator_norm() {
                    Ok(n) => {
                        let pass = n.lower <= Scalar::one();
                        MapVerdict {
                            pass,
                            witness: if pass { None } else { n.witness.clone() },
                            kind: n.kind,
                            reason: format!("operator norm {}", n.upper),
                        }
                    }
                    Err(e) => return StageVerdict::error(i, e),
                };
                let structural = if !self.quotient {
                    None
                } else {
                    let v = match self.direction() {
                        Direction::Inverse => bond.is_quotient_map(),
                        Direction::Direct => bond.is_isometric_embedding(),
                    };
                    match v {
                        Ok(v) => {
                            if self.direction() == Direction::Inverse {
                                self.quotient_ok.lock().unwrap().insert(i, v.pass);
                            }
                            Some(v)
                        }
                        Err(e) => return StageVerdict::error(i, e),
                    }
                };
                let pass = lipschitz.pass && structural.as_ref().map_or(true, |v| v.pass);
                StageVerdict {
                    stage: i,
                    pass,
                    lipschitz: Some(lipschitz),
                    structural,
                    error: None,
                }
            })
            .collect()
    }

    fn bond_is_quotient(&self, i: usize) -> Result<bool> {
        if let Some(&ok) = self.quotient_ok.lock().unwrap().get(&i) {
            return Ok(ok);
        }
        // coordinate drops: zero extension is a norm-preserving lift
        if matches!(self.rule, Rule::Builtin(b) if b.direction() == Direction::Inverse) {
            self.bond(i)?;
            return Ok(true);
        }
        let ok = self.bond(i)?.is_quotient_map()?.pass;
        self.quotient_ok.lock().unwrap().insert(i, ok);
        Ok(ok)
    }

    fn describe(&self) -> SystemDescription {
        let direction = Some(self.direction());
        match &self.rule {
            Rule::Builtin(b) => SystemDescription {
                kind: direction,
                rule: RuleDescription::Builtin { builtin: *b },
                stages: Some(self.max_stage),
                quotient: None,
            },
            Rule::Random(r) => SystemDescription {
                kind: direction,
                rule: RuleDescription::Random { random: *r },
                stages: Some(self.max_stage),
                quotient: None,
            },
            Rule::Explicit { spaces, bonds } => SystemDescription {
                kind: direction,
                rule: RuleDescription::Explicit {
                    spaces: spaces.iter().map(|s| SpaceDescription::from(&**s)).collect(),
                    bonds: bonds.clone(),
                },
                stages: Some(self.max_stage),
                quotient: Some(self.quotient),
            },
        }
    }
}

/// Per-bond outcome of [`InverseSystem::validate_standard`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: usize,
    pub pass: bool,
    /// `‖bond‖ <= 1`.
    pub lipschitz: Option<MapVerdict>,
    /// Quotient (inverse) or isometric-embedding (direct) verdict, for
    /// systems flagged as such.
    pub structural: Option<MapVerdict>,
    pub error: Option<String>,
}

impl StageVerdict {
    fn error(stage: usize, e: Error) -> Self {
        StageVerdict {
            stage,
            pass: false,
            lipschitz: None,
            structural: None,
            error: Some(e.to_string()),
        }
    }
}

/// A standard inverse system `θ_i : W_{i+1} → W_i`.
#[derive(Clone)]
pub struct InverseSystem(Arc<Tower>);

/// A standard direct system `ι_i : E_i → E_{i+1}`.
#[derive(Clone)]
pub struct DirectSystem(Arc<Tower>);

impl std::fmt::Debug for InverseSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InverseSystem({:?}, M = {})", self.0.rule_name(), self.0.max_stage)
    }
}

impl std::fmt::Debug for DirectSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DirectSystem({:?}, M = {})", self.0.rule_name(), self.0.max_stage)
    }
}

impl Tower {
    fn rule_name(&self) -> String {
        match &self.rule {
            Rule::Builtin(b) => format!("{b:?}"),
            Rule::Random(r) => format!("random(seed = {}, base_dim = {})", r.seed, r.base_dim),
            Rule::Explicit { .. } => "explicit".to_string(),
        }
    }
}

impl PartialEq for InverseSystem {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.rule == other.0.rule && self.0.max_stage == other.0.max_stage)
    }
}

fn check_explicit(spaces: &[Arc<NormedSpace>], bonds: &[Matrix], direction: Direction) -> Result<()> {
    if spaces.is_empty() {
        return Err(Error::Incompatible("a system needs at least one stage".to_string()));
    }
    if bonds.len() + 1 != spaces.len() {
        return Err(Error::Incompatible(format!(
            "{} stages need {} bonds, got {}",
            spaces.len(),
            spaces.len() - 1,
            bonds.len()
        )));
    }
    for (k, b) in bonds.iter().enumerate() {
        let (lo, hi) = (spaces[k].dim(), spaces[k + 1].dim());
        let (rows, cols) = match direction {
            Direction::Inverse => (lo, hi),
            Direction::Direct => (hi, lo),
        };
        if b.rows() != rows || b.cols() != cols {
            return Err(Error::Incompatible(format!(
                "bond {} has shape {}x{}, expected {rows}x{cols}",
                k + 1,
                b.rows(),
                b.cols()
            )));
        }
    }
    Ok(())
}

impl InverseSystem {
    pub fn builtin(b: Builtin, max_stage: usize) -> Result<Self> {
        if b.direction() != Direction::Inverse {
            return Err(Error::Incompatible(format!("{b:?} is a direct system")));
        }
        Ok(InverseSystem(Arc::new(Tower::new(Rule::Builtin(b), b.direction(), max_stage.max(1), b.p() != PNorm::Two))))
    }

    pub fn l1_drop(max_stage: usize) -> Self {
        Self::builtin(Builtin::L1Drop, max_stage).unwrap()
    }

    pub fn linf_drop(max_stage: usize) -> Self {
        Self::builtin(Builtin::LinfDrop, max_stage).unwrap()
    }

    pub fn l2_drop(max_stage: usize) -> Self {
        Self::builtin(Builtin::L2Drop, max_stage).unwrap()
    }

    /// Seeded random quotient system starting from a random V-polytope norm
    /// of dimension `base_dim`; stage `i` has dimension `base_dim + i - 1`.
    pub fn random_quotient(seed: u64, base_dim: usize, max_stage: usize) -> Self {
        let rule = RandomRule { seed, base_dim: base_dim.max(1), dual: false };
        InverseSystem(Arc::new(Tower::new(Rule::Random(rule), Direction::Inverse, max_stage.max(1), true)))
    }

    /// Explicit stages `W_1..W_M` and bond matrices `θ_1..θ_{M-1}`
    /// (`θ_i` of shape `dim W_i × dim W_{i+1}`).
    pub fn explicit(spaces: Vec<Arc<NormedSpace>>, bonds: Vec<Matrix>, quotient: bool) -> Result<Self> {
        check_explicit(&spaces, &bonds, Direction::Inverse)?;
        let m = spaces.len();
        Ok(InverseSystem(Arc::new(Tower::new(Rule::Explicit { spaces, bonds }, Direction::Inverse, m, quotient))))
    }

    pub fn max_stage(&self) -> usize {
        self.0.max_stage
    }

    pub fn is_quotient_system(&self) -> bool {
        self.0.quotient
    }

    /// The same rule truncated at a different stage (generated rules only).
    pub fn with_max_stage(&self, max_stage: usize) -> Result<Self> {
        if let Rule::Explicit { .. } = self.0.rule {
            if max_stage > self.0.max_stage {
                return Err(Error::StageOutOfRange { stage: max_stage, max: self.0.max_stage });
            }
            let Rule::Explicit { spaces, bonds } = &self.0.rule else { unreachable!() };
            return Self::explicit(spaces[..max_stage].to_vec(), bonds[..max_stage - 1].to_vec(), self.0.quotient);
        }
        Ok(InverseSystem(Arc::new(Tower::new(self.0.rule.clone(), Direction::Inverse, max_stage.max(1), self.0.quotient))))
    }

    pub fn stage(&self, i: usize) -> Result<Arc<NormedSpace>> {
        self.0.stage(i)
    }

    pub fn stage_dim(&self, i: usize) -> Result<usize> {
        Ok(self.stage(i)?.dim())
    }

    /// `θ_i : W_{i+1} → W_i` for `1 <= i < M`.
    pub fn bond(&self, i: usize) -> Result<Arc<LinearMap>> {
        self.0.bond(i)
    }

    /// `θ_j ∘ … ∘ θ_{i-1} : W_i → W_j` as a matrix, `j <= i`.
    pub fn projection_matrix(&self, i: usize, j: usize) -> Result<Matrix> {
        if j > i {
            return Err(Error::Incompatible(format!("cannot project stage {i} up to {j}")));
        }
        let mut m = Matrix::identity(self.stage_dim(i)?);
        for k in (j..i).rev() {
            m = self.bond(k)?.matrix().mul(&m);
        }
        Ok(m)
    }

    /// Per-bond exact verdicts: `‖θ_i‖ <= 1`, and the quotient property for
    /// quotient systems.
    pub fn validate_standard(&self) -> Vec<StageVerdict> {
        self.0.validate()
    }

    /// Whether `θ_i` is a quotient map (memoized).
    pub fn bond_is_quotient(&self, i: usize) -> Result<bool> {
        self.0.bond_is_quotient(i)
    }

    /// The dual direct system `(W_i^*, θ_i^*)`.
    pub fn dualize(&self) -> DirectSystem {
        let t = &self.0;
        let rule = match &t.rule {
            Rule::Builtin(b) => Rule::Builtin(b.dual()),
            Rule::Random(r) => Rule::Random(RandomRule { dual: true, ..*r }),
            Rule::Explicit { spaces, bonds } => Rule::Explicit {
                spaces: spaces.iter().map(|s| s.dual()).collect(),
                bonds: bonds.iter().map(Matrix::transpose).collect(),
            },
        };
        DirectSystem(Arc::new(Tower::new(rule, Direction::Direct, t.max_stage, t.quotient)))
    }

    /// `(w_1, …, w_M)` with `w_i = θ_i ∘ … ∘ θ_{M-1}(w_M)`.
    pub fn compatible_from_tail(&self, tail: Vector) -> Result<CompatibleVector> {
        CompatibleVector::from_tail(self.clone(), tail)
    }

    /// Min-norm lift of `w ∈ W_i` to `W_{i+1}` through a quotient bond.
    pub fn lift_min_norm(&self, i: usize, w: &[Scalar]) -> Result<Vector> {
        if !self.bond_is_quotient(i)? {
            return Err(Error::NotQuotientBond { stage: i });
        }
        Ok(self.bond(i)?.min_norm_preimage(w)?.0)
    }

    /// Lift `w ∈ W_i` to a compatible vector of norm `‖w‖` at every stage by
    /// repeated min-norm lifting.
    pub fn lift_to_top(&self, i: usize, w: Vector) -> Result<CompatibleVector> {
        let mut top = w;
        for k in i..self.max_stage() {
            top = self.lift_min_norm(k, &top)?;
        }
        self.compatible_from_tail(top)
    }

    pub fn describe(&self) -> SystemDescription {
        self.0.describe()
    }

    /// Coordinate-drop builtins have closed-form limits for coordinate
    /// sequences.
    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.0.rule {
            Rule::Builtin(b) => Some(b),
            _ => None,
        }
    }
}

impl DirectSystem {
    pub fn builtin(b: Builtin, max_stage: usize) -> Result<Self> {
        if b.direction() != Direction::Direct {
            return Err(Error::Incompatible(format!("{b:?} is an inverse system")));
        }
        Ok(DirectSystem(Arc::new(Tower::new(Rule::Builtin(b), b.direction(), max_stage.max(1), b.p() != PNorm::Two))))
    }

    pub fn linf_pad(max_stage: usize) -> Self {
        Self::builtin(Builtin::LinfPad, max_stage).unwrap()
    }

    pub fn l1_pad(max_stage: usize) -> Self {
        Self::builtin(Builtin::L1Pad, max_stage).unwrap()
    }

    pub fn l2_pad(max_stage: usize) -> Self {
        Self::builtin(Builtin::L2Pad, max_stage).unwrap()
    }

    /// Explicit stages `E_1..E_M` and bond matrices `ι_1..ι_{M-1}`
    /// (`ι_i` of shape `dim E_{i+1} × dim E_i`). `isometric` flags the
    /// system as isometrically injective.
    pub fn explicit(spaces: Vec<Arc<NormedSpace>>, bonds: Vec<Matrix>, isometric: bool) -> Result<Self> {
        check_explicit(&spaces, &bonds, Direction::Direct)?;
        let m = spaces.len();
        Ok(DirectSystem(Arc::new(Tower::new(Rule::Explicit { spaces, bonds }, Direction::Direct, m, isometric))))
    }

    pub fn max_stage(&self) -> usize {
        self.0.max_stage
    }

    pub fn is_isometric_system(&self) -> bool {
        self.0.quotient
    }

    pub fn stage(&self, i: usize) -> Result<Arc<NormedSpace>> {
        self.0.stage(i)
    }

    /// `ι_i : E_i → E_{i+1}` for `1 <= i < M`.
    pub fn bond(&self, i: usize) -> Result<Arc<LinearMap>> {
        self.0.bond(i)
    }

    /// Per-bond exact verdicts: `‖ι_i‖ <= 1`, and isometric injectivity for
    /// systems flagged as such.
    pub fn validate_standard(&self) -> Vec<StageVerdict> {
        self.0.validate()
    }

    /// The dual inverse system `(E_i^*, ι_i^*)`.
    pub fn dualize(&self) -> InverseSystem {
        let t = &self.0;
        let rule = match &t.rule {
            Rule::Builtin(b) => Rule::Builtin(b.dual()),
            Rule::Random(r) => Rule::Random(RandomRule { dual: false, ..*r }),
            Rule::Explicit { spaces, bonds } => Rule::Explicit {
                spaces: spaces.iter().map(|s| s.dual()).collect(),
                bonds: bonds.iter().map(Matrix::transpose).collect(),
            },
        };
        InverseSystem(Arc::new(Tower::new(rule, Direction::Inverse, t.max_stage, t.quotient)))
    }

    /// `‖ι_{j-1} ∘ … ∘ ι_i(e)‖` for `j = i..=M`; nonincreasing, and the last
    /// value is an upper bound for the direct-limit pseudo-norm of `e`.
    pub fn direct_limit_norm(&self, i: usize, e: &[Scalar]) -> Result<DirectLimitNorm> {
        let mut x = e.to_vec();
        let mut norms = vec![self.stage(i)?.norm(&x)?];
        for k in i..self.max_stage() {
            x = self.bond(k)?.apply(&x)?;
            norms.push(self.stage(k + 1)?.norm(&x)?);
        }
        let value = norms.last().cloned().unwrap();
        Ok(DirectLimitNorm {
            from_stage: i,
            norms,
            value,
            bound: Bound::Upper,
        })
    }

    pub fn describe(&self) -> SystemDescription {
        self.0.describe()
    }
}

/// Which side of the true limit a truncated value lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lower,
    Upper,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectLimitNorm {
    pub from_stage: usize,
    pub norms: Vec<Scalar>,
    pub value: Scalar,
    pub bound: Bound,
}

/// JSON description of a system.
///
/// ```json
/// {"builtin": "l1_drop", "stages": 20}
/// {"random": {"seed": 7, "base_dim": 2}, "stages": 8}
/// {"kind": "inverse", "spaces": [...], "bonds": [...], "quotient": true}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Direction>,
    #[serde(flatten)]
    pub rule: RuleDescription,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleDescription {
    Builtin { builtin: Builtin },
    Random { random: RandomRule },
    Explicit { spaces: Vec<SpaceDescription>, bonds: Vec<Matrix> },
}

/// A system of either direction.
#[derive(Clone, Debug)]
pub enum System {
    Inverse(InverseSystem),
    Direct(DirectSystem),
}

impl System {
    pub fn from_description(d: &SystemDescription) -> Result<System> {
        let stages = d.stages;
        let need_stages = || stages.ok_or_else(|| Error::Parse("missing \"stages\"".to_string()));
        match &d.rule {
            RuleDescription::Builtin { builtin } => {
                if let Some(k) = d.kind {
                    if k != builtin.direction() {
                        return Err(Error::Parse(format!("{builtin:?} is not a {k:?} system")));
                    }
                }
                let m = need_stages()?;
                Ok(match builtin.direction() {
                    Direction::Inverse => System::Inverse(InverseSystem::builtin(*builtin, m)?),
                    Direction::Direct => System::Direct(DirectSystem::builtin(*builtin, m)?),
                })
            }
            RuleDescription::Random { random } => {
                let m = need_stages()?;
                let inv = InverseSystem::random_quotient(random.seed, random.base_dim, m);
                let wants_direct = random.dual || d.kind == Some(Direction::Direct);
                Ok(if wants_direct {
                    System::Direct(inv.dualize())
                } else {
                    System::Inverse(inv)
                })
            }
            RuleDescription::Explicit { spaces, bonds } => {
                if let Some(m) = stages {
                    if m != spaces.len() {
                        return Err(Error::Parse(format!(
                            "\"stages\" is {m} but {} spaces are listed",
                            spaces.len()
                        )));
                    }
                }
                let spaces = spaces
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        NormedSpace::try_from(s.clone())
                            .map(Arc::new)
                            .map_err(|e| Error::Parse(format!("stage {}: {e}", k + 1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let flag = d.quotient.unwrap_or(false);
                Ok(match d.kind.unwrap_or(Direction::Inverse) {
                    Direction::Inverse => System::Inverse(InverseSystem::explicit(spaces, bonds.clone(), flag)?),
                    Direction::Direct => System::Direct(DirectSystem::explicit(spaces, bonds.clone(), flag)?),
                })
            }
        }
    }

    pub fn describe(&self) -> SystemDescription {
        match self {
            System::Inverse(s) => s.describe(),
            System::Direct(s) => s.describe(),
        }
    }

    pub fn dualize(&self) -> System {
        match self {
            System::Inverse(s) => System::Direct(s.dualize()),
            System::Direct(s) => System::Inverse(s.dualize()),
        }
    }

    pub fn validate_standard(&self) -> Vec<StageVerdict> {
        match self {
            System::Inverse(s) => s.validate_standard(),
            System::Direct(s) => s.validate_standard(),
        }
    }

    pub fn max_stage(&self) -> usize {
        match self {
            System::Inverse(s) => s.max_stage(),
            System::Direct(s) => s.max_stage(),
        }
    }

    pub fn stage(&self, i: usize) -> Result<Arc<NormedSpace>> {
        match self {
            System::Inverse(s) => s.stage(i),
            System::Direct(s) => s.stage(i),
        }
    }
}

#[cfg(test)]
mod tests;
