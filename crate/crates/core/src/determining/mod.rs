//! ε-determining schedules: exact evaluation of the pair conditions,
//! counterexample search, grid certification, sequence diagnostics for the
//! norm-convergence and uniformity criteria, and the restricted-projection
//! quotient check.
//!
//! Every norm `‖v‖` below is the norm at the evaluation stage `M`, a lower
//! bound for the norm in the inverse limit; verdicts concern the stage-`M`
//! truncated pair.

mod certify;
mod diagnostics;
mod gfda;
mod search;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use certify::{certify, lipschitz_constants, CertifyOutcome, LipschitzConstants};
pub use diagnostics::{
    anp_diagnostic, dp_diagnostic, equivalence_witness, AnpReport, DiagnosticOptions, DpReport,
    EquivalenceReport, Eq3Terms, SequenceDiagnostics,
};
pub use gfda::{gfda_check, renorm_instance, renormed_images, GfdaReport, GfdaStage, RenormedImages};
pub use search::{search, NearMiss, SearchOutcome};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::scalar::Scalar;
use crate::space::NormedSpace;
use crate::systems::{Builtin, InverseSystem, SubspaceGenerator, System, SystemDescription};

/// Statement attached to every certificate.
pub const CERTIFICATE_STATEMENT: &str = "the stage-M truncated pair is ε-determining";

/// `1 >= ρ_1 >= … >= ρ_N > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Scalar>", into = "Vec<Scalar>")]
pub struct RhoSchedule(Vec<Scalar>);

impl RhoSchedule {
    pub fn new(values: Vec<Scalar>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidQuery("empty ρ schedule".to_string()));
        }
        for (i, r) in values.iter().enumerate() {
            if !r.is_positive() || *r > Scalar::one() {
                return Err(Error::InvalidQuery(format!("ρ_{} = {r} is not in (0, 1]", i + 1)));
            }
            if i > 0 && *r > values[i - 1] {
                return Err(Error::InvalidQuery(format!("ρ_{} > ρ_{}", i + 1, i)));
            }
        }
        Ok(RhoSchedule(values))
    }

    /// `ρ_i = first · ratio^{i-1}`.
    pub fn geometric(len: usize, first: Scalar, ratio: Scalar) -> Result<Self> {
        let mut values = Vec::with_capacity(len);
        let mut r = first;
        for _ in 0..len {
            values.push(r.clone());
            r = &r * &ratio;
        }
        RhoSchedule::new(values)
    }

    /// `ρ_i = 1 / (i + 1)`.
    pub fn harmonic(len: usize) -> Self {
        RhoSchedule::new((1..=len).map(|i| Scalar::ratio(1, i as i64 + 1)).collect()).unwrap()
    }

    /// `N`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ρ_i`, 1-based.
    pub fn get(&self, i: usize) -> &Scalar {
        &self.0[i - 1]
    }

    pub fn values(&self) -> &[Scalar] {
        &self.0
    }

    pub fn scaled(&self, t: &Scalar) -> Result<Self> {
        RhoSchedule::new(self.0.iter().map(|r| r * t).collect())
    }
}

impl TryFrom<Vec<Scalar>> for RhoSchedule {
    type Error = Error;
    fn try_from(v: Vec<Scalar>) -> Result<Self> {
        RhoSchedule::new(v)
    }
}

impl From<RhoSchedule> for Vec<Scalar> {
    fn from(r: RhoSchedule) -> Self {
        r.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub starts: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { starts: 48, budget: 400, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginMode {
    /// Every test uses the sum of all Lipschitz constants.
    Conservative,
    /// Each constraint uses its own constant.
    PerConstraint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Cells with half-width below `delta` are not subdivided further.
    pub delta: Scalar,
    pub margin: MarginMode,
    pub max_cells: usize,
    pub max_param_dim: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            delta: Scalar::ratio(1, 100),
            margin: MarginMode::PerConstraint,
            max_cells: 2_000_000,
            max_param_dim: 4,
        }
    }
}

/// A determining query: a subspace slice, a schedule `ρ_1..ρ_N`, `ε` and
/// the evaluation stage `M >= N`.
#[derive(Clone, Debug)]
pub struct DeterminingQuery {
    pub gen: SubspaceGenerator,
    pub rho: RhoSchedule,
    pub eps: Scalar,
    pub eval_stage: usize,
    pub search: SearchConfig,
    pub certify: CertifyConfig,
}

impl DeterminingQuery {
    pub fn new(gen: SubspaceGenerator, rho: RhoSchedule, eps: Scalar, eval_stage: usize) -> Result<Self> {
        let q = DeterminingQuery {
            gen,
            rho,
            eps,
            eval_stage,
            search: SearchConfig::default(),
            certify: CertifyConfig::default(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.eval_stage;
        if m > self.gen.max_stage() || m == 0 {
            return Err(Error::InvalidQuery(format!(
                "evaluation stage {m} outside 1..={}",
                self.gen.max_stage()
            )));
        }
        if self.rho.len() > m {
            return Err(Error::InvalidQuery(format!("N = {} exceeds M = {m}", self.rho.len())));
        }
        if !self.eps.is_positive() || self.eps > Scalar::from_int(2) {
            return Err(Error::InvalidQuery(format!("ε = {} is not in (0, 2]", self.eps)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn system(&self) -> &InverseSystem {
        self.gen.system()
    }

    pub fn param_dim(&self) -> usize {
        self.gen.param_dim()
    }

    /// `‖v‖_lim − ‖v‖_M`: zero for the coordinate-drop builtins (generated
    /// vectors extend by zero), unknown otherwise.
    pub fn limit_gap(&self) -> Option<Scalar> {
        match self.system().builtin_kind() {
            Some(Builtin::L1Drop | Builtin::LinfDrop | Builtin::L2Drop) => Some(Scalar::zero()),
            _ => None,
        }
    }

    fn stage_data(&self) -> Result<StageData> {
        let n = self.n();
        let m = self.eval_stage;
        let mut spaces = Vec::with_capacity(n + 1);
        let mut maps = Vec::with_capacity(n + 1);
        for i in (1..=n).chain(std::iter::once(m)) {
            spaces.push(self.system().stage(i)?);
            maps.push(self.gen.map(i)?.clone());
        }
        Ok(StageData { spaces, maps })
    }

    /// Exact evaluation of all conditions at `(a, a')`.
    pub fn evaluate(&self, a: &[Scalar], a_prime: &[Scalar]) -> Result<PairEvaluation> {
        self.stage_data()?.evaluate(self, a, a_prime)
    }
}

/// Stages `1..=N` followed by stage `M`.
pub(crate) struct StageData {
    pub spaces: Vec<Arc<NormedSpace>>,
    pub maps: Vec<Matrix>,
}

impl StageData {
    pub fn evaluate(&self, q: &DeterminingQuery, a: &[Scalar], a_prime: &[Scalar]) -> Result<PairEvaluation> {
        let d = q.param_dim();
        if a.len() != d || a_prime.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.len().min(a_prime.len()) });
        }
        let n = q.n();
        let top = n;
        let norms = |x: &[Scalar]| -> Result<Vec<Scalar>> {
            self.spaces
                .iter()
                .zip(&self.maps)
                .map(|(s, g)| s.norm(&g.mul_vec(x)))
                .collect()
        };
        let nv = norms(a)?;
        let nw = norms(a_prime)?;
        let v = self.maps[top].mul_vec(a);
        let w = self.maps[top].mul_vec(a_prime);
        let slack = |ns: &[Scalar]| -> Vec<Scalar> {
            (0..n).map(|i| q.rho.get(i + 1) * &ns[top] - (&ns[top] - &ns[i])).collect()
        };
        let max = nv[top].clone().max(nw[top].clone());
        let diff = linalg::sub(a, a_prime);
        let close = self.spaces[n - 1].norm(&self.maps[n - 1].mul_vec(&diff))?;
        let close_slack = &max / &Scalar::from_int(n as i64) - close;
        let separation = self.spaces[top].norm(&linalg::sub(&v, &w))?;
        let violation = if max.is_zero() { Scalar::zero() } else { &separation / &max };
        Ok(PairEvaluation {
            rho_slacks: slack(&nv),
            rho_slacks_prime: slack(&nw),
            norm: nv[top].clone(),
            norm_prime: nw[top].clone(),
            close_slack,
            separation,
            violation,
            max_norm: max,
            v,
            v_prime: w,
        })
    }
}

/// Exact values of the pair conditions with the stage-`M` norm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEvaluation {
    /// `ρ_i‖v‖ − (‖v‖ − ‖π_i v‖)`, positive when the condition holds.
    pub rho_slacks: Vec<Scalar>,
    pub rho_slacks_prime: Vec<Scalar>,
    pub norm: Scalar,
    pub norm_prime: Scalar,
    /// `max(‖v‖, ‖v'‖)/N − ‖π_N(v − v')‖`.
    pub close_slack: Scalar,
    /// `‖v − v'‖`.
    pub separation: Scalar,
    /// `‖v − v'‖ / max(‖v‖, ‖v'‖)`.
    pub violation: Scalar,
    pub max_norm: Scalar,
    pub v: Vector,
    pub v_prime: Vector,
}

impl PairEvaluation {
    /// All hypotheses hold strictly.
    pub fn hypotheses_hold(&self) -> bool {
        self.rho_slacks.iter().chain(&self.rho_slacks_prime).all(Scalar::is_positive)
            && self.close_slack.is_positive()
    }

    /// The conclusion `‖v − v'‖ < ε max(‖v‖, ‖v'‖)` fails.
    pub fn conclusion_fails(&self, eps: &Scalar) -> bool {
        self.separation >= eps * &self.max_norm
    }

    pub fn is_counterexample(&self, eps: &Scalar) -> bool {
        self.hypotheses_hold() && self.conclusion_fails(eps)
    }
}

/// A pair satisfying the hypotheses strictly while `‖v − v'‖ >= ε max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: Vector,
    pub a_prime: Vector,
    pub eval_stage: usize,
    pub evaluation: PairEvaluation,
}

impl Counterexample {
    pub fn violation(&self) -> &Scalar {
        &self.evaluation.violation
    }

    /// Re-evaluate from the parameters.
    pub fn verify(&self, q: &DeterminingQuery) -> Result<bool> {
        let e = q.evaluate(&self.a, &self.a_prime)?;
        Ok(e == self.evaluation && e.is_counterexample(&q.eps))
    }
}

/// Search first; certify only when the search finds nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetermineReport {
    pub search: SearchOutcome,
    pub certify: Option<CertifyOutcome>,
    pub verdict: Verdict,
    pub eval_stage: usize,
    pub n: usize,
    pub eps: Scalar,
    /// `‖v‖_lim − ‖v‖_M` when known.
    pub limit_gap: Option<Scalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certificate,
    Counterexample,
    Undecided,
}

impl Verdict {
    /// 0 certificate, 1 counterexample, 2 undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certificate => 0,
            Verdict::Counterexample => 1,
            Verdict::Undecided => 2,
        }
    }
}

pub fn determine(q: &DeterminingQuery) -> Result<DetermineReport> {
    q.validate()?;
    let found = search(q)?;
    let (certified, verdict) = match &found {
        SearchOutcome::Counterexample(_) => (None, Verdict::Counterexample),
        SearchOutcome::NotFound(_) => {
            let c = certify(q)?;
            let v = c.verdict();
            (Some(c), v)
        }
    };
    Ok(DetermineReport {
        search: found,
        certify: certified,
        verdict,
        eval_stage: q.eval_stage,
        n: q.n(),
        eps: q.eps.clone(),
        limit_gap: q.limit_gap(),
    })
}

/// JSON form of a query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryDescription {
    pub system: SystemDescription,
    pub generator: GeneratorDescription,
    pub rho: RhoSchedule,
    pub eps: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_stage: Option<usize>,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
}

/// Either the full family `g_1..g_M` or the top map `g_M` alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorDescription {
    Maps { maps: Vec<Matrix> },
    Top { top: Matrix },
}

impl QueryDescription {
    pub fn build(&self) -> Result<DeterminingQuery> {
        let system = match System::from_description(&self.system)? {
            System::Inverse(s) => s,
            System::Direct(_) => {
                return Err(Error::InvalidQuery("queries need an inverse system".to_string()))
            }
        };
        let gen = match &self.generator {
            GeneratorDescription::Maps { maps } => SubspaceGenerator::new(system.clone(), maps.clone())?,
            GeneratorDescription::Top { top } => SubspaceGenerator::from_top(system.clone(), top.clone())?,
        };
        let m = self.eval_stage.unwrap_or(system.max_stage());
        let mut q = DeterminingQuery::new(gen, self.rho.clone(), self.eps.clone(), m)?;
        q.search = self.search.clone();
        q.certify = self.certify.clone();
        Ok(q)
    }
}

/// The canonical `c0` query in the `ℓ∞` drop system: `M = 2N`,
/// `g_M(a) = a_1 (1,…,1,0,…,0) + a_2 (1,…,1)` with `N` leading ones in the
/// first column.
pub fn c0_query(n: usize, eps: Scalar) -> Result<DeterminingQuery> {
    let m = 2 * n;
    let sys = InverseSystem::linf_drop(m);
    let top = Matrix::from_rows(
        (0..m)
            .map(|r| vec![if r < n { Scalar::one() } else { Scalar::zero() }, Scalar::one()])
            .collect(),
    )?;
    let gen = SubspaceGenerator::from_top(sys, top)?;
    DeterminingQuery::new(gen, RhoSchedule::harmonic(n), eps, m)
}

#[cfg(test)]
mod tests;
