use serde::{Deserialize, Serialize};

use super::{Bound, Builtin, InverseSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::scalar::Scalar;
use crate::space::PNorm;

/// A bond-compatible tuple `(w_1, …, w_M)`, the truncation of an element
/// of the inverse limit.
#[derive(Clone, Debug)]
pub struct CompatibleVector {
    system: InverseSystem,
    stages: Vec<Vector>,
    limit: Option<Scalar>,
}

impl PartialEq for CompatibleVector {
    fn eq(&self, other: &Self) -> bool {
        self.stages == other.stages
    }
}

/// A coordinate sequence `(x_1, x_2, …)` with a known limit norm in the
/// coordinate-drop systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordinateSequence {
    /// Finitely supported.
    Finite { coords: Vec<Scalar> },
    /// `x_k = first · ratio^{k-1}` with `|ratio| < 1`.
    Geometric { first: Scalar, ratio: Scalar },
}

impl CoordinateSequence {
    pub fn prefix(&self, n: usize) -> Vector {
        match self {
            CoordinateSequence::Finite { coords } => (0..n)
                .map(|k| coords.get(k).cloned().unwrap_or_else(Scalar::zero))
                .collect(),
            CoordinateSequence::Geometric { first, ratio } => {
                let mut x = first.clone();
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(x.clone());
                    x = &x * ratio;
                }
                out
            }
        }
    }

    /// The norm of the whole sequence in `ℓ1` or `ℓ∞`; `None` for `ℓ2`
    /// (irrational in general) and divergent geometric tails.
    pub fn limit_norm(&self, p: PNorm) -> Option<Scalar> {
        match (self, p) {
            (_, PNorm::Two) => None,
            (CoordinateSequence::Finite { coords }, PNorm::One) => Some(coords.iter().map(Scalar::abs).sum()),
            (CoordinateSequence::Finite { coords }, PNorm::Inf) => {
                Some(coords.iter().map(Scalar::abs).fold(Scalar::zero(), Scalar::max))
            }
            (CoordinateSequence::Geometric { first, ratio }, p) => {
                let r = ratio.abs();
                if r >= Scalar::one() {
                    return None;
                }
                Some(match p {
                    PNorm::One => first.abs() / (Scalar::one() - r),
                    _ => first.abs(),
                })
            }
        }
    }
}

/// Stage norms of a compatible vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageNorms {
    /// `‖w_1‖ <= … <= ‖w_M‖`.
    pub norms: Vec<Scalar>,
    /// `‖w_M‖`, a lower bound for the limit norm.
    pub limit_estimate: Scalar,
    pub bound: Bound,
    /// Closed-form limit norm when the vector came from a coordinate
    /// sequence in a coordinate-drop system.
    pub limit: Option<Scalar>,
    pub is_exact: bool,
    /// `limit - limit_estimate`, when the limit is known.
    pub gap: Option<Scalar>,
}

/// Outcome of [`CompatibleVector::pairing_isometry_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingVerdict {
    pub pass: bool,
    pub stage: usize,
    pub functional: Vector,
    pub value: Scalar,
    pub norm: Scalar,
    pub functional_norm: Scalar,
    pub extreme: bool,
}

impl CompatibleVector {
    /// Validate an explicit tuple of stages.
    pub fn new(system: InverseSystem, stages: Vec<Vector>) -> Result<Self> {
        let m = system.max_stage();
        if stages.len() != m {
            return Err(Error::Incompatible(format!("{} stages given, system has {m}", stages.len())));
        }
        for (i, w) in stages.iter().enumerate() {
            let d = system.stage_dim(i + 1)?;
            if w.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: w.len() });
            }
        }
        for i in 1..m {
            if system.bond(i)?.apply(&stages[i])? != stages[i - 1] {
                return Err(Error::Incompatible(format!("θ_{i}(w_{}) != w_{i}", i + 1)));
            }
        }
        Ok(CompatibleVector { system, stages, limit: None })
    }

    pub(crate) fn from_tail(system: InverseSystem, tail: Vector) -> Result<Self> {
        let m = system.max_stage();
        let d = system.stage_dim(m)?;
        if tail.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: tail.len() });
        }
        let mut stages = vec![tail];
        for i in (1..m).rev() {
            let below = system.bond(i)?.apply(stages.last().unwrap())?;
            stages.push(below);
        }
        stages.reverse();
        Ok(CompatibleVector { system, stages, limit: None })
    }

    /// The truncation of a coordinate sequence in a coordinate-drop system,
    /// carrying its closed-form limit norm.
    pub fn from_sequence(system: InverseSystem, seq: &CoordinateSequence) -> Result<Self> {
        let p = match system.builtin_kind() {
            Some(b @ (Builtin::L1Drop | Builtin::LinfDrop | Builtin::L2Drop)) => b.p(),
            _ => {
                return Err(Error::Unsupported(
                    "coordinate sequences live in the coordinate-drop systems".to_string(),
                ))
            }
        };
        let tail = seq.prefix(system.max_stage());
        let mut cv = CompatibleVector::from_tail(system, tail)?;
        cv.limit = seq.limit_norm(p);
        Ok(cv)
    }

    pub fn system(&self) -> &InverseSystem {
        &self.system
    }

    pub fn max_stage(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[Vector] {
        &self.stages
    }

    pub fn tail(&self) -> &Vector {
        self.stages.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        linalg::is_zero(self.tail())
    }

    /// `π_j`, the stored stage `w_j`.
    pub fn project(&self, j: usize) -> Result<&Vector> {
        if j == 0 || j > self.stages.len() {
            return Err(Error::StageOutOfRange { stage: j, max: self.stages.len() });
        }
        Ok(&self.stages[j - 1])
    }

    pub fn norm_at(&self, j: usize) -> Result<Scalar> {
        self.system.stage(j)?.norm(self.project(j)?)
    }

    pub fn stage_norms(&self) -> Result<StageNorms> {
        let norms = (1..=self.max_stage()).map(|j| self.norm_at(j)).collect::<Result<Vec<_>>>()?;
        let limit_estimate = norms.last().cloned().unwrap();
        let gap = self.limit.as_ref().map(|l| l - &limit_estimate);
        Ok(StageNorms {
            norms,
            limit_estimate,
            bound: Bound::Lower,
            is_exact: self.limit.is_some(),
            limit: self.limit.clone(),
            gap,
        })
    }

    fn combine(&self, other: &CompatibleVector, f: impl Fn(&[Scalar], &[Scalar]) -> Vector) -> Result<Self> {
        if self.system != other.system {
            return Err(Error::Incompatible("vectors live in different systems".to_string()));
        }
        let stages = self.stages.iter().zip(&other.stages).map(|(a, b)| f(a, b)).collect();
        Ok(CompatibleVector { system: self.system.clone(), stages, limit: None })
    }

    pub fn add(&self, other: &CompatibleVector) -> Result<Self> {
        self.combine(other, linalg::add)
    }

    pub fn sub(&self, other: &CompatibleVector) -> Result<Self> {
        self.combine(other, linalg::sub)
    }

    pub fn scale(&self, t: &Scalar) -> Self {
        CompatibleVector {
            system: self.system.clone(),
            stages: self.stages.iter().map(|w| linalg::scale(w, t)).collect(),
            limit: self.limit.as_ref().map(|l| l * &t.abs()),
        }
    }

    /// `φ(w_j)` for `φ ∈ W_j^*`.
    pub fn pairing(&self, j: usize, phi: &[Scalar]) -> Result<Scalar> {
        let w = self.project(j)?;
        if phi.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: w.len(), got: phi.len() });
        }
        Ok(linalg::dot(phi, w))
    }

    /// Find an extreme point `φ` of the dual ball of `W_M` with
    /// `φ(w_M) = ‖w_M‖`.
    pub fn pairing_isometry_check(&self) -> Result<PairingVerdict> {
        let m = self.max_stage();
        let space = self.system.stage(m)?;
        let w = self.tail();
        let probe = if linalg::is_zero(w) { linalg::unit(w.len(), 0) } else { w.clone() };
        let (phi, _) = space.attaining_functional(&probe)?;
        let value = linalg::dot(&phi, w);
        let norm = space.norm(w)?;
        let dual = space.dual();
        let functional_norm = dual.norm(&phi)?;
        let extreme = dual.is_extreme_point(&phi)?;
        Ok(PairingVerdict {
            pass: value >= norm && functional_norm <= Scalar::one() && extreme,
            stage: m,
            functional: phi,
            value,
            norm,
            functional_norm,
            extreme,
        })
    }
}

/// A compatible family `g_i : R^d → W_i` with `θ_i ∘ g_{i+1} = g_i`.
#[derive(Clone, Debug)]
pub struct SubspaceGenerator {
    system: InverseSystem,
    maps: Vec<Matrix>,
}

impl SubspaceGenerator {
    /// Validate `θ_i ∘ g_{i+1} = g_i` for every stage.
    pub fn new(system: InverseSystem, maps: Vec<Matrix>) -> Result<Self> {
        let m = system.max_stage();
        if maps.len() != m {
            return Err(Error::Incompatible(format!("{} maps given, system has {m} stages", maps.len())));
        }
        let d = maps[0].cols();
        for (k, g) in maps.iter().enumerate() {
            let rows = system.stage_dim(k + 1)?;
            if g.rows() != rows || g.cols() != d {
                return Err(Error::Incompatible(format!(
                    "g_{} has shape {}x{}, expected {rows}x{d}",
                    k + 1,
                    g.rows(),
                    g.cols()
                )));
            }
        }
        for i in 1..m {
            if system.bond(i)?.matrix().mul(&maps[i]) != maps[i - 1] {
                return Err(Error::Incompatible(format!("θ_{i} ∘ g_{} != g_{i}", i + 1)));
            }
        }
        Ok(SubspaceGenerator { system, maps })
    }

    /// The family generated by the top map `g_M`.
    pub fn from_top(system: InverseSystem, top: Matrix) -> Result<Self> {
        let m = system.max_stage();
        let d = system.stage_dim(m)?;
        if top.rows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: top.rows() });
        }
        let mut maps = vec![top];
        for i in (1..m).rev() {
            let below = system.bond(i)?.matrix().mul(maps.last().unwrap());
            maps.push(below);
        }
        maps.reverse();
        Ok(SubspaceGenerator { system, maps })
    }

    pub fn system(&self) -> &InverseSystem {
        &self.system
    }

    pub fn param_dim(&self) -> usize {
        self.maps[0].cols()
    }

    pub fn max_stage(&self) -> usize {
        self.maps.len()
    }

    pub fn map(&self, i: usize) -> Result<&Matrix> {
        self.maps
            .get(i.wrapping_sub(1))
            .ok_or(Error::StageOutOfRange { stage: i, max: self.maps.len() })
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn eval(&self, a: &[Scalar]) -> Result<CompatibleVector> {
        if a.len() != self.param_dim() {
            return Err(Error::DimensionMismatch { expected: self.param_dim(), got: a.len() });
        }
        let stages = self.maps.iter().map(|g| g.mul_vec(a)).collect();
        Ok(CompatibleVector { system: self.system.clone(), stages, limit: None })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub tol: Scalar,
    /// First index (0-based) of the tail examined; default: second half.
    pub tail_from: Option<usize>,
    /// Last stage examined; default: `M`.
    pub check_through: Option<usize>,
}

impl ConvergenceOptions {
    pub fn new(tol: Scalar) -> Self {
        ConvergenceOptions { tol, tail_from: None, check_through: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageConvergence {
    pub stage: usize,
    pub cauchy: bool,
    /// `max_k ‖π_j(v_k) − π_j(v_K)‖` over the tail.
    pub spread: Scalar,
    /// `‖π_j(v_K)‖` for the candidate limit `v_K`.
    pub limit_norm: Scalar,
    /// `min_k ‖π_j(v_k)‖` over the tail.
    pub liminf_norm: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Every examined stage is Cauchy within `tol`.
    pub pass: bool,
    pub tail_from: usize,
    pub stages: Vec<StageConvergence>,
    /// `max_k ‖v_k − v_K‖_M` over the tail: small only for strongly
    /// convergent sequences.
    pub strong_spread: Scalar,
    #[serde(skip)]
    pub limit: Option<CompatibleVector>,
}

/// Stagewise convergence of a sequence of compatible vectors. The last
/// term is the limit candidate.
pub fn invlim_convergence(seq: &[CompatibleVector], opts: &ConvergenceOptions) -> Result<ConvergenceReport> {
    let Some(last) = seq.last() else {
        return Err(Error::InvalidQuery("empty sequence".to_string()));
    };
    let system = last.system().clone();
    if seq.iter().any(|v| v.system() != &system) {
        return Err(Error::Incompatible("vectors live in different systems".to_string()));
    }
    let m = system.max_stage();
    let tail_from = opts.tail_from.unwrap_or(seq.len() / 2).min(seq.len() - 1);
    let through = opts.check_through.unwrap_or(m).min(m);
    let tail = &seq[tail_from..];
    let mut stages = Vec::with_capacity(through);
    for j in 1..=through {
        let space = system.stage(j)?;
        let target = last.project(j)?;
        let mut spread = Scalar::zero();
        let mut liminf: Option<Scalar> = None;
        for v in tail {
            let w = v.project(j)?;
            spread = spread.max(space.norm(&linalg::sub(w, target))?);
            let n = space.norm(w)?;
            liminf = Some(match liminf {
                Some(l) => l.min(n),
                None => n,
            });
        }
        stages.push(StageConvergence {
            stage: j,
            cauchy: spread <= opts.tol,
            spread,
            limit_norm: space.norm(target)?,
            liminf_norm: liminf.unwrap(),
        });
    }
    let top = system.stage(m)?;
    let mut strong_spread = Scalar::zero();
    for v in tail {
        strong_spread = strong_spread.max(top.norm(&linalg::sub(v.tail(), last.tail()))?);
    }
    Ok(ConvergenceReport {
        pass: stages.iter().all(|s| s.cauchy),
        tail_from,
        stages,
        strong_spread,
        limit: Some(last.clone()),
    })
}

/// Diagonal extraction: for `j = 1..=check_through`, cover the surviving
/// indices by a greedy net of radius `tol/2` at stage `j` and keep the most
/// populated cell (earliest on ties). Any two survivors are then within
/// `tol` at every examined stage.
pub fn extract_convergent_subsequence(family: &[CompatibleVector], opts: &ConvergenceOptions) -> Result<Vec<usize>> {
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let system = first.system().clone();
    let through = opts.check_through.unwrap_or(system.max_stage()).min(system.max_stage());
    let radius = &opts.tol / &Scalar::from_int(2);
    let mut survivors: Vec<usize> = (0..family.len()).collect();
    for j in 1..=through {
        let space = system.stage(j)?;
        let mut cells: Vec<(usize, Vec<usize>)> = Vec::new();
        for &k in &survivors {
            let w = family[k].project(j)?;
            let mut placed = false;
            for (center, members) in cells.iter_mut() {
                if space.norm(&linalg::sub(w, family[*center].project(j)?))? <= radius {
                    members.push(k);
                    placed = true;
                    break;
                }
            }
            if !placed {
                cells.push((k, vec![k]));
            }
        }
        let best = cells
            .into_iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.1.len().cmp(&b.1.len()).then(ib.cmp(ia)))
            .map(|(_, c)| c.1)
            .unwrap();
        survivors = best;
        survivors.sort_unstable();
    }
    Ok(survivors)
}
