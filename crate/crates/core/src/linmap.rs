//! Linear maps between normed spaces: operator norms, adjoints, min-norm
//! preimages and the exact quotient / isometric-embedding verdicts.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::lp::{LinearProgram, Relation, Sense, VarKind};
use crate::scalar::Scalar;
use crate::space::{self, constrain_norm, NormSpec, NormedSpace, PNorm, Radius};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Exact,
    SampledBound,
}

/// Operator norm as a bracket `lower <= ‖T‖ <= upper`; the two agree when
/// `kind` is exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub lower: Scalar,
    pub upper: Scalar,
    pub witness: Option<Vector>,
    pub kind: CertificateKind,
}

impl OperatorNorm {
    fn exact(value: Scalar, witness: Option<Vector>) -> Self {
        OperatorNorm {
            lower: value.clone(),
            upper: value,
            witness,
            kind: CertificateKind::Exact,
        }
    }

    /// The upper end of the bracket (the value itself when exact).
    pub fn value(&self) -> &Scalar {
        &self.upper
    }

    pub fn is_exact(&self) -> bool {
        self.kind == CertificateKind::Exact
    }

    pub fn gap(&self) -> Scalar {
        &self.upper - &self.lower
    }
}

/// Pass/fail verdict. A failing verdict carries a witness that reproduces
/// the failure when re-evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapVerdict {
    pub pass: bool,
    pub witness: Option<Vector>,
    pub kind: CertificateKind,
    pub reason: String,
}

impl MapVerdict {
    fn pass(kind: CertificateKind) -> Self {
        MapVerdict {
            pass: true,
            witness: None,
            kind,
            reason: "ok".to_string(),
        }
    }

    fn fail(witness: Vector, reason: String) -> Self {
        MapVerdict {
            pass: false,
            witness: Some(witness),
            kind: CertificateKind::Exact,
            reason,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearMap {
    source: Arc<NormedSpace>,
    target: Arc<NormedSpace>,
    matrix: Matrix,
    opnorm: OnceLock<OperatorNorm>,
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.matrix == other.matrix
    }
}

/// Serialized form: spaces by label, matrix as rational strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearMapDescription {
    pub source: String,
    pub target: String,
    pub matrix: Matrix,
}

impl LinearMap {
    pub fn new(source: Arc<NormedSpace>, target: Arc<NormedSpace>, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim() * source.dim(),
                got: matrix.rows() * matrix.cols(),
            });
        }
        Ok(LinearMap {
            source,
            target,
            matrix,
            opnorm: OnceLock::new(),
        })
    }

    pub fn identity(space: Arc<NormedSpace>) -> Self {
        let n = space.dim();
        LinearMap::new(space.clone(), space, Matrix::identity(n)).expect("square")
    }

    pub fn source(&self) -> &Arc<NormedSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<NormedSpace> {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn describe(&self) -> LinearMapDescription {
        LinearMapDescription {
            source: self.source.label().to_string(),
            target: self.target.label().to_string(),
            matrix: self.matrix.clone(),
        }
    }

    pub fn apply(&self, x: &[Scalar]) -> Result<Vector> {
        if x.len() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                got: x.len(),
            });
        }
        Ok(self.matrix.mul_vec(x))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.target.dim() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                got: inner.target.dim(),
            });
        }
        LinearMap::new(inner.source.clone(), self.target.clone(), self.matrix.mul(&inner.matrix))
    }

    /// `T* : target* → source*`, the transposed matrix.
    pub fn adjoint(&self) -> LinearMap {
        LinearMap::new(self.target.dual(), self.source.dual(), self.matrix.transpose())
            .expect("transpose has matching shape")
    }

    pub fn operator_norm(&self) -> Result<OperatorNorm> {
        if let Some(n) = self.opnorm.get() {
            return Ok(n.clone());
        }
        let n = self.compute_operator_norm()?;
        Ok(self.opnorm.get_or_init(|| n).clone())
    }

    fn compute_operator_norm(&self) -> Result<OperatorNorm> {
        let (src, tgt) = (&*self.source, &*self.target);
        let target_h = matches!(
            tgt.spec(),
            NormSpec::HPolytope { .. } | NormSpec::Lp { p: PNorm::Inf, .. }
        );
        if target_h {
            return self.opnorm_by_target_functionals(tgt.h_representation()?);
        }
        if src.is_polytope() {
            match src.half_extreme_points() {
                Ok(ext) => return self.opnorm_by_source_vertices(ext),
                Err(Error::DimensionCap { .. }) if tgt.is_polytope() => {
                    return self.opnorm_by_target_functionals(tgt.h_representation()?)
                }
                Err(e) => return Err(e),
            }
        }
        if tgt.is_polytope() {
            if let Ok(h) = tgt.h_representation() {
                return self.opnorm_by_target_functionals(h);
            }
        }
        if src.is_euclidean() && tgt.is_euclidean() {
            return Ok(spectral_norm(&self.matrix));
        }
        self.opnorm_bracket()
    }

    /// `‖T‖ = max_k ‖Tᵀφ_k‖_{source*}` for `‖y‖ = max_k |φ_k(y)|`.
    fn opnorm_by_target_functionals(&self, functionals: Vec<Vector>) -> Result<OperatorNorm> {
        let dual = self.source.dual();
        let t = self.matrix.transpose();
        let mut best = Scalar::zero();
        let mut best_phi: Option<Vector> = None;
        for phi in &functionals {
            let pulled = t.mul_vec(phi);
            let value = dual.norm(&pulled)?;
            if best_phi.is_none() || value > best {
                best = value;
                best_phi = Some(pulled);
            }
        }
        if !self.source.is_polytope() {
            return Ok(rounded_bracket(best, None));
        }
        let witness = match best_phi {
            Some(p) if !linalg::is_zero(&p) => Some(dual.attaining_functional(&p)?.0),
            _ => None,
        };
        Ok(OperatorNorm::exact(best, witness))
    }

    fn opnorm_by_source_vertices(&self, ext: &[Vector]) -> Result<OperatorNorm> {
        let mut best = Scalar::zero();
        let mut witness: Option<Vector> = None;
        for v in ext {
            let value = self.target.norm(&self.matrix.mul_vec(v))?;
            if witness.is_none() || value > best {
                best = value;
                witness = Some(v.clone());
            }
        }
        if !self.target.norm_is_exact() {
            return Ok(rounded_bracket(best, witness));
        }
        Ok(OperatorNorm::exact(best, witness))
    }

    /// Mixed `ℓ2` bracket: lower bound from unit and sampled vectors, upper
    /// bound `Σ_j ‖T e_j‖ · ‖e_j*‖_{source*}`.
    fn opnorm_bracket(&self) -> Result<OperatorNorm> {
        let n = self.source.dim();
        let ulp = Scalar::pow2(-(space::L2_BITS as i32));
        let dual = self.source.dual();
        let mut upper = Scalar::zero();
        let mut lower = Scalar::zero();
        let mut witness = None;
        let mut probes: Vec<Vector> = (0..n).map(|j| linalg::unit(n, j)).collect();
        probes.push(vec![Scalar::one(); n]);
        for j in 0..n {
            let col = self.matrix.column(j);
            let e = linalg::unit(n, j);
            upper += (self.target.norm(&col)? + &ulp) * (dual.norm(&e)? + &ulp);
        }
        for x in &probes {
            let nx = self.source.norm(x)? + &ulp;
            let r = self.target.norm(&self.matrix.mul_vec(x))? / nx;
            if r > lower {
                lower = r;
                witness = Some(x.clone());
            }
        }
        Ok(OperatorNorm {
            lower,
            upper,
            witness,
            kind: CertificateKind::SampledBound,
        })
    }

    /// `argmin ‖u‖` subject to `Tu = v`, with the minimum.
    pub fn min_norm_preimage(&self, v: &[Scalar]) -> Result<(Vector, Scalar)> {
        if v.len() != self.target.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.target.dim(),
                got: v.len(),
            });
        }
        if self.matrix.solve(v).is_none() {
            return Err(Error::NotInRange);
        }
        let n = self.source.dim();
        let mut lp = LinearProgram::new(Sense::Minimize);
        let u: Vec<usize> = (0..n).map(|_| lp.add_var(VarKind::Free, Scalar::zero())).collect();
        let t = lp.add_var(VarKind::NonNeg, Scalar::one());
        for (i, vi) in v.iter().enumerate() {
            let row = u
                .iter()
                .enumerate()
                .filter(|(j, _)| !self.matrix[(i, *j)].is_zero())
                .map(|(j, &var)| (var, self.matrix[(i, j)].clone()))
                .collect();
            lp.add_row(row, Relation::Eq, vi.clone());
        }
        let exprs: Vec<Vec<(usize, Scalar)>> = u.iter().map(|&var| vec![(var, Scalar::one())]).collect();
        constrain_norm(&mut lp, &self.source, &exprs, Radius::Var(t))?;
        let sol = lp.solve()?;
        Ok((sol.x[..n].to_vec(), sol.objective))
    }

    /// The quotient norm `inf{‖u‖ : Tu = v}` induced on the target.
    pub fn quotient_norm(&self, v: &[Scalar]) -> Result<Scalar> {
        let rank = self.matrix.rank();
        if rank < self.target.dim() {
            return Err(Error::NotSurjective {
                rank,
                dim: self.target.dim(),
            });
        }
        Ok(self.min_norm_preimage(v)?.1)
    }

    /// Surjective, `‖T‖ <= 1`, and the quotient norm is at most 1 on every
    /// extreme point of the target ball (hence on the whole ball).
    pub fn is_quotient_map(&self) -> Result<MapVerdict> {
        if !self.target.is_polytope() {
            return Err(Error::Unsupported(
                "quotient verdicts need a polytope target norm".to_string(),
            ));
        }
        let rank = self.matrix.rank();
        if rank < self.target.dim() {
            let left_null = self.matrix.transpose().null_space();
            return Ok(MapVerdict::fail(
                left_null[0].clone(),
                format!("not surjective: rank {rank} < {}", self.target.dim()),
            ));
        }
        if let Some(v) = self.check_one_lipschitz()? {
            return Ok(v);
        }
        for v in self.target.half_extreme_points()? {
            let qn = self.quotient_norm(v)?;
            if qn > Scalar::one() {
                return Ok(MapVerdict::fail(
                    v.clone(),
                    format!("quotient norm {qn} > 1 at a target extreme point"),
                ));
            }
        }
        Ok(MapVerdict::pass(CertificateKind::Exact))
    }

    /// `‖Tx‖ = ‖x‖` for all `x`: `‖T‖ <= 1`, injectivity, and every extreme
    /// point of the source dual ball extends through `T` with norm <= 1.
    pub fn is_isometric_embedding(&self) -> Result<MapVerdict> {
        let (src, tgt) = (&self.source, &self.target);
        if src.is_euclidean() && tgt.is_euclidean() {
            return Ok(self.euclidean_isometry());
        }
        if !src.is_polytope() || !tgt.is_polytope() {
            return Err(Error::Unsupported(
                "isometry verdicts need polytope norms or l2 on both sides".to_string(),
            ));
        }
        if let Some(v) = self.check_one_lipschitz()? {
            return Ok(v);
        }
        let kernel = self.matrix.null_space();
        if let Some(x) = kernel.into_iter().next() {
            return Ok(MapVerdict::fail(x, "not injective".to_string()));
        }
        let adj = self.adjoint();
        for phi in src.dual().half_extreme_points()? {
            let (_, value) = adj.min_norm_preimage(phi)?;
            if value > Scalar::one() {
                let x = self.norm_stretching_vector(phi)?;
                return Ok(MapVerdict::fail(
                    x,
                    format!("dual extreme point needs extension norm {value} > 1"),
                ));
            }
        }
        Ok(MapVerdict::pass(CertificateKind::Exact))
    }

    /// `argmax φ(x)` subject to `‖Tx‖ <= 1`; its norm exceeds 1 exactly when
    /// `φ` admits no norm-one extension.
    fn norm_stretching_vector(&self, phi: &[Scalar]) -> Result<Vector> {
        let n = self.source.dim();
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x: Vec<usize> = phi.iter().map(|c| lp.add_var(VarKind::Free, c.clone())).collect();
        let exprs: Vec<Vec<(usize, Scalar)>> = (0..self.target.dim())
            .map(|i| {
                x.iter()
                    .enumerate()
                    .filter(|(j, _)| !self.matrix[(i, *j)].is_zero())
                    .map(|(j, &var)| (var, self.matrix[(i, j)].clone()))
                    .collect()
            })
            .collect();
        constrain_norm(&mut lp, &self.target, &exprs, Radius::Const(Scalar::one()))?;
        let sol = lp.solve()?;
        Ok(sol.x[..n].to_vec())
    }

    fn check_one_lipschitz(&self) -> Result<Option<MapVerdict>> {
        let op = self.operator_norm()?;
        if op.lower > Scalar::one() {
            let w = op.witness.clone().unwrap_or_default();
            return Ok(Some(MapVerdict::fail(w, format!("operator norm {} > 1", op.lower))));
        }
        Ok(None)
    }

    fn euclidean_isometry(&self) -> MapVerdict {
        let n = self.source.dim();
        let gram = self.matrix.transpose().mul(&self.matrix);
        for i in 0..n {
            if gram[(i, i)] != Scalar::one() {
                return MapVerdict::fail(linalg::unit(n, i), format!("column {i} has squared norm {}", gram[(i, i)]));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if !gram[(i, j)].is_zero() {
                    let x = linalg::add(&linalg::unit(n, i), &linalg::unit(n, j));
                    return MapVerdict::fail(x, format!("columns {i} and {j} are not orthogonal"));
                }
            }
        }
        MapVerdict::pass(CertificateKind::Exact)
    }
}

fn rounded_bracket(floor: Scalar, witness: Option<Vector>) -> OperatorNorm {
    let upper = &floor + &Scalar::pow2(-(space::L2_BITS as i32));
    OperatorNorm {
        lower: floor,
        upper,
        witness,
        kind: CertificateKind::SampledBound,
    }
}

/// Largest singular value: power iteration for the estimate, an exact
/// positive-definiteness check of `μ²I − TᵀT` for the upper bound and an
/// exact Rayleigh quotient for the lower bound.
fn spectral_norm(t: &Matrix) -> OperatorNorm {
    let n = t.cols();
    let gram = t.transpose().mul(t);
    let g: Vec<Vec<f64>> = gram.to_rows().iter().map(|r| linalg::to_f64(r)).collect();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let y: Vec<f64> = g.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        lambda = norm;
        if delta < 1e-15 {
            break;
        }
    }
    let sigma = lambda.sqrt();
    let xs = linalg::from_f64(&x);
    let tx = t.mul_vec(&xs);
    let xx = linalg::dot(&xs, &xs);
    let lower = if xx.is_zero() {
        Scalar::zero()
    } else {
        (linalg::dot(&tx, &tx) / xx).sqrt_floor(space::L2_BITS)
    };
    let mut bump = (sigma * 1e-13).max(1e-14);
    loop {
        let mu = Scalar::from_f64(sigma + bump).expect("finite");
        let shifted = Matrix::identity(n).scale(&(&mu * &mu));
        let diff = Matrix::from_rows_with_cols(
            (0..n)
                .map(|i| (0..n).map(|j| &shifted[(i, j)] - &gram[(i, j)]).collect())
                .collect(),
            n,
        )
        .expect("square");
        if is_positive_semidefinite(&diff) {
            let witness = if lower.is_zero() { None } else { Some(xs) };
            return OperatorNorm {
                lower,
                upper: mu,
                witness,
                kind: CertificateKind::SampledBound,
            };
        }
        bump *= 10.0;
    }
}

/// Exact `LDLᵀ` test.
fn is_positive_semidefinite(m: &Matrix) -> bool {
    let n = m.rows();
    let mut a = m.to_rows();
    for k in 0..n {
        let pivot = a[k][k].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            if a[k][k + 1..].iter().any(|x| !x.is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k..n {
                let delta = &f * &a[k][j];
                a[i][j] -= &delta;
            }
        }
    }
    true
}
