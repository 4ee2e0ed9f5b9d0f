//! Finite-dimensional normed spaces with exactly computable norms.
//!
//! A [`NormedSpace`] pairs a dimension with a [`NormSpec`]:
//!
//! * weighted `ℓ1`, `ℓ2`, `ℓ∞` norms, `‖x‖ = ‖(w_i x_i)_i‖_p`;
//! * `HPolytope`: `‖x‖ = max_k |φ_k(x)|`;
//! * `VPolytope`: the gauge of `conv(±v_j)`, solved as an exact LP.
//!
//! Polytope specs are reduced to an irredundant, sign-normalized, sorted
//! form at construction, so two spaces with the same unit ball compare
//! equal. Duality swaps the H and V forms (and `p` with its conjugate).
//!
//! `ℓ2` norms are irrational in general; they are reported rounded down to
//! `2^-128` and flagged by [`NormedSpace::norm_is_exact`].

mod enumerate;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use enumerate::symmetric_vertices;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::lp::{LinearProgram, Relation, Sense, VarKind};
use crate::scalar::Scalar;

/// Default dimension cap for exponential-size enumerations.
pub const DEFAULT_CAP_DIM: usize = 8;

/// Environment variable overriding [`DEFAULT_CAP_DIM`].
pub const CAP_DIM_ENV: &str = "BANACH_LIMITS_CAP_DIM";

/// Bits of precision kept when rounding `ℓ2` norms.
pub const L2_BITS: u32 = 128;

/// Above this dimension V-polytope norms are evaluated by LP instead of a
/// cached facet list.
const FACET_CACHE_DIM: usize = 4;

/// The active enumeration cap (environment override or default).
pub fn cap_dim() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(CAP_DIM_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_CAP_DIM)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PNorm {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl PNorm {
    pub fn conjugate(self) -> PNorm {
        match self {
            PNorm::One => PNorm::Inf,
            PNorm::Two => PNorm::Two,
            PNorm::Inf => PNorm::One,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NormSpec {
    #[serde(rename = "lp")]
    Lp { p: PNorm, weights: Vec<Scalar> },
    #[serde(rename = "hpoly")]
    HPolytope { functionals: Vec<Vector> },
    #[serde(rename = "vpoly")]
    VPolytope { vertices: Vec<Vector> },
}

impl NormSpec {
    /// Dimension implied by the data, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            NormSpec::Lp { weights, .. } => Some(weights.len()),
            NormSpec::HPolytope { functionals } => functionals.first().map(Vec::len),
            NormSpec::VPolytope { vertices } => vertices.first().map(Vec::len),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NormSpec::Lp { .. } => "lp",
            NormSpec::HPolytope { .. } => "hpoly",
            NormSpec::VPolytope { .. } => "vpoly",
        }
    }
}

/// Outcome of [`validate_norm`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormDiagnostics {
    pub pass: bool,
    pub dim: Option<usize>,
    pub issues: Vec<String>,
}

/// Check the invariants a [`NormSpec`] must satisfy to define a norm.
pub fn validate_norm(spec: &NormSpec) -> NormDiagnostics {
    let mut issues = Vec::new();
    let dim = spec.dim();
    match dim {
        None => issues.push("empty specification: dimension undetermined".to_string()),
        Some(0) => issues.push("dimension must be positive".to_string()),
        _ => {}
    }
    if let Some(d) = dim.filter(|&d| d > 0) {
        match spec {
            NormSpec::Lp { weights, .. } => {
                for (i, w) in weights.iter().enumerate() {
                    if !w.is_positive() {
                        issues.push(format!("weight {i} is {w}, must be strictly positive"));
                    }
                }
            }
            NormSpec::HPolytope { functionals } => {
                check_rows(functionals, d, "functional", &mut issues);
                if issues.is_empty() && Matrix::from_rows(functionals.clone()).unwrap().rank() < d {
                    issues.push(
                        "functionals do not span the dual space (seminorm)".to_string(),
                    );
                }
            }
            NormSpec::VPolytope { vertices } => {
                check_rows(vertices, d, "vertex", &mut issues);
                if issues.is_empty() && Matrix::from_rows(vertices.clone()).unwrap().rank() < d {
                    issues.push("vertices do not span the space".to_string());
                }
            }
        }
    }
    NormDiagnostics {
        pass: issues.is_empty(),
        dim,
        issues,
    }
}

fn check_rows(rows: &[Vector], dim: usize, what: &str, issues: &mut Vec<String>) {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            issues.push(format!("{what} {i} has length {}, expected {dim}", r.len()));
        }
    }
}

/// A finite-dimensional normed space.
#[derive(Clone)]
pub struct NormedSpace {
    label: String,
    dim: usize,
    spec: NormSpec,
    half_extreme: OnceLock<Vec<Vector>>,
    facets: OnceLock<Vec<Vector>>,
    dual: OnceLock<Arc<NormedSpace>>,
    float_functionals: OnceLock<Option<Vec<Vec<f64>>>>,
}

impl PartialEq for NormedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.spec == other.spec
    }
}

impl fmt::Debug for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormedSpace")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("spec", &self.spec)
            .finish()
    }
}

impl NormedSpace {
    /// Validate and canonicalize.
    pub fn new(label: impl Into<String>, spec: NormSpec) -> Result<Self> {
        let diag = validate_norm(&spec);
        if !diag.pass {
            return Err(Error::InvalidNorm(diag.issues.join("; ")));
        }
        let dim = diag.dim.unwrap();
        let spec = match spec {
            NormSpec::HPolytope { functionals } => NormSpec::HPolytope {
                functionals: irredundant(functionals),
            },
            NormSpec::VPolytope { vertices } => NormSpec::VPolytope {
                vertices: irredundant(vertices),
            },
            lp => lp,
        };
        Ok(Self::from_canonical(label.into(), dim, spec))
    }

    fn from_canonical(label: String, dim: usize, spec: NormSpec) -> Self {
        NormedSpace {
            label,
            dim,
            spec,
            half_extreme: OnceLock::new(),
            facets: OnceLock::new(),
            dual: OnceLock::new(),
            float_functionals: OnceLock::new(),
        }
    }

    pub fn lp(p: PNorm, weights: Vec<Scalar>) -> Result<Self> {
        let label = format!("l{p}^{}", weights.len());
        NormedSpace::new(label, NormSpec::Lp { p, weights })
    }

    pub fn l1(dim: usize) -> Self {
        NormedSpace::lp(PNorm::One, vec![Scalar::one(); dim]).expect("valid l1")
    }

    pub fn l2(dim: usize) -> Self {
        NormedSpace::lp(PNorm::Two, vec![Scalar::one(); dim]).expect("valid l2")
    }

    pub fn linf(dim: usize) -> Self {
        NormedSpace::lp(PNorm::Inf, vec![Scalar::one(); dim]).expect("valid linf")
    }

    pub fn hpoly(functionals: Vec<Vector>) -> Result<Self> {
        NormedSpace::new("hpoly", NormSpec::HPolytope { functionals })
    }

    pub fn vpoly(vertices: Vec<Vector>) -> Result<Self> {
        NormedSpace::new("vpoly", NormSpec::VPolytope { vertices })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    /// True when the unit ball is a polytope.
    pub fn is_polytope(&self) -> bool {
        !matches!(self.spec, NormSpec::Lp { p: PNorm::Two, .. })
    }

    /// False for `ℓ2`, whose norms are rounded.
    pub fn norm_is_exact(&self) -> bool {
        self.is_polytope()
    }

    /// Unweighted `ℓ2`.
    pub fn is_euclidean(&self) -> bool {
        matches!(&self.spec, NormSpec::Lp { p: PNorm::Two, weights } if weights.iter().all(|w| *w == Scalar::one()))
    }

    fn check_dim(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn norm(&self, x: &[Scalar]) -> Result<Scalar> {
        self.check_dim(x)?;
        Ok(match &self.spec {
            NormSpec::Lp { p, weights } => lp_norm(*p, weights, x),
            NormSpec::HPolytope { functionals } => max_abs_pairing(functionals, x),
            NormSpec::VPolytope { vertices } => match self.cached_facets() {
                Some(facets) => max_abs_pairing(facets, x),
                None => gauge_lp(vertices, x)?,
            },
        })
    }

    /// The V-polytope gauge computed by LP regardless of any facet cache.
    /// Other specs fall through to [`NormedSpace::norm`].
    pub fn norm_by_lp(&self, x: &[Scalar]) -> Result<Scalar> {
        self.check_dim(x)?;
        match &self.spec {
            NormSpec::VPolytope { vertices } => gauge_lp(vertices, x),
            _ => self.norm(x),
        }
    }

    /// Float evaluation for search heuristics. V-polytopes without a facet
    /// cache fall back to the exact LP.
    pub fn norm_f64(&self, x: &[f64]) -> f64 {
        match &self.spec {
            NormSpec::Lp { p, weights } => {
                let it = x.iter().zip(weights).map(|(xi, w)| (xi * w.to_f64()).abs());
                match p {
                    PNorm::One => it.sum(),
                    PNorm::Inf => it.fold(0.0, f64::max),
                    PNorm::Two => it.map(|v| v * v).sum::<f64>().sqrt(),
                }
            }
            NormSpec::HPolytope { .. } | NormSpec::VPolytope { .. } => {
                if let Some(f) = self.float_functionals() {
                    return f
                        .iter()
                        .map(|phi| phi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs())
                        .fold(0.0, f64::max);
                }
                self.norm(&linalg::from_f64(x))
                    .map(|s| s.to_f64())
                    .unwrap_or(f64::NAN)
            }
        }
    }

    fn float_functionals(&self) -> Option<&Vec<Vec<f64>>> {
        self.float_functionals
            .get_or_init(|| {
                let functionals = match &self.spec {
                    NormSpec::HPolytope { functionals } => functionals,
                    NormSpec::VPolytope { .. } => self.cached_facets()?,
                    _ => return None,
                };
                Some(functionals.iter().map(|f| linalg::to_f64(f)).collect())
            })
            .as_ref()
    }

    fn cached_facets(&self) -> Option<&Vec<Vector>> {
        if let Some(f) = self.facets.get() {
            return Some(f);
        }
        match &self.spec {
            NormSpec::VPolytope { vertices } if self.dim <= FACET_CACHE_DIM.min(cap_dim()) => {
                Some(self.facets.get_or_init(|| symmetric_vertices(vertices, self.dim)))
            }
            _ => None,
        }
    }

    /// The dual space: conjugate exponent with reciprocal weights for `ℓp`,
    /// and H/V exchange for polytopes.
    pub fn dual(&self) -> Arc<NormedSpace> {
        self.dual
            .get_or_init(|| {
                let spec = match &self.spec {
                    NormSpec::Lp { p, weights } => NormSpec::Lp {
                        p: p.conjugate(),
                        weights: weights.iter().map(Scalar::recip).collect(),
                    },
                    NormSpec::HPolytope { functionals } => NormSpec::VPolytope {
                        vertices: functionals.clone(),
                    },
                    NormSpec::VPolytope { vertices } => NormSpec::HPolytope {
                        functionals: vertices.clone(),
                    },
                };
                let label = match self.label.strip_suffix('*') {
                    Some(base) => base.to_string(),
                    None => format!("{}*", self.label),
                };
                let dual = NormedSpace::from_canonical(label, self.dim, spec);
                // the dual's dual is this space; share the facet cache both ways
                if let (NormSpec::VPolytope { .. }, Some(f)) = (&self.spec, self.facets.get()) {
                    let _ = dual.half_extreme.set(f.clone());
                }
                Arc::new(dual)
            })
            .clone()
    }

    /// Dual norm of a covector.
    pub fn dual_norm(&self, phi: &[Scalar]) -> Result<Scalar> {
        self.dual().norm(phi)
    }

    /// One representative (first nonzero coordinate positive) of each pair
    /// `±v` of extreme points of the unit ball.
    pub fn half_extreme_points(&self) -> Result<&[Vector]> {
        self.half_extreme_points_with_cap(cap_dim())
    }

    pub fn half_extreme_points_with_cap(&self, cap: usize) -> Result<&[Vector]> {
        if let Some(v) = self.half_extreme.get() {
            return Ok(v);
        }
        let computed = match &self.spec {
            NormSpec::Lp { p: PNorm::Two, .. } => {
                return Err(Error::Unsupported(
                    "the l2 unit ball is not a polytope".to_string(),
                ))
            }
            NormSpec::Lp { p: PNorm::One, weights } => weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let mut v = linalg::zeros(self.dim);
                    v[i] = w.recip();
                    v
                })
                .collect(),
            NormSpec::Lp { p: PNorm::Inf, weights } => {
                if self.dim > cap {
                    return Err(Error::DimensionCap { dim: self.dim, cap });
                }
                let mut out = Vec::with_capacity(1 << (self.dim - 1));
                for mask in 0..(1usize << (self.dim - 1)) {
                    let v: Vector = weights
                        .iter()
                        .enumerate()
                        .map(|(i, w)| {
                            let s = if i > 0 && mask & (1 << (i - 1)) != 0 {
                                -w.recip()
                            } else {
                                w.recip()
                            };
                            s
                        })
                        .collect();
                    out.push(v);
                }
                out.sort();
                out
            }
            NormSpec::VPolytope { vertices } => vertices.clone(),
            NormSpec::HPolytope { functionals } => {
                if self.dim > cap {
                    return Err(Error::DimensionCap { dim: self.dim, cap });
                }
                symmetric_vertices(functionals, self.dim)
            }
        };
        Ok(self.half_extreme.get_or_init(|| computed))
    }

    /// All extreme points of the unit ball, both signs.
    pub fn ball_extreme_points(&self) -> Result<Vec<Vector>> {
        let half = self.half_extreme_points()?;
        let mut out = Vec::with_capacity(2 * half.len());
        for v in half {
            out.push(v.clone());
            out.push(linalg::neg(v));
        }
        Ok(out)
    }

    /// Whether `x` is an extreme point of the unit ball.
    pub fn is_extreme_point(&self, x: &[Scalar]) -> Result<bool> {
        self.check_dim(x)?;
        let one = Scalar::one();
        Ok(match &self.spec {
            NormSpec::Lp { p: PNorm::Two, .. } => self.norm(x)? == one,
            NormSpec::Lp { p: PNorm::One, weights } => {
                let support: Vec<usize> = (0..self.dim).filter(|&i| !x[i].is_zero()).collect();
                support.len() == 1 && (&x[support[0]] * &weights[support[0]]).abs() == one
            }
            NormSpec::Lp { p: PNorm::Inf, weights } => {
                x.iter().zip(weights).all(|(xi, w)| (xi * w).abs() == one)
            }
            NormSpec::VPolytope { vertices } => {
                let s = linalg::sign_normalize(x);
                vertices.contains(&s)
            }
            NormSpec::HPolytope { functionals } => {
                if self.norm(x)? != one {
                    return Ok(false);
                }
                let active: Vec<Vector> = functionals
                    .iter()
                    .filter(|f| linalg::dot(f, x).abs() == one)
                    .cloned()
                    .collect();
                Matrix::from_rows_with_cols(active, self.dim)?.rank() == self.dim
            }
        })
    }

    /// A covector `φ` that is an extreme point of the dual unit ball with
    /// `φ(x) = ‖x‖`. Polytope norms only.
    pub fn attaining_functional(&self, x: &[Scalar]) -> Result<(Vector, Scalar)> {
        self.check_dim(x)?;
        let sign = |s: &Scalar| if s.is_negative() { -Scalar::one() } else { Scalar::one() };
        match &self.spec {
            NormSpec::Lp { p: PNorm::Two, .. } => Err(Error::Unsupported(
                "norm-attaining functionals of l2 are irrational in general".to_string(),
            )),
            NormSpec::Lp { p: PNorm::One, weights } => {
                let phi: Vector = x.iter().zip(weights).map(|(xi, w)| sign(xi) * w).collect();
                let value = linalg::dot(&phi, x);
                Ok((phi, value))
            }
            NormSpec::Lp { p: PNorm::Inf, weights } => {
                let mut best = 0;
                let mut best_val = Scalar::zero();
                for (i, (xi, w)) in x.iter().zip(weights).enumerate() {
                    let v = (xi * w).abs();
                    if v > best_val {
                        best = i;
                        best_val = v;
                    }
                }
                let mut phi = linalg::zeros(self.dim);
                phi[best] = sign(&x[best]) * &weights[best];
                Ok((phi, best_val))
            }
            NormSpec::HPolytope { functionals } => {
                let mut best = 0;
                let mut best_val = Scalar::zero();
                for (k, f) in functionals.iter().enumerate() {
                    let v = linalg::dot(f, x).abs();
                    if v > best_val {
                        best = k;
                        best_val = v;
                    }
                }
                let s = sign(&linalg::dot(&functionals[best], x));
                Ok((linalg::scale(&functionals[best], &s), best_val))
            }
            NormSpec::VPolytope { vertices } => {
                // max φ·x s.t. |φ·v_j| <= 1; a basic optimum is a dual-ball vertex
                let mut lp = LinearProgram::new(Sense::Maximize);
                let phi: Vec<usize> = x.iter().map(|xi| lp.add_var(VarKind::Free, xi.clone())).collect();
                for v in vertices {
                    let row: Vec<(usize, Scalar)> =
                        phi.iter().zip(v).map(|(&j, c)| (j, c.clone())).collect();
                    lp.add_row(row.clone(), Relation::Le, Scalar::one());
                    lp.add_row(row, Relation::Ge, -Scalar::one());
                }
                let sol = lp.solve()?;
                Ok((sol.x, sol.objective))
            }
        }
    }

    /// An H-representation `{φ_k}` with `‖x‖ = max_k |φ_k(x)|` when one is
    /// available without exponential blowup (`ℓ∞`, H-polytopes, V-polytopes
    /// within the enumeration cap).
    pub fn h_representation(&self) -> Result<Vec<Vector>> {
        match &self.spec {
            NormSpec::Lp { p: PNorm::Inf, weights } => Ok(weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let mut f = linalg::zeros(self.dim);
                    f[i] = w.clone();
                    f
                })
                .collect()),
            NormSpec::Lp { p: PNorm::One, .. } => Ok(self.dual().half_extreme_points()?.to_vec()),
            NormSpec::Lp { p: PNorm::Two, .. } => Err(Error::Unsupported(
                "the l2 unit ball has no finite H-representation".to_string(),
            )),
            NormSpec::HPolytope { functionals } => Ok(functionals.clone()),
            NormSpec::VPolytope { .. } => Ok(self.dual().half_extreme_points()?.to_vec()),
        }
    }

    /// The induced norm `y ↦ ‖B y‖` on the column space coordinates of an
    /// injective `B`, as a V-polytope. Extreme points are found by an LP
    /// oracle growing an inner hull until every facet is confirmed.
    pub fn section(&self, basis: &Matrix, label: impl Into<String>) -> Result<NormedSpace> {
        if basis.rows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: basis.rows(),
            });
        }
        let r = basis.cols();
        if basis.rank() < r {
            return Err(Error::InvalidNorm(
                "section basis is not injective".to_string(),
            ));
        }
        if r > cap_dim() {
            return Err(Error::DimensionCap { dim: r, cap: cap_dim() });
        }
        if !self.is_polytope() {
            return Err(Error::Unsupported("sections of l2 balls are not polytopes".to_string()));
        }
        let oracle = |c: &[Scalar]| -> Result<(Vector, Scalar)> {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let y: Vec<usize> = c.iter().map(|ci| lp.add_var(VarKind::Free, ci.clone())).collect();
            let exprs: Vec<Vec<(usize, Scalar)>> = (0..self.dim)
                .map(|i| y.iter().enumerate().map(|(j, &v)| (v, basis[(i, j)].clone())).collect())
                .collect();
            constrain_norm(&mut lp, self, &exprs, Radius::Const(Scalar::one()))?;
            let sol = lp.solve()?;
            Ok((linalg::sign_normalize(&sol.x[..r]), sol.objective))
        };
        let mut points: Vec<Vector> = Vec::new();
        for j in 0..r {
            let (p, _) = oracle(&linalg::unit(r, j))?;
            if !points.contains(&p) {
                points.push(p);
            }
        }
        loop {
            let m = Matrix::from_rows_with_cols(points.clone(), r)?;
            let ns = m.null_space();
            if ns.is_empty() {
                break;
            }
            let (p, _) = oracle(&ns[0])?;
            points.push(p);
        }
        loop {
            let facets = symmetric_vertices(&points, r);
            let mut grew = false;
            for c in &facets {
                let (p, value) = oracle(c)?;
                if value > Scalar::one() && !points.contains(&p) {
                    points.push(p);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        NormedSpace::new(label, NormSpec::VPolytope { vertices: points })
    }
}

fn lp_norm(p: PNorm, weights: &[Scalar], x: &[Scalar]) -> Scalar {
    let scaled = x.iter().zip(weights).map(|(xi, w)| (xi * w).abs());
    match p {
        PNorm::One => scaled.sum(),
        PNorm::Inf => scaled.fold(Scalar::zero(), Scalar::max),
        PNorm::Two => scaled.map(|v| &v * &v).sum::<Scalar>().sqrt_floor(L2_BITS),
    }
}

fn max_abs_pairing(functionals: &[Vector], x: &[Scalar]) -> Scalar {
    functionals
        .iter()
        .map(|f| linalg::dot(f, x).abs())
        .fold(Scalar::zero(), Scalar::max)
}

/// Gauge of `conv(±v_j)` at `x`: `min Σ|μ_j|` subject to `Σ μ_j v_j = x`.
pub fn gauge_lp(vertices: &[Vector], x: &[Scalar]) -> Result<Scalar> {
    if linalg::is_zero(x) {
        return Ok(Scalar::zero());
    }
    let mut lp = LinearProgram::new(Sense::Minimize);
    let plus: Vec<usize> = vertices.iter().map(|_| lp.add_var(VarKind::NonNeg, Scalar::one())).collect();
    let minus: Vec<usize> = vertices.iter().map(|_| lp.add_var(VarKind::NonNeg, Scalar::one())).collect();
    for (i, xi) in x.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * vertices.len());
        for (j, v) in vertices.iter().enumerate() {
            row.push((plus[j], v[i].clone()));
            row.push((minus[j], -&v[i]));
        }
        lp.add_row(row, Relation::Eq, xi.clone());
    }
    lp.solve()
        .map(|s| s.objective)
        .map_err(|e| Error::InvalidNorm(format!("gauge LP failed ({e}); vertices must span")))
}

/// Reduce a list of `±`-symmetric generators to the irredundant,
/// sign-normalized, sorted form: drop zeros and duplicates, then every
/// generator lying in `conv(±others)`.
fn irredundant(rows: Vec<Vector>) -> Vec<Vector> {
    let mut rows: Vec<Vector> = rows
        .into_iter()
        .filter(|r| !linalg::is_zero(r))
        .map(|r| linalg::sign_normalize(&r))
        .collect();
    rows.sort();
    rows.dedup();
    let mut i = 0;
    while i < rows.len() {
        let others: Vec<Vector> = rows
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        let redundant = !others.is_empty()
            && matches!(gauge_lp(&others, &rows[i]), Ok(g) if g <= Scalar::one());
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    rows
}

/// Right-hand side of a norm-ball constraint `‖y‖ <= radius`.
pub enum Radius {
    Var(usize),
    Const(Scalar),
}

/// Add `‖y‖_space <= radius` to `lp`, where `y_i = Σ c·x_var` is given by
/// `exprs[i]`. Auxiliary variables are appended as needed.
pub fn constrain_norm(
    lp: &mut LinearProgram,
    space: &NormedSpace,
    exprs: &[Vec<(usize, Scalar)>],
    radius: Radius,
) -> Result<()> {
    if exprs.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: exprs.len(),
        });
    }
    let bound_le = |lp: &mut LinearProgram, mut row: Vec<(usize, Scalar)>| match &radius {
        Radius::Var(t) => {
            row.push((*t, -Scalar::one()));
            lp.add_row(row, Relation::Le, Scalar::zero());
        }
        Radius::Const(c) => lp.add_row(row, Relation::Le, c.clone()),
    };
    let scaled = |expr: &[(usize, Scalar)], f: &Scalar| -> Vec<(usize, Scalar)> {
        expr.iter().map(|(v, c)| (*v, c * f)).collect()
    };
    let combine = |phi: &[Scalar]| -> Vec<(usize, Scalar)> {
        let mut row = Vec::new();
        for (e, f) in exprs.iter().zip(phi) {
            if !f.is_zero() {
                row.extend(scaled(e, f));
            }
        }
        row
    };
    match space.spec() {
        NormSpec::Lp { p: PNorm::Two, .. } => {
            return Err(Error::Unsupported("l2 norm constraints are not linear".to_string()))
        }
        NormSpec::Lp { p: PNorm::One, weights } => {
            let mut total = Vec::new();
            for (e, w) in exprs.iter().zip(weights) {
                let s = lp.add_var(VarKind::NonNeg, Scalar::zero());
                let mut up = scaled(e, w);
                up.push((s, -Scalar::one()));
                lp.add_row(up, Relation::Le, Scalar::zero());
                let mut down = scaled(e, &-w);
                down.push((s, -Scalar::one()));
                lp.add_row(down, Relation::Le, Scalar::zero());
                total.push((s, Scalar::one()));
            }
            bound_le(lp, total);
        }
        NormSpec::Lp { p: PNorm::Inf, weights } => {
            for (e, w) in exprs.iter().zip(weights) {
                bound_le(lp, scaled(e, w));
                bound_le(lp, scaled(e, &-w));
            }
        }
        NormSpec::HPolytope { functionals } => {
            for f in functionals {
                let row = combine(f);
                bound_le(lp, row.iter().map(|(v, c)| (*v, -c)).collect());
                bound_le(lp, row);
            }
        }
        NormSpec::VPolytope { vertices } => {
            let plus: Vec<usize> = vertices.iter().map(|_| lp.add_var(VarKind::NonNeg, Scalar::zero())).collect();
            let minus: Vec<usize> = vertices.iter().map(|_| lp.add_var(VarKind::NonNeg, Scalar::zero())).collect();
            for (i, e) in exprs.iter().enumerate() {
                let mut row = e.clone();
                for (j, v) in vertices.iter().enumerate() {
                    row.push((plus[j], -&v[i]));
                    row.push((minus[j], v[i].clone()));
                }
                lp.add_row(row, Relation::Eq, Scalar::zero());
            }
            let total = plus
                .iter()
                .chain(&minus)
                .map(|&v| (v, Scalar::one()))
                .collect();
            bound_le(lp, total);
        }
    }
    Ok(())
}

/// Serialized form of a space: `{"label": ..., "norm": <NormSpec>}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescription {
    #[serde(default)]
    pub label: String,
    pub norm: NormSpec,
}

impl From<&NormedSpace> for SpaceDescription {
    fn from(s: &NormedSpace) -> Self {
        SpaceDescription {
            label: s.label.clone(),
            norm: s.spec.clone(),
        }
    }
}

impl TryFrom<SpaceDescription> for NormedSpace {
    type Error = Error;
    fn try_from(d: SpaceDescription) -> Result<Self> {
        NormedSpace::new(d.label, d.norm)
    }
}

#[cfg(test)]
mod tests;
