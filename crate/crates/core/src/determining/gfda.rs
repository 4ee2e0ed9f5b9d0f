use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{determine, DetermineReport, DeterminingQuery, RhoSchedule};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::linmap::{LinearMap, MapVerdict};
use crate::scalar::Scalar;
use crate::space::NormedSpace;
use crate::systems::{InverseSystem, SubspaceGenerator};

/// Column basis `B` of the range of `g` and coordinates `C` with `B C = g`.
fn factor_range(g: &Matrix) -> Result<(Matrix, Matrix)> {
    let pivots = g.transpose().independent_rows();
    if pivots.is_empty() {
        return Err(Error::Unsupported("generator map is zero at some stage".to_string()));
    }
    let cols: Vec<Vector> = pivots.iter().map(|&j| g.column(j)).collect();
    let basis = Matrix::from_columns(&cols, g.rows());
    let coords: Vec<Vector> = (0..g.cols())
        .map(|j| basis.solve(&g.column(j)).ok_or(Error::NotInRange))
        .collect::<Result<_>>()?;
    Ok((basis.clone(), Matrix::from_columns(&coords, cols.len())))
}

/// `V = R^d` normed by `a ↦ ‖g_M a‖_M`.
fn slice_space(q: &DeterminingQuery) -> Result<Arc<NormedSpace>> {
    let m = q.eval_stage;
    let g = q.gen.map(m)?;
    if g.rank() < q.param_dim() {
        return Err(Error::InvalidQuery("g_M is not injective".to_string()));
    }
    Ok(Arc::new(q.system().stage(m)?.section(g, "V")?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GfdaStage {
    pub stage: usize,
    pub image_dim: usize,
    pub quotient: MapVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GfdaReport {
    pub stages: Vec<GfdaStage>,
    pub quotient_pass: bool,
    pub determining: DetermineReport,
    pub pass: bool,
}

/// For each stage `i <= stages`, whether `a ↦ g_i(a)` is a quotient map
/// from `V` onto its image with the norm induced from `W_i`; combined with
/// the determining verdict of the query.
pub fn gfda_check(q: &DeterminingQuery, stages: usize) -> Result<GfdaReport> {
    q.validate()?;
    let v = slice_space(q)?;
    let mut out = Vec::new();
    for i in 1..=stages.min(q.eval_stage) {
        let (basis, coords) = factor_range(q.gen.map(i)?)?;
        let image = Arc::new(q.system().stage(i)?.section(&basis, format!("π_{i}(V)"))?);
        let map = LinearMap::new(v.clone(), image, coords)?;
        out.push(GfdaStage { stage: i, image_dim: basis.cols(), quotient: map.is_quotient_map()? });
    }
    let quotient_pass = out.iter().all(|s| s.quotient.pass);
    let determining = determine(q)?;
    let pass = quotient_pass && determining.verdict == super::Verdict::Certificate;
    Ok(GfdaReport { stages: out, quotient_pass, determining, pass })
}

/// The images `π_j(V)` renormed with the quotient norm of `V`, i.e. with
/// unit ball `C_j(B_V)`, as an inverse system with its generator `C_j`.
#[derive(Clone, Debug)]
pub struct RenormedImages {
    pub system: InverseSystem,
    pub gen: SubspaceGenerator,
}

impl RenormedImages {
    /// The query with the same schedule, `ε` and `M` on the renormed images.
    pub fn query(&self, q: &DeterminingQuery) -> Result<DeterminingQuery> {
        let mut r = DeterminingQuery::new(self.gen.clone(), q.rho.clone(), q.eps.clone(), q.eval_stage)?;
        r.search = q.search.clone();
        r.certify = q.certify.clone();
        Ok(r)
    }
}

pub fn renormed_images(q: &DeterminingQuery) -> Result<RenormedImages> {
    let v = slice_space(q)?;
    let ext = v.ball_extreme_points()?;
    let m = q.eval_stage;
    let mut factors = Vec::with_capacity(m);
    let mut spaces = Vec::with_capacity(m);
    for j in 1..=m {
        let (basis, coords) = factor_range(q.gen.map(j)?)?;
        let verts = ext.iter().map(|x| coords.mul_vec(x)).collect();
        spaces.push(Arc::new(NormedSpace::vpoly(verts)?.with_label(format!("π_{j}(V)~"))));
        factors.push((basis, coords));
    }
    let mut bonds = Vec::with_capacity(m - 1);
    for j in 1..m {
        let theta = q.system().bond(j)?;
        let image = theta.matrix().mul(&factors[j].0);
        let basis = &factors[j - 1].0;
        let cols: Vec<Vector> = (0..image.cols())
            .map(|c| basis.solve(&image.column(c)).ok_or(Error::NotInRange))
            .collect::<Result<_>>()?;
        bonds.push(Matrix::from_columns(&cols, basis.cols()));
    }
    let system = InverseSystem::explicit(spaces, bonds, true)?;
    let gen = SubspaceGenerator::new(system.clone(), factors.into_iter().map(|(_, c)| c).collect())?;
    Ok(RenormedImages { system, gen })
}

/// `ℓ1` drop system with `M = N + 2` and `V = span(e_1 + e_M, e_{M-1} − e_M)`.
/// No pair satisfies the schedule at stage `N` when `ρ_N <= 1/2`, so the
/// query certifies vacuously, while the restricted projections fail to be
/// quotient maps at stages `<= N`.
pub fn renorm_instance(n: usize, eps: Scalar) -> Result<DeterminingQuery> {
    let m = n + 2;
    let sys = InverseSystem::l1_drop(m);
    let mut top = Matrix::zeros(m, 2);
    top[(0, 0)] = Scalar::one();
    top[(m - 1, 0)] = Scalar::one();
    top[(m - 2, 1)] = Scalar::one();
    top[(m - 1, 1)] = -Scalar::one();
    let gen = SubspaceGenerator::from_top(sys, top)?;
    DeterminingQuery::new(gen, RhoSchedule::harmonic(n), eps, m)
}
