use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Counterexample, DeterminingQuery, MarginMode, PairEvaluation, StageData, Verdict, CERTIFICATE_STATEMENT};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::linmap::LinearMap;
use crate::scalar::Scalar;
use crate::space::NormedSpace;

/// Lipschitz constants of the constraint functions with respect to the
/// max-norm on `(a, a')`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    /// `‖g_i : ℓ∞^d → W_i‖` for `i = 1..=N`, then `i = M`.
    pub generator_norms: Vec<Scalar>,
    /// `(1 − ρ_i)‖g_M‖ + ‖g_i‖`.
    pub rho: Vec<Scalar>,
    /// `‖g_M‖/N + 2‖g_N‖`.
    pub close: Scalar,
    /// `(2 + ε)‖g_M‖`.
    pub separation: Scalar,
}

impl LipschitzConstants {
    fn total(&self) -> Scalar {
        let mut t = &self.close + &self.separation;
        for r in &self.rho {
            t = &t + &(r + r);
        }
        t
    }
}

pub fn lipschitz_constants(q: &DeterminingQuery) -> Result<LipschitzConstants> {
    let data = q.stage_data()?;
    constants(q, &data)
}

fn constants(q: &DeterminingQuery, data: &StageData) -> Result<LipschitzConstants> {
    let box_space = Arc::new(NormedSpace::linf(q.param_dim()));
    let norms = data
        .spaces
        .iter()
        .zip(&data.maps)
        .map(|(s, g)| Ok(LinearMap::new(box_space.clone(), s.clone(), g.clone())?.operator_norm()?.upper))
        .collect::<Result<Vec<Scalar>>>()?;
    let n = q.n();
    let top = &norms[n];
    let rho = (0..n)
        .map(|i| &(&(Scalar::one() - q.rho.get(i + 1)) * top) + &norms[i])
        .collect();
    let close = &(top / &Scalar::from_int(n as i64)) + &(&norms[n - 1] * &Scalar::from_int(2));
    let separation = &(&Scalar::from_int(2) + &q.eps) * top;
    Ok(LipschitzConstants { generator_norms: norms, rho, close, separation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertifyOutcome {
    Certificate {
        statement: String,
        delta: Scalar,
        cells: usize,
        lipschitz: LipschitzConstants,
    },
    Counterexample {
        counterexample: Counterexample,
        cells: usize,
    },
    Undecided {
        delta: Scalar,
        cells: usize,
        undecided_cells: usize,
        budget_exhausted: bool,
        /// Center of the first undecided cell.
        sample: Option<(Vector, Vector)>,
    },
}

impl CertifyOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            CertifyOutcome::Certificate { .. } => Verdict::Certificate,
            CertifyOutcome::Counterexample { .. } => Verdict::Counterexample,
            CertifyOutcome::Undecided { .. } => Verdict::Undecided,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            CertifyOutcome::Counterexample { counterexample, .. } => Some(counterexample),
            _ => None,
        }
    }
}

struct Cell {
    center: Vec<Scalar>,
    half: Scalar,
}

#[derive(Default)]
struct FacetResult {
    counterexample: Option<Counterexample>,
    cells: usize,
    undecided: usize,
    exhausted: bool,
    sample: Option<(Vector, Vector)>,
}

struct Tests<'a> {
    q: &'a DeterminingQuery,
    lip: &'a LipschitzConstants,
    total: Scalar,
}

impl Tests<'_> {
    fn constant<'b>(&'b self, own: &'b Scalar) -> &'b Scalar {
        match self.q.certify.margin {
            MarginMode::Conservative => &self.total,
            MarginMode::PerConstraint => own,
        }
    }

    /// Some constraint fails on the whole cell of radius `r` around the
    /// evaluated center.
    fn cleared(&self, e: &PairEvaluation, r: &Scalar) -> bool {
        let fails = |value: &Scalar, l: &Scalar| value + &(self.constant(l) * r) <= Scalar::zero();
        let rho_fails = e
            .rho_slacks
            .iter()
            .chain(&e.rho_slacks_prime)
            .zip(self.lip.rho.iter().chain(&self.lip.rho))
            .any(|(s, l)| fails(s, l));
        if rho_fails || fails(&e.close_slack, &self.lip.close) {
            return true;
        }
        let margin = &(&self.q.eps * &e.max_norm) - &e.separation;
        margin - self.constant(&self.lip.separation) * r > Scalar::zero()
    }
}

fn split(x: &[Scalar], facet: usize, d: usize) -> (Vector, Vector) {
    let mut full = x.to_vec();
    full.insert(facet, Scalar::one());
    let b = full.split_off(d);
    (full, b)
}

fn explore(q: &DeterminingQuery, data: &StageData, tests: &Tests, facet: usize, budget: usize) -> Result<FacetResult> {
    let d = q.param_dim();
    let free = 2 * d - 1;
    let delta = &q.certify.delta;
    let mut out = FacetResult::default();
    let mut stack = vec![Cell { center: vec![Scalar::zero(); free], half: Scalar::one() }];
    let two = Scalar::from_int(2);
    while let Some(cell) = stack.pop() {
        if out.cells >= budget {
            out.exhausted = true;
            out.undecided += stack.len() + 1;
            break;
        }
        out.cells += 1;
        let (a, b) = split(&cell.center, facet, d);
        let e = data.evaluate(q, &a, &b)?;
        if e.is_counterexample(&q.eps) {
            out.counterexample = Some(Counterexample { a, a_prime: b, eval_stage: q.eval_stage, evaluation: e });
            return Ok(out);
        }
        if tests.cleared(&e, &cell.half) {
            continue;
        }
        let half = &cell.half / &two;
        if half < *delta {
            out.undecided += 1;
            out.sample.get_or_insert((a, b));
            continue;
        }
        for mask in (0..1usize << free).rev() {
            let center = cell
                .center
                .iter()
                .enumerate()
                .map(|(j, c)| if mask & (1 << j) != 0 { c + &half } else { c - &half })
                .collect();
            stack.push(Cell { center, half: half.clone() });
        }
    }
    Ok(out)
}

/// Exhaustive subdivision of the parameter domain. By homogeneity and the
/// symmetry `(a, a') ↦ (−a, −a')`, every nonzero pair rescales onto a face
/// `x_k = 1` of the cube `[−1, 1]^{2d}`; each face is covered by cells whose
/// centers are evaluated exactly and cleared when some constraint is
/// violated on the whole cell by the Lipschitz bound.
pub fn certify(q: &DeterminingQuery) -> Result<CertifyOutcome> {
    q.validate()?;
    let d = q.param_dim();
    if d > q.certify.max_param_dim {
        return Err(Error::InvalidQuery(format!(
            "parameter dimension {d} exceeds the certification cap {}",
            q.certify.max_param_dim
        )));
    }
    if !q.certify.delta.is_positive() {
        return Err(Error::InvalidQuery("δ must be positive".to_string()));
    }
    let data = q.stage_data()?;
    if data.maps[q.n()].rank() < d {
        return Err(Error::InvalidQuery("g_M is not injective".to_string()));
    }
    let lip = constants(q, &data)?;
    let tests = Tests { q, total: lip.total(), lip: &lip };
    let facets = 2 * d;
    let budget = (q.certify.max_cells / facets).max(1);
    let results = (0..facets)
        .into_par_iter()
        .map(|k| explore(q, &data, &tests, k, budget))
        .collect::<Result<Vec<_>>>()?;
    let cells = results.iter().map(|r| r.cells).sum();
    if let Some(c) = results.iter().find_map(|r| r.counterexample.clone()) {
        return Ok(CertifyOutcome::Counterexample { counterexample: c, cells });
    }
    let undecided_cells: usize = results.iter().map(|r| r.undecided).sum();
    if undecided_cells > 0 {
        return Ok(CertifyOutcome::Undecided {
            delta: q.certify.delta.clone(),
            cells,
            undecided_cells,
            budget_exhausted: results.iter().any(|r| r.exhausted),
            sample: results.into_iter().find_map(|r| r.sample),
        });
    }
    Ok(CertifyOutcome::Certificate {
        statement: CERTIFICATE_STATEMENT.to_string(),
        delta: q.certify.delta.clone(),
        cells,
        lipschitz: lip,
    })
}
