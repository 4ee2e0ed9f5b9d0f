use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Counterexample, DeterminingQuery, StageData};
use crate::error::Result;
use crate::linalg::{self, Vector};
use crate::random;
use crate::scalar::Scalar;

/// Relative margin a float candidate must clear before exact re-verification.
const FLOAT_MARGIN: f64 = 1e-9;
const MIN_STEP: f64 = 1e-9;
const PENALTY_OFFSET: f64 = -1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Counterexample(Counterexample),
    NotFound(NearMiss),
}

impl SearchOutcome {
    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            SearchOutcome::Counterexample(c) => Some(c),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

/// Best pair seen when no counterexample verified. Absence of a
/// counterexample is not a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearMiss {
    /// Objective of the best pair: its violation when the hypotheses hold,
    /// negative otherwise.
    pub best_objective: f64,
    pub a: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub starts: usize,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

struct FloatStages {
    maps: Vec<Vec<Vec<f64>>>,
    n: usize,
    d: usize,
    rho: Vec<f64>,
    eps: f64,
}

impl FloatStages {
    fn new(q: &DeterminingQuery, data: &StageData) -> Self {
        FloatStages {
            maps: data
                .maps
                .iter()
                .map(|g| g.to_rows().iter().map(|r| linalg::to_f64(r)).collect())
                .collect(),
            n: q.n(),
            d: q.param_dim(),
            rho: q.rho.values().iter().map(Scalar::to_f64).collect(),
            eps: q.eps.to_f64(),
        }
    }

    fn apply(&self, k: usize, a: &[f64]) -> Vec<f64> {
        self.maps[k].iter().map(|r| r.iter().zip(a).map(|(x, y)| x * y).sum()).collect()
    }

    /// Violation if every hypothesis holds with margin, else `-1 − deficit`.
    fn objective(&self, data: &StageData, x: &[f64]) -> f64 {
        let (a, b) = x.split_at(self.d);
        let n = self.n;
        let norms = |p: &[f64]| -> Vec<f64> {
            (0..=n).map(|k| data.spaces[k].norm_f64(&self.apply(k, p))).collect()
        };
        let na = norms(a);
        let nb = norms(b);
        let max = na[n].max(nb[n]);
        if !(max > 0.0) || !max.is_finite() {
            return f64::NEG_INFINITY;
        }
        let margin = FLOAT_MARGIN * max;
        let mut deficit = 0.0;
        for ns in [&na, &nb] {
            for i in 0..n {
                let slack = self.rho[i] * ns[n] - (ns[n] - ns[i]);
                deficit += (margin - slack).max(0.0);
            }
        }
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let close = data.spaces[n - 1].norm_f64(&self.apply(n - 1, &diff));
        deficit += (margin - (max / n as f64 - close)).max(0.0);
        if deficit > 0.0 {
            return PENALTY_OFFSET - deficit / max;
        }
        let sep = data.spaces[n].norm_f64(&self.apply(n, &diff));
        sep / max
    }

    fn normalize(&self, data: &StageData, x: &mut [f64]) {
        let (a, b) = x.split_at(self.d);
        let max = data.spaces[self.n]
            .norm_f64(&self.apply(self.n, a))
            .max(data.spaces[self.n].norm_f64(&self.apply(self.n, b)));
        if max > 0.0 && max.is_finite() {
            x.iter_mut().for_each(|c| *c /= max);
        }
    }
}

struct StartResult {
    objective: f64,
    x: Vec<f64>,
    evaluations: usize,
    exhausted: bool,
}

/// Compass search from `x`; first improving direction wins, step halves on
/// failure.
fn pattern_search(f: &FloatStages, data: &StageData, mut x: Vec<f64>, budget: usize) -> StartResult {
    f.normalize(data, &mut x);
    let mut best = f.objective(data, &x);
    let mut evaluations = 1;
    let mut step = 0.5;
    let dim = x.len();
    while step >= MIN_STEP {
        if evaluations >= budget {
            return StartResult { objective: best, x, evaluations, exhausted: true };
        }
        let mut moved = false;
        'dirs: for j in 0..dim {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] += sign * step;
                f.normalize(data, &mut y);
                let val = f.objective(data, &y);
                evaluations += 1;
                if val > best {
                    best = val;
                    x = y;
                    moved = true;
                    break 'dirs;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    StartResult { objective: best, x, evaluations, exhausted: false }
}

/// Basis pairs first, then seeded uniform points of `[-1, 1]^{2d}`.
fn start_point(q: &DeterminingQuery, index: usize) -> Vec<f64> {
    let d = q.param_dim();
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for s in [1.0, -1.0] {
                if i != j || s < 0.0 {
                    let mut x = vec![0.0; 2 * d];
                    x[i] = 1.0;
                    x[d + j] = s;
                    pairs.push(x);
                }
            }
        }
    }
    if index < pairs.len() {
        return pairs.swap_remove(index);
    }
    let mut rng = random::rng(q.search.seed, index as u64);
    (0..2 * d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Multistart derivative-free search for a counterexample. Every returned
/// counterexample has been re-evaluated exactly.
pub fn search(q: &DeterminingQuery) -> Result<SearchOutcome> {
    q.validate()?;
    let data = q.stage_data()?;
    let f = FloatStages::new(q, &data);
    let starts = q.search.starts.max(1);
    let mut results: Vec<(usize, StartResult)> = (0..starts)
        .into_par_iter()
        .map(|s| (s, pattern_search(&f, &data, start_point(q, s), q.search.budget)))
        .collect();
    results.sort_by(|(ia, a), (ib, b)| b.objective.total_cmp(&a.objective).then(ia.cmp(ib)));
    let evaluations = results.iter().map(|(_, r)| r.evaluations).sum();
    let exhausted = results.iter().any(|(_, r)| r.exhausted);
    let d = q.param_dim();
    for (_, r) in results.iter().filter(|(_, r)| r.objective >= f.eps) {
        let (a, b) = r.x.split_at(d);
        let (a, b): (Vector, Vector) = (linalg::from_f64(a), linalg::from_f64(b));
        let e = data.evaluate(q, &a, &b)?;
        if e.is_counterexample(&q.eps) {
            return Ok(SearchOutcome::Counterexample(Counterexample {
                a,
                a_prime: b,
                eval_stage: q.eval_stage,
                evaluation: e,
            }));
        }
    }
    let (_, best) = &results[0];
    Ok(SearchOutcome::NotFound(NearMiss {
        best_objective: best.objective,
        a: best.x[..d].to_vec(),
        a_prime: best.x[d..].to_vec(),
        starts,
        evaluations,
        budget_exhausted: exhausted,
    }))
}
