use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::scalar::Scalar;
use crate::systems::{invlim_convergence, Bound, CompatibleVector, ConvergenceOptions, ConvergenceReport, InverseSystem};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticOptions {
    pub tol: Scalar,
    /// First index (0-based) of the tail; default: second half.
    #[serde(default)]
    pub tail_from: Option<usize>,
    /// Stage `I` at which uniformity is read off; default: the largest
    /// stage up to which the tail is stagewise Cauchy.
    #[serde(default)]
    pub horizon: Option<usize>,
}

impl DiagnosticOptions {
    pub fn new(tol: Scalar) -> Self {
        DiagnosticOptions { tol, tail_from: None, horizon: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDiagnostics {
    /// `u_i = max_k (‖v_k‖ − ‖π_i v_k‖)` over all terms, `i = 1..=M`.
    pub profile: Vec<Scalar>,
    /// The same maximum over the tail only.
    pub tail_profile: Vec<Scalar>,
    pub nonincreasing: bool,
    pub tail_from: usize,
    pub horizon: Option<usize>,
    /// Stage-`M` component of the limit candidate `w`.
    pub limit: Option<Vector>,
    pub limit_norm: Option<Scalar>,
    /// `|‖v_k‖ − ‖w‖|` over the tail.
    pub norm_residuals: Vec<Scalar>,
    /// `‖v_k − w‖` over the tail.
    pub strong_residuals: Vec<Scalar>,
    pub stagewise: ConvergenceReport,
    /// Stage-`M` norms bound the limit norms from below.
    pub norm_bound: Bound,
}

impl SequenceDiagnostics {
    fn max_residual(xs: &[Scalar]) -> Scalar {
        xs.iter().cloned().fold(Scalar::zero(), Scalar::max)
    }

    pub fn strongly_convergent(&self, tol: &Scalar) -> bool {
        self.limit.is_some() && Self::max_residual(&self.strong_residuals) <= *tol
    }
}

fn common_system(seq: &[CompatibleVector]) -> Result<InverseSystem> {
    let Some(first) = seq.first() else {
        return Err(Error::InvalidQuery("empty sequence".to_string()));
    };
    let system = first.system().clone();
    if seq.iter().any(|v| v.system() != &system) {
        return Err(Error::Incompatible("vectors live in different systems".to_string()));
    }
    Ok(system)
}

fn diagnose(seq: &[CompatibleVector], opts: &DiagnosticOptions) -> Result<SequenceDiagnostics> {
    let system = common_system(seq)?;
    let m = system.max_stage();
    let stagewise = invlim_convergence(
        seq,
        &ConvergenceOptions { tol: opts.tol.clone(), tail_from: opts.tail_from, check_through: None },
    )?;
    let tail_from = stagewise.tail_from;
    let norms: Vec<Vec<Scalar>> = seq
        .iter()
        .map(|v| (1..=m).map(|j| v.norm_at(j)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let drop = |k: usize, i: usize| &norms[k][m - 1] - &norms[k][i - 1];
    let profile_over = |ks: std::ops::Range<usize>| -> Vec<Scalar> {
        (1..=m)
            .map(|i| ks.clone().map(|k| drop(k, i)).fold(Scalar::zero(), Scalar::max))
            .collect()
    };
    let profile = profile_over(0..seq.len());
    let tail_profile = profile_over(tail_from..seq.len());
    let nonincreasing = profile.windows(2).all(|w| w[0] >= w[1]);
    let horizon = match opts.horizon {
        Some(i) if i == 0 || i > m => return Err(Error::StageOutOfRange { stage: i, max: m }),
        Some(i) => Some(i),
        None => {
            let cauchy = stagewise.stages.iter().take_while(|s| s.cauchy).count();
            (cauchy > 0).then_some(cauchy)
        }
    };
    let last = seq.last().unwrap();
    let limit = match horizon {
        Some(i) if system.is_quotient_system() => Some(system.lift_to_top(i, last.project(i)?.clone())?),
        Some(_) => Some(last.clone()),
        None => None,
    };
    let top = system.stage(m)?;
    let (limit_vec, limit_norm, norm_residuals, strong_residuals) = match &limit {
        Some(w) => {
            let wn = top.norm(w.tail())?;
            let nr = (tail_from..seq.len()).map(|k| (&norms[k][m - 1] - &wn).abs()).collect();
            let sr = seq[tail_from..]
                .iter()
                .map(|v| top.norm(&linalg::sub(v.tail(), w.tail())))
                .collect::<Result<_>>()?;
            (Some(w.tail().clone()), Some(wn), nr, sr)
        }
        None => (None, None, Vec::new(), Vec::new()),
    };
    Ok(SequenceDiagnostics {
        profile,
        tail_profile,
        nonincreasing,
        tail_from,
        horizon,
        limit: limit_vec,
        limit_norm,
        norm_residuals,
        strong_residuals,
        stagewise,
        norm_bound: Bound::Lower,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpReport {
    pub diagnostics: SequenceDiagnostics,
    /// `u_I < tol` over the tail at the horizon `I`; `None` without one.
    pub uniform: Option<bool>,
    /// `N_1 < N_2 < …` with `u_{N_ℓ} < 1/ℓ`, as far as `M` allows.
    pub blocks: Vec<usize>,
    pub strong: bool,
}

/// Uniformity of `‖π_i v_k‖ → ‖v_k‖` in `k`.
pub fn dp_diagnostic(seq: &[CompatibleVector], opts: &DiagnosticOptions) -> Result<DpReport> {
    let diagnostics = diagnose(seq, opts)?;
    let uniform = diagnostics.horizon.map(|i| diagnostics.tail_profile[i - 1] < opts.tol);
    let mut blocks = Vec::new();
    let mut from = 1;
    for l in 1.. {
        let bound = Scalar::ratio(1, l);
        match (from..=diagnostics.profile.len()).find(|&i| diagnostics.profile[i - 1] < bound) {
            Some(i) => {
                blocks.push(i);
                from = i + 1;
            }
            None => break,
        }
    }
    let strong = diagnostics.strongly_convergent(&opts.tol);
    Ok(DpReport { diagnostics, uniform, blocks, strong })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnpReport {
    pub diagnostics: SequenceDiagnostics,
    /// Some stage is stagewise Cauchy within `tol`; otherwise the sequence
    /// is not weak*-convergent in the surrogate sense.
    pub weak_star: bool,
    /// `max |‖v_k‖ − ‖w‖| <= tol` over the tail.
    pub norms_converge: Option<bool>,
    pub strong: bool,
}

/// Convergence of `‖v_k‖` to the norm of the stagewise limit candidate.
pub fn anp_diagnostic(seq: &[CompatibleVector], opts: &DiagnosticOptions) -> Result<AnpReport> {
    let diagnostics = diagnose(seq, opts)?;
    let weak_star = diagnostics.horizon.is_some();
    let norms_converge = weak_star
        .then(|| SequenceDiagnostics::max_residual(&diagnostics.norm_residuals) <= opts.tol);
    let strong = diagnostics.strongly_convergent(&opts.tol);
    Ok(AnpReport { diagnostics, weak_star, norms_converge, strong })
}

/// `‖v_k‖ − ‖w‖ = (‖v_k‖ − ‖π_i v_k‖) + (‖π_i v_k‖ − ‖π_i w‖) + (‖π_i w‖ − ‖w‖)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eq3Terms {
    pub k: usize,
    pub stage: usize,
    pub drop: Scalar,
    pub stagewise: Scalar,
    pub limit_drop: Scalar,
    pub total: Scalar,
    pub identity_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub anp: Option<bool>,
    pub dp: Option<bool>,
    pub agree: bool,
    pub strong_anp: bool,
    pub strong_dp: bool,
    pub horizon: Option<usize>,
    /// Smallest `i` with `‖w‖ − ‖π_i w‖ < tol/3`.
    pub i1: Option<usize>,
    /// Smallest tail index from which `‖π_{I_1}(v_k − w)‖ < tol/3`.
    pub k1: Option<usize>,
    /// Smallest tail index from which `|‖v_k‖ − ‖w‖| < tol/3`.
    pub k2: Option<usize>,
    pub terms: Vec<Eq3Terms>,
}

/// Both criteria side by side, with the three-term decomposition at the
/// horizon for every tail index. Disagreement signals a defect.
pub fn equivalence_witness(seq: &[CompatibleVector], opts: &DiagnosticOptions) -> Result<EquivalenceReport> {
    let anp = anp_diagnostic(seq, opts)?;
    let dp = dp_diagnostic(seq, opts)?;
    let d = &anp.diagnostics;
    let mut report = EquivalenceReport {
        anp: anp.norms_converge,
        dp: dp.uniform,
        agree: anp.norms_converge == dp.uniform,
        strong_anp: anp.strong,
        strong_dp: dp.strong,
        horizon: d.horizon,
        i1: None,
        k1: None,
        k2: None,
        terms: Vec::new(),
    };
    let (Some(i), Some(w)) = (d.horizon, &d.limit) else {
        return Ok(report);
    };
    let system = common_system(seq)?;
    let w = system.compatible_from_tail(w.clone())?;
    let m = system.max_stage();
    let third = &opts.tol / &Scalar::from_int(3);
    let wn = w.norm_at(m)?;
    let mut w_norms = Vec::with_capacity(m);
    for j in 1..=m {
        w_norms.push(w.norm_at(j)?);
    }
    report.i1 = (1..=m).find(|&j| &wn - &w_norms[j - 1] < third);
    let from_where = |ok: &dyn Fn(usize) -> Result<bool>| -> Result<Option<usize>> {
        let mut first = None;
        for k in d.tail_from..seq.len() {
            if ok(k)? {
                first.get_or_insert(k);
            } else {
                first = None;
            }
        }
        Ok(first)
    };
    if let Some(i1) = report.i1 {
        let space = system.stage(i1)?;
        report.k1 = from_where(&|k| Ok(space.norm(&linalg::sub(seq[k].project(i1)?, w.project(i1)?))? < third))?;
    }
    report.k2 = from_where(&|k| Ok((&seq[k].norm_at(m)? - &wn).abs() < third))?;
    for (k, v) in seq.iter().enumerate().skip(d.tail_from) {
        let vm = v.norm_at(m)?;
        let vi = v.norm_at(i)?;
        let drop = &vm - &vi;
        let stagewise = &vi - &w_norms[i - 1];
        let limit_drop = &w_norms[i - 1] - &wn;
        let total = &vm - &wn;
        let identity_holds = &(&drop + &stagewise) + &limit_drop == total;
        report.terms.push(Eq3Terms { k, stage: i, drop, stagewise, limit_drop, total, identity_holds });
    }
    Ok(report)
}
