//! Lipschitz curves `t ↦ (f_k(t))_k` into the coordinate-drop inverse
//! limits and their dyadic difference quotients.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::PNorm;
use crate::systems::{Builtin, CompatibleVector, InverseSystem};

pub const SLOPE_THRESHOLD: f64 = -0.8;
pub const FLOOR_THRESHOLD: f64 = 0.3;
pub const DEFAULT_STAGE: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Sine,
    /// Triangle wave `asin(sin x)`: period `2π`, slopes `±1`.
    Sawtooth,
}

impl Waveform {
    fn eval(self, x: f64) -> f64 {
        match self {
            Waveform::Sine => x.sin(),
            Waveform::Sawtooth => x.sin().asin(),
        }
    }

    /// `w(x + y) − w(x)`.
    fn increment(self, x: f64, y: f64) -> f64 {
        match self {
            Waveform::Sine => 2.0 * (x + y / 2.0).cos() * (y / 2.0).sin(),
            Waveform::Sawtooth => self.eval(x + y) - self.eval(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveRule {
    /// `f_k(t) = decay^{-k} w(growth^k t)`, `k >= 1`.
    Oscillating { decay: f64, growth: f64, waveform: Waveform },
    /// `f(t) = t·direction`, zero beyond the listed coordinates.
    Linear { direction: Vec<f64> },
    Constant { point: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateCurve {
    pub label: String,
    pub system: Builtin,
    pub rule: CurveRule,
}

impl CoordinateCurve {
    pub fn new(label: impl Into<String>, system: Builtin, rule: CurveRule) -> Result<Self> {
        if system.direction() != crate::systems::Direction::Inverse {
            return Err(Error::InvalidQuery("curves need a coordinate-drop system".to_string()));
        }
        if let CurveRule::Oscillating { decay, growth, .. } = rule {
            if !(decay > 0.0 && growth > 0.0 && decay.is_finite() && growth.is_finite()) {
                return Err(Error::InvalidQuery("decay and growth must be positive".to_string()));
            }
        }
        Ok(CoordinateCurve { label: label.into(), system, rule })
    }

    /// `f_k(t) = 4^{-k} sin(2^k t)` in `lim← ℓ1^i`.
    pub fn l1_canonical() -> Self {
        CoordinateCurve::new(
            "l1",
            Builtin::L1Drop,
            CurveRule::Oscillating { decay: 4.0, growth: 2.0, waveform: Waveform::Sine },
        )
        .unwrap()
    }

    /// `f_k(t) = 2^{-k} sin(2^k t)` in `lim← ℓ∞^i`.
    pub fn c0_canonical() -> Self {
        CoordinateCurve::new(
            "c0",
            Builtin::LinfDrop,
            CurveRule::Oscillating { decay: 2.0, growth: 2.0, waveform: Waveform::Sine },
        )
        .unwrap()
    }

    pub fn p(&self) -> PNorm {
        self.system.p()
    }

    /// `(f_1(t), …, f_M(t))`.
    pub fn eval(&self, t: f64, m: usize) -> Vec<f64> {
        (1..=m).map(|k| self.coordinate(k, t)).collect()
    }

    pub fn coordinate(&self, k: usize, t: f64) -> f64 {
        match &self.rule {
            CurveRule::Oscillating { decay, growth, waveform } => {
                decay.powi(-(k as i32)) * waveform.eval(growth.powi(k as i32) * t)
            }
            CurveRule::Linear { direction } => t * direction.get(k - 1).copied().unwrap_or(0.0),
            CurveRule::Constant { point } => point.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    /// `(f_k(t + h) − f_k(t)) / h`.
    pub fn quotient_coordinate(&self, k: usize, t: f64, h: f64) -> f64 {
        match &self.rule {
            CurveRule::Oscillating { decay, growth, waveform } => {
                let b = growth.powi(k as i32);
                decay.powi(-(k as i32)) * waveform.increment(b * t, b * h) / h
            }
            CurveRule::Linear { direction } => direction.get(k - 1).copied().unwrap_or(0.0),
            CurveRule::Constant { .. } => 0.0,
        }
    }

    fn check_domain(t: f64, h: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&(t + h)) || h == 0.0 {
            return Err(Error::InvalidQuery(format!("t = {t}, t + h = {} outside [0, 1]", t + h)));
        }
        Ok(())
    }

    fn quotient_f64(&self, t: f64, h: f64, m: usize) -> Vec<f64> {
        (1..=m).map(|k| self.quotient_coordinate(k, t, h)).collect()
    }

    /// `Σ_k Lip(f_k)` or `sup_k Lip(f_k)` according to the norm;
    /// `None` when unbounded.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match &self.rule {
            CurveRule::Oscillating { decay, growth, .. } => {
                let r = growth / decay;
                match self.p() {
                    PNorm::One => (r < 1.0).then(|| r / (1.0 - r)),
                    PNorm::Two => (r < 1.0).then(|| (r * r / (1.0 - r * r)).sqrt()),
                    PNorm::Inf => (r <= 1.0).then_some(r),
                }
            }
            CurveRule::Linear { direction } => Some(norm(self.p(), direction)),
            CurveRule::Constant { .. } => Some(0.0),
        }
    }

    /// Upper bound on the contribution of coordinates `k > m` to a gap
    /// `‖D_h − D_{h/2}‖`; `None` when not summable.
    pub fn tail_bound(&self, m: usize) -> Option<f64> {
        match &self.rule {
            CurveRule::Oscillating { decay, growth, .. } => {
                let r = growth / decay;
                let first = 2.0 * r.powi(m as i32 + 1);
                match self.p() {
                    PNorm::One => (r < 1.0).then(|| first / (1.0 - r)),
                    PNorm::Two => (r < 1.0).then(|| first / (1.0 - r * r).sqrt()),
                    PNorm::Inf => (r < 1.0).then_some(first),
                }
            }
            CurveRule::Linear { direction } | CurveRule::Constant { point: direction } => {
                Some(if direction.len() > m && direction[m..].iter().any(|x| *x != 0.0) {
                    2.0 * norm(self.p(), &direction[m..])
                } else {
                    0.0
                })
            }
        }
    }

    /// `max (‖f(t) − f(s)‖_M − L|t − s|)` over consecutive and random grid
    /// pairs is at most `tol`.
    pub fn check_lipschitz(&self, grid: &[f64], m: usize, tol: f64) -> Option<bool> {
        let l = self.lipschitz_bound()?;
        let values: Vec<Vec<f64>> = grid.iter().map(|&t| self.eval(t, m)).collect();
        let ok = (0..grid.len()).all(|i| {
            (i + 1..grid.len()).all(|j| {
                let diff: Vec<f64> = values[i].iter().zip(&values[j]).map(|(a, b)| a - b).collect();
                norm(self.p(), &diff) <= l * (grid[i] - grid[j]).abs() + tol
            })
        });
        Some(ok)
    }

    pub fn system(&self, m: usize) -> InverseSystem {
        InverseSystem::builtin(self.system, m).expect("drop builtin")
    }
}

pub fn norm(p: PNorm, x: &[f64]) -> f64 {
    match p {
        PNorm::One => x.iter().map(|v| v.abs()).sum(),
        PNorm::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        PNorm::Inf => x.iter().fold(0.0, |a, v| a.max(v.abs())),
    }
}

/// `(f(t + h) − f(t)) / h` truncated to stage `m`.
pub fn difference_quotient(curve: &CoordinateCurve, t: f64, h: f64, m: usize) -> Result<CompatibleVector> {
    CoordinateCurve::check_domain(t, h)?;
    let q = curve.quotient_f64(t, h, m);
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidQuery("non-finite difference quotient".to_string()));
    }
    curve.system(m).compatible_from_tail(linalg::from_f64(&q))
}

/// `Δ(t, m) = ‖D_{2^{-m}}(t) − D_{2^{-m-1}}(t)‖_M`.
pub fn gap(curve: &CoordinateCurve, t: f64, m: u32, stage: usize) -> Result<f64> {
    let h = (-(m as f64)).exp2();
    CoordinateCurve::check_domain(t, h)?;
    let a = curve.quotient_f64(t, h, stage);
    let b = curve.quotient_f64(t, h / 2.0, stage);
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(norm(curve.p(), &diff))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decay {
    /// Log-scale slope of the gaps below the threshold, or all gaps zero.
    Decaying,
    /// Gaps bounded below by the floor.
    Obstructed,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointScan {
    pub t: f64,
    /// `Δ(t, m)` for `m` in the scanned range.
    pub gaps: Vec<f64>,
    /// Least-squares slope of `log2 Δ` against `m`; `None` if some gap is 0.
    pub slope: Option<f64>,
    pub floor: f64,
    /// `max Δ(t, m+1)/Δ(t, m)`.
    pub max_ratio: Option<f64>,
    pub class: Decay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffQuotientReport {
    pub curve: String,
    pub stage: usize,
    pub scales: Vec<u32>,
    /// Added to each gap, bounds the gap of the untruncated curve.
    pub tail_bound: Option<f64>,
    pub points: Vec<PointScan>,
    pub decaying: usize,
    pub obstructed: usize,
    pub indeterminate: usize,
}

fn slope(ms: &[u32], gaps: &[f64]) -> Option<f64> {
    if gaps.iter().any(|g| *g <= 0.0) || ms.len() < 2 {
        return None;
    }
    let n = ms.len() as f64;
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

fn classify(gaps: &[f64], slope: Option<f64>, floor: f64) -> Decay {
    if gaps.iter().all(|g| *g == 0.0) {
        return Decay::Decaying;
    }
    match slope {
        Some(s) if s < SLOPE_THRESHOLD => Decay::Decaying,
        _ if floor >= FLOOR_THRESHOLD => Decay::Obstructed,
        _ => Decay::Indeterminate,
    }
}

pub fn scan_point(curve: &CoordinateCurve, t: f64, scales: &RangeInclusive<u32>, stage: usize) -> Result<PointScan> {
    let ms: Vec<u32> = scales.clone().collect();
    let gaps = ms.iter().map(|&m| gap(curve, t, m, stage)).collect::<Result<Vec<_>>>()?;
    let slope = slope(&ms, &gaps);
    let floor = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = gaps
        .windows(2)
        .map(|w| (w[0] > 0.0).then(|| w[1] / w[0]))
        .collect::<Option<Vec<_>>>()
        .and_then(|r| r.into_iter().reduce(f64::max));
    Ok(PointScan { t, class: classify(&gaps, slope, floor), gaps, slope, floor, max_ratio })
}

pub fn differentiability_scan(
    curve: &CoordinateCurve,
    ts: &[f64],
    scales: RangeInclusive<u32>,
    stage: usize,
) -> Result<DiffQuotientReport> {
    let points = ts
        .par_iter()
        .map(|&t| scan_point(curve, t, &scales, stage))
        .collect::<Result<Vec<_>>>()?;
    let count = |c: Decay| points.iter().filter(|p| p.class == c).count();
    Ok(DiffQuotientReport {
        curve: curve.label.clone(),
        stage,
        scales: scales.collect(),
        tail_bound: curve.tail_bound(stage),
        decaying: count(Decay::Decaying),
        obstructed: count(Decay::Obstructed),
        indeterminate: count(Decay::Indeterminate),
        points,
    })
}

/// `t_j = j/n · (1 − 2^{-m_min})`, `j = 0..n`, so that `t + 2^{-m} <= 1`.
pub fn uniform_grid(n: usize, m_min: u32) -> Vec<f64> {
    let span = 1.0 - (-(m_min as f64)).exp2();
    (0..n).map(|j| j as f64 / n as f64 * span).collect()
}

impl DiffQuotientReport {
    /// `curve,t,m,gap` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,t,m,gap\n");
        for p in &self.points {
            for (m, g) in self.scales.iter().zip(&p.gaps) {
                let _ = writeln!(out, "{},{},{},{:e}", self.curve, p.t, m, g);
            }
        }
        out
    }
}

/// Configuration for a batch of scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    #[serde(default)]
    pub curves: Vec<CoordinateCurve>,
    /// Include the canonical `ℓ1` and `c0` curves.
    #[serde(default)]
    pub canonical: bool,
    #[serde(default = "CurveConfig::default_points")]
    pub grid_points: usize,
    #[serde(default = "CurveConfig::default_m_min")]
    pub m_min: u32,
    #[serde(default = "CurveConfig::default_m_max")]
    pub m_max: u32,
    #[serde(default = "CurveConfig::default_stage")]
    pub stage: usize,
}

impl CurveConfig {
    fn default_points() -> usize {
        100
    }
    fn default_m_min() -> u32 {
        4
    }
    fn default_m_max() -> u32 {
        16
    }
    fn default_stage() -> usize {
        DEFAULT_STAGE
    }

    pub fn canonical() -> Self {
        CurveConfig {
            curves: Vec::new(),
            canonical: true,
            grid_points: 100,
            m_min: 4,
            m_max: 16,
            stage: DEFAULT_STAGE,
        }
    }

    pub fn all_curves(&self) -> Vec<CoordinateCurve> {
        let mut out = Vec::new();
        if self.canonical {
            out.push(CoordinateCurve::l1_canonical());
            out.push(CoordinateCurve::c0_canonical());
        }
        out.extend(self.curves.iter().cloned());
        out
    }

    pub fn run(&self) -> Result<Vec<DiffQuotientReport>> {
        if self.m_min > self.m_max || self.m_min == 0 || self.stage == 0 {
            return Err(Error::InvalidQuery("empty scale range or stage".to_string()));
        }
        let grid = uniform_grid(self.grid_points, self.m_min);
        self.all_curves()
            .iter()
            .map(|c| {
                if let CurveRule::Oscillating { decay, growth, .. } = c.rule {
                    if !(decay > 0.0 && growth > 0.0) {
                        return Err(Error::InvalidQuery(format!("curve {}: bad rule", c.label)));
                    }
                }
                differentiability_scan(c, &grid, self.m_min..=self.m_max, self.stage)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn linear_curve_quotient_is_direction() {
        let c = CoordinateCurve::new("lin", Builtin::L1Drop, CurveRule::Linear { direction: vec![1.0] }).unwrap();
        for (t, h) in [(0.0, 0.5), (0.3, 0.25), (0.9, -0.4)] {
            let d = difference_quotient(&c, t, h, 5).unwrap();
            assert_eq!(d.tail(), &linalg::unit(5, 0));
        }
        let scan = differentiability_scan(&c, &[0.0, 0.5], 1..=6, 5).unwrap();
        assert!(scan.points.iter().all(|p| p.gaps.iter().all(|g| *g == 0.0) && p.class == Decay::Decaying));
    }

    #[test]
    fn c0_quotient_closed_form_at_zero() {
        let c = CoordinateCurve::c0_canonical();
        for m in [3u32, 6, 9] {
            let h = (-(m as f64)).exp2();
            let d = difference_quotient(&c, 0.0, h, 12).unwrap();
            for k in 1..=12usize {
                let x = (k as f64 - m as f64).exp2();
                let expected = x.sin() / x;
                assert!((d.tail()[k - 1].to_f64() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn l1_quotient_norms_bounded() {
        let c = CoordinateCurve::l1_canonical();
        let bound: f64 = (1..=20).map(|k| (-(k as f64)).exp2()).sum();
        for m in 1..10u32 {
            let d = difference_quotient(&c, 0.37, (-(m as f64)).exp2(), 20).unwrap();
            let norms = d.stage_norms().unwrap();
            assert!(norms.norms.iter().all(|n| n.to_f64() <= bound + 1e-12));
        }
    }

    #[test]
    fn c0_gap_at_zero() {
        let c = CoordinateCurve::c0_canonical();
        let contribution = ((2.0f64).sin() / 2.0 - (1.0f64).sin()).abs();
        for m in 4..=16 {
            assert!(gap(&c, 0.0, m, 20).unwrap() >= contribution - 1e-12);
        }
    }

    #[test]
    fn constant_curve_has_zero_gaps() {
        let c = CoordinateCurve::new("const", Builtin::LinfDrop, CurveRule::Constant { point: vec![1.0, -2.0] }).unwrap();
        let r = differentiability_scan(&c, &uniform_grid(10, 4), 4..=8, 6).unwrap();
        assert!(r.points.iter().all(|p| p.gaps.iter().all(|g| *g == 0.0)));
        assert_eq!(r.decaying, 10);
    }

    #[test]
    fn domain_is_enforced() {
        let c = CoordinateCurve::l1_canonical();
        assert!(difference_quotient(&c, 0.9, 0.25, 4).is_err());
        assert!(difference_quotient(&c, -0.1, 0.05, 4).is_err());
        assert!(difference_quotient(&c, 0.5, 0.0, 4).is_err());
    }

    #[test]
    fn lipschitz_bounds_hold_on_grid() {
        let grid = uniform_grid(40, 4);
        for c in [CoordinateCurve::l1_canonical(), CoordinateCurve::c0_canonical()] {
            assert_eq!(c.lipschitz_bound(), Some(1.0));
            assert_eq!(c.check_lipschitz(&grid, 20, 1e-12), Some(true));
        }
        let saw = CoordinateCurve::new(
            "saw",
            Builtin::L2Drop,
            CurveRule::Oscillating { decay: 3.0, growth: 2.0, waveform: Waveform::Sawtooth },
        )
        .unwrap();
        assert_eq!(saw.check_lipschitz(&grid, 12, 1e-12), Some(true));
    }

    #[test]
    fn quotients_are_compatible_vectors() {
        let c = CoordinateCurve::l1_canonical();
        let d = difference_quotient(&c, 0.25, 0.125, 8).unwrap();
        for j in 1..8 {
            assert_eq!(d.project(j).unwrap()[..], d.tail()[..j]);
        }
        assert!(d.norm_at(8).unwrap() >= d.norm_at(3).unwrap());
        assert!(d.norm_at(1).unwrap() > Scalar::zero());
    }

    #[test]
    fn csv_has_a_row_per_gap() {
        let r = differentiability_scan(&CoordinateCurve::c0_canonical(), &[0.0, 0.5], 4..=6, 10).unwrap();
        assert_eq!(r.to_csv().lines().count(), 1 + 2 * 3);
    }
}
