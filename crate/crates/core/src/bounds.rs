//! Sharp two-sided bounds for `ξ_(m)` and `η_(m)` in terms of `h(R)` and
//! `h'(R)`, with a seeded random harness over odd-polynomial warps.
//!
//! Under `Ric ≥ 0` with convex boundary:
//!
//! * `n = 2`: `m²(2+2m) h'/h³ ≤ ξ ≤ m²(2+2m)/h³`
//! * `n = 3`: `ξ ≥ m²(3+2m) h'/h³`
//! * `n ≥ 4`: `ξ ≥ m²(n+2m)/h³`
//! * `(n+2m) h'/h ≤ η ≤ (n+2m)/h` and `η_(m+1)/η_(m) ≥ (n+2m+2)/(n+2m)`
//!
//! Under `Ric ≤ 0` the inequalities reverse (only the upper bounds survive
//! for `ξ` when `n ≥ 3` and for `η_(m≥1)` when `n = 3`). Equality holds only
//! for the flat ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{self, MethodChoice, Problem};
use crate::error::{Result, SteklovError};
use crate::radial::{ManifoldSpec, RadialOptions};
use crate::warp::{check_hypotheses, HypothesisReport, WarpSpec};

/// Samples used for the hypothesis checks.
pub const CHECK_GRID: usize = 512;
/// Slack below `tol · value` counts as equality.
pub const EQUALITY_TOL: f64 = 1e-8;
/// `max |h' - 1|` allowed for a flat warp.
pub const FLAT_SLOPE_TOL: f64 = 1e-9;
/// Candidate warps tried per fuzz trial before giving up.
pub const SAMPLING_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RicciNonneg,
    RicciNonpos,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Xi,
    Eta,
    EtaRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub kind: BoundKind,
    pub manifold: ManifoldSpec,
    pub m: usize,
    pub regime: Regime,
    pub lower: Option<f64>,
    pub value: f64,
    pub upper: Option<f64>,
    /// `value - lower`.
    pub lower_slack: Option<f64>,
    /// `upper - value`.
    pub upper_slack: Option<f64>,
    pub hypotheses: HypothesisReport,
    pub equality_flag: bool,
}

impl BoundsReport {
    fn assemble(
        kind: BoundKind,
        manifold: &ManifoldSpec,
        m: usize,
        regime: Regime,
        hypotheses: HypothesisReport,
        value: f64,
        (lower, upper): (Option<f64>, Option<f64>),
    ) -> Self {
        let lower_slack = lower.map(|l| value - l);
        let upper_slack = upper.map(|u| u - value);
        let has_bound = lower.is_some() || upper.is_some();
        let tight = [lower_slack, upper_slack]
            .into_iter()
            .flatten()
            .all(|s| s.abs() <= EQUALITY_TOL * value.abs());
        let equality_flag = has_bound && tight && hypotheses.max_slope_defect <= FLAT_SLOPE_TOL;
        BoundsReport {
            kind,
            manifold: manifold.clone(),
            m,
            regime,
            lower,
            value,
            upper,
            lower_slack,
            upper_slack,
            hypotheses,
            equality_flag,
        }
    }

    /// Most negative slack relative to the value; `None` without bounds.
    pub fn worst_relative_slack(&self) -> Option<f64> {
        [self.lower_slack, self.upper_slack]
            .into_iter()
            .flatten()
            .map(|s| s / self.value.abs())
            .reduce(f64::min)
    }

    /// Some applicable inequality fails by more than `rel_tol · value`.
    pub fn violated(&self, rel_tol: f64) -> bool {
        self.worst_relative_slack().is_some_and(|s| s < -rel_tol)
    }
}

/// Which family of inequalities applies.
pub fn regime(hyp: &HypothesisReport) -> Regime {
    if !hyp.convex_boundary {
        Regime::NotApplicable
    } else if hyp.hypotheses_hold && hyp.ricci_nonneg {
        Regime::RicciNonneg
    } else if hyp.ricci_nonpos {
        Regime::RicciNonpos
    } else {
        Regime::NotApplicable
    }
}

fn value_of(problem: Problem, manifold: &ManifoldSpec, m: usize) -> Result<f64> {
    eigen::eigenvalue(
        problem,
        manifold,
        m,
        MethodChoice::Auto,
        &RadialOptions::default(),
    )
    .map(|r| r.value)
}

fn xi_bounds(n: usize, m: usize, h: f64, dh: f64, regime: Regime) -> (Option<f64>, Option<f64>) {
    let (nf, mf) = (n as f64, m as f64);
    let c = mf * mf * (nf + 2.0 * mf) / h.powi(3);
    match (regime, n) {
        (Regime::RicciNonneg, 2) => (Some(c * dh), Some(c)),
        (Regime::RicciNonneg, 3) => (Some(c * dh), None),
        (Regime::RicciNonneg, _) => (Some(c), None),
        (Regime::RicciNonpos, 2) => (Some(c), Some(c * dh)),
        (Regime::RicciNonpos, 3) => (None, Some(c * dh)),
        (Regime::RicciNonpos, _) => (None, Some(c)),
        (Regime::NotApplicable, _) => (None, None),
    }
}

fn eta_bounds(n: usize, m: usize, h: f64, dh: f64, regime: Regime) -> (Option<f64>, Option<f64>) {
    let c = (n + 2 * m) as f64 / h;
    match regime {
        Regime::RicciNonneg => (Some(c * dh), Some(c)),
        Regime::RicciNonpos if m >= 1 && n == 3 => (None, Some(c * dh)),
        Regime::RicciNonpos => (Some(c), Some(c * dh)),
        Regime::NotApplicable => (None, None),
    }
}

fn setup(manifold: &ManifoldSpec) -> (HypothesisReport, Regime, f64, f64) {
    let hyp = check_hypotheses(manifold, CHECK_GRID);
    let reg = regime(&hyp);
    let (h, dh, _) = manifold.boundary_warp();
    (hyp, reg, h, dh)
}

pub fn verify_xi_bounds(manifold: &ManifoldSpec, m: usize) -> Result<BoundsReport> {
    let value = value_of(Problem::Xi, manifold, m)?;
    let (hyp, reg, h, dh) = setup(manifold);
    let b = xi_bounds(manifold.n, m, h, dh, reg);
    Ok(BoundsReport::assemble(
        BoundKind::Xi,
        manifold,
        m,
        reg,
        hyp,
        value,
        b,
    ))
}

pub fn verify_eta_bounds(manifold: &ManifoldSpec, m: usize) -> Result<BoundsReport> {
    let value = value_of(Problem::Eta, manifold, m)?;
    let (hyp, reg, h, dh) = setup(manifold);
    let b = eta_bounds(manifold.n, m, h, dh, reg);
    Ok(BoundsReport::assemble(
        BoundKind::Eta,
        manifold,
        m,
        reg,
        hyp,
        value,
        b,
    ))
}

/// `η_(m+1)/η_(m)` against `(n+2m+2)/(n+2m)`; only a lower bound, only for `Ric ≥ 0`.
pub fn verify_eta_ratio(manifold: &ManifoldSpec, m: usize) -> Result<BoundsReport> {
    let value = value_of(Problem::Eta, manifold, m + 1)? / value_of(Problem::Eta, manifold, m)?;
    let (hyp, reg, _, _) = setup(manifold);
    let n = manifold.n;
    let lower = (reg == Regime::RicciNonneg).then(|| (n + 2 * m + 2) as f64 / (n + 2 * m) as f64);
    let reg = if lower.is_some() {
        reg
    } else {
        Regime::NotApplicable
    };
    Ok(BoundsReport::assemble(
        BoundKind::EtaRatio,
        manifold,
        m,
        reg,
        hyp,
        value,
        (lower, None),
    ))
}

/// One accepted random warp and every bound checked on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzTrial {
    pub index: usize,
    /// Candidates drawn before one was accepted.
    pub attempts: usize,
    pub manifold: ManifoldSpec,
    pub reports: Vec<BoundsReport>,
}

impl FuzzTrial {
    pub fn violations(&self, rel_tol: f64) -> impl Iterator<Item = &BoundsReport> {
        self.reports.iter().filter(move |r| r.violated(rel_tol))
    }
}

fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `h = r + a₃r³ + a₅r⁵` with `a₃ ∈ [-0.3, 0]`, `a₅ ∈ [-0.05, 0.05]` and
/// `R ∈ [0.2, 2]` until the nonnegative-curvature hypotheses and boundary
/// convexity hold.
pub fn sample_manifold(n: usize, rng: &mut impl Rng) -> Result<(ManifoldSpec, usize)> {
    for attempt in 1..=SAMPLING_BUDGET {
        let a3 = rng.gen_range(-0.3..=0.0);
        let a5 = rng.gen_range(-0.05..=0.05);
        let radius = rng.gen_range(0.2..=2.0);
        let Ok(warp) = WarpSpec::odd_polynomial(vec![a3, a5]) else {
            continue;
        };
        let Ok(manifold) = ManifoldSpec::new(n, radius, warp) else {
            continue;
        };
        let hyp = check_hypotheses(&manifold, CHECK_GRID);
        if regime(&hyp) == Regime::RicciNonneg {
            return Ok((manifold, attempt));
        }
    }
    Err(SteklovError::Sampling {
        attempts: SAMPLING_BUDGET,
        accepted: 0,
    })
}

/// Every bound on `manifold` for modes up to `m_max`.
pub fn verify_all(manifold: &ManifoldSpec, m_max: usize) -> Result<Vec<BoundsReport>> {
    let mut reports = Vec::with_capacity(3 * m_max + 1);
    for m in 1..=m_max {
        reports.push(verify_xi_bounds(manifold, m)?);
    }
    for m in 0..=m_max {
        reports.push(verify_eta_bounds(manifold, m)?);
    }
    for m in 0..m_max {
        reports.push(verify_eta_ratio(manifold, m)?);
    }
    Ok(reports)
}

/// Seeded random verification; trial `i` depends only on `(seed, i)`.
pub fn fuzz_bounds(n: usize, m_max: usize, trials: usize, seed: u64) -> Result<Vec<FuzzTrial>> {
    if n < 2 {
        return Err(SteklovError::InvalidInput(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let results: Vec<Result<FuzzTrial>> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = trial_rng(seed, index);
            let (manifold, attempts) = sample_manifold(n, &mut rng).map_err(|e| match e {
                SteklovError::Sampling { attempts, .. } => SteklovError::Sampling {
                    attempts,
                    accepted: index,
                },
                e => e,
            })?;
            let reports = verify_all(&manifold, m_max)?;
            Ok(FuzzTrial {
                index,
                attempts,
                manifold,
                reports,
            })
        })
        .collect();
    results.into_iter().collect()
}
