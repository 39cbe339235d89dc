//! Normalized eigenvalue curves on space-form balls, monotonicity verdicts and
//! transition radii.
//!
//! A normalized quantity is `λ(R) · f(R)^p` where `f` is one of the radius
//! factors `R`, `sin R`, `tan(R/2)`, `sin(R/2)` (hyperbolic variants on the
//! hyperbolic side) and `p = 3` for `ξ`, `p = 1` otherwise.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{self, MethodChoice, Problem};
use crate::error::{Result, SteklovError};
use crate::radial::{ManifoldSpec, RadialOptions};
use crate::warp::WarpSpec;

pub use crate::eigen::Geometry;

/// Relative margin on consecutive differences used by default.
pub const DEFAULT_MARGIN: f64 = 1e-9;
/// Smallest curve accepted by [`monotonicity_report`].
pub const MIN_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerFactor {
    GeodesicRadius,
    BoundaryRadius,
    Stereographic,
    AreaFactor,
}

impl NormalizerFactor {
    pub fn eval(self, geometry: Geometry, radius: f64) -> f64 {
        match (self, geometry) {
            (NormalizerFactor::GeodesicRadius, _) => radius,
            (NormalizerFactor::BoundaryRadius, Geometry::Sphere) => radius.sin(),
            (NormalizerFactor::BoundaryRadius, Geometry::Hyperbolic) => radius.sinh(),
            (NormalizerFactor::Stereographic, Geometry::Sphere) => (0.5 * radius).tan(),
            (NormalizerFactor::Stereographic, Geometry::Hyperbolic) => (0.5 * radius).tanh(),
            (NormalizerFactor::AreaFactor, Geometry::Sphere) => (0.5 * radius).sin(),
            (NormalizerFactor::AreaFactor, Geometry::Hyperbolic) => (0.5 * radius).sinh(),
        }
    }

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            NormalizerFactor::GeodesicRadius => "R",
            NormalizerFactor::BoundaryRadius => "sinR",
            NormalizerFactor::Stereographic => "tanHalf",
            NormalizerFactor::AreaFactor => "sinHalf",
        }
    }
}

impl fmt::Display for NormalizerFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for NormalizerFactor {
    type Err = SteklovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "geodesic_radius" => Ok(NormalizerFactor::GeodesicRadius),
            "sinR" | "sinhR" | "boundary_radius" => Ok(NormalizerFactor::BoundaryRadius),
            "tanHalf" | "tanhHalf" | "stereographic" => Ok(NormalizerFactor::Stereographic),
            "sinHalf" | "sinhHalf" | "area_factor" => Ok(NormalizerFactor::AreaFactor),
            _ => Err(SteklovError::InvalidInput(format!(
                "unknown normalizer '{s}' (expected R | sinR | tanHalf | sinHalf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Normalizer {
    pub factor: NormalizerFactor,
    pub power: i32,
}

impl Normalizer {
    /// The natural normalizer for `problem`: cubed for `ξ`, linear otherwise.
    pub fn for_problem(factor: NormalizerFactor, problem: Problem) -> Self {
        Normalizer {
            factor,
            power: problem.scaling_power(),
        }
    }

    pub fn eval(&self, geometry: Geometry, radius: f64) -> f64 {
        self.factor.eval(geometry, radius).powi(self.power)
    }

    pub fn check(&self, problem: Problem) -> Result<()> {
        if self.power != problem.scaling_power() {
            return Err(SteklovError::InvalidInput(format!(
                "{problem} is normalized with power {}, got {}",
                problem.scaling_power(),
                self.power
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    pub est_error: f64,
}

/// Grid point where the eigenvalue could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveGap {
    pub x: f64,
    pub error: String,
}

/// Evaluated curve in grid order; failed points go to `gaps`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    pub gaps: Vec<CurveGap>,
}

impl Curve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.x, p.value)).collect()
    }

    /// Evaluates `f` on every grid point in parallel, keeping grid order.
    pub fn evaluate<F>(grid: &[f64], f: F) -> Curve
    where
        F: Fn(f64) -> Result<(f64, f64)> + Sync,
    {
        let results: Vec<_> = grid.par_iter().map(|&x| (x, f(x))).collect();
        let mut curve = Curve::default();
        for (x, r) in results {
            match r {
                Ok((value, est_error)) => curve.points.push(CurvePoint {
                    x,
                    value,
                    est_error,
                }),
                Err(e) => curve.gaps.push(CurveGap {
                    x,
                    error: e.to_string(),
                }),
            }
        }
        curve
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Increasing,
    Decreasing,
    UnimodalMin,
    NonmonotoneOther,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Radius,
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPoint {
    pub location: f64,
    pub bracket: (f64, f64),
    pub kind: TransitionKind,
    /// `|slope|` at the final midpoint.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub verdict: Verdict,
    pub samples: usize,
    /// Smallest `|Δ|` among the differences that support the verdict
    /// (among all differences for `nonmonotone_other`).
    pub min_gap: f64,
    /// Relative margin: `Δᵢ` counts only when `|Δᵢ| > margin · max(|vᵢ|, |vᵢ₊₁|)`.
    pub margin: f64,
    /// Differences that fell inside the margin.
    pub flat_differences: usize,
    pub sign_changes: usize,
    pub transition: Option<TransitionPoint>,
    /// Index of the grid minimum for `unimodal_min`.
    #[serde(skip)]
    pub turning_index: Option<usize>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SteklovError::InvalidInput(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn geometry_warp(geometry: Geometry) -> WarpSpec {
    match geometry {
        Geometry::Sphere => WarpSpec::sphere(),
        Geometry::Hyperbolic => WarpSpec::hyperbolic(),
    }
}

/// Normalized eigenvalue at a single radius, with its error estimate.
pub fn normalized_value(
    geometry: Geometry,
    n: usize,
    problem: Problem,
    m: usize,
    normalizer: Normalizer,
    radius: f64,
) -> Result<(f64, f64)> {
    let manifold = ManifoldSpec::new(n, radius, geometry_warp(geometry))?;
    let res = eigen::eigenvalue(
        problem,
        &manifold,
        m,
        MethodChoice::Auto,
        &RadialOptions::default(),
    )?;
    let f = normalizer.eval(geometry, radius);
    Ok((res.value * f, res.est_error * res.value.abs() * f))
}

/// `λ(R) · f(R)^p` over `grid`.
pub fn normalized_curve(
    geometry: Geometry,
    n: usize,
    problem: Problem,
    m: usize,
    normalizer: Normalizer,
    grid: &[f64],
) -> Result<Curve> {
    check_grid(grid)?;
    normalizer.check(problem)?;
    if let (Geometry::Sphere, Some(&last)) = (geometry, grid.last()) {
        if grid[0] <= 0.0 || last >= std::f64::consts::PI {
            return Err(SteklovError::Domain(format!(
                "sphere grid must lie in (0, π), got [{}, {last}]",
                grid[0]
            )));
        }
    }
    Ok(Curve::evaluate(grid, |r| {
        normalized_value(geometry, n, problem, m, normalizer, r)
    }))
}

/// Classifies the consecutive differences of `curve`.
pub fn monotonicity_report(curve: &[(f64, f64)], margin: f64) -> Result<MonotonicityReport> {
    if curve.len() < MIN_SAMPLES {
        return Err(SteklovError::InvalidInput(format!(
            "monotonicity needs at least {MIN_SAMPLES} samples, got {}",
            curve.len()
        )));
    }
    let signs: Vec<(i8, f64)> = curve
        .windows(2)
        .map(|w| {
            let d = w[1].1 - w[0].1;
            let scale = w[0].1.abs().max(w[1].1.abs());
            let s = if d > margin * scale {
                1
            } else if d < -margin * scale {
                -1
            } else {
                0
            };
            (s, d.abs())
        })
        .collect();

    let flat = signs.iter().filter(|(s, _)| *s == 0).count();
    let sign_changes = signs
        .iter()
        .filter(|(s, _)| *s != 0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0].0 != w[1].0)
        .count();
    let min_gap = signs.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);

    let mut turning_index = None;
    let verdict = if flat > 0 {
        Verdict::NonmonotoneOther
    } else if signs.iter().all(|(s, _)| *s == 1) {
        Verdict::Increasing
    } else if signs.iter().all(|(s, _)| *s == -1) {
        Verdict::Decreasing
    } else if sign_changes == 1 && signs[0].0 == -1 {
        turning_index = signs.iter().position(|(s, _)| *s == 1);
        Verdict::UnimodalMin
    } else {
        Verdict::NonmonotoneOther
    };

    Ok(MonotonicityReport {
        verdict,
        samples: curve.len(),
        min_gap,
        margin,
        flat_differences: flat,
        sign_changes,
        transition: None,
        turning_index,
    })
}

/// Bisection on the sign of a central-difference slope.
///
/// `value` evaluates the curve; `step(x)` is the finite-difference step.
pub fn slope_bisection<F, S>(
    value: F,
    step: S,
    bracket: (f64, f64),
    tol: f64,
    kind: TransitionKind,
) -> Result<TransitionPoint>
where
    F: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(SteklovError::InvalidInput(format!(
            "bad bracket ({lo}, {hi}) or tolerance {tol}"
        )));
    }
    let slope = |x: f64| -> Result<f64> {
        let h = step(x);
        Ok((value(x + h)? - value(x - h)?) / (2.0 * h))
    };
    let s_lo = slope(lo)?;
    let s_hi = slope(hi)?;
    if s_lo.signum() == s_hi.signum() || s_lo == 0.0 || s_hi == 0.0 {
        return Err(SteklovError::Bracket {
            lo,
            hi,
            slope_lo: s_lo,
            slope_hi: s_hi,
        });
    }
    let lo_sign = s_lo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = slope(mid)?;
        if s == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if s.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let location = 0.5 * (lo + hi);
    Ok(TransitionPoint {
        location,
        bracket: (lo, hi),
        kind,
        residual: slope(location)?.abs(),
    })
}

/// Finite-difference step for radius slopes.
pub fn radius_step(r: f64) -> f64 {
    (1e-4 * r.abs()).max(1e-5)
}

/// Locates the critical radius of a normalized curve inside `bracket`.
pub fn find_transition(
    geometry: Geometry,
    n: usize,
    problem: Problem,
    m: usize,
    normalizer: Normalizer,
    bracket: (f64, f64),
    tol: f64,
) -> Result<TransitionPoint> {
    normalizer.check(problem)?;
    slope_bisection(
        |r| normalized_value(geometry, n, problem, m, normalizer, r).map(|(v, _)| v),
        radius_step,
        bracket,
        tol,
        TransitionKind::Radius,
    )
}

/// Grid-local bracket around the minimum of a unimodal curve.
///
/// Widens by one grid cell on each side until the slope signs differ.
pub(crate) fn transition_near_turn<F>(
    grid: &[f64],
    turn: usize,
    mut locate: F,
) -> Result<TransitionPoint>
where
    F: FnMut((f64, f64)) -> Result<TransitionPoint>,
{
    let mut last_err = None;
    for width in 1..=3 {
        let lo = turn.saturating_sub(width);
        let hi = (turn + width).min(grid.len() - 1);
        match locate((grid[lo], grid[hi])) {
            Ok(t) => return Ok(t),
            Err(e @ SteklovError::Bracket { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one bracket attempt"))
}

/// Curve, verdict, and for unimodal curves the transition radius.
#[allow(clippy::too_many_arguments)]
pub fn scan(
    geometry: Geometry,
    n: usize,
    problem: Problem,
    m: usize,
    normalizer: Normalizer,
    grid: &[f64],
    margin: f64,
    tol: f64,
) -> Result<(Curve, MonotonicityReport)> {
    let curve = normalized_curve(geometry, n, problem, m, normalizer, grid)?;
    if let Some(gap) = curve.gaps.first() {
        return Err(SteklovError::Numeric(format!(
            "curve has {} failed points, first at {}: {}",
            curve.gaps.len(),
            gap.x,
            gap.error
        )));
    }
    let mut report = monotonicity_report(&curve.pairs(), margin)?;
    if let Some(turn) = report.turning_index {
        report.transition = Some(transition_near_turn(grid, turn, |b| {
            find_transition(geometry, n, problem, m, normalizer, b, tol)
        })?);
    }
    Ok((curve, report))
}

/// `samples` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..samples)
            .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
            .collect(),
    }
}
