//! Eigenvalues of two-dimensional space-form disks as functions of the
//! curvature `K`, at fixed area or fixed geodesic radius.
//!
//! A disk of curvature `K ≠ 0` is a unit-curvature disk of radius
//! `Θ(K)` rescaled by `|K|^{-1/2}`, so `λ(K) = |K|^{p/2} λ(±1; Θ)` with
//! `p = 3` for `ξ` and `p = 1` otherwise.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigen::{self, Geometry, Problem, FLAT_CURVATURE};
use crate::error::{Result, SteklovError};
use crate::scaling::{self, Curve, MonotonicityReport, TransitionKind, TransitionPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    FixedArea(f64),
    FixedRadius(f64),
}

impl Constraint {
    /// Supremum of admissible curvatures: `4π/A` or `(π/ρ)²`.
    pub fn k_bound(&self) -> f64 {
        match *self {
            Constraint::FixedArea(a) => 4.0 * PI / a,
            Constraint::FixedRadius(rho) => (PI / rho).powi(2),
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Constraint::FixedArea(a) => ("area", a),
            Constraint::FixedRadius(rho) => ("radius", rho),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(SteklovError::InvalidInput(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
        Ok(())
    }

    fn check_k(&self, k: f64) -> Result<()> {
        self.validate()?;
        if !(k < self.k_bound()) || !k.is_finite() {
            return Err(SteklovError::Domain(format!(
                "curvature {k} is not below the bound {}",
                self.k_bound()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureFamily {
    pub constraint: Constraint,
    pub problem: Problem,
    pub m: usize,
    #[serde(rename = "K_range")]
    pub k_range: (f64, f64),
}

impl CurvatureFamily {
    pub fn new(
        constraint: Constraint,
        problem: Problem,
        m: usize,
        k_range: (f64, f64),
    ) -> Result<Self> {
        constraint.validate()?;
        if m < problem.min_mode() {
            return Err(SteklovError::InvalidInput(format!(
                "{problem} needs m >= {}",
                problem.min_mode()
            )));
        }
        let (lo, hi) = k_range;
        if !(lo < hi) {
            return Err(SteklovError::InvalidInput(format!(
                "empty curvature range ({lo}, {hi})"
            )));
        }
        constraint.check_k(hi)?;
        Ok(CurvatureFamily {
            constraint,
            problem,
            m,
            k_range,
        })
    }

    /// Range `(-5 K*, 0.99 K*)` where `K*` is the curvature bound.
    pub fn with_default_range(constraint: Constraint, problem: Problem, m: usize) -> Result<Self> {
        constraint.validate()?;
        let b = constraint.k_bound();
        Self::new(constraint, problem, m, (-5.0 * b, 0.99 * b))
    }

    pub fn grid(&self, samples: usize) -> Vec<f64> {
        scaling::linspace(self.k_range.0, self.k_range.1, samples)
    }
}

/// Radius of the comparison disk: unit-curvature radius for `K ≠ 0`,
/// the flat radius for `K = 0`.
pub fn theta_of_k(constraint: Constraint, k: f64) -> Result<f64> {
    constraint.check_k(k)?;
    if k.abs() < FLAT_CURVATURE {
        return Ok(match constraint {
            Constraint::FixedArea(a) => (a / PI).sqrt(),
            Constraint::FixedRadius(rho) => rho,
        });
    }
    Ok(match constraint {
        Constraint::FixedArea(a) if k > 0.0 => 2.0 * (k * a / (4.0 * PI)).sqrt().asin(),
        Constraint::FixedArea(a) => 2.0 * (-k * a / (4.0 * PI)).sqrt().asinh(),
        Constraint::FixedRadius(rho) => k.abs().sqrt() * rho,
    })
}

/// Eigenvalue of the family's disk with curvature `k`.
pub fn eigen_of_k(family: &CurvatureFamily, k: f64) -> Result<f64> {
    let theta = theta_of_k(family.constraint, k)?;
    let (problem, m) = (family.problem, family.m);
    if k.abs() < FLAT_CURVATURE {
        return Ok(eigen::euclidean_closed_form(2, problem, m, theta));
    }
    let geometry = if k > 0.0 {
        Geometry::Sphere
    } else {
        Geometry::Hyperbolic
    };
    let unit = eigen::closed_form_2d(geometry, problem, m, theta)?;
    Ok(k.abs().powf(0.5 * problem.scaling_power() as f64) * unit)
}

pub fn curvature_curve(family: &CurvatureFamily, grid: &[f64]) -> Result<Curve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SteklovError::InvalidInput(
            "grid must be strictly increasing".into(),
        ));
    }
    if let Some(&last) = grid.last() {
        family.constraint.check_k(last)?;
    }
    Ok(Curve::evaluate(grid, |k| {
        eigen_of_k(family, k).map(|v| (v, eigen::QUAD_RTOL * v.abs()))
    }))
}

/// Finite-difference step for curvature slopes.
pub fn curvature_step(k: f64) -> f64 {
    (1e-4 * k.abs()).max(1e-5)
}

pub fn find_curvature_transition(
    family: &CurvatureFamily,
    bracket: (f64, f64),
    tol: f64,
) -> Result<TransitionPoint> {
    scaling::slope_bisection(
        |k| eigen_of_k(family, k),
        curvature_step,
        bracket,
        tol,
        TransitionKind::Curvature,
    )
}

/// Verdict for `K ↦ λ(K)` on `grid`; unimodal curves also get their critical curvature.
pub fn curvature_monotonicity(
    family: &CurvatureFamily,
    grid: &[f64],
    margin: f64,
) -> Result<MonotonicityReport> {
    curvature_scan(family, grid, margin, 1e-6).map(|(_, r)| r)
}

pub fn curvature_scan(
    family: &CurvatureFamily,
    grid: &[f64],
    margin: f64,
    tol: f64,
) -> Result<(Curve, MonotonicityReport)> {
    let curve = curvature_curve(family, grid)?;
    if let Some(gap) = curve.gaps.first() {
        return Err(SteklovError::Numeric(format!(
            "curve has {} failed points, first at K = {}: {}",
            curve.gaps.len(),
            gap.x,
            gap.error
        )));
    }
    let mut report = scaling::monotonicity_report(&curve.pairs(), margin)?;
    if let Some(turn) = report.turning_index {
        report.transition = Some(scaling::transition_near_turn(grid, turn, |b| {
            find_curvature_transition(family, b, tol)
        })?);
    }
    Ok((curve, report))
}
