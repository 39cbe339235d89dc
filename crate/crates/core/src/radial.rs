//! Radial solutions of `u'' + (n-1)(h'/h) u' - τ_m u / h² = 0`, `u(0) = 0`.
//!
//! The equation has a regular singular point at `r = 0` where the regular
//! solution behaves like `r^m`. Integration starts at a small `r₀` with the
//! two-term Frobenius expansion `u = (r/r₀)^m (1 + c r²)`, where
//! `c = -a m (2n - 3 + m) / (2m + n)` and `a = h'''(0)/6`; the neglected
//! terms are `O(r₀⁴)` relative.

use serde::Serialize;

use crate::error::{Result, SteklovError};
use crate::ode::{self, Observed, OdeOptions};
use crate::warp::WarpSpec;

/// Renormalize `(u, u', I)` when `max(|u|, |u'|)` exceeds this.
pub const RENORM_THRESHOLD: f64 = 1e100;
/// Riccati variable magnitude treated as blow-up.
pub const Z_BLOWUP: f64 = 1e12;

/// A warped-product ball `[0, R] × S^{n-1}` with metric `dr² + h(r)² g_{S^{n-1}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldSpec {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub warp: WarpSpec,
}

impl ManifoldSpec {
    pub fn new(n: usize, radius: f64, warp: WarpSpec) -> Result<Self> {
        if n < 2 {
            return Err(SteklovError::InvalidInput(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SteklovError::Domain(format!(
                "boundary radius must be positive and finite, got {radius}"
            )));
        }
        if radius >= warp.max_radius {
            return Err(SteklovError::Domain(format!(
                "R = {radius} is not below the warp's maximal radius {}",
                warp.max_radius
            )));
        }
        Ok(ManifoldSpec { n, radius, warp })
    }

    /// Eigenvalue `m(n - 2 + m)` of the Laplacian on the unit `(n-1)`-sphere.
    pub fn tau(&self, m: usize) -> f64 {
        (m * (self.n - 2 + m)) as f64
    }

    /// `(h(R), h'(R), h''(R))`.
    pub fn boundary_warp(&self) -> (f64, f64, f64) {
        self.warp.eval_unchecked(self.radius)
    }

    /// Default start radius for the singular integration.
    pub fn default_start(&self) -> f64 {
        (1e-5 * self.radius).max(1e-8)
    }
}

/// Endpoint data of the regular radial solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSolution {
    pub u_r: f64,
    pub du_r: f64,
    /// `∫₀^R h^{n-1} u² dr` at the same scale as `u_r`.
    pub integral: f64,
    /// Sum of the logarithms of all renormalization divisors.
    pub log_scale: f64,
    pub y_r: f64,
    pub z_r: f64,
    pub steps: usize,
    pub est_error: f64,
    /// `u, u', I > 0` at `R`; always true when Ric ≥ 0 and the boundary is convex.
    pub positive: bool,
}

impl RadialSolution {
    /// `I / u(R)²`, independent of normalization.
    pub fn integral_ratio(&self) -> f64 {
        self.integral / (self.u_r * self.u_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Start radius; [`ManifoldSpec::default_start`] when `None`.
    pub start: Option<f64>,
    /// Multiplier applied to the initial data.
    pub init_scale: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            rtol: 1e-10,
            atol: 1e-13,
            start: None,
            init_scale: 1.0,
        }
    }
}

impl RadialOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        RadialOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

fn validate(manifold: &ManifoldSpec, m: usize, opts: &RadialOptions) -> Result<f64> {
    if m == 0 {
        return Err(SteklovError::InvalidInput(
            "radial solution needs m >= 1 (m = 0 is constant)".into(),
        ));
    }
    if !(opts.rtol > 0.0 && opts.rtol <= 1e-6) {
        return Err(SteklovError::InvalidInput(format!(
            "rtol must lie in (0, 1e-6], got {}",
            opts.rtol
        )));
    }
    let start = opts.start.unwrap_or_else(|| manifold.default_start());
    if !(start > 0.0 && start < manifold.radius) {
        return Err(SteklovError::InvalidInput(format!(
            "start radius {start} must lie in (0, R)"
        )));
    }
    Ok(start)
}

/// Frobenius coefficient `c` in `u = r^m (1 + c r² + …)`.
pub(crate) fn frobenius_correction(warp: &WarpSpec, n: usize, m: usize) -> f64 {
    let a = warp.cubic_coefficient();
    let (n, m) = (n as f64, m as f64);
    -a * m * (2.0 * n - 3.0 + m) / (2.0 * m + n)
}

/// Integrates the regular solution `u_m` together with `I = ∫ h^{n-1} u²`.
pub fn integrate_u(
    manifold: &ManifoldSpec,
    m: usize,
    rtol: f64,
    atol: f64,
) -> Result<RadialSolution> {
    integrate_u_with(manifold, m, &RadialOptions::with_tolerances(rtol, atol))
}

pub fn integrate_u_with(
    manifold: &ManifoldSpec,
    m: usize,
    opts: &RadialOptions,
) -> Result<RadialSolution> {
    let r0 = validate(manifold, m, opts)?;
    let n = manifold.n;
    let nm1 = (n - 1) as i32;
    let tau = manifold.tau(m);
    let warp = &manifold.warp;
    let c = frobenius_correction(warp, n, m);
    let s = opts.init_scale;
    let mf = m as f64;

    let u0 = s * (1.0 + c * r0 * r0);
    let du0 = s * (mf / r0 + (mf + 2.0) * c * r0);
    let i0 = s * s * r0.powi(n as i32) / (n as f64 + 2.0 * mf);
    let big0 = u0.abs();
    if !(big0 > 0.0 && big0.is_finite()) {
        return Err(SteklovError::InvalidInput(format!(
            "initial data must be finite and nonzero, got scale {s}"
        )));
    }

    let rhs = |r: f64, y: &[f64; 3]| {
        let (h, dh, _) = warp.eval_unchecked(r);
        let inv_h = 1.0 / h;
        [
            y[1],
            -((n - 1) as f64) * dh * inv_h * y[1] + tau * inv_h * inv_h * y[0],
            h.powi(nm1) * y[0] * y[0],
        ]
    };

    let mut log_scale = big0.ln();
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        first_step: Some(1e-2 * r0),
        ..Default::default()
    };
    let (y, stats) = ode::integrate(
        rhs,
        r0,
        manifold.radius,
        [u0 / big0, du0 / big0, i0 / (big0 * big0)],
        &ode_opts,
        |_, y| {
            let big = y[0].abs().max(y[1].abs());
            if big > RENORM_THRESHOLD {
                y[0] /= big;
                y[1] /= big;
                y[2] /= big * big;
                log_scale += big.ln();
                Ok(Observed::Modified)
            } else {
                Ok(Observed::Unchanged)
            }
        },
    )?;

    let (h_r, _, _) = manifold.boundary_warp();
    let y_r = y[1] / y[0];
    Ok(RadialSolution {
        u_r: y[0],
        du_r: y[1],
        integral: y[2],
        log_scale,
        y_r,
        z_r: h_r * y_r,
        steps: stats.accepted,
        est_error: stats.est_error,
        positive: y[0] > 0.0 && y[1] > 0.0 && y[2] > 0.0,
    })
}

fn riccati_start(manifold: &ManifoldSpec, m: usize, r0: f64) -> f64 {
    let a = manifold.warp.cubic_coefficient();
    let (n, mf) = (manifold.n as f64, m as f64);
    mf - 3.0 * a * mf * (n - 2.0) / (2.0 * mf + n) * r0 * r0
}

fn integrate_z_impl(
    manifold: &ManifoldSpec,
    m: usize,
    rtol: f64,
    mut record: impl FnMut(f64, f64),
) -> Result<f64> {
    let opts = RadialOptions {
        rtol,
        ..Default::default()
    };
    let r0 = validate(manifold, m, &opts)?;
    let n2 = (manifold.n - 2) as f64;
    let tau = manifold.tau(m);
    let warp = &manifold.warp;
    let z0 = riccati_start(manifold, m, r0);
    record(r0, z0);

    let rhs = |r: f64, z: &[f64; 1]| {
        let (h, dh, _) = warp.eval_unchecked(r);
        [-(z[0] * z[0] + n2 * dh * z[0] - tau) / h]
    };
    let ode_opts = OdeOptions {
        rtol,
        atol: 1e-13,
        first_step: Some(1e-2 * r0),
        ..Default::default()
    };
    let (z, _) = ode::integrate(rhs, r0, manifold.radius, [z0], &ode_opts, |r, z| {
        if !(z[0].abs() <= Z_BLOWUP) {
            return Err(SteklovError::SolverFailure {
                radius: r,
                reason: format!("Riccati variable blew up (z = {:.3e})", z[0]),
            });
        }
        record(r, z[0]);
        Ok(Observed::Unchanged)
    })?;
    Ok(z[0])
}

/// Integrates `z_m = h u'/u`, which solves
/// `z' = -(z² + (n-2) h' z - τ_m)/h` with `z(0) = m`, and returns `z(R)`.
pub fn integrate_z(manifold: &ManifoldSpec, m: usize, rtol: f64) -> Result<f64> {
    integrate_z_impl(manifold, m, rtol, |_, _| {})
}

/// Same as [`integrate_z`] but returns `(r, z(r))` at every accepted step.
pub fn integrate_z_path(manifold: &ManifoldSpec, m: usize, rtol: f64) -> Result<Vec<(f64, f64)>> {
    let mut path = Vec::new();
    integrate_z_impl(manifold, m, rtol, |r, z| path.push((r, z)))?;
    Ok(path)
}
