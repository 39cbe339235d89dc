//! Steklov eigenvalues `σ_(m)`, `ξ_(m)`, `η_(m)` (counted without multiplicity).
//!
//! All three come from the same radial solution `u_m`:
//!
//! * `σ_(m) = u'(R)/u(R)`
//! * `ξ_(m) = h^{n-1}(R) u'(R)² / ∫₀^R h^{n-1} u² dr`
//! * `η_(m) = h^{n-1}(R) u(R)² / ∫₀^R h^{n-1} u² dr`, and `η_(0) = h^{n-1}(R) / ∫₀^R h^{n-1} dr`
//!
//! Flat balls and two-dimensional space-form disks also have closed forms; the
//! fourth-order problems can be cross-checked against the coupled systems
//! `Lψ = ψ̃`, `Lψ̃ = 0` solved by superposition.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, SteklovError};
use crate::ode::{self, Observed, OdeOptions};
use crate::quad;
use crate::radial::{self, ManifoldSpec, RadialOptions, RENORM_THRESHOLD};
use crate::warp::WarpKind;

/// Curvatures below this magnitude are treated as flat.
pub const FLAT_CURVATURE: f64 = 1e-12;
/// Relative tolerance of the disk quadratures.
pub const QUAD_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Sigma,
    Xi,
    Eta,
}

impl Problem {
    /// Power of the length scale: eigenvalues scale like `c^{-power}` under `g ↦ c² g`.
    pub fn scaling_power(self) -> i32 {
        match self {
            Problem::Xi => 3,
            Problem::Sigma | Problem::Eta => 1,
        }
    }

    pub fn min_mode(self) -> usize {
        match self {
            Problem::Xi => 1,
            Problem::Sigma | Problem::Eta => 0,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Sigma => "sigma",
            Problem::Xi => "xi",
            Problem::Eta => "eta",
        })
    }
}

impl FromStr for Problem {
    type Err = SteklovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(Problem::Sigma),
            "xi" => Ok(Problem::Xi),
            "eta" => Ok(Problem::Eta),
            _ => Err(SteklovError::InvalidInput(format!(
                "unknown problem '{s}' (expected sigma | xi | eta)"
            ))),
        }
    }
}

/// How a value was actually computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ode,
    #[serde(rename = "closed_form_2d")]
    ClosedForm2d,
    ClosedFormEuclidean,
    Coupled,
}

/// What the caller asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Ode,
    Closed,
    Coupled,
}

impl FromStr for MethodChoice {
    type Err = SteklovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "ode" => Ok(MethodChoice::Ode),
            "closed" => Ok(MethodChoice::Closed),
            "coupled" => Ok(MethodChoice::Coupled),
            _ => Err(SteklovError::InvalidInput(format!(
                "unknown method '{s}' (expected auto | ode | closed | coupled)"
            ))),
        }
    }
}

/// Unit-curvature two-dimensional models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Sphere,
    Hyperbolic,
}

impl FromStr for Geometry {
    type Err = SteklovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Geometry::Sphere),
            "hyperbolic" => Ok(Geometry::Hyperbolic),
            _ => Err(SteklovError::InvalidInput(format!(
                "unknown geometry '{s}' (expected sphere | hyperbolic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub problem: Problem,
    pub m: usize,
    pub value: f64,
    pub method: Method,
    pub manifold: ManifoldSpec,
    pub est_error: f64,
}

/// `σ_(m)`, `ξ_(m)` or `η_(m)` on the flat ball of radius `R`.
pub fn euclidean_closed_form(n: usize, problem: Problem, m: usize, radius: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    match problem {
        Problem::Sigma => m / radius,
        Problem::Xi => m * m * (n + 2.0 * m) / radius.powi(3),
        Problem::Eta => (n + 2.0 * m) / radius,
    }
}

/// `∫₀^R t(r/2)^{2m} s(r) dr` with `(t, s) = (tan, sin)` or `(tanh, sinh)`.
fn disk_moment(geometry: Geometry, m: usize, radius: f64) -> Result<quad::QuadResult> {
    let p = 2 * m as i32;
    match geometry {
        Geometry::Sphere => quad::integrate(
            |r| (0.5 * r).tan().powi(p) * r.sin(),
            0.0,
            radius,
            0.0,
            QUAD_RTOL,
        ),
        Geometry::Hyperbolic => quad::integrate(
            |r| (0.5 * r).tanh().powi(p) * r.sinh(),
            0.0,
            radius,
            0.0,
            QUAD_RTOL,
        ),
    }
}

fn closed_form_2d_impl(
    geometry: Geometry,
    problem: Problem,
    m: usize,
    radius: f64,
) -> Result<(f64, f64)> {
    let ok = match geometry {
        Geometry::Sphere => radius > 0.0 && radius < std::f64::consts::PI,
        Geometry::Hyperbolic => radius > 0.0 && radius.is_finite(),
    };
    if !ok {
        return Err(SteklovError::Domain(format!(
            "disk radius {radius} outside the {geometry:?} domain"
        )));
    }
    let (t, s) = match geometry {
        Geometry::Sphere => ((0.5 * radius).tan(), radius.sin()),
        Geometry::Hyperbolic => ((0.5 * radius).tanh(), radius.sinh()),
    };
    let mf = m as f64;
    match (problem, m) {
        (Problem::Sigma, _) => Ok((mf / s, 0.0)),
        (Problem::Eta, 0) => Ok((1.0 / t, 0.0)),
        (Problem::Xi, 0) => Err(SteklovError::InvalidInput("xi needs m >= 1".into())),
        (Problem::Xi, _) | (Problem::Eta, _) => {
            let moment = disk_moment(geometry, m, radius)?;
            let t2m = t.powi(2 * m as i32);
            let value = if problem == Problem::Xi {
                mf * mf * t2m / (s * moment.value)
            } else {
                t2m * s / moment.value
            };
            Ok((value, moment.error / moment.value.abs()))
        }
    }
}

/// Closed forms on unit-curvature disks of radius `R` in two dimensions.
///
/// `ξ_(m) = m² t^{2m} / (s(R) M(R))` and `η_(m) = t^{2m} s(R) / M(R)` with
/// `t = tan(R/2)` or `tanh(R/2)`, `s = sin` or `sinh`, and
/// `M(R) = ∫₀^R t(r/2)^{2m} s(r) dr` evaluated by adaptive quadrature.
/// Also accepts `σ_(m) = m / s(R)` and `η_(0) = 1/t`.
pub fn closed_form_2d(geometry: Geometry, problem: Problem, m: usize, radius: f64) -> Result<f64> {
    closed_form_2d_impl(geometry, problem, m, radius).map(|(v, _)| v)
}

/// `M(R)` from the closed forms, exposed for cross-checks.
pub fn disk_integral(geometry: Geometry, m: usize, radius: f64) -> Result<f64> {
    disk_moment(geometry, m, radius).map(|q| q.value)
}

/// How the automatic dispatcher would classify this manifold.
enum ClosedRoute {
    Flat,
    /// Two-dimensional constant curvature `k ≠ 0`.
    Disk(f64),
    None,
}

fn closed_route(manifold: &ManifoldSpec) -> ClosedRoute {
    let k = match &manifold.warp.kind {
        WarpKind::OddPolynomial { coeffs } if !coeffs.is_empty() => return ClosedRoute::None,
        _ => manifold.warp.curvature().unwrap_or(f64::NAN),
    };
    if k.abs() < FLAT_CURVATURE {
        ClosedRoute::Flat
    } else if manifold.n == 2 {
        ClosedRoute::Disk(k)
    } else {
        ClosedRoute::None
    }
}

fn check_mode(problem: Problem, m: usize) -> Result<()> {
    if m < problem.min_mode() {
        return Err(SteklovError::InvalidInput(format!(
            "{problem} needs m >= {}",
            problem.min_mode()
        )));
    }
    Ok(())
}

/// General entry point: computes `problem` for mode `m` using `choice`.
pub fn eigenvalue(
    problem: Problem,
    manifold: &ManifoldSpec,
    m: usize,
    choice: MethodChoice,
    opts: &RadialOptions,
) -> Result<EigenResult> {
    check_mode(problem, m)?;
    let result = |value: f64, method: Method, est_error: f64| EigenResult {
        problem,
        m,
        value,
        method,
        manifold: manifold.clone(),
        est_error,
    };

    let closed = |route: ClosedRoute| -> Result<Option<EigenResult>> {
        match route {
            ClosedRoute::Flat => Ok(Some(result(
                euclidean_closed_form(manifold.n, problem, m, manifold.radius),
                Method::ClosedFormEuclidean,
                0.0,
            ))),
            ClosedRoute::Disk(k) => {
                let geometry = if k > 0.0 {
                    Geometry::Sphere
                } else {
                    Geometry::Hyperbolic
                };
                let q = k.abs().sqrt();
                let (v, err) = closed_form_2d_impl(geometry, problem, m, q * manifold.radius)?;
                let scale = q.powi(problem.scaling_power());
                Ok(Some(result(scale * v, Method::ClosedForm2d, err)))
            }
            ClosedRoute::None => Ok(None),
        }
    };

    match choice {
        MethodChoice::Auto => match closed(closed_route(manifold))? {
            Some(r) => Ok(r),
            None => ode_route(problem, manifold, m, opts).map(|(v, e)| result(v, Method::Ode, e)),
        },
        MethodChoice::Closed => closed(closed_route(manifold))?.ok_or_else(|| {
            SteklovError::InvalidInput(format!(
                "no closed form for n = {} with warp {}",
                manifold.n, manifold.warp
            ))
        }),
        MethodChoice::Ode => {
            ode_route(problem, manifold, m, opts).map(|(v, e)| result(v, Method::Ode, e))
        }
        MethodChoice::Coupled => {
            let value = match problem {
                Problem::Xi => xi_coupled_with(manifold, m, opts)?,
                Problem::Eta => eta_coupled_with(manifold, m, opts)?,
                Problem::Sigma => {
                    return Err(SteklovError::InvalidInput(
                        "the coupled system applies to xi and eta only".into(),
                    ))
                }
            };
            Ok(result(value, Method::Coupled, opts.rtol))
        }
    }
}

fn ode_route(
    problem: Problem,
    manifold: &ManifoldSpec,
    m: usize,
    opts: &RadialOptions,
) -> Result<(f64, f64)> {
    let (h_r, _, _) = manifold.boundary_warp();
    let h_pow = h_r.powi(manifold.n as i32 - 1);
    match (problem, m) {
        (Problem::Sigma, 0) => Ok((0.0, 0.0)),
        (Problem::Eta, 0) => {
            let vol = weighted_volume(manifold)?;
            Ok((h_pow / vol.value, vol.error / vol.value))
        }
        _ => {
            let sol = radial::integrate_u_with(manifold, m, opts)?;
            let value = match problem {
                Problem::Sigma => sol.y_r,
                // The solution's scale cancels in both ratios.
                Problem::Xi => h_pow * sol.du_r / sol.integral * sol.du_r,
                Problem::Eta => h_pow * sol.u_r / sol.integral * sol.u_r,
            };
            Ok((value, sol.est_error))
        }
    }
}

/// `∫₀^R h^{n-1} dr` by adaptive quadrature.
fn weighted_volume(manifold: &ManifoldSpec) -> Result<quad::QuadResult> {
    let p = manifold.n as i32 - 1;
    let warp = &manifold.warp;
    quad::integrate(
        |r| warp.eval_unchecked(r).0.powi(p),
        0.0,
        manifold.radius,
        0.0,
        1e-13,
    )
}

/// `|∂M| / |M|`, with the volume integrated as an initial-value problem
/// `V' = h^{n-1}`, `V(0) = 0`. Independent of the quadrature behind `η_(0)`.
pub fn boundary_volume_ratio(manifold: &ManifoldSpec) -> Result<f64> {
    let p = manifold.n as i32 - 1;
    let warp = &manifold.warp;
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-300,
        ..Default::default()
    };
    let (v, _) = ode::integrate(
        |r, _: &[f64; 1]| [warp.eval_unchecked(r).0.powi(p)],
        0.0,
        manifold.radius,
        [0.0],
        &opts,
        |_, _| Ok(Observed::Unchanged),
    )?;
    let (h_r, _, _) = manifold.boundary_warp();
    Ok(h_r.powi(p) / v[0])
}

pub fn sigma(manifold: &ManifoldSpec, m: usize) -> Result<EigenResult> {
    eigenvalue(
        Problem::Sigma,
        manifold,
        m,
        MethodChoice::Auto,
        &RadialOptions::default(),
    )
}

pub fn xi(manifold: &ManifoldSpec, m: usize, method: MethodChoice) -> Result<EigenResult> {
    eigenvalue(Problem::Xi, manifold, m, method, &RadialOptions::default())
}

pub fn eta(manifold: &ManifoldSpec, m: usize, method: MethodChoice) -> Result<EigenResult> {
    eigenvalue(Problem::Eta, manifold, m, method, &RadialOptions::default())
}

/// Endpoint values of `u`, `u'` and of a particular solution `ψ_p` of `Lψ = u`.
struct CoupledEnd {
    u: f64,
    du: f64,
    psi: f64,
    dpsi: f64,
}

fn integrate_coupled(
    manifold: &ManifoldSpec,
    m: usize,
    opts: &RadialOptions,
) -> Result<CoupledEnd> {
    let n = manifold.n;
    let nf = n as f64;
    let mf = m as f64;
    let tau = manifold.tau(m);
    let warp = &manifold.warp;
    let r0 = opts.start.unwrap_or_else(|| manifold.default_start());
    let c = radial::frobenius_correction(warp, n, m);
    let s = opts.init_scale;

    // ψ_p ~ (r/r₀)^m r² / (4m + 2n) near the pole.
    let denom = 4.0 * mf + 2.0 * nf;
    let y0 = [
        s * (1.0 + c * r0 * r0),
        s * (mf / r0 + (mf + 2.0) * c * r0),
        s * r0 * r0 / denom,
        s * (mf + 2.0) * r0 / denom,
    ];
    let rhs = |r: f64, y: &[f64; 4]| {
        let (h, dh, _) = warp.eval_unchecked(r);
        let inv_h = 1.0 / h;
        let drift = (nf - 1.0) * dh * inv_h;
        let pot = tau * inv_h * inv_h;
        [
            y[1],
            -drift * y[1] + pot * y[0],
            y[3],
            -drift * y[3] + pot * y[2] + y[0],
        ]
    };
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        first_step: Some(1e-2 * r0),
        ..Default::default()
    };
    let (y, _) = ode::integrate(rhs, r0, manifold.radius, y0, &ode_opts, |_, y| {
        let big = y[0].abs().max(y[1].abs());
        if big > RENORM_THRESHOLD {
            y.iter_mut().for_each(|v| *v /= big);
            Ok(Observed::Modified)
        } else {
            Ok(Observed::Unchanged)
        }
    })?;
    Ok(CoupledEnd {
        u: y[0],
        du: y[1],
        psi: y[2],
        dpsi: y[3],
    })
}

/// `ξ_(m) = -ψ̃'(R)/ψ(R)` from `Lψ = ψ̃ = u_m`, `ψ(0) = 0`, `ψ'(R) = 0`.
pub fn xi_coupled_crosscheck(manifold: &ManifoldSpec, m: usize) -> Result<f64> {
    xi_coupled_with(manifold, m, &RadialOptions::default())
}

fn xi_coupled_with(manifold: &ManifoldSpec, m: usize, opts: &RadialOptions) -> Result<f64> {
    check_mode(Problem::Xi, m)?;
    let end = integrate_coupled(manifold, m, opts)?;
    if end.du == 0.0 {
        return Err(SteklovError::Numeric(
            "u'(R) = 0: superposition for ψ'(R) = 0 is degenerate".into(),
        ));
    }
    let c = -end.dpsi / end.du;
    let psi_r = end.psi + c * end.u;
    Ok(-end.du / psi_r)
}

/// `η_(m) = ψ̃(R)/ψ'(R)` from `Lψ = ψ̃ = u_m`, `ψ(0) = 0`, `ψ(R) = 0`.
/// For `m = 0`, `ψ̃ ≡ 1` and `ψ` solves `(h^{n-1}ψ')' = h^{n-1}` with `ψ'(0) = 0`.
pub fn eta_coupled_crosscheck(manifold: &ManifoldSpec, m: usize) -> Result<f64> {
    eta_coupled_with(manifold, m, &RadialOptions::default())
}

fn eta_coupled_with(manifold: &ManifoldSpec, m: usize, opts: &RadialOptions) -> Result<f64> {
    if m == 0 {
        return eta0_coupled(manifold, opts);
    }
    let end = integrate_coupled(manifold, m, opts)?;
    if end.u == 0.0 {
        return Err(SteklovError::Numeric(
            "u(R) = 0: superposition for ψ(R) = 0 is degenerate".into(),
        ));
    }
    let c = -end.psi / end.u;
    let dpsi_r = end.dpsi + c * end.du;
    Ok(end.u / dpsi_r)
}

fn eta0_coupled(manifold: &ManifoldSpec, opts: &RadialOptions) -> Result<f64> {
    let nf = manifold.n as f64;
    let a = manifold.warp.cubic_coefficient();
    let warp = &manifold.warp;
    let r0 = opts.start.unwrap_or_else(|| manifold.default_start());
    // ψ' = h^{1-n} ∫₀^r h^{n-1} = (r/n)(1 - 2(n-1)a r²/(n+2) + O(r⁴)).
    let dpsi0 = r0 / nf * (1.0 - 2.0 * (nf - 1.0) * a * r0 * r0 / (nf + 2.0));
    let rhs = |r: f64, y: &[f64; 1]| {
        let (h, dh, _) = warp.eval_unchecked(r);
        [1.0 - (nf - 1.0) * dh / h * y[0]]
    };
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol.min(1e-3 * opts.rtol * r0),
        first_step: Some(1e-2 * r0),
        ..Default::default()
    };
    let (y, _) = ode::integrate(rhs, r0, manifold.radius, [dpsi0], &ode_opts, |_, _| {
        Ok(Observed::Unchanged)
    })?;
    if y[0] == 0.0 {
        return Err(SteklovError::Numeric(
            "ψ'(R) = 0 in the m = 0 system".into(),
        ));
    }
    Ok(1.0 / y[0])
}
