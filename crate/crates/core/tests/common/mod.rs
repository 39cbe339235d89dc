//! Reference values computed without the crate's own integrators.
//!
//! Disk integrals use composite Gauss–Legendre rules with panels graded
//! toward singularities; volumes use reduction formulas or exact polynomial
//! expansion.

#![allow(dead_code)]

use std::f64::consts::PI;

use steklov::eigen::{Geometry, Problem};
use steklov::radial::ManifoldSpec;
use steklov::warp::{WarpKind, WarpSpec};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

pub fn panel_integral(f: impl Fn(f64) -> f64, breaks: &[f64], rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        total += h * rule.iter().map(|(x, wt)| wt * f(c + h * x)).sum::<f64>();
    }
    total
}

fn breakpoints(geometry: Geometry, radius: f64) -> Vec<f64> {
    match geometry {
        Geometry::Sphere => {
            // Widths shrink geometrically toward the pole of tan(r/2) at π.
            let mut b = vec![0.0];
            let mut d = PI;
            loop {
                d *= 0.7;
                let next = PI - d;
                if next >= radius {
                    break;
                }
                if next > 0.0 {
                    b.push(next);
                }
            }
            b.push(radius);
            b
        }
        Geometry::Hyperbolic => {
            let panels = (radius / 0.25).ceil().max(1.0) as usize;
            (0..=panels)
                .map(|i| radius * i as f64 / panels as f64)
                .collect()
        }
    }
}

/// `∫₀^R t(r/2)^{2m} s(r) dr`.
pub fn disk_moment(geometry: Geometry, m: usize, radius: f64) -> f64 {
    let rule = gauss_legendre(24);
    let p = 2 * m as i32;
    let breaks = breakpoints(geometry, radius);
    match geometry {
        Geometry::Sphere => panel_integral(|r| (0.5 * r).tan().powi(p) * r.sin(), &breaks, &rule),
        Geometry::Hyperbolic => {
            panel_integral(|r| (0.5 * r).tanh().powi(p) * r.sinh(), &breaks, &rule)
        }
    }
}

/// `M(R)` for `m = 1` on the sphere: `-4 ln cos(R/2) + cos R - 1`.
pub fn sphere_moment_m1(radius: f64) -> f64 {
    let q = (0.5 * radius).sin().powi(2);
    -2.0 * ((-q).ln_1p() + q)
}

/// Unit-curvature disk eigenvalue from the closed forms.
pub fn disk_eigen(geometry: Geometry, problem: Problem, m: usize, radius: f64) -> f64 {
    let (t, s) = match geometry {
        Geometry::Sphere => ((0.5 * radius).tan(), radius.sin()),
        Geometry::Hyperbolic => ((0.5 * radius).tanh(), radius.sinh()),
    };
    let mf = m as f64;
    match (problem, m) {
        (Problem::Sigma, _) => mf / s,
        (Problem::Eta, 0) => 1.0 / t,
        (Problem::Xi, _) => mf * mf * t.powi(2 * m as i32) / (s * disk_moment(geometry, m, radius)),
        (Problem::Eta, _) => t.powi(2 * m as i32) * s / disk_moment(geometry, m, radius),
    }
}

pub fn euclid(problem: Problem, n: usize, m: usize, radius: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    match problem {
        Problem::Sigma => m / radius,
        Problem::Xi => m * m * (n + 2.0 * m) / radius.powi(3),
        Problem::Eta => (n + 2.0 * m) / radius,
    }
}

/// Eigenvalue of the curvature-`k` disk of area `area` (or radius `rho`).
pub fn disk_of_curvature(
    problem: Problem,
    m: usize,
    k: f64,
    area: Option<f64>,
    rho: Option<f64>,
) -> f64 {
    if k == 0.0 {
        let r = rho.unwrap_or_else(|| (area.unwrap() / PI).sqrt());
        return euclid(problem, 2, m, r);
    }
    let q = k.abs().sqrt();
    let theta = match (area, rho) {
        (Some(a), _) if k > 0.0 => 2.0 * (k * a / (4.0 * PI)).sqrt().asin(),
        (Some(a), _) => 2.0 * (-k * a / (4.0 * PI)).sqrt().asinh(),
        (None, Some(r)) => q * r,
        _ => unreachable!(),
    };
    let g = if k > 0.0 {
        Geometry::Sphere
    } else {
        Geometry::Hyperbolic
    };
    let p = if problem == Problem::Xi { 3 } else { 1 };
    q.powi(p) * disk_eigen(g, problem, m, theta)
}

/// `∫₀^R s(r)^k dr` by the reduction formula.
fn power_integral(geometry: Geometry, k: usize, radius: f64) -> f64 {
    match (geometry, k) {
        (_, 0) => radius,
        (Geometry::Sphere, 1) => 2.0 * (0.5 * radius).sin().powi(2),
        (Geometry::Hyperbolic, 1) => 2.0 * (0.5 * radius).sinh().powi(2),
        (Geometry::Sphere, _) => {
            let kf = k as f64;
            -radius.sin().powi(k as i32 - 1) * radius.cos() / kf
                + (kf - 1.0) / kf * power_integral(geometry, k - 2, radius)
        }
        (Geometry::Hyperbolic, _) => {
            let kf = k as f64;
            radius.sinh().powi(k as i32 - 1) * radius.cosh() / kf
                - (kf - 1.0) / kf * power_integral(geometry, k - 2, radius)
        }
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `h^{n-1}(R) / ∫₀^R h^{n-1}`, from exact antiderivatives.
pub fn boundary_volume_ratio(manifold: &ManifoldSpec) -> f64 {
    let (n, r) = (manifold.n, manifold.radius);
    let k = n - 1;
    match &manifold.warp.kind {
        WarpKind::Euclidean => n as f64 / r,
        WarpKind::Sphere => r.sin().powi(k as i32) / power_integral(Geometry::Sphere, k, r),
        WarpKind::Hyperbolic => {
            r.sinh().powi(k as i32) / power_integral(Geometry::Hyperbolic, k, r)
        }
        WarpKind::SpaceForm { .. } => unimplemented!("fixtures use unit space forms"),
        WarpKind::OddPolynomial { coeffs } => {
            let mut h = vec![0.0, 1.0];
            for (i, a) in coeffs.iter().enumerate() {
                h.resize(2 * i + 4, 0.0);
                h[2 * i + 3] = *a;
            }
            let mut p = vec![1.0];
            for _ in 0..k {
                p = poly_mul(&p, &h);
            }
            let eval = |c: &[f64]| c.iter().rev().fold(0.0, |acc, x| acc * r + x);
            let integral: f64 = p
                .iter()
                .enumerate()
                .map(|(j, c)| c * r.powi(j as i32 + 1) / (j + 1) as f64)
                .sum();
            eval(&h).powi(k as i32) / integral
        }
    }
}

/// Vertex of the parabola through three equally spaced samples.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let h = x[1] - x[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    x[1] + 0.5 * h * (y[0] - y[2]) / denom
}

fn scan_min(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> (usize, Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let i = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    (i, xs, ys)
}

/// Interior minimizer by a `points`-point scan, a second scan of the same
/// size across the winning cells, and a parabolic fit.
pub fn dense_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let (i, xs, _) = scan_min(&f, lo, hi, points);
    assert!(i > 0 && i + 1 < points, "minimum on the scan boundary");
    let (j, xs2, ys2) = scan_min(&f, xs[i - 1], xs[i + 1], points);
    assert!(
        j > 0 && j + 1 < points,
        "refined minimum on the scan boundary"
    );
    parabola_vertex(
        [xs2[j - 1], xs2[j], xs2[j + 1]],
        [ys2[j - 1], ys2[j], ys2[j + 1]],
    )
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Test manifolds: unit space forms, two odd-polynomial warps, flat balls.
pub fn fixture_manifolds() -> Vec<ManifoldSpec> {
    let mut out = Vec::new();
    let poly1 = WarpSpec::odd_polynomial(vec![-0.1]).unwrap();
    let poly2 = WarpSpec::odd_polynomial(vec![-0.15, 0.01]).unwrap();
    for n in 2..=4 {
        for r in [0.5, 1.2, 2.5] {
            out.push(ManifoldSpec::new(n, r, WarpSpec::sphere()).unwrap());
        }
        for r in [0.5, 1.5, 3.0] {
            out.push(ManifoldSpec::new(n, r, WarpSpec::hyperbolic()).unwrap());
        }
        for r in [0.6, 1.3] {
            out.push(ManifoldSpec::new(n, r, poly1.clone()).unwrap());
        }
        for r in [0.7, 1.1] {
            out.push(ManifoldSpec::new(n, r, poly2.clone()).unwrap());
        }
        out.push(ManifoldSpec::new(n, 1.0, WarpSpec::euclidean()).unwrap());
    }
    out
}
