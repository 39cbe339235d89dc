//! Warping functions `h` of rotationally symmetric metrics `dr² + h(r)² g_{S^{n-1}}`.
//!
//! Every built-in warp is smooth at the pole: `h(0) = 0`, `h'(0) = 1` and all
//! even derivatives vanish at `r = 0`. Custom warps are restricted to odd
//! polynomials `h(r) = r + a₃r³ + a₅r⁵ + …`, which satisfy this by construction.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Result, SteklovError};
use crate::radial::ManifoldSpec;

/// Absolute tolerance used by [`check_hypotheses`] at each sample.
pub const HYPOTHESIS_TOL: f64 = 1e-10;

const POLY_SEARCH_LIMIT: f64 = 1e3;
const POLY_SCAN_STEP: f64 = 1e-3;
const POLY_ROOT_TOL: f64 = 1e-12;

/// The family a warp belongs to, without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpFamily {
    Euclidean,
    Sphere,
    Hyperbolic,
    SpaceForm,
    OddPolynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WarpKind {
    /// `h(r) = r`
    Euclidean,
    /// `h(r) = sin r`
    Sphere,
    /// `h(r) = sinh r`
    Hyperbolic,
    /// Constant curvature `k`: `sin(√k r)/√k`, `r` or `sinh(√-k r)/√-k`.
    SpaceForm { k: f64 },
    /// `h(r) = r + Σ coeffs[i] r^(2i+3)`, i.e. `coeffs = [a₃, a₅, …]`.
    OddPolynomial { coeffs: Vec<f64> },
}

/// An admissible warping function together with the radius where it stops being usable.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpSpec {
    pub kind: WarpKind,
    /// `π/√K` for positive curvature, `+∞` for flat and hyperbolic kinds. For odd
    /// polynomials, the first zero of `min(h, h')`, or `+∞` if there is none in `(0, 1000]`.
    pub max_radius: f64,
}

impl WarpSpec {
    pub fn euclidean() -> Self {
        WarpSpec {
            kind: WarpKind::Euclidean,
            max_radius: f64::INFINITY,
        }
    }

    pub fn sphere() -> Self {
        WarpSpec {
            kind: WarpKind::Sphere,
            max_radius: std::f64::consts::PI,
        }
    }

    pub fn hyperbolic() -> Self {
        WarpSpec {
            kind: WarpKind::Hyperbolic,
            max_radius: f64::INFINITY,
        }
    }

    pub fn space_form(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(SteklovError::InvalidInput(format!(
                "space-form curvature must be finite, got {k}"
            )));
        }
        let max_radius = if k > 0.0 {
            std::f64::consts::PI / k.sqrt()
        } else {
            f64::INFINITY
        };
        Ok(WarpSpec {
            kind: WarpKind::SpaceForm { k },
            max_radius,
        })
    }

    /// `h(r) = r + a₃r³ + a₅r⁵ + …` with `coeffs = [a₃, a₅, …]`.
    pub fn odd_polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(SteklovError::InvalidInput(format!(
                "polynomial coefficient {bad} is not finite"
            )));
        }
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let mut warp = WarpSpec {
            kind: WarpKind::OddPolynomial { coeffs },
            max_radius: f64::INFINITY,
        };
        let (_, dh0, _) = warp.eval_unchecked(0.0);
        if dh0 != 1.0 {
            return Err(SteklovError::InvalidInput(format!(
                "odd polynomial has h'(0) = {dh0}, expected 1"
            )));
        }
        warp.max_radius = poly_max_radius(&warp);
        Ok(warp)
    }

    /// Evaluates `(h, h', h'')` at `r ∈ [0, max_radius)`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r >= 0.0 && r < self.max_radius) {
            return Err(SteklovError::Domain(format!(
                "r = {r} outside [0, {}) for warp {self}",
                self.max_radius
            )));
        }
        Ok(self.eval_unchecked(r))
    }

    /// Evaluates `(h, h', h'')` without the domain check. The analytic formulas
    /// are valid for every real `r`, which is what the oddness checks rely on.
    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> (f64, f64, f64) {
        match &self.kind {
            WarpKind::Euclidean => (r, 1.0, 0.0),
            WarpKind::Sphere => {
                let (s, c) = r.sin_cos();
                (s, c, -s)
            }
            WarpKind::Hyperbolic => {
                let (s, c) = (r.sinh(), r.cosh());
                (s, c, s)
            }
            WarpKind::SpaceForm { k } => {
                let k = *k;
                if k > 0.0 {
                    let q = k.sqrt();
                    let (s, c) = (q * r).sin_cos();
                    (s / q, c, -q * s)
                } else if k < 0.0 {
                    let q = (-k).sqrt();
                    let (s, c) = ((q * r).sinh(), (q * r).cosh());
                    (s / q, c, q * s)
                } else {
                    (r, 1.0, 0.0)
                }
            }
            WarpKind::OddPolynomial { coeffs } => {
                // Horner in r²; coefficient i multiplies r^(2i+3).
                let r2 = r * r;
                let mut h = 0.0;
                let mut dh = 0.0;
                let mut d2h = 0.0;
                for (i, &a) in coeffs.iter().enumerate().rev() {
                    let p = (2 * i + 3) as f64;
                    h = h * r2 + a;
                    dh = dh * r2 + p * a;
                    d2h = d2h * r2 + p * (p - 1.0) * a;
                }
                (r * (1.0 + r2 * h), 1.0 + r2 * dh, r * d2h)
            }
        }
    }

    /// `h'''(0) / 6`, the cubic Taylor coefficient of `h` at the pole.
    pub fn cubic_coefficient(&self) -> f64 {
        match &self.kind {
            WarpKind::Euclidean => 0.0,
            WarpKind::Sphere => -1.0 / 6.0,
            WarpKind::Hyperbolic => 1.0 / 6.0,
            WarpKind::SpaceForm { k } => -k / 6.0,
            WarpKind::OddPolynomial { coeffs } => coeffs.first().copied().unwrap_or(0.0),
        }
    }

    /// The warp of the metric `c² g`, i.e. `r ↦ c·h(r/c)`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(SteklovError::InvalidInput(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        let c2 = c * c;
        match &self.kind {
            WarpKind::Euclidean => Ok(WarpSpec::euclidean()),
            WarpKind::Sphere => WarpSpec::space_form(1.0 / c2),
            WarpKind::Hyperbolic => WarpSpec::space_form(-1.0 / c2),
            WarpKind::SpaceForm { k } => WarpSpec::space_form(k / c2),
            WarpKind::OddPolynomial { coeffs } => {
                let scaled = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * c.powi(-(2 * i as i32 + 2)))
                    .collect();
                WarpSpec::odd_polynomial(scaled)
            }
        }
    }

    /// Constant sectional curvature of the model, if the warp is a space form.
    pub fn curvature(&self) -> Option<f64> {
        match &self.kind {
            WarpKind::Euclidean => Some(0.0),
            WarpKind::Sphere => Some(1.0),
            WarpKind::Hyperbolic => Some(-1.0),
            WarpKind::SpaceForm { k } => Some(*k),
            WarpKind::OddPolynomial { coeffs } => coeffs.is_empty().then_some(0.0),
        }
    }

    pub fn family(&self) -> WarpFamily {
        match &self.kind {
            WarpKind::Euclidean => WarpFamily::Euclidean,
            WarpKind::Sphere => WarpFamily::Sphere,
            WarpKind::Hyperbolic => WarpFamily::Hyperbolic,
            WarpKind::SpaceForm { .. } => WarpFamily::SpaceForm,
            WarpKind::OddPolynomial { .. } => WarpFamily::OddPolynomial,
        }
    }
}

/// Builds a warp from a family tag and its parameters: the curvature for
/// `SpaceForm`, the coefficients `a₃, a₅, …` for `OddPolynomial`, nothing otherwise.
pub fn make_warp(family: WarpFamily, params: &[f64]) -> Result<WarpSpec> {
    let expect_none = |name: &str| {
        if params.is_empty() {
            Ok(())
        } else {
            Err(SteklovError::InvalidInput(format!(
                "{name} takes no parameters, got {}",
                params.len()
            )))
        }
    };
    match family {
        WarpFamily::Euclidean => expect_none("euclidean").map(|_| WarpSpec::euclidean()),
        WarpFamily::Sphere => expect_none("sphere").map(|_| WarpSpec::sphere()),
        WarpFamily::Hyperbolic => expect_none("hyperbolic").map(|_| WarpSpec::hyperbolic()),
        WarpFamily::SpaceForm => match params {
            [k] => WarpSpec::space_form(*k),
            _ => Err(SteklovError::InvalidInput(
                "spaceform takes exactly one parameter K".into(),
            )),
        },
        WarpFamily::OddPolynomial => WarpSpec::odd_polynomial(params.to_vec()),
    }
}

fn poly_max_radius(warp: &WarpSpec) -> f64 {
    let g = |r: f64| {
        let (h, dh, _) = warp.eval_unchecked(r);
        h.min(dh)
    };
    let mut lo = 0.0;
    // h ≈ r near the pole, so start the scan one step out.
    let mut hi = POLY_SCAN_STEP;
    while hi <= POLY_SEARCH_LIMIT {
        if g(hi) <= 0.0 {
            while hi - lo > POLY_ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        lo = hi;
        hi += POLY_SCAN_STEP;
    }
    f64::INFINITY
}

impl fmt::Display for WarpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WarpKind::Euclidean => write!(f, "euclidean"),
            WarpKind::Sphere => write!(f, "sphere"),
            WarpKind::Hyperbolic => write!(f, "hyperbolic"),
            WarpKind::SpaceForm { k } => write!(f, "spaceform:K={k}"),
            WarpKind::OddPolynomial { coeffs } => {
                write!(f, "poly:")?;
                if coeffs.is_empty() {
                    return write!(f, "a3=0");
                }
                for (i, a) in coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "a{}={a}", 2 * i + 3)?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for WarpSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses `euclidean | sphere | hyperbolic | spaceform:K=<real> | poly:a3=<real>[,a5=<real>,...]`.
impl FromStr for WarpSpec {
    type Err = SteklovError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| SteklovError::InvalidInput(format!("warp '{s}': {msg}"));
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let parse_real = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("cannot parse '{v}': {e}")))
        };
        match (head.to_ascii_lowercase().as_str(), tail) {
            ("euclidean", None) => Ok(WarpSpec::euclidean()),
            ("sphere", None) => Ok(WarpSpec::sphere()),
            ("hyperbolic", None) => Ok(WarpSpec::hyperbolic()),
            ("spaceform", Some(t)) => {
                let (key, val) = t
                    .split_once('=')
                    .ok_or_else(|| bad("expected K=<real>".into()))?;
                if key.trim() != "K" && key.trim() != "k" {
                    return Err(bad(format!("unknown key '{key}'")));
                }
                WarpSpec::space_form(parse_real(val)?)
            }
            ("poly", Some(t)) => {
                let mut coeffs: Vec<f64> = Vec::new();
                for item in t.split(',') {
                    let (key, val) = item
                        .split_once('=')
                        .ok_or_else(|| bad(format!("expected a<odd>=<real>, got '{item}'")))?;
                    let power: usize = key
                        .trim()
                        .strip_prefix('a')
                        .and_then(|p| p.parse().ok())
                        .ok_or_else(|| bad(format!("bad coefficient name '{key}'")))?;
                    if power < 3 || power.is_multiple_of(2) {
                        return Err(bad(format!(
                            "only odd powers >= 3 are allowed, got a{power}"
                        )));
                    }
                    let idx = (power - 3) / 2;
                    if coeffs.len() <= idx {
                        coeffs.resize(idx + 1, 0.0);
                    }
                    coeffs[idx] = parse_real(val)?;
                }
                WarpSpec::odd_polynomial(coeffs)
            }
            _ => Err(bad(
                "expected euclidean | sphere | hyperbolic | spaceform:K=<real> | poly:a3=<real>[,a5=<real>,...]"
                    .into(),
            )),
        }
    }
}

/// Curvature and convexity diagnostics for a manifold, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub ricci_nonneg: bool,
    pub ricci_nonpos: bool,
    pub convex_boundary: bool,
    /// `h'' ≤ 0` and `0 < h' ≤ 1` on `[0, R]`.
    pub hypotheses_hold: bool,
    /// Most negative slack among the nonnegative-curvature checks.
    pub worst_margin: f64,
    /// `max |h' - 1|` over the grid; zero exactly for the flat warp.
    pub max_slope_defect: f64,
}

/// Samples `[0, R]` uniformly and checks the curvature sign conditions.
///
/// Ricci components of `dr² + h² g_{S^{n-1}}`:
/// radial `-(n-1) h''/h`, tangential `-h''/h + (n-2)(1 - h'²)/h²`.
/// Both are nonnegative when `-h''/h ≥ 0` and, for `n ≥ 3`, `(1 - h'²)/h² ≥ 0`;
/// in two dimensions only the Gaussian curvature `-h''/h` is checked.
/// The ratios are skipped at `r = 0`, where they are defined only as limits.
pub fn check_hypotheses(manifold: &ManifoldSpec, grid_size: usize) -> HypothesisReport {
    let grid_size = grid_size.max(16);
    let tol = HYPOTHESIS_TOL;
    let n = manifold.n;
    let big_r = manifold.radius;

    let mut ricci_nonneg = true;
    let mut ricci_nonpos = true;
    let mut hypotheses = true;
    let mut worst = f64::INFINITY;
    let mut slope_defect: f64 = 0.0;

    for i in 0..grid_size {
        let r = big_r * i as f64 / (grid_size - 1) as f64;
        let (h, dh, d2h) = manifold.warp.eval_unchecked(r);

        hypotheses &= d2h <= tol && dh > 0.0 && dh <= 1.0 + tol;
        worst = worst.min(-d2h).min(dh).min(1.0 - dh);
        slope_defect = slope_defect.max((dh - 1.0).abs());

        if r > 0.0 {
            let gauss = -d2h / h;
            worst = worst.min(gauss);
            ricci_nonneg &= gauss >= -tol;
            ricci_nonpos &= gauss <= tol;
            if n >= 3 {
                let tangential = (1.0 - dh * dh) / (h * h);
                worst = worst.min(tangential);
                ricci_nonneg &= tangential >= -tol;
                ricci_nonpos &= tangential <= tol;
            }
        }
    }

    let (_, dh_r, _) = manifold.warp.eval_unchecked(big_r);
    HypothesisReport {
        ricci_nonneg,
        ricci_nonpos,
        convex_boundary: dh_r > 0.0,
        hypotheses_hold: hypotheses,
        worst_margin: worst,
        max_slope_defect: slope_defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_at_quarter_turn() {
        let w = WarpSpec::sphere();
        let (h, dh, _) = w.eval(PI / 2.0).unwrap();
        assert_abs_diff_eq!(h, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dh, 0.0, epsilon = 1e-15);
        assert_eq!(w.max_radius, PI);
    }

    #[test]
    fn flat_space_form_is_identity() {
        let w = make_warp(WarpFamily::SpaceForm, &[0.0]).unwrap();
        for i in 0..50 {
            let r = 0.37 * i as f64;
            assert_eq!(w.eval(r).unwrap(), (r, 1.0, 0.0));
        }
    }

    #[test]
    fn cubic_polynomial_values() {
        let w = make_warp(WarpFamily::OddPolynomial, &[-1.0 / 6.0]).unwrap();
        let (h, _, _) = w.eval(1.0).unwrap();
        assert_abs_diff_eq!(h, 1.0 - 1.0 / 6.0, epsilon = 1e-15);
        let (_, _, d2h) = w.eval(0.5).unwrap();
        assert_abs_diff_eq!(d2h, -0.5, epsilon = 1e-15);
        // h' = 1 - r²/2 vanishes first, at √2.
        assert_abs_diff_eq!(w.max_radius, 2f64.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn eval_at_pole_and_trig_point() {
        assert_eq!(WarpSpec::hyperbolic().eval(0.0).unwrap(), (0.0, 1.0, 0.0));
        let (h, dh, d2h) = WarpSpec::sphere().eval(PI / 3.0).unwrap();
        assert_abs_diff_eq!(h, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dh, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d2h, -(3f64.sqrt()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        assert!(matches!(
            WarpSpec::sphere().eval(PI),
            Err(SteklovError::Domain(_))
        ));
        assert!(WarpSpec::euclidean().eval(-1e-3).is_err());
        assert!(WarpSpec::hyperbolic().eval(f64::NAN).is_err());
    }

    #[test]
    fn malformed_polynomials_rejected() {
        assert!(WarpSpec::odd_polynomial(vec![f64::NAN]).is_err());
        assert!(make_warp(WarpFamily::SpaceForm, &[]).is_err());
        assert!(make_warp(WarpFamily::Sphere, &[1.0]).is_err());
        assert!(WarpSpec::space_form(f64::INFINITY).is_err());
    }

    #[test]
    fn parse_grammar() {
        assert_eq!("sphere".parse::<WarpSpec>().unwrap(), WarpSpec::sphere());
        assert_eq!(
            "spaceform:K=-0.25".parse::<WarpSpec>().unwrap(),
            WarpSpec::space_form(-0.25).unwrap()
        );
        let p: WarpSpec = "poly:a3=-0.1,a5=0.01".parse().unwrap();
        assert_eq!(
            p.kind,
            WarpKind::OddPolynomial {
                coeffs: vec![-0.1, 0.01]
            }
        );
        let q: WarpSpec = "poly:a5=0.02".parse().unwrap();
        assert_eq!(q.cubic_coefficient(), 0.0);
        assert!("poly:a4=1".parse::<WarpSpec>().is_err());
        assert!("torus".parse::<WarpSpec>().is_err());
        assert!("spaceform:K=abc".parse::<WarpSpec>().is_err());
        for s in [
            "euclidean",
            "hyperbolic",
            "spaceform:K=2",
            "poly:a3=-0.1,a5=0.01",
        ] {
            let w: WarpSpec = s.parse().unwrap();
            assert_eq!(w.to_string().parse::<WarpSpec>().unwrap(), w);
        }
    }

    #[test]
    fn rescaling_matches_definition() {
        let c = 2.5;
        for w in [
            WarpSpec::sphere(),
            WarpSpec::hyperbolic(),
            WarpSpec::odd_polynomial(vec![-0.1, 0.004]).unwrap(),
        ] {
            let ws = w.rescaled(c).unwrap();
            for i in 1..20 {
                let r = 0.05 * i as f64;
                let (h, dh, d2h) = w.eval_unchecked(r / c);
                let (hs, dhs, d2hs) = ws.eval_unchecked(r);
                assert_abs_diff_eq!(hs, c * h, epsilon = 1e-14);
                assert_abs_diff_eq!(dhs, dh, epsilon = 1e-14);
                assert_abs_diff_eq!(d2hs, d2h / c, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hypotheses_sphere_hyperbolic_flat() {
        let sphere = ManifoldSpec::new(3, PI / 3.0, WarpSpec::sphere()).unwrap();
        let rep = check_hypotheses(&sphere, 64);
        assert!(rep.ricci_nonneg && rep.convex_boundary && rep.hypotheses_hold);
        assert!(!rep.ricci_nonpos);

        let hyp = ManifoldSpec::new(3, 1.0, WarpSpec::hyperbolic()).unwrap();
        let rep = check_hypotheses(&hyp, 64);
        assert!(!rep.ricci_nonneg && rep.ricci_nonpos && rep.convex_boundary);
        assert!(!rep.hypotheses_hold);
        assert!(rep.worst_margin < 0.0);

        let flat = ManifoldSpec::new(4, 2.0, WarpSpec::euclidean()).unwrap();
        let rep = check_hypotheses(&flat, 64);
        assert!(rep.ricci_nonneg && rep.ricci_nonpos && rep.convex_boundary && rep.hypotheses_hold);
        assert_eq!(rep.worst_margin, 0.0);
        assert_eq!(rep.max_slope_defect, 0.0);
    }

    #[test]
    fn sphere_past_equator_is_not_convex() {
        let m = ManifoldSpec::new(2, 2.0, WarpSpec::sphere()).unwrap();
        let rep = check_hypotheses(&m, 32);
        assert!(rep.ricci_nonneg);
        assert!(!rep.convex_boundary);
        assert!(!rep.hypotheses_hold);
    }
}
