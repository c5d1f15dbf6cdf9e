//! Moment criteria for explosion and non-explosion, and the classification
//! of the (d, gamma) plane built on them.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::quad::{integrate_singular, integrate_tail, Node, QuadConfig, QuadResult};
use crate::specfun::Params;

/// Target absolute error of every criterion integral.
pub const CRITERIA_TOL: f64 = 1e-8;

/// Default number of gamma points per dimension in the diagram scan.
pub const DEFAULT_GAMMA_RESOLUTION: usize = 60;

/// Default safety margin added to the quadrature error before comparing.
pub const DEFAULT_MARGIN: f64 = 1e-6;

fn cfg() -> QuadConfig {
    QuadConfig { abs_tol: CRITERIA_TOL, rel_tol: 0.0, max_intervals: 4000 }
}

fn inner_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 0.1 * CRITERIA_TOL, rel_tol: 0.0, max_intervals: 4000 }
}

/// `E[R^b]` for the branching ratio `R`.
///
/// The half-line is folded onto `[0, 1]` with `r -> 1/r`, leaving a
/// power-law endpoint at 0 and the singular point at 1. Convergent exactly when
/// `1 - 2 gamma < b < d + 2 - 4 gamma`.
pub fn moment_rb(p: &Params, b: f64) -> Result<QuadResult> {
    if !b.is_finite() {
        return Err(Error::domain("moment exponent must be finite"));
    }
    let (lo, hi) = (1.0 - 2.0 * p.gamma, p.dim() + 2.0 - 4.0 * p.gamma);
    if !(b > lo && b < hi) {
        return Err(Error::Divergent(format!("E[R^{b}] needs {lo} < b < {hi}")));
    }
    let k = Kernel::new(*p)?;
    let e0 = (2.0 * p.gamma - 2.0 + b).min(p.dim() + 1.0 - 4.0 * p.gamma - b);
    let e1 = k.ratio_exponent_at_one();
    // g(1/s) / s^2 = s^{2 b*} g(s), so the part beyond r = 1 is g(s) s^{2 b* - b}
    let b_bar = 2.0 * p.bstar() - b;
    let res = integrate_singular(
        |n: Node| {
            let s = n.x;
            k.ratio_pdf_delta(s, n.to_b).unwrap_or(f64::NAN) * (s.powf(b) + s.powf(b_bar))
        },
        0.0,
        1.0,
        e0,
        e1,
        cfg(),
    )?;
    res.require("E[R^b]")
}

/// `b* = (d+3)/2 - 3 gamma`, the minimizer of `b -> E[R^b]`.
pub fn b_star(p: &Params) -> Result<f64> {
    let b = p.bstar();
    if b > 0.0 {
        Ok(b)
    } else {
        Err(Error::domain(format!(
            "b* = {b} is not positive: gamma = {} >= (d+3)/6 = {}",
            p.gamma,
            Params::gamma_symmetric(p.d)
        )))
    }
}

/// `E[R^{b*}]` as the angle integral
/// `Cbar int_0^pi int_0^{pi - phi1} (sin phi2 sin(phi1 + phi2))^{(d-1)/2 - gamma} sin^{2 gamma - 2} phi1`.
pub fn moment_rbstar_angles(p: &Params) -> Result<QuadResult> {
    b_star(p)?;
    let k = Kernel::new(*p)?;
    let e = (p.dim() - 1.0) / 2.0 - p.gamma;
    let alpha = 2.0 * p.gamma - 2.0;
    let outer = integrate_singular(
        |n: Node| {
            let phi1 = n.x;
            let inner = integrate_singular(
                // sin(phi1 + phi2) = sin(pi - phi1 - phi2), the distance to the far edge
                |m: Node| (m.x.sin() * m.to_b.sin()).powf(e),
                0.0,
                n.to_b,
                e,
                e,
                inner_cfg(),
            );
            match inner {
                Ok(r) => r.value * phi1.sin().powf(alpha),
                Err(_) => f64::NAN,
            }
        },
        0.0,
        PI,
        alpha,
        0.0,
        cfg(),
    )?;
    Ok(nested(outer, PI).scale(k.angle_constant())).and_then(|r| r.require("E[R^b*] (angles)"))
}

/// Adds the inner tolerance, integrated over the outer range, to the outer error.
fn nested(outer: QuadResult, range: f64) -> QuadResult {
    QuadResult { error: outer.error + inner_cfg().abs_tol * range, ..outer }
}

/// `E[R_max^{-2 gamma}]` with `R_max = max(|W_1|, |W_2|) / |xi|`.
///
/// For `d >= 2` this is the reflected angle integral over `0 < phi2 < phi1 < pi/2`.
/// For `d = 1` it uses the density `2 H(r|1)` of `R_max` on `r > 1/2`.
pub fn moment_rmax(p: &Params) -> Result<QuadResult> {
    if p.d == 1 {
        return moment_rmax_line(p);
    }
    moment_rmax_reflected(p)
}

fn rmax_integrand_parts(p: &Params) -> (f64, f64) {
    (p.dim() + 1.0 - 2.0 * p.gamma, 2.0 * p.gamma - 2.0)
}

/// The reflected form: `2 Cbar int_0^{pi/2} int_0^{phi1}
/// (sin^{k}(phi1 + phi2) + sin^{k}(phi1 - phi2)) sin^{2 gamma - 2} phi2 / sin^2 phi1`,
/// `k = d + 1 - 2 gamma`.
pub fn moment_rmax_reflected(p: &Params) -> Result<QuadResult> {
    if p.d < 2 {
        return Err(Error::domain("the angle form of E[R_max^{-2 gamma}] needs d >= 2"));
    }
    let k = Kernel::new(*p)?;
    let (kk, alpha) = rmax_integrand_parts(p);
    let outer = integrate_singular(
        |n: Node| {
            let phi1 = n.x;
            let inner = integrate_singular(
                |m: Node| ((phi1 + m.x).sin().powf(kk) + m.to_b.sin().powf(kk)) * m.x.sin().powf(alpha),
                0.0,
                phi1,
                alpha,
                0.0,
                inner_cfg(),
            );
            match inner {
                Ok(r) => r.value / (phi1.sin() * phi1.sin()),
                Err(_) => f64::NAN,
            }
        },
        0.0,
        FRAC_PI_2,
        p.dim() - 2.0,
        0.0,
        cfg(),
    )?;
    nested(outer, FRAC_PI_2).scale(2.0 * k.angle_constant()).require("E[R_max^{-2 gamma}] (reflected)")
}

/// The same expectation before the reflection `phi1 -> pi - phi1`:
/// `2 Cbar (int_0^{pi/2} int_0^{phi1} + int_{pi/2}^{pi} int_0^{pi - phi1})
/// sin^{k}(phi1 + phi2) sin^{2 gamma - 2} phi2 / sin^2 phi1`.
pub fn moment_rmax_unreflected(p: &Params) -> Result<QuadResult> {
    if p.d < 2 {
        return Err(Error::domain("the angle form of E[R_max^{-2 gamma}] needs d >= 2"));
    }
    let k = Kernel::new(*p)?;
    let (kk, alpha) = rmax_integrand_parts(p);
    let first = integrate_singular(
        |n: Node| {
            let phi1 = n.x;
            let inner = integrate_singular(
                |m: Node| (phi1 + m.x).sin().powf(kk) * m.x.sin().powf(alpha),
                0.0,
                phi1,
                alpha,
                0.0,
                inner_cfg(),
            );
            inner.map(|r| r.value / (phi1.sin() * phi1.sin())).unwrap_or(f64::NAN)
        },
        0.0,
        FRAC_PI_2,
        p.dim() - 2.0,
        0.0,
        cfg(),
    )?;
    let second = integrate_singular(
        |n: Node| {
            // n.to_b = pi - phi1, the length of the inner range
            let len = n.to_b;
            let inner = integrate_singular(
                |m: Node| m.to_b.sin().powf(kk) * m.x.sin().powf(alpha),
                0.0,
                len,
                alpha,
                kk,
                inner_cfg(),
            );
            inner.map(|r| r.value / (len.sin() * len.sin())).unwrap_or(f64::NAN)
        },
        FRAC_PI_2,
        PI,
        0.0,
        p.dim() - 2.0,
        cfg(),
    )?;
    nested(first.add(second), PI).scale(2.0 * k.angle_constant()).require("E[R_max^{-2 gamma}] (unreflected)")
}

/// `d = 1`: `int_{1/2}^inf r^{-2} |1 - r|^{2 gamma - 2} dr / int_{1/2}^inf |r - r^2|^{2 gamma - 2} dr`.
fn moment_rmax_line(p: &Params) -> Result<QuadResult> {
    let e = 2.0 * p.gamma - 2.0;
    let piece = |f: &dyn Fn(f64, f64) -> f64, tail: f64| -> Result<QuadResult> {
        // f(r, |1 - r|)
        let a = integrate_singular(|n: Node| f(n.x, n.to_b), 0.5, 1.0, 0.0, e, cfg())?;
        let b = integrate_singular(|n: Node| f(n.x, n.from_a), 1.0, 2.0, e, 0.0, cfg())?;
        let c = integrate_tail(|x| f(x, x - 1.0), 2.0, 0.0, tail, cfg())?;
        a.add(b).add(c).require("E[R_max^{-2 gamma}] (d = 1)")
    };
    let num = piece(&|r, m| m.powf(e) / (r * r), e - 2.0)?;
    let den = piece(&|r, m| (r * m).powf(e), 2.0 * e)?;
    let value = num.value / den.value;
    let error = value * (num.error / num.value + den.error / den.value);
    Ok(QuadResult { value, error, evals: num.evals + den.evals, converged: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Explosive,
    NonExplosive,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Explosive => "Explosive",
            Verdict::NonExplosive => "NonExplosive",
            Verdict::Undetermined => "Undetermined",
        }
    }

    /// Position along increasing gamma in a well-ordered column of the diagram.
    fn rank(&self) -> u8 {
        match self {
            Verdict::NonExplosive => 0,
            Verdict::Undetermined => 1,
            Verdict::Explosive => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub e_rmax: f64,
    pub e_rmax_err: f64,
    /// Present only when `gamma < (d+3)/6`.
    pub e_rbstar: Option<f64>,
    pub e_rbstar_err: Option<f64>,
    pub quad_error: f64,
    pub diagnostic: Option<String>,
}

/// Explosive if `E[R_max^{-2 gamma}] + err + margin < 1`; otherwise
/// NonExplosive if `d >= 2`, `gamma < (d+3)/6` and `E[R^{b*}] + err + margin < 1/2`;
/// otherwise Undetermined. Quadrature failures give Undetermined with a diagnostic.
pub fn classify(p: &Params, margin: f64) -> Classification {
    let mut out = Classification {
        verdict: Verdict::Undetermined,
        e_rmax: f64::NAN,
        e_rmax_err: f64::NAN,
        e_rbstar: None,
        e_rbstar_err: None,
        quad_error: 0.0,
        diagnostic: None,
    };
    let mut notes = Vec::new();
    match moment_rmax(p) {
        Ok(r) => {
            out.e_rmax = r.value;
            out.e_rmax_err = r.error;
            out.quad_error += r.error;
            if r.value + r.error + margin < 1.0 {
                out.verdict = Verdict::Explosive;
            }
        }
        Err(e) => notes.push(format!("E[R_max^-2gamma]: {e}")),
    }
    if p.d >= 2 && p.bstar() > 0.0 {
        match moment_rb(p, p.bstar()) {
            Ok(r) => {
                out.e_rbstar = Some(r.value);
                out.e_rbstar_err = Some(r.error);
                out.quad_error += r.error;
                if out.verdict == Verdict::Undetermined && r.value + r.error + margin < 0.5 {
                    out.verdict = Verdict::NonExplosive;
                }
            }
            Err(e) => notes.push(format!("E[R^b*]: {e}")),
        }
    }
    if !notes.is_empty() {
        out.diagnostic = Some(notes.join("; "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    pub d: usize,
    pub gamma: f64,
    pub classification: Classification,
}

/// Cell midpoints of `(1/2, (d+2)/4)`, so both open ends are avoided by half a cell.
pub fn gamma_grid(d: usize, resolution: usize) -> Vec<f64> {
    let (lo, hi) = (0.5, Params::gamma_upper(d));
    let w = (hi - lo) / resolution as f64;
    (0..resolution).map(|j| lo + (j as f64 + 0.5) * w).collect()
}

/// One classification per grid point, in order of `d` then `gamma`.
pub fn scan_diagram(ds: &[usize], gamma_resolution: usize, margin: f64) -> Result<Vec<DiagramRow>> {
    if ds.is_empty() || gamma_resolution == 0 {
        return Err(Error::domain("the diagram needs at least one dimension and one gamma point"));
    }
    let points: Vec<(usize, f64)> =
        ds.iter().flat_map(|&d| gamma_grid(d, gamma_resolution).into_iter().map(move |g| (d, g))).collect();
    Ok(points
        .into_par_iter()
        .map(|(d, gamma)| {
            let classification = match Params::new(d, gamma) {
                Ok(p) => classify(&p, margin),
                Err(e) => Classification {
                    verdict: Verdict::Undetermined,
                    e_rmax: f64::NAN,
                    e_rmax_err: f64::NAN,
                    e_rbstar: None,
                    e_rbstar_err: None,
                    quad_error: f64::NAN,
                    diagnostic: Some(e.to_string()),
                },
            };
            DiagramRow { d, gamma, classification }
        })
        .collect())
}

/// Dimensions whose verdicts do not run NonExplosive, Undetermined, Explosive
/// in order of increasing gamma.
pub fn non_monotone_columns(rows: &[DiagramRow]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.d == b.d && b.classification.verdict.rank() < a.classification.verdict.rank() && !out.contains(&a.d) {
            out.push(a.d);
        }
    }
    out
}
