//! Adaptive Gauss-Kronrod quadrature with power-stripping substitutions for
//! algebraic endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// G7-K15 abscissae on [0, 1) and weights; index 0 is the centre.
const XK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];
const WK: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];
// Gauss weights for XK[0], XK[2], XK[4], XK[6].
const WG: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

/// Tolerances and work limit for one adaptive integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

impl QuadConfig {
    pub fn with_abs(abs_tol: f64) -> Self {
        QuadConfig { abs_tol, rel_tol: 0.0, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true }
    }

    pub fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, k: f64) -> QuadResult {
        QuadResult { value: self.value * k, error: self.error * k.abs(), ..self }
    }

    /// Turns a non-converged result into an error.
    pub fn require(self, what: &str) -> Result<QuadResult> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature(format!(
                "{what}: value {} with error estimate {:e} did not reach tolerance",
                self.value, self.error
            )))
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[0] * fc;
    let mut g = WG[0] * fc;
    let mut bad = !fc.is_finite();
    for j in 1..8 {
        let dx = h * XK[j];
        let s = f(c - dx) + f(c + dx);
        bad |= !s.is_finite();
        k += WK[j] * s;
        if j % 2 == 0 {
            g += WG[j / 2] * s;
        }
    }
    if bad {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive G7-K15 integration of `f` over `[a, b]`, bisecting the panel with
/// the largest error estimate until the global tolerance is met.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult::zero());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("finite limits required; use integrate_tail".into()));
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let (v, e) = gk15(&mut f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a: lo, b: hi, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 15;
    let mut converged = false;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= tol {
            converged = true;
            break;
        }
        if heap.len() >= cfg.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in double precision
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evals += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed the drift of the running updates
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult { value: sign * value, error, evals, converged: converged || error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) })
}

/// A quadrature node with its distances to both ends of the interval, kept
/// separately so integrands can evaluate `x - a` and `b - x` without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    pub from_a: f64,
    pub to_b: f64,
}

fn strip_power(alpha: f64) -> f64 {
    if alpha < 0.0 {
        1.0 / (1.0 + alpha)
    } else {
        1.0
    }
}

/// Integrates `f` over `[a, b]` when `f ~ (x-a)^alpha_a` near `a` and
/// `f ~ (b-x)^alpha_b` near `b` (exponents above -1). Each half of the
/// interval is mapped through `x - a = (m - a) u^q` with `q = 1/(1+alpha)`,
/// which turns the algebraic singularity into a bounded integrand.
/// A logarithmic singularity is handled well by passing `alpha = -0.5`.
pub fn integrate_singular<F: FnMut(Node) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    alpha_a: f64,
    alpha_b: f64,
    cfg: QuadConfig,
) -> Result<QuadResult> {
    if !(alpha_a > -1.0 && alpha_b > -1.0) {
        return Err(Error::Divergent(format!(
            "endpoint exponents ({alpha_a}, {alpha_b}) are not integrable"
        )));
    }
    if !(b > a) {
        return Err(Error::Quadrature(format!("integrate_singular needs a < b, got [{a}, {b}]")));
    }
    let half = 0.5 * (b - a);
    let sub = QuadConfig { abs_tol: 0.5 * cfg.abs_tol, ..cfg };
    let left = integrate(
        |u: f64| {
            let (t, w) = stripped(u, half, alpha_a);
            w * f(Node { x: a + t, from_a: t, to_b: (b - a) - t })
        },
        0.0,
        1.0,
        sub,
    )?;
    let right = integrate(
        |u: f64| {
            let (t, w) = stripped(u, half, alpha_b);
            w * f(Node { x: b - t, from_a: (b - a) - t, to_b: t })
        },
        0.0,
        1.0,
        sub,
    )?;
    Ok(left.add(right))
}

/// Distances below this are not resolved by the power-stripping map.
const DISTANCE_FLOOR: f64 = 1e-100;

/// Distance `t = half u^q` from the endpoint and the Jacobian `dt/du`.
///
/// For exponents near -1 the map sends most of `[0, 1]` below the smallest
/// double. There the integrand is taken as `t^alpha` times its value at the
/// floor, and since `q (1 + alpha) = 1` the mapped integrand is constant in `u`.
fn stripped(u: f64, half: f64, alpha: f64) -> (f64, f64) {
    let q = strip_power(alpha);
    let t = half * u.powf(q);
    if t >= DISTANCE_FLOOR || alpha >= 0.0 {
        return (t, half * q * u.powf(q - 1.0));
    }
    let log_w = (1.0 + alpha) * half.ln() + q.ln() - alpha * DISTANCE_FLOOR.ln();
    (DISTANCE_FLOOR, log_w.exp())
}

/// Integrates `f` over `[a, inf)` for `a > 0` where `f ~ x^beta` at infinity
/// (`beta < -1`) and `f ~ (x-a)^alpha_a` at `a`.
pub fn integrate_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    alpha_a: f64,
    beta: f64,
    cfg: QuadConfig,
) -> Result<QuadResult> {
    if !(a > 0.0) {
        return Err(Error::Quadrature("integrate_tail needs a > 0".into()));
    }
    if !(beta < -1.0) {
        return Err(Error::Divergent(format!("tail exponent {beta} is not integrable")));
    }
    // x = a/u maps [a, inf) onto (0, 1]; near u = 0 the integrand is u^{-beta-2}.
    integrate_singular(
        |n: Node| {
            let u = n.x;
            let x = a / u;
            a / (u * u) * f(x)
        },
        0.0,
        1.0,
        -beta - 2.0,
        alpha_a,
        cfg,
    )
}

/// Fixed composite G7-K15 rule with `panels` equal panels; used where the
/// integrand is smooth and a deterministic node set matters more than adaptivity.
pub fn composite_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let c = lo + 0.5 * width;
        let h = 0.5 * width;
        let mut k = WK[0] * f(c);
        for j in 1..8 {
            k += WK[j] * (f(c - h * XK[j]) + f(c + h * XK[j]));
        }
        total += k * h;
    }
    total
}

/// Nodes and weights of the composite rule used by [`composite_kronrod`].
pub fn composite_kronrod_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(15 * panels);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * width;
        let h = 0.5 * width;
        out.push((c, WK[0] * h));
        for j in 1..8 {
            out.push((c - h * XK[j], WK[j] * h));
            out.push((c + h * XK[j], WK[j] * h));
        }
    }
    out
}
