//! Special functions and the closed-form constants of the cascade.
//!
//! Gamma values come from `libm`; digamma and the Gauss hypergeometric
//! function are implemented here because the connection formulas near
//! `z = 1` need control over cancellation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and dissipation exponent of the fractional Navier-Stokes model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: usize,
    pub gamma: f64,
}

impl Params {
    /// Validates `1/2 < gamma < (d+2)/4`.
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if !gamma.is_finite() {
            return Err(Error::domain("gamma must be finite"));
        }
        let upper = (d as f64 + 2.0) / 4.0;
        if !(gamma > 0.5 && gamma < upper) {
            return Err(Error::domain(format!(
                "gamma = {gamma} outside the window (1/2, {upper}) for d = {d}"
            )));
        }
        Ok(Params { d, gamma })
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    /// `a = (d+1)/2 - gamma`, the power in the ratio density.
    pub fn a(&self) -> f64 {
        (self.dim() + 1.0) / 2.0 - self.gamma
    }

    /// `(d+3)/2 - 3 gamma`; positive exactly when `gamma < (d+3)/6`.
    pub fn bstar(&self) -> f64 {
        (self.dim() + 3.0) / 2.0 - 3.0 * self.gamma
    }

    /// `(2 pi)^{-d/2}`.
    pub fn c0(&self) -> f64 {
        (2.0 * PI).powf(-self.dim() / 2.0)
    }

    /// Upper end of the admissible gamma window, `(d+2)/4`.
    pub fn gamma_upper(d: usize) -> f64 {
        (d as f64 + 2.0) / 4.0
    }

    /// The value `(d+3)/6` at which the ratio law is symmetric under `r -> 1/r`.
    pub fn gamma_symmetric(d: usize) -> f64 {
        (d as f64 + 3.0) / 6.0
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// `(ln |Gamma(x)|, sign Gamma(x))`, defined away from the poles.
pub fn log_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || is_nonpositive_integer(x) {
        return Err(Error::domain(format!("Gamma has a pole at {x}")));
    }
    let (v, s) = libm::lgamma_r(x);
    Ok((v, if s < 0 { -1.0 } else { 1.0 }))
}

/// `1 / Gamma(x)`, which is entire; zero at the poles of Gamma.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    let (v, s) = libm::lgamma_r(x);
    let sign = if s < 0 { -1.0 } else { 1.0 };
    sign * (-v).exp()
}

/// Digamma function `psi(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_nonpositive_integer(x) {
        return Err(Error::domain(format!("digamma has a pole at {x}")));
    }
    if x < 0.5 {
        // reflection: psi(1-x) - psi(x) = pi cot(pi x)
        let r = digamma(1.0 - x)?;
        return Ok(r - PI / (PI * x).tan());
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // Bernoulli tail B_{2k}/(2k) for k = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(acc + y.ln() - 0.5 / y - tail)
}

const SERIES_CAP: usize = 10_000;
const SERIES_EPS: f64 = 1e-17;
/// Below this distance from an integer, `c - a - b` is treated through
/// polynomial interpolation in `c` around the logarithmic case.
const NEAR_INTEGER: f64 = 1e-4;

fn direct_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small = 0;
    for k in 0..SERIES_CAP {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) direct series exceeded {SERIES_CAP} terms"
    )))
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for real parameters and `0 <= z < 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_with_complement(a, b, c, z, 1.0 - z)
}

/// Same as [`gauss_2f1`] with `1 - z` supplied by the caller, so that values of
/// `z` close to one keep their full relative accuracy.
pub fn gauss_2f1_with_complement(a: f64, b: f64, c: f64, z: f64, one_minus_z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::domain("2F1 arguments must be finite"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("2F1 undefined for c = {c}")));
    }
    if !(0.0..=1.0).contains(&z) || !(one_minus_z > 0.0) {
        return Err(Error::domain(format!("2F1 needs 0 <= z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    // the function is symmetric in (a, b); fix an order so the result is too
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if z <= 0.5 {
        return direct_series(a, b, c, z);
    }
    let w = one_minus_z;
    let s = c - a - b;
    let m = s.round();
    if (s - m).abs() >= NEAR_INTEGER {
        return connection(a, b, c, w);
    }
    let mi = m as i64;
    if s == m {
        return log_case(a, b, mi, w);
    }
    // Interpolate in c through the exact logarithmic case and four regular nodes.
    let c0 = a + b + m;
    let h = 2.0 * NEAR_INTEGER;
    let offsets = [-2.0 * h, -h, 0.0, h, 2.0 * h];
    let mut values = [0.0; 5];
    for (v, off) in values.iter_mut().zip(offsets) {
        *v = if off == 0.0 {
            log_case(a, b, mi, w)?
        } else {
            connection(a, b, c0 + off, w)?
        };
    }
    let x = c - c0;
    let mut total = 0.0;
    for i in 0..5 {
        let mut l = 1.0;
        for j in 0..5 {
            if i != j {
                l *= (x - offsets[j]) / (offsets[i] - offsets[j]);
            }
        }
        total += l * values[i];
    }
    Ok(total)
}

/// Gamma ratio `Gamma(n1) Gamma(n2) / (Gamma(d1) Gamma(d2))` in log space with
/// sign tracking; a pole in the denominator yields zero.
fn gamma_ratio(n1: f64, n2: f64, d1: f64, d2: f64) -> Result<f64> {
    if is_nonpositive_integer(d1) || is_nonpositive_integer(d2) {
        return Ok(0.0);
    }
    let (ln1, s1) = log_gamma_signed(n1)?;
    let (ln2, s2) = log_gamma_signed(n2)?;
    let (ld1, t1) = log_gamma_signed(d1)?;
    let (ld2, t2) = log_gamma_signed(d2)?;
    Ok(s1 * s2 * t1 * t2 * (ln1 + ln2 - ld1 - ld2).exp())
}

fn connection(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let s = c - a - b;
    let g1 = gamma_ratio(c, s, c - a, c - b)?;
    let g2 = gamma_ratio(c, -s, a, b)?;
    let f1 = if g1 == 0.0 { 0.0 } else { direct_series(a, b, 1.0 - s, w)? };
    let f2 = if g2 == 0.0 { 0.0 } else { direct_series(c - a, c - b, s + 1.0, w)? };
    Ok(g1 * f1 + g2 * w.powf(s) * f2)
}

/// Pochhammer-weighted logarithmic series used when `c - a - b` is an integer `m`.
fn log_case(a: f64, b: f64, m: i64, w: f64) -> Result<f64> {
    let lnw = w.ln();
    if m == 0 {
        // c = a + b
        let pref = gamma_ratio(a + b, 1.0, a, b)?;
        let mut coef = 1.0;
        let mut sum = 0.0;
        let mut small = 0;
        for n in 0..SERIES_CAP {
            let nf = n as f64;
            let bracket = 2.0 * digamma(nf + 1.0)? - digamma_or_zero(a + nf)? - digamma_or_zero(b + nf)? - lnw;
            let term = coef * bracket;
            sum += term;
            if term.abs() <= SERIES_EPS * sum.abs() || coef == 0.0 {
                small += 1;
                if small >= 2 {
                    return Ok(pref * sum);
                }
            } else {
                small = 0;
            }
            coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
        }
        return Err(Error::NonConvergence("2F1 logarithmic series (m = 0)".into()));
    }
    if m > 0 {
        // c = a + b + m
        let mf = m as f64;
        let c = a + b + mf;
        let mut finite = 0.0;
        let mut coef = 1.0;
        for n in 0..m {
            finite += coef;
            let nf = n as f64;
            coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
        }
        finite *= (log_gamma(mf)?).exp() * gamma_ratio(c, 1.0, a + mf, b + mf)?;
        let pref = -(-w).powi(m as i32) * gamma_ratio(c, 1.0, a, b)?;
        if pref == 0.0 {
            return Ok(finite);
        }
        let mut coef = (-log_gamma(mf + 1.0)?).exp();
        let mut sum = 0.0;
        let mut small = 0;
        for n in 0..SERIES_CAP {
            let nf = n as f64;
            let bracket = lnw - digamma(nf + 1.0)? - digamma(nf + mf + 1.0)?
                + digamma_or_zero(a + nf + mf)?
                + digamma_or_zero(b + nf + mf)?;
            let term = coef * bracket;
            sum += term;
            if term.abs() <= SERIES_EPS * sum.abs() || coef == 0.0 {
                small += 1;
                if small >= 2 {
                    return Ok(finite + pref * sum);
                }
            } else {
                small = 0;
            }
            coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        }
        return Err(Error::NonConvergence("2F1 logarithmic series (m > 0)".into()));
    }
    // c = a + b - m', m' > 0
    let mp = (-m) as f64;
    let c = a + b - mp;
    let mut finite = 0.0;
    let mut coef = 1.0;
    for n in 0..(-m) {
        finite += coef;
        let nf = n as f64;
        coef *= (a - mp + nf) * (b - mp + nf) / ((nf + 1.0) * (1.0 - mp + nf)) * w;
    }
    finite *= (log_gamma(mp)?).exp() * gamma_ratio(c, 1.0, a, b)? * w.powi(m as i32);
    let sign = if (-m) % 2 == 0 { 1.0 } else { -1.0 };
    let pref = -sign * gamma_ratio(c, 1.0, a - mp, b - mp)?;
    if pref == 0.0 {
        return Ok(finite);
    }
    let mut coef = (-log_gamma(mp + 1.0)?).exp();
    let mut sum = 0.0;
    let mut small = 0;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        let bracket = lnw - digamma(nf + 1.0)? - digamma(nf + mp + 1.0)?
            + digamma_or_zero(a + nf)?
            + digamma_or_zero(b + nf)?;
        let term = coef * bracket;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() || coef == 0.0 {
            small += 1;
            if small >= 2 {
                return Ok(finite + pref * sum);
            }
        } else {
            small = 0;
        }
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + mp + 1.0)) * w;
    }
    Err(Error::NonConvergence("2F1 logarithmic series (m < 0)".into()))
}

/// Digamma at a point where the accompanying Pochhammer coefficient has
/// already vanished; the product is then zero, so the pole is harmless.
fn digamma_or_zero(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        Ok(0.0)
    } else {
        digamma(x)
    }
}

/// `c_{d,gamma}`, the prefactor of the majorizing kernel `h(xi) = c |xi|^{2 gamma - d - 1}`.
pub fn kernel_constant(p: &Params) -> Result<f64> {
    let d = p.dim();
    let g = p.gamma;
    let ln = -(d / 2.0) * PI.ln() + log_gamma(2.0 * g - 1.0)? + 2.0 * log_gamma((d + 1.0 - 2.0 * g) / 2.0)?
        - log_gamma((d + 2.0 - 4.0 * g) / 2.0)?
        - 2.0 * log_gamma((2.0 * g - 1.0) / 2.0)?;
    Ok(ln.exp())
}

/// `C_{d,gamma}`, the prefactor of the branching-ratio density for `d >= 2`.
pub fn ratio_constant(p: &Params) -> Result<f64> {
    if p.d < 2 {
        return Err(Error::domain("ratio_constant needs d >= 2"));
    }
    let d = p.dim();
    let g = p.gamma;
    let a = p.a();
    let ln = 2f64.ln() + log_gamma(2.0 * g - 1.0)? + 2.0 * log_gamma(a)?
        - log_gamma(d / 2.0)?
        - log_gamma(2.0 * a - d / 2.0)?
        - 2.0 * log_gamma((2.0 * g - 1.0) / 2.0)?;
    Ok(ln.exp())
}

/// Surface area of the unit sphere `S^{k}` in `R^{k+1}`; `S^0` has two points.
pub fn sphere_area(k: usize) -> f64 {
    let n = (k + 1) as f64;
    (2f64.ln() + (n / 2.0) * PI.ln() - libm::lgamma_r(n / 2.0).0).exp()
}

/// `Cbar_{d,gamma} = |S^{d-2}| c_{d,gamma}`, the prefactor of the angle-pair density.
pub fn angle_constant(p: &Params) -> Result<f64> {
    if p.d < 2 {
        return Err(Error::domain("angle_constant needs d >= 2"));
    }
    Ok(sphere_area(p.d - 2) * kernel_constant(p)?)
}

/// Euler beta function `B(x, y)` for positive arguments.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    Ok((log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_window() {
        assert!(Params::new(1, 0.75).is_err());
        assert!(Params::new(1, 0.5).is_err());
        assert!(Params::new(0, 0.6).is_err());
        let p = Params::new(2, 0.6).unwrap();
        assert!((p.bstar() - 0.7).abs() < 1e-15);
        assert!((Params::new(5, 1.0).unwrap().bstar() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-15);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert_eq!(gauss_2f1(0.7, 1.2, 1.5, 0.0).unwrap(), 1.0);
        let v = gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_constants_at_uniform_point() {
        let p = Params::new(3, 1.0).unwrap();
        let c = kernel_constant(&p).unwrap();
        assert!((c / PI.powi(-3) - 1.0).abs() < 1e-13);
        let cb = angle_constant(&p).unwrap();
        assert!((cb / (2.0 / (PI * PI)) - 1.0).abs() < 1e-13);
        assert!(angle_constant(&Params::new(1, 0.6).unwrap()).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(0) - 2.0).abs() < 1e-14);
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn digamma_reflection_region() {
        let x = -0.3;
        let lhs = digamma(1.0 - x).unwrap() - digamma(x).unwrap();
        assert!((lhs - PI / (PI * x).tan()).abs() < 1e-12);
    }
}
