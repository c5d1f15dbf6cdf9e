//! The majorizing kernel `h`, the branching kernel `H`, the branching-ratio
//! density `g` and the angle-pair density `f`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_singular, integrate_tail, Node, QuadConfig, QuadResult};
use crate::specfun::{self, gauss_2f1_with_complement, Params};
use crate::vector::WaveVector;

/// Kernel constants for one parameter pair, computed once.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    p: Params,
    c: f64,
    big_c: f64,
    cbar: f64,
    /// `2F1(a/2, (a+1)/2; d/2; 1)` when finite (gamma > 1), otherwise NaN.
    f_at_one: f64,
}

impl Kernel {
    pub fn new(p: Params) -> Result<Self> {
        let c = specfun::kernel_constant(&p)?;
        let (big_c, cbar, f_at_one) = if p.d >= 2 {
            let a = p.a();
            let s = p.gamma - 1.0;
            let f1 = if s > 0.0 {
                let d2 = p.dim() / 2.0;
                (specfun::log_gamma(d2)? + specfun::log_gamma(s)?
                    - specfun::log_gamma(d2 - a / 2.0)?
                    - specfun::log_gamma(d2 - (a + 1.0) / 2.0)?)
                    .exp()
            } else {
                f64::NAN
            };
            (specfun::ratio_constant(&p)?, specfun::angle_constant(&p)?, f1)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(Kernel { p, c, big_c, cbar, f_at_one })
    }

    pub fn params(&self) -> Params {
        self.p
    }

    pub fn kernel_constant(&self) -> f64 {
        self.c
    }

    /// `C_{d,gamma}`; NaN for `d = 1`.
    pub fn ratio_constant(&self) -> f64 {
        self.big_c
    }

    /// `Cbar_{d,gamma}`; NaN for `d = 1`.
    pub fn angle_constant(&self) -> f64 {
        self.cbar
    }

    /// `h` as a function of `|xi| > 0`.
    pub fn h_radial(&self, r: f64) -> f64 {
        self.c * r.powf(2.0 * self.p.gamma - self.p.dim() - 1.0)
    }

    pub fn majorizing(&self, xi: &WaveVector) -> Result<f64> {
        self.check_dim(xi)?;
        let r = xi.norm();
        if r == 0.0 {
            return Err(Error::domain("h is singular at xi = 0"));
        }
        Ok(self.h_radial(r))
    }

    /// `H(eta | xi)` from the norms `|eta|`, `|xi - eta|`, `|xi|`.
    pub fn transition_density_radial(&self, eta: f64, rest: f64, xi: f64) -> f64 {
        let g = self.p.gamma;
        self.h_radial(eta) * self.h_radial(rest) / (xi.powf(2.0 * g - 1.0) * self.h_radial(xi))
    }

    pub fn transition_density(&self, eta: &WaveVector, xi: &WaveVector) -> Result<f64> {
        self.check_dim(eta)?;
        self.check_dim(xi)?;
        let rest = xi - eta;
        let (ne, nr, nx) = (eta.norm(), rest.norm(), xi.norm());
        if nx == 0.0 {
            return Err(Error::domain("H(.|xi) needs xi != 0"));
        }
        if ne == 0.0 || nr == 0.0 {
            return Err(Error::Singular("H(eta|xi) at eta in {0, xi}".into()));
        }
        Ok(self.transition_density_radial(ne, nr, nx))
    }

    /// Branching-ratio density `g(r)`.
    pub fn ratio_pdf(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("ratio density needs 0 < r < inf, got {r}")));
        }
        self.ratio_pdf_delta(r, 1.0 - r)
    }

    /// `g(r)` with `delta = 1 - r` supplied separately so that points near the
    /// singular radius keep full accuracy.
    pub fn ratio_pdf_delta(&self, r: f64, delta: f64) -> Result<f64> {
        let g = self.p.gamma;
        if delta == 0.0 && (self.p.d == 1 || g <= 1.0) {
            return Err(Error::Singular(format!(
                "ratio density is singular at r = 1 for (d, gamma) = ({}, {g})",
                self.p.d
            )));
        }
        if self.p.d == 1 {
            let e = 2.0 * g - 2.0;
            return Ok(self.c * ((r * delta.abs()).powf(e) + (r + r * r).powf(e)));
        }
        Ok(self.big_c * r.powf(2.0 * g - 2.0) * self.folded_factor(r, delta)?)
    }

    /// `(r^2 + 1)^{-a} 2F1(a/2, (a+1)/2; d/2; 4r^2/(r^2+1)^2)`.
    fn folded_factor(&self, r: f64, delta: f64) -> Result<f64> {
        let a = self.p.a();
        let s = 1.0 + r * r;
        let pre = s.powf(-a);
        if delta == 0.0 {
            return Ok(pre * self.f_at_one);
        }
        let q = delta * (1.0 + r) / s;
        let w = q * q;
        let z = 4.0 * r * r / (s * s);
        let f = gauss_2f1_with_complement(a / 2.0, (a + 1.0) / 2.0, self.p.dim() / 2.0, z.min(1.0), w)?;
        Ok(pre * f)
    }

    /// The hypergeometric factor `Ftilde(r)` alone.
    pub fn ratio_hypergeometric(&self, r: f64, delta: f64) -> Result<f64> {
        if self.p.d < 2 {
            return Err(Error::domain("the hypergeometric factor exists for d >= 2"));
        }
        Ok(self.folded_factor(r, delta)? * (1.0 + r * r).powf(self.p.a()))
    }

    /// Angle-pair density on the open triangle `phi1, phi2 > 0`, `phi1 + phi2 < pi`.
    pub fn angle_pdf(&self, phi1: f64, phi2: f64) -> Result<f64> {
        if self.p.d < 2 {
            return Err(Error::domain("angle density exists for d >= 2"));
        }
        let phi3 = PI - phi1 - phi2;
        let alpha = 2.0 * self.p.gamma - 2.0;
        let k = self.p.dim() + 1.0 - 4.0 * self.p.gamma;
        let outside = phi1 < 0.0 || phi2 < 0.0 || phi3 < 0.0 || !phi1.is_finite() || !phi2.is_finite();
        let on_bad_edge = (alpha < 0.0 && (phi1 == 0.0 || phi2 == 0.0)) || (k < 0.0 && phi3 == 0.0);
        if outside || on_bad_edge {
            return Err(Error::domain(format!("({phi1}, {phi2}) is not an admissible point of the triangle")));
        }
        Ok(self.angle_pdf3(phi1, phi2, phi3))
    }

    /// Angle density with the third angle `pi - phi1 - phi2` passed explicitly; no checks.
    pub fn angle_pdf3(&self, phi1: f64, phi2: f64, phi3: f64) -> f64 {
        let alpha = 2.0 * self.p.gamma - 2.0;
        let k = self.p.dim() + 1.0 - 4.0 * self.p.gamma;
        self.cbar * (phi1.sin() * phi2.sin()).powf(alpha) * phi3.sin().powf(k)
    }

    /// Endpoint exponent of `g` at `r = 1`: algebraic for gamma < 1, log-type at gamma = 1.
    pub fn ratio_exponent_at_one(&self) -> f64 {
        let g = self.p.gamma;
        if self.p.d == 1 || g < 1.0 {
            2.0 * g - 2.0
        } else if g == 1.0 {
            -0.5
        } else {
            0.0
        }
    }

    /// `P(R <= r)` by singularity-aware quadrature.
    pub fn ratio_cdf(&self, r: f64, cfg: QuadConfig) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        if r.is_infinite() {
            return Ok(1.0);
        }
        let e0 = 2.0 * self.p.gamma - 2.0;
        let e1 = self.ratio_exponent_at_one();
        let einf = self.p.dim() + 1.0 - 4.0 * self.p.gamma;
        if r <= 1.0 {
            let alpha_b = if r == 1.0 { e1 } else { e1.min(0.0) };
            let res = integrate_singular(
                |n: Node| self.ratio_pdf_delta(n.x, (1.0 - r) + n.to_b).unwrap_or(f64::NAN),
                0.0,
                r,
                e0,
                alpha_b,
                cfg,
            )?;
            return Ok(res.value);
        }
        // P(R > r) = P(1/R < 1/r), and 1/R has density g(1/u)/u^2.
        let s = 1.0 / r;
        let res = integrate_singular(
            |n: Node| {
                let u = n.x;
                let x = 1.0 / u;
                // 1 - 1/u = -(1 - u)/u
                let delta = -((1.0 - s) + n.to_b) / u;
                self.ratio_pdf_delta(x, delta).unwrap_or(f64::NAN) / (u * u)
            },
            0.0,
            s,
            einf,
            e1.min(0.0),
            cfg,
        )?;
        Ok(1.0 - res.value)
    }

    /// `int_0^inf g(r) dr` over the three singular pieces `[0, 1]`, `[1, 2]`, `[2, inf)`.
    pub fn ratio_normalization(&self, cfg: QuadConfig) -> Result<QuadResult> {
        let e0 = 2.0 * self.p.gamma - 2.0;
        let e1 = self.ratio_exponent_at_one();
        let tail = 4.0 * self.p.gamma - self.p.dim() - 3.0;
        let left = integrate_singular(|n: Node| self.ratio_pdf_delta(n.x, n.to_b).unwrap_or(f64::NAN), 0.0, 1.0, e0, e1, cfg)?;
        let mid = integrate_singular(|n: Node| self.ratio_pdf_delta(n.x, -n.from_a).unwrap_or(f64::NAN), 1.0, 2.0, e1, 0.0, cfg)?;
        let right = integrate_tail(|x| self.ratio_pdf_delta(x, 1.0 - x).unwrap_or(f64::NAN), 2.0, 0.0, tail, cfg)?;
        Ok(left.add(mid).add(right))
    }

    /// Marginal density of the first angle, `int f(phi1, phi2) dphi2`.
    pub fn angle_marginal(&self, phi1: f64, cfg: QuadConfig) -> Result<f64> {
        if self.p.d < 2 {
            return Err(Error::domain("angle density exists for d >= 2"));
        }
        if !(phi1 > 0.0 && phi1 < PI) {
            return Err(Error::domain(format!("phi1 = {phi1} outside (0, pi)")));
        }
        let (alpha, k) = self.angle_exponents();
        let len = PI - phi1;
        let res = integrate_singular(|n: Node| self.angle_pdf3(phi1, n.x, n.to_b), 0.0, len, alpha, k, cfg)?;
        Ok(res.value)
    }

    /// `P(Phi1 <= x)`.
    pub fn angle_marginal_cdf(&self, x: f64, cfg: QuadConfig) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x >= PI {
            return Ok(1.0);
        }
        let (alpha, _) = self.angle_exponents();
        let inner = QuadConfig { abs_tol: 0.1 * cfg.abs_tol, ..cfg };
        let res = integrate_singular(
            |n: Node| self.angle_marginal(n.x, inner).unwrap_or(f64::NAN),
            0.0,
            x,
            alpha,
            0.0,
            cfg,
        )?;
        Ok(res.value)
    }

    /// `int int_triangle f`, nested with both edge exponents stripped.
    pub fn angle_normalization(&self, cfg: QuadConfig) -> Result<QuadResult> {
        let (alpha, _) = self.angle_exponents();
        let inner = QuadConfig { abs_tol: 0.1 * cfg.abs_tol, ..cfg };
        integrate_singular(
            |n: Node| self.angle_marginal(n.x, inner).unwrap_or(f64::NAN),
            0.0,
            PI,
            alpha,
            0.0,
            cfg,
        )
    }

    fn angle_exponents(&self) -> (f64, f64) {
        (2.0 * self.p.gamma - 2.0, self.p.dim() + 1.0 - 4.0 * self.p.gamma)
    }

    /// `g(r)` obtained by pushing the angle density through the sine rule
    /// `r = sin phi2 / sin(phi1 + phi2)` and integrating out `phi1`.
    pub fn ratio_pdf_from_angles(&self, r: f64, cfg: QuadConfig) -> Result<f64> {
        if self.p.d < 2 {
            return Err(Error::domain("angle density exists for d >= 2"));
        }
        if !(r > 0.0) || r == 1.0 {
            return Err(Error::domain(format!("pushforward density needs r > 0, r != 1, got {r}")));
        }
        let delta = 1.0 - r;
        let res = integrate_singular(
            |n: Node| {
                let s1 = n.x.sin();
                // 1 - r cos phi1 = delta + 2 r sin^2(phi1/2)
                let sh = (0.5 * n.x).sin();
                let den_x = delta + 2.0 * r * sh * sh;
                let phi2 = (r * s1).atan2(den_x);
                let phi3 = PI - n.x - phi2;
                let q = delta * delta + 4.0 * r * sh * sh;
                self.angle_pdf3(n.x, phi2, phi3) * s1 / q
            },
            0.0,
            PI,
            0.0,
            0.0,
            cfg,
        )?;
        Ok(res.value)
    }

    /// `g(r)` from the transition density: the law of `|eta|` when
    /// `eta ~ H(. | e)`, integrating out the polar angle about `e`.
    pub fn ratio_pdf_from_transition(&self, r: f64, cfg: QuadConfig) -> Result<f64> {
        if self.p.d < 2 {
            return Err(Error::domain("polar decomposition needs d >= 2"));
        }
        if !(r > 0.0) || r == 1.0 {
            return Err(Error::domain(format!("transition marginal needs r > 0, r != 1, got {r}")));
        }
        self.polar_shell(r, 1.0, 1.0 - r, cfg)
    }

    /// `rho^{d-1} |S^{d-2}| int_0^pi H(rho (cos psi e + sin psi w) | X e) sin^{d-2} psi dpsi`
    /// with `x_minus_rho = X - rho` passed separately.
    fn polar_shell(&self, rho: f64, xn: f64, x_minus_rho: f64, cfg: QuadConfig) -> Result<f64> {
        let d = self.p.d;
        let area = specfun::sphere_area(d - 2);
        let width = (x_minus_rho.abs() / (xn * rho).sqrt()).max(1e-300);
        let mut total = 0.0;
        let mut lo = 0.0;
        let mut hi = width.min(PI);
        loop {
            let res = crate::quad::integrate(
                |psi: f64| {
                    let sh = (0.5 * psi).sin();
                    let rest = (x_minus_rho * x_minus_rho + 4.0 * xn * rho * sh * sh).sqrt();
                    self.transition_density_radial(rho, rest, xn) * psi.sin().powi(d as i32 - 2)
                },
                lo,
                hi,
                cfg,
            )?;
            total += res.value;
            if hi >= PI {
                break;
            }
            lo = hi;
            hi = (4.0 * hi).min(PI);
        }
        Ok(rho.powi(d as i32 - 1) * area * total)
    }

    /// `int_{R^d} H(eta | xi) deta` for `|xi| = xn`, integrated directly in
    /// polar coordinates about `xi` without rescaling to the unit sphere.
    pub fn transition_normalization(&self, xn: f64, cfg: QuadConfig) -> Result<QuadResult> {
        if !(xn > 0.0) {
            return Err(Error::domain("H(.|xi) needs xi != 0"));
        }
        let g = self.p.gamma;
        let e0 = 2.0 * g - 2.0;
        let e1 = self.ratio_exponent_at_one();
        if self.p.d == 1 {
            let norm = xn.powf(2.0 * g - 1.0) * self.h_radial(xn);
            return Ok(convolution_line(self, xn, cfg)?.scale(1.0 / norm));
        }
        let tail = 4.0 * g - self.p.dim() - 3.0;
        let inner = QuadConfig { abs_tol: 0.01 * cfg.abs_tol, rel_tol: 0.01 * cfg.rel_tol, ..cfg };
        let shell = |rho: f64, gap: f64| self.polar_shell(rho, xn, gap, inner).unwrap_or(f64::NAN);
        let left = integrate_singular(|n: Node| shell(n.x, n.to_b), 0.0, xn, e0, e1, cfg)?;
        let mid = integrate_singular(|n: Node| shell(n.x, -n.from_a), xn, 2.0 * xn, e1, 0.0, cfg)?;
        let right = integrate_tail(|x| shell(x, xn - x), 2.0 * xn, 0.0, tail, cfg)?;
        Ok(left.add(mid).add(right))
    }

    fn check_dim(&self, v: &WaveVector) -> Result<()> {
        if v.dim() != self.p.d {
            return Err(Error::domain(format!("expected a {}-vector, got dimension {}", self.p.d, v.dim())));
        }
        Ok(())
    }
}

/// `int_R h(eta) h(xi - eta) deta` on the line, for `xi > 0`, split at the two
/// singular points and with both tails mapped to finite intervals.
pub fn convolution_line(k: &Kernel, xi: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if k.p.d != 1 {
        return Err(Error::domain("the line convolution is for d = 1"));
    }
    let e = 2.0 * k.p.gamma - 2.0;
    let h = |x: f64| k.h_radial(x);
    // eta in (0, xi)
    let inside = integrate_singular(|n: Node| h(n.from_a) * h(n.to_b), 0.0, xi, e, e, cfg)?;
    // eta = -u and eta = xi + u with u > 0 give the same integrand h(u) h(xi + u)
    let near = integrate_singular(|n: Node| h(n.x) * h(xi + n.x), 0.0, xi, e, 0.0, cfg)?;
    let far = integrate_tail(|u| h(u) * h(xi + u), xi, 0.0, 2.0 * e, cfg)?;
    Ok(inside.add(near.add(far).scale(2.0)))
}

/// `h(xi) = c_{d,gamma} |xi|^{2 gamma - d - 1}`.
pub fn majorizing_kernel(p: &Params, xi: &WaveVector) -> Result<f64> {
    Kernel::new(*p)?.majorizing(xi)
}

/// `H(eta | xi) = h(eta) h(xi - eta) / (|xi|^{2 gamma - 1} h(xi))`.
pub fn transition_density(p: &Params, eta: &WaveVector, xi: &WaveVector) -> Result<f64> {
    Kernel::new(*p)?.transition_density(eta, xi)
}

pub fn ratio_pdf(p: &Params, r: f64) -> Result<f64> {
    Kernel::new(*p)?.ratio_pdf(r)
}

pub fn angle_pdf(p: &Params, phi1: f64, phi2: f64) -> Result<f64> {
    Kernel::new(*p)?.angle_pdf(phi1, phi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_radius_gives_constant() {
        for (d, g) in [(2, 0.7), (3, 1.0), (5, 1.3)] {
            let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
            let xi = WaveVector::along_first_axis(d, 1.0);
            assert_eq!(k.majorizing(&xi).unwrap(), k.kernel_constant());
        }
        let k = Kernel::new(Params::new(3, 1.0).unwrap()).unwrap();
        assert!((k.h_radial(1.0) - PI.powi(-3)).abs() < 1e-16);
    }

    #[test]
    fn d1_plug_in() {
        let p = Params::new(1, 0.7).unwrap();
        let k = Kernel::new(p).unwrap();
        let c = k.kernel_constant();
        let eta = WaveVector::new(&[2.0]).unwrap();
        let xi = WaveVector::new(&[1.0]).unwrap();
        let h = k.transition_density(&eta, &xi).unwrap();
        assert!((h - c * 2f64.powf(-0.6)).abs() < 1e-15);
        let g = k.ratio_pdf(2.0).unwrap();
        assert!((g - c * (2f64.powf(-0.6) + 6f64.powf(-0.6))).abs() < 1e-15);
    }

    #[test]
    fn singular_points_refused() {
        let k = Kernel::new(Params::new(2, 0.8).unwrap()).unwrap();
        assert!(matches!(k.ratio_pdf(1.0), Err(Error::Singular(_))));
        assert!(k.ratio_pdf(0.0).is_err());
        assert!(k.angle_pdf(0.0, 1.0).is_err());
        assert!(k.angle_pdf(2.0, 2.0).is_err());
        let xi = WaveVector::new(&[1.0, 0.0]).unwrap();
        assert!(k.transition_density(&xi, &xi).is_err());
        // above gamma = 1 the density is finite (Hoelder) at r = 1
        let k = Kernel::new(Params::new(5, 1.4).unwrap()).unwrap();
        let at = k.ratio_pdf(1.0).unwrap();
        let near = k.ratio_pdf(1.0 + 1e-9).unwrap();
        assert!((at - near).abs() < 1e-6 * at);
    }

    #[test]
    fn uniform_angle_case() {
        let k = Kernel::new(Params::new(3, 1.0).unwrap()).unwrap();
        let v = k.angle_pdf(0.4, 1.9).unwrap();
        assert!((v - 2.0 / (PI * PI)).abs() < 1e-15);
    }
}
