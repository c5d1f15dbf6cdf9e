//! Exact samplers for the cascade: unit exponentials, sphere directions, the
//! angle pair of a branching, and the branch step `xi -> (W1, W2)`.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::specfun::{self, Params};
use crate::vector::WaveVector;

/// Default cap on rejection attempts per draw.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector and block counter give
/// independent, platform-stable sequences for every replicate index.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position in the keystream, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}

/// Exponential draw with the given rate, `-ln U / rate`.
pub fn sample_exponential(s: &mut RngStream, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("exponential rate must be positive, got {rate}")));
    }
    Ok(-s.uniform_open().ln() / rate)
}

/// Uniform direction on the unit sphere of the hyperplane orthogonal to
/// `orthogonal_to`; in the plane this is one of the two unit normals.
pub fn sample_sphere_direction(s: &mut RngStream, orthogonal_to: &WaveVector) -> Result<WaveVector> {
    let d = orthogonal_to.dim();
    if d < 2 {
        return Err(Error::domain("a direction orthogonal to xi needs d >= 2"));
    }
    let e = orthogonal_to.unit()?;
    if d == 2 {
        let n = e.perp2();
        return Ok(if s.coin() { n } else { n.scale(-1.0) });
    }
    loop {
        let mut g: Vec<f64> = (0..d).map(|_| s.normal()).collect();
        for _ in 0..2 {
            let proj: f64 = g.iter().zip(e.as_slice()).map(|(a, b)| a * b).sum();
            for (gi, ei) in g.iter_mut().zip(e.as_slice()) {
                *gi -= proj * ei;
            }
        }
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return WaveVector::new(&g.iter().map(|x| x / n).collect::<Vec<_>>());
        }
    }
}

/// One accepted angle pair with its complement `phi3 = pi - phi1 - phi2`
/// (carried separately for accuracy near the edges).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleDraw {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub attempts: u64,
}

/// Rejection sampler for the angle-pair density
/// `(sin phi1 sin phi2)^{2g-2} sin^{d+1-4g}(phi1 + phi2)` on the triangle.
///
/// The triangle is split by which of the three angles is largest. When
/// `phi_j` is largest it is at least `pi/3`, so with `s = pi - phi_j` and
/// `v = phi_a / s` the proposal draws `s` with density `~ s^{d-2}` on
/// `(0, 2pi/3]` (times `(1 - s/pi)^{alpha_j}` when that exponent is positive)
/// and `v ~ Beta(alpha_a+1, alpha_b+1)`. This matches every edge
/// and corner exponent, the likelihood ratio on each region is bounded by
/// explicit sine-ratio constants, and the mixture over the three proposals is
/// an exact envelope.
#[derive(Debug, Clone)]
pub struct AngleSampler {
    exps: [f64; 3],
    e: f64,
    // exponent of (1 - s/pi) in the s-proposal of each region
    tilt: [f64; 3],
    s_gammas: [(Gamma<f64>, Gamma<f64>); 3],
    bounds: [f64; 3],
    cumulative: [f64; 3],
    v_gammas: [(Gamma<f64>, Gamma<f64>); 3],
    cap: u64,
    acceptance: f64,
}

const OTHERS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];
const S_MAX: f64 = 2.0 * PI / 3.0;

impl AngleSampler {
    pub fn new(p: &Params, cap: u64) -> Result<Self> {
        if p.d < 2 {
            return Err(Error::domain("angle sampler needs d >= 2"));
        }
        let alpha = 2.0 * p.gamma - 2.0;
        let k = p.dim() + 1.0 - 4.0 * p.gamma;
        let exps = [alpha, alpha, k];
        let e = p.dim() - 2.0;
        let gamma = |shape: f64| Gamma::new(shape, 1.0).map_err(|err| Error::domain(format!("gamma shape {shape}: {err}")));
        let mut bounds = [0.0; 3];
        let mut mass = [0.0; 3];
        let mut v_gammas = Vec::with_capacity(3);
        let mut s_gammas = Vec::with_capacity(3);
        let mut tilt = [0.0; 3];
        for j in 0..3 {
            let (a, b) = OTHERS[j];
            let mut bound = 1.0;
            // sin(x)/x >= 2/pi on [0, pi/2] for the two smaller angles
            for &x in &[exps[a], exps[b]] {
                if x < 0.0 {
                    bound *= (2.0 / PI).powf(x);
                }
            }
            // largest angle: sin(s)/s >= sin(2pi/3)/(2pi/3) when its exponent is
            // negative; otherwise sin(s) <= (4/pi) s (1 - s/pi) is matched by a tilt
            let norm_s = if exps[j] < 0.0 {
                bound *= (S_MAX.sin() / S_MAX).powf(exps[j]);
                tilt[j] = 0.0;
                S_MAX.powf(e + 1.0) / (e + 1.0)
            } else {
                bound *= (4.0 / PI).powf(exps[j]);
                tilt[j] = exps[j];
                let frac = crate::quad::integrate(
                    |x: f64| x.powf(e) * (1.0 - x).powf(exps[j]),
                    0.0,
                    S_MAX / PI,
                    crate::quad::QuadConfig::default(),
                )?
                .value;
                PI.powf(e + 1.0) * frac
            };
            let norm = norm_s * specfun::beta(exps[a] + 1.0, exps[b] + 1.0)?;
            s_gammas.push((gamma(e + 1.0)?, gamma(tilt[j] + 1.0)?));
            bounds[j] = bound;
            mass[j] = bound * norm;
            v_gammas.push((gamma(exps[a] + 1.0)?, gamma(exps[b] + 1.0)?));
        }
        let total: f64 = mass.iter().sum();
        let cumulative = [mass[0] / total, (mass[0] + mass[1]) / total, 1.0];
        let cbar = specfun::angle_constant(p)?;
        let to_arr = |v: Vec<(Gamma<f64>, Gamma<f64>)>| -> [(Gamma<f64>, Gamma<f64>); 3] { [v[0], v[1], v[2]] };
        Ok(AngleSampler {
            exps,
            e,
            bounds,
            cumulative,
            v_gammas: to_arr(v_gammas),
            s_gammas: to_arr(s_gammas),
            tilt,
            cap,
            acceptance: 1.0 / (cbar * total),
        })
    }

    /// Theoretical acceptance probability of one proposal.
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance
    }

    fn target(&self, phi: &[f64; 3]) -> f64 {
        phi[0].sin().powf(self.exps[0]) * phi[1].sin().powf(self.exps[1]) * phi[2].sin().powf(self.exps[2])
    }

    /// Envelope `sum_j B_j ghat_j(s_j, v_j) / s_j` in angle coordinates, where
    /// `ghat_j = s^{d-2} (1-s/pi)^{tilt_j} v^{alpha_a} (1-v)^{alpha_b}` on `s <= 2pi/3`.
    fn envelope(&self, phi: &[f64; 3]) -> f64 {
        let mut total = 0.0;
        for j in 0..3 {
            let (a, b) = OTHERS[j];
            let s = phi[a] + phi[b];
            if s > S_MAX {
                continue;
            }
            let v = phi[a] / s;
            let w = phi[b] / s;
            let mut g = s.powf(self.e) * v.powf(self.exps[a]) * w.powf(self.exps[b]);
            if self.tilt[j] != 0.0 {
                g *= (phi[j] / PI).powf(self.tilt[j]);
            }
            total += self.bounds[j] * g / s;
        }
        total
    }

    pub fn sample(&self, s: &mut RngStream) -> Result<AngleDraw> {
        for attempt in 1..=self.cap {
            let u = s.uniform_open();
            let j = self.cumulative.iter().position(|&c| u < c).unwrap_or(2);
            let (a, b) = OTHERS[j];
            let ssum = if self.tilt[j] == 0.0 {
                S_MAX * s.uniform_open().powf(1.0 / (self.e + 1.0))
            } else {
                // truncate within the chosen region; restarting would reweight the mixture
                loop {
                    let x = self.s_gammas[j].0.sample(s.rng());
                    let y = self.s_gammas[j].1.sample(s.rng());
                    let v = PI * x / (x + y);
                    if v <= S_MAX {
                        break v;
                    }
                }
            };
            let xa = self.v_gammas[j].0.sample(s.rng());
            let xb = self.v_gammas[j].1.sample(s.rng());
            let tv = xa + xb;
            let mut phi = [0.0; 3];
            phi[j] = PI - ssum;
            phi[a] = ssum * xa / tv;
            phi[b] = ssum * xb / tv;
            let accept_u = s.uniform_open();
            if !(phi.iter().all(|&x| x > 0.0 && x.is_finite())) {
                continue;
            }
            let ratio = self.target(&phi) / self.envelope(&phi);
            if !ratio.is_finite() {
                continue;
            }
            if accept_u < ratio {
                return Ok(AngleDraw { phi1: phi[0], phi2: phi[1], phi3: phi[2], attempts: attempt });
            }
        }
        Err(Error::RejectionCapExceeded { cap: self.cap })
    }
}

/// Draw of the angle pair with density proportional to the angle pdf.
pub fn sample_angles(s: &mut RngStream, p: &Params) -> Result<(f64, f64)> {
    let d = AngleSampler::new(p, DEFAULT_REJECTION_CAP)?.sample(s)?;
    Ok((d.phi1, d.phi2))
}

/// One branching: the two children and the angles they make with the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub w1: WaveVector,
    pub w2: WaveVector,
    /// Angles between the parent and each child (d >= 2); NaN in d = 1.
    pub phi1: f64,
    pub phi2: f64,
    /// Norm ratios `|W1|/|xi|` and `|W2|/|xi|` as drawn.
    pub r1: f64,
    pub r2: f64,
}

/// Branch sampler for `W1 ~ H(. | xi)`, `W2 = xi - W1` (equal up to rounding).
#[derive(Debug, Clone)]
pub struct BranchSampler {
    p: Params,
    angles: Option<AngleSampler>,
    cap: u64,
}

impl BranchSampler {
    pub fn new(p: Params) -> Result<Self> {
        Self::with_cap(p, DEFAULT_REJECTION_CAP)
    }

    pub fn with_cap(p: Params, cap: u64) -> Result<Self> {
        let angles = if p.d >= 2 { Some(AngleSampler::new(&p, cap)?) } else { None };
        Ok(BranchSampler { p, angles, cap })
    }

    pub fn params(&self) -> Params {
        self.p
    }

    pub fn angle_sampler(&self) -> Option<&AngleSampler> {
        self.angles.as_ref()
    }

    pub fn sample(&self, s: &mut RngStream, xi: &WaveVector) -> Result<Branch> {
        if xi.dim() != self.p.d {
            return Err(Error::domain(format!("expected a {}-vector", self.p.d)));
        }
        let n = xi.norm();
        if n == 0.0 {
            return Err(Error::domain("cannot branch the zero wavevector"));
        }
        match &self.angles {
            None => self.sample_line(s, xi),
            Some(angles) => {
                let a = angles.sample(s)?;
                let w = sample_sphere_direction(s, xi)?;
                let sin3 = a.phi3.sin();
                let r1 = a.phi2.sin() / sin3;
                let r2 = a.phi1.sin() / sin3;
                let e = xi.scale(1.0 / n);
                // the shorter child is built from its angle, the longer one by
                // subtraction, so neither loses relative accuracy to cancellation
                let child = |r: f64, phi: f64, side: f64| {
                    let (c, sn) = (phi.cos(), side * phi.sin());
                    WaveVector(e.0.iter().zip(w.0.iter()).map(|(ei, wi)| n * r * (ei * c + wi * sn)).collect())
                };
                let (w1, w2) = if r1 <= r2 {
                    let w1 = child(r1, a.phi1, 1.0);
                    let w2 = xi - &w1;
                    (w1, w2)
                } else {
                    let w2 = child(r2, a.phi2, -1.0);
                    (xi - &w2, w2)
                };
                Ok(Branch { w1, w2, phi1: a.phi1, phi2: a.phi2, r1, r2 })
            }
        }
    }

    /// `d = 1`: `W1 = xi X` where `X` has density `c |x|^{2g-2} |1-x|^{2g-2}`,
    /// symmetric about 1/2. The half `x >= 1/2` is drawn from a three-piece
    /// power-law envelope and mirrored with probability 1/2.
    fn sample_line(&self, s: &mut RngStream, xi: &WaveVector) -> Result<Branch> {
        let alpha = 2.0 * self.p.gamma - 2.0;
        let m1 = 2f64.powf(-2.0 * alpha - 1.0) / (alpha + 1.0);
        let m2 = 1.0 / (alpha + 1.0);
        let m3 = 1.0 / (-2.0 * alpha - 1.0);
        let total = m1 + m2 + m3;
        for _ in 0..self.cap {
            let u = s.uniform_open() * total;
            let v = s.uniform_open();
            let acc = s.uniform_open();
            // (x, 1 - x, acceptance probability)
            let (x, one_minus_x, ratio) = if u < m1 {
                let y = 0.5 * v.powf(1.0 / (alpha + 1.0));
                let x = 1.0 - y;
                (x, y, (2.0 * x).powf(alpha))
            } else if u < m1 + m2 {
                let y = v.powf(1.0 / (alpha + 1.0));
                let x = 1.0 + y;
                (x, -y, x.powf(alpha))
            } else {
                let y = v.powf(1.0 / (2.0 * alpha + 1.0));
                (1.0 + y, -y, ((y + 1.0) / y).powf(alpha))
            };
            if one_minus_x == 0.0 || !x.is_finite() {
                continue;
            }
            if acc < ratio {
                let (xs, rest) = if s.coin() { (x, one_minus_x) } else { (one_minus_x, x) };
                let w1 = xi.scale(xs);
                let w2 = xi.scale(rest);
                let (r1, r2) = (xs.abs(), rest.abs());
                return Ok(Branch { w1, w2, phi1: f64::NAN, phi2: f64::NAN, r1, r2 });
            }
        }
        Err(Error::RejectionCapExceeded { cap: self.cap })
    }
}

/// `W1 ~ H(. | xi)` and `W2 = xi - W1`.
pub fn sample_branch(s: &mut RngStream, p: &Params, xi: &WaveVector) -> Result<(WaveVector, WaveVector)> {
    let b = BranchSampler::new(*p)?.sample(s, xi)?;
    Ok((b.w1, b.w2))
}
