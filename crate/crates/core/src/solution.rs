//! Bilinear products, the solution process `X` and its scalar majorant on a
//! realized tree, the planar closed form, and the root sign flip.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cascade::{cut, CascadeTree, NodeRecord};
use crate::error::{Error, Result};
use crate::vector::WaveVector;

/// Complex Fourier amplitude in `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Amplitude(pub SmallVec<[Complex64; 3]>);

impl Amplitude {
    pub fn zeros(d: usize) -> Self {
        Amplitude(SmallVec::from_elem(Complex64::new(0.0, 0.0), d))
    }

    pub fn from_real(v: &[f64]) -> Self {
        Amplitude(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn real_vector(v: &WaveVector, k: f64) -> Self {
        Amplitude(v.0.iter().map(|&x| Complex64::new(k * x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Bilinear pairing with a real vector (no conjugation).
    pub fn dot_real(&self, v: &WaveVector) -> Complex64 {
        self.0.iter().zip(v.0.iter()).map(|(z, &x)| z * x).sum()
    }

    pub fn scale(&self, k: Complex64) -> Amplitude {
        Amplitude(self.0.iter().map(|z| z * k).collect())
    }

    pub fn add(&self, other: &Amplitude) -> Amplitude {
        Amplitude(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Amplitude) -> Amplitude {
        Amplitude(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }
}

fn unit_of(xi: &WaveVector) -> Result<WaveVector> {
    if xi.is_zero() {
        return Err(Error::domain("the product needs xi != 0"));
    }
    xi.unit()
}

fn check_dims(a: &Amplitude, b: &Amplitude, xi: &WaveVector) -> Result<()> {
    if xi.dim() < 2 || a.dim() != xi.dim() || b.dim() != xi.dim() {
        return Err(Error::domain(format!(
            "products need matching dimensions >= 2, got {}, {}, {}",
            a.dim(),
            b.dim(),
            xi.dim()
        )));
    }
    Ok(())
}

fn otimes_unit(a: &Amplitude, b: &Amplitude, e: &WaveVector) -> Amplitude {
    let eb = b.dot_real(e);
    let ea = a.dot_real(e);
    let k = Complex64::new(0.0, -1.0) * eb;
    Amplitude(a.0.iter().zip(e.0.iter()).map(|(&ak, &ek)| k * (ak - ea * ek)).collect())
}

/// `a (x)_xi b = -i (e_xi . b) pi_{xi perp} a`.
pub fn otimes(a: &Amplitude, b: &Amplitude, xi: &WaveVector) -> Result<Amplitude> {
    check_dims(a, b, xi)?;
    let e = unit_of(xi)?;
    Ok(otimes_unit(a, b, &e))
}

/// `a (.)_xi b = (a (x)_xi b + b (x)_xi a) / 2`.
pub fn odot(a: &Amplitude, b: &Amplitude, xi: &WaveVector) -> Result<Amplitude> {
    check_dims(a, b, xi)?;
    let e = unit_of(xi)?;
    Ok(odot_unit(a, b, &e))
}

fn odot_unit(a: &Amplitude, b: &Amplitude, e: &WaveVector) -> Amplitude {
    let x = otimes_unit(a, b, e);
    let y = otimes_unit(b, a, e);
    Amplitude(x.0.iter().zip(y.0.iter()).map(|(p, q)| 0.5 * (p + q)).collect())
}

/// `Sigma sin(theta_{xi,eta} - theta_{xi,zeta})` for `xi = eta + zeta` in the
/// plane, where `Sigma = sign(xi x eta)`. Evaluated from signed angles, so a
/// collinear split gives exactly 0.
pub fn planar_split_factor(xi: &WaveVector, eta: &WaveVector, zeta: &WaveVector) -> f64 {
    let (nx, ne, nz) = (xi.norm(), eta.norm(), zeta.norm());
    let (s1, c1) = (xi.cross2(eta) / (nx * ne), xi.dot(eta) / (nx * ne));
    let (s2, c2) = (xi.cross2(zeta) / (nx * nz), xi.dot(zeta) / (nx * nz));
    s1 * c2 + c1 * s2
}

/// Relative tolerance for the orthogonality hypothesis of [`odot2d`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Planar closed form of `a (.)_xi b` with `xi = eta + zeta`, `a` orthogonal
/// to `eta` and `b` orthogonal to `zeta`:
/// `(i/2) sign(xi x eta) (a . e_eta_perp)(b . e_zeta_perp) sin(theta_{xi,eta} - theta_{xi,zeta}) e_xi_perp`.
pub fn odot2d(a: &Amplitude, b: &Amplitude, eta: &WaveVector, zeta: &WaveVector) -> Result<Amplitude> {
    if eta.dim() != 2 || zeta.dim() != 2 || a.dim() != 2 || b.dim() != 2 {
        return Err(Error::domain("the planar closed form needs d = 2"));
    }
    let xi = eta + zeta;
    if xi.is_zero() || eta.is_zero() || zeta.is_zero() {
        return Err(Error::domain("odot2d needs eta, zeta and eta + zeta nonzero"));
    }
    for (amp, k) in [(a, eta), (b, zeta)] {
        let n = amp.norm();
        if n > 0.0 {
            let rel = amp.dot_real(k).norm() / (k.norm() * n);
            if rel > ORTHOGONALITY_TOL {
                return Err(Error::OrthogonalityViolated(rel));
            }
        }
    }
    let pa = a.dot_real(&eta.unit()?.perp2());
    let pb = b.dot_real(&zeta.unit()?.perp2());
    let k = Complex64::new(0.0, 0.5) * pa * pb * planar_split_factor(&xi, eta, zeta);
    Ok(Amplitude::real_vector(&xi.unit()?.perp2(), 1.0).scale(k))
}

/// Radial profile `r -> g(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RadialProfile {
    Constant { value: f64 },
    /// `amplitude * exp(-(r / width)^2)`.
    Gaussian { amplitude: f64, width: f64 },
    /// `value` on `inner <= r <= outer`, zero elsewhere.
    Annulus { value: f64, inner: f64, outer: f64 },
    /// Linear interpolation on increasing radii, zero outside the table.
    Table { r: Vec<f64>, value: Vec<f64> },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Constant { value } => *value,
            RadialProfile::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            RadialProfile::Annulus { value, inner, outer } => {
                if r >= *inner && r <= *outer {
                    *value
                } else {
                    0.0
                }
            }
            RadialProfile::Table { r: rs, value } => {
                let n = rs.len();
                if n == 0 || r < rs[0] || r > rs[n - 1] {
                    return 0.0;
                }
                if n == 1 {
                    return value[0];
                }
                let i = rs.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
                let t = (r - rs[i]) / (rs[i + 1] - rs[i]);
                value[i] + t * (value[i + 1] - value[i])
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialProfile::Table { r, value } => {
                if r.is_empty() || r.len() != value.len() {
                    return Err(Error::MalformedTable(format!(
                        "{} radii and {} values",
                        r.len(),
                        value.len()
                    )));
                }
                if r.iter().chain(value.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::MalformedTable("non-finite entry".into()));
                }
                if r[0] < 0.0 {
                    return Err(Error::MalformedTable("negative radius".into()));
                }
                if let Some(w) = r.windows(2).find(|w| !(w[1] > w[0])) {
                    return Err(Error::MalformedTable(format!("radii not increasing at {} -> {}", w[0], w[1])));
                }
                Ok(())
            }
            RadialProfile::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(Error::domain("Gaussian width must be positive"))
            }
            RadialProfile::Annulus { inner, outer, .. } if !(outer > inner) => {
                Err(Error::domain("annulus needs inner < outer"))
            }
            _ => Ok(()),
        }
    }

    fn min_value(&self) -> f64 {
        match self {
            RadialProfile::Constant { value } => *value,
            RadialProfile::Gaussian { amplitude, .. } => amplitude.min(0.0),
            RadialProfile::Annulus { value, .. } => value.min(0.0),
            RadialProfile::Table { value, .. } => value.iter().copied().fold(0.0, f64::min),
        }
    }
}

/// Initial amplitude profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `g(|xi|) e_{xi perp}` in the plane.
    VortexRadial { profile: RadialProfile },
    /// `m e_{xi perp}` on `inner <= |xi| <= outer`.
    AnnulusConstant { m: f64, inner: f64, outer: f64 },
    /// Tabulated radial profile `g`, used as `g(|xi|) e_{xi perp}`.
    Tabulated { r: Vec<f64>, value: Vec<f64> },
    /// Scalar data `psi0(|xi|) >= 0` for the majorant process.
    ScalarMajorant { profile: RadialProfile },
    /// Scalar data `|chi0(xi)| / 2` derived from vector data.
    HalfModulus { of: Box<InitialData> },
    /// `g(|xi|) (1 + eps cos theta_xi) e_{xi perp}`: divergence-free but not radial.
    ModulatedVortex { profile: RadialProfile, eps: f64 },
    /// `g(|xi|) pi_{xi perp} a` for a fixed real vector `a`, in any dimension.
    Projected { direction: Vec<f64>, profile: RadialProfile },
}

/// Preset names accepted by [`make_initial_data`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialSpec {
    Vortex { profile: RadialProfile },
    Annulus { m: f64 },
    Table { r: Vec<f64>, value: Vec<f64> },
    Scalar { profile: RadialProfile },
    Zero,
}

/// Builds validated initial data from a preset. The annulus preset uses the
/// support `4 <= |xi| <= 7`.
pub fn make_initial_data(spec: &InitialSpec) -> Result<InitialData> {
    let data = match spec {
        InitialSpec::Vortex { profile } => InitialData::VortexRadial { profile: profile.clone() },
        InitialSpec::Annulus { m } => InitialData::AnnulusConstant { m: *m, inner: 4.0, outer: 7.0 },
        InitialSpec::Table { r, value } => InitialData::Tabulated { r: r.clone(), value: value.clone() },
        InitialSpec::Scalar { profile } => InitialData::ScalarMajorant { profile: profile.clone() },
        InitialSpec::Zero => InitialData::VortexRadial { profile: RadialProfile::Constant { value: 0.0 } },
    };
    data.validate()?;
    Ok(data)
}

/// Probe layout of the vortex check.
const PROBE_DIRECTIONS: usize = 32;
const PROBE_RADII: [f64; 8] = [0.3, 0.7, 1.0, 1.6, 2.5, 4.5, 5.5, 6.5];
const VORTEX_TOL: f64 = 1e-10;

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::VortexRadial { profile }
            | InitialData::ModulatedVortex { profile, .. }
            | InitialData::Projected { profile, .. } => profile.validate(),
            InitialData::AnnulusConstant { m, inner, outer } => {
                RadialProfile::Annulus { value: *m, inner: *inner, outer: *outer }.validate()
            }
            InitialData::Tabulated { r, value } => RadialProfile::Table { r: r.clone(), value: value.clone() }.validate(),
            InitialData::ScalarMajorant { profile } => {
                profile.validate()?;
                if profile.min_value() < 0.0 {
                    return Err(Error::NegativeInitialData(format!("profile takes the value {}", profile.min_value())));
                }
                Ok(())
            }
            InitialData::HalfModulus { of } => of.validate(),
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, InitialData::ScalarMajorant { .. } | InitialData::HalfModulus { .. })
    }

    pub fn is_divergence_free(&self) -> bool {
        !self.is_scalar()
    }

    /// Radial profile when the data has the form `g(|xi|) e_{xi perp}`.
    fn vortex_profile(&self) -> Option<RadialProfile> {
        match self {
            InitialData::VortexRadial { profile } => Some(profile.clone()),
            InitialData::AnnulusConstant { m, inner, outer } => {
                Some(RadialProfile::Annulus { value: *m, inner: *inner, outer: *outer })
            }
            InitialData::Tabulated { r, value } => Some(RadialProfile::Table { r: r.clone(), value: value.clone() }),
            _ => None,
        }
    }

    /// `chi0(xi) . e_{xi perp}` for planar vector data, given `|xi|`.
    pub fn perp_component(&self, xi: &WaveVector, norm: f64) -> Result<f64> {
        if xi.dim() != 2 {
            return Err(Error::domain("perpendicular component is planar"));
        }
        match self {
            InitialData::ModulatedVortex { profile, eps } => Ok(profile.eval(norm) * (1.0 + eps * xi[0] / norm)),
            InitialData::Projected { direction, profile } => {
                let e = xi.scale(1.0 / norm).perp2();
                Ok(profile.eval(norm) * (direction[0] * e[0] + direction[1] * e[1]))
            }
            _ => match self.vortex_profile() {
                Some(p) => Ok(p.eval(norm)),
                None => Err(Error::domain("scalar data has no vector component")),
            },
        }
    }

    /// Vector value `chi0(xi)`.
    pub fn vector_at(&self, xi: &WaveVector) -> Result<Amplitude> {
        let norm = xi.norm();
        if norm == 0.0 {
            return Err(Error::domain("initial data is evaluated at xi != 0"));
        }
        if let InitialData::Projected { direction, profile } = self {
            if direction.len() != xi.dim() {
                return Err(Error::domain("direction and wavevector dimensions differ"));
            }
            let e = xi.scale(1.0 / norm);
            let ea: f64 = direction.iter().zip(e.0.iter()).map(|(a, b)| a * b).sum();
            let g = profile.eval(norm);
            let v: Vec<f64> = direction.iter().zip(e.0.iter()).map(|(a, ek)| g * (a - ea * ek)).collect();
            return Ok(Amplitude::from_real(&v));
        }
        let p = self.perp_component(xi, norm)?;
        Ok(Amplitude::real_vector(&xi.scale(1.0 / norm).perp2(), p))
    }

    /// Scalar value `psi0(xi)` for majorant data.
    pub fn scalar_at(&self, xi: &WaveVector, norm: f64) -> Result<f64> {
        match self {
            InitialData::ScalarMajorant { profile } => Ok(profile.eval(norm)),
            InitialData::HalfModulus { of } => Ok(0.5 * of.vector_at(xi)?.norm()),
            _ => Err(Error::domain("vector data used where scalar data is required")),
        }
    }

    /// Checks that `chi0(xi) . e_{xi perp}` depends on `|xi|` only and that
    /// `chi0` is orthogonal to `xi`, over a fixed set of probe points.
    pub fn check_vortex(&self) -> Result<()> {
        if self.is_scalar() {
            return Err(Error::NotVortexData("scalar data".into()));
        }
        for &r in &PROBE_RADII {
            let mut reference: Option<f64> = None;
            for k in 0..PROBE_DIRECTIONS {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / PROBE_DIRECTIONS as f64;
                let xi = WaveVector::new(&[r * th.cos(), r * th.sin()])?;
                let v = self.vector_at(&xi)?;
                let along = v.dot_real(&xi).norm() / r;
                let p = self.perp_component(&xi, r)?;
                let scale = p.abs().max(1.0);
                if along > VORTEX_TOL * scale {
                    return Err(Error::NotVortexData(format!("component along xi at |xi| = {r}")));
                }
                match reference {
                    None => reference = Some(p),
                    Some(q) if (p - q).abs() > VORTEX_TOL * scale => {
                        return Err(Error::NotVortexData(format!(
                            "perpendicular amplitude varies with direction at |xi| = {r}"
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn require_finished(tree: &CascadeTree) -> Result<()> {
    if tree.guard_hit {
        Err(Error::GuardHitTree)
    } else {
        Ok(())
    }
}

/// Bottom-up fold of `(.)` over the tree: t-leaves carry `chi0(W_v)`, internal
/// vertices combine their children at `W_v`.
pub fn eval_recursive(tree: &CascadeTree, chi0: &InitialData) -> Result<Amplitude> {
    require_finished(tree)?;
    if tree.params.d < 2 {
        return Err(Error::domain("the vector solution process needs d >= 2"));
    }
    let n = tree.nodes.len();
    let mut amps: Vec<Option<Amplitude>> = vec![None; n];
    for i in (0..n).rev() {
        let node = &tree.nodes[i];
        let value = match node.children {
            None => chi0.vector_at(&node.w)?,
            Some([a, b]) => {
                let x = amps[a as usize].take().expect("children are evaluated first");
                let y = amps[b as usize].take().expect("children are evaluated first");
                let e = node.w.scale(1.0 / node.norm);
                odot_unit(&x, &y, &e)
            }
        };
        amps[i] = Some(value);
    }
    Ok(amps[0].take().expect("root evaluated"))
}

/// Trees with more nodes than this use log-magnitude products.
pub const DIRECT_PRODUCT_LIMIT: usize = 64;

/// A real product kept either directly or as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Product {
    Direct(f64),
    Log { sign: f64, log_abs: f64 },
}

impl Product {
    fn of(factors: impl Iterator<Item = f64>, log_form: bool) -> Product {
        if !log_form {
            return Product::Direct(factors.product());
        }
        let mut sign = 1.0;
        let mut log_abs = 0.0;
        for f in factors {
            if f == 0.0 {
                return Product::Log { sign: 0.0, log_abs: f64::NEG_INFINITY };
            }
            sign *= f.signum();
            log_abs += f.abs().ln();
        }
        Product::Log { sign, log_abs }
    }

    pub fn sign(&self) -> f64 {
        match *self {
            Product::Direct(v) => {
                if v == 0.0 {
                    0.0
                } else {
                    v.signum()
                }
            }
            Product::Log { sign, .. } => sign,
        }
    }

    pub fn log_abs(&self) -> f64 {
        match *self {
            Product::Direct(v) => v.abs().ln(),
            Product::Log { log_abs, .. } => log_abs,
        }
    }
}

/// The factors of the planar closed form
/// `X = (i/2)^N Sigma_root s_root (prod_internal' Sigma_v s_v)(prod_leaves chi0(W_v).e_perp) e_{xi perp}`,
/// with `s_v = sin(theta_{W_v,W_v1} - theta_{W_v,W_v2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParts {
    pub n_internal: usize,
    /// `Sigma_root = sign(xi x W_1)`; `+1` when the root is a t-leaf.
    pub root_sign: f64,
    /// `sin(theta_{xi,W1} - theta_{xi,W2})` at the root; `1` when the root is a t-leaf.
    pub root_sine: f64,
    /// Product of `Sigma_v s_v` over the non-root internal vertices.
    pub internal: Product,
    /// Product of `chi0(W_v) . e_{W_v perp}` over the t-leaves.
    pub leaf: Product,
}

impl ClosedFormParts {
    /// Scalar coefficient of `e_{xi perp}`.
    pub fn coefficient(&self) -> Complex64 {
        let n = self.n_internal;
        let phase = match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let head = self.root_sign * self.root_sine;
        let real = match (self.internal, self.leaf) {
            (Product::Direct(a), Product::Direct(b)) => head * a * b * 0.5f64.powi(n as i32),
            (a, b) => {
                let sign = head.signum() * a.sign() * b.sign();
                if sign == 0.0 || head == 0.0 {
                    0.0
                } else {
                    sign * (head.abs().ln() + a.log_abs() + b.log_abs() - n as f64 * LN_2).exp()
                }
            }
        };
        phase * real
    }

    /// The same factors with the root sign reversed.
    pub fn with_root_sign_flipped(&self) -> ClosedFormParts {
        ClosedFormParts { root_sign: -self.root_sign, ..*self }
    }
}

fn split_sign_and_sine(parent: &NodeRecord, c1: &NodeRecord, c2: &NodeRecord) -> (f64, f64) {
    let f = planar_split_factor(&parent.w, &c1.w, &c2.w);
    // W x W1 = -(W x W2); the difference keeps a sign when one child is
    // parallel to W to the last bit and the other is tiny
    let cross = parent.w.cross2(&c1.w) - parent.w.cross2(&c2.w);
    let sigma = if cross > 0.0 {
        1.0
    } else if cross < 0.0 {
        -1.0
    } else {
        0.0
    };
    // f = Sigma * sin(theta_1 - theta_2), so the unsigned-angle sine is f * Sigma
    (sigma, f * sigma)
}

/// Collects the closed-form factors of a planar tree.
pub fn closed_form_parts(tree: &CascadeTree, chi0: &InitialData) -> Result<ClosedFormParts> {
    require_finished(tree)?;
    if tree.params.d != 2 {
        return Err(Error::domain("the closed form is planar"));
    }
    let c = cut(tree);
    let log_form = tree.nodes.len() > DIRECT_PRODUCT_LIMIT;
    let child = |i: u32, k: usize| &tree.nodes[tree.nodes[i as usize].children.expect("internal")[k] as usize];
    let (root_sign, root_sine) = match tree.nodes[0].children {
        None => (1.0, 1.0),
        Some(_) => split_sign_and_sine(&tree.nodes[0], child(0, 0), child(0, 1)),
    };
    let internal = Product::of(
        c.internal.iter().filter(|&&i| i != 0).map(|&i| {
            let (s, sine) = split_sign_and_sine(&tree.nodes[i as usize], child(i, 0), child(i, 1));
            s * sine
        }),
        log_form,
    );
    let mut leaf_values = Vec::with_capacity(c.leaves.len());
    for &i in &c.leaves {
        let n = &tree.nodes[i as usize];
        leaf_values.push(chi0.perp_component(&n.w, n.norm)?);
    }
    let leaf = Product::of(leaf_values.into_iter(), log_form);
    Ok(ClosedFormParts { n_internal: c.internal.len(), root_sign, root_sine, internal, leaf })
}

fn along_root_perp(tree: &CascadeTree, k: Complex64) -> Amplitude {
    let e = tree.xi.scale(1.0 / tree.nodes[0].norm).perp2();
    Amplitude::real_vector(&e, 1.0).scale(k)
}

/// Planar closed form of the solution process in `O(|V|)` scalar operations.
pub fn eval_closed_form_2d(tree: &CascadeTree, chi0: &InitialData) -> Result<Amplitude> {
    let parts = closed_form_parts(tree, chi0)?;
    Ok(along_root_perp(tree, parts.coefficient()))
}

/// Product of `psi0(W_v)` over the t-leaves.
pub fn eval_scalar_majorant(tree: &CascadeTree, psi0: &InitialData) -> Result<f64> {
    Ok(scalar_majorant_log(tree, psi0)?.exp())
}

/// `ln Xbar`, which stays finite for deep trees where `Xbar` over- or underflows.
pub fn scalar_majorant_log(tree: &CascadeTree, psi0: &InitialData) -> Result<f64> {
    require_finished(tree)?;
    let c = cut(tree);
    let log_form = tree.nodes.len() > DIRECT_PRODUCT_LIMIT;
    let mut values = Vec::with_capacity(c.leaves.len());
    for &i in &c.leaves {
        let n = &tree.nodes[i as usize];
        let v = psi0.scalar_at(&n.w, n.norm)?;
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativeInitialData(format!("psi0 = {v} at |xi| = {}", n.norm)));
        }
        values.push(v);
    }
    Ok(Product::of(values.into_iter(), log_form).log_abs())
}

/// Rotation of the plane taking the direction of `from` to that of `to`.
fn rotation(from: &WaveVector, to: &WaveVector) -> (f64, f64) {
    let angle = to[1].atan2(to[0]) - from[1].atan2(from[0]);
    (angle.cos(), angle.sin())
}

/// The root sign flip: `W_1` and `W_2` are mirrored across the root direction
/// (so `W~_1 + W~_2 = xi`) and each child's subtree is rigidly rotated onto
/// its new root. Clocks, holding times and birth times are carried over.
pub fn flip_root_sign(tree: &CascadeTree) -> Result<CascadeTree> {
    if tree.params.d != 2 {
        return Err(Error::domain("the sign flip is planar"));
    }
    let mut out = tree.clone();
    let Some([c1, c2]) = tree.nodes[0].children else {
        return Ok(out);
    };
    let e = tree.xi.scale(1.0 / tree.nodes[0].norm);
    // reflecting W_2 directly rather than forming xi - W~_1 keeps the
    // direction of a short W_2 accurate
    let reflect = |w: &WaveVector| {
        let along = 2.0 * e.dot(w);
        WaveVector(e.0.iter().zip(w.0.iter()).map(|(ek, wk)| along * ek - wk).collect())
    };
    let (w1, w2) = (&tree.nodes[c1 as usize].w, &tree.nodes[c2 as usize].w);
    let (w1_new, w2_new) = (reflect(w1), reflect(w2));
    let rots = [rotation(w1, &w1_new), rotation(w2, &w2_new)];
    // subtree membership by breadth-first order: children follow parents
    let mut branch = vec![usize::MAX; tree.nodes.len()];
    branch[c1 as usize] = 0;
    branch[c2 as usize] = 1;
    for i in 1..tree.nodes.len() {
        if branch[i] == usize::MAX {
            let p = tree.nodes[i].parent.expect("non-root node has a parent") as usize;
            branch[i] = branch[p];
        }
        let (c, s) = rots[branch[i]];
        let w = &tree.nodes[i].w;
        out.nodes[i].w = WaveVector(SmallVec::from_slice(&[c * w[0] - s * w[1], s * w[0] + c * w[1]]));
    }
    out.nodes[c1 as usize].w = w1_new;
    out.nodes[c2 as usize].w = w2_new;
    Ok(out)
}

/// `(X + X~) / 2` for radial vortex data, where `X~` is the solution process
/// on the sign-flipped realization. `X~` is evaluated from the tree's
/// descriptors (signs `Sigma_v`, angle pairs, norms) with `Sigma_root`
/// reversed, so the cancellation on root-internal trees is exact.
pub fn symmetrized_eval(tree: &CascadeTree, chi0: &InitialData) -> Result<Amplitude> {
    chi0.check_vortex()?;
    let parts = closed_form_parts(tree, chi0)?;
    let flipped = if tree.root_is_leaf() { parts } else { parts.with_root_sign_flipped() };
    let k = 0.5 * (parts.coefficient() + flipped.coefficient());
    Ok(along_root_perp(tree, k))
}
