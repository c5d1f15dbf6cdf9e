//! Building blocks of the self-checks: exhaustive small tree shapes, scripted
//! planar trees, goodness-of-fit of the sampled ratio law, and Monte Carlo
//! branch moments.

use std::f64::consts::PI;

use crate::cascade::{grow_from, CascadeTree, GuardConfig, ScriptedDraws};
use crate::error::Result;
use crate::kernels::Kernel;
use crate::quad::QuadConfig;
use crate::samplers::{BranchSampler, RngStream};
use crate::solution::{eval_scalar_majorant, InitialData};
use crate::specfun::Params;
use crate::stats::{clustered_knots, ks_statistic, mean_stderr, TabulatedCdf};
use crate::vector::WaveVector;

/// All full binary tree shapes with at most `max_leaves` leaves, each given
/// as its list of internal addresses (`""` is the root, `"12"` is `v = (1, 2)`).
pub fn shapes(max_leaves: usize) -> Vec<Vec<String>> {
    fn build(prefix: &str, leaves: usize) -> Vec<Vec<String>> {
        if leaves == 1 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for left in 1..leaves {
            for l in build(&format!("{prefix}1"), left) {
                for r in build(&format!("{prefix}2"), leaves - left) {
                    let mut v = vec![prefix.to_string()];
                    v.extend(l.iter().cloned());
                    v.extend(r.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }
    (1..=max_leaves).flat_map(|n| build("", n)).collect()
}

/// A planar tree with the given internal vertices and random geometry at
/// horizon 1: internal vertices hold for `Y in [0.05, 0.15]`, leaves for
/// `Y in [1, 2]`.
pub fn tree_with_shape(p: &Params, internal: &[String], s: &mut RngStream) -> Result<CascadeTree> {
    let angle = 2.0 * PI * s.uniform_open();
    let norm = 0.5 + 2.0 * s.uniform_open();
    let xi = WaveVector::new(&[norm * angle.cos(), norm * angle.sin()])?;
    // breadth-first (address, wavevector)
    let mut order: Vec<(String, WaveVector)> = vec![(String::new(), xi.clone())];
    let mut firsts = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (addr, w) = order[i].clone();
        if internal.contains(&addr) {
            let w1 = WaveVector::new(&[
                w[0] * s.uniform_open() + (s.uniform_open() - 0.5) * norm,
                w[1] * s.uniform_open() + (s.uniform_open() - 0.5) * norm,
            ])?;
            let w2 = &w - &w1;
            firsts.push(w1.clone());
            order.push((format!("{addr}1"), w1));
            order.push((format!("{addr}2"), w2));
        }
        i += 1;
    }
    let clocks = order
        .iter()
        .map(|(addr, w)| {
            let y = if internal.contains(addr) { 0.05 + 0.1 * s.uniform_open() } else { 1.0 + s.uniform_open() };
            y * w.norm().powf(2.0 * p.gamma)
        })
        .collect();
    let mut draws = ScriptedDraws::new(clocks, firsts);
    grow_from(&mut draws, p, &xi, 1.0, GuardConfig::default())
}

/// `2^{-N} prod |chi0(W_v)|` over the t-leaves: the bound on `|X|` from
/// `|a (.) b| <= |a||b|/2`, and the scale of its rounding errors.
pub fn product_scale(tree: &CascadeTree, chi0: &InitialData) -> Result<f64> {
    let psi = InitialData::HalfModulus { of: Box::new(chi0.clone()) };
    Ok(2.0 * eval_scalar_majorant(tree, &psi)?)
}

/// Kolmogorov-Smirnov distance between `n` sampled ratios `|W1|/|xi|` and
/// the quadrature distribution function of the ratio law.
pub fn ratio_ks(p: &Params, n: usize, seed: u64) -> Result<f64> {
    let k = Kernel::new(*p)?;
    let bs = BranchSampler::new(*p)?;
    let mut s = RngStream::new(seed, 0);
    let xi = WaveVector::along_first_axis(p.d, 1.7);
    let mut rs = Vec::with_capacity(n);
    for _ in 0..n {
        rs.push(bs.sample(&mut s, &xi)?.w1.norm() / 1.7);
    }
    // tabulated in u = r / (1 + r) so the half-line is covered
    let cfg = QuadConfig::with_abs(1e-10);
    let exact = |u: f64| k.ratio_cdf(u / (1.0 - u), cfg).unwrap_or(f64::NAN);
    let mut knots = clustered_knots(0.0, 0.5, 200);
    knots.extend(clustered_knots(0.5, 1.0, 200).into_iter().skip(1));
    let table = TabulatedCdf::new(knots, exact).with_singular_points(&[0.5]);
    let d = ks_statistic(&rs, |r| table.eval(r / (1.0 + r)));
    if d.is_nan() {
        return Err(crate::error::Error::Quadrature("ratio distribution function".into()));
    }
    Ok(d)
}

/// Sample mean and standard error of a branch statistic.
pub type MeanErr = (f64, f64);

/// Monte Carlo `E[R^{b*}]` and `E[R_max^{-2 gamma}]` from `n` branchings.
pub fn branch_moments_mc(p: &Params, n: usize, seed: u64) -> Result<(MeanErr, MeanErr)> {
    let bs = BranchSampler::new(*p)?;
    let xi = WaveVector::along_first_axis(p.d, 1.0);
    let mut s = RngStream::new(seed, 0);
    let b = p.bstar();
    let mut rb = Vec::with_capacity(n);
    let mut rmax = Vec::with_capacity(n);
    for _ in 0..n {
        let br = bs.sample(&mut s, &xi)?;
        let (r1, r2) = (br.w1.norm(), br.w2.norm());
        rb.push(r1.powf(b));
        rmax.push(r1.max(r2).powf(-2.0 * p.gamma));
    }
    Ok((mean_stderr(&rb), mean_stderr(&rmax)))
}

/// Fraction of `+1` among the planar branching signs `sign(xi x W1)`.
pub fn planar_sign_frequency(p: &Params, n: usize, seed: u64) -> Result<f64> {
    let bs = BranchSampler::new(*p)?;
    let mut s = RngStream::new(seed, 0);
    let xi = WaveVector::new(&[0.3, -1.1])?;
    let mut plus = 0usize;
    for _ in 0..n {
        let b = bs.sample(&mut s, &xi)?;
        plus += (xi.cross2(&b.w1) > 0.0) as usize;
    }
    Ok(plus as f64 / n as f64)
}
