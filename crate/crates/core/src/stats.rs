//! Summation, goodness-of-fit statistics and tabulated distribution functions.

/// Pairwise (cascade) summation in index order; the result depends only on
/// the order of `xs`, never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean, both via pairwise sums.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Asymptotic two-sided critical value `sqrt(-ln(alpha/2)/2)` of the
/// Kolmogorov distribution; divide by `sqrt(n)` for the one-sample test.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the two-sample statistic at level `alpha`.
pub fn ks_two_sample_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    ks_coefficient(alpha) * ((na + nb) / (na * nb)).sqrt()
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum()
}

/// Upper `alpha` quantile of the chi-square law with `k` degrees of freedom
/// (Wilson-Hilferty cube-root normal approximation).
pub fn chi_square_critical(k: usize, alpha: f64) -> f64 {
    let z = normal_upper_quantile(alpha);
    let k = k as f64;
    let h = 2.0 / (9.0 * k);
    k * (1.0 - h + z * h.sqrt()).powi(3)
}

/// Upper quantile of the standard normal law (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn normal_upper_quantile(alpha: f64) -> f64 {
    -normal_quantile(alpha)
}

fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let lo = 0.02425;
    if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// A distribution function tabulated at increasing knots and interpolated
/// linearly. Queries in the first or last cell, or in a cell next to one of
/// the registered interior singular points, are answered by the exact
/// function instead: power-law cusps make linear interpolation poor there.
/// When the end behaviour `F(x) - F(a) ~ (x - a)^p` is known, the end cells
/// can interpolate in that power instead (see [`TabulatedCdf::with_power_ends`]).
pub struct TabulatedCdf<F: Fn(f64) -> f64> {
    knots: Vec<f64>,
    values: Vec<f64>,
    singular: Vec<f64>,
    ends: [Option<f64>; 2],
    exact: F,
}

impl<F: Fn(f64) -> f64> TabulatedCdf<F> {
    pub fn new(knots: Vec<f64>, exact: F) -> Self {
        let values = knots.iter().map(|&x| exact(x)).collect();
        TabulatedCdf { knots, values, singular: Vec::new(), ends: [None, None], exact }
    }

    /// Exponents `p` with `F(x) - F(a) ~ (x - a)^p` at the left end and
    /// `F(b) - F(x) ~ (b - x)^p` at the right end.
    pub fn with_power_ends(mut self, left: Option<f64>, right: Option<f64>) -> Self {
        self.ends = [left, right];
        self
    }

    pub fn with_singular_points(mut self, points: &[f64]) -> Self {
        self.singular = points.to_vec();
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if n >= 3 && x >= self.knots[0] && x <= self.knots[1] {
            if let Some(p) = self.ends[0] {
                let t = (x - self.knots[0]) / (self.knots[1] - self.knots[0]);
                return self.values[0] + t.powf(p) * (self.values[1] - self.values[0]);
            }
        }
        if n >= 3 && x >= self.knots[n - 2] && x <= self.knots[n - 1] {
            if let Some(p) = self.ends[1] {
                let t = (self.knots[n - 1] - x) / (self.knots[n - 1] - self.knots[n - 2]);
                return self.values[n - 1] - t.powf(p) * (self.values[n - 1] - self.values[n - 2]);
            }
        }
        if n < 3 || x <= self.knots[1] || x >= self.knots[n - 2] {
            return (self.exact)(x);
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let (lo, hi) = (self.knots[i.saturating_sub(1)], self.knots[(i + 2).min(n - 1)]);
        if self.singular.iter().any(|&p| p >= lo && p <= hi) {
            return (self.exact)(x);
        }
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

/// `n + 1` Chebyshev-Lobatto knots on `[a, b]`, clustered towards both ends.
pub fn clustered_knots(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let c = 0.5 * (1.0 - (std::f64::consts::PI * t).cos());
            a + (b - a) * c
        })
        .collect()
}
