use std::f64::consts::PI;

use dsy_core::kernels::{convolution_line, Kernel};
use dsy_core::quad::QuadConfig;
use dsy_core::Params;

fn cfg() -> QuadConfig {
    QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 4000 }
}

#[test]
fn line_convolution_reproduces_kernel() {
    for g in [0.6, 0.7] {
        let k = Kernel::new(Params::new(1, g).unwrap()).unwrap();
        for xi in [0.5, 1.0, 2.0] {
            let conv = convolution_line(&k, xi, cfg()).unwrap().value;
            let want = xi.powf(2.0 * g - 1.0) * k.h_radial(xi);
            assert!((conv / want - 1.0).abs() < 1e-6, "gamma {g} xi {xi}: {conv} vs {want}");
        }
    }
}

#[test]
fn transition_kernel_is_normalized() {
    for (d, g, xn) in [(1, 0.7, 1.0), (2, 0.75, 1.0), (2, 0.6, 2.5), (3, 1.0, 0.4), (3, 1.2, 1.0), (4, 1.3, 3.0)] {
        let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
        let v = k.transition_normalization(xn, QuadConfig::default()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-6, "({d},{g},{xn}): {v}");
    }
}

#[test]
fn ratio_and_angle_densities_are_normalized() {
    for (d, g) in [(1, 0.6), (2, 0.8), (3, 1.0), (5, 1.6)] {
        let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
        let v = k.ratio_normalization(cfg()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-6, "g ({d},{g}): {v}");
    }
    for (d, g) in [(2, 0.7), (3, 1.0), (4, 0.9), (6, 1.8)] {
        let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
        let v = k.angle_normalization(QuadConfig::default()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-6, "f ({d},{g}): {v}");
    }
}

#[test]
fn three_routes_to_the_ratio_density_agree() {
    for (d, g) in [(2, 0.8), (3, 1.0), (4, 1.2)] {
        let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
        for i in 0..20 {
            let r = 0.05 + 0.19 * i as f64;
            if (r - 1.0).abs() < 1e-9 {
                continue;
            }
            let direct = k.ratio_pdf(r).unwrap();
            let push = k.ratio_pdf_from_angles(r, cfg()).unwrap();
            let marg = k.ratio_pdf_from_transition(r, cfg()).unwrap();
            assert!((push - direct).abs() < 1e-6 * direct.max(1.0), "({d},{g}) r={r}: angles {push} vs {direct}");
            assert!((marg - direct).abs() < 1e-6 * direct.max(1.0), "({d},{g}) r={r}: transition {marg} vs {direct}");
        }
    }
}

#[test]
fn inverse_ratio_law() {
    for (d, g) in [(2, 0.8), (3, 1.0), (5, 1.1), (1, 0.7)] {
        let k = Kernel::new(Params::new(d, g).unwrap()).unwrap();
        let e = 6.0 * g - d as f64 - 3.0;
        for i in 0..10 {
            let r = 0.15 + 0.37 * i as f64;
            if (r - 1.0).abs() < 1e-9 {
                continue;
            }
            let lhs = k.ratio_pdf(1.0 / r).unwrap() / (r * r);
            let rhs = k.ratio_pdf(r).unwrap() / r.powf(e);
            assert!((lhs / rhs - 1.0).abs() < 1e-10, "({d},{g}) r={r}");
        }
    }
    // at gamma = (d+3)/6 the law of R is invariant under inversion
    let k = Kernel::new(Params::new(3, 1.0).unwrap()).unwrap();
    let r: f64 = 2.5;
    assert!((k.ratio_pdf(r).unwrap() - k.ratio_pdf(1.0 / r).unwrap() / (r * r)).abs() < 1e-13);
}

#[test]
fn uniform_angles_in_three_dimensions() {
    let k = Kernel::new(Params::new(3, 1.0).unwrap()).unwrap();
    for i in 1..10 {
        for j in 1..(10 - i) {
            let (a, b) = (i as f64 * PI / 10.0, j as f64 * PI / 10.0);
            assert!((k.angle_pdf(a, b).unwrap() - 2.0 / (PI * PI)).abs() < 1e-10);
        }
    }
}

#[test]
fn angle_plug_in() {
    let k = Kernel::new(Params::new(2, 0.75).unwrap()).unwrap();
    let v = k.angle_pdf(PI / 3.0, PI / 3.0).unwrap();
    let want = k.angle_constant() * (PI / 3.0).sin().powf(-1.0);
    assert!((v - want).abs() < 1e-14 * want);
}

#[test]
fn marginal_cdf_is_a_distribution_function() {
    let k = Kernel::new(Params::new(2, 0.75).unwrap()).unwrap();
    let mut last = 0.0;
    for i in 1..20 {
        let c = k.angle_marginal_cdf(i as f64 * PI / 20.0, QuadConfig::default()).unwrap();
        assert!(c > last && c < 1.0);
        last = c;
    }
}
