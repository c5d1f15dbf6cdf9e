use dsy_core::cascade::{cut, grow, Address, GuardConfig};
use dsy_core::criteria::{classify, DEFAULT_MARGIN};
use dsy_core::estimators::estimate_rho;
use dsy_core::kernels::Kernel;
use dsy_core::quad::QuadConfig;
use dsy_core::samplers::RngStream;
use dsy_core::solution::{
    eval_closed_form_2d, eval_recursive, eval_scalar_majorant, flip_root_sign, odot, otimes, symmetrized_eval, Amplitude,
    InitialData, RadialProfile,
};
use dsy_core::specfun::{gauss_2f1, log_gamma};
use dsy_core::{Params, WaveVector};
use num_complex::Complex64;
use proptest::prelude::*;

const GUARD: GuardConfig = GuardConfig { max_nodes: 2048, max_depth: 4096 };

/// Admissible `(d, gamma)`: `gamma` at relative position `frac` of `(1/2, (d+2)/4)`.
fn params(d: usize, frac: f64) -> Params {
    let g = 0.5 + frac * (Params::gamma_upper(d) - 0.5);
    Params::new(d, g).unwrap()
}

fn planar() -> impl Strategy<Value = Params> {
    (0.02f64..0.98).prop_map(|f| {
        // the planar solution process needs gamma < 1
        Params::new(2, 0.5 + f * 0.5).unwrap()
    })
}

fn wave2() -> impl Strategy<Value = WaveVector> {
    (0.2f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| WaveVector::new(&[r * a.cos(), r * a.sin()]).unwrap())
}

fn complex_vec(d: usize) -> impl Strategy<Value = Amplitude> {
    (prop::collection::vec(-2.0f64..2.0, d), prop::collection::vec(-2.0f64..2.0, d))
        .prop_map(|(re, im)| Amplitude::from_real(&re).add(&Amplitude::from_real(&im).scale(Complex64::new(0.0, 1.0))))
}

fn vortex() -> InitialData {
    InitialData::VortexRadial { profile: RadialProfile::Gaussian { amplitude: 1.5, width: 2.0 } }
}

fn modulated() -> InitialData {
    InitialData::ModulatedVortex { profile: RadialProfile::Gaussian { amplitude: 2.0, width: 1.5 }, eps: 0.4 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_recurrence(x in 0.1f64..20.0) {
        let ratio = (log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap()).exp();
        prop_assert!((ratio / x - 1.0).abs() <= 1e-12, "x = {x}: {ratio}");
    }

    #[test]
    fn hypergeometric_is_symmetric(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.3f64..5.0, z in 0.0f64..0.99) {
        let ab = gauss_2f1(a, b, c, z);
        let ba = gauss_2f1(b, a, c, z);
        match (ab, ba) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn normalizing_constants_are_positive(d in 1usize..=12, frac in 0.001f64..0.999) {
        let k = Kernel::new(params(d, frac)).unwrap();
        // ratio and angle constants exist only for d >= 2
        let cs = if d == 1 { vec![k.kernel_constant()] } else { vec![k.kernel_constant(), k.ratio_constant(), k.angle_constant()] };
        for c in cs {
            prop_assert!(c > 0.0 && c.is_finite(), "({d}, {frac}): {c}");
        }
    }

    #[test]
    fn address_round_trips(digits in prop::collection::vec(1u8..=2, 0..40)) {
        let a = Address(digits);
        let s = a.to_string();
        prop_assert_eq!(s.parse::<Address>().unwrap(), a.clone());
        if let Some(parent) = a.parent() {
            prop_assert_eq!(parent.len() + 1, a.len());
            prop_assert_eq!(a.prefix(parent.len()), parent);
        }
    }

    #[test]
    fn odot_is_bounded_and_orthogonal(d in 2usize..=4, seed in any::<u64>()) {
        let mut s = RngStream::new(seed, 0);
        let xi = WaveVector::new(&(0..d).map(|_| s.normal()).collect::<Vec<_>>()).unwrap();
        let a = Amplitude::from_real(&(0..d).map(|_| s.normal()).collect::<Vec<_>>());
        let b = Amplitude::from_real(&(0..d).map(|_| s.normal()).collect::<Vec<_>>()).scale(Complex64::new(0.3, -1.1));
        let x = odot(&a, &b, &xi).unwrap();
        prop_assert!(x.norm() <= 0.5 * a.norm() * b.norm() + 1e-14);
        prop_assert!(x.dot_real(&xi).norm() <= 1e-12 * xi.norm() * x.norm().max(f64::MIN_POSITIVE));
        let y = otimes(&a, &b, &xi).unwrap();
        prop_assert!(y.dot_real(&xi).norm() <= 1e-12 * xi.norm() * y.norm().max(f64::MIN_POSITIVE));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn odot_of_complex_pairs_is_bounded(a in complex_vec(3), b in complex_vec(3), x in -2.0f64..2.0, y in -2.0f64..2.0, z in 0.1f64..2.0) {
        let xi = WaveVector::new(&[x, y, z]).unwrap();
        let out = odot(&a, &b, &xi).unwrap();
        prop_assert!(out.norm() <= 0.5 * a.norm() * b.norm() + 1e-14);
        prop_assert!(out.dot_real(&xi).norm() <= 1e-12 * xi.norm() * out.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn ratio_density_integrates_to_one(d in 1usize..=6, frac in 0.05f64..0.95) {
        let k = Kernel::new(params(d, frac)).unwrap();
        let v = k.ratio_normalization(QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 4000 }).unwrap().value;
        prop_assert!((v - 1.0).abs() <= 1e-6, "({d}, {frac}): {v}");
    }

    #[test]
    fn finished_trees_satisfy_the_count_identities(
        d in 1usize..=4, frac in 0.05f64..0.95, r in 0.3f64..2.0, t in 0.0f64..1.5, seed in any::<u64>(),
    ) {
        let p = params(d, frac);
        let tree = grow(&mut RngStream::new(seed, 0), &p, &WaveVector::along_first_axis(d, r), t, GUARD).unwrap();
        prop_assume!(!tree.guard_hit);
        let c = cut(&tree);
        prop_assert_eq!(c.leaves.len(), c.internal.len() + 1);
        prop_assert_eq!(tree.len(), 2 * c.internal.len() + 1);
        for n in &tree.nodes {
            prop_assert!((tree.birth_along_path(&n.addr).unwrap() - n.birth).abs() <= 1e-12);
        }
    }

    #[test]
    fn growth_is_reproducible(frac in 0.05f64..0.95, seed in any::<u64>(), stream in any::<u64>()) {
        let p = params(2, frac);
        let xi = WaveVector::new(&[0.7, -0.4]).unwrap();
        let a = grow(&mut RngStream::new(seed, stream), &p, &xi, 1.0, GUARD).unwrap();
        let b = grow(&mut RngStream::new(seed, stream), &p, &xi, 1.0, GUARD).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn closed_form_matches_recursion(p in planar(), xi in wave2(), t in 0.2f64..2.0, seed in any::<u64>()) {
        let tree = grow(&mut RngStream::new(seed, 1), &p, &xi, t, GUARD).unwrap();
        prop_assume!(!tree.guard_hit);
        for data in [vortex(), modulated()] {
            let rec = eval_recursive(&tree, &data).unwrap();
            let closed = eval_closed_form_2d(&tree, &data).unwrap();
            let psi = InitialData::HalfModulus { of: Box::new(data.clone()) };
            let scale = 2.0 * eval_scalar_majorant(&tree, &psi).unwrap();
            prop_assert!(rec.sub(&closed).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn majorant_dominates(p in planar(), xi in wave2(), t in 0.2f64..2.0, seed in any::<u64>()) {
        let tree = grow(&mut RngStream::new(seed, 2), &p, &xi, t, GUARD).unwrap();
        prop_assume!(!tree.guard_hit);
        let data = modulated();
        let psi = InitialData::HalfModulus { of: Box::new(data.clone()) };
        let x = eval_recursive(&tree, &data).unwrap().norm();
        prop_assert!(x <= 2.0 * eval_scalar_majorant(&tree, &psi).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn root_flip_negates_vortex_solutions(p in planar(), xi in wave2(), t in 0.2f64..2.0, seed in any::<u64>()) {
        let tree = grow(&mut RngStream::new(seed, 3), &p, &xi, t, GUARD).unwrap();
        prop_assume!(!tree.guard_hit);
        let flipped = flip_root_sign(&tree).unwrap();
        let back = flip_root_sign(&flipped).unwrap();
        for (a, c) in tree.nodes.iter().zip(&back.nodes) {
            prop_assert_eq!((a.t, a.y, a.birth), (c.t, c.y, c.birth));
            for (u, v) in a.w.as_slice().iter().zip(c.w.as_slice()) {
                prop_assert!((u - v).abs() <= 1e-13 * a.norm.max(1.0));
            }
        }
        let data = vortex();
        let x = eval_closed_form_2d(&tree, &data).unwrap();
        let y = eval_closed_form_2d(&flipped, &data).unwrap();
        let psi = InitialData::HalfModulus { of: Box::new(data.clone()) };
        let scale = 2.0 * eval_scalar_majorant(&tree, &psi).unwrap();
        if tree.root_is_leaf() {
            prop_assert_eq!(x, y);
        } else {
            prop_assert!(x.add(&y).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
            prop_assert!(symmetrized_eval(&tree, &data).unwrap().is_zero());
        }
    }

    #[test]
    fn classification_is_a_function_of_its_inputs(d in 1usize..=12, frac in 0.01f64..0.99) {
        let p = params(d, frac);
        prop_assert_eq!(classify(&p, DEFAULT_MARGIN), classify(&p, DEFAULT_MARGIN));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rho_is_a_probability(d in 1usize..=3, frac in 0.05f64..0.95, r in 0.3f64..2.0, t in 0.0f64..2.0, seed in any::<u64>()) {
        let p = params(d, frac);
        let e = estimate_rho(&p, &WaveVector::along_first_axis(d, r), t, 200, seed, GUARD).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.mean[0]));
        prop_assert!(e.guard_hits as f64 <= (1.0 - e.mean[0]) * 200.0 + 1e-9);
    }
}
