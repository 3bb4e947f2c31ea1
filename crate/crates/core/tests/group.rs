use kolmo::field::{field_by_name, FnField, ScalarField};
use kolmo::paths::{flow_x, flow_y};
use kolmo::presets::{random_point, random_spec, test_specs};
use kolmo::{GroupSpec, Point};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coords(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0f64..2.0, d + 1).prop_map(|c| Point::from_slice(&c))
}

fn spec_for(layers: &[usize], seed: u64) -> GroupSpec {
    if layers == [1, 1] {
        GroupSpec::prototype()
    } else {
        random_spec(layers, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

fn layer_choice() -> impl Strategy<Value = Vec<usize>> {
    prop::sample::select(vec![vec![1, 1], vec![2, 2, 1], vec![2, 1, 1], vec![3, 2, 2, 1]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn associativity(layers in layer_choice(), seed in 0u64..1000, s in any::<u64>()) {
        let g = spec_for(&layers, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (a, b, c) = (
            random_point(g.d(), 1.0, &mut rng),
            random_point(g.d(), 1.0, &mut rng),
            random_point(g.d(), 1.0, &mut rng),
        );
        let left = g.compose(&g.compose(&a, &b).unwrap(), &c).unwrap();
        let right = g.compose(&a, &g.compose(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
        let e = g.compose(&a, &g.inverse(&a)).unwrap();
        prop_assert!(e.max_abs_diff(&Point::origin(g.d())) < 1e-12);
    }

    #[test]
    fn dilation_is_an_automorphism(layers in layer_choice(), seed in 0u64..1000,
                                   s in any::<u64>(), lambda in 0.05f64..3.0) {
        let g = spec_for(&layers, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (a, b) = (random_point(g.d(), 1.0, &mut rng), random_point(g.d(), 1.0, &mut rng));
        let lhs = g.dilate(lambda, &g.compose(&a, &b).unwrap()).unwrap();
        let rhs = g.compose(&g.dilate(lambda, &a).unwrap(), &g.dilate(lambda, &b).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11 * lambda.powi(7).max(1.0));
    }

    #[test]
    fn norm_is_homogeneous(z in coords(2), lambda in 0.01f64..10.0) {
        let g = GroupSpec::prototype();
        let lhs = g.norm(&g.dilate(lambda, &z).unwrap());
        prop_assert!((lhs - lambda * g.norm(&z)).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn exponential_is_additive(layers in layer_choice(), seed in 0u64..1000,
                               a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = spec_for(&layers, seed);
        let diff = g.exp_b(a) * g.exp_b(b) - g.exp_b(a + b);
        prop_assert!(diff.abs().max() < 1e-13 * (1.0 + (a.abs() + b.abs()).powi(g.r() as i32 + 1)));
    }

    #[test]
    fn nilpotent_exponential_matches_general_exponential(layers in layer_choice(), seed in 0u64..1000,
                                                          delta in -1.0f64..1.0) {
        let g = spec_for(&layers, seed);
        let general = (g.b() * delta).exp();
        prop_assert!((g.exp_b(delta) - general).abs().max() < 1e-13);
    }

    #[test]
    fn flows_commute_with_left_translation(layers in layer_choice(), seed in 0u64..1000,
                                           s in any::<u64>(), delta in -1.0f64..1.0) {
        let g = spec_for(&layers, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (zeta, z) = (random_point(g.d(), 1.0, &mut rng), random_point(g.d(), 1.0, &mut rng));
        let a = g.compose(&zeta, &flow_y(&g, delta, &z)).unwrap();
        let b = flow_y(&g, delta, &g.compose(&zeta, &z).unwrap());
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
        for i in 1..=g.layers()[0] {
            let a = g.compose(&zeta, &flow_x(&g, i, delta, &z).unwrap()).unwrap();
            let b = flow_x(&g, i, delta, &g.compose(&zeta, &z).unwrap()).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }
}

/// Fourth-order central differences along one axis (0 = t, j = x_j).
fn fd4(u: &dyn ScalarField, axis: usize, second: bool, z: &Point) -> f64 {
    let h = 2e-3;
    let at = |k: f64| {
        let mut p = z.clone();
        if axis == 0 {
            p.t += k * h;
        } else {
            p.x[axis - 1] += k * h;
        }
        u.value(&p)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0), at(-1.0), at(0.0), at(1.0), at(2.0));
    if second {
        (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
    } else {
        (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
    }
}

/// `L = ½∂²_{x₁} + x₁∂_{x₂} + ∂_t` by finite differences.
fn kolmogorov_operator(u: &dyn ScalarField, z: &Point) -> f64 {
    0.5 * fd4(u, 1, true, z) + z.x[0] * fd4(u, 2, false, z) + fd4(u, 0, false, z)
}

#[test]
fn kolmogorov_operator_is_left_invariant() {
    let g = GroupSpec::prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let base = field_by_name("sin_cos_poly", 2).unwrap();
    for _ in 0..50 {
        let zeta = random_point(2, 1.0, &mut rng);
        let z = random_point(2, 1.0, &mut rng);
        let shifted = {
            let (g2, b2, zeta2) = (g.clone(), base.clone(), zeta.clone());
            FnField::new("u∘ℓ", move |p: &Point| b2.value(&g2.compose(&zeta2, p).unwrap()))
        };
        let lhs = kolmogorov_operator(base.as_ref(), &g.compose(&zeta, &z).unwrap());
        let rhs = kolmogorov_operator(&shifted, &z);
        // both sides carry finite-difference error; the analytic value is known
        let exact = {
            let w = g.compose(&zeta, &z).unwrap();
            -0.5 * w.x[0].sin() - w.x[0] * w.x[1].sin() + 2.0 * w.t
        };
        assert!((lhs - exact).abs() < 1e-8, "{lhs} vs {exact}: {:e}", lhs - exact);
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}: {:e}", lhs - rhs);
    }
}

fn quasi_triangle_ratio(g: &GroupSpec, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let zeta = random_point(g.d(), scale, &mut rng);
        let eta = random_point(g.d(), scale, &mut rng);
        let z = random_point(g.d(), scale, &mut rng);
        let num = g.norm(&g.compose(&zeta, &z).unwrap());
        let den = g.norm(&g.compose(&zeta, &eta).unwrap()) + g.norm(&g.compose(&g.inverse(&eta), &z).unwrap());
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    worst
}

#[test]
fn quasi_triangle_constant_is_finite_and_stable() {
    let specs = test_specs(&mut ChaCha8Rng::seed_from_u64(4));
    for g in &specs {
        let a = quasi_triangle_ratio(g, 1, 10_000);
        let b = quasi_triangle_ratio(g, 2, 10_000);
        assert!(a.is_finite() && b.is_finite());
        assert!(a / b < 2.0 && b / a < 2.0, "layers {:?}: {a} vs {b}", g.layers());
    }
}

#[test]
fn local_equivalence_with_euclidean_distance() {
    // C⁻¹|z − ζ| ≤ ‖ζ⁻¹∘z‖ ≤ C|z − ζ|^{1/(2r+1)} while both sides are ≤ 1
    let specs = test_specs(&mut ChaCha8Rng::seed_from_u64(4));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in &specs {
        let expo = 1.0 / (2 * g.r() + 1) as f64;
        let (mut lower, mut upper) = (0.0f64, 0.0f64);
        let mut samples = 0;
        while samples < 5_000 {
            let zeta = random_point(g.d(), 1.0, &mut rng);
            let scale = 10f64.powf(rng.random_range(-4.0..0.0));
            let inc = random_point(g.d(), scale, &mut rng);
            let z = Point::from_vector(zeta.t + inc.t, &zeta.x + &inc.x);
            let e = zeta.euclidean_distance(&z);
            let h = g.norm(&g.difference(&zeta, &z).unwrap());
            if e > 1.0 || h > 1.0 || e == 0.0 {
                continue;
            }
            samples += 1;
            lower = lower.max(e / h);
            upper = upper.max(h / e.powf(expo));
        }
        let c2 = lower.max(upper);
        assert!(c2.is_finite() && c2 < 100.0, "layers {:?}: C2 = {c2}", g.layers());
    }
}

#[test]
fn increments_match_translation_by_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for g in test_specs(&mut rng.clone()) {
        for _ in 0..200 {
            let zeta = random_point(g.d(), 1.0, &mut rng);
            let z = random_point(g.d(), 1.0, &mut rng);
            let direct = g.difference(&zeta, &z).unwrap();
            let generic = g.compose(&g.inverse(&zeta), &z).unwrap();
            assert!(direct.max_abs_diff(&generic) < 1e-12);
            let expected: DVector<f64> = &z.x - g.exp_b(z.t - zeta.t) * &zeta.x;
            assert!((direct.x - expected).amax() < 1e-12);
        }
    }
}
