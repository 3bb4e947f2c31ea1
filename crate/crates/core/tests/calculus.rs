use kolmo::calculus::{mean_value_residual, mixed_derivative, remainder_of, taylor_eval, taylor_poly};
use kolmo::field::{field_by_name, WithoutOracle};
use kolmo::fit::{fit_loglog, log_grid};
use kolmo::harness::config::ExperimentConfig;
use kolmo::harness::cmd_converge;
use kolmo::multiindex::{b_length, enumerate_terms};
use kolmo::presets::{random_point, random_spec};
use kolmo::{GroupSpec, MultiIndex, Point, TaylorTermIndex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coords(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0f64..1.0, d + 1).prop_map(|c| Point::from_slice(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn anchor_is_reproduced_exactly(zeta in coords(2), n in 0u32..5) {
        let g = GroupSpec::prototype();
        for name in ["sin_cos_poly", "transport", "mono:2,1:1"] {
            let u = field_by_name(name, 2).unwrap();
            let poly = taylor_poly(&g, u.as_ref(), n, &zeta).unwrap();
            let constant = TaylorTermIndex { k: 0, beta: MultiIndex::zeros(2) };
            prop_assert_eq!(poly.coefficient(&constant), Some(u.value(&zeta)));
            prop_assert_eq!(taylor_eval(&g, &poly, &zeta).unwrap(), u.value(&zeta));
            prop_assert_eq!(&poly.terms, &enumerate_terms(&g, n));
        }
    }

    #[test]
    fn oracle_and_finite_differences_agree(z in coords(2)) {
        let g = GroupSpec::prototype();
        for name in ["sin_cos_poly", "transport"] {
            let u = field_by_name(name, 2).unwrap();
            let plain = WithoutOracle(u.clone());
            for term in enumerate_terms(&g, 3) {
                let a = mixed_derivative(&g, u.as_ref(), term.k, &term.beta, &z).unwrap();
                let f = mixed_derivative(&g, &plain, term.k, &term.beta, &z).unwrap();
                prop_assert!((a - f).abs() < 1e-5, "{} {:?}: {} vs {}", name, term, a, f);
            }
        }
    }

    #[test]
    fn coordinate_polynomials_are_reproduced(s in any::<u64>(), k in 0u32..2,
                                             b in prop::collection::vec(0u32..3, 4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = random_spec(&[2, 1, 1], &mut rng);
        let beta = MultiIndex(b);
        let m = 2 * k + b_length(&g, &beta).unwrap();
        let u = field_by_name(&format!("mono:{}:{k}", beta.0.iter().map(u32::to_string).collect::<Vec<_>>().join(",")), 4).unwrap();
        let zeta = random_point(4, 1.0, &mut rng);
        let w = g.dilate(0.9, &kolmo::presets::random_unit_point(&g, false, &mut rng)).unwrap();
        let z = g.compose(&zeta, &w).unwrap();
        for n in m..m + 2 {
            let poly = taylor_poly(&g, u.as_ref(), n, &zeta).unwrap();
            let r = remainder_of(&g, u.as_ref(), &poly, &z).unwrap();
            prop_assert!(r.abs() < 1e-11, "m = {}, n = {}: {:e}", m, n, r);
        }
    }
}

#[test]
fn mean_value_residual_decays_with_one_extra_power() {
    // smooth fields: m = 1, α = 1, so the residual is O(|δ|^{n+1})
    let g = GroupSpec::prototype();
    let z = Point::new(0.2, vec![0.4, -0.3]);
    let deltas = log_grid(0.1, 1e-3, 12);
    for name in ["sin_cos_poly", "transport"] {
        let u = field_by_name(name, 2).unwrap();
        for n in 0..=3u32 {
            for sign in [1.0, -1.0] {
                let residuals: Vec<f64> = deltas
                    .iter()
                    .map(|&d| mean_value_residual(&g, u.as_ref(), n, &z, sign * d).unwrap().abs())
                    .collect();
                let fit = fit_loglog(&deltas, &residuals, 1e-13 * u.value(&z).abs().max(1.0));
                assert!(
                    fit.exact || fit.slope >= n as f64 + 1.0 - 0.15,
                    "{name} n={n} sign {sign}: slope {}",
                    fit.slope
                );
            }
        }
    }
}

#[test]
fn kinked_field_converges_at_second_order_in_equal_time() {
    let config = ExperimentConfig::from_toml(
        r#"
        schema_version = 1
        id = "abs-x2-equal-time"
        field = "abs_x2"
        equal_time = true
        orders = [2]
        anchor = [0.0, 0.3, 0.5]
        "#,
    )
    .unwrap();
    let report = cmd_converge(&config, 1).unwrap();
    for cell in &report.cells {
        assert!(cell.pass, "direction {}: slope {}", cell.direction, cell.fit.slope);
        assert!(cell.fit.exact || cell.fit.slope >= 2.85);
    }
}
