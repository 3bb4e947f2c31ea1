//! Named groups and random generators used by tests, benches and the CLI.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::group::{GroupSpec, Point};

/// `prototype` and `langevin` (the same `d = 2` system).
pub fn by_name(name: &str) -> Option<GroupSpec> {
    match name {
        "prototype" | "langevin" => Some(GroupSpec::prototype()),
        _ => None,
    }
}

/// A group with the given layers whose blocks have entries uniform in
/// `[−1, 1]`, redrawn until every block passes validation.
pub fn random_spec<R: Rng + ?Sized>(layers: &[usize], rng: &mut R) -> GroupSpec {
    loop {
        let blocks: Vec<DMatrix<f64>> = layers
            .windows(2)
            .map(|w| DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(spec) = GroupSpec::from_blocks(layers[0], &blocks) {
            return spec;
        }
    }
}

/// Point with every coordinate uniform in `[−scale, scale]`.
pub fn random_point<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Point {
    Point::new(
        rng.random_range(-scale..scale),
        (0..d).map(|_| rng.random_range(-scale..scale)).collect::<Vec<_>>(),
    )
}

/// Unit vector supported on the first layer.
pub fn random_unit_direction<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> DVector<f64> {
    let p0 = spec.layers()[0];
    loop {
        let v = DVector::from_fn(spec.d(), |j, _| {
            if j < p0 {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Random point normalized to `‖w‖_B = 1`; `equal_time` forces `t = 0`.
pub fn random_unit_point<R: Rng + ?Sized>(spec: &GroupSpec, equal_time: bool, rng: &mut R) -> Point {
    loop {
        let mut w = random_point(spec.d(), 1.0, rng);
        if equal_time {
            w.t = 0.0;
        }
        let n = spec.norm(&w);
        if n > 1e-3 {
            return spec.dilate_raw(1.0 / n, &w);
        }
    }
}

/// The test specs used throughout: prototype plus one random spec for
/// each `r ∈ {2, 3}` (with `d = 6` and `d = 8` respectively).
pub fn test_specs<R: Rng + ?Sized>(rng: &mut R) -> Vec<GroupSpec> {
    vec![
        GroupSpec::prototype(),
        random_spec(&[2, 2, 1], rng),
        random_spec(&[3, 2, 1], rng),
        random_spec(&[2, 2, 1, 1], rng),
        random_spec(&[3, 2, 2, 1], rng),
    ]
}
