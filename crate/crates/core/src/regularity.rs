//! Empirical intrinsic Hölder seminorms.
//!
//! A sampled supremum can refute boundedness but never certify it, so each
//! estimate carries the per-`δ` profile of the difference quotient and a
//! trend slope; `saturated` flags quotients that keep growing as `δ → 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CalculusError;
use crate::field::ScalarField;
use crate::fit::{least_squares, log_grid};
use crate::group::{GroupSpec, Point};
use crate::par;
use crate::paths::VectorField;
use crate::presets::random_unit_point;

/// Number of `|δ|` values on the log grid `[1e-6, 1]`; both signs are used.
pub const DELTA_LEVELS: usize = 25;
pub const DELTA_MIN: f64 = 1e-6;
pub const DELTA_MAX: f64 = 1.0;
/// Quotient trend below this slope (in `log q` vs `log|δ|`) counts as growth.
pub const SATURATION_SLOPE: f64 = -0.05;

/// Axis-aligned box in `ℝ^{1+d}`, coordinates ordered `(t, x_1, …, x_d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl Region {
    /// Unit box centred at the origin.
    pub fn unit(d: usize) -> Self {
        Region {
            center: vec![0.0; d + 1],
            half_width: 0.5,
        }
    }

    /// Unit box moved off the singular set of the built-in example fields.
    pub fn default_for(field: &str, d: usize) -> Self {
        let mut region = Region::unit(d);
        if field.starts_with("abs_x2") && d >= 2 {
            let c: f64 = field
                .split_once(':')
                .and_then(|(_, c)| c.parse().ok())
                .unwrap_or(0.0);
            region.center[2] = c + 1.0;
        } else if field == "gauss_smoothed_abs" {
            region.center[1] = 1.0;
        }
        region
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let coords: Vec<f64> = self
            .center
            .iter()
            .map(|c| c + rng.random_range(-self.half_width..self.half_width))
            .collect();
        Point::from_slice(&coords)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormEstimate {
    pub field: String,
    pub alpha: f64,
    pub value: f64,
    pub sample_count: usize,
    pub arg_max: (Point, f64),
    pub saturated: bool,
    /// Slope of `log sup q(δ)` against `log |δ|` over the smallest `|δ|`.
    pub trend_slope: f64,
    /// `(|δ|, sup over samples and both signs)`, largest `|δ|` first.
    pub per_delta: Vec<(f64, f64)>,
}

/// Difference quotient `|u(e^{δX} z) − u(z)| / |δ|^{α/m_X}`.
pub fn quotient(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    field: VectorField,
    alpha: f64,
    z: &Point,
    delta: f64,
) -> Result<f64, CalculusError> {
    let moved = field.flow(spec, delta, z)?;
    let m = field.formal_degree() as f64;
    Ok((u.value(&moved) - u.value(z)).abs() / delta.abs().powf(alpha / m))
}

fn delta_grid() -> Vec<f64> {
    log_grid(DELTA_MAX, DELTA_MIN, DELTA_LEVELS)
}

/// Empirical `‖u‖_{C^α_X}` over `samples` points of `region`.
pub fn seminorm_x(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    field: VectorField,
    alpha: f64,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<SeminormEstimate, CalculusError> {
    let max_alpha = field.formal_degree() as f64;
    if !(alpha > 0.0 && alpha <= max_alpha) {
        return Err(CalculusError::AlphaOutOfRange {
            alpha,
            max: max_alpha,
        });
    }
    // validate the field index once
    field.flow(spec, 0.0, &Point::origin(spec.d()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> = (0..samples).map(|_| region.sample(&mut rng)).collect();
    let grid = delta_grid();

    // per point: quotient for every signed δ, ordered (|δ| index, sign)
    let rows: Vec<Vec<f64>> = par::map_indexed(points.len(), |i| {
        let z = &points[i];
        grid.iter()
            .flat_map(|&d| [d, -d])
            .map(|d| quotient(spec, u, field, alpha, z, d).expect("field validated"))
            .collect()
    });

    let mut per_delta = vec![0.0f64; grid.len()];
    let mut best = (0.0f64, 0usize, grid[0]);
    for (i, row) in rows.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            let level = j / 2;
            let delta = if j % 2 == 0 { grid[level] } else { -grid[level] };
            per_delta[level] = per_delta[level].max(q);
            if q > best.0 {
                best = (q, i, delta);
            }
        }
    }

    let tail = grid.len() / 3;
    let (lx, ly): (Vec<f64>, Vec<f64>) = grid[grid.len() - tail..]
        .iter()
        .zip(&per_delta[grid.len() - tail..])
        .filter(|(_, &q)| q > 0.0)
        .map(|(d, q)| (d.ln(), q.ln()))
        .unzip();
    let trend_slope = if lx.len() >= 2 {
        least_squares(&lx, &ly).0
    } else {
        0.0
    };

    let arg_point = points
        .get(best.1)
        .cloned()
        .unwrap_or_else(|| Point::origin(spec.d()));
    Ok(SeminormEstimate {
        field: field.name(),
        alpha,
        value: best.0,
        sample_count: samples,
        arg_max: (arg_point, best.2),
        saturated: trend_slope < SATURATION_SLOPE,
        trend_slope,
        per_delta: grid.into_iter().zip(per_delta).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0AlphaReport {
    pub y: SeminormEstimate,
    pub x: Vec<SeminormEstimate>,
    /// `‖u‖_{C^α_Y} + Σ_i ‖u‖_{C^α_{∂_{x_i}}}`.
    pub combined: f64,
    /// `sup |u(z) − u(ζ)| / ‖ζ⁻¹∘z‖_B^α` over random nearby pairs.
    pub holder_quotient: f64,
    pub saturated: bool,
}

/// Combined `C^{0,α}_B` estimate plus the homogeneous-norm Hölder quotient.
pub fn classify_c0alpha(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    alpha: f64,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<C0AlphaReport, CalculusError> {
    let y = seminorm_x(spec, u, VectorField::Y, alpha, region, samples, seed)?;
    let x = (1..=spec.layers()[0])
        .map(|i| seminorm_x(spec, u, VectorField::X(i), alpha, region, samples, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let combined = y.value + x.iter().map(|e| e.value).sum::<f64>();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let pairs: Vec<(Point, Point)> = (0..samples)
        .map(|_| {
            let zeta = region.sample(&mut rng);
            let w = random_unit_point(spec, false, &mut rng);
            let rho = 10f64.powf(rng.random_range(-4.0..0.0));
            let z = spec.compose_raw(&zeta, &spec.dilate_raw(rho, &w));
            (zeta, z)
        })
        .collect();
    let holder_quotient = par::map_indexed(pairs.len(), |i| {
        let (zeta, z) = &pairs[i];
        let dist = spec.norm(&spec.difference_raw(zeta, z));
        (u.value(z) - u.value(zeta)).abs() / dist.powf(alpha)
    })
    .into_iter()
    .fold(0.0, f64::max);

    let saturated = y.saturated || x.iter().any(|e| e.saturated);
    Ok(C0AlphaReport {
        y,
        x,
        combined,
        holder_quotient,
        saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{field_by_name, FnField};

    #[test]
    fn constant_field_has_zero_seminorm() {
        let g = GroupSpec::prototype();
        let c = FnField::new("c", |_| 1.0);
        let e = seminorm_x(&g, &c, VectorField::Y, 1.0, &Region::unit(2), 50, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.saturated);
    }

    #[test]
    fn alpha_range_is_checked() {
        let g = GroupSpec::prototype();
        let c = FnField::new("c", |_| 1.0);
        let r = Region::unit(2);
        assert!(matches!(
            seminorm_x(&g, &c, VectorField::X(1), 1.5, &r, 5, 1),
            Err(CalculusError::AlphaOutOfRange { .. })
        ));
        assert!(seminorm_x(&g, &c, VectorField::Y, 2.0, &r, 5, 1).is_ok());
        assert!(seminorm_x(&g, &c, VectorField::Y, 0.0, &r, 5, 1).is_err());
        assert!(seminorm_x(&g, &c, VectorField::X(2), 1.0, &r, 5, 1).is_err());
    }

    #[test]
    fn transport_is_flat_along_y() {
        let g = GroupSpec::prototype();
        let u = field_by_name("transport", 2).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let e = seminorm_x(&g, u.as_ref(), VectorField::Y, alpha, &Region::unit(2), 40, 7).unwrap();
            // flow is exact up to rounding of x2 + δ x1
            assert!(e.value < 1e-9, "alpha {alpha}: {}", e.value);
        }
    }

    #[test]
    fn abs_x2_has_no_x1_dependence() {
        let g = GroupSpec::prototype();
        let u = field_by_name("abs_x2", 2).unwrap();
        let e = seminorm_x(&g, u.as_ref(), VectorField::X(1), 1.0, &Region::unit(2), 40, 7).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn growth_is_flagged() {
        // sqrt|x1| is 1/2-Hölder: α = 1 along X1 saturates
        let g = GroupSpec::prototype();
        let u = FnField::new("sqrt", |z: &Point| z.x[0].abs().sqrt());
        let mut region = Region::unit(2);
        region.half_width = 1e-7;
        let e = seminorm_x(&g, &u, VectorField::X(1), 1.0, &region, 20, 3).unwrap();
        assert!(e.saturated, "slope {}", e.trend_slope);
        let ok = seminorm_x(&g, &u, VectorField::X(1), 0.5, &region, 20, 3).unwrap();
        assert!(!ok.saturated, "slope {}", ok.trend_slope);
    }
}
