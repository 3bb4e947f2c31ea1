//! Intrinsic derivatives, the `B`-Taylor polynomial and its remainder.
//!
//! The order-`n` polynomial of `u` at `ζ = (s, ξ)` is
//!
//! ```text
//! T_n u(ζ, z) = Σ_{2k + |β|_B ≤ n} Y^k ∂^β u(ζ) / (k! β!) · (t − s)^k (x − e^{(t−s)B} ξ)^β
//! ```

use serde::Serialize;

use crate::diffop::{DiffOp, Letter};
use crate::error::{CalculusError, GroupError};
use crate::field::{ScalarField, SharedField, Smoothness};
use crate::group::{GroupSpec, Point};
use crate::multiindex::{
    b_length_unchecked, enumerate_terms, factorial, monomial_unchecked, MultiIndex,
    TaylorTermIndex,
};
use crate::paths::{flow_y, VectorField};

/// Central difference of `u` along the integral curve of `field`:
/// `(u(e^{hX} z) − u(e^{−hX} z)) / 2h`.
pub fn lie_derivative_fd(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    field: VectorField,
    z: &Point,
    h: f64,
) -> Result<f64, GroupError> {
    let plus = field.flow(spec, h, z)?;
    let minus = field.flow(spec, -h, z)?;
    Ok((u.value(&plus) - u.value(&minus)) / (2.0 * h))
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Tensor-product central stencil for `∂_t^{dt} ∂_x^{dx} u(z)`.
///
/// Each axis uses `h = ε^{1/(order+2)} · max(1, |coordinate|)` where
/// `order = dt + |dx|`.
pub fn fd_partial(u: &dyn ScalarField, dt: u32, dx: &[u32], z: &Point) -> f64 {
    let order = dt + dx.iter().sum::<u32>();
    if order == 0 {
        return u.value(z);
    }
    let base = f64::EPSILON.powf(1.0 / (order as f64 + 2.0));
    // axis 0 is time, axis j+1 is x_j
    let mut axes: Vec<(usize, u32, f64)> = Vec::new();
    if dt > 0 {
        axes.push((0, dt, base * z.t.abs().max(1.0)));
    }
    for (j, &b) in dx.iter().enumerate() {
        if b > 0 {
            axes.push((j + 1, b, base * z.x[j].abs().max(1.0)));
        }
    }
    stencil(u, &axes, z.clone())
}

fn stencil(u: &dyn ScalarField, axes: &[(usize, u32, f64)], z: Point) -> f64 {
    let Some(&(axis, b, h)) = axes.first() else {
        return u.value(&z);
    };
    let mut acc = 0.0;
    for m in 0..=b {
        let offset = (b as f64 / 2.0 - m as f64) * h;
        let mut p = z.clone();
        if axis == 0 {
            p.t += offset;
        } else {
            p.x[axis - 1] += offset;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(b, m) * stencil(u, &axes[1..], p);
    }
    acc / h.powi(b as i32)
}

/// `Y^k ∂^β u(z)` without an oracle: Euclidean stencil for `∂^β`, then a
/// Richardson-extrapolated `k`-th central difference along `δ ↦ e^{δY} z`.
pub fn fd_intrinsic(spec: &GroupSpec, u: &dyn ScalarField, k: u32, beta: &[u32], z: &Point) -> f64 {
    if k == 0 {
        return fd_partial(u, 0, beta, z);
    }
    let inner_order = beta.iter().sum::<u32>();
    let noise = if inner_order == 0 {
        f64::EPSILON
    } else {
        f64::EPSILON.powf(2.0 / (inner_order as f64 + 2.0))
    };
    let h = noise.powf(1.0 / (k as f64 + 4.0));
    let g = |delta: f64| fd_partial(u, 0, beta, &flow_y(spec, delta, z));
    let central = |h: f64| {
        let mut acc = 0.0;
        for m in 0..=k {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(k, m) * g((k as f64 / 2.0 - m as f64) * h);
        }
        acc / h.powi(k as i32)
    };
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

fn check_point(spec: &GroupSpec, z: &Point) -> Result<(), GroupError> {
    if z.dim() == spec.d() {
        Ok(())
    } else {
        Err(GroupError::DimensionMismatch {
            expected: spec.d(),
            found: z.dim(),
        })
    }
}

fn check_smoothness(u: &dyn ScalarField, order: u32) -> Result<(), CalculusError> {
    let Smoothness { max_order, .. } = u.smoothness();
    match max_order {
        Some(avail) if order > avail => Err(CalculusError::InsufficientSmoothness {
            field: u.name().to_string(),
            requested: order,
            available: avail,
        }),
        _ => Ok(()),
    }
}

/// `Y^k ∂^β u(ζ)`, exact through the oracle when the field has one, by
/// finite differences otherwise.
pub fn mixed_derivative(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    k: u32,
    beta: &MultiIndex,
    zeta: &Point,
) -> Result<f64, CalculusError> {
    check_point(spec, zeta)?;
    if beta.dim() != spec.d() {
        return Err(GroupError::DimensionMismatch {
            expected: spec.d(),
            found: beta.dim(),
        }
        .into());
    }
    check_smoothness(u, 2 * k + b_length_unchecked(spec, beta))?;
    if k == 0 && beta.is_zero() {
        return Ok(u.value(zeta));
    }
    if u.has_oracle() {
        let op = DiffOp::intrinsic(spec, k, &beta.0);
        Ok(op.apply(zeta, |dt, dx, z| {
            u.partial(dt, dx, z).expect("field reports an oracle")
        }))
    } else {
        Ok(fd_intrinsic(spec, u, k, &beta.0, zeta))
    }
}

/// Derivative along an arbitrary word of `Y`, `∂_{x_j}`, `∂_t`; `word[0]`
/// is applied last. Finite differences feed the expansion when the field
/// has no oracle.
pub fn word_derivative(spec: &GroupSpec, u: &dyn ScalarField, word: &[Letter], z: &Point) -> f64 {
    let op = DiffOp::word(spec, word);
    if u.has_oracle() {
        op.apply(z, |dt, dx, p| u.partial(dt, dx, p).expect("oracle"))
    } else {
        op.apply(z, |dt, dx, p| fd_partial(u, dt, dx, p))
    }
}

/// The order-`n` Taylor polynomial at an anchor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorPoly {
    pub anchor: Point,
    pub order: u32,
    pub terms: Vec<TaylorTermIndex>,
    /// `Y^k ∂^β u(ζ) / (k! β!)`, aligned with `terms`.
    pub coefficients: Vec<f64>,
}

impl TaylorPoly {
    pub fn coefficient(&self, term: &TaylorTermIndex) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t == term)
            .map(|i| self.coefficients[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TaylorTermIndex, f64)> {
        self.terms.iter().zip(self.coefficients.iter().copied())
    }
}

pub fn taylor_poly(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    n: u32,
    zeta: &Point,
) -> Result<TaylorPoly, CalculusError> {
    let terms = enumerate_terms(spec, n);
    let coefficients = terms
        .iter()
        .map(|term| {
            let d = mixed_derivative(spec, u, term.k, &term.beta, zeta)?;
            Ok(d / (factorial(term.k) * term.beta.factorial()))
        })
        .collect::<Result<Vec<_>, CalculusError>>()?;
    Ok(TaylorPoly {
        anchor: zeta.clone(),
        order: n,
        terms,
        coefficients,
    })
}

/// `T_n u(ζ, z)`.
pub fn taylor_eval(spec: &GroupSpec, poly: &TaylorPoly, z: &Point) -> Result<f64, GroupError> {
    let inc = spec.difference(&poly.anchor, z)?;
    Ok(poly
        .iter()
        .map(|(term, c)| {
            if c == 0.0 {
                0.0
            } else {
                c * inc.t.powi(term.k as i32) * monomial_unchecked(&term.beta.0, inc.x.as_slice())
            }
        })
        .sum())
}

/// `u(z) − T_n u(ζ, z)`.
pub fn remainder(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    n: u32,
    zeta: &Point,
    z: &Point,
) -> Result<f64, CalculusError> {
    let poly = taylor_poly(spec, u, n, zeta)?;
    remainder_of(spec, u, &poly, z)
}

/// Remainder against a precomputed polynomial.
pub fn remainder_of(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    poly: &TaylorPoly,
    z: &Point,
) -> Result<f64, CalculusError> {
    Ok(u.value(z) - taylor_eval(spec, poly, z)?)
}

/// `∂_t u = Y u − ⟨Bx, ∇u⟩`.
pub fn time_derivative(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    z: &Point,
) -> Result<f64, CalculusError> {
    let d = spec.d();
    let yu = mixed_derivative(spec, u, 1, &MultiIndex::zeros(d), z)?;
    let bx = spec.b() * &z.x;
    let mut drift = 0.0;
    for j in 0..d {
        if bx[j] != 0.0 {
            drift += bx[j] * mixed_derivative(spec, u, 0, &MultiIndex::unit(d, j), z)?;
        }
    }
    Ok(yu - drift)
}

/// `u(e^{δY} z) − Σ_{i ≤ n} δ^i Y^i u(z) / i!`.
pub fn mean_value_residual(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    n: u32,
    z: &Point,
    delta: f64,
) -> Result<f64, CalculusError> {
    let zero = MultiIndex::zeros(spec.d());
    let mut sum = 0.0;
    for i in 0..=n {
        let yi = mixed_derivative(spec, u, i, &zero, z)?;
        sum += delta.powi(i as i32) * yi / factorial(i);
    }
    Ok(u.value(&flow_y(spec, delta, z)) - sum)
}

/// The non-commutative Taylor polynomial `P_n u(ζ, z)`, `n ≤ 4`, on the
/// prototype group, written with the exponential coordinates
/// `Log(ζ⁻¹∘z) = (t − s, x_1 − ξ_1, x_2 − ξ_2 − (t − s)ξ_1 − (t − s)(x_1 − ξ_1)/2)`
/// and the symmetrized operators `(Y∂_1 + ∂_1Y)/2`,
/// `(Y∂_1² + ∂_1Y∂_1 + ∂_1²Y)/6`.
pub fn bonfiglioli_prototype(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    n: u32,
    zeta: &Point,
    z: &Point,
) -> Result<f64, CalculusError> {
    if !spec.is_prototype() {
        return Err(CalculusError::UnsupportedGroup);
    }
    if n > 4 {
        return Err(CalculusError::OrderOutOfRange(n));
    }
    check_point(spec, zeta)?;
    check_point(spec, z)?;
    use Letter::{Dx, Y};
    let d1 = Dx(0);
    let d2 = Dx(1);

    let dt = z.t - zeta.t;
    let dx1 = z.x[0] - zeta.x[0];
    let log2 = z.x[1] - zeta.x[1] - dt * zeta.x[0] - dt * dx1 / 2.0;
    let w = |word: &[Letter]| word_derivative(spec, u, word, zeta);

    let mut p = u.value(zeta);
    if n >= 1 {
        p += w(&[d1]) * dx1;
    }
    if n >= 2 {
        p += w(&[d1, d1]) * dx1 * dx1 / 2.0 + w(&[Y]) * dt;
    }
    if n >= 3 {
        p += (w(&[Y, d1]) + w(&[d1, Y])) / 2.0 * dx1 * dt
            + w(&[d1, d1, d1]) / 6.0 * dx1.powi(3)
            + w(&[d2]) * log2;
    }
    if n >= 4 {
        p += w(&[Y, Y]) / 2.0 * dt * dt
            + w(&[d1, d1, d1, d1]) / 24.0 * dx1.powi(4)
            + (w(&[Y, d1, d1]) + w(&[d1, Y, d1]) + w(&[d1, d1, Y])) / 6.0 * dx1 * dx1 * dt
            + w(&[d2, d1]) * dx1 * log2;
    }
    Ok(p)
}

/// `Y^k ∂^β u` as a field in its own right.
pub struct DerivedField {
    spec: GroupSpec,
    base: SharedField,
    k: u32,
    beta: MultiIndex,
    name: String,
}

impl DerivedField {
    pub fn new(spec: &GroupSpec, base: SharedField, k: u32, beta: MultiIndex) -> Self {
        let name = format!("Y^{k} d^{beta} {}", base.name());
        DerivedField {
            spec: spec.clone(),
            base,
            k,
            beta,
            name,
        }
    }
}

impl ScalarField for DerivedField {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, z: &Point) -> f64 {
        mixed_derivative(&self.spec, self.base.as_ref(), self.k, &self.beta, z)
            .expect("derived field evaluated inside its smoothness range")
    }
    fn singular_distance(&self, z: &Point) -> Option<f64> {
        self.base.singular_distance(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{field_by_name, FnField, WithoutOracle};
    use std::sync::Arc;

    fn proto() -> GroupSpec {
        GroupSpec::prototype()
    }

    fn coord(j: usize) -> FnField {
        FnField::new(format!("x{}", j + 1), move |z: &Point| z.x[j]).with_partials(
            move |dt, dx, z| match (dt, dx.iter().sum::<u32>()) {
                (0, 0) => z.x[j],
                (0, 1) if dx[j] == 1 => 1.0,
                _ => 0.0,
            },
        )
    }

    #[test]
    fn lie_derivative_of_x2_along_y() {
        let g = proto();
        let u = coord(1);
        let z = Point::new(0.3, vec![1.7, -0.2]);
        let v = lie_derivative_fd(&g, &u, VectorField::Y, &z, 1e-3).unwrap();
        assert!((v - 1.7).abs() < 1e-12);
        let c = FnField::new("c", |_| 4.0);
        assert_eq!(lie_derivative_fd(&g, &c, VectorField::X(1), &z, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn lie_derivative_example_three_halves() {
        let g = proto();
        let c = 0.25;
        let u = field_by_name("abs_x2_3half:0.25", 2).unwrap();
        for z in [
            Point::new(0.1, vec![0.8, 0.6]),
            Point::new(-0.4, vec![-1.3, -0.3]),
        ] {
            let s = z.x[1] - c;
            let exact = 1.5 * z.x[0] * s.abs().sqrt() * s.signum();
            let fd = lie_derivative_fd(&g, u.as_ref(), VectorField::Y, &z, 1e-5).unwrap();
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn mixed_derivative_cases() {
        let g = proto();
        let z = Point::new(0.2, vec![0.9, -0.4]);
        let u = coord(1);
        let zero = MultiIndex::zeros(2);
        assert_eq!(mixed_derivative(&g, &u, 1, &zero, &z).unwrap(), 0.9);
        assert_eq!(mixed_derivative(&g, &u, 0, &zero, &z).unwrap(), -0.4);

        let s = FnField::new("sin x1", |z: &Point| z.x[0].sin());
        let d = mixed_derivative(&g, &s, 0, &MultiIndex(vec![2, 0]), &z).unwrap();
        assert!((d + 0.9f64.sin()).abs() < 1e-6, "{d}");

        let bad = mixed_derivative(&g, &s, 0, &MultiIndex(vec![2]), &z);
        assert!(matches!(bad, Err(CalculusError::Group(_))));
    }

    #[test]
    fn smoothness_is_enforced() {
        let g = proto();
        let u = FnField::new("c11", |z: &Point| z.x[0]).with_smoothness(Smoothness {
            label: "C^{1,1}".into(),
            max_order: Some(1),
        });
        let z = Point::new(0.0, vec![0.0, 0.0]);
        assert!(mixed_derivative(&g, &u, 0, &MultiIndex(vec![1, 0]), &z).is_ok());
        assert!(matches!(
            mixed_derivative(&g, &u, 1, &MultiIndex(vec![0, 0]), &z),
            Err(CalculusError::InsufficientSmoothness { requested: 2, available: 1, .. })
        ));
    }

    #[test]
    fn oracle_and_fd_agree_at_low_order() {
        let g = proto();
        let z = Point::new(0.3, vec![0.5, -0.7]);
        for name in ["sin_cos_poly", "transport"] {
            let u = field_by_name(name, 2).unwrap();
            let plain = WithoutOracle(u.clone());
            for (k, beta) in [(0, [1, 0]), (0, [0, 1]), (1, [0, 0]), (0, [2, 0]), (1, [1, 0])] {
                let b = MultiIndex(beta.to_vec());
                let a = mixed_derivative(&g, u.as_ref(), k, &b, &z).unwrap();
                let f = mixed_derivative(&g, &plain, k, &b, &z).unwrap();
                assert!((a - f).abs() < 1e-5, "{name} k={k} β={beta:?}: {a} vs {f}");
            }
        }
    }

    #[test]
    fn taylor_anchor_and_linear_field() {
        let g = proto();
        let u = coord(0);
        let zeta = Point::new(0.5, vec![0.3, 0.8]);
        let poly = taylor_poly(&g, &u, 3, &zeta).unwrap();
        let nonzero: Vec<_> = poly.iter().filter(|(_, c)| *c != 0.0).map(|(t, _)| t.clone()).collect();
        assert_eq!(
            nonzero,
            vec![
                TaylorTermIndex { k: 0, beta: MultiIndex(vec![0, 0]) },
                TaylorTermIndex { k: 0, beta: MultiIndex(vec![1, 0]) },
            ]
        );
        assert_eq!(taylor_eval(&g, &poly, &zeta).unwrap(), 0.3);
        let p0 = taylor_poly(&g, &u, 0, &zeta).unwrap();
        assert_eq!(p0.coefficients, vec![0.3]);
    }

    #[test]
    fn x2_is_reproduced_exactly() {
        let g = proto();
        let u = coord(1);
        let zeta = Point::new(-0.4, vec![1.1, 0.6]);
        let z = Point::new(0.9, vec![-0.2, 2.5]);
        let poly = taylor_poly(&g, &u, 3, &zeta).unwrap();
        assert!((taylor_eval(&g, &poly, &z).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(remainder(&g, &u, 3, &zeta, &zeta).unwrap(), 0.0);
    }

    #[test]
    fn prototype_t4_matches_printed_formula() {
        let g = proto();
        let u = field_by_name("sin_cos_poly", 2).unwrap();
        let zeta = Point::new(0.2, vec![0.4, -0.3]);
        let z = Point::new(0.5, vec![0.1, 0.2]);
        let (s, xi1, xi2) = (zeta.t, zeta.x[0], zeta.x[1]);
        let (t, x1, x2) = (z.t, z.x[0], z.x[1]);
        let dt = t - s;
        let d1 = x1 - xi1;
        let d2 = x2 - xi2 - dt * xi1;
        use Letter::{Dx, Y};
        let w = |word: &[Letter]| word_derivative(&g, u.as_ref(), word, &zeta);
        let t2 = u.value(&zeta) + w(&[Dx(0)]) * d1 + w(&[Dx(0), Dx(0)]) * d1 * d1 / 2.0 + w(&[Y]) * dt;
        let t3 = t2
            + w(&[Dx(0), Dx(0), Dx(0)]) / 6.0 * d1.powi(3)
            + w(&[Y, Dx(0)]) * d1 * dt
            + w(&[Dx(1)]) * d2;
        let t4 = t3
            + w(&[Dx(0); 4]) / 24.0 * d1.powi(4)
            + w(&[Y, Dx(0), Dx(0)]) / 2.0 * d1 * d1 * dt
            + w(&[Y, Y]) / 2.0 * dt * dt
            + w(&[Dx(1), Dx(0)]) * d1 * d2;
        for (n, expect) in [(2, t2), (3, t3), (4, t4)] {
            let poly = taylor_poly(&g, u.as_ref(), n, &zeta).unwrap();
            let got = taylor_eval(&g, &poly, &z).unwrap();
            assert!((got - expect).abs() < 1e-14, "n={n}: {got} vs {expect}");
        }
    }

    #[test]
    fn time_derivative_cases() {
        let g = proto();
        let z = Point::new(0.7, vec![1.3, -0.6]);
        assert!(time_derivative(&g, &coord(1), &z).unwrap().abs() < 1e-15);
        let t = FnField::new("t", |z: &Point| z.t).with_partials(|dt, dx, z| {
            match (dt, dx.iter().sum::<u32>()) {
                (0, 0) => z.t,
                (1, 0) => 1.0,
                _ => 0.0,
            }
        });
        assert_eq!(time_derivative(&g, &t, &z).unwrap(), 1.0);
        let u = FnField::new("sin t + x1 x2", |z: &Point| z.t.sin() + z.x[0] * z.x[1]);
        let v = time_derivative(&g, &u, &z).unwrap();
        assert!((v - 0.7f64.cos()).abs() < 1e-6, "{v}");
    }

    #[test]
    fn bonfiglioli_guards_and_constants() {
        let g = proto();
        let c = FnField::new("c", |_| 2.5).with_partials(|dt, dx, _| {
            if dt == 0 && dx.iter().all(|&b| b == 0) {
                2.5
            } else {
                0.0
            }
        });
        let zeta = Point::new(0.1, vec![0.2, 0.3]);
        let z = Point::new(0.4, vec![-0.1, 0.0]);
        for n in 0..=4 {
            assert_eq!(bonfiglioli_prototype(&g, &c, n, &zeta, &z).unwrap(), 2.5);
        }
        assert_eq!(
            bonfiglioli_prototype(&g, &c, 5, &zeta, &z),
            Err(CalculusError::OrderOutOfRange(5))
        );
        let other = GroupSpec::new(nalgebra::DMatrix::zeros(1, 1), vec![1]).unwrap();
        let z1 = Point::new(0.0, vec![0.0]);
        assert_eq!(
            bonfiglioli_prototype(&other, &c, 2, &z1, &z1),
            Err(CalculusError::UnsupportedGroup)
        );
    }

    #[test]
    fn derived_field_of_three_halves() {
        let g = proto();
        let u = field_by_name("abs_x2_3half", 2).unwrap();
        let yu = DerivedField::new(&g, u, 1, MultiIndex::zeros(2));
        let z = Point::new(0.0, vec![2.0, 0.25]);
        assert!((yu.value(&z) - 1.5 * 2.0 * 0.5).abs() < 1e-15);
        let _ = Arc::new(yu);
    }
}
