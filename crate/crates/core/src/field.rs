//! Scalar fields `u : ℝ^{1+d} → ℝ` and the built-in registry.
//!
//! A field may carry an analytic oracle for its Euclidean partial
//! derivatives `∂_t^j ∂_x^β u`; intrinsic derivatives `Y^k ∂^β u` are then
//! obtained exactly through [`crate::diffop::DiffOp`].

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::CalculusError;
use crate::group::Point;
use crate::multiindex::factorial;

/// Descriptive regularity information attached to a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothness {
    pub label: String,
    /// Highest intrinsic order `2k + |β|_B` for which classical derivatives
    /// are available; `None` when unrestricted (away from the singular set).
    pub max_order: Option<u32>,
}

impl Smoothness {
    pub fn smooth(label: impl Into<String>) -> Self {
        Smoothness {
            label: label.into(),
            max_order: None,
        }
    }
}

pub trait ScalarField: Send + Sync {
    fn name(&self) -> &str;

    fn value(&self, z: &Point) -> f64;

    /// Analytic `∂_t^{dt} ∂_x^{dx} u(z)`, when known.
    fn partial(&self, _dt: u32, _dx: &[u32], _z: &Point) -> Option<f64> {
        None
    }

    fn has_oracle(&self) -> bool {
        false
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::smooth("smooth")
    }

    /// Distance-like measure to the set where classical derivatives fail;
    /// `None` when there is no such set.
    fn singular_distance(&self, _z: &Point) -> Option<f64> {
        None
    }
}

impl fmt::Debug for dyn ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name())
    }
}

pub type SharedField = Arc<dyn ScalarField>;

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type PartialFn = dyn Fn(u32, &[u32], &Point) -> f64 + Send + Sync;

/// A field built from closures.
pub struct FnField {
    name: String,
    value: Box<ValueFn>,
    partial: Option<Box<PartialFn>>,
    smoothness: Smoothness,
}

impl FnField {
    pub fn new(name: impl Into<String>, value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        FnField {
            name: name.into(),
            value: Box::new(value),
            partial: None,
            smoothness: Smoothness::smooth("smooth"),
        }
    }

    /// Attaches an analytic partial-derivative oracle. It must return the
    /// value itself for `dt = 0, dx = 0`.
    pub fn with_partials(
        mut self,
        partial: impl Fn(u32, &[u32], &Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.partial = Some(Box::new(partial));
        self
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }
}

impl ScalarField for FnField {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, z: &Point) -> f64 {
        (self.value)(z)
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        self.partial.as_ref().map(|p| p(dt, dx, z))
    }
    fn has_oracle(&self) -> bool {
        self.partial.is_some()
    }
    fn smoothness(&self) -> Smoothness {
        self.smoothness.clone()
    }
}

/// Hides the oracle of another field, forcing finite-difference paths.
pub struct WithoutOracle(pub SharedField);

impl ScalarField for WithoutOracle {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn value(&self, z: &Point) -> f64 {
        self.0.value(z)
    }
    fn smoothness(&self) -> Smoothness {
        self.0.smoothness()
    }
    fn singular_distance(&self, z: &Point) -> Option<f64> {
        self.0.singular_distance(z)
    }
}

fn is_zero(dx: &[u32]) -> bool {
    dx.iter().all(|&b| b == 0)
}

/// The single coordinate carrying derivatives, if exactly one does.
fn single_axis(dx: &[u32]) -> Option<(usize, u32)> {
    let mut found = None;
    for (j, &b) in dx.iter().enumerate() {
        if b > 0 {
            if found.is_some() {
                return None;
            }
            found = Some((j, b));
        }
    }
    found
}

/// `t² + Σ_j f_j(x_j)` with `f_j = sin` on even and `cos` on odd (0-based)
/// coordinates. On the prototype group this is `sin x_1 + cos x_2 + t²`.
pub struct SinCosPoly;

impl SinCosPoly {
    fn trig(j: usize, order: u32, x: f64) -> f64 {
        if j.is_multiple_of(2) {
            match order % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            }
        } else {
            match order % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            }
        }
    }
}

impl ScalarField for SinCosPoly {
    fn name(&self) -> &str {
        "sin_cos_poly"
    }
    fn value(&self, z: &Point) -> f64 {
        z.t * z.t
            + z.x
                .iter()
                .enumerate()
                .map(|(j, &x)| Self::trig(j, 0, x))
                .sum::<f64>()
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        Some(match (dt, single_axis(dx), is_zero(dx)) {
            (0, _, true) => self.value(z),
            (1, _, true) => 2.0 * z.t,
            (2, _, true) => 2.0,
            (_, _, true) => 0.0,
            (0, Some((j, m)), false) => Self::trig(j, m, z.x[j]),
            _ => 0.0,
        })
    }
    fn has_oracle(&self) -> bool {
        true
    }
}

/// `|x_2 − c|`: Lipschitz, with a kink on `x_2 = c`.
pub struct AbsX2 {
    pub c: f64,
}

impl ScalarField for AbsX2 {
    fn name(&self) -> &str {
        "abs_x2"
    }
    fn value(&self, z: &Point) -> f64 {
        (z.x[1] - self.c).abs()
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        let s = z.x[1] - self.c;
        Some(match (dt, single_axis(dx), is_zero(dx)) {
            (0, _, true) => s.abs(),
            (0, Some((1, 1)), _) => signum0(s),
            _ => 0.0,
        })
    }
    fn has_oracle(&self) -> bool {
        true
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::smooth("C^{1,1}_B; Lipschitz in the Euclidean sense; kink on x2 = c")
    }
    fn singular_distance(&self, z: &Point) -> Option<f64> {
        Some((z.x[1] - self.c).abs())
    }
}

/// `|x_2 − c|^{3/2}`.
pub struct AbsX2ThreeHalf {
    pub c: f64,
}

impl ScalarField for AbsX2ThreeHalf {
    fn name(&self) -> &str {
        "abs_x2_3half"
    }
    fn value(&self, z: &Point) -> f64 {
        (z.x[1] - self.c).abs().powf(1.5)
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        let s = z.x[1] - self.c;
        if dt > 0 {
            return Some(0.0);
        }
        if is_zero(dx) {
            return Some(self.value(z));
        }
        Some(match single_axis(dx) {
            Some((1, m)) => {
                // ∂^m |s|^a = a(a−1)⋯(a−m+1) |s|^{a−m} sgn(s)^m
                let a = 1.5;
                let falling: f64 = (0..m).map(|i| a - i as f64).product();
                let sign = if m % 2 == 1 { signum0(s) } else { 1.0 };
                falling * s.abs().powf(a - m as f64) * sign
            }
            _ => 0.0,
        })
    }
    fn has_oracle(&self) -> bool {
        true
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::smooth("C^{2,1}_B; Euclidean C^{1,1/2}; singular on x2 = c")
    }
    fn singular_distance(&self, z: &Point) -> Option<f64> {
        Some((z.x[1] - self.c).abs())
    }
}

/// `sin(x_2 − t x_1)`: constant along the integral curves of `Y` on the
/// prototype group.
pub struct Transport;

impl ScalarField for Transport {
    fn name(&self) -> &str {
        "transport"
    }
    fn value(&self, z: &Point) -> f64 {
        (z.x[1] - z.t * z.x[0]).sin()
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        if dx.iter().skip(2).any(|&b| b > 0) {
            return Some(0.0);
        }
        let (a, b) = (dx[0], dx[1]);
        let (t, x1, x2) = (z.t, z.x[0], z.x[1]);
        // u = Im(e^{i x2} e^{c t x1}), c = −i
        let i = Complex64::i();
        let c = -i;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..=dt.min(a) {
            let binom = factorial(dt) / (factorial(m) * factorial(dt - m));
            let fall = factorial(a) / factorial(a - m);
            acc += (c * x1).powu(dt - m) * (binom * fall * t.powi((a - m) as i32));
        }
        let total = i.powu(b) * (i * x2).exp() * c.powu(a) * acc * (c * t * x1).exp();
        Some(total.im)
    }
    fn has_oracle(&self) -> bool {
        true
    }
}

/// `E|x_2 + x_1² Z|`, `Z ~ N(0,1)`: the Gaussian smoothing of `|x_2|` with
/// variance `x_1⁴`, equal to `|x_2|` on `x_1 = 0`.
pub struct GaussSmoothedAbs;

impl GaussSmoothedAbs {
    pub fn closed_form(x1: f64, x2: f64) -> f64 {
        let sigma = x1 * x1;
        if sigma == 0.0 {
            return x2.abs();
        }
        let ratio = x2 / sigma;
        // σ√(2/π) = σ · (2/√π) / √2
        sigma * FRAC_2_SQRT_PI / SQRT_2 * (-0.5 * ratio * ratio).exp() + x2 * erf(ratio / SQRT_2)
    }
}

impl ScalarField for GaussSmoothedAbs {
    fn name(&self) -> &str {
        "gauss_smoothed_abs"
    }
    fn value(&self, z: &Point) -> f64 {
        Self::closed_form(z.x[0], z.x[1])
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::smooth("C^{2,1}_B; Euclidean C^{0,α} only; smooth off x1 = 0")
    }
    fn singular_distance(&self, z: &Point) -> Option<f64> {
        Some(z.x[0].abs())
    }
}

/// Coordinate monomial `t^k x^β`.
pub struct Monomial {
    pub k: u32,
    pub beta: Vec<u32>,
    name: String,
}

impl Monomial {
    pub fn new(k: u32, beta: Vec<u32>) -> Self {
        let b: Vec<String> = beta.iter().map(|v| v.to_string()).collect();
        Monomial {
            name: format!("mono:{}:{}", b.join(","), k),
            k,
            beta,
        }
    }
}

fn falling_power(x: f64, exp: u32, order: u32) -> f64 {
    if order > exp {
        return 0.0;
    }
    let coeff = factorial(exp) / factorial(exp - order);
    coeff * x.powi((exp - order) as i32)
}

impl ScalarField for Monomial {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, z: &Point) -> f64 {
        z.t.powi(self.k as i32)
            * self
                .beta
                .iter()
                .zip(z.x.iter())
                .map(|(&b, &x)| x.powi(b as i32))
                .product::<f64>()
    }
    fn partial(&self, dt: u32, dx: &[u32], z: &Point) -> Option<f64> {
        let mut v = falling_power(z.t, self.k, dt);
        for ((&b, &o), &x) in self.beta.iter().zip(dx).zip(z.x.iter()) {
            v *= falling_power(x, b, o);
        }
        Some(v)
    }
    fn has_oracle(&self) -> bool {
        true
    }
}

fn signum0(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Names accepted by [`field_by_name`].
pub const REGISTRY: &[&str] = &[
    "sin_cos_poly",
    "abs_x2",
    "abs_x2_3half",
    "transport",
    "gauss_smoothed_abs",
    "mono:<beta>:<k>",
];

/// Looks up a built-in field for dimension `d`.
///
/// `abs_x2` and `abs_x2_3half` accept an optional offset, `abs_x2:0.5`.
/// Monomials are written `mono:<β_1,…,β_d>:<k>`, e.g. `mono:2,1:0`.
pub fn field_by_name(name: &str, d: usize) -> Result<SharedField, CalculusError> {
    let unknown = || CalculusError::UnknownField(name.to_string());
    let mut parts = name.splitn(2, ':');
    let head = parts.next().unwrap_or_default();
    let tail = parts.next();
    let needs_two = |f: SharedField| if d >= 2 { Ok(f) } else { Err(unknown()) };
    let offset = |tail: Option<&str>| -> Result<f64, CalculusError> {
        tail.map_or(Ok(0.0), |s| s.trim().parse().map_err(|_| unknown()))
    };
    match head {
        "sin_cos_poly" if tail.is_none() => Ok(Arc::new(SinCosPoly)),
        "abs_x2" => needs_two(Arc::new(AbsX2 { c: offset(tail)? })),
        "abs_x2_3half" => needs_two(Arc::new(AbsX2ThreeHalf { c: offset(tail)? })),
        "transport" if tail.is_none() => needs_two(Arc::new(Transport)),
        "gauss_smoothed_abs" if tail.is_none() => needs_two(Arc::new(GaussSmoothedAbs)),
        "mono" => {
            let rest = tail.ok_or_else(unknown)?;
            let (beta, k) = rest.rsplit_once(':').ok_or_else(unknown)?;
            let beta: Vec<u32> = beta
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| unknown())?;
            let k: u32 = k.trim().parse().map_err(|_| unknown())?;
            if beta.len() != d {
                return Err(unknown());
            }
            Ok(Arc::new(Monomial::new(k, beta)))
        }
        _ => Err(unknown()),
    }
}
