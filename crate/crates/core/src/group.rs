//! The homogeneous group 𝒢_B attached to a block matrix `B`.
//!
//! Points are `(t, x)` with `x ∈ ℝ^d`. The translation law is
//! `ζ ∘ z = (s + t, x + e^{tB} ξ)` for `ζ = (s, ξ)`, `z = (t, x)`, with
//! identity `(0, 0)` and inverse `(−t, −e^{−tB} x)`. This is the convention
//! under which `ζ⁻¹ ∘ z = (t − s, x − e^{(t−s)B} ξ)` reproduces the Taylor
//! increments, and under which `Y = ⟨Bx, ∇⟩ + ∂_t` and the `∂_{x_i}`,
//! `i ≤ p_0`, are left-invariant. The commonly printed form
//! `(t, x) ∘ (s, ξ) = (t + s, e^{tB}x + ξ)` with inverse `(−t, e^{−tB}x)`
//! does not satisfy `z ∘ z⁻¹ = 0` and is not used.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::GroupError;

/// Absolute threshold above which an off-band entry of `B` is rejected.
pub const STAR_BLOCK_TOL: f64 = 1e-12;
/// Relative singular-value cutoff for the rank test on the blocks `B_j`.
pub const RANK_TOL: f64 = 1e-10;

/// A point `z = (t, x)` of `ℝ × ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    #[serde(with = "dvector_as_vec")]
    pub x: DVector<f64>,
}

mod dvector_as_vec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Vec::<f64>::deserialize(d).map(DVector::from_vec)
    }
}

impl Point {
    pub fn new(t: f64, x: impl Into<Vec<f64>>) -> Self {
        Point {
            t,
            x: DVector::from_vec(x.into()),
        }
    }

    pub fn from_vector(t: f64, x: DVector<f64>) -> Self {
        Point { t, x }
    }

    pub fn origin(d: usize) -> Self {
        Point {
            t: 0.0,
            x: DVector::zeros(d),
        }
    }

    /// Builds a point from `[t, x_1, …, x_d]`.
    pub fn from_slice(coords: &[f64]) -> Self {
        assert!(!coords.is_empty(), "a point needs at least a time coordinate");
        Point::new(coords[0], coords[1..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `[t, x_1, …, x_d]`.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.t).chain(self.x.iter().copied()).collect()
    }

    /// Euclidean distance in `ℝ^{1+d}`.
    pub fn euclidean_distance(&self, other: &Point) -> f64 {
        let dt = self.t - other.t;
        (dt * dt + (&self.x - &other.x).norm_squared()).sqrt()
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        (&self.x - &other.x)
            .iter()
            .fold((self.t - other.t).abs(), |m, v| m.max(v.abs()))
    }

    /// Spatial translation `(t, x + y)`.
    pub fn shifted(&self, y: &DVector<f64>) -> Point {
        Point {
            t: self.t,
            x: &self.x + y,
        }
    }
}

/// A validated block matrix `B` together with its layer structure.
///
/// All powers `B^0, …, B^r` are computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    b: DMatrix<f64>,
    layers: Vec<usize>,
    cum_layers: Vec<usize>,
    exponents: Vec<u32>,
    layer_of: Vec<usize>,
    powers: Vec<DMatrix<f64>>,
}

impl GroupSpec {
    /// Validates `b` against the layer sizes `(p_0, …, p_r)`.
    pub fn new(b: DMatrix<f64>, layers: Vec<usize>) -> Result<Self, GroupError> {
        if layers.is_empty() || layers.contains(&0) {
            return Err(GroupError::EmptyLayers);
        }
        let d: usize = layers.iter().sum();
        if b.nrows() != d || b.ncols() != d {
            return Err(GroupError::DimensionMismatch {
                expected: d,
                found: if b.nrows() != d { b.nrows() } else { b.ncols() },
            });
        }
        if layers.windows(2).any(|w| w[1] > w[0]) {
            return Err(GroupError::NonMonotoneLayers(layers));
        }

        let layer_of: Vec<usize> = layers
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| std::iter::repeat_n(i, p))
            .collect();
        for row in 0..d {
            for col in 0..d {
                let value = b[(row, col)];
                if layer_of[row] != layer_of[col] + 1 && value.abs() > STAR_BLOCK_TOL {
                    return Err(GroupError::NonzeroStarBlock { row, col, value });
                }
            }
        }

        let cum_layers: Vec<usize> = layers
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let r = layers.len() - 1;

        let mut spec = GroupSpec {
            b,
            exponents: layer_of.iter().map(|&i| 2 * i as u32 + 1).collect(),
            layers,
            cum_layers,
            layer_of,
            powers: Vec::new(),
        };

        for j in 1..=r {
            let block = spec.block(j);
            let (sigma_min, sigma_max) = singular_range(&block);
            if sigma_max == 0.0 || sigma_min <= RANK_TOL * sigma_max {
                return Err(GroupError::RankDeficientBlock {
                    block: j,
                    sigma_min,
                    sigma_max,
                });
            }
        }

        let mut powers = Vec::with_capacity(r + 1);
        powers.push(DMatrix::identity(d, d));
        for h in 1..=r {
            let next = &powers[h - 1] * &spec.b;
            powers.push(next);
        }
        spec.powers = powers;
        Ok(spec)
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], layers: Vec<usize>) -> Result<Self, GroupError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|row| row.len() != n) {
            return Err(GroupError::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let b = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        GroupSpec::new(b, layers)
    }

    /// The prototype Kolmogorov group: `B = [[0, 0], [1, 0]]`, layers `(1, 1)`.
    pub fn prototype() -> Self {
        GroupSpec::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]], vec![1, 1])
            .expect("prototype group is valid")
    }

    /// Assembles `B` from its sub-diagonal blocks `B_1, …, B_r`, where `B_j`
    /// is `p_j × p_{j−1}`.
    pub fn from_blocks(p0: usize, blocks: &[DMatrix<f64>]) -> Result<Self, GroupError> {
        let mut layers = vec![p0];
        for (j, blk) in blocks.iter().enumerate() {
            if blk.ncols() != layers[j] {
                return Err(GroupError::DimensionMismatch {
                    expected: layers[j],
                    found: blk.ncols(),
                });
            }
            layers.push(blk.nrows());
        }
        let d: usize = layers.iter().sum();
        let mut b = DMatrix::zeros(d, d);
        let mut row0 = p0;
        let mut col0 = 0;
        for (j, blk) in blocks.iter().enumerate() {
            b.view_mut((row0, col0), (blk.nrows(), blk.ncols()))
                .copy_from(blk);
            col0 += layers[j];
            row0 += blk.nrows();
        }
        GroupSpec::new(b, layers)
    }

    pub fn d(&self) -> usize {
        self.layer_of.len()
    }

    /// Number of sub-diagonal blocks.
    pub fn r(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    /// `p̄_i = p_0 + … + p_i`.
    pub fn cum_layers(&self) -> &[usize] {
        &self.cum_layers
    }

    /// Dilation exponents `q_j` (1 on layer 0, `2i + 1` on layer `i`).
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Layer index of coordinate `j` (0-based).
    pub fn layer_of(&self, j: usize) -> usize {
        self.layer_of[j]
    }

    /// Coordinate range of layer `i`.
    pub fn layer_range(&self, i: usize) -> Range<usize> {
        let end = self.cum_layers[i];
        end - self.layers[i]..end
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The block `B_j` (`p_j × p_{j−1}`), `1 ≤ j ≤ r`.
    pub fn block(&self, j: usize) -> DMatrix<f64> {
        let rows = self.layer_range(j);
        let cols = self.layer_range(j - 1);
        self.b
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned()
    }

    /// `B^n`; the zero matrix for `n > r`.
    pub fn matrix_power(&self, n: usize) -> DMatrix<f64> {
        self.powers
            .get(n)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.d(), self.d()))
    }

    pub(crate) fn power_ref(&self, n: usize) -> Option<&DMatrix<f64>> {
        self.powers.get(n)
    }

    /// `e^{δB} = Σ_{h ≤ r} δ^h B^h / h!`, exact since `B^{r+1} = 0`.
    pub fn exp_b(&self, delta: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d(), self.d());
        let mut coeff = 1.0;
        for (h, p) in self.powers.iter().enumerate() {
            if h > 0 {
                coeff *= delta / h as f64;
            }
            out += p * coeff;
        }
        out
    }

    /// `e^{δB} v` without forming the matrix exponential.
    pub fn apply_exp(&self, delta: f64, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        let mut term = v.clone();
        for h in 1..=self.r() {
            term = &self.b * term * (delta / h as f64);
            out += &term;
        }
        out
    }

    fn check(&self, z: &Point) -> Result<(), GroupError> {
        if z.dim() == self.d() {
            Ok(())
        } else {
            Err(GroupError::DimensionMismatch {
                expected: self.d(),
                found: z.dim(),
            })
        }
    }

    /// `ζ ∘ z`.
    pub fn compose(&self, zeta: &Point, z: &Point) -> Result<Point, GroupError> {
        self.check(zeta)?;
        self.check(z)?;
        Ok(self.compose_raw(zeta, z))
    }

    pub(crate) fn compose_raw(&self, zeta: &Point, z: &Point) -> Point {
        Point {
            t: zeta.t + z.t,
            x: &z.x + self.apply_exp(z.t, &zeta.x),
        }
    }

    /// `z⁻¹ = (−t, −e^{−tB} x)`.
    pub fn inverse(&self, z: &Point) -> Point {
        Point {
            t: -z.t,
            x: -self.apply_exp(-z.t, &z.x),
        }
    }

    /// `ζ⁻¹ ∘ z = (t − s, x − e^{(t−s)B} ξ)`, evaluated directly.
    pub fn difference(&self, zeta: &Point, z: &Point) -> Result<Point, GroupError> {
        self.check(zeta)?;
        self.check(z)?;
        Ok(self.difference_raw(zeta, z))
    }

    pub(crate) fn difference_raw(&self, zeta: &Point, z: &Point) -> Point {
        let dt = z.t - zeta.t;
        Point {
            t: dt,
            x: &z.x - self.apply_exp(dt, &zeta.x),
        }
    }

    /// `D(λ) z = (λ² t, λ^{q_1} x_1, …, λ^{q_d} x_d)`.
    pub fn dilate(&self, lambda: f64, z: &Point) -> Result<Point, GroupError> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(GroupError::NonpositiveLambda(lambda));
        }
        self.check(z)?;
        Ok(self.dilate_raw(lambda, z))
    }

    pub(crate) fn dilate_raw(&self, lambda: f64, z: &Point) -> Point {
        Point {
            t: lambda * lambda * z.t,
            x: DVector::from_iterator(
                self.d(),
                z.x.iter()
                    .zip(&self.exponents)
                    .map(|(v, &q)| v * lambda.powi(q as i32)),
            ),
        }
    }

    /// `‖z‖_B = |t|^{1/2} + Σ |x_j|^{1/q_j}`.
    pub fn norm(&self, z: &Point) -> f64 {
        z.t.abs().sqrt() + self.spatial_norm(&z.x)
    }

    /// `|x|_B = Σ |x_j|^{1/q_j}`.
    pub fn spatial_norm(&self, x: &DVector<f64>) -> f64 {
        x.iter()
            .zip(&self.exponents)
            .map(|(v, &q)| root(v.abs(), q))
            .sum()
    }

    /// Membership in the open ball `{z : ‖ζ⁻¹ ∘ z‖_B < ρ}`.
    pub fn in_ball(&self, zeta: &Point, z: &Point, rho: f64) -> Result<bool, GroupError> {
        Ok(self.norm(&self.difference(zeta, z)?) < rho)
    }

    /// True for `B = [[0, 0], [1, 0]]`, layers `(1, 1)`.
    pub fn is_prototype(&self) -> bool {
        self.layers == [1, 1] && self.b == GroupSpec::prototype().b
    }

    /// Projection `x^{[i]}`: keeps the entries of layer `i`, zeroes the rest.
    pub fn project(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        let range = self.layer_range(i);
        DVector::from_fn(self.d(), |j, _| if range.contains(&j) { x[j] } else { 0.0 })
    }
}

fn root(v: f64, q: u32) -> f64 {
    match q {
        1 => v,
        3 => v.cbrt(),
        _ if v == 0.0 => 0.0,
        _ => v.powf(1.0 / q as f64),
    }
}

/// `(σ_min, σ_max)` over the `min(rows, cols)` singular values.
pub(crate) fn singular_range(m: &DMatrix<f64>) -> (f64, f64) {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (0.0, 0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let values = &sv.as_slice()[..k];
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max)
}
