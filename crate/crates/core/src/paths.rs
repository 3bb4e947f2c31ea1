//! Integral curves of the generators, commutator fields and the switching
//! paths that realize their flows.
//!
//! For `v ∈ V_0` the commutator `Y_v^{(n)} = [Y_v^{(n−1)}, Y]` acts as the
//! constant field `⟨B^n v, ∇⟩`. The path `γ^{(n,k)}_{v,δ}` is built by the
//! recursion
//!
//! ```text
//! γ^{(n,n)}_{v,δ}(z)   = (t, x + δ^{2n+1} B^n v)
//! γ^{(n,k+1)}_{v,δ}(z) = e^{−δ²Y} γ^{(n,k)}_{v,−δ} e^{δ²Y} γ^{(n,k)}_{v,δ}(z)
//! ```
//!
//! and its endpoint has the closed form `(t, x + S_{n,k}(δ) v)`; see
//! [`s_closed_form`]. Both routes are kept so they can be checked against
//! each other.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::GroupError;
use crate::group::{singular_range, GroupSpec, Point, RANK_TOL};
use crate::multiindex::factorial;

/// A generator of the Lie algebra: `X_i = ∂_{x_i}` (`1 ≤ i ≤ p_0`) or
/// `Y = ⟨Bx, ∇⟩ + ∂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VectorField {
    X(usize),
    Y,
}

impl VectorField {
    /// Formal degree: 1 for `X_i`, 2 for `Y`.
    pub fn formal_degree(self) -> u32 {
        match self {
            VectorField::X(_) => 1,
            VectorField::Y => 2,
        }
    }

    pub fn name(self) -> String {
        match self {
            VectorField::X(i) => format!("X{i}"),
            VectorField::Y => "Y".to_string(),
        }
    }

    /// `e^{δ·field}(z)`.
    pub fn flow(self, spec: &GroupSpec, delta: f64, z: &Point) -> Result<Point, GroupError> {
        match self {
            VectorField::X(i) => flow_x(spec, i, delta, z),
            VectorField::Y => Ok(flow_y(spec, delta, z)),
        }
    }
}

/// `e^{δX_i}(t, x) = (t, x + δ e_i)`, `i` counted from 1.
pub fn flow_x(spec: &GroupSpec, i: usize, delta: f64, z: &Point) -> Result<Point, GroupError> {
    let p0 = spec.layers()[0];
    if i == 0 || i > p0 {
        return Err(GroupError::FieldIndexOutOfRange { index: i, p0 });
    }
    let mut out = z.clone();
    out.x[i - 1] += delta;
    Ok(out)
}

/// `e^{δY}(t, x) = (t + δ, e^{δB} x)`.
pub fn flow_y(spec: &GroupSpec, delta: f64, z: &Point) -> Point {
    Point {
        t: z.t + delta,
        x: spec.apply_exp(delta, &z.x),
    }
}

fn check_direction(spec: &GroupSpec, v: &DVector<f64>) -> Result<(), GroupError> {
    if v.len() != spec.d() {
        return Err(GroupError::DimensionMismatch {
            expected: spec.d(),
            found: v.len(),
        });
    }
    let p0 = spec.layers()[0];
    if v.iter().skip(p0).any(|&c| c != 0.0) {
        return Err(GroupError::UnsupportedDirection);
    }
    Ok(())
}

/// Coefficient vector `B^n v` of the commutator field `Y_v^{(n)}`.
pub fn commutator_vector(
    spec: &GroupSpec,
    n: usize,
    v: &DVector<f64>,
) -> Result<DVector<f64>, GroupError> {
    check_direction(spec, v)?;
    Ok(match spec.power_ref(n) {
        Some(p) => p * v,
        None => DVector::zeros(spec.d()),
    })
}

/// The pivot set `Π_{B,n}` and the restriction of `B^n` to `V_{0,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSet {
    pub level: usize,
    /// 0-based coordinates of the selected columns (all inside layer 0).
    pub indices: Vec<usize>,
    /// `∏_{j=1}^n B_j`, a `p_n × p_0` matrix (the identity for `n = 0`).
    pub product: DMatrix<f64>,
}

impl PivotSet {
    /// Square, invertible `p_n × p_n` restriction of `product` to the pivots.
    pub fn restricted(&self) -> DMatrix<f64> {
        self.product.select_columns(self.indices.iter())
    }

    /// Columns `e_j`, `j ∈ Π_{B,n}`, spanning `V_{0,n}` in `ℝ^d`.
    pub fn basis(&self, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, self.indices.len(), |i, c| {
            if i == self.indices[c] {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// First `p_n` linearly independent columns of `B_n ⋯ B_1`, chosen greedily
/// left to right. Level 0 returns every coordinate of `V_0`.
pub fn pivot_columns(spec: &GroupSpec, n: usize) -> Result<PivotSet, GroupError> {
    if n > spec.r() {
        return Err(GroupError::LevelOutOfRange {
            level: n as i64,
            max: spec.r(),
        });
    }
    let p0 = spec.layers()[0];
    let rows = spec.layer_range(n);
    let bn = spec.power_ref(n).expect("n <= r");
    let product = bn.view((rows.start, 0), (rows.len(), p0)).into_owned();
    let target = spec.layers()[n];

    let mut indices: Vec<usize> = Vec::with_capacity(target);
    for col in 0..p0 {
        if indices.len() == target {
            break;
        }
        indices.push(col);
        let sub = product.select_columns(indices.iter());
        let (smin, smax) = singular_range(&sub);
        if smax == 0.0 || smin <= RANK_TOL * smax {
            indices.pop();
        }
    }
    debug_assert_eq!(indices.len(), target, "full-rank blocks guarantee p_n pivots");
    Ok(PivotSet {
        level: n,
        indices,
        product,
    })
}

/// Endpoint and every intermediate point of a switching path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub endpoint: Point,
    pub waypoints: Vec<Point>,
    pub segment_count: usize,
}

impl PathResult {
    fn constant(z: &Point) -> Self {
        PathResult {
            endpoint: z.clone(),
            waypoints: vec![z.clone()],
            segment_count: 0,
        }
    }
}

fn check_levels(spec: &GroupSpec, n: i64, k: usize) -> Result<usize, GroupError> {
    let r = spec.r();
    if n < -1 || n > r as i64 {
        return Err(GroupError::LevelOutOfRange { level: n, max: r });
    }
    let n = n.max(0) as usize;
    if k < n || k > r {
        return Err(GroupError::LevelOutOfRange {
            level: k as i64,
            max: r,
        });
    }
    Ok(n)
}

/// `γ^{(n,k)}_{v,δ}(z)` evaluated by composing the elementary flows of the
/// recursion. `n = −1` is treated as `n = 0`.
pub fn gamma_iterative(
    spec: &GroupSpec,
    n: i64,
    k: usize,
    v: &DVector<f64>,
    delta: f64,
    z: &Point,
) -> Result<PathResult, GroupError> {
    let n = check_levels(spec, n, k)?;
    check_direction(spec, v)?;
    let bnv = spec.power_ref(n).expect("n <= r") * v;
    let mut waypoints = vec![z.clone()];
    let endpoint = gamma_step(spec, n, k, &bnv, delta, z, &mut waypoints);
    Ok(PathResult {
        segment_count: waypoints.len() - 1,
        endpoint,
        waypoints,
    })
}

fn gamma_step(
    spec: &GroupSpec,
    n: usize,
    k: usize,
    bnv: &DVector<f64>,
    delta: f64,
    z: &Point,
    waypoints: &mut Vec<Point>,
) -> Point {
    if k == n {
        let out = z.shifted(&(bnv * delta.powi(2 * n as i32 + 1)));
        waypoints.push(out.clone());
        return out;
    }
    let d2 = delta * delta;
    let a = gamma_step(spec, n, k - 1, bnv, delta, z, waypoints);
    let b = flow_y(spec, d2, &a);
    waypoints.push(b.clone());
    let c = gamma_step(spec, n, k - 1, bnv, -delta, &b, waypoints);
    let out = flow_y(spec, -d2, &c);
    waypoints.push(out.clone());
    out
}

/// Number of elementary segments composed by [`gamma_iterative`] for
/// `k − n = m`: `3·2^m − 2`.
pub fn segment_count(m: usize) -> usize {
    3 * (1usize << m) - 2
}

/// `c_m(s) = Σ_{h ∈ ℕ^m, |h| = s} 1/h!` for `h_i ≥ 1`, by brute force.
fn composition_weights(m: usize, max_total: usize) -> Vec<f64> {
    let mut weights = vec![0.0; max_total + 1];
    let mut h = vec![1usize; m];
    if m == 0 {
        weights[0] = 1.0;
        return weights;
    }
    if m > max_total {
        return weights;
    }
    loop {
        let total: usize = h.iter().sum();
        if total <= max_total {
            weights[total] += 1.0 / h.iter().map(|&v| factorial(v as u32)).product::<f64>();
        }
        // odometer over h_i in 1..=max_total
        let mut pos = 0;
        loop {
            if pos == m {
                return weights;
            }
            h[pos] += 1;
            if h[pos] <= max_total {
                break;
            }
            h[pos] = 1;
            pos += 1;
        }
    }
}

/// `S_{n,k}(δ)` with `γ^{(n,k)}_{v,δ}(t,x) = (t, x + S_{n,k}(δ) v)`:
///
/// `S_{n,n}(δ) = δ^{2n+1} B^n`,
/// `S_{n,k}(δ) = (−1)^{k−n} δ^{2n+1} B^n Σ_{h ∈ ℕ^{k−n}, |h| ≤ r} (−B)^{|h|} δ^{2|h|} / h!`.
pub fn s_closed_form(
    spec: &GroupSpec,
    n: i64,
    k: usize,
    delta: f64,
) -> Result<DMatrix<f64>, GroupError> {
    let n = check_levels(spec, n, k)?;
    let r = spec.r();
    let m = k - n;
    let weights = composition_weights(m, r);
    let mut out = DMatrix::zeros(spec.d(), spec.d());
    let lead = if m.is_multiple_of(2) { 1.0 } else { -1.0 } * delta.powi(2 * n as i32 + 1);
    for (s, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        if let Some(p) = spec.power_ref(n + s) {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            out += p * (lead * sign * w * delta.powi(2 * s as i32));
        }
    }
    Ok(out)
}

/// `S̃_{n,k}(δ) = S_{n,k}(δ) − δ^{2k+1} B^k`.
pub fn s_tilde(spec: &GroupSpec, n: i64, k: usize, delta: f64) -> Result<DMatrix<f64>, GroupError> {
    let s = s_closed_form(spec, n, k, delta)?;
    Ok(s - spec.matrix_power(k) * delta.powi(2 * k as i32 + 1))
}

/// The chain of points produced by the connection construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionResult {
    /// `ζ_{n−1}, ζ_n, …, ζ_r`.
    pub points: Vec<Point>,
    /// `δ_n, …, δ_r`.
    pub deltas: Vec<f64>,
    /// `v_n, …, v_r`; zero where the step was skipped.
    pub directions: Vec<DVector<f64>>,
    /// Full switching path for each step.
    pub paths: Vec<PathResult>,
    /// First level `n`.
    pub start_level: usize,
}

impl ConnectionResult {
    pub fn endpoint(&self) -> &Point {
        self.points.last().expect("at least the start point")
    }
}

/// Moves from `ζ` to `ζ + (0, y)`, `y ∈ ⊕_{k ≥ n} V_k`, along the paths
/// `γ^{(n−1,k)}`, one per level `k = n, …, r`.
///
/// At level `k` the step solves `B^k w_k = y^{[k]} + ξ^{[k]} − ξ_{k−1}^{[k]}`
/// for the unique `w_k ∈ V_{0,k}` and walks with `v_k = w_k/|w_k|`,
/// `δ_k = |w_k|^{1/(2k+1)}`, so that `δ_k^{2k+1} B^k v_k = B^k w_k`. A step
/// with `w_k = 0` is skipped. Lower layers are never touched by later
/// steps, so the chain ends exactly at `ζ + (0, y)`.
pub fn connect(
    spec: &GroupSpec,
    n: usize,
    zeta: &Point,
    y: &DVector<f64>,
) -> Result<ConnectionResult, GroupError> {
    let r = spec.r();
    if n > r {
        return Err(GroupError::LevelOutOfRange {
            level: n as i64,
            max: r,
        });
    }
    for v in [zeta.dim(), y.len()] {
        if v != spec.d() {
            return Err(GroupError::DimensionMismatch {
                expected: spec.d(),
                found: v,
            });
        }
    }
    for j in 0..spec.d() {
        if spec.layer_of(j) < n && y[j] != 0.0 {
            return Err(GroupError::UnsupportedIncrement {
                layer: spec.layer_of(j),
                level: n,
            });
        }
    }

    let path_level = n as i64 - 1;
    let p0 = spec.layers()[0];
    let mut points = vec![zeta.clone()];
    let mut deltas = Vec::with_capacity(r + 1 - n);
    let mut directions = Vec::with_capacity(r + 1 - n);
    let mut paths = Vec::with_capacity(r + 1 - n);

    for k in n..=r {
        let current = points.last().expect("nonempty").clone();
        let range = spec.layer_range(k);
        let target = DVector::from_fn(range.len(), |i, _| {
            let j = range.start + i;
            y[j] + zeta.x[j] - current.x[j]
        });

        let pivots = pivot_columns(spec, k)?;
        let coeffs = if k == 0 {
            target
        } else {
            pivots
                .restricted()
                .lu()
                .solve(&target)
                .expect("pivot restriction is invertible")
        };
        let mut w = DVector::zeros(spec.d());
        for (c, &j) in coeffs.iter().zip(&pivots.indices) {
            debug_assert!(j < p0);
            w[j] = *c;
        }

        let norm = w.norm();
        if norm == 0.0 {
            deltas.push(0.0);
            directions.push(DVector::zeros(spec.d()));
            paths.push(PathResult::constant(&current));
            points.push(current);
            continue;
        }
        let v = w / norm;
        let delta = norm.powf(1.0 / (2 * k + 1) as f64);
        let path = gamma_iterative(spec, path_level, k, &v, delta, &current)?;
        points.push(path.endpoint.clone());
        deltas.push(delta);
        directions.push(v);
        paths.push(path);
    }

    Ok(ConnectionResult {
        points,
        deltas,
        directions,
        paths,
        start_level: n,
    })
}
