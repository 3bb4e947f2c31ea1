//! Linear differential operators with polynomial coefficients in `x`,
//! `Σ c · x^γ ∂_t^j ∂_x^α`.
//!
//! Words in `Y` and `∂_{x_i}` are expanded exactly into this normal form and
//! then evaluated against a field's Euclidean partial derivatives.

use std::collections::BTreeMap;

use crate::group::{GroupSpec, Point};
use crate::multiindex::monomial_unchecked;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    xpow: Vec<u32>,
    dt: u32,
    dx: Vec<u32>,
}

/// A single letter of an operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    Y,
    /// `∂_{x_j}`, 0-based `j`.
    Dx(usize),
    Dt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    d: usize,
    terms: BTreeMap<Key, f64>,
}

impl DiffOp {
    pub fn identity(d: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            Key {
                xpow: vec![0; d],
                dt: 0,
                dx: vec![0; d],
            },
            1.0,
        );
        DiffOp { d, terms }
    }

    /// `∂_t^{dt} ∂_x^{dx}`.
    pub fn partial(dt: u32, dx: &[u32]) -> Self {
        let d = dx.len();
        let mut terms = BTreeMap::new();
        terms.insert(
            Key {
                xpow: vec![0; d],
                dt,
                dx: dx.to_vec(),
            },
            1.0,
        );
        DiffOp { d, terms }
    }

    /// `Y^k ∂^β`.
    pub fn intrinsic(spec: &GroupSpec, k: u32, beta: &[u32]) -> Self {
        let mut op = DiffOp::partial(0, beta);
        for _ in 0..k {
            op = op.left_y(spec);
        }
        op
    }

    /// Operator of a word, letters applied right to left: `word[0]` acts last.
    pub fn word(spec: &GroupSpec, word: &[Letter]) -> Self {
        let mut op = DiffOp::identity(spec.d());
        for letter in word.iter().rev() {
            op = match *letter {
                Letter::Y => op.left_y(spec),
                Letter::Dx(j) => op.left_dx(j),
                Letter::Dt => op.left_dt(),
            };
        }
        op
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(terms: &mut BTreeMap<Key, f64>, key: Key, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = terms.entry(key).or_insert(0.0);
        *entry += c;
    }

    /// `∂_{x_j} ∘ self`.
    pub fn left_dx(&self, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (key, &c) in &self.terms {
            if key.xpow[j] > 0 {
                let mut k2 = key.clone();
                k2.xpow[j] -= 1;
                Self::add_term(&mut terms, k2, c * key.xpow[j] as f64);
            }
            let mut k2 = key.clone();
            k2.dx[j] += 1;
            Self::add_term(&mut terms, k2, c);
        }
        DiffOp { d: self.d, terms }.pruned()
    }

    /// `∂_t ∘ self`; coefficients do not depend on `t`.
    pub fn left_dt(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(key, &c)| {
                let mut k2 = key.clone();
                k2.dt += 1;
                (k2, c)
            })
            .collect();
        DiffOp { d: self.d, terms }
    }

    /// `x_m ∘ self` (multiplication).
    fn times_x(&self, m: usize, scale: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(key, &c)| {
                let mut k2 = key.clone();
                k2.xpow[m] += 1;
                (k2, c * scale)
            })
            .collect();
        DiffOp { d: self.d, terms }
    }

    fn merged(mut self, other: DiffOp) -> Self {
        for (key, c) in other.terms {
            Self::add_term(&mut self.terms, key, c);
        }
        self
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| *c != 0.0);
        self
    }

    /// `Y ∘ self` with `Y = ∂_t + Σ_{i,j} B_{ij} x_j ∂_{x_i}`.
    pub fn left_y(&self, spec: &GroupSpec) -> Self {
        let b = spec.b();
        let mut out = self.left_dt();
        for i in 0..self.d {
            let di = self.left_dx(i);
            for j in 0..self.d {
                let bij = b[(i, j)];
                if bij != 0.0 {
                    out = out.merged(di.times_x(j, bij));
                }
            }
        }
        out.pruned()
    }

    /// Evaluates the operator at `z` given Euclidean partials
    /// `(dt, dx, z) ↦ ∂_t^{dt} ∂_x^{dx} u(z)`.
    pub fn apply<F>(&self, z: &Point, mut partial: F) -> f64
    where
        F: FnMut(u32, &[u32], &Point) -> f64,
    {
        self.terms
            .iter()
            .map(|(key, &c)| c * monomial_unchecked(&key.xpow, z.x.as_slice()) * partial(key.dt, &key.dx, z))
            .sum()
    }

    /// Highest Euclidean derivative order `dt + |dx|` among the terms.
    pub fn max_order(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.dt + k.dx.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_commutator_identity() {
        // ∂1 Y − Y ∂1 = ∂2 on the prototype group
        let g = GroupSpec::prototype();
        let lhs = DiffOp::word(&g, &[Letter::Dx(0), Letter::Y]);
        let rhs = DiffOp::word(&g, &[Letter::Y, Letter::Dx(0)]);
        let d2 = DiffOp::partial(0, &[0, 1]);
        assert_eq!(lhs, rhs.merged(d2));
    }

    #[test]
    fn y_on_coordinate() {
        // Y x2 = x1 on the prototype group
        let g = GroupSpec::prototype();
        let y = DiffOp::intrinsic(&g, 1, &[0, 0]);
        let z = Point::new(0.3, vec![1.7, -2.0]);
        let val = y.apply(&z, |dt, dx, z| match (dt, dx) {
            (0, [0, 0]) => z.x[1],
            (0, [0, 1]) => 1.0,
            _ => 0.0,
        });
        assert_eq!(val, 1.7);
    }

    #[test]
    fn y_squared_expansion_size() {
        // Y² = ∂t² + 2 x1 ∂t∂2 + x1² ∂2²
        let g = GroupSpec::prototype();
        let y2 = DiffOp::intrinsic(&g, 2, &[0, 0]);
        assert_eq!(y2.len(), 3);
        assert_eq!(y2.max_order(), 2);
    }
}
