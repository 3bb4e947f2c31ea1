//! Multi-index combinatorics weighted by the layer structure of `B`.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::GroupError;
use crate::group::GroupSpec;

/// `β ∈ ℕ₀^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// The unit index `e_j` (0-based `j`).
    pub fn unit(d: usize, j: usize) -> Self {
        let mut b = vec![0; d];
        b[j] = 1;
        MultiIndex(b)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|β|`
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// `β!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&b| factorial(b)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// A Taylor term `Y^k ∂^β`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaylorTermIndex {
    pub k: u32,
    pub beta: MultiIndex,
}

impl TaylorTermIndex {
    /// Intrinsic order `2k + |β|_B`.
    pub fn order(&self, spec: &GroupSpec) -> u32 {
        2 * self.k + b_length_unchecked(spec, &self.beta)
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn check_dim(spec: &GroupSpec, beta: &MultiIndex) -> Result<(), GroupError> {
    if beta.dim() == spec.d() {
        Ok(())
    } else {
        Err(GroupError::DimensionMismatch {
            expected: spec.d(),
            found: beta.dim(),
        })
    }
}

/// `|β|_B = Σ_i (2i + 1) |β^{[i]}|`.
pub fn b_length(spec: &GroupSpec, beta: &MultiIndex) -> Result<u32, GroupError> {
    check_dim(spec, beta)?;
    Ok(b_length_unchecked(spec, beta))
}

pub(crate) fn b_length_unchecked(spec: &GroupSpec, beta: &MultiIndex) -> u32 {
    beta.0
        .iter()
        .zip(spec.exponents())
        .map(|(b, q)| b * q)
        .sum()
}

/// `β^{[i]}`: the entries of `β` on layer `i`.
pub fn level_project(
    spec: &GroupSpec,
    beta: &MultiIndex,
    level: usize,
) -> Result<MultiIndex, GroupError> {
    check_dim(spec, beta)?;
    if level > spec.r() {
        return Err(GroupError::LevelOutOfRange {
            level: level as i64,
            max: spec.r(),
        });
    }
    let range = spec.layer_range(level);
    Ok(MultiIndex(
        beta.0
            .iter()
            .enumerate()
            .map(|(j, &b)| if range.contains(&j) { b } else { 0 })
            .collect(),
    ))
}

/// All `(k, β)` with `2k + |β|_B ≤ n`, sorted by intrinsic order, then `k`,
/// then lexicographically in `β`.
pub fn enumerate_terms(spec: &GroupSpec, n: u32) -> Vec<TaylorTermIndex> {
    let mut out = Vec::new();
    let mut scratch = vec![0u32; spec.d()];
    for k in 0..=n / 2 {
        let budget = n - 2 * k;
        fill_indices(spec.exponents(), 0, budget, &mut scratch, &mut |beta| {
            out.push(TaylorTermIndex {
                k,
                beta: MultiIndex(beta.to_vec()),
            })
        });
    }
    out.sort_by(|a, b| {
        (a.order(spec), a.k, &a.beta).cmp(&(b.order(spec), b.k, &b.beta))
    });
    out
}

fn fill_indices(
    weights: &[u32],
    pos: usize,
    budget: u32,
    scratch: &mut [u32],
    emit: &mut dyn FnMut(&[u32]),
) {
    if pos == weights.len() {
        emit(scratch);
        return;
    }
    let w = weights[pos];
    let mut m = 0;
    while m * w <= budget {
        scratch[pos] = m;
        fill_indices(weights, pos + 1, budget - m * w, scratch, emit);
        m += 1;
    }
    scratch[pos] = 0;
}

/// `v^β` with `0⁰ = 1`.
pub fn monomial(spec: &GroupSpec, beta: &MultiIndex, v: &DVector<f64>) -> Result<f64, GroupError> {
    check_dim(spec, beta)?;
    if v.len() != spec.d() {
        return Err(GroupError::DimensionMismatch {
            expected: spec.d(),
            found: v.len(),
        });
    }
    Ok(monomial_unchecked(&beta.0, v.as_slice()))
}

pub(crate) fn monomial_unchecked(beta: &[u32], v: &[f64]) -> f64 {
    beta.iter()
        .zip(v)
        .map(|(&b, &x)| x.powi(b as i32))
        .product()
}

/// Number of words `Z_{i_1} ⋯ Z_{i_k}` (`k ≥ 0`) over the Jacobian basis
/// `{Y, ∂_{x_1}, …, ∂_{x_d}}` with total intrinsic weight at most `n`.
/// This is the term count of the non-commutative (symmetrized) Taylor
/// formula on a homogeneous group, reported next to [`enumerate_terms`].
pub fn word_count(spec: &GroupSpec, n: u32) -> u64 {
    // counts[w] = number of words of weight exactly w
    let mut weights = vec![2u32];
    weights.extend_from_slice(spec.exponents());
    let mut counts = vec![0u64; n as usize + 1];
    counts[0] = 1;
    for w in 1..=n as usize {
        counts[w] = weights
            .iter()
            .filter(|&&s| s as usize <= w)
            .map(|&s| counts[w - s as usize])
            .sum();
    }
    counts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn layers_21() -> GroupSpec {
        GroupSpec::from_blocks(2, &[DMatrix::from_row_slice(1, 2, &[1.0, 0.0])]).unwrap()
    }

    #[test]
    fn b_lengths() {
        let g = GroupSpec::prototype();
        assert_eq!(b_length(&g, &mi(&[1, 0])).unwrap(), 1);
        assert_eq!(b_length(&g, &mi(&[0, 1])).unwrap(), 3);
        assert_eq!(b_length(&g, &mi(&[2, 1])).unwrap(), 5);
        assert!(b_length(&g, &mi(&[1])).is_err());
    }

    #[test]
    fn projections() {
        let g = GroupSpec::prototype();
        assert_eq!(level_project(&g, &mi(&[2, 5]), 0).unwrap(), mi(&[2, 0]));
        assert_eq!(level_project(&g, &mi(&[2, 5]), 1).unwrap(), mi(&[0, 5]));
        assert!(matches!(
            level_project(&g, &mi(&[2, 5]), 2),
            Err(GroupError::LevelOutOfRange { level: 2, max: 1 })
        ));
        let h = layers_21();
        assert_eq!(level_project(&h, &mi(&[1, 2, 3]), 0).unwrap(), mi(&[1, 2, 0]));
    }

    #[test]
    fn prototype_terms() {
        let g = GroupSpec::prototype();
        let t2 = enumerate_terms(&g, 2);
        let expect = vec![
            TaylorTermIndex { k: 0, beta: mi(&[0, 0]) },
            TaylorTermIndex { k: 0, beta: mi(&[1, 0]) },
            TaylorTermIndex { k: 0, beta: mi(&[2, 0]) },
            TaylorTermIndex { k: 1, beta: mi(&[0, 0]) },
        ];
        assert_eq!(t2, expect);

        let t3 = enumerate_terms(&g, 3);
        assert_eq!(t3.len(), 7);
        let added: Vec<_> = t3[4..].to_vec();
        assert_eq!(
            added,
            vec![
                TaylorTermIndex { k: 0, beta: mi(&[0, 1]) },
                TaylorTermIndex { k: 0, beta: mi(&[3, 0]) },
                TaylorTermIndex { k: 1, beta: mi(&[1, 0]) },
            ]
        );
        let counts: Vec<usize> = (0..=4).map(|n| enumerate_terms(&g, n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 7, 11]);
    }

    #[test]
    fn order_zero_is_constant_term() {
        let h = layers_21();
        assert_eq!(
            enumerate_terms(&h, 0),
            vec![TaylorTermIndex { k: 0, beta: MultiIndex::zeros(3) }]
        );
    }

    #[test]
    fn monomials() {
        let g = GroupSpec::prototype();
        let v = DVector::from_vec(vec![3.0, 5.0]);
        assert_eq!(monomial(&g, &mi(&[0, 0]), &v).unwrap(), 1.0);
        assert_eq!(monomial(&g, &mi(&[2, 1]), &v).unwrap(), 45.0);
        let w = DVector::from_vec(vec![0.0, 7.0]);
        assert_eq!(monomial(&g, &mi(&[1, 0]), &w).unwrap(), 0.0);
        assert_eq!(monomial(&g, &mi(&[0, 0]), &DVector::zeros(2)).unwrap(), 1.0);
    }

    #[test]
    fn word_counts_prototype() {
        // weights {2, 1, 3}: weight-1 words: ∂1; weight-2: ∂1∂1, Y; weight-3:
        // ∂1∂1∂1, ∂1Y, Y∂1, ∂2
        let g = GroupSpec::prototype();
        let counts: Vec<u64> = (0..=3).map(|n| word_count(&g, n)).collect();
        assert_eq!(counts, vec![1, 2, 4, 8]);
    }
}
