use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Designs whose equilibrated 1-norm condition number reaches this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (tree) summation. The split points depend only on the length, so
/// the result is reproducible for a given input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `term(j)` over the SNPs with `include(j)`, visited in index order.
pub fn masked_sum(n: usize, include: impl Fn(usize) -> bool, term: impl Fn(usize) -> f64) -> f64 {
    let terms: Vec<f64> = (0..n).filter(|&j| include(j)).map(term).collect();
    pairwise_sum(&terms)
}

/// 1-norm condition number after scaling rows, then columns, by their largest
/// absolute entry. Infinite when the matrix is singular.
pub fn scaled_condition<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let mut a = *m;
    for i in 0..N {
        let s = a.row(i).amax();
        if s == 0.0 || !s.is_finite() {
            return f64::INFINITY;
        }
        a.row_mut(i).scale_mut(1.0 / s);
    }
    for k in 0..N {
        let s = a.column(k).amax();
        if s == 0.0 {
            return f64::INFINITY;
        }
        a.column_mut(k).scale_mut(1.0 / s);
    }
    match a.try_inverse() {
        Some(inv) => norm1(&a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

fn norm1<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `m x = rhs` after the conditioning guard and returns `(x, m⁻¹)`.
pub fn guarded_solve<const N: usize>(
    m: &SMatrix<f64, N, N>,
    rhs: &SVector<f64, N>,
) -> Result<(SVector<f64, N>, SMatrix<f64, N, N>)> {
    let condition = scaled_condition(m);
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::DegenerateDesign {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let inv = m.try_inverse().ok_or(Error::DegenerateDesign {
        condition: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })?;
    let x = inv * rhs;
    Ok((x, inv))
}
